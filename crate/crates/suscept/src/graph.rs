//! Evolving random graph with incremental component-size moments.
//!
//! `ComponentTracker` is a union-find (union by size, path compression) that
//! maintains S_k = sum over components of size^k for k = 1..kmax on every
//! merge, using the jump formula delta S_k = (a + b)^k - a^k - b^k when
//! components of sizes a and b join. Moments are exact 128-bit integers
//! with checked arithmetic: overflow is a hard error, never silent drift.
//! kmax is capped at 16 so that the worst case (a single giant component at
//! n = 10^6, k = 6) still fits comfortably in the 128-bit range.
//!
//! Snapshots of G(n, p) draw the edge count from an exact Binomial(N, p) and
//! insert that many distinct uniform pairs by rejection, which is cheap in
//! the sparse regimes this crate targets (m = O(n) while N = n(n-1)/2).
//! Trajectories add distinct edges one at a time in uniformly random order,
//! emitting a summary at each requested edge count.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use thiserror::Error;

use crate::rng::{replicate_rng, ReplicateRng};

pub const MAX_KMAX: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vertex count must be at least 1")]
    EmptyGraph,
    #[error("vertex count {n} exceeds the supported maximum {max}")]
    TooManyVertices { n: u64, max: u64 },
    #[error("kmax must lie in [2, {MAX_KMAX}], got {kmax}")]
    KmaxOutOfRange { kmax: usize },
    #[error("vertex {v} out of range for n = {n}")]
    VertexOutOfRange { v: u64, n: u64 },
    #[error("self-loop at vertex {v}: the model has no self-loops")]
    SelfLoop { v: u64 },
    #[error(
        "S_{k} overflowed 128-bit integer range during an update; \
         lower kmax (currently {kmax}) or shrink the graph"
    )]
    MomentOverflow { k: usize, kmax: usize },
    #[error("edge probability must lie in [0, 1], got {p}")]
    ProbabilityOutOfRange { p: f64 },
    #[error("checkpoints must be strictly increasing (offender: {value})")]
    CheckpointsNotIncreasing { value: u64 },
    #[error("checkpoint {value} exceeds the number of possible edges {max}")]
    CheckpointTooLarge { value: u64, max: u64 },
    #[error("moment order {k} not tracked (kmax = {kmax})")]
    MomentNotTracked { k: usize, kmax: usize },
    #[error("drift of S_{k} needs moments up to {need}, but kmax = {kmax}")]
    DriftNeedsHigherKmax { k: usize, need: usize, kmax: usize },
}

/// Result of one `add_edge` call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeOutcome {
    pub merged: bool,
    /// Sizes of the two components before the merge, when one happened.
    pub sizes_before: Option<(u64, u64)>,
    /// delta S_k for k = 1..=kmax (all zeros when no merge happened).
    pub deltas: Vec<u128>,
}

/// Union-find over n vertices with incremental moments S_1..S_kmax.
#[derive(Debug, Clone)]
pub struct ComponentTracker {
    parent: Vec<u32>,
    size: Vec<u32>,
    kmax: usize,
    /// s[i] = S_{i+1}.
    s: Vec<u128>,
    /// Multiset of component sizes (size -> count); keeps the two largest
    /// sizes exact under merges.
    size_counts: BTreeMap<u64, u64>,
    merges: u64,
}

impl ComponentTracker {
    /// n singleton components, S_k = n for every tracked k.
    pub fn new(n: u64, kmax: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        if n > u32::MAX as u64 {
            return Err(GraphError::TooManyVertices {
                n,
                max: u32::MAX as u64,
            });
        }
        if !(2..=MAX_KMAX).contains(&kmax) {
            return Err(GraphError::KmaxOutOfRange { kmax });
        }
        let mut size_counts = BTreeMap::new();
        size_counts.insert(1, n);
        Ok(ComponentTracker {
            parent: (0..n as u32).collect(),
            size: vec![1; n as usize],
            kmax,
            s: vec![n as u128; kmax],
            size_counts,
            merges: 0,
        })
    }

    pub fn n(&self) -> u64 {
        self.parent.len() as u64
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn merges(&self) -> u64 {
        self.merges
    }

    fn find(&mut self, v: u32) -> u32 {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = v;
        while cur != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Adds edge {u, v}. A merge updates every S_k by the jump formula with
    /// checked arithmetic; an edge inside one component changes nothing.
    pub fn add_edge(&mut self, u: u64, v: u64) -> Result<MergeOutcome, GraphError> {
        let n = self.n();
        if u >= n {
            return Err(GraphError::VertexOutOfRange { v: u, n });
        }
        if v >= n {
            return Err(GraphError::VertexOutOfRange { v, n });
        }
        if u == v {
            return Err(GraphError::SelfLoop { v: u });
        }
        let ru = self.find(u as u32);
        let rv = self.find(v as u32);
        if ru == rv {
            return Ok(MergeOutcome {
                merged: false,
                sizes_before: None,
                deltas: vec![0; self.kmax],
            });
        }
        let a = self.size[ru as usize] as u64;
        let b = self.size[rv as usize] as u64;
        // compute all jumps before touching any state, so overflow leaves the
        // tracker unchanged
        let mut deltas = vec![0u128; self.kmax];
        let mut updated = self.s.clone();
        for k in 2..=self.kmax {
            let delta = jump(a, b, k).ok_or(GraphError::MomentOverflow { k, kmax: self.kmax })?;
            updated[k - 1] = updated[k - 1]
                .checked_add(delta)
                .ok_or(GraphError::MomentOverflow { k, kmax: self.kmax })?;
            deltas[k - 1] = delta;
        }
        self.s = updated;
        let (big, small) = if a >= b { (ru, rv) } else { (rv, ru) };
        self.parent[small as usize] = big;
        self.size[big as usize] = (a + b) as u32;
        decrement(&mut self.size_counts, a);
        decrement(&mut self.size_counts, b);
        *self.size_counts.entry(a + b).or_insert(0) += 1;
        self.merges += 1;
        Ok(MergeOutcome {
            merged: true,
            sizes_before: Some((a, b)),
            deltas,
        })
    }

    /// S_k for a tracked k.
    pub fn moment(&self, k: usize) -> Result<u128, GraphError> {
        if k == 0 || k > self.kmax {
            return Err(GraphError::MomentNotTracked { k, kmax: self.kmax });
        }
        Ok(self.s[k - 1])
    }

    /// All tracked moments S_1..S_kmax.
    pub fn moments(&self) -> &[u128] {
        &self.s
    }

    /// Susceptibility chi = S_2 / n.
    pub fn chi(&self) -> f64 {
        self.s[1] as f64 / self.n() as f64
    }

    /// S_{k,l} = S_k S_l - S_{k+l}, the sum over ordered pairs of distinct
    /// components of |C_i|^k |C_j|^l.
    pub fn s_kl(&self, k: usize, l: usize) -> Result<u128, GraphError> {
        if k == 0 || l == 0 || k + l > self.kmax {
            return Err(GraphError::MomentNotTracked {
                k: k + l,
                kmax: self.kmax,
            });
        }
        let prod = self.s[k - 1]
            .checked_mul(self.s[l - 1])
            .ok_or(GraphError::MomentOverflow {
                k: k + l,
                kmax: self.kmax,
            })?;
        // S_k S_l >= S_{k+l} always (the diagonal terms of the product)
        Ok(prod - self.s[k + l - 1])
    }

    /// Drift of S_k in the unit-rate edge-arrival process:
    /// V_k = 1/2 sum_{l=1}^{k-1} C(k,l) S_{l+1, k+1-l}. Exact; needs moments
    /// up to k+2.
    pub fn drift_v(&self, k: usize) -> Result<u128, GraphError> {
        if k < 2 {
            return Err(GraphError::MomentNotTracked { k, kmax: self.kmax });
        }
        if k + 2 > self.kmax {
            return Err(GraphError::DriftNeedsHigherKmax {
                k,
                need: k + 2,
                kmax: self.kmax,
            });
        }
        let mut sum = 0u128;
        for l in 1..k {
            let c = binomial_u128(k as u64, l as u64);
            let term =
                c.checked_mul(self.s_kl(l + 1, k + 1 - l)?)
                    .ok_or(GraphError::MomentOverflow {
                        k: k + 2,
                        kmax: self.kmax,
                    })?;
            sum = sum.checked_add(term).ok_or(GraphError::MomentOverflow {
                k: k + 2,
                kmax: self.kmax,
            })?;
        }
        // the l <-> k-l symmetry (and the even central binomial coefficient
        // when k is even) makes the sum even
        debug_assert_eq!(sum % 2, 0);
        Ok(sum / 2)
    }

    /// Sizes of all components (order unspecified). O(n); meant for
    /// summaries and verification, not the hot path.
    pub fn component_sizes(&self) -> Vec<u64> {
        (0..self.parent.len())
            .filter(|&v| self.parent[v] == v as u32)
            .map(|v| self.size[v] as u64)
            .collect()
    }

    /// The two largest component sizes (largest2 = 0 when only one component
    /// exists).
    pub fn largest_two(&self) -> (u64, u64) {
        let mut iter = self.size_counts.iter().rev();
        match iter.next() {
            None => (0, 0),
            Some((&size, &count)) => {
                if count >= 2 {
                    (size, size)
                } else {
                    (size, iter.next().map(|(&s, _)| s).unwrap_or(0))
                }
            }
        }
    }

    /// Recomputes every moment from scratch by component enumeration; the
    /// independent oracle the incremental path is tested against.
    pub fn recompute_moments(&self) -> Vec<u128> {
        let mut s = vec![0u128; self.kmax];
        for size in self.component_sizes() {
            for k in 1..=self.kmax {
                s[k - 1] += (size as u128).pow(k as u32);
            }
        }
        s
    }
}

fn decrement(counts: &mut BTreeMap<u64, u64>, size: u64) {
    match counts.get_mut(&size) {
        Some(c) if *c > 1 => *c -= 1,
        Some(_) => {
            counts.remove(&size);
        }
        None => unreachable!("size multiset out of sync"),
    }
}

/// (a+b)^k - a^k - b^k with checked 128-bit arithmetic.
fn jump(a: u64, b: u64, k: usize) -> Option<u128> {
    let merged = checked_pow((a + b) as u128, k)?;
    Some(merged - checked_pow(a as u128, k)? - checked_pow(b as u128, k)?)
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    base.checked_pow(exp as u32)
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of possible edges N = n(n-1)/2.
pub fn pair_count(n: u64) -> u64 {
    n * (n - 1) / 2
}

/// Per-replicate record of one sampled graph.
#[derive(Debug, Clone, Serialize)]
pub struct SnapshotSummary {
    pub n: u64,
    /// Number of distinct edges present.
    pub m: u64,
    /// Bernoulli edge probability.
    pub p: f64,
    /// Process time t = -ln(1 - p).
    pub t: f64,
    /// Relative density nt.
    pub nt: f64,
    pub kmax: usize,
    /// S_1..S_kmax as decimal strings (values can exceed every native width).
    #[serde(serialize_with = "serialize_u128_seq")]
    pub s: Vec<u128>,
    /// Susceptibility chi = S_2 / n.
    pub chi: f64,
    pub largest1: u64,
    pub largest2: u64,
    pub seed: u64,
    pub replicate: u64,
}

fn serialize_u128_seq<S: serde::Serializer>(
    values: &[u128],
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.collect_seq(values.iter().map(|v| v.to_string()))
}

impl SnapshotSummary {
    fn from_tracker(tracker: &ComponentTracker, m: u64, p: f64, seed: u64, replicate: u64) -> Self {
        let n = tracker.n();
        // .max(0.0) normalizes the -0.0 that -ln(1) produces at p = 0
        let t = (-(1.0 - p).ln()).max(0.0);
        let (largest1, largest2) = tracker.largest_two();
        SnapshotSummary {
            n,
            m,
            p,
            t,
            nt: n as f64 * t,
            kmax: tracker.kmax(),
            s: tracker.moments().to_vec(),
            chi: tracker.chi(),
            largest1,
            largest2,
            seed,
            replicate,
        }
    }

    /// CSV header matching `to_csv_row`.
    pub fn csv_header(kmax: usize) -> String {
        let mut cols = vec![
            "n".to_string(),
            "m".to_string(),
            "p".to_string(),
            "t".to_string(),
            "nt".to_string(),
            "kmax".to_string(),
        ];
        cols.extend((1..=kmax).map(|k| format!("S_{k}")));
        cols.extend(
            ["chi", "largest1", "largest2", "seed", "replicate"]
                .iter()
                .map(|s| s.to_string()),
        );
        cols.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        let mut cols = vec![
            self.n.to_string(),
            self.m.to_string(),
            self.p.to_string(),
            self.t.to_string(),
            self.nt.to_string(),
            self.kmax.to_string(),
        ];
        cols.extend(self.s.iter().map(|v| v.to_string()));
        cols.push(self.chi.to_string());
        cols.push(self.largest1.to_string());
        cols.push(self.largest2.to_string());
        cols.push(self.seed.to_string());
        cols.push(self.replicate.to_string());
        cols.join(",")
    }
}

/// Draws one uniform pair u < v, rejecting self-pairs.
fn random_pair(n: u64, rng: &mut ReplicateRng) -> (u64, u64) {
    loop {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v {
            return (u.min(v), u.max(v));
        }
    }
}

fn edge_key(n: u64, u: u64, v: u64) -> u64 {
    u * n + v
}

/// A sampled G(n, p) instance: the tracker plus the edge set (keys u*n+v
/// with u < v), for callers that need to know which pairs are present.
pub struct GnpSample {
    pub tracker: ComponentTracker,
    pub edges: HashSet<u64>,
}

/// Samples G(n, p): edge count m ~ Binomial(N, p) exactly in distribution,
/// then m distinct uniform pairs by rejection.
pub fn sample_gnp_with_edges(
    n: u64,
    p: f64,
    kmax: usize,
    rng: &mut ReplicateRng,
) -> Result<GnpSample, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::ProbabilityOutOfRange { p });
    }
    let mut tracker = ComponentTracker::new(n, kmax)?;
    let total_pairs = pair_count(n);
    let m = if total_pairs == 0 {
        0
    } else {
        Binomial::new(total_pairs, p)
            .expect("validated p")
            .sample(rng)
    };
    let mut edges = HashSet::with_capacity(m as usize);
    while (edges.len() as u64) < m {
        let (u, v) = random_pair(n, rng);
        if edges.insert(edge_key(n, u, v)) {
            tracker.add_edge(u, v)?;
        }
    }
    Ok(GnpSample { tracker, edges })
}

/// G(n, p) snapshot summary for one seeded replicate.
pub fn sample_gnp(
    n: u64,
    p: f64,
    kmax: usize,
    seed: u64,
    replicate: u64,
) -> Result<SnapshotSummary, GraphError> {
    let mut rng = replicate_rng(seed);
    let sample = sample_gnp_with_edges(n, p, kmax, &mut rng)?;
    Ok(SnapshotSummary::from_tracker(
        &sample.tracker,
        sample.edges.len() as u64,
        p,
        seed,
        replicate,
    ))
}

/// Runs the edge-ordered graph process: distinct edges arrive in uniformly
/// random order, and a summary is emitted at each requested edge count.
/// Each summary reports p = m/N and t = -ln(1 - p).
pub fn trajectory(
    n: u64,
    kmax: usize,
    checkpoints: &[u64],
    seed: u64,
) -> Result<Vec<SnapshotSummary>, GraphError> {
    let total_pairs = pair_count(n);
    let mut last: Option<u64> = None;
    for &c in checkpoints {
        if last.is_some_and(|prev| c <= prev) {
            return Err(GraphError::CheckpointsNotIncreasing { value: c });
        }
        if c > total_pairs {
            return Err(GraphError::CheckpointTooLarge {
                value: c,
                max: total_pairs,
            });
        }
        last = Some(c);
    }
    let mut tracker = ComponentTracker::new(n, kmax)?;
    let mut rng = replicate_rng(seed);
    let mut edges = HashSet::new();
    let mut summaries = Vec::with_capacity(checkpoints.len());
    for &target in checkpoints {
        while (edges.len() as u64) < target {
            let (u, v) = random_pair(n, &mut rng);
            if edges.insert(edge_key(n, u, v)) {
                tracker.add_edge(u, v)?;
            }
        }
        let m = edges.len() as u64;
        let p = m as f64 / total_pairs as f64;
        summaries.push(SnapshotSummary::from_tracker(&tracker, m, p, seed, 0));
    }
    Ok(summaries)
}
