//! Brute-force oracle for the incremental moment tracker: components are
//! recomputed from the raw edge list by breadth-first search, with no shared
//! code path with the union-find.

use rand::Rng;
use std::collections::VecDeque;
use suscept::graph::ComponentTracker;
use suscept::rng::{derive_seed, replicate_rng};

/// Component sizes by BFS over an adjacency list built from the edges.
fn component_sizes_bfs(n: u64, edges: &[(u64, u64)]) -> Vec<u64> {
    let n = n as usize;
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut size = 0u64;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

fn moments_from_sizes(sizes: &[u64], kmax: usize) -> Vec<u128> {
    let mut s = vec![0u128; kmax];
    for &size in sizes {
        for (k, slot) in s.iter_mut().enumerate() {
            *slot += (size as u128).pow(k as u32 + 1);
        }
    }
    s
}

#[test]
fn incremental_moments_match_bfs_on_200_random_instances() {
    let kmax = 8;
    for instance in 0..200u64 {
        let mut rng = replicate_rng(derive_seed(0xACCE97, instance));
        let n = rng.random_range(2..=2000u64);
        let m = rng.random_range(0..=2 * n);
        let mut tracker = ComponentTracker::new(n, kmax).unwrap();
        let mut edges = Vec::new();
        for _ in 0..m {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v {
                continue;
            }
            edges.push((u, v));
            tracker.add_edge(u, v).unwrap();
        }
        let sizes = component_sizes_bfs(n, &edges);
        let expected = moments_from_sizes(&sizes, kmax);
        assert_eq!(
            tracker.moments(),
            &expected[..],
            "instance {instance}: n={n}, m={}",
            edges.len()
        );

        // the two largest sizes must agree with the enumeration as well
        let mut sorted = sizes.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let (l1, l2) = tracker.largest_two();
        assert_eq!(l1, sorted[0]);
        assert_eq!(l2, sorted.get(1).copied().unwrap_or(0));
    }
}

#[test]
fn s_kl_matches_double_sum_enumeration() {
    for instance in 0..60u64 {
        let mut rng = replicate_rng(derive_seed(0x5C1, instance));
        let n = rng.random_range(2..=200u64);
        let m = rng.random_range(0..=n);
        let mut tracker = ComponentTracker::new(n, 8).unwrap();
        let mut edges = Vec::new();
        for _ in 0..m {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u != v {
                edges.push((u, v));
                tracker.add_edge(u, v).unwrap();
            }
        }
        let sizes = component_sizes_bfs(n, &edges);
        for k in 1..=4usize {
            for l in 1..=(8 - k).min(4) {
                let mut double_sum = 0u128;
                for (i, &a) in sizes.iter().enumerate() {
                    for (j, &b) in sizes.iter().enumerate() {
                        if i != j {
                            double_sum += (a as u128).pow(k as u32) * (b as u128).pow(l as u32);
                        }
                    }
                }
                assert_eq!(
                    tracker.s_kl(k, l).unwrap(),
                    double_sum,
                    "instance {instance}: S_({k},{l})"
                );
            }
        }
    }
}
