//! Seeded random DAG generation for test suites and demos.
//!
//! Nodes are laid out in a fixed topological order (sources, internals,
//! sink) and edges only point forward, so every generated network is acyclic
//! with input-free sources, and every node keeps a path to the sink by
//! construction. Identical seeds give identical networks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::network::Network;

/// Deterministic random network with at most `max_edges` edges and at most
/// `max_sources` sources.
pub fn random_network(seed: u64, max_edges: usize, max_sources: usize) -> Network {
    for attempt in 0..64u64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ attempt.wrapping_mul(0x9e3779b97f4a7c15));
        if let Some(net) = try_generate(&mut rng, max_edges, max_sources) {
            return net;
        }
    }
    // Minimal fallback: one source, one edge.
    Network::validated(
        vec!["s1".into(), "t".into()],
        vec![("e1".into(), "s1".into(), "t".into())],
        vec!["s1".into()],
        "t".into(),
    )
    .expect("fallback network is valid")
}

fn try_generate(rng: &mut ChaCha12Rng, max_edges: usize, max_sources: usize) -> Option<Network> {
    let s = rng.random_range(1..=max_sources);
    let internals = rng.random_range(0..=2usize);
    let n = s + internals + 1;
    let sink = n - 1;

    let mut names: Vec<String> = (0..s).map(|i| format!("s{}", i + 1)).collect();
    names.extend((0..internals).map(|i| format!("v{}", i + 1)));
    names.push("t".into());

    // Allowed heads for node v: any strictly later non-source node.
    let heads = |v: usize| (s.max(v + 1)..n).collect::<Vec<usize>>();

    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for v in 0..s {
        let deg = rng.random_range(1..=2usize);
        for _ in 0..deg {
            let hs = heads(v);
            arcs.push((v, hs[rng.random_range(0..hs.len())]));
        }
    }
    for v in s..s + internals {
        let hs = heads(v);
        arcs.push((v, hs[rng.random_range(0..hs.len())]));
        // Feed internals that nothing points at yet.
        if !arcs.iter().any(|&(_, h)| h == v) {
            let tail = rng.random_range(0..v);
            arcs.push((tail, v));
        }
    }
    let extra = rng.random_range(0..=max_edges);
    for _ in 0..extra {
        if arcs.len() >= max_edges {
            break;
        }
        let v = rng.random_range(0..n - 1);
        let hs = heads(v);
        arcs.push((v, hs[rng.random_range(0..hs.len())]));
    }
    if arcs.len() > max_edges {
        return None;
    }

    let edges: Vec<(String, String, String)> = arcs
        .iter()
        .enumerate()
        .map(|(i, &(t, h))| (format!("e{}", i + 1), names[t].clone(), names[h].clone()))
        .collect();
    Network::validated(
        names.clone(),
        edges,
        names[..s].to_vec(),
        names[sink].clone(),
    )
    .ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_networks_validate_and_repeat() {
        for seed in 0..40u64 {
            let a = random_network(seed, 10, 3);
            assert!(a.validate().is_empty(), "seed {seed}");
            assert!(a.edge_count() <= 10);
            assert!(a.source_count() >= 1 && a.source_count() <= 3);
            assert!(a.c_min() >= 1);
            let b = random_network(seed, 10, 3);
            assert_eq!(a.edge_count(), b.edge_count());
            for (x, y) in a.edges().iter().zip(b.edges()) {
                assert_eq!((x.tail, x.head), (y.tail, y.head));
            }
        }
    }
}
