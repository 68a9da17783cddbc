//! Capacity bounds for securely computing the sum under a size-`r` wiretap
//! adversary.
//!
//! The main bound minimizes `|C| - |W|` over valid pairs of a cut set `C`
//! and a wiretap set `W ⊆ C`; a pair is valid when either some isolated
//! source avoids every wiretapped edge, or the cut is global and every
//! source reaches the wiretap set. A companion bound for source security
//! replaces validity by `D_W ⊆ I_C`. Both enumerations share the closed-form
//! sandwich `C_min - r ≤ bound ≤ min{C_min, C_min^S - r}`, which also
//! supplies a provably unbeatable early-exit floor.
//!
//! Enumeration order is fixed: cut sets in (size, lexicographic) order and,
//! inside each cut, wiretap subsets by descending size then lexicographic,
//! so the reported witness pair is deterministic.

use itertools::Itertools;
use serde::Serialize;

use crate::network::{EdgeId, Limits, NetError, Network};

/// How a bound value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMode {
    Exhaustive,
    ClosedForm,
}

/// Bounds for one security level on one network.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub r: usize,
    pub mode: BoundMode,
    pub c_min: usize,
    pub c_min_s: usize,
    /// Minimum of |C|-|W| over valid pairs; `None` in closed-form mode.
    pub target_bound: Option<usize>,
    pub closed_lower: usize,
    pub closed_upper: usize,
    /// The source-security counterpart; `None` in closed-form mode.
    pub source_bound: Option<usize>,
    pub target_witness: Option<WitnessPair>,
    pub source_witness: Option<WitnessPair>,
}

/// A (cut set, wiretap set) pair attaining a bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPair {
    pub cut: Vec<EdgeId>,
    pub wiretap: Vec<EdgeId>,
}

/// Whether `(c, w)` is a valid pair: `w ⊆ c`, `c` is a cut set, and either
/// some isolated source misses `w` entirely or the cut is global with every
/// source reaching `w`.
pub fn is_valid_pair(net: &Network, c: &[EdgeId], w: &[EdgeId]) -> bool {
    if !w.iter().all(|e| c.contains(e)) {
        return false;
    }
    let masks = net.all_edge_source_masks();
    let i_mask = net.isolated_mask(net.edge_mask(c));
    if i_mask == 0 {
        return false;
    }
    let d_w = w.iter().fold(0u64, |m, &e| m | masks[e.0]);
    let full = (1u64 << net.source_count()) - 1;
    i_mask & !d_w != 0 || (d_w == full && i_mask == full)
}

enum PairRule {
    /// cond 1 or cond 2 of the valid-pair definition.
    Valid,
    /// `D_W ⊆ I_C`, the source-security constraint.
    SourceContained,
}

fn exhaustive_min(
    net: &Network,
    r: usize,
    rule: PairRule,
    limits: &Limits,
) -> Result<(usize, Option<WitnessPair>), NetError> {
    let m = net.edge_count();
    if m > limits.max_enum_edges {
        return Err(NetError::TooLarge(format!(
            "{m} edges exceeds the enumeration cap {}",
            limits.max_enum_edges
        )));
    }
    let masks = net.all_edge_source_masks();
    let full: u64 = (1 << net.source_count()) - 1;
    let floor = net.c_min().saturating_sub(r);
    let mut best: Option<(usize, WitnessPair)> = None;
    'cuts: for size in 1..=m {
        if let Some((value, _)) = &best {
            // No larger cut can beat `value` unless it hides a bigger W.
            if size.saturating_sub(r.min(size)) > *value {
                continue;
            }
        }
        for combo in (0..m).combinations(size) {
            let c: Vec<EdgeId> = combo.into_iter().map(EdgeId).collect();
            let i_mask = net.isolated_mask(net.edge_mask(&c));
            if i_mask == 0 {
                continue;
            }
            // Largest admissible wiretap subset first.
            for w_size in (0..=r.min(size)).rev() {
                let value = size - w_size;
                if best.as_ref().is_some_and(|(b, _)| value >= *b) {
                    break;
                }
                let mut found = None;
                for w_combo in c.iter().copied().combinations(w_size) {
                    let d_w = w_combo.iter().fold(0u64, |acc, e| acc | masks[e.0]);
                    let ok = match rule {
                        PairRule::Valid => i_mask & !d_w != 0 || (d_w == full && i_mask == full),
                        PairRule::SourceContained => d_w & !i_mask == 0,
                    };
                    if ok {
                        found = Some(w_combo);
                        break;
                    }
                }
                if let Some(w) = found {
                    best = Some((
                        value,
                        WitnessPair {
                            cut: c.clone(),
                            wiretap: w,
                        },
                    ));
                    if value == floor {
                        break 'cuts;
                    }
                    break;
                }
            }
        }
    }
    let (value, witness) =
        best.expect("a minimum cut with the empty wiretap set is always admissible");
    Ok((value, Some(witness)))
}

/// Exhaustive minimum of |C|-|W| over valid pairs; 0 when `r` exceeds the
/// joint min cut (no positive rate is possible then).
pub fn target_bound(
    net: &Network,
    r: usize,
    limits: &Limits,
) -> Result<(usize, Option<WitnessPair>), NetError> {
    if r > net.c_min_s() {
        return Ok((0, None));
    }
    exhaustive_min(net, r, PairRule::Valid, limits)
}

/// Exhaustive minimum of |C|-|W| over pairs with `W ⊆ C` and `D_W ⊆ I_C`.
pub fn source_bound(
    net: &Network,
    r: usize,
    limits: &Limits,
) -> Result<(usize, Option<WitnessPair>), NetError> {
    if r > net.c_min_s() {
        return Ok((0, None));
    }
    exhaustive_min(net, r, PairRule::SourceContained, limits)
}

/// The closed-form sandwich `(max(0, C_min - r), min{C_min, C_min^S - r})`;
/// `(0, 0)` once `r` exceeds the joint min cut.
pub fn closed_form(net: &Network, r: usize) -> (usize, usize) {
    let c_min = net.c_min();
    let c_min_s = net.c_min_s();
    if r > c_min_s {
        return (0, 0);
    }
    (c_min.saturating_sub(r), c_min.min(c_min_s - r))
}

/// Full report; exhaustive mode falls back with an error the caller may
/// downgrade to closed form.
pub fn bound_report(
    net: &Network,
    r: usize,
    mode: BoundMode,
    limits: &Limits,
) -> Result<BoundReport, NetError> {
    let (closed_lower, closed_upper) = closed_form(net, r);
    let mut report = BoundReport {
        r,
        mode,
        c_min: net.c_min(),
        c_min_s: net.c_min_s(),
        target_bound: None,
        closed_lower,
        closed_upper,
        source_bound: None,
        target_witness: None,
        source_witness: None,
    };
    if mode == BoundMode::Exhaustive {
        let (tb, tw) = target_bound(net, r, limits)?;
        let (sb, sw) = source_bound(net, r, limits)?;
        report.target_bound = Some(tb);
        report.target_witness = tw;
        report.source_bound = Some(sb);
        report.source_witness = sw;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::netgen::random_network;
    use crate::network::Limits;

    fn ids(net: &Network, names: &[&str]) -> Vec<EdgeId> {
        names.iter().map(|n| net.edge_by_id(n).unwrap()).collect()
    }

    #[test]
    fn valid_pair_examples() {
        let (net, _) = fixtures::rbfly();
        assert!(is_valid_pair(
            &net,
            &ids(&net, &["e8", "e9"]),
            &ids(&net, &["e8"])
        ));
        assert!(!is_valid_pair(
            &net,
            &ids(&net, &["e1", "e2"]),
            &ids(&net, &["e1"])
        ));
        assert!(is_valid_pair(&net, &ids(&net, &["e1", "e2"]), &[]));
    }

    #[test]
    fn target_bound_examples() {
        let limits = Limits::default();
        let (net, _) = fixtures::rbfly();
        assert_eq!(target_bound(&net, 1, &limits).unwrap().0, 1);
        assert_eq!(target_bound(&net, 0, &limits).unwrap().0, 2);
        let (toy, _) = fixtures::toy2();
        assert_eq!(target_bound(&toy, 1, &limits).unwrap().0, 1);
    }

    #[test]
    fn closed_form_examples() {
        let (net, _) = fixtures::rbfly();
        assert_eq!(closed_form(&net, 1), (1, 1));
        let (toy, _) = fixtures::toy2();
        assert_eq!(closed_form(&toy, 1), (0, 1));
        assert_eq!(closed_form(&net, 2), (0, 0));
        assert_eq!(closed_form(&net, 3), (0, 0));
    }

    #[test]
    fn source_bound_examples() {
        let limits = Limits::default();
        let (net, _) = fixtures::rbfly();
        assert_eq!(source_bound(&net, 1, &limits).unwrap().0, 1);
        let (toy, _) = fixtures::toy2();
        assert_eq!(source_bound(&toy, 1, &limits).unwrap().0, 0);
        assert_eq!(source_bound(&net, 0, &limits).unwrap().0, net.c_min());
        assert_eq!(source_bound(&toy, 0, &limits).unwrap().0, toy.c_min());
    }

    #[test]
    fn witnesses_attain_their_values() {
        let limits = Limits::default();
        let (net, _) = fixtures::rbfly();
        let (value, witness) = target_bound(&net, 1, &limits).unwrap();
        let w = witness.unwrap();
        assert!(is_valid_pair(&net, &w.cut, &w.wiretap));
        assert_eq!(w.cut.len() - w.wiretap.len(), value);
    }

    /// Slow reference: scan every (C, W) pair without pruning.
    fn brute_bound(net: &Network, r: usize, source_rule: bool) -> usize {
        let m = net.edge_count();
        let masks = net.all_edge_source_masks();
        let mut best = usize::MAX;
        for c_mask in 1u32..(1 << m) {
            let c: Vec<EdgeId> = (0..m)
                .filter(|&i| c_mask & (1 << i) != 0)
                .map(EdgeId)
                .collect();
            for w_mask in 0u32..(1 << m) {
                if w_mask & !c_mask != 0 {
                    continue;
                }
                let w: Vec<EdgeId> = (0..m)
                    .filter(|&i| w_mask & (1 << i) != 0)
                    .map(EdgeId)
                    .collect();
                if w.len() > r {
                    continue;
                }
                let ok = if source_rule {
                    let i_mask = net.isolated_mask(c_mask);
                    let d_w = w.iter().fold(0u64, |acc, e| acc | masks[e.0]);
                    i_mask != 0 && d_w & !i_mask == 0
                } else {
                    is_valid_pair(net, &c, &w)
                };
                if ok {
                    best = best.min(c.len() - w.len());
                }
            }
        }
        best
    }

    #[test]
    fn pruned_enumeration_matches_brute_force() {
        let limits = Limits::default();
        for seed in 0..12u64 {
            let net = random_network(seed, 6, 3);
            for r in 0..=net.c_min_s() {
                let (fast, _) = target_bound(&net, r, &limits).unwrap();
                assert_eq!(
                    fast,
                    brute_bound(&net, r, false),
                    "target seed {seed} r {r}"
                );
                let (fast, _) = source_bound(&net, r, &limits).unwrap();
                assert_eq!(fast, brute_bound(&net, r, true), "source seed {seed} r {r}");
            }
        }
    }

    #[test]
    fn sandwich_comparison_and_monotonicity() {
        let limits = Limits::default();
        for seed in 100..120u64 {
            let net = random_network(seed, 9, 3);
            let mut prev: Option<usize> = None;
            for r in 0..=net.c_min_s() {
                let (tb, _) = target_bound(&net, r, &limits).unwrap();
                let (sb, _) = source_bound(&net, r, &limits).unwrap();
                let (lo, hi) = closed_form(&net, r);
                assert!(
                    lo <= tb && tb <= hi,
                    "seed {seed} r {r}: {lo} <= {tb} <= {hi}"
                );
                assert!(sb <= tb, "seed {seed} r {r}");
                if let Some(p) = prev {
                    assert!(tb <= p, "target bound must not increase with r");
                }
                prev = Some(tb);
            }
            assert_eq!(target_bound(&net, 0, &limits).unwrap().0, net.c_min());
        }
    }

    #[test]
    fn oversized_r_short_circuits() {
        let (net, _) = fixtures::rbfly();
        let limits = Limits::default();
        assert_eq!(target_bound(&net, 3, &limits).unwrap(), (0, None));
        assert_eq!(source_bound(&net, 99, &limits).unwrap().0, 0);
    }
}
