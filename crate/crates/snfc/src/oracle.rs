//! Ground-truth verification by exhaustive enumeration.
//!
//! The security checks in [`crate::code`] are subspace conditions; this
//! module recomputes the same verdicts from first principles by enumerating
//! every message/key assignment, tabulating the exact joint distribution of
//! the wiretapper's observation against the protected statistic, and testing
//! factorization with integer cross-multiplication. No floating point
//! touches a verdict; mutual information in bits is a diagnostic only.
//!
//! It also enumerates the admissible transform sets behind the two code
//! constructions, both by brute force over invertible block tuples and by
//! walking the sequential selection tree, so the two counting routes check
//! each other.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::code::LinearCode;
use crate::construct::{SelectionContext, TransformKit, TransformMode};
use crate::gf::{Elem, FieldSpec, GfError, Matrix};
use crate::network::{EdgeId, Network, WiretapCollection};

/// Default cap on enumerated assignments; override per call (the CLI wires
/// `SNFC_MAX_ORACLE` into this).
pub const DEFAULT_ORACLE_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// Which function of the sources the wiretapper must stay ignorant of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// The message sum (target-function security).
    TargetFn,
    /// The full message vector (source security).
    FullSources,
}

/// Exact joint counts of (wiretap observation, statistic value) over all
/// assignments; counts sum to q^(s*ell + sum z).
#[derive(Debug, Clone)]
pub struct JointDistribution {
    pub counts: BTreeMap<(Vec<Elem>, Vec<Elem>), u64>,
    pub y_marginal: BTreeMap<Vec<Elem>, u64>,
    pub u_marginal: BTreeMap<Vec<Elem>, u64>,
    pub total: u64,
}

/// Enumerates every assignment (odometer order, least significant
/// coordinate first) and tabulates the observation on `w` against the
/// statistic.
pub fn joint_distribution(
    code: &LinearCode,
    w: &[EdgeId],
    statistic: Statistic,
    cap: u64,
) -> Result<JointDistribution, OracleError> {
    let field = code.field();
    let q = field.order();
    let dim = code.dim();
    let total = (q as u128)
        .checked_pow(dim as u32)
        .filter(|&t| t <= cap as u128)
        .ok_or_else(|| {
            OracleError::TooLarge(format!("q^dim = {q}^{dim} exceeds the oracle cap {cap}"))
        })?;
    let columns: Vec<&[Elem]> = w.iter().map(|&e| code.global(e)).collect();
    let s = code.source_count();
    let ell = code.ell();
    let offsets: Vec<usize> = (0..s).map(|i| code.block_offset(i)).collect();

    let mut counts: BTreeMap<(Vec<Elem>, Vec<Elem>), u64> = BTreeMap::new();
    let mut y_marginal: BTreeMap<Vec<Elem>, u64> = BTreeMap::new();
    let mut u_marginal: BTreeMap<Vec<Elem>, u64> = BTreeMap::new();
    let mut x = vec![0; dim];
    for _ in 0..total {
        let y: Vec<Elem> = columns.iter().map(|g| field.dot(&x, g).unwrap()).collect();
        let u: Vec<Elem> = match statistic {
            Statistic::TargetFn => (0..ell)
                .map(|k| {
                    offsets
                        .iter()
                        .fold(0, |acc, &off| field.add(acc, x[off + k]))
                })
                .collect(),
            Statistic::FullSources => offsets
                .iter()
                .flat_map(|&off| x[off..off + ell].iter().copied())
                .collect(),
        };
        *y_marginal.entry(y.clone()).or_insert(0) += 1;
        *u_marginal.entry(u.clone()).or_insert(0) += 1;
        *counts.entry((y, u)).or_insert(0) += 1;

        for coord in x.iter_mut() {
            *coord += 1;
            if *coord < q {
                break;
            }
            *coord = 0;
        }
    }
    Ok(JointDistribution {
        counts,
        y_marginal,
        u_marginal,
        total: total as u64,
    })
}

/// Exact factorization test: every cell must satisfy
/// `count(y,u) * total == marginal(y) * marginal(u)`.
pub fn is_independent(d: &JointDistribution) -> bool {
    for (y, &my) in &d.y_marginal {
        for (u, &mu) in &d.u_marginal {
            let c = d.counts.get(&(y.clone(), u.clone())).copied().unwrap_or(0);
            if (c as u128) * (d.total as u128) != (my as u128) * (mu as u128) {
                return false;
            }
        }
    }
    true
}

/// Mutual information in bits; diagnostic output only, never a verdict.
pub fn mutual_information_bits(d: &JointDistribution) -> f64 {
    let total = d.total as f64;
    let mut mi = 0.0;
    for ((y, u), &c) in &d.counts {
        if c == 0 {
            continue;
        }
        let p = c as f64 / total;
        let py = d.y_marginal[y] as f64 / total;
        let pu = d.u_marginal[u] as f64 / total;
        mi += p * (p / (py * pu)).log2();
    }
    mi.max(0.0)
}

/// Which equivalence is being exercised: the subspace criterion for the sum
/// or for the full source vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecurityCriterion {
    TargetFunction,
    Source,
}

#[derive(Debug, Clone, Copy)]
pub struct EquivalenceReport {
    pub subspace_secure: bool,
    pub oracle_secure: bool,
}

impl EquivalenceReport {
    pub fn agree(&self) -> bool {
        self.subspace_secure == self.oracle_secure
    }
}

/// Runs the subspace check and the exhaustive oracle on one wiretap set and
/// reports both verdicts.
pub fn verify_equivalence(
    code: &LinearCode,
    w: &[EdgeId],
    criterion: SecurityCriterion,
    cap: u64,
) -> Result<EquivalenceReport, OracleError> {
    let statistic_matrix = match criterion {
        SecurityCriterion::TargetFunction => code.t_matrix(),
        SecurityCriterion::Source => code.gamma_matrix(),
    };
    let gw = code.globals_matrix(w);
    let subspace_secure = gw.column_space_intersection(&statistic_matrix)?.cols() == 0;
    let stat = match criterion {
        SecurityCriterion::TargetFunction => Statistic::TargetFn,
        SecurityCriterion::Source => Statistic::FullSources,
    };
    let oracle_secure = is_independent(&joint_distribution(code, w, stat, cap)?);
    Ok(EquivalenceReport {
        subspace_secure,
        oracle_secure,
    })
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub secure: bool,
    pub first_violation: Option<Vec<EdgeId>>,
}

/// Oracle verdict over a whole wiretap collection; stops at the first
/// violating set in canonical order.
pub fn oracle_security(
    code: &LinearCode,
    wiretaps: &WiretapCollection,
    statistic: Statistic,
    cap: u64,
) -> Result<OracleReport, OracleError> {
    for w in &wiretaps.sets {
        let d = joint_distribution(code, w, statistic, cap)?;
        if !is_independent(&d) {
            return Ok(OracleReport {
                secure: false,
                first_violation: Some(w.clone()),
            });
        }
    }
    Ok(OracleReport {
        secure: true,
        first_violation: None,
    })
}

type InvertibleCache = Mutex<BTreeMap<(u64, usize), Arc<Vec<Matrix>>>>;

static INVERTIBLE_CACHE: OnceLock<InvertibleCache> = OnceLock::new();

/// All invertible `size x size` matrices over the field, in odometer order
/// of their entries; generated once per (order, size).
pub fn invertible_matrices(
    field: &FieldSpec,
    size: usize,
) -> Result<Arc<Vec<Matrix>>, OracleError> {
    let key = (field.order(), size);
    let cache = INVERTIBLE_CACHE.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(found) = cache.lock().unwrap().get(&key) {
        return Ok(found.clone());
    }
    let q = field.order();
    let cells = size * size;
    let total = (q as u128)
        .checked_pow(cells as u32)
        .filter(|&t| t <= 2_000_000)
        .ok_or_else(|| {
            OracleError::TooLarge(format!("{q}^{cells} matrices to scan for invertibility"))
        })?;
    let mut out = Vec::new();
    let mut entries = vec![0; cells];
    for _ in 0..total {
        let mut m = Matrix::zero(field.clone(), size, size);
        for r in 0..size {
            for c in 0..size {
                m.set(r, c, entries[r * size + c]);
            }
        }
        if size == 0 || m.determinant()? != 0 {
            out.push(m);
        }
        for cell in entries.iter_mut() {
            *cell += 1;
            if *cell < q {
                break;
            }
            *cell = 0;
        }
        if cells == 0 {
            break;
        }
    }
    let arc = Arc::new(out);
    cache.lock().unwrap().insert(key, arc.clone());
    Ok(arc)
}

/// Exhaustive scan of the admissible transform sets for a base code: every
/// tuple of invertible per-source blocks against the target-mode
/// conditions, and every single shared block against the source-mode
/// conditions. Includes the closed-form lower bound on the tuple count
/// (taking the wiretap collection size literally, empty set included).
#[derive(Debug)]
pub struct TransformSets {
    /// Admissible per-source block tuples (B_1..B_s).
    pub bhat_tuples: Vec<Vec<Matrix>>,
    /// Admissible shared blocks A.
    pub ahat_blocks: Vec<Matrix>,
    pub invertible_count: usize,
    /// Vacuous when not positive.
    pub lower_bound_bhat: i128,
}

impl TransformSets {
    pub fn count_bhat(&self) -> u64 {
        self.bhat_tuples.len() as u64
    }

    pub fn count_ahat(&self) -> u64 {
        self.ahat_blocks.len() as u64
    }
}

pub fn enumerate_transform_sets(
    net: &Network,
    base: &LinearCode,
    r: usize,
    wiretaps: &WiretapCollection,
    max_tuples: u64,
) -> Result<TransformSets, OracleError> {
    let field = base.field().clone();
    let q = field.order();
    let size = base.ell();
    let s = net.source_count();
    let rate = size - r;
    let invertibles = invertible_matrices(&field, size)?;
    let tuple_count = (invertibles.len() as u128)
        .checked_pow(s as u32)
        .filter(|&t| t <= max_tuples as u128);
    let Some(tuple_count) = tuple_count else {
        return Err(OracleError::TooLarge(format!(
            "{}^{s} block tuples exceeds the cap {max_tuples}",
            invertibles.len()
        )));
    };
    let inverses: Vec<Matrix> = invertibles
        .iter()
        .map(|m| m.inverse().unwrap().expect("invertible"))
        .collect();
    let h_rho = base.sink_matrix(net);
    let wiretap_mats: Vec<(Matrix, usize)> = wiretaps
        .sets
        .iter()
        .map(|w| {
            let m = base.globals_matrix(w);
            let rank = m.rank();
            (m, rank)
        })
        .collect();

    let stacked_ok = |blocks: &[usize]| -> bool {
        let cols: Vec<Vec<Elem>> = (0..rate)
            .map(|j| blocks.iter().flat_map(|&b| inverses[b].column(j)).collect())
            .collect();
        let selected = if cols.is_empty() {
            Matrix::zero(field.clone(), size * s, 0)
        } else {
            Matrix::from_cols(field.clone(), cols).expect("stacked height")
        };
        if h_rho
            .solve_right(&selected)
            .expect("heights agree")
            .is_none()
        {
            return false;
        }
        wiretap_mats.iter().all(|(hw, hw_rank)| {
            selected.hstack(hw).expect("heights agree").rank() == rate + hw_rank
        })
    };

    let mut bhat_tuples = Vec::new();
    let mut idx = vec![0usize; s];
    for _ in 0..tuple_count {
        if stacked_ok(&idx) {
            bhat_tuples.push(idx.iter().map(|&b| invertibles[b].clone()).collect());
        }
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < invertibles.len() {
                break;
            }
            *slot = 0;
        }
    }

    let mut ahat_blocks = Vec::new();
    for (mi, m) in invertibles.iter().enumerate() {
        let idx = vec![mi; s];
        if !stacked_ok(&idx) {
            continue;
        }
        // Block-diagonal extractor condition for the shared block.
        let inv = &inverses[mi];
        let mut gamma_sel = Matrix::zero(field.clone(), size * s, rate * s);
        for i in 0..s {
            for j in 0..rate {
                for (row, v) in inv.column(j).into_iter().enumerate() {
                    gamma_sel.set(i * size + row, i * rate + j, v);
                }
            }
        }
        let ok = wiretap_mats.iter().all(|(hw, hw_rank)| {
            gamma_sel.hstack(hw).expect("heights agree").rank() == rate * s + hw_rank
        });
        if ok {
            ahat_blocks.push(m.clone());
        }
    }

    Ok(TransformSets {
        bhat_tuples,
        ahat_blocks,
        invertible_count: invertibles.len(),
        lower_bound_bhat: bhat_lower_bound(q, size, r, s, wiretaps.len()),
    })
}

/// Closed-form lower bound on the admissible tuple count:
/// prod over constrained steps of q^(R-1) * (q - |W| - s), times the free
/// completion count prod (q^R - q^(j-1))^s. Saturates instead of
/// overflowing; the bound is only ever asserted when positive.
pub fn bhat_lower_bound(q: u64, size: usize, r: usize, s: usize, wiretap_sets: usize) -> i128 {
    let rate = size - r;
    let q = q as i128;
    let mut bound: i128 = 1;
    let constrained = q - wiretap_sets as i128 - s as i128;
    let powi = |base: i128, e: u32| base.checked_pow(e).unwrap_or(i128::MAX);
    for _ in 0..rate {
        bound = bound.saturating_mul(powi(q, size as u32 - 1).saturating_mul(constrained));
    }
    for j in rate + 1..=size {
        let choices = powi(q, size as u32) - powi(q, j as u32 - 1);
        bound = bound.saturating_mul(powi(choices, s as u32));
    }
    bound
}

/// Counts the admissible tuples by walking the sequential selection tree
/// over the sink column space, multiplying in the closed-form free-phase
/// count. Exact by the one-to-one correspondence between admissible block
/// tuples and selection sequences; cross-checked against the exhaustive
/// scan in tests.
pub fn count_bhat_by_selection(
    net: &Network,
    base: &LinearCode,
    r: usize,
    wiretaps: &WiretapCollection,
    cap: u64,
) -> Result<u64, OracleError> {
    let ctx = SelectionContext::new(net, base, wiretaps)
        .map_err(|e| OracleError::TooLarge(e.to_string()))?;
    let field = base.field().clone();
    let q = field.order();
    let size = base.ell();
    let s = net.source_count();
    let rate = size - r;
    let basis = ctx.h_rho().column_basis();
    let t = basis.cols();
    let pool = (q as u128)
        .checked_pow(t as u32)
        .and_then(|p| p.checked_pow(rate.max(1) as u32))
        .filter(|&nodes| nodes <= cap as u128);
    if pool.is_none() {
        return Err(OracleError::TooLarge(format!(
            "selection tree of ({q}^{t})^{rate} nodes"
        )));
    }
    let mut free: u128 = 1;
    for j in rate + 1..=size {
        let choices = (q as u128).pow(size as u32) - (q as u128).pow(j as u32 - 1);
        free = free.saturating_mul(choices.saturating_pow(s as u32));
    }

    fn walk(
        ctx: &SelectionContext,
        basis: &Matrix,
        q: u64,
        t: usize,
        prev: &mut Vec<Vec<Elem>>,
        depth: usize,
    ) -> u128 {
        if depth == 0 {
            return 1;
        }
        let mut total = 0;
        let mut coeffs = vec![0; t];
        let pool = (q as u128).pow(t as u32);
        for _ in 0..pool {
            let cand = basis.mul_vec(&coeffs).expect("coefficient length");
            if ctx.candidate_admissible(prev, &cand) {
                prev.push(cand);
                total += walk(ctx, basis, q, t, prev, depth - 1);
                prev.pop();
            }
            for c in coeffs.iter_mut() {
                *c += 1;
                if *c < q {
                    break;
                }
                *c = 0;
            }
        }
        total
    }

    let sequences = walk(&ctx, &basis, q, t, &mut Vec::new(), rate);
    Ok((sequences * free) as u64)
}

/// Membership test for one enumerated tuple: its stacked inverse columns
/// must be pickable sequentially under the selection constraints.
pub fn tuple_satisfies_membership(
    net: &Network,
    base: &LinearCode,
    blocks: &[Matrix],
    r: usize,
    wiretaps: &WiretapCollection,
) -> bool {
    let Ok(ctx) = SelectionContext::new(net, base, wiretaps) else {
        return false;
    };
    let Ok(kit) = TransformKit::new(TransformMode::Target, r, blocks.to_vec()) else {
        return false;
    };
    crate::construct::kit_satisfies_selection_membership(&ctx, &kit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::Limits;

    fn eid(net: &Network, id: &str) -> EdgeId {
        net.edge_by_id(id).unwrap()
    }

    #[test]
    fn toy_code_is_independent_with_four_unit_cells() {
        let (net, _) = fixtures::toy2();
        let code = fixtures::toy2_sum(&net);
        let d = joint_distribution(&code, &[eid(&net, "e1")], Statistic::TargetFn, 1000).unwrap();
        assert_eq!(d.total, 4);
        assert_eq!(d.counts.len(), 4);
        assert!(d.counts.values().all(|&c| c == 1));
        assert!(is_independent(&d));
        assert!(mutual_information_bits(&d).abs() < 1e-12);
    }

    #[test]
    fn base_code_leaks_and_secure_code_does_not() {
        let (net, _) = fixtures::rbfly();
        let base = fixtures::rbfly_base(&net);
        let d = joint_distribution(&base, &[eid(&net, "e8")], Statistic::TargetFn, 1000).unwrap();
        assert_eq!(d.total, 81);
        assert!(!is_independent(&d));
        assert!(mutual_information_bits(&d) > 0.5);

        let secure = fixtures::rbfly_secure(&net);
        let d = joint_distribution(&secure, &[eid(&net, "e8")], Statistic::TargetFn, 1000).unwrap();
        assert!(is_independent(&d));
        // Uniform conditional: every observed y sees each sum value equally.
        for ((_, _), &c) in &d.counts {
            assert_eq!(c, d.total / (3 * 3));
        }
    }

    #[test]
    fn degenerate_distributions_count_as_independent() {
        let mut counts = BTreeMap::new();
        counts.insert((vec![0], vec![0]), 1u64);
        let d = JointDistribution {
            counts,
            y_marginal: BTreeMap::from([(vec![0], 1)]),
            u_marginal: BTreeMap::from([(vec![0], 1)]),
            total: 1,
        };
        assert!(is_independent(&d));

        // Product of two uniform marginals.
        let mut counts = BTreeMap::new();
        let mut ym = BTreeMap::new();
        let mut um = BTreeMap::new();
        for y in 0..3u64 {
            ym.insert(vec![y], 3);
            for u in 0..3u64 {
                counts.insert((vec![y], vec![u]), 1);
                *um.entry(vec![u]).or_insert(0) += 1;
            }
        }
        let d = JointDistribution {
            counts,
            y_marginal: ym,
            u_marginal: um,
            total: 9,
        };
        assert!(is_independent(&d));
    }

    #[test]
    fn equivalence_reports_on_fixture_codes() {
        let (net, _) = fixtures::rbfly();
        let secure = fixtures::rbfly_secure(&net);
        let rep = verify_equivalence(
            &secure,
            &[eid(&net, "e5")],
            SecurityCriterion::TargetFunction,
            1000,
        )
        .unwrap();
        assert!(rep.subspace_secure && rep.oracle_secure && rep.agree());

        let rep = verify_equivalence(&secure, &[eid(&net, "e1")], SecurityCriterion::Source, 1000)
            .unwrap();
        assert!(!rep.subspace_secure && !rep.oracle_secure && rep.agree());
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let (net, _) = fixtures::rbfly();
        let secure = fixtures::rbfly_secure(&net);
        let err = joint_distribution(&secure, &[], Statistic::TargetFn, 10).unwrap_err();
        assert!(matches!(err, OracleError::TooLarge(_)));
    }

    #[test]
    fn verdict_invariant_under_key_relabeling() {
        // Swapping the two key coordinates of every global vector relabels
        // the keys; the independence verdict must not change.
        let (net, field) = fixtures::rbfly();
        let secure = fixtures::rbfly_secure(&net);
        let mut swapped = BTreeMap::new();
        for i in 0..net.edge_count() {
            let g = secure.global(EdgeId(i));
            // Layout (m1 k1 m2 k2): swap k1 <-> k2.
            swapped.insert(EdgeId(i), vec![g[0], g[3], g[2], g[1]]);
        }
        let relabeled = LinearCode::from_globals(&net, field, 1, vec![1, 1], swapped).unwrap();
        for id in ["e1", "e5", "e8", "e9"] {
            let w = [eid(&net, id)];
            let a = is_independent(
                &joint_distribution(&secure, &w, Statistic::TargetFn, 1000).unwrap(),
            );
            let b = is_independent(
                &joint_distribution(&relabeled, &w, Statistic::TargetFn, 1000).unwrap(),
            );
            assert_eq!(a, b, "edge {id}");
        }
    }

    #[test]
    fn equivalence_holds_on_propagated_codes() {
        // Random local coefficients on random DAGs give structured globals
        // (unlike the arbitrary-vector cases); the subspace and oracle
        // verdicts must still coincide.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(77);
        for seed in 0..20u64 {
            let net = crate::netgen::random_network(800 + seed, 6, 2);
            let q = [2u64, 3][rng.random_range(0..2usize)];
            let field = FieldSpec::from_order(q).unwrap();
            let s = net.source_count();
            let ell = 1;
            let z: Vec<usize> = (0..s).map(|_| rng.random_range(0..=1usize)).collect();
            let mut locals = crate::code::LocalEncoding::default();
            for (idx, edge) in net.edges().iter().enumerate() {
                let e = EdgeId(idx);
                if let Some(i) = net.source_index(edge.tail) {
                    let col = (0..ell + z[i]).map(|_| rng.random_range(0..q)).collect();
                    locals.source_columns.insert(e, col);
                } else {
                    for &d in net.in_edges(edge.tail) {
                        locals.pair_coeffs.insert((d, e), rng.random_range(0..q));
                    }
                }
            }
            let code = LinearCode::from_locals(&net, field, ell, z, locals).unwrap();
            for w_size in 1..=2.min(net.edge_count()) {
                let w: Vec<EdgeId> = (0..w_size).map(EdgeId).collect();
                for criterion in [SecurityCriterion::TargetFunction, SecurityCriterion::Source] {
                    let rep = verify_equivalence(&code, &w, criterion, 1_000_000).unwrap();
                    assert!(rep.agree(), "seed {seed} w {w:?} {criterion:?}");
                }
            }
        }
    }

    #[test]
    fn keys_only_tuples_degenerate_to_all_invertibles() {
        // r = R: no constrained phase; every invertible tuple is admissible.
        let (net, field) = fixtures::toy2();
        let base = crate::construct::construct_base(&net, &field, 1, 0, 100).unwrap();
        let w1 = net
            .wiretap_collection(1, false, &Limits::default())
            .unwrap();
        let sets = enumerate_transform_sets(&net, &base, 1, &w1, 1_000_000).unwrap();
        assert_eq!(sets.invertible_count, 1); // GF(2), 1x1: only [1]
        assert_eq!(sets.count_bhat(), 1);
    }

    #[test]
    fn toy_count_over_gf3() {
        let (net, _) = fixtures::toy2();
        let field = FieldSpec::from_order(3).unwrap();
        let base = crate::construct::construct_base(&net, &field, 1, 0, 100).unwrap();
        let w0 = net
            .wiretap_collection(0, false, &Limits::default())
            .unwrap();
        let sets = enumerate_transform_sets(&net, &base, 0, &w0, 1_000_000).unwrap();
        assert_eq!(sets.invertible_count, 2); // [1] and [2]
        assert_eq!(sets.count_bhat(), 4); // all 2x2 block pairs
        assert_eq!(sets.count_ahat(), 2);
        let fast = count_bhat_by_selection(&net, &base, 0, &w0, 1_000_000).unwrap();
        assert_eq!(fast, sets.count_bhat());

        // r = R: the constraints degenerate and every invertible pair counts.
        let w1 = net
            .wiretap_collection(1, false, &Limits::default())
            .unwrap();
        let sets = enumerate_transform_sets(&net, &base, 1, &w1, 1_000_000).unwrap();
        assert_eq!(sets.count_bhat(), 4);
    }

    #[test]
    fn selection_count_matches_exhaustive_scan() {
        let (net, field) = fixtures::rbfly();
        let base = fixtures::rbfly_base(&net);
        let w1 = net
            .wiretap_collection(1, false, &Limits::default())
            .unwrap();
        let sets = enumerate_transform_sets(&net, &base, 1, &w1, 10_000_000).unwrap();
        let fast = count_bhat_by_selection(&net, &base, 1, &w1, 10_000_000).unwrap();
        assert_eq!(fast, sets.count_bhat());
        assert!(sets.count_ahat() <= sets.count_bhat());
        assert_eq!(field.order(), 3);
    }

    #[test]
    fn ratio_trend_is_non_increasing_in_field_size() {
        // Fixed two-source network with two parallel edges per source; the
        // shared-block share of the transform family shrinks as q grows.
        let net = Network::validated(
            vec!["s1".into(), "s2".into(), "t".into()],
            vec![
                ("e1".into(), "s1".into(), "t".into()),
                ("e2".into(), "s1".into(), "t".into()),
                ("e3".into(), "s2".into(), "t".into()),
                ("e4".into(), "s2".into(), "t".into()),
            ],
            vec!["s1".into(), "s2".into()],
            "t".into(),
        )
        .unwrap();
        let mut ratios = Vec::new();
        for q in [5u64, 7, 11] {
            let field = FieldSpec::from_order(q).unwrap();
            let base = crate::construct::construct_base(&net, &field, 2, 1, 200).unwrap();
            let w1 = net
                .wiretap_collection(1, false, &Limits::default())
                .unwrap();
            let count_b = count_bhat_by_selection(&net, &base, 1, &w1, 10_000_000).unwrap();
            let invertibles = invertible_matrices(&field, 2).unwrap();
            let inverses: Vec<Matrix> = invertibles
                .iter()
                .map(|m| m.inverse().unwrap().unwrap())
                .collect();
            let h_rho = base.sink_matrix(&net);
            let wt: Vec<(Matrix, usize)> = w1
                .sets
                .iter()
                .map(|w| {
                    let m = base.globals_matrix(w);
                    let rank = m.rank();
                    (m, rank)
                })
                .collect();
            let mut count_a = 0u64;
            for (mi, _) in invertibles.iter().enumerate() {
                let inv = &inverses[mi];
                let stacked = Matrix::from_cols(
                    field.clone(),
                    vec![[inv.column(0).clone(), inv.column(0)].concat()],
                )
                .unwrap();
                if h_rho.solve_right(&stacked).unwrap().is_none() {
                    continue;
                }
                let mut gamma_sel = Matrix::zero(field.clone(), 4, 2);
                for i in 0..2 {
                    for (row, v) in inv.column(0).into_iter().enumerate() {
                        gamma_sel.set(i * 2 + row, i, v);
                    }
                }
                if wt
                    .iter()
                    .all(|(hw, hw_rank)| gamma_sel.hstack(hw).unwrap().rank() == 2 + hw_rank)
                {
                    count_a += 1;
                }
            }
            assert!(count_a >= 1, "q={q}: shared-block family must be nonempty");
            ratios.push(count_a as f64 / count_b as f64);
        }
        assert!(
            ratios[0] >= ratios[1] && ratios[1] >= ratios[2],
            "ratios {ratios:?}"
        );
    }
}
