//! Secure-code constructions by invertible basis change.
//!
//! Starting from an admissible rate-`R` sum-computing base code with global
//! vectors `h_e`, an invertible block-diagonal matrix turns it into a
//! rate-`R-r` secure code with `r` key symbols per source and globals
//! `g_e = Bhat * h_e`. Target-function security needs one invertible block
//! `B_i` per source whose inverse columns stack into vectors
//! `b_1..b_{R-r}` drawn from the sink's column space and kept clear of every
//! wiretap span; source security uses one shared block `A` and the stricter
//! block-diagonal extractor condition. Selection is seeded sampling with a
//! deterministic exhaustive fallback, so a fixed seed always yields the same
//! code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::code::{CodeError, LinearCode, LocalEncoding};
use crate::gf::{Elem, FieldSpec, GfError, Matrix};
use crate::network::{Limits, NetError, Network, WiretapCollection};

/// Seeded candidate draws per vector before the exhaustive fallback kicks in.
const SAMPLE_TRIES: usize = 256;
/// Exhaustive scans stay below this many candidates.
const EXHAUSTIVE_CAP: u64 = 1_000_000;
/// Invertible-matrix draws for the shared-block construction.
const DEFAULT_SAMPLING_BUDGET: usize = 5_000;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("rate {rate} is outside the admissible range {min}..={max}")]
    InvalidRate { rate: usize, min: usize, max: usize },
    #[error(
        "no admissible base code found in {tries} seeded attempts; a larger field usually helps"
    )]
    ConstructionFailed { tries: usize },
    #[error("transform-vector selection failed: field too small for this base code (guaranteed for q > {hint})")]
    SelectionFailed { hint: u64 },
    #[error("no shared transformation matrix found within {budget} samples")]
    SamplingExhausted { budget: usize },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMode {
    Target,
    SourceGeneralized,
    SourceLegacy,
}

/// Per-source invertible transformation blocks plus the security level they
/// were built for. Source modes repeat one shared block.
#[derive(Debug, Clone)]
pub struct TransformKit {
    pub mode: TransformMode,
    pub r: usize,
    blocks: Vec<Matrix>, // B_1..B_s, each R x R
}

impl TransformKit {
    pub fn new(mode: TransformMode, r: usize, blocks: Vec<Matrix>) -> Result<Self, ConstructError> {
        if blocks.is_empty() {
            return Err(ConstructError::Internal(
                "transform kit needs at least one block".into(),
            ));
        }
        let size = blocks[0].rows();
        if r > size {
            return Err(ConstructError::InvalidRate {
                rate: r,
                min: 0,
                max: size,
            });
        }
        for b in &blocks {
            if b.rows() != size || !b.is_invertible() {
                return Err(ConstructError::Internal(
                    "transform blocks must be square and invertible".into(),
                ));
            }
        }
        if mode != TransformMode::Target && blocks.windows(2).any(|w| w[0] != w[1]) {
            return Err(ConstructError::Internal(
                "source modes share a single block".into(),
            ));
        }
        Ok(TransformKit { mode, r, blocks })
    }

    /// Builds the kit from explicit basis columns: `basis[i]` holds the
    /// columns of `B_i^{-1}`, which are inverted into the blocks.
    pub fn from_basis_columns(
        mode: TransformMode,
        r: usize,
        basis: Vec<Matrix>,
    ) -> Result<Self, ConstructError> {
        let mut blocks = Vec::with_capacity(basis.len());
        for m in basis {
            let inv = m.inverse()?.ok_or_else(|| {
                ConstructError::Internal("basis columns are not invertible".into())
            })?;
            blocks.push(inv);
        }
        Self::new(mode, r, blocks)
    }

    pub fn identity(field: FieldSpec, size: usize, s: usize) -> Self {
        TransformKit {
            mode: TransformMode::Target,
            r: 0,
            blocks: vec![Matrix::identity(field, size); s],
        }
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn rate(&self) -> usize {
        self.block_size() - self.r
    }

    pub fn field(&self) -> &FieldSpec {
        self.blocks[0].field()
    }

    /// Block-diagonal matrix with the per-source blocks on the diagonal.
    pub fn bhat(&self) -> Matrix {
        block_diag(&self.blocks)
    }

    pub fn block_inverses(&self) -> Vec<Matrix> {
        self.blocks
            .iter()
            .map(|b| b.inverse().unwrap().expect("blocks are invertible"))
            .collect()
    }

    /// The stacked vectors `b_1..b_{R-r}`: column `j` concatenates column `j`
    /// of every block inverse. Equals `Bhat^{-1} * T`.
    pub fn selected_columns(&self) -> Vec<Vec<Elem>> {
        let inverses = self.block_inverses();
        (0..self.rate())
            .map(|j| inverses.iter().flat_map(|inv| inv.column(j)).collect())
            .collect()
    }

    fn selected_matrix(&self) -> Matrix {
        let dim = self.block_size() * self.blocks.len();
        let cols = self.selected_columns();
        if cols.is_empty() {
            return Matrix::zero(self.field().clone(), dim, 0);
        }
        Matrix::from_cols(self.field().clone(), cols).expect("columns share the stacked height")
    }

    /// `Ahat^{-1} * Gamma` for shared-block kits: block-diagonal stacking of
    /// the first `R-r` columns of `A^{-1}`.
    fn shared_gamma_matrix(&self) -> Matrix {
        let s = self.blocks.len();
        let size = self.block_size();
        let rate = self.rate();
        let inv = &self.block_inverses()[0];
        let mut out = Matrix::zero(self.field().clone(), size * s, rate * s);
        for i in 0..s {
            for j in 0..rate {
                for (row, v) in inv.column(j).into_iter().enumerate() {
                    out.set(i * size + row, i * rate + j, v);
                }
            }
        }
        out
    }
}

fn block_diag(blocks: &[Matrix]) -> Matrix {
    let field = blocks[0].field().clone();
    let total: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut out = Matrix::zero(field, total, total);
    let mut off = 0;
    for b in blocks {
        for r in 0..b.rows() {
            for c in 0..b.cols() {
                out.set(off + r, off + c, b.get(r, c));
            }
        }
        off += b.rows();
    }
    out
}

/// A full construction run: the secure code plus everything needed to audit
/// it.
#[derive(Debug, Clone)]
pub struct Construction {
    pub code: LinearCode,
    pub kit: TransformKit,
    pub base: LinearCode,
    pub wiretaps: WiretapCollection,
}

/// Seeded random base code: uniform local coefficients drawn in canonical
/// edge order, retried until the sink can decode the stacked identity. When
/// the seeded draws run out, a deterministic routed construction takes over
/// (it succeeds whenever q exceeds the source count).
pub fn construct_base(
    net: &Network,
    field: &FieldSpec,
    rate: usize,
    seed: u64,
    max_retries: usize,
) -> Result<LinearCode, ConstructError> {
    let c_min = net.c_min();
    if rate > c_min {
        return Err(ConstructError::InvalidRate {
            rate,
            min: 0,
            max: c_min,
        });
    }
    let q = field.order();
    let z = vec![0; net.source_count()];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..max_retries.max(1) {
        let mut locals = LocalEncoding::default();
        for (idx, edge) in net.edges().iter().enumerate() {
            let e = crate::network::EdgeId(idx);
            if net.source_index(edge.tail).is_some() {
                let col: Vec<Elem> = (0..rate).map(|_| rng.random_range(0..q)).collect();
                locals.source_columns.insert(e, col);
            } else {
                for &d in net.in_edges(edge.tail) {
                    locals.pair_coeffs.insert((d, e), rng.random_range(0..q));
                }
            }
        }
        let code = LinearCode::from_locals(net, field.clone(), rate, z.clone(), locals)?;
        if code.check_computability(net).is_some() {
            return Ok(code);
        }
    }
    routed_base(net, field, rate).map_err(|_| ConstructError::ConstructionFailed {
        tries: max_retries.max(1),
    })
}

/// Deterministic admissible base code by flow routing on the reversed graph.
///
/// Computing the sum at the sink is the transpose of multicasting from it:
/// reverse every edge, treat the sink as the multicast source and each
/// source as a receiver owed `rate` independent symbols, and run a greedy
/// coefficient assignment along `rate` edge-disjoint reversed paths per
/// receiver, keeping each receiver's frontier of path edges full-rank. The
/// transposed coefficients, receiver decoders, and injection rows then form
/// the sum code's pair coefficients, source columns, and sink decoder.
/// A valid frontier replacement exists at every step when q > s.
pub fn routed_base(
    net: &Network,
    field: &FieldSpec,
    rate: usize,
) -> Result<LinearCode, ConstructError> {
    let s = net.source_count();
    let z = vec![0; s];
    if rate == 0 {
        let mut locals = LocalEncoding::default();
        for (idx, edge) in net.edges().iter().enumerate() {
            if net.source_index(edge.tail).is_some() {
                locals
                    .source_columns
                    .insert(crate::network::EdgeId(idx), Vec::new());
            }
        }
        return Ok(LinearCode::from_locals(net, field.clone(), 0, z, locals)?);
    }
    let q = field.order();
    // `rate` edge-disjoint sink-bound paths per source.
    let mut paths = Vec::with_capacity(s);
    for &sigma in net.sources() {
        paths.push(
            net.edge_disjoint_paths(sigma, rate).ok_or_else(|| {
                ConstructError::Internal("rate exceeds a per-source min cut".into())
            })?,
        );
    }
    // For each edge: the (receiver, path slot) pairs whose path crosses it.
    let mut on_path: std::collections::BTreeMap<crate::network::EdgeId, Vec<(usize, usize)>> =
        std::collections::BTreeMap::new();
    for (i, per_source) in paths.iter().enumerate() {
        for (j, path) in per_source.iter().enumerate() {
            for &e in path {
                on_path.entry(e).or_default().push((i, j));
            }
        }
    }
    // Frontier per receiver: one vector per path slot, kept a basis of F^rate
    // throughout. Starts as the standard basis (the virtual injections).
    let mut frontier: Vec<Vec<Vec<Elem>>> = (0..s)
        .map(|_| {
            (0..rate)
                .map(|j| (0..rate).map(|k| u64::from(k == j)).collect())
                .collect()
        })
        .collect();
    let mut reversed_globals: Vec<Option<Vec<Elem>>> = vec![None; net.edge_count()];
    let mut locals = LocalEncoding::default();
    let mut decoder_rows: std::collections::BTreeMap<crate::network::EdgeId, Vec<Elem>> =
        std::collections::BTreeMap::new();
    let topo = net.topo_nodes()?;
    for &v in topo.iter().rev() {
        for &x in net.in_edges(v) {
            let Some(entries) = on_path.get(&x) else {
                reversed_globals[x.0] = Some(vec![0; rate]);
                continue;
            };
            // Vectors available at this point of the reversed graph: the
            // injection basis at the sink, downstream path vectors elsewhere.
            let inputs = if v == net.sink() {
                Matrix::identity(field.clone(), rate)
            } else {
                let cols: Vec<Vec<Elem>> = net
                    .out_edges(v)
                    .iter()
                    .map(|&y| {
                        reversed_globals[y.0]
                            .clone()
                            .expect("downstream edge already processed")
                    })
                    .collect();
                Matrix::from_cols(field.clone(), cols)?
            };
            let basis = inputs.column_basis();
            let t = basis.cols();
            let mut coeffs = vec![0u64; t];
            let mut pick = None;
            'scan: loop {
                let cand = basis.mul_vec(&coeffs)?;
                let ok = entries.iter().all(|&(i, j)| {
                    let rest: Vec<Vec<Elem>> = frontier[i]
                        .iter()
                        .enumerate()
                        .filter(|&(slot, _)| slot != j)
                        .map(|(_, f)| f.clone())
                        .collect();
                    let rest = if rest.is_empty() {
                        Matrix::zero(field.clone(), rate, 0)
                    } else {
                        Matrix::from_cols(field.clone(), rest)
                            .expect("frontier vectors share height")
                    };
                    let cand_col =
                        Matrix::col_vec(field.clone(), cand.clone()).expect("valid elements");
                    rest.solve_right(&cand_col)
                        .expect("heights agree")
                        .is_none()
                });
                if ok {
                    pick = Some(cand);
                    break;
                }
                for c in coeffs.iter_mut() {
                    *c += 1;
                    if *c < q {
                        continue 'scan;
                    }
                    *c = 0;
                }
                break;
            }
            let Some(chosen) = pick else {
                return Err(ConstructError::Internal(format!(
                    "no frontier-preserving vector over GF({q}); need q > {s}"
                )));
            };
            if v == net.sink() {
                decoder_rows.insert(x, chosen.clone());
            } else {
                let target = Matrix::col_vec(field.clone(), chosen.clone())?;
                let combo = inputs
                    .solve_right(&target)?
                    .expect("the pick lies in the input span by construction");
                for (k, &y) in net.out_edges(v).iter().enumerate() {
                    let c = combo.get(k, 0);
                    if c != 0 {
                        locals.pair_coeffs.insert((x, y), c);
                    }
                }
            }
            for &(i, j) in entries {
                frontier[i][j] = chosen.clone();
            }
            reversed_globals[x.0] = Some(chosen);
        }
    }
    // Receiver decoders become the source columns of the sum code.
    for (i, &sigma) in net.sources().iter().enumerate() {
        let frontier_matrix = Matrix::from_cols(field.clone(), frontier[i].clone())?;
        let inverse = frontier_matrix
            .inverse()?
            .ok_or_else(|| ConstructError::Internal("receiver frontier lost rank".into()))?;
        for &e in net.out_edges(sigma) {
            locals.source_columns.insert(e, vec![0; rate]);
        }
        for (j, path) in paths[i].iter().enumerate() {
            locals
                .source_columns
                .insert(path[0], inverse.row(j).to_vec());
        }
    }
    let code = LinearCode::from_locals(net, field.clone(), rate, z, locals)?;
    if code.check_computability(net).is_none() {
        return Err(ConstructError::Internal(
            "routed base code failed the decode check".into(),
        ));
    }
    Ok(code)
}

/// Shared data for admissibility checks on transform vectors.
pub struct SelectionContext {
    field: FieldSpec,
    h_rho: Matrix,
    h_rho_basis: Matrix,
    wiretap_mats: Vec<Matrix>,
    block_size: usize,
    s: usize,
}

impl SelectionContext {
    pub fn new(
        net: &Network,
        base: &LinearCode,
        wiretaps: &WiretapCollection,
    ) -> Result<Self, ConstructError> {
        if base.z().iter().any(|&zi| zi != 0) {
            return Err(ConstructError::Internal(
                "base code must carry no keys".into(),
            ));
        }
        let h_rho = base.sink_matrix(net);
        let wiretap_mats = wiretaps
            .sets
            .iter()
            .map(|w| base.globals_matrix(w))
            .collect();
        Ok(SelectionContext {
            field: base.field().clone(),
            h_rho_basis: h_rho.column_basis(),
            h_rho,
            wiretap_mats,
            block_size: base.ell(),
            s: net.source_count(),
        })
    }

    pub fn h_rho(&self) -> &Matrix {
        &self.h_rho
    }

    pub fn h_rho_contains(&self, v: &[Elem]) -> bool {
        let col = Matrix::col_vec(self.field.clone(), v.to_vec()).expect("valid elements");
        self.h_rho
            .contains_column_space(&col)
            .expect("heights agree")
    }

    fn block(&self, v: &[Elem], i: usize) -> Vec<Elem> {
        v[i * self.block_size..(i + 1) * self.block_size].to_vec()
    }

    /// Whether `cand` may extend `prev`: every per-source block must leave
    /// the span of the previous blocks, and the full vector must avoid every
    /// wiretap span joined with the previous picks.
    pub fn candidate_admissible(&self, prev: &[Vec<Elem>], cand: &[Elem]) -> bool {
        for i in 0..self.s {
            let prev_blocks: Vec<Vec<Elem>> = prev.iter().map(|b| self.block(b, i)).collect();
            let span = if prev_blocks.is_empty() {
                Matrix::zero(self.field.clone(), self.block_size, 0)
            } else {
                Matrix::from_cols(self.field.clone(), prev_blocks).expect("blocks share height")
            };
            let target =
                Matrix::col_vec(self.field.clone(), self.block(cand, i)).expect("valid block");
            if span.solve_right(&target).expect("heights agree").is_some() {
                return false;
            }
        }
        let cand_col = Matrix::col_vec(self.field.clone(), cand.to_vec()).expect("valid elements");
        for hw in &self.wiretap_mats {
            let mut span = hw.clone();
            for b in prev {
                let col = Matrix::col_vec(self.field.clone(), b.clone()).expect("valid elements");
                span = span.hstack(&col).expect("heights agree");
            }
            if span
                .solve_right(&cand_col)
                .expect("heights agree")
                .is_some()
            {
                return false;
            }
        }
        true
    }

    fn field_size_hint(&self) -> u64 {
        self.wiretap_mats.iter().filter(|m| m.cols() > 0).count() as u64 + self.s as u64
    }
}

/// The chosen stacked vectors `b_1..b_{R-r}`.
#[derive(Debug, Clone)]
pub struct SelectionState {
    pub chosen: Vec<Vec<Elem>>,
}

/// Sequentially picks `R-r` vectors from the sink's column space, each
/// admissible against every wiretap span and per-source block span. Seeded
/// sampling first; exhaustive scan of the column space when it is small
/// enough.
pub fn select_b_vectors(
    net: &Network,
    base: &LinearCode,
    r: usize,
    wiretaps: &WiretapCollection,
    seed: u64,
) -> Result<SelectionState, ConstructError> {
    let rate = base
        .ell()
        .checked_sub(r)
        .ok_or(ConstructError::InvalidRate {
            rate: r,
            min: 0,
            max: base.ell(),
        })?;
    let ctx = SelectionContext::new(net, base, wiretaps)?;
    let field = base.field().clone();
    let q = field.order();
    let basis = &ctx.h_rho_basis;
    let t = basis.cols();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut chosen: Vec<Vec<Elem>> = Vec::with_capacity(rate);
    for _ in 0..rate {
        let mut pick = None;
        for _ in 0..SAMPLE_TRIES {
            let coeffs: Vec<Elem> = (0..t).map(|_| rng.random_range(0..q)).collect();
            let cand = basis.mul_vec(&coeffs)?;
            if ctx.candidate_admissible(&chosen, &cand) {
                pick = Some(cand);
                break;
            }
        }
        if pick.is_none() && (t as u32) < 64 && q.saturating_pow(t as u32) <= EXHAUSTIVE_CAP {
            let mut coeffs = vec![0; t];
            'scan: loop {
                let cand = basis.mul_vec(&coeffs)?;
                if ctx.candidate_admissible(&chosen, &cand) {
                    pick = Some(cand);
                    break;
                }
                // Odometer, least significant coordinate first.
                for c in coeffs.iter_mut() {
                    *c += 1;
                    if *c < q {
                        continue 'scan;
                    }
                    *c = 0;
                }
                break;
            }
        }
        match pick {
            Some(v) => chosen.push(v),
            None => {
                return Err(ConstructError::SelectionFailed {
                    hint: ctx.field_size_hint(),
                })
            }
        }
    }
    Ok(SelectionState { chosen })
}

/// Completes the per-source blocks of a selection to bases, inverts them
/// into the transformation blocks, and verifies both kit conditions.
pub fn assemble_transform(
    net: &Network,
    base: &LinearCode,
    selection: &SelectionState,
    r: usize,
    wiretaps: &WiretapCollection,
) -> Result<TransformKit, ConstructError> {
    let size = base.ell();
    let s = net.source_count();
    let field = base.field().clone();
    let mut basis = Vec::with_capacity(s);
    for i in 0..s {
        let blocks: Vec<Vec<Elem>> = selection
            .chosen
            .iter()
            .map(|b| b[i * size..(i + 1) * size].to_vec())
            .collect();
        let v = if blocks.is_empty() {
            Matrix::zero(field.clone(), size, 0)
        } else {
            Matrix::from_cols(field.clone(), blocks)?
        };
        basis.push(v.complete_to_basis().map_err(|_| {
            ConstructError::Internal("selected blocks are not linearly independent".into())
        })?);
    }
    let kit = TransformKit::from_basis_columns(TransformMode::Target, r, basis)?;
    // The selection must reappear exactly as Bhat^{-1} * T.
    if kit.selected_columns() != selection.chosen {
        return Err(ConstructError::Internal(
            "block inversion does not reproduce the selection".into(),
        ));
    }
    verify_target_conditions(net, base, &kit, wiretaps)?;
    Ok(kit)
}

/// Checks the two target-mode kit conditions against a base code:
/// `<Bhat^{-1} T> ⊆ <H_rho>` and `<Bhat^{-1} T> ∩ <H_W> = 0` for every
/// configured wiretap set.
pub fn verify_target_conditions(
    net: &Network,
    base: &LinearCode,
    kit: &TransformKit,
    wiretaps: &WiretapCollection,
) -> Result<(), ConstructError> {
    let selected = kit.selected_matrix();
    if !base.sink_matrix(net).contains_column_space(&selected)? {
        return Err(ConstructError::Internal(
            "selected vectors leave the sink column space".into(),
        ));
    }
    for w in &wiretaps.sets {
        let hw = base.globals_matrix(w);
        if selected.column_space_intersection(&hw)?.cols() > 0 {
            return Err(ConstructError::Internal(format!(
                "selected vectors meet the wiretap span of {:?}",
                w.iter()
                    .map(|&e| net.edge(e).id.clone())
                    .collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}

/// Checks the shared-block kit conditions: `<Ahat^{-1} T> ⊆ <H_rho>` and
/// `<Ahat^{-1} Gamma> ∩ <H_W> = 0` for every configured wiretap set.
pub fn verify_source_conditions(
    net: &Network,
    base: &LinearCode,
    kit: &TransformKit,
    wiretaps: &WiretapCollection,
) -> Result<(), ConstructError> {
    if kit.mode == TransformMode::Target {
        return Err(ConstructError::Internal(
            "source conditions need a shared-block kit".into(),
        ));
    }
    let selected = kit.selected_matrix();
    if !base.sink_matrix(net).contains_column_space(&selected)? {
        return Err(ConstructError::Internal(
            "selected vectors leave the sink column space".into(),
        ));
    }
    let gamma = kit.shared_gamma_matrix();
    for w in &wiretaps.sets {
        let hw = base.globals_matrix(w);
        if gamma.column_space_intersection(&hw)?.cols() > 0 {
            return Err(ConstructError::Internal(format!(
                "block-diagonal extractor meets the wiretap span of {:?}",
                w.iter()
                    .map(|&e| net.edge(e).id.clone())
                    .collect::<Vec<_>>()
            )));
        }
    }
    Ok(())
}

/// Applies a kit to a base code: globals become `Bhat * h_e`, the rate drops
/// to `R - r`, and every source gains `r` key symbols. Local source columns
/// are transformed alongside so propagation reproduces the same globals.
pub fn transform_code(
    net: &Network,
    base: &LinearCode,
    kit: &TransformKit,
) -> Result<LinearCode, ConstructError> {
    let size = kit.block_size();
    let s = net.source_count();
    if base.ell() != size || base.z().iter().any(|&zi| zi != 0) {
        return Err(ConstructError::Internal(
            "kit block size must match a keyless base code".into(),
        ));
    }
    if kit.blocks.len() != s {
        return Err(ConstructError::Internal(
            "one transform block per source required".into(),
        ));
    }
    let field = base.field().clone();
    let rate = kit.rate();
    let z = vec![kit.r; s];
    let mut globals = std::collections::BTreeMap::new();
    for idx in 0..net.edge_count() {
        let e = crate::network::EdgeId(idx);
        let h = base.global(e);
        let mut g = Vec::with_capacity(h.len());
        for (i, block) in kit.blocks.iter().enumerate() {
            g.extend(block.mul_vec(&h[i * size..(i + 1) * size])?);
        }
        globals.insert(e, g);
    }
    let transformed = LinearCode::from_globals(net, field.clone(), rate, z.clone(), globals)?;
    if let Some(locals) = base.locals() {
        let mut new_locals = LocalEncoding {
            pair_coeffs: locals.pair_coeffs.clone(),
            ..Default::default()
        };
        for (&e, col) in &locals.source_columns {
            let i = net.source_index(net.edge(e).tail).ok_or_else(|| {
                ConstructError::Internal("source column on a non-source edge".into())
            })?;
            new_locals
                .source_columns
                .insert(e, kit.blocks[i].mul_vec(col)?);
        }
        let from_locals = LinearCode::from_locals(net, field, rate, z, new_locals)?;
        for idx in 0..net.edge_count() {
            let e = crate::network::EdgeId(idx);
            if from_locals.global(e) != transformed.global(e) {
                return Err(ConstructError::Internal(
                    "transformed locals disagree with globals".into(),
                ));
            }
        }
        return Ok(from_locals);
    }
    Ok(transformed)
}

fn check_rates(net: &Network, big_rate: usize, r: usize) -> Result<(), ConstructError> {
    let c_min = net.c_min();
    if big_rate > c_min || r > big_rate {
        return Err(ConstructError::InvalidRate {
            rate: big_rate,
            min: r,
            max: c_min,
        });
    }
    Ok(())
}

/// End-to-end pipeline for a target-function-secure rate-`R-r` code: random
/// base, vector selection against the given wiretap collection (usually the
/// reduced one, which suffices), kit assembly, transformation.
pub fn construct_target(
    net: &Network,
    field: &FieldSpec,
    big_rate: usize,
    r: usize,
    seed: u64,
    wiretaps: &WiretapCollection,
) -> Result<Construction, ConstructError> {
    check_rates(net, big_rate, r)?;
    let base = construct_base(net, field, big_rate, seed, 500)?;
    let selection = select_b_vectors(net, &base, r, wiretaps, seed ^ 0x5851_f42d_4c95_7f2d)?;
    let kit = assemble_transform(net, &base, &selection, r, wiretaps)?;
    let code = transform_code(net, &base, &kit)?;
    Ok(Construction {
        code,
        kit,
        base,
        wiretaps: wiretaps.clone(),
    })
}

/// Samples one shared invertible block satisfying the source-security kit
/// conditions and transforms the base code with it.
pub fn construct_source_generalized(
    net: &Network,
    field: &FieldSpec,
    big_rate: usize,
    r: usize,
    seed: u64,
    wiretaps: &WiretapCollection,
) -> Result<Construction, ConstructError> {
    check_rates(net, big_rate, r)?;
    let base = construct_base(net, field, big_rate, seed, 500)?;
    let q = field.order();
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x94d0_49bb_1331_11eb);
    for _ in 0..DEFAULT_SAMPLING_BUDGET {
        let mut a = Matrix::zero(field.clone(), big_rate, big_rate);
        for row in 0..big_rate {
            for col in 0..big_rate {
                a.set(row, col, rng.random_range(0..q));
            }
        }
        if !a.is_invertible() {
            continue;
        }
        let kit = TransformKit::new(
            TransformMode::SourceGeneralized,
            r,
            vec![a; net.source_count()],
        )?;
        if verify_source_conditions(net, &base, &kit, wiretaps).is_ok() {
            let code = transform_code(net, &base, &kit)?;
            return Ok(Construction {
                code,
                kit,
                base,
                wiretaps: wiretaps.clone(),
            });
        }
    }
    Err(ConstructError::SamplingExhausted {
        budget: DEFAULT_SAMPLING_BUDGET,
    })
}

/// Sequential column selection for the shared block: `a_1..a_{R-r}` avoid
/// every per-source wiretap block span joined with the previous picks, the
/// rest are free up to invertibility; the shared block is the inverse.
pub fn construct_source_legacy(
    net: &Network,
    field: &FieldSpec,
    big_rate: usize,
    r: usize,
    seed: u64,
    wiretaps: &WiretapCollection,
) -> Result<Construction, ConstructError> {
    check_rates(net, big_rate, r)?;
    let base = construct_base(net, field, big_rate, seed, 500)?;
    let s = net.source_count();
    let q = field.order();
    // Per-source block bands of every wiretap matrix.
    let mut block_spans: Vec<Matrix> = Vec::new();
    for w in &wiretaps.sets {
        let hw = base.globals_matrix(w);
        for i in 0..s {
            block_spans.push(hw.row_band(i * big_rate, (i + 1) * big_rate));
        }
    }
    let admissible = |prev: &[Vec<Elem>], cand: &[Elem], constrained: bool| -> bool {
        let cand_col = Matrix::col_vec(field.clone(), cand.to_vec()).expect("valid elements");
        let prev_mat = if prev.is_empty() {
            Matrix::zero(field.clone(), big_rate, 0)
        } else {
            Matrix::from_cols(field.clone(), prev.to_vec()).expect("columns share height")
        };
        if !constrained {
            return prev_mat
                .solve_right(&cand_col)
                .expect("heights agree")
                .is_none();
        }
        block_spans.iter().all(|span| {
            span.hstack(&prev_mat)
                .expect("heights agree")
                .solve_right(&cand_col)
                .expect("heights agree")
                .is_none()
        })
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x2545_f491_4f6c_dd1d);
    let mut columns: Vec<Vec<Elem>> = Vec::with_capacity(big_rate);
    for j in 0..big_rate {
        let constrained = j < big_rate - r;
        let mut pick = None;
        for _ in 0..SAMPLE_TRIES {
            let cand: Vec<Elem> = (0..big_rate).map(|_| rng.random_range(0..q)).collect();
            if admissible(&columns, &cand, constrained) {
                pick = Some(cand);
                break;
            }
        }
        if pick.is_none()
            && (big_rate as u32) < 64
            && q.saturating_pow(big_rate as u32) <= EXHAUSTIVE_CAP
        {
            let mut cand = vec![0; big_rate];
            'scan: loop {
                if admissible(&columns, &cand, constrained) {
                    pick = Some(cand.clone());
                    break;
                }
                for c in cand.iter_mut() {
                    *c += 1;
                    if *c < q {
                        continue 'scan;
                    }
                    *c = 0;
                }
                break;
            }
        }
        match pick {
            Some(v) => columns.push(v),
            None => {
                return Err(ConstructError::SelectionFailed {
                    hint: s as u64 * wiretaps.sets.iter().filter(|w| !w.is_empty()).count() as u64,
                })
            }
        }
    }
    let a_inv = Matrix::from_cols(field.clone(), columns)?;
    let a = a_inv
        .inverse()?
        .ok_or_else(|| ConstructError::Internal("selected columns are not invertible".into()))?;
    let kit = TransformKit::new(TransformMode::SourceLegacy, r, vec![a; s])?;
    verify_source_conditions(net, &base, &kit, wiretaps)?;
    let code = transform_code(net, &base, &kit)?;
    Ok(Construction {
        code,
        kit,
        base,
        wiretaps: wiretaps.clone(),
    })
}

/// Membership test for the constructible family: a kit belongs iff its
/// stacked inverse columns could have been picked sequentially, each inside
/// the sink column space and outside every forbidden union.
pub fn kit_satisfies_selection_membership(ctx: &SelectionContext, kit: &TransformKit) -> bool {
    let mut prev: Vec<Vec<Elem>> = Vec::new();
    for b in kit.selected_columns() {
        if !ctx.h_rho_contains(&b) || !ctx.candidate_admissible(&prev, &b) {
            return false;
        }
        prev.push(b);
    }
    true
}

/// Field-size threshold for the guaranteed construction: wiretap-set count
/// plus source count. The empty set never constrains the selection, so the
/// authoritative `threshold` excludes it; `literal_threshold` counts it.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RequiredFieldSize {
    pub reduced: bool,
    pub counted_sets: usize,
    /// Construction is guaranteed for q strictly above this.
    pub threshold: u64,
    /// The same count with the empty wiretap set included.
    pub literal_threshold: u64,
}

pub fn required_field_size(
    net: &Network,
    r: usize,
    reduced: bool,
    limits: &Limits,
) -> Result<RequiredFieldSize, ConstructError> {
    let collection = net.wiretap_collection(r, reduced, limits)?;
    let s = net.source_count() as u64;
    let counted = collection.nonempty_len();
    Ok(RequiredFieldSize {
        reduced,
        counted_sets: counted,
        threshold: counted as u64 + s,
        literal_threshold: collection.len() as u64 + s,
    })
}

/// Smallest extension degree L with q^L above the threshold, for running the
/// construction over GF(q^L) at the same secure computing rate.
pub fn extension_plan(q: u64, threshold: u64) -> (u32, u64) {
    let mut degree = 1;
    let mut order = q;
    while order <= threshold {
        degree += 1;
        order = order.saturating_mul(q);
    }
    (degree, order)
}
