//! Scalar linear codes for computing the source-message sum at the sink.
//!
//! A code carries `ell` message symbols and `z[i]` key symbols per source.
//! Assignments live in row vectors with the per-source layout
//! `(m_1 k_1 m_2 k_2 ... m_s k_s)`; every edge `e` has a global column
//! vector `g_e` of matching height with `y_e = (m k) . g_e`. Globals are
//! either propagated from local encoding data in topological edge order or
//! supplied explicitly (fixtures specify codes by their globals).
//!
//! Security checks reduce to column-space intersections: the sum stays
//! hidden from a wiretap set `W` iff `<G_W>` meets the sum-extractor matrix
//! `T` trivially, and the full source vector stays hidden iff `<G_W>` meets
//! the block-diagonal extractor `Gamma` trivially.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Elem, FieldSpec, GfError, Matrix};
use crate::network::{EdgeId, NetError, Network, WiretapCollection};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("source edge `{edge}` has no encoding column")]
    IncompleteCode { edge: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("code file: {0}")]
    File(String),
}

/// Local encoding data: one column per source edge and one scalar per
/// adjacent edge pair. Missing pair coefficients default to zero.
#[derive(Debug, Clone, Default)]
pub struct LocalEncoding {
    pub source_columns: BTreeMap<EdgeId, Vec<Elem>>,
    pub pair_coeffs: BTreeMap<(EdgeId, EdgeId), Elem>,
}

/// A scalar linear code with propagated global encoding vectors.
#[derive(Debug, Clone)]
pub struct LinearCode {
    field: FieldSpec,
    ell: usize,
    z: Vec<usize>,
    locals: Option<LocalEncoding>,
    globals: Vec<Vec<Elem>>, // indexed by edge, canonical order
}

impl LinearCode {
    /// Code given directly by its global vectors (one per edge).
    pub fn from_globals(
        net: &Network,
        field: FieldSpec,
        ell: usize,
        z: Vec<usize>,
        globals: BTreeMap<EdgeId, Vec<Elem>>,
    ) -> Result<Self, CodeError> {
        Self::check_shape(net, &z)?;
        let dim = net.source_count() * ell + z.iter().sum::<usize>();
        let mut table = vec![Vec::new(); net.edge_count()];
        for (i, slot) in table.iter_mut().enumerate() {
            let e = EdgeId(i);
            let g = globals.get(&e).ok_or_else(|| CodeError::IncompleteCode {
                edge: net.edge(e).id.clone(),
            })?;
            if g.len() != dim {
                return Err(CodeError::Shape(format!(
                    "global vector of `{}` has length {}, expected {dim}",
                    net.edge(e).id,
                    g.len()
                )));
            }
            for &v in g {
                field.check(v)?;
            }
            *slot = g.clone();
        }
        Ok(LinearCode {
            field,
            ell,
            z,
            locals: None,
            globals: table,
        })
    }

    /// Code given by local encoding data; globals are propagated in
    /// topological edge order.
    pub fn from_locals(
        net: &Network,
        field: FieldSpec,
        ell: usize,
        z: Vec<usize>,
        locals: LocalEncoding,
    ) -> Result<Self, CodeError> {
        Self::check_shape(net, &z)?;
        let s = net.source_count();
        let dim = s * ell + z.iter().sum::<usize>();
        let offsets = block_offsets(ell, &z);
        let mut globals: Vec<Option<Vec<Elem>>> = vec![None; net.edge_count()];
        for v in net.topo_nodes()? {
            for &e in net.out_edges(v) {
                let g =
                    if let Some(i) = net.source_index(v) {
                        let col = locals.source_columns.get(&e).ok_or_else(|| {
                            CodeError::IncompleteCode {
                                edge: net.edge(e).id.clone(),
                            }
                        })?;
                        if col.len() != ell + z[i] {
                            return Err(CodeError::Shape(format!(
                                "source column of `{}` has length {}, expected {}",
                                net.edge(e).id,
                                col.len(),
                                ell + z[i]
                            )));
                        }
                        let mut g = vec![0; dim];
                        for (k, &c) in col.iter().enumerate() {
                            field.check(c)?;
                            g[offsets[i] + k] = c;
                        }
                        g
                    } else {
                        let mut g = vec![0; dim];
                        for &d in net.in_edges(v) {
                            let a = locals.pair_coeffs.get(&(d, e)).copied().unwrap_or(0);
                            field.check(a)?;
                            if a == 0 {
                                continue;
                            }
                            let gd = globals[d.0]
                                .as_ref()
                                .expect("upstream edge already propagated");
                            for (slot, &x) in g.iter_mut().zip(gd) {
                                *slot = field.add(*slot, field.mul(a, x));
                            }
                        }
                        g
                    };
                globals[e.0] = Some(g);
            }
        }
        let globals = globals
            .into_iter()
            .map(|g| g.expect("all edges propagated"))
            .collect();
        Ok(LinearCode {
            field,
            ell,
            z,
            locals: Some(locals),
            globals,
        })
    }

    fn check_shape(net: &Network, z: &[usize]) -> Result<(), CodeError> {
        if z.len() != net.source_count() {
            return Err(CodeError::Shape(format!(
                "{} key dimensions for {} sources",
                z.len(),
                net.source_count()
            )));
        }
        Ok(())
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    pub fn locals(&self) -> Option<&LocalEncoding> {
        self.locals.as_ref()
    }

    pub fn source_count(&self) -> usize {
        self.z.len()
    }

    /// Height of every global vector: s*ell + sum of key dimensions.
    pub fn dim(&self) -> usize {
        self.source_count() * self.ell + self.z.iter().sum::<usize>()
    }

    /// Row offset of source block `i` in the canonical layout.
    pub fn block_offset(&self, i: usize) -> usize {
        block_offsets(self.ell, &self.z)[i]
    }

    pub fn block_height(&self, i: usize) -> usize {
        self.ell + self.z[i]
    }

    pub fn global(&self, e: EdgeId) -> &[Elem] {
        &self.globals[e.0]
    }

    /// Columns `g_e` for the given edges, in the given order.
    pub fn globals_matrix(&self, edges: &[EdgeId]) -> Matrix {
        let cols: Vec<Vec<Elem>> = edges.iter().map(|&e| self.globals[e.0].clone()).collect();
        if cols.is_empty() {
            return Matrix::zero(self.field.clone(), self.dim(), 0);
        }
        Matrix::from_cols(self.field.clone(), cols).expect("globals share the layout height")
    }

    /// Columns for the sink's input edges in canonical order.
    pub fn sink_matrix(&self, net: &Network) -> Matrix {
        self.globals_matrix(net.in_edges(net.sink()))
    }

    /// Stacked `[I_ell; 0]` blocks: right-multiplying an assignment row by
    /// this matrix yields the message sum.
    pub fn t_matrix(&self) -> Matrix {
        let mut t = Matrix::zero(self.field.clone(), self.dim(), self.ell);
        for i in 0..self.source_count() {
            let off = self.block_offset(i);
            for k in 0..self.ell {
                t.set(off + k, k, 1);
            }
        }
        t
    }

    /// Block-diagonal `[I_ell; 0]` blocks: extracts the full message vector.
    pub fn gamma_matrix(&self) -> Matrix {
        let s = self.source_count();
        let mut g = Matrix::zero(self.field.clone(), self.dim(), s * self.ell);
        for i in 0..s {
            let off = self.block_offset(i);
            for k in 0..self.ell {
                g.set(off + k, i * self.ell + k, 1);
            }
        }
        g
    }

    /// Decoder matrix `D` with `G_rho * D = T`, or `None` when the sink
    /// cannot compute the sum from its inputs.
    pub fn check_computability(&self, net: &Network) -> Option<Matrix> {
        self.sink_matrix(net)
            .solve_right(&self.t_matrix())
            .expect("shapes agree by construction")
    }

    /// Whether the sum is information-theoretically hidden from every
    /// wiretap set in the collection, by the subspace criterion.
    pub fn check_target_security(
        &self,
        net: &Network,
        wiretaps: &WiretapCollection,
    ) -> SecurityReport {
        self.security_scan(net, wiretaps, &self.t_matrix())
    }

    /// Same check against the full source message vector.
    pub fn check_source_security(
        &self,
        net: &Network,
        wiretaps: &WiretapCollection,
    ) -> SecurityReport {
        self.security_scan(net, wiretaps, &self.gamma_matrix())
    }

    fn security_scan(
        &self,
        _net: &Network,
        wiretaps: &WiretapCollection,
        statistic: &Matrix,
    ) -> SecurityReport {
        for w in &wiretaps.sets {
            let gw = self.globals_matrix(w);
            let basis = gw
                .column_space_intersection(statistic)
                .expect("same height");
            if basis.cols() > 0 {
                return SecurityReport {
                    secure: false,
                    witness: Some(SecurityWitness {
                        wiretap: w.clone(),
                        vector: basis.column(0),
                    }),
                };
            }
        }
        SecurityReport {
            secure: true,
            witness: None,
        }
    }

    /// Runs the code on one assignment: per-edge symbols plus the decoded
    /// sum. `messages` is one row of `ell` symbols per source; `keys` one
    /// row of `z[i]` symbols per source.
    pub fn evaluate(
        &self,
        net: &Network,
        messages: &[Vec<Elem>],
        keys: &[Vec<Elem>],
    ) -> Result<Evaluation, CodeError> {
        let s = self.source_count();
        if messages.len() != s || keys.len() != s {
            return Err(CodeError::Shape(format!(
                "expected {s} message rows and {s} key rows"
            )));
        }
        let mut x = Vec::with_capacity(self.dim());
        for i in 0..s {
            if messages[i].len() != self.ell || keys[i].len() != self.z[i] {
                return Err(CodeError::Shape(format!(
                    "source {} expects {} messages and {} keys",
                    i + 1,
                    self.ell,
                    self.z[i]
                )));
            }
            x.extend_from_slice(&messages[i]);
            x.extend_from_slice(&keys[i]);
        }
        for &v in &x {
            self.field.check(v)?;
        }
        let decoder = self
            .check_computability(net)
            .ok_or_else(|| CodeError::Shape("code does not compute the sum".into()))?;
        let edge_symbols: Vec<Elem> = (0..net.edge_count())
            .map(|e| self.field.dot(&x, &self.globals[e]).unwrap())
            .collect();
        let y_rho: Vec<Elem> = net
            .in_edges(net.sink())
            .iter()
            .map(|&e| edge_symbols[e.0])
            .collect();
        let decoded = (0..decoder.cols())
            .map(|j| self.field.dot(&y_rho, &decoder.column(j)).unwrap())
            .collect();
        Ok(Evaluation {
            edge_symbols,
            decoded,
        })
    }
}

pub(crate) fn block_offsets(ell: usize, z: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(z.len());
    let mut acc = 0;
    for &zi in z {
        offsets.push(acc);
        acc += ell + zi;
    }
    offsets
}

/// Outcome of a security scan; `witness` is the first violating wiretap set
/// in canonical order together with a nonzero vector the wiretapper pins
/// down.
#[derive(Debug, Clone)]
pub struct SecurityReport {
    pub secure: bool,
    pub witness: Option<SecurityWitness>,
}

#[derive(Debug, Clone)]
pub struct SecurityWitness {
    pub wiretap: Vec<EdgeId>,
    pub vector: Vec<Elem>,
}

/// One run of the code on a concrete assignment.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// y_e per edge, canonical order.
    pub edge_symbols: Vec<Elem>,
    /// The decoded sum row (length ell).
    pub decoded: Vec<Elem>,
}

/// On-disk code description. Vectors use the canonical per-source layout;
/// `globals` keys are edge ids. When `globals` is present it wins and
/// `locals` is carried along unvalidated.
#[derive(Debug, Serialize, Deserialize)]
pub struct CodeFile {
    pub field: u64,
    pub ell: usize,
    pub z: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub globals: Option<BTreeMap<String, Vec<Elem>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locals: Option<LocalsFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LocalsFile {
    pub source_columns: BTreeMap<String, Vec<Elem>>,
    pub pair_coeffs: Vec<PairCoeff>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PairCoeff {
    pub from: String,
    pub to: String,
    pub coeff: Elem,
}

impl CodeFile {
    pub fn parse(text: &str) -> Result<Self, CodeError> {
        serde_json::from_str(text).map_err(|e| CodeError::File(e.to_string()))
    }

    pub fn to_code(&self, net: &Network) -> Result<LinearCode, CodeError> {
        let field =
            FieldSpec::from_order(self.field).map_err(|e| CodeError::File(e.to_string()))?;
        if let Some(globals) = &self.globals {
            let mut map = BTreeMap::new();
            for (id, v) in globals {
                map.insert(net.edge_by_id(id)?, v.clone());
            }
            return LinearCode::from_globals(net, field, self.ell, self.z.clone(), map);
        }
        let locals = self
            .locals
            .as_ref()
            .ok_or_else(|| CodeError::File("code file needs `globals` or `locals`".into()))?
            .resolve(net)?;
        LinearCode::from_locals(net, field, self.ell, self.z.clone(), locals)
    }

    pub fn from_code(net: &Network, code: &LinearCode) -> Self {
        let globals = net
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), code.global(EdgeId(i)).to_vec()))
            .collect();
        let locals = code.locals().map(|l| LocalsFile::from_locals(net, l));
        CodeFile {
            field: code.field().order(),
            ell: code.ell(),
            z: code.z().to_vec(),
            globals: Some(globals),
            locals,
            provenance: None,
        }
    }
}

impl LocalsFile {
    pub fn resolve(&self, net: &Network) -> Result<LocalEncoding, CodeError> {
        let mut locals = LocalEncoding::default();
        for (id, col) in &self.source_columns {
            locals
                .source_columns
                .insert(net.edge_by_id(id)?, col.clone());
        }
        for pc in &self.pair_coeffs {
            locals.pair_coeffs.insert(
                (net.edge_by_id(&pc.from)?, net.edge_by_id(&pc.to)?),
                pc.coeff,
            );
        }
        Ok(locals)
    }

    fn from_locals(net: &Network, locals: &LocalEncoding) -> Self {
        LocalsFile {
            source_columns: locals
                .source_columns
                .iter()
                .map(|(&e, col)| (net.edge(e).id.clone(), col.clone()))
                .collect(),
            pair_coeffs: locals
                .pair_coeffs
                .iter()
                .map(|(&(d, e), &c)| PairCoeff {
                    from: net.edge(d).id.clone(),
                    to: net.edge(e).id.clone(),
                    coeff: c,
                })
                .collect(),
        }
    }
}
