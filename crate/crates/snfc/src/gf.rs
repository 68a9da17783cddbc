//! Exact arithmetic and linear algebra over finite fields GF(q), q = p^m.
//!
//! Elements are integer codes in `[0, q)`. For prime fields the code is the
//! residue itself; for extension fields the code's base-p digits are the
//! polynomial coefficients (lowest degree first), so code 0 is the additive
//! identity and code 1 the multiplicative identity. Extension-field
//! multiplication runs on exp/log tables built once per field from a fixed
//! reduction polynomial, which keeps every operation exact and deterministic.
//!
//! All matrix routines (rank, solving, null space, column-space
//! intersection, basis completion) use exact Gaussian elimination with the
//! pivot search fixed to "first nonzero row, columns left to right", so any
//! solution they return is the same on every run.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Integer code of a field element.
pub type Elem = u64;

#[derive(Debug, Error)]
pub enum GfError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("input columns are linearly dependent")]
    Rank,
    #[error("element {code} is not a valid code for GF({q})")]
    ElementRange { code: Elem, q: u64 },
    #[error("invalid field: {0}")]
    InvalidField(String),
}

/// Built-in reduction polynomials (coefficients lowest degree first).
const BUILTIN_POLYS: &[(u64, &[Elem])] = &[
    (4, &[1, 1, 1]),        // x^2 + x + 1 over GF(2)
    (8, &[1, 1, 0, 1]),     // x^3 + x + 1 over GF(2)
    (9, &[2, 2, 1]),        // x^2 + 2x + 2 over GF(3)
    (16, &[1, 1, 0, 0, 1]), // x^4 + x + 1 over GF(2)
    (25, &[2, 4, 1]),       // x^2 + 4x + 2 over GF(5)
    (27, &[1, 2, 0, 1]),    // x^3 + 2x + 1 over GF(3)
];

/// Largest extension-field order we build exp/log tables for.
const MAX_TABLE_ORDER: u64 = 1 << 16;

#[derive(Debug)]
struct Tables {
    exp: Vec<Elem>, // exp[i] = g^i, i in [0, q-1)
    log: Vec<u64>,  // log[a] for a in [1, q)
}

/// A finite field GF(p^m) with exact element arithmetic.
///
/// Cloning is cheap: extension-field tables are shared behind an `Arc`.
#[derive(Clone)]
pub struct FieldSpec {
    p: u64,
    m: u32,
    q: u64,
    poly: Vec<Elem>,
    tables: Option<Arc<Tables>>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.poly == other.poly
    }
}
impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldSpec {
    /// Prime field GF(p).
    pub fn prime(p: u64) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::InvalidField(format!("{p} is not prime")));
        }
        if p >= 1 << 32 {
            return Err(GfError::InvalidField(format!(
                "characteristic {p} too large"
            )));
        }
        Ok(FieldSpec {
            p,
            m: 1,
            q: p,
            poly: Vec::new(),
            tables: None,
        })
    }

    /// Extension field GF(p^m), m > 1. When `poly` is `None` the reduction
    /// polynomial comes from the built-in table; a user-supplied polynomial
    /// must be monic of degree m and irreducible over GF(p).
    pub fn extension(p: u64, m: u32, poly: Option<Vec<Elem>>) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::InvalidField(format!("{p} is not prime")));
        }
        if m < 2 {
            return Err(GfError::InvalidField(
                "extension degree must be at least 2".into(),
            ));
        }
        let q = p
            .checked_pow(m)
            .filter(|&q| q <= MAX_TABLE_ORDER)
            .ok_or_else(|| {
                GfError::InvalidField(format!("{p}^{m} exceeds the supported table size"))
            })?;
        let poly = match poly {
            Some(poly) => {
                validate_reduction_poly(p, m, &poly)?;
                poly
            }
            None => BUILTIN_POLYS
                .iter()
                .find(|(order, _)| *order == q)
                .map(|(_, coeffs)| coeffs.to_vec())
                .ok_or_else(|| {
                    GfError::InvalidField(format!(
                        "no built-in reduction polynomial for GF({q}); supply one explicitly"
                    ))
                })?,
        };
        let mut spec = FieldSpec {
            p,
            m,
            q,
            poly,
            tables: None,
        };
        spec.tables = Some(Arc::new(spec.build_tables()?));
        Ok(spec)
    }

    /// Field of the given order q = p^m.
    pub fn from_order(q: u64) -> Result<Self, GfError> {
        if q < 2 {
            return Err(GfError::InvalidField(format!(
                "order {q} is not a prime power"
            )));
        }
        let mut p = 2u64;
        while p * p <= q {
            if q % p == 0 {
                let mut m = 0u32;
                let mut rest = q;
                while rest % p == 0 {
                    rest /= p;
                    m += 1;
                }
                if rest != 1 {
                    return Err(GfError::InvalidField(format!(
                        "order {q} is not a prime power"
                    )));
                }
                return if m == 1 {
                    Self::prime(p)
                } else {
                    Self::extension(p, m, None)
                };
            }
            p += 1;
        }
        Self::prime(q)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn reduction_poly(&self) -> &[Elem] {
        &self.poly
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        1
    }

    /// Validates that `a` is a legal element code.
    pub fn check(&self, a: Elem) -> Result<(), GfError> {
        if a < self.q {
            Ok(())
        } else {
            Err(GfError::ElementRange { code: a, q: self.q })
        }
    }

    pub fn same_field(&self, other: &FieldSpec) -> Result<(), GfError> {
        if self == other {
            Ok(())
        } else {
            Err(GfError::FieldMismatch)
        }
    }

    fn digits(&self, code: Elem) -> Vec<Elem> {
        let mut out = vec![0; self.m as usize];
        let mut rest = code;
        for d in out.iter_mut() {
            *d = rest % self.p;
            rest /= self.p;
        }
        out
    }

    fn code_of_digits(&self, digits: &[Elem]) -> Elem {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(a < self.q && b < self.q);
        if self.m == 1 {
            (a + b) % self.p
        } else {
            let (da, db) = (self.digits(a), self.digits(b));
            let sum: Vec<Elem> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
            self.code_of_digits(&sum)
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        debug_assert!(a < self.q);
        if self.m == 1 {
            (self.p - a) % self.p
        } else {
            let da = self.digits(a);
            let neg: Vec<Elem> = da.iter().map(|&x| (self.p - x) % self.p).collect();
            self.code_of_digits(&neg)
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        debug_assert!(a < self.q && b < self.q);
        if self.m == 1 {
            ((a as u128 * b as u128) % self.p as u128) as Elem
        } else if a == 0 || b == 0 {
            0
        } else {
            let t = self.tables.as_ref().expect("extension field tables");
            let idx = (t.log[a as usize] + t.log[b as usize]) % (self.q - 1);
            t.exp[idx as usize]
        }
    }

    pub fn inv(&self, a: Elem) -> Result<Elem, GfError> {
        debug_assert!(a < self.q);
        if a == 0 {
            return Err(GfError::DivisionByZero);
        }
        if self.m == 1 {
            Ok(self.pow(a, self.p - 2))
        } else {
            let t = self.tables.as_ref().expect("extension field tables");
            let idx = (self.q - 1 - t.log[a as usize]) % (self.q - 1);
            Ok(t.exp[idx as usize])
        }
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplication without the exp/log tables; used while building them.
    fn mul_raw(&self, a: Elem, b: Elem) -> Elem {
        if self.m == 1 {
            return ((a as u128 * b as u128) % self.p as u128) as Elem;
        }
        if let Some(t) = self.tables.as_ref() {
            if a == 0 || b == 0 {
                return 0;
            }
            let idx = (t.log[a as usize] + t.log[b as usize]) % (self.q - 1);
            return t.exp[idx as usize];
        }
        let m = self.m as usize;
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &x) in da.iter().enumerate() {
            for (j, &y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // Reduce by the monic reduction polynomial.
        for k in (m..prod.len()).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            prod[k] = 0;
            for (j, &pc) in self.poly.iter().enumerate().take(m) {
                let idx = k - m + j;
                prod[idx] = (prod[idx] + (self.p - pc % self.p) * c) % self.p;
            }
        }
        self.code_of_digits(&prod[..m])
    }

    fn build_tables(&self) -> Result<Tables, GfError> {
        let q = self.q;
        let group = q - 1;
        let factors = prime_factors(group);
        let generator = (2..q)
            .find(|&g| factors.iter().all(|&f| self.pow(g, group / f) != 1))
            .ok_or_else(|| {
                GfError::InvalidField("no primitive element found (polynomial reducible?)".into())
            })?;
        let mut exp = vec![0; group as usize];
        let mut log = vec![0; q as usize];
        let mut acc = 1;
        for (i, slot) in exp.iter_mut().enumerate() {
            *slot = acc;
            log[acc as usize] = i as u64;
            acc = self.mul_raw(acc, generator);
        }
        if acc != 1 {
            return Err(GfError::InvalidField(
                "generator order mismatch (polynomial reducible?)".into(),
            ));
        }
        Ok(Tables { exp, log })
    }

    /// Dot product of two equal-length element slices.
    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Result<Elem, GfError> {
        if a.len() != b.len() {
            return Err(GfError::Shape(format!(
                "dot of lengths {} and {}",
                a.len(),
                b.len()
            )));
        }
        Ok(a.iter()
            .zip(b)
            .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y))))
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Polynomial remainder a mod b over GF(p); coefficients lowest degree first.
fn poly_rem(p: u64, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut rem: Vec<Elem> = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while rem.len() > db {
        let k = rem.len() - 1;
        let c = rem[k];
        if c != 0 {
            let factor = c * lead_inv % p;
            for (j, &bj) in b.iter().enumerate() {
                let idx = k - db + j;
                rem[idx] = (rem[idx] + (p - bj * factor % p)) % p;
            }
        }
        rem.pop();
        while rem.len() > db && *rem.last().unwrap() == 0 {
            rem.pop();
        }
    }
    rem
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat; p prime, a != 0.
    let mut e = p - 2;
    let mut base = a % p;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

fn validate_reduction_poly(p: u64, m: u32, poly: &[Elem]) -> Result<(), GfError> {
    let m = m as usize;
    if poly.len() != m + 1 {
        return Err(GfError::InvalidField(format!(
            "reduction polynomial must have degree {m} ({} coefficients)",
            m + 1
        )));
    }
    if poly[m] != 1 {
        return Err(GfError::InvalidField(
            "reduction polynomial must be monic".into(),
        ));
    }
    if poly.iter().any(|&c| c >= p) {
        return Err(GfError::InvalidField(
            "reduction polynomial coefficient out of range".into(),
        ));
    }
    // Trial division by every monic polynomial of degree 1..=m/2.
    let mut work = 0u64;
    for d in 1..=m / 2 {
        let count = p.pow(d as u32);
        work += count;
        if work > 2_000_000 {
            return Err(GfError::InvalidField(
                "irreducibility check too large for this degree".into(),
            ));
        }
        for code in 0..count {
            let mut divisor = vec![0; d + 1];
            let mut rest = code;
            for c in divisor.iter_mut().take(d) {
                *c = rest % p;
                rest /= p;
            }
            divisor[d] = 1;
            let rem = poly_rem(p, poly, &divisor);
            if rem.iter().all(|&c| c == 0) {
                return Err(GfError::InvalidField(
                    "reduction polynomial is reducible".into(),
                ));
            }
        }
    }
    Ok(())
}

/// A dense matrix over a fixed finite field; row-major, immutable in use.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Elem>,
    field: FieldSpec,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.field)?;
        for r in 0..self.rows {
            writeln!(
                f,
                "  {:?}",
                &self.entries[r * self.cols..(r + 1) * self.cols]
            )?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zero(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
            field,
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zero(field, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Elem>>) -> Result<Self, GfError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(GfError::Shape("ragged rows".into()));
            }
            for &e in row {
                field.check(e)?;
                entries.push(e);
            }
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            entries,
            field,
        })
    }

    pub fn from_cols(field: FieldSpec, cols: Vec<Vec<Elem>>) -> Result<Self, GfError> {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        let mut m = Self::zero(field.clone(), r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(GfError::Shape("ragged columns".into()));
            }
            for (i, &e) in col.iter().enumerate() {
                field.check(e)?;
                m.entries[i * c + j] = e;
            }
        }
        Ok(m)
    }

    /// Single-column matrix from a vector.
    pub fn col_vec(field: FieldSpec, v: Vec<Elem>) -> Result<Self, GfError> {
        Self::from_cols(field, vec![v])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix, GfError> {
        self.field.same_field(&other.field)?;
        if self.rows != other.rows {
            return Err(GfError::Shape(format!(
                "hstack rows {} vs {}",
                self.rows, other.rows
            )));
        }
        let mut out = Matrix::zero(self.field.clone(), self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, GfError> {
        self.field.same_field(&other.field)?;
        if self.cols != other.rows {
            return Err(GfError::Shape(format!(
                "mul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Matrix::zero(f.clone(), self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let cur = out.get(r, c);
                    out.set(r, c, f.add(cur, f.mul(a, other.get(k, c))));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product (column vector in, column vector out).
    pub fn mul_vec(&self, v: &[Elem]) -> Result<Vec<Elem>, GfError> {
        if v.len() != self.cols {
            return Err(GfError::Shape(format!(
                "mul_vec {}x{} by len {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        let f = &self.field;
        Ok((0..self.rows)
            .map(|r| f.dot(self.row(r), v).unwrap())
            .collect())
    }

    /// Rows `lo..hi` as a new matrix.
    pub fn row_band(&self, lo: usize, hi: usize) -> Matrix {
        let entries = self.entries[lo * self.cols..hi * self.cols].to_vec();
        Matrix {
            rows: hi - lo,
            cols: self.cols,
            entries,
            field: self.field.clone(),
        }
    }

    /// In-place reduced row echelon form with pivots restricted to the first
    /// `pivot_limit` columns. Pivot search takes the first nonzero row,
    /// columns left to right. Returns the pivot column indices.
    fn rref_in_place(&mut self, pivot_limit: usize) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..pivot_limit.min(self.cols) {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|&r| self.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..self.cols {
                    let (a, b) = (self.get(row, c), self.get(pr, c));
                    self.set(row, c, b);
                    self.set(pr, c, a);
                }
            }
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                self.set(row, c, f.mul(self.get(row, c), inv));
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor == 0 {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place(self.cols);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Any X with `self * X = b`; free variables are zero under the fixed
    /// column-pivot order, so the result is deterministic. `None` when some
    /// column of `b` lies outside the column space of `self`.
    pub fn solve_right(&self, b: &Matrix) -> Result<Option<Matrix>, GfError> {
        self.field.same_field(&b.field)?;
        if self.rows != b.rows {
            return Err(GfError::Shape(format!(
                "solve: {} rows vs {} rows",
                self.rows, b.rows
            )));
        }
        let mut aug = self.hstack(b)?;
        let pivots = aug.rref_in_place(self.cols);
        // Inconsistent iff a row is zero on the coefficient side but not on b's.
        for r in pivots.len()..aug.rows {
            if (self.cols..aug.cols).any(|c| aug.get(r, c) != 0) {
                return Ok(None);
            }
        }
        let mut x = Matrix::zero(self.field.clone(), self.cols, b.cols);
        for (pr, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, aug.get(pr, self.cols + j));
            }
        }
        Ok(Some(x))
    }

    /// Whether the column space of `other` is contained in this one's.
    pub fn contains_column_space(&self, other: &Matrix) -> Result<bool, GfError> {
        Ok(self.solve_right(other)?.is_some())
    }

    /// Basis of the right null space, one column per free variable.
    pub fn null_space(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let f = &self.field;
        let mut basis = Matrix::zero(f.clone(), self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            basis.set(fc, j, 1);
            for (pr, &pc) in pivots.iter().enumerate() {
                basis.set(pc, j, f.neg(r.get(pr, fc)));
            }
        }
        basis
    }

    /// The pivot columns of this matrix, a basis of its column space.
    pub fn column_basis(&self) -> Matrix {
        let (_, pivots) = self.rref();
        let cols = pivots.iter().map(|&c| self.column(c)).collect();
        Matrix::from_cols(self.field.clone(), cols).expect("columns share shape")
    }

    /// Basis of the intersection of the column spaces of `self` and `other`;
    /// zero columns means the intersection is trivial.
    pub fn column_space_intersection(&self, other: &Matrix) -> Result<Matrix, GfError> {
        self.field.same_field(&other.field)?;
        if self.rows != other.rows {
            return Err(GfError::Shape(format!(
                "intersection: {} rows vs {} rows",
                self.rows, other.rows
            )));
        }
        let null = self.hstack(other)?.null_space();
        // For each null vector (a | b): self*a = -other*b lies in both spaces.
        let candidates: Vec<Vec<Elem>> = (0..null.cols())
            .map(|j| {
                let v = null.column(j);
                self.mul_vec(&v[..self.cols]).expect("length matches")
            })
            .collect();
        let m = Matrix::from_cols(self.field.clone(), candidates)?;
        if m.cols() == 0 {
            return Ok(Matrix::zero(self.field.clone(), self.rows, 0));
        }
        let mut basis = m.column_basis();
        // Scale each basis vector monic (leading nonzero entry 1).
        let f = self.field.clone();
        for c in 0..basis.cols() {
            let lead = (0..basis.rows())
                .map(|r| basis.get(r, c))
                .find(|&v| v != 0)
                .expect("basis column");
            let inv = f.inv(lead).expect("nonzero");
            for r in 0..basis.rows() {
                basis.set(r, c, f.mul(basis.get(r, c), inv));
            }
        }
        Ok(basis)
    }

    /// Extends linearly independent columns to a square invertible matrix by
    /// scanning the standard basis vectors in order.
    pub fn complete_to_basis(&self) -> Result<Matrix, GfError> {
        if self.rank() != self.cols {
            return Err(GfError::Rank);
        }
        if self.cols > self.rows {
            return Err(GfError::Shape("more columns than rows".into()));
        }
        let mut m = self.clone();
        let mut rank = self.cols;
        for i in 0..self.rows {
            if rank == self.rows {
                break;
            }
            let mut e = vec![0; self.rows];
            e[i] = 1;
            let candidate = m.hstack(&Matrix::col_vec(self.field.clone(), e)?)?;
            if candidate.rank() > rank {
                rank += 1;
                m = candidate;
            }
        }
        Ok(m)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    pub fn inverse(&self) -> Result<Option<Matrix>, GfError> {
        if !self.is_square() {
            return Err(GfError::Shape("inverse of non-square matrix".into()));
        }
        if self.rows == 0 {
            return Ok(Some(self.clone()));
        }
        self.solve_right(&Matrix::identity(self.field.clone(), self.rows))
    }

    /// Determinant by elimination (product of pivots, sign from row swaps).
    pub fn determinant(&self) -> Result<Elem, GfError> {
        if !self.is_square() {
            return Err(GfError::Shape("determinant of non-square matrix".into()));
        }
        let f = &self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det: Elem = 1;
        for col in 0..n {
            let Some(pr) = (col..n).find(|&r| m.get(r, col) != 0) else {
                return Ok(0);
            };
            if pr != col {
                for c in 0..n {
                    let (a, b) = (m.get(col, c), m.get(pr, c));
                    m.set(col, c, b);
                    m.set(pr, c, a);
                }
                det = f.neg(det);
            }
            let pivot = m.get(col, col);
            det = f.mul(det, pivot);
            let inv = f.inv(pivot)?;
            for r in col + 1..n {
                let factor = f.mul(m.get(r, col), inv);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    let v = f.sub(m.get(r, c), f.mul(factor, m.get(col, c)));
                    m.set(r, c, v);
                }
            }
        }
        Ok(det)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf(q: u64) -> FieldSpec {
        FieldSpec::from_order(q).unwrap()
    }

    #[test]
    fn gf3_basics() {
        let f = gf(3);
        assert_eq!(f.add(2, 2), 1);
        assert_eq!(f.inv(2).unwrap(), 2);
        assert!(matches!(f.inv(0), Err(GfError::DivisionByZero)));
    }

    #[test]
    fn gf4_multiplication_matches_polynomial_oracle() {
        // Brute-force oracle: multiply polynomials over GF(2) and reduce by
        // x^2 + x + 1, working directly on bit masks.
        fn oracle_mul(a: u64, b: u64) -> u64 {
            let mut prod = 0u64;
            for i in 0..2 {
                for j in 0..2 {
                    if (a >> i) & 1 == 1 && (b >> j) & 1 == 1 {
                        prod ^= 1 << (i + j);
                    }
                }
            }
            // x^2 = x + 1
            if prod & 4 != 0 {
                prod = (prod ^ 4) ^ 3;
            }
            prod
        }
        let f = gf(4);
        assert_eq!(f.mul(2, 2), 3);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(f.mul(a, b), oracle_mul(a, b), "mul({a},{b})");
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small_orders() {
        for q in [2u64, 3, 4, 5, 8, 9, 16] {
            let f = gf(q);
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn larger_builtin_fields_have_valid_inverses() {
        for q in [25u64, 27] {
            let f = gf(q);
            for a in 1..q {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
    }

    #[test]
    fn frobenius_identity_in_extension_fields() {
        // (a + b)^p = a^p + b^p holds exactly in characteristic p.
        for q in [4u64, 8, 9, 16, 25, 27] {
            let f = gf(q);
            let p = f.characteristic();
            for a in 0..q {
                for b in 0..q {
                    assert_eq!(
                        f.pow(f.add(a, b), p),
                        f.add(f.pow(a, p), f.pow(b, p)),
                        "GF({q})"
                    );
                }
            }
        }
    }

    #[test]
    fn user_supplied_polynomials_are_validated() {
        // x^2 + 1 is irreducible over GF(3), x^2 + 2 = (x+1)(x+2) is not.
        assert!(FieldSpec::extension(3, 2, Some(vec![1, 0, 1])).is_ok());
        assert!(FieldSpec::extension(3, 2, Some(vec![2, 0, 1])).is_err());
        assert!(FieldSpec::extension(2, 2, Some(vec![1, 1])).is_err()); // wrong degree
        assert!(FieldSpec::extension(2, 3, Some(vec![1, 1, 0, 0])).is_err()); // not monic
    }

    #[test]
    fn from_order_rejects_non_prime_powers() {
        assert!(FieldSpec::from_order(6).is_err());
        assert!(FieldSpec::from_order(12).is_err());
        assert!(FieldSpec::from_order(1).is_err());
        assert!(FieldSpec::from_order(49)
            .unwrap_err()
            .to_string()
            .contains("reduction"));
    }

    #[test]
    fn field_mismatch_is_detected() {
        let a = Matrix::identity(gf(3), 2);
        let b = Matrix::identity(gf(5), 2);
        assert!(matches!(a.mul(&b), Err(GfError::FieldMismatch)));
    }

    #[test]
    fn rank_examples() {
        let f = gf(3);
        let m = Matrix::from_rows(
            f.clone(),
            vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        assert_eq!(m.rank(), 2);
        assert_eq!(Matrix::zero(f.clone(), 3, 3).rank(), 0);
        assert_eq!(Matrix::col_vec(f, vec![1, 1, 0, 1]).unwrap().rank(), 1);
    }

    #[test]
    fn solve_right_examples() {
        let f = gf(3);
        let a = Matrix::from_rows(
            f.clone(),
            vec![vec![1, 0], vec![1, 1], vec![0, 2], vec![1, 1]],
        )
        .unwrap();
        let b = Matrix::col_vec(f.clone(), vec![1, 0, 1, 0]).unwrap();
        let x = a.solve_right(&b).unwrap().unwrap();
        assert_eq!(x.column(0), vec![1, 2]);

        let i2 = Matrix::identity(f.clone(), 2);
        assert_eq!(i2.solve_right(&i2).unwrap().unwrap(), i2);

        let a = Matrix::from_rows(f.clone(), vec![vec![1, 0], vec![0, 0]]).unwrap();
        let b = Matrix::col_vec(f, vec![0, 1]).unwrap();
        assert!(a.solve_right(&b).unwrap().is_none());
    }

    #[test]
    fn intersection_examples() {
        let f = gf(3);
        let a = Matrix::col_vec(f.clone(), vec![1, 1, 0, 1]).unwrap();
        let b = Matrix::col_vec(f.clone(), vec![1, 0, 1, 0]).unwrap();
        assert_eq!(a.column_space_intersection(&b).unwrap().cols(), 0);

        let i2 = Matrix::identity(f.clone(), 2);
        assert_eq!(i2.column_space_intersection(&i2).unwrap().rank(), 2);

        let a = Matrix::col_vec(f.clone(), vec![1, 0, 0, 0]).unwrap();
        let gamma =
            Matrix::from_rows(f, vec![vec![1, 0], vec![0, 0], vec![0, 1], vec![0, 0]]).unwrap();
        let basis = a.column_space_intersection(&gamma).unwrap();
        assert_eq!(basis.cols(), 1);
        assert_eq!(basis.column(0), vec![1, 0, 0, 0]);
    }

    /// Determinant by cofactor expansion, an implementation-independent
    /// correctness oracle for the elimination-based routines.
    fn det_laplace(m: &Matrix) -> Elem {
        let n = m.rows();
        let f = m.field();
        if n == 0 {
            return 1;
        }
        if n == 1 {
            return m.get(0, 0);
        }
        let mut det = 0;
        for j in 0..n {
            let a = m.get(0, j);
            if a == 0 {
                continue;
            }
            let sub_cols: Vec<Vec<Elem>> = (0..n)
                .filter(|&c| c != j)
                .map(|c| (1..n).map(|r| m.get(r, c)).collect())
                .collect();
            let minor = Matrix::from_cols(f.clone(), sub_cols).unwrap();
            let term = f.mul(a, det_laplace(&minor));
            det = if j % 2 == 0 {
                f.add(det, term)
            } else {
                f.sub(det, term)
            };
        }
        det
    }

    #[test]
    fn complete_to_basis_examples() {
        let f = gf(3);
        let v = Matrix::col_vec(f.clone(), vec![1, 2]).unwrap();
        let m = v.complete_to_basis().unwrap();
        assert_eq!(m.row(0), &[1, 1]);
        assert_eq!(m.row(1), &[2, 0]);
        assert_ne!(det_laplace(&m), 0);

        let i3 = Matrix::identity(f.clone(), 3);
        assert_eq!(i3.complete_to_basis().unwrap(), i3);

        let empty = Matrix::zero(f.clone(), 2, 0);
        assert_eq!(
            empty.complete_to_basis().unwrap(),
            Matrix::identity(f.clone(), 2)
        );

        let indep = Matrix::from_cols(f, vec![vec![1, 2], vec![1, 0]]).unwrap();
        assert!(indep.complete_to_basis().is_ok());
        // [2,1] = 2*[1,2] over GF(3).
        let dep = Matrix::from_cols(gf(3), vec![vec![1, 2], vec![2, 1]]).unwrap();
        assert!(matches!(dep.complete_to_basis(), Err(GfError::Rank)));
    }

    #[test]
    fn determinant_matches_laplace_oracle() {
        let f = gf(5);
        let mut seed = 11u64;
        for _ in 0..50 {
            let mut rows = Vec::new();
            for _ in 0..3 {
                let mut row = Vec::new();
                for _ in 0..3 {
                    seed = seed
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    row.push((seed >> 33) % 5);
                }
                rows.push(row);
            }
            let m = Matrix::from_rows(f.clone(), rows).unwrap();
            assert_eq!(m.determinant().unwrap(), det_laplace(&m));
            assert_eq!(m.is_invertible(), det_laplace(&m) != 0);
        }
    }

    #[test]
    fn zero_dimension_matrices_behave() {
        let f = gf(3);
        let empty = Matrix::zero(f.clone(), 4, 0);
        assert_eq!(empty.rank(), 0);
        let t = Matrix::from_rows(
            f.clone(),
            vec![vec![1, 0], vec![0, 1], vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        assert_eq!(t.column_space_intersection(&empty).unwrap().cols(), 0);
        let x = t.solve_right(&empty).unwrap().unwrap();
        assert_eq!((x.rows(), x.cols()), (2, 0));
        let m0 = Matrix::zero(f, 0, 0);
        assert!(m0.is_invertible());
        assert_eq!(m0.inverse().unwrap().unwrap().rows(), 0);
    }

    fn arb_matrix(q: u64, max_dim: usize) -> impl Strategy<Value = Matrix> {
        (1..=max_dim, 1..=max_dim).prop_flat_map(move |(r, c)| {
            proptest::collection::vec(0..q, r * c).prop_map(move |entries| Matrix {
                rows: r,
                cols: c,
                entries,
                field: FieldSpec::from_order(q).unwrap(),
            })
        })
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(m in prop_oneof![arb_matrix(2, 5), arb_matrix(3, 4), arb_matrix(4, 3)]) {
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }

        #[test]
        fn solve_is_exact(a in arb_matrix(3, 4), x_entries in proptest::collection::vec(0..3u64, 16)) {
            let f = a.field().clone();
            let x = Matrix { rows: a.cols(), cols: 2, entries: x_entries[..a.cols() * 2].to_vec(), field: f };
            let b = a.mul(&x).unwrap();
            let solved = a.solve_right(&b).unwrap().expect("b is in the column space by construction");
            prop_assert_eq!(a.mul(&solved).unwrap(), b);
        }

        #[test]
        fn stacked_rank_vs_intersection(a in arb_matrix(3, 3), b_entries in proptest::collection::vec(0..3u64, 9)) {
            let b = Matrix { rows: a.rows(), cols: 3, entries: b_entries[..a.rows() * 3].to_vec(), field: a.field().clone() };
            let stacked = a.hstack(&b).unwrap();
            let inter = a.column_space_intersection(&b).unwrap();
            prop_assert_eq!(stacked.rank() + inter.cols(), a.rank() + b.rank());
            prop_assert!(stacked.rank() <= a.rank() + b.rank());
        }

        #[test]
        fn completion_has_full_rank(cols in proptest::collection::vec(proptest::collection::vec(0..5u64, 4), 0..3)) {
            let f = FieldSpec::from_order(5).unwrap();
            let m = Matrix::from_cols(f, cols).unwrap();
            let m = if m.cols() == 0 { Matrix::zero(FieldSpec::from_order(5).unwrap(), 4, 0) } else { m };
            if m.rank() == m.cols() {
                let full = m.complete_to_basis().unwrap();
                prop_assert_eq!(full.rank(), 4);
                prop_assert_ne!(det_laplace(&full), 0);
            }
        }
    }
}
