use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::{Fft, FftPlanner};

use super::layout::BasisLayout;
use crate::error::{QrfError, Result};
use crate::C64;

/// Tolerance for the Hermitian/unitary flags computed at construction.
pub const FLAG_TOL: f64 = 1e-12;

/// Largest dimension [`Operator::to_dense`] will materialize.
pub const DENSE_LIMIT: usize = 2048;

/// Structured operators at or below this dimension are collapsed to dense
/// matrices eagerly, so small systems always compare exactly.
const EAGER_DENSE: usize = 64;

/// `F† diag(symbol) F` on a single lattice factor, with `F` the unitary DFT
/// onto the centered plane waves `exp(i k_m x_j) / sqrt(N)`.
#[derive(Clone)]
pub(crate) struct FourierSymbol {
    symbol: Vec<C64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FourierSymbol {
    fn new(symbol: Vec<C64>) -> Self {
        let mut planner = FftPlanner::new();
        let n = symbol.len();
        FourierSymbol {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            symbol,
        }
    }

    fn with_symbol(&self, symbol: Vec<C64>) -> Self {
        FourierSymbol {
            symbol,
            fwd: Arc::clone(&self.fwd),
            inv: Arc::clone(&self.inv),
        }
    }

    fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.symbol.len();
        // (-1)^j moves the centered labels x_j = h (j - N/2) onto the FFT grid
        let mut buf: Vec<C64> = v
            .iter()
            .enumerate()
            .map(|(j, &x)| if j % 2 == 1 { -x } else { x })
            .collect();
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / n as f64;
        for (j, b) in buf.iter_mut().enumerate() {
            *b *= if j % 2 == 1 { -scale } else { scale };
        }
        buf
    }
}

#[derive(Clone)]
pub(crate) enum Repr {
    Dense(DMatrix<C64>),
    Diagonal(DVector<C64>),
    /// Amplitude `i` of the domain lands on index `perm[i]` of the codomain.
    Permutation(Arc<Vec<usize>>),
    Fourier(Arc<FourierSymbol>),
    /// Acts on active axis `axis` with `inner`, identity elsewhere.
    Embedded {
        axis: usize,
        inner: Arc<Operator>,
    },
    Sum(Vec<(C64, Operator)>),
    /// Matrix product `ops[0] * ops[1] * ...`.
    Product(Vec<Operator>),
}

/// Linear map between two basis layouts of equal dimension.
///
/// Observables have `domain == codomain`; frame changes map the layout of
/// one frame onto the layout of another. The matrix is stored in whatever
/// structured form keeps large lattice products cheap (diagonal,
/// permutation, Fourier-diagonal, factor embeddings) and is only
/// materialized densely where needed.
#[derive(Clone)]
pub struct Operator {
    domain: BasisLayout,
    codomain: BasisLayout,
    repr: Repr,
    hermitian: bool,
    unitary: bool,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Dense(_) => "dense",
            Repr::Diagonal(_) => "diagonal",
            Repr::Permutation(_) => "permutation",
            Repr::Fourier(_) => "fourier",
            Repr::Embedded { .. } => "embedded",
            Repr::Sum(_) => "sum",
            Repr::Product(_) => "product",
        };
        f.debug_struct("Operator")
            .field("domain", &self.domain.basis_id())
            .field("codomain", &self.codomain.basis_id())
            .field("repr", &kind)
            .field("hermitian", &self.hermitian)
            .field("unitary", &self.unitary)
            .finish()
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn dense_flags(m: &DMatrix<C64>) -> (bool, bool) {
    let adj = m.adjoint();
    let hermitian = m.is_square() && max_abs(&(m - &adj)) < FLAG_TOL;
    let unitary = m.is_square()
        && max_abs(&(m * &adj - DMatrix::<C64>::identity(m.nrows(), m.ncols()))) < FLAG_TOL;
    (hermitian, unitary)
}

fn check_layouts(left: &BasisLayout, right: &BasisLayout) -> Result<()> {
    if left != right {
        return Err(QrfError::BasisMismatch {
            left: left.basis_id().0,
            right: right.basis_id().0,
        });
    }
    Ok(())
}

impl Operator {
    fn build(
        domain: BasisLayout,
        codomain: BasisLayout,
        repr: Repr,
        hermitian: bool,
        unitary: bool,
    ) -> Operator {
        let mut op = Operator {
            domain,
            codomain,
            repr,
            hermitian,
            unitary,
        };
        let structured = matches!(
            op.repr,
            Repr::Embedded { .. } | Repr::Sum(_) | Repr::Product(_)
        );
        if structured && op.dim() <= EAGER_DENSE {
            let m = op.to_dense().expect("small operator is materializable");
            let (h, u) = dense_flags(&m);
            op.repr = Repr::Dense(m);
            op.hermitian = h;
            op.unitary = u;
        }
        op
    }

    pub fn dense(layout: BasisLayout, matrix: DMatrix<C64>) -> Result<Operator> {
        Operator::dense_map(layout.clone(), layout, matrix)
    }

    /// Dense map from `domain` to `codomain`; flags are validated here.
    pub fn dense_map(
        domain: BasisLayout,
        codomain: BasisLayout,
        matrix: DMatrix<C64>,
    ) -> Result<Operator> {
        if matrix.ncols() != domain.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: domain.dim(),
                actual: matrix.ncols(),
            });
        }
        if matrix.nrows() != codomain.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: codomain.dim(),
                actual: matrix.nrows(),
            });
        }
        let (mut hermitian, unitary) = dense_flags(&matrix);
        hermitian &= domain == codomain;
        Ok(Operator {
            domain,
            codomain,
            repr: Repr::Dense(matrix),
            hermitian,
            unitary,
        })
    }

    pub fn identity(layout: BasisLayout) -> Operator {
        let n = layout.dim();
        Operator {
            domain: layout.clone(),
            codomain: layout,
            repr: Repr::Diagonal(DVector::from_element(n, C64::new(1.0, 0.0))),
            hermitian: true,
            unitary: true,
        }
    }

    pub fn diagonal(layout: BasisLayout, diag: DVector<C64>) -> Result<Operator> {
        if diag.len() != layout.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: layout.dim(),
                actual: diag.len(),
            });
        }
        let hermitian = diag.iter().all(|z| z.im.abs() < FLAG_TOL);
        let unitary = diag.iter().all(|z| (z.norm() - 1.0).abs() < FLAG_TOL);
        Ok(Operator {
            domain: layout.clone(),
            codomain: layout,
            repr: Repr::Diagonal(diag),
            hermitian,
            unitary,
        })
    }

    pub fn real_diagonal(layout: BasisLayout, diag: &[f64]) -> Result<Operator> {
        Operator::diagonal(
            layout,
            DVector::from_iterator(diag.len(), diag.iter().map(|&d| C64::new(d, 0.0))),
        )
    }

    /// Permutation map sending basis vector `i` of `domain` to basis vector
    /// `perm[i]` of `codomain`.
    pub fn permutation(
        domain: BasisLayout,
        codomain: BasisLayout,
        perm: Vec<usize>,
    ) -> Result<Operator> {
        let n = domain.dim();
        if perm.len() != n || codomain.dim() != n {
            return Err(QrfError::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            if p >= n || seen[p] {
                return Err(QrfError::BadLayout("not a permutation".into()));
            }
            seen[p] = true;
        }
        let hermitian = domain == codomain && perm.iter().enumerate().all(|(i, &p)| perm[p] == i);
        Ok(Operator {
            domain,
            codomain,
            repr: Repr::Permutation(Arc::new(perm)),
            hermitian,
            unitary: true,
        })
    }

    /// Function of the lattice momentum on a single-factor layout:
    /// `F† diag(symbol) F` in the centered plane-wave basis.
    pub fn fourier(layout: BasisLayout, symbol: Vec<C64>) -> Result<Operator> {
        if layout.active_dims().len() != 1 {
            return Err(QrfError::BadLayout(
                "Fourier operators act on a single factor".into(),
            ));
        }
        if symbol.len() != layout.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: layout.dim(),
                actual: symbol.len(),
            });
        }
        let hermitian = symbol.iter().all(|z| z.im.abs() < FLAG_TOL);
        let unitary = symbol.iter().all(|z| (z.norm() - 1.0).abs() < FLAG_TOL);
        Ok(Operator {
            domain: layout.clone(),
            codomain: layout,
            repr: Repr::Fourier(Arc::new(FourierSymbol::new(symbol))),
            hermitian,
            unitary,
        })
    }

    /// Embed a single-factor operator on active axis `axis` of `layout`.
    pub(crate) fn embedded(layout: BasisLayout, axis: usize, inner: Operator) -> Operator {
        let hermitian = inner.hermitian;
        let unitary = inner.unitary;
        if let Repr::Diagonal(local) = &inner.repr {
            // diagonal ⊗ identity stays diagonal
            let dims = layout.active_dims();
            let after: usize = dims[axis + 1..].iter().product();
            let d = dims[axis];
            let diag = DVector::from_fn(layout.dim(), |i, _| local[(i / after) % d]);
            return Operator {
                domain: layout.clone(),
                codomain: layout,
                repr: Repr::Diagonal(diag),
                hermitian,
                unitary,
            };
        }
        if let Repr::Permutation(local) = &inner.repr {
            let dims = layout.active_dims();
            let after: usize = dims[axis + 1..].iter().product();
            let d = dims[axis];
            let perm = (0..layout.dim())
                .map(|i| {
                    let digit = (i / after) % d;
                    i - digit * after + local[digit] * after
                })
                .collect();
            return Operator {
                domain: layout.clone(),
                codomain: layout,
                repr: Repr::Permutation(Arc::new(perm)),
                hermitian,
                unitary,
            };
        }
        Operator::build(
            layout.clone(),
            layout,
            Repr::Embedded {
                axis,
                inner: Arc::new(inner),
            },
            hermitian,
            unitary,
        )
    }

    pub fn domain(&self) -> &BasisLayout {
        &self.domain
    }

    pub fn codomain(&self) -> &BasisLayout {
        &self.codomain
    }

    /// Layout the operator acts on; the codomain for maps between frames.
    pub fn layout(&self) -> &BasisLayout {
        &self.codomain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub(crate) fn set_hermitian(&mut self) {
        self.hermitian = self.is_endomorphism();
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain == self.codomain
    }

    /// Diagonal entries, when the operator is stored diagonally.
    pub fn as_diagonal(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            _ => None,
        }
    }

    /// Codomain index of each domain basis vector, when stored as a permutation.
    pub fn as_permutation(&self) -> Option<&[usize]> {
        match &self.repr {
            Repr::Permutation(p) => Some(p.as_slice()),
            _ => None,
        }
    }

    pub fn apply_vec(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(DVector::from_vec(self.apply_slice(v.as_slice())))
    }

    pub(crate) fn apply_slice(&self, v: &[C64]) -> Vec<C64> {
        match &self.repr {
            Repr::Dense(m) => {
                let x = DVector::from_column_slice(v);
                (m * x).as_slice().to_vec()
            }
            Repr::Diagonal(d) => v.iter().zip(d.iter()).map(|(a, b)| a * b).collect(),
            Repr::Permutation(p) => {
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                for (i, &target) in p.iter().enumerate() {
                    out[target] = v[i];
                }
                out
            }
            Repr::Fourier(f) => f.apply(v),
            Repr::Embedded { axis, inner } => {
                let dims = self.domain.active_dims();
                let d = dims[*axis];
                let after: usize = dims[axis + 1..].iter().product();
                let before: usize = dims[..*axis].iter().product();
                let mut out = vec![C64::new(0.0, 0.0); v.len()];
                let mut fiber = vec![C64::new(0.0, 0.0); d];
                for b in 0..before {
                    for t in 0..after {
                        let base = b * d * after + t;
                        for (j, slot) in fiber.iter_mut().enumerate() {
                            *slot = v[base + j * after];
                        }
                        let image = inner.apply_slice(&fiber);
                        for (j, val) in image.into_iter().enumerate() {
                            out[base + j * after] = val;
                        }
                    }
                }
                out
            }
            Repr::Sum(terms) => {
                let mut out = vec![C64::new(0.0, 0.0); self.codomain.dim()];
                for (c, op) in terms {
                    for (o, x) in out.iter_mut().zip(op.apply_slice(v)) {
                        *o += c * x;
                    }
                }
                out
            }
            Repr::Product(ops) => {
                let mut acc = v.to_vec();
                for op in ops.iter().rev() {
                    acc = op.apply_slice(&acc);
                }
                acc
            }
        }
    }

    pub fn adjoint(&self) -> Operator {
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Diagonal(d) => Repr::Diagonal(d.map(|z| z.conj())),
            Repr::Permutation(p) => {
                let mut inv = vec![0usize; p.len()];
                for (i, &t) in p.iter().enumerate() {
                    inv[t] = i;
                }
                Repr::Permutation(Arc::new(inv))
            }
            Repr::Fourier(f) => Repr::Fourier(Arc::new(
                f.with_symbol(f.symbol.iter().map(|z| z.conj()).collect()),
            )),
            Repr::Embedded { axis, inner } => Repr::Embedded {
                axis: *axis,
                inner: Arc::new(inner.adjoint()),
            },
            Repr::Sum(terms) => Repr::Sum(
                terms
                    .iter()
                    .map(|(c, op)| (c.conj(), op.adjoint()))
                    .collect(),
            ),
            Repr::Product(ops) => Repr::Product(ops.iter().rev().map(Operator::adjoint).collect()),
        };
        Operator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            repr,
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &Operator) -> Result<Operator> {
        check_layouts(&self.domain, &rhs.codomain)?;
        let domain = rhs.domain.clone();
        let codomain = self.codomain.clone();
        let unitary = self.unitary && rhs.unitary;
        let repr = match (&self.repr, &rhs.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => {
                return Operator::dense_map(domain, codomain, a * b);
            }
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                return Operator::diagonal(codomain, a.component_mul(b));
            }
            (Repr::Permutation(p), Repr::Permutation(q)) => {
                let r = q.iter().map(|&i| p[i]).collect();
                return Operator::permutation(domain, codomain, r);
            }
            (Repr::Fourier(a), Repr::Fourier(b)) => {
                let sym = a.symbol.iter().zip(&b.symbol).map(|(x, y)| x * y).collect();
                return Operator::fourier(codomain, sym);
            }
            (
                Repr::Embedded { axis: i, inner: x },
                Repr::Embedded { axis: j, inner: y },
            ) if i == j => {
                let inner = x.compose(y)?;
                return Ok(Operator::embedded(codomain, *i, inner));
            }
            _ => {
                let mut ops = Vec::new();
                for op in [self, rhs] {
                    match &op.repr {
                        Repr::Product(inner) => ops.extend(inner.iter().cloned()),
                        _ => ops.push(op.clone()),
                    }
                }
                Repr::Product(ops)
            }
        };
        Ok(Operator::build(domain, codomain, repr, false, unitary))
    }

    /// `Σ c_k op_k` over operators sharing domain and codomain.
    pub fn linear_combination(terms: &[(C64, &Operator)]) -> Result<Operator> {
        let (_, first) = terms.first().ok_or(QrfError::BadParameters(
            "empty linear combination".into(),
        ))?;
        let domain = first.domain.clone();
        let codomain = first.codomain.clone();
        for (_, op) in terms {
            check_layouts(&domain, &op.domain)?;
            check_layouts(&codomain, &op.codomain)?;
        }
        if terms.len() == 1 {
            return Ok(first.scale(terms[0].0));
        }
        if terms.iter().all(|(_, op)| matches!(op.repr, Repr::Diagonal(_))) {
            let mut acc = DVector::from_element(codomain.dim(), C64::new(0.0, 0.0));
            for (c, op) in terms {
                acc += op.as_diagonal().unwrap() * *c;
            }
            return Operator::diagonal(codomain, acc);
        }
        if terms.iter().all(|(_, op)| matches!(op.repr, Repr::Dense(_))) {
            let mut acc = DMatrix::from_element(codomain.dim(), domain.dim(), C64::new(0.0, 0.0));
            for (c, op) in terms {
                if let Repr::Dense(m) = &op.repr {
                    acc += m * *c;
                }
            }
            return Operator::dense_map(domain, codomain, acc);
        }
        let hermitian = domain == codomain
            && terms
                .iter()
                .all(|(c, op)| op.hermitian && c.im.abs() < FLAG_TOL);
        let mut flat = Vec::new();
        for (c, op) in terms {
            match &op.repr {
                Repr::Sum(inner) => flat.extend(inner.iter().map(|(d, o)| (c * d, o.clone()))),
                _ => flat.push((*c, (*op).clone())),
            }
        }
        Ok(Operator::build(domain, codomain, Repr::Sum(flat), hermitian, false))
    }

    pub fn add(&self, rhs: &Operator) -> Result<Operator> {
        let one = C64::new(1.0, 0.0);
        Operator::linear_combination(&[(one, self), (one, rhs)])
    }

    pub fn sub(&self, rhs: &Operator) -> Result<Operator> {
        Operator::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), rhs)])
    }

    pub fn scale(&self, c: C64) -> Operator {
        let hermitian = self.hermitian && c.im.abs() < FLAG_TOL;
        let unitary = self.unitary && (c.norm() - 1.0).abs() < FLAG_TOL;
        let repr = match &self.repr {
            Repr::Dense(m) => Repr::Dense(m * c),
            Repr::Diagonal(d) => Repr::Diagonal(d * c),
            Repr::Fourier(f) => {
                Repr::Fourier(Arc::new(f.with_symbol(f.symbol.iter().map(|z| z * c).collect())))
            }
            Repr::Embedded { axis, inner } => Repr::Embedded {
                axis: *axis,
                inner: Arc::new(inner.scale(c)),
            },
            Repr::Sum(terms) => Repr::Sum(terms.iter().map(|(d, op)| (c * d, op.clone())).collect()),
            _ => Repr::Sum(vec![(c, self.clone())]),
        };
        Operator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            repr,
            hermitian,
            unitary,
        }
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Operator) -> Result<Operator> {
        self.compose(rhs)?.sub(&rhs.compose(self)?)
    }

    /// Dense matrix of elements `⟨m|op|n⟩` (row `m`, column `n`).
    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        let (rows, cols) = (self.codomain.dim(), self.domain.dim());
        match &self.repr {
            Repr::Dense(m) => return Ok(m.clone()),
            Repr::Diagonal(d) => return Ok(DMatrix::from_diagonal(d)),
            _ => {}
        }
        if rows.max(cols) > DENSE_LIMIT {
            return Err(QrfError::TooLarge {
                dim: rows.max(cols),
            });
        }
        let mut m = DMatrix::from_element(rows, cols, C64::new(0.0, 0.0));
        let mut e = vec![C64::new(0.0, 0.0); cols];
        for n in 0..cols {
            e[n] = C64::new(1.0, 0.0);
            let col = self.apply_slice(&e);
            for (r, val) in col.into_iter().enumerate() {
                m[(r, n)] = val;
            }
            e[n] = C64::new(0.0, 0.0);
        }
        Ok(m)
    }

    /// Largest `|self − rhs|` entry, or `None` when neither a structural
    /// comparison nor a dense materialization is available.
    pub fn max_abs_diff(&self, rhs: &Operator) -> Option<f64> {
        if self.domain != rhs.domain || self.codomain != rhs.codomain {
            return None;
        }
        match (&self.repr, &rhs.repr) {
            (Repr::Diagonal(a), Repr::Diagonal(b)) => {
                return Some((a - b).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
            (Repr::Dense(a), Repr::Dense(b)) => return Some(max_abs(&(a - b))),
            (Repr::Permutation(p), Repr::Permutation(q)) => {
                return Some(if p == q { 0.0 } else { 1.0 });
            }
            (Repr::Fourier(a), Repr::Fourier(b)) if a.symbol == b.symbol => return Some(0.0),
            _ => {}
        }
        let a = self.to_dense().ok()?;
        let b = rhs.to_dense().ok()?;
        Some(max_abs(&(a - b)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statekit::layout::{Factor, Role};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn qubit_layout() -> BasisLayout {
        BasisLayout::qubits(Role::A, &[Role::B]).unwrap()
    }

    #[test]
    fn dense_flags_detected() {
        let x = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let op = Operator::dense(qubit_layout(), x).unwrap();
        assert!(op.is_hermitian());
        assert!(op.is_unitary());
        let n = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let op = Operator::dense(qubit_layout(), n).unwrap();
        assert!(!op.is_hermitian());
        assert!(!op.is_unitary());
    }

    #[test]
    fn permutation_adjoint_is_inverse() {
        let l = BasisLayout::new(vec![Factor::frame(Role::A), Factor::indexed(Role::B, 4)]).unwrap();
        let p = Operator::permutation(l.clone(), l.clone(), vec![1, 2, 3, 0]).unwrap();
        let id = p.compose(&p.adjoint()).unwrap();
        assert_eq!(id.as_permutation().unwrap(), &[0, 1, 2, 3]);
        assert!(Operator::permutation(l.clone(), l, vec![0, 0, 1, 2]).is_err());
    }

    #[test]
    fn fourier_matches_explicit_dft() {
        let n = 8;
        let l = BasisLayout::new(vec![Factor::frame(Role::A), Factor::indexed(Role::B, n)]).unwrap();
        let sym: Vec<C64> = (0..n).map(|m| c(m as f64 - 3.3, 0.5 * m as f64)).collect();
        let op = Operator::fourier(l, sym.clone()).unwrap();
        let dense = op.to_dense().unwrap();
        // explicit Σ_m e_m symbol_m e_m† with e_m(j) = exp(2πi (m-N/2)(j-N/2)/N)/√N
        let half = (n / 2) as f64;
        for j in 0..n {
            for l in 0..n {
                let mut acc = c(0., 0.);
                for (m, s) in sym.iter().enumerate() {
                    let phase = 2.0 * std::f64::consts::PI * (m as f64 - half)
                        * ((j as f64 - half) - (l as f64 - half))
                        / n as f64;
                    acc += s * C64::from_polar(1.0, phase) / n as f64;
                }
                assert!((acc - dense[(j, l)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn embedded_dense_matches_kronecker() {
        let l = BasisLayout::new(vec![
            Factor::frame(Role::A),
            Factor::indexed(Role::B, 3),
            Factor::indexed(Role::C, 2),
        ])
        .unwrap();
        let local_c = l.local(Role::C).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 1.), c(0., -1.), c(3., 0.)]);
        let inner = Operator::dense(local_c, m.clone()).unwrap();
        let op = Operator::embedded(l, 1, inner);
        let expected = DMatrix::<C64>::identity(3, 3).kronecker(&m);
        assert!(max_abs(&(op.to_dense().unwrap() - expected)) < 1e-15);
    }

    #[test]
    fn linear_combination_of_diagonals_stays_diagonal() {
        let l = qubit_layout();
        let a = Operator::real_diagonal(l.clone(), &[1.0, 2.0]).unwrap();
        let b = Operator::real_diagonal(l, &[0.5, -1.0]).unwrap();
        let d = a.sub(&b).unwrap();
        assert_eq!(d.as_diagonal().unwrap().as_slice(), &[c(0.5, 0.), c(3.0, 0.)]);
        assert!(d.is_hermitian());
    }

    #[test]
    fn mismatched_layouts_rejected() {
        let a = Operator::identity(qubit_layout());
        let b = Operator::identity(BasisLayout::qubits(Role::A, &[Role::C]).unwrap());
        assert!(matches!(a.compose(&b), Err(QrfError::BasisMismatch { .. })));
    }
}
