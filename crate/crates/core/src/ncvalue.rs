//! Noncommutative values of observables.
//!
//! For a normalized state `z` and an observable with matrix elements
//! `M^m_n = ⟨m|β|n⟩` the value `[β]_z` is the sequence `{f, V_n, M}` with
//!
//! ```text
//! f   = z̄ M z
//! V_n = ∂_n f = −f z̄_n + Σ_m z̄_m M^m_n
//! ```
//!
//! Products of observables map to the star product of their values, the
//! variance is `Σ_n |V_n|²`, and `V` vanishes exactly on eigenstates.

use nalgebra::{DMatrix, DVector};

use crate::error::{QrfError, Result};
use crate::statekit::{conjugate, BasisId, Operator, State};
use crate::C64;

/// Default relative singular-value threshold for [`factor_rank`].
pub const FACTOR_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct NcValue {
    pub f: C64,
    pub v: DVector<C64>,
    pub m: Operator,
    pub basis: BasisId,
}

impl NcValue {
    /// `Σ_n |V_n|²`.
    pub fn v_norm_sqr(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest component-wise deviation in `f` and `V` from `other`.
    pub fn max_fv_diff(&self, other: &NcValue) -> f64 {
        let df = (self.f - other.f).norm();
        let dv = self
            .v
            .iter()
            .zip(other.v.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        df.max(dv)
    }

    /// Like [`max_diff`](Self::max_diff), but when the matrices are too
    /// large to compare entrywise they are compared through their action
    /// `M z` and `M† z` on the generating state `s`.
    pub fn max_diff_at(&self, other: &NcValue, s: &State) -> f64 {
        if self.basis != other.basis || self.v.len() != other.v.len() {
            return f64::INFINITY;
        }
        match self.m.max_abs_diff(&other.m) {
            Some(dm) => self.max_fv_diff(other).max(dm),
            None => self.max_diff_on(other, s),
        }
    }

    /// Deviation in `f`, `V` and the action of `M` and `M†` on `s` only.
    /// Used where two matrices agree on the support of the state but not
    /// on every basis vector, as with cyclic lattice labels.
    pub fn max_diff_on(&self, other: &NcValue, s: &State) -> f64 {
        if self.basis != other.basis || self.v.len() != other.v.len() {
            return f64::INFINITY;
        }
        let z = s.amplitude_slice();
        let fwd = crate::max_dev(&self.m.apply_slice(z), &other.m.apply_slice(z));
        let adj = crate::max_dev(
            &self.m.adjoint().apply_slice(z),
            &other.m.adjoint().apply_slice(z),
        );
        self.max_fv_diff(other).max(fwd).max(adj)
    }

    /// Largest deviation over `f`, `V` and the matrix elements, or `None`
    /// when the matrices cannot be compared entrywise at this size.
    pub fn max_diff(&self, other: &NcValue) -> Option<f64> {
        if self.basis != other.basis || self.v.len() != other.v.len() {
            return None;
        }
        let dm = self.m.max_abs_diff(&other.m)?;
        Some(self.max_fv_diff(other).max(dm))
    }
}

/// `k̃_{m̄n} = ∂_n ∂_m̄ f` at the generating state.
#[derive(Clone, Debug)]
pub struct KTilde {
    pub k: DMatrix<C64>,
    pub basis: BasisId,
}

impl KTilde {
    /// Matrix elements `M^m_n = k̃_{m̄n} + f δ_mn + z_m V_n + z̄_n V̄_m`
    /// (Hermitian observables).
    pub fn reconstruct_matrix(&self, f: C64, v: &DVector<C64>, z: &DVector<C64>) -> DMatrix<C64> {
        let n = z.len();
        DMatrix::from_fn(n, n, |m, k| {
            let delta = if m == k { f } else { C64::new(0.0, 0.0) };
            self.k[(m, k)] + delta + z[m] * v[k] + z[k].conj() * v[m].conj()
        })
    }
}

fn require_state(op: &Operator, s: &State) -> Result<()> {
    if op.domain() != s.layout() || op.codomain() != s.layout() {
        return Err(QrfError::DimensionMismatch {
            expected: s.dim(),
            actual: op.dim(),
        });
    }
    if !s.is_normalized() {
        return Err(QrfError::NotNormalized {
            norm_sqr: s.norm_sqr(),
        });
    }
    Ok(())
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨s|op|s⟩`; real part only is meaningful for Hermitian `op`.
pub fn expectation(op: &Operator, s: &State) -> Result<C64> {
    require_state(op, s)?;
    let z = s.amplitudes().as_slice();
    let mz = op.apply_slice(z);
    let f = dot_conj(z, &mz);
    Ok(if op.is_hermitian() {
        C64::new(f.re, 0.0)
    } else {
        f
    })
}

/// `V_n = −f z̄_n + Σ_m z̄_m M^m_n = conj((M† z)_n) − f z̄_n`.
fn covector(m: &Operator, z: &[C64], f: C64) -> DVector<C64> {
    let w = if m.is_hermitian() {
        m.apply_slice(z)
    } else {
        m.adjoint().apply_slice(z)
    };
    DVector::from_iterator(
        z.len(),
        w.iter().zip(z).map(|(wn, zn)| wn.conj() - f * zn.conj()),
    )
}

/// Barred derivative `∂_n̄ f = (M z)_n − f z_n`; the conjugate of `V_n` for
/// Hermitian observables.
fn barred_covector(m: &Operator, z: &[C64], f: C64) -> Vec<C64> {
    m.apply_slice(z)
        .into_iter()
        .zip(z)
        .map(|(mz, zn)| mz - f * zn)
        .collect()
}

pub fn ncvalue_of(op: &Operator, s: &State) -> Result<NcValue> {
    let f = expectation(op, s)?;
    let v = covector(op, s.amplitudes().as_slice(), f);
    Ok(NcValue {
        f,
        v,
        m: op.clone(),
        basis: s.layout().basis_id(),
    })
}

fn require_basis(v: &NcValue, s: &State) -> Result<()> {
    let id = s.layout().basis_id();
    if v.basis != id {
        return Err(QrfError::BasisMismatch {
            left: v.basis.0.clone(),
            right: id.0,
        });
    }
    Ok(())
}

/// Star product `[β] ⋆ [γ] = [βγ]` at the generating state `s`:
///
/// ```text
/// f_βγ   = f_β f_γ + Σ_n V_β,n ∂_n̄ f_γ
/// M_βγ   = M_β M_γ
/// V_βγ,n = −f_βγ z̄_n + Σ_m z̄_m (M_βγ)^m_n
/// ```
pub fn star(a: &NcValue, b: &NcValue, s: &State) -> Result<NcValue> {
    require_basis(a, s)?;
    require_basis(b, s)?;
    let z = s.amplitudes().as_slice();
    let wb = barred_covector(&b.m, z, b.f);
    let f = a.f * b.f + a.v.iter().zip(&wb).map(|(x, y)| x * y).sum::<C64>();
    let m = a.m.compose(&b.m)?;
    let v = covector(&m, z, f);
    Ok(NcValue {
        f,
        v,
        m,
        basis: a.basis.clone(),
    })
}

/// Variance of a Hermitian observable: `Σ_n |V_n|²`.
pub fn uncertainty(v: &NcValue) -> f64 {
    v.v_norm_sqr()
}

/// Component-wise `Σ c_k [β_k]`.
pub fn linear_combine(coeffs: &[C64], values: &[&NcValue]) -> Result<NcValue> {
    if coeffs.len() != values.len() || values.is_empty() {
        return Err(QrfError::DimensionMismatch {
            expected: values.len(),
            actual: coeffs.len(),
        });
    }
    let basis = values[0].basis.clone();
    for v in values {
        if v.basis != basis {
            return Err(QrfError::BasisMismatch {
                left: basis.0.clone(),
                right: v.basis.0.clone(),
            });
        }
    }
    let f = coeffs.iter().zip(values).map(|(c, v)| c * v.f).sum();
    let mut acc = DVector::from_element(values[0].v.len(), C64::new(0.0, 0.0));
    for (c, v) in coeffs.iter().zip(values) {
        acc += &v.v * *c;
    }
    let terms: Vec<(C64, &Operator)> = coeffs.iter().copied().zip(values.iter().map(|v| &v.m)).collect();
    let m = Operator::linear_combination(&terms)?;
    Ok(NcValue {
        f,
        v: acc,
        m,
        basis,
    })
}

/// Re-express a value in the basis reached by the unitary `u` (coordinates
/// `z' = u z`): `V' = V u†`, `M' = u M u†`, `f` unchanged.
pub fn reexpress(v: &NcValue, u: &Operator) -> Result<NcValue> {
    if !u.is_unitary() {
        return Err(QrfError::NotUnitary);
    }
    let from = u.domain().basis_id();
    if v.basis != from {
        return Err(QrfError::BasisMismatch {
            left: v.basis.0.clone(),
            right: from.0,
        });
    }
    let vbar: Vec<C64> = v.v.iter().map(|x| x.conj()).collect();
    let image = u.apply_slice(&vbar);
    Ok(NcValue {
        f: v.f,
        v: DVector::from_iterator(image.len(), image.iter().map(|x| x.conj())),
        m: conjugate(u, &v.m)?,
        basis: u.codomain().basis_id(),
    })
}

/// `k̃_{m̄n} = M^m_n − f δ_mn − z_m V_n − z̄_n ∂_m̄ f`.
pub fn ktilde_of(op: &Operator, s: &State) -> Result<KTilde> {
    let val = ncvalue_of(op, s)?;
    let z = s.amplitudes();
    let w = barred_covector(op, z.as_slice(), val.f);
    let m = op.to_dense()?;
    let n = z.len();
    let k = DMatrix::from_fn(n, n, |r, c| {
        let delta = if r == c { val.f } else { C64::new(0.0, 0.0) };
        m[(r, c)] - delta - z[r] * val.v[c] - z[c].conj() * w[r]
    });
    Ok(KTilde { k, basis: val.basis })
}

/// Singular-value rank of `data` viewed as a row-major `rows × cols`
/// matrix, counting values above `tol` times the largest one.
pub fn factor_rank(data: &[C64], rows: usize, cols: usize, tol: f64) -> Result<usize> {
    if rows == 0 || cols == 0 || rows * cols != data.len() {
        return Err(QrfError::BadBipartition {
            dim: data.len(),
            rows,
            cols,
        });
    }
    let m = DMatrix::from_row_slice(rows, cols, data);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * max).count())
}

/// Rank of a two-factor state's amplitudes across its factor boundary.
pub fn state_factor_rank(s: &State, tol: f64) -> Result<usize> {
    let dims = s.layout().active_dims();
    if dims.len() != 2 {
        return Err(QrfError::BadBipartition {
            dim: s.dim(),
            rows: dims.first().copied().unwrap_or(0),
            cols: 0,
        });
    }
    factor_rank(s.amplitude_slice(), dims[0], dims[1], tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::pauli;
    use crate::statekit::{make_state, operator_on_factor, BasisLayout, Role};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_qubits() -> BasisLayout {
        BasisLayout::qubits(Role::A, &[Role::B, Role::C]).unwrap()
    }

    fn case_c_state(cc: C64, ss: C64) -> State {
        make_state(
            two_qubits(),
            DVector::from_vec(vec![cc, c(0., 0.), c(0., 0.), ss]),
            false,
        )
        .unwrap()
    }

    fn sigma_on(k: usize, role: Role) -> Operator {
        let l = two_qubits();
        let local = Operator::dense(l.local(role).unwrap(), pauli(k)).unwrap();
        operator_on_factor(&local, role, &l).unwrap()
    }

    #[test]
    fn sigma3_value_at_correlated_state() {
        let (theta, zeta) = (1.1_f64, 0.7_f64);
        let cc = C64::from_polar((theta / 2.0).cos(), -zeta / 2.0);
        let ss = C64::from_polar((theta / 2.0).sin(), zeta / 2.0);
        let s = case_c_state(cc, ss);
        let val = ncvalue_of(&sigma_on(3, Role::B), &s).unwrap();
        let (c2, s2) = (cc.norm_sqr(), ss.norm_sqr());
        assert!((val.f - c(c2 - s2, 0.)).norm() < 1e-12);
        let expected = [cc.conj() * 2.0 * s2, c(0., 0.), c(0., 0.), -ss.conj() * 2.0 * c2];
        for (a, b) in val.v.iter().zip(expected) {
            assert!((a - b).norm() < 1e-12);
        }
        // C carries the identical value by perfect correlation
        let valc = ncvalue_of(&sigma_on(3, Role::C), &s).unwrap();
        assert!(val.max_fv_diff(&valc) < 1e-12);
        let var = uncertainty(&valc);
        assert!((var - 4.0 * s2 * c2).abs() < 1e-12);
        assert!((var - (1.0 - (c2 - s2).powi(2))).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_and_constant_have_zero_v() {
        let l = two_qubits();
        let s = State::basis(l.clone(), 2).unwrap();
        let val = ncvalue_of(&sigma_on(3, Role::B), &s).unwrap();
        assert_eq!(val.f, c(-1., 0.));
        assert!(val.v.iter().all(|z| z.norm() == 0.0));

        let r = 2.5;
        let amps = DVector::from_vec(vec![c(0.5, 0.1), c(0.2, -0.3), c(0.4, 0.), c(0.1, 0.6)]);
        let s = make_state(l.clone(), amps, true).unwrap();
        let cst = Operator::identity(l).scale(c(r, 0.));
        let val = ncvalue_of(&cst, &s).unwrap();
        assert!((val.f - c(r, 0.)).norm() < 1e-14);
        assert!(val.v.iter().all(|z| z.norm() < 1e-14));
        let k = ktilde_of(&cst, &s).unwrap();
        assert!(k.k.iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn star_with_identity_is_neutral() {
        let l = two_qubits();
        let amps = DVector::from_vec(vec![c(0.5, 0.1), c(0.2, -0.3), c(0.4, 0.), c(0.1, 0.6)]);
        let s = make_state(l.clone(), amps, true).unwrap();
        let beta = ncvalue_of(&sigma_on(1, Role::C), &s).unwrap();
        let one = ncvalue_of(&Operator::identity(l), &s).unwrap();
        let prod = star(&beta, &one, &s).unwrap();
        assert!(prod.max_diff(&beta).unwrap() < 1e-14);
    }

    #[test]
    fn basis_mismatch_is_reported() {
        let s = State::basis(two_qubits(), 0).unwrap();
        let other = State::basis(BasisLayout::qubits(Role::B, &[Role::A, Role::C]).unwrap(), 0).unwrap();
        let a = ncvalue_of(&sigma_on(3, Role::B), &s).unwrap();
        assert!(matches!(star(&a, &a, &other), Err(QrfError::BasisMismatch { .. })));
    }

    #[test]
    fn unnormalized_state_rejected() {
        let s = make_state(
            two_qubits(),
            DVector::from_vec(vec![c(1., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]),
            false,
        )
        .unwrap();
        assert!(matches!(
            expectation(&sigma_on(3, Role::B), &s),
            Err(QrfError::NotNormalized { .. })
        ));
    }

    #[test]
    fn ranks_of_product_and_entangled_states() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let prod = [c(0.6, 0.), c(0.8, 0.), c(0., 0.), c(0., 0.)];
        assert_eq!(factor_rank(&prod, 2, 2, FACTOR_TOL).unwrap(), 1);
        let bell = [c(r, 0.), c(0., 0.), c(0., 0.), c(0., r)];
        assert_eq!(factor_rank(&bell, 2, 2, FACTOR_TOL).unwrap(), 2);
        assert!(matches!(
            factor_rank(&bell, 3, 2, FACTOR_TOL),
            Err(QrfError::BadBipartition { .. })
        ));
    }

    #[test]
    fn degenerate_eigenvectors_share_values() {
        let l = BasisLayout::new(vec![
            crate::statekit::Factor::frame(Role::A),
            crate::statekit::Factor::indexed(Role::Generic, 3),
        ])
        .unwrap();
        let beta = Operator::real_diagonal(l.clone(), &[2.0, 2.0, -1.0]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let u = make_state(l.clone(), DVector::from_vec(vec![c(r, 0.), c(0., r), c(0., 0.)]), false).unwrap();
        let w = make_state(l, DVector::from_vec(vec![c(0., r), c(r, 0.), c(0., 0.)]), false).unwrap();
        let a = ncvalue_of(&beta, &u).unwrap();
        let b = ncvalue_of(&beta, &w).unwrap();
        assert!(a.max_diff(&b).unwrap() < 1e-15);
        assert!(a.v_norm_sqr() < 1e-30);
    }
}
