//! Finite-dimensional Hilbert-space core: layouts with subsystem roles,
//! pure states, structured operators and the frame-slot bookkeeping.
//!
//! The subsystem acting as the reference frame is represented by an
//! amplitude-free factor. Frame changes relabel roles; they never store a
//! zero vector inside a normalized amplitude array.

mod layout;
mod operator;

use nalgebra::DVector;

pub use layout::{BasisId, BasisLayout, Factor, Role};
pub use operator::{Operator, DENSE_LIMIT, FLAG_TOL};

use crate::error::{QrfError, Result};
use crate::C64;

/// Normalization tolerance on `Σ|z_i|²`.
pub const NORM_TOL: f64 = 1e-12;

/// Pure state: amplitudes over the row-major product basis of the active
/// factors of `layout`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    layout: BasisLayout,
    amplitudes: DVector<C64>,
    normalized: bool,
}

impl State {
    pub fn layout(&self) -> &BasisLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Basis vector with the given flat index.
    pub fn basis(layout: BasisLayout, index: usize) -> Result<State> {
        let n = layout.dim();
        if index >= n {
            return Err(QrfError::DimensionMismatch {
                expected: n,
                actual: index + 1,
            });
        }
        let mut amps = DVector::from_element(n, C64::new(0.0, 0.0));
        amps[index] = C64::new(1.0, 0.0);
        make_state(layout, amps, false)
    }

    pub(crate) fn amplitude_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }
}

fn is_unit(norm_sqr: f64) -> bool {
    (norm_sqr - 1.0).abs() < NORM_TOL
}

/// Build a state over `layout`, optionally normalizing.
pub fn make_state(layout: BasisLayout, amplitudes: DVector<C64>, normalize: bool) -> Result<State> {
    if amplitudes.len() != layout.dim() {
        return Err(QrfError::DimensionMismatch {
            expected: layout.dim(),
            actual: amplitudes.len(),
        });
    }
    let norm_sqr: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    if norm_sqr == 0.0 {
        return Err(QrfError::ZeroVectorInput);
    }
    let amplitudes = if normalize {
        amplitudes / C64::new(norm_sqr.sqrt(), 0.0)
    } else {
        amplitudes
    };
    let normalized = is_unit(amplitudes.iter().map(|z| z.norm_sqr()).sum());
    Ok(State {
        layout,
        amplitudes,
        normalized,
    })
}

/// Outer product of two states sharing the same frame slot and disjoint
/// active roles.
pub fn tensor_states(a: &State, b: &State) -> Result<State> {
    if a.layout.frame_role() != b.layout.frame_role() {
        return Err(QrfError::BadLayout(format!(
            "frame slots differ: {} vs {}",
            a.layout.frame_role(),
            b.layout.frame_role()
        )));
    }
    for role in a.layout.active_roles() {
        if b.layout.has_role(role) {
            return Err(QrfError::RoleCollision(role));
        }
    }
    for role in b.layout.active_roles() {
        if a.layout.has_role(role) && a.layout.frame_role() != role {
            return Err(QrfError::RoleCollision(role));
        }
    }
    let mut factors: Vec<Factor> = vec![Factor::frame(a.layout.frame_role())];
    factors.extend(a.layout.active_factors().cloned());
    factors.extend(b.layout.active_factors().cloned());
    let concat_roles: Vec<Role> = factors[1..].iter().map(|f| f.role).collect();
    let concat_dims: Vec<usize> = factors[1..].iter().map(Factor::dim).collect();
    let layout = BasisLayout::new(factors)?;

    let outer: Vec<C64> = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    let order: Vec<usize> = layout
        .active_roles()
        .iter()
        .map(|r| concat_roles.iter().position(|c| c == r).unwrap())
        .collect();
    let perm = layout::axis_permutation(&concat_dims, &order);
    let mut amps = DVector::from_element(outer.len(), C64::new(0.0, 0.0));
    for (i, &p) in perm.iter().enumerate() {
        amps[p] = outer[i];
    }
    let normalized = a.normalized && b.normalized;
    Ok(State {
        layout,
        amplitudes: amps,
        normalized,
    })
}

/// Matrix-vector product; the result lives on the operator's codomain.
pub fn apply(op: &Operator, s: &State) -> Result<State> {
    if op.domain() != &s.layout {
        return Err(QrfError::BasisMismatch {
            left: op.domain().basis_id().0,
            right: s.layout.basis_id().0,
        });
    }
    let amplitudes = op.apply_vec(&s.amplitudes)?;
    let normalized = is_unit(amplitudes.iter().map(|z| z.norm_sqr()).sum());
    Ok(State {
        layout: op.codomain().clone(),
        amplitudes,
        normalized,
    })
}

/// `u · op · u†`. The Hermitian flag of `op` carries over.
pub fn conjugate(u: &Operator, op: &Operator) -> Result<Operator> {
    if !u.is_unitary() {
        return Err(QrfError::NotUnitary);
    }
    if !op.is_endomorphism() {
        return Err(QrfError::BadLayout("conjugated operator must be square".into()));
    }
    if let (Some(perm), Some(diag)) = (u.as_permutation(), op.as_diagonal()) {
        if u.domain() != op.domain() {
            return Err(QrfError::BasisMismatch {
                left: u.domain().basis_id().0,
                right: op.domain().basis_id().0,
            });
        }
        let mut out = DVector::from_element(diag.len(), C64::new(0.0, 0.0));
        for (i, &p) in perm.iter().enumerate() {
            out[p] = diag[i];
        }
        return Operator::diagonal(u.codomain().clone(), out);
    }
    let result = u.compose(op)?.compose(&u.adjoint())?;
    Ok(if op.is_hermitian() && !result.is_hermitian() {
        result.mark_hermitian()
    } else {
        result
    })
}

/// Exchange the roles of two factors (either may be the frame slot) and
/// permute amplitudes into the canonical factor order.
pub fn swap_roles(s: &State, r1: Role, r2: Role) -> Result<State> {
    let (layout, perm) = s.layout.swap_roles(r1, r2)?;
    let mut amps = DVector::from_element(s.dim(), C64::new(0.0, 0.0));
    for (i, &p) in perm.iter().enumerate() {
        amps[p] = s.amplitudes[i];
    }
    Ok(State {
        layout,
        amplitudes: amps,
        normalized: s.normalized,
    })
}

/// The role-swap as a permutation operator from `layout` to the relabelled layout.
pub fn swap_operator(layout: &BasisLayout, r1: Role, r2: Role) -> Result<Operator> {
    let (target, perm) = layout.swap_roles(r1, r2)?;
    Operator::permutation(layout.clone(), target, perm)
}

/// Kronecker embedding of a single-factor operator onto `role` of `layout`.
pub fn operator_on_factor(local: &Operator, role: Role, layout: &BasisLayout) -> Result<Operator> {
    let factor = layout.factor(role)?;
    if factor.is_frame() {
        return Err(QrfError::BadLayout(format!(
            "role {role} is the frame slot and carries no amplitudes"
        )));
    }
    if local.domain().active_dims().len() != 1 || !local.is_endomorphism() {
        return Err(QrfError::BadLayout("local operator must act on one factor".into()));
    }
    if local.dim() != factor.dim() {
        return Err(QrfError::DimensionMismatch {
            expected: factor.dim(),
            actual: local.dim(),
        });
    }
    let axis = layout.axis_of(role)?;
    Ok(Operator::embedded(layout.clone(), axis, local.clone()))
}

impl Operator {
    /// Conjugation preserves Hermiticity even when the product form hides it.
    fn mark_hermitian(mut self) -> Operator {
        self.set_hermitian();
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::pauli;
    use nalgebra::DMatrix;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn single(role: Role) -> BasisLayout {
        BasisLayout::qubits(Role::A, &[role]).unwrap()
    }

    #[test]
    fn make_state_normalizes_on_request() {
        let s = make_state(single(Role::B), DVector::from_vec(vec![c(1.), c(1.)]), true).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - c(r)).norm() < 1e-15);
        assert!(s.is_normalized());
        let s = make_state(single(Role::B), DVector::from_vec(vec![c(1.), c(0.)]), false).unwrap();
        assert!(s.is_normalized());
    }

    #[test]
    fn make_state_errors() {
        let l = single(Role::B);
        assert_eq!(
            make_state(l.clone(), DVector::from_vec(vec![c(1.)]), true).unwrap_err(),
            QrfError::DimensionMismatch { expected: 2, actual: 1 }
        );
        assert_eq!(
            make_state(l, DVector::from_vec(vec![c(0.), c(0.)]), true).unwrap_err(),
            QrfError::ZeroVectorInput
        );
    }

    #[test]
    fn case_c_initial_state() {
        let (cc, ss) = (C64::from_polar(0.6, -0.2), C64::from_polar(0.8, 0.2));
        let l = BasisLayout::qubits(Role::A, &[Role::B, Role::C]).unwrap();
        let s = make_state(l, DVector::from_vec(vec![cc, c(0.), c(0.), ss]), false).unwrap();
        assert!(s.is_normalized());
    }

    #[test]
    fn tensor_product_orders_factors() {
        let (cc, ss) = (c(0.6), c(0.8));
        let b0 = make_state(single(Role::B), DVector::from_vec(vec![c(1.), c(0.)]), false).unwrap();
        let cst = make_state(single(Role::C), DVector::from_vec(vec![cc, ss]), false).unwrap();
        let t = tensor_states(&b0, &cst).unwrap();
        assert_eq!(t.amplitudes().as_slice(), &[cc, ss, c(0.), c(0.)]);
        // argument order does not matter: factors are canonical
        let t2 = tensor_states(&cst, &b0).unwrap();
        assert_eq!(t, t2);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = make_state(single(Role::B), DVector::from_vec(vec![c(r), c(r)]), false).unwrap();
        let one = make_state(single(Role::C), DVector::from_vec(vec![c(0.), c(1.)]), false).unwrap();
        let t = tensor_states(&plus, &one).unwrap();
        assert_eq!(t.amplitudes().as_slice(), &[c(0.), c(r), c(0.), c(r)]);

        assert_eq!(tensor_states(&b0, &b0).unwrap_err(), QrfError::RoleCollision(Role::B));
    }

    #[test]
    fn swap_roles_permutes_and_is_involution() {
        let l = BasisLayout::qubits(Role::A, &[Role::B, Role::C]).unwrap();
        let s01 = State::basis(l, 1).unwrap();
        let swapped = swap_roles(&s01, Role::B, Role::C).unwrap();
        assert_eq!(swapped.amplitudes()[2], c(1.));
        let back = swap_roles(&swapped, Role::B, Role::C).unwrap();
        assert_eq!(back, s01);
        assert_eq!(
            swap_roles(&s01, Role::B, Role::Generic).unwrap_err(),
            QrfError::UnknownRole(Role::Generic)
        );
    }

    #[test]
    fn frame_swap_relabels_only() {
        let l = BasisLayout::qubits(Role::A, &[Role::B, Role::C]).unwrap();
        let s = State::basis(l, 2).unwrap();
        let t = swap_roles(&s, Role::A, Role::B).unwrap();
        assert_eq!(t.layout().frame_role(), Role::B);
        assert_eq!(t.layout().active_roles(), vec![Role::A, Role::C]);
        assert_eq!(t.amplitudes(), s.amplitudes());
    }

    #[test]
    fn apply_identity_and_flip() {
        let l = single(Role::B);
        let s = make_state(l.clone(), DVector::from_vec(vec![c(0.6), c(0.8)]), false).unwrap();
        assert_eq!(apply(&Operator::identity(l.clone()), &s).unwrap(), s);
        let x = Operator::dense(l.clone(), pauli(1)).unwrap();
        let zero = State::basis(l.clone(), 0).unwrap();
        assert_eq!(apply(&x, &zero).unwrap(), State::basis(l, 1).unwrap());
        let other = Operator::identity(single(Role::C));
        assert!(apply(&other, &s).is_err());
    }

    #[test]
    fn factor_embedding() {
        let l = BasisLayout::qubits(Role::A, &[Role::B, Role::C]).unwrap();
        let z = Operator::dense(l.local(Role::B).unwrap(), pauli(3)).unwrap();
        let zb = operator_on_factor(&z, Role::B, &l).unwrap();
        let diag: Vec<f64> = zb.to_dense().unwrap().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1., 1., -1., -1.]);
        let zc = operator_on_factor(&z, Role::C, &l).unwrap();
        let diag: Vec<f64> = zc.to_dense().unwrap().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![1., -1., 1., -1.]);
        assert_eq!(
            operator_on_factor(&z, Role::A, &l).unwrap_err(),
            QrfError::BadLayout("role A is the frame slot and carries no amplitudes".into())
        );
    }

    #[test]
    fn conjugate_by_identity_and_non_unitary() {
        let l = single(Role::B);
        let b = Operator::dense(l.clone(), pauli(2)).unwrap();
        let id = Operator::identity(l.clone());
        assert_eq!(conjugate(&id, &b).unwrap().max_abs_diff(&b), Some(0.0));
        let n = Operator::dense(l, DMatrix::from_element(2, 2, c(1.))).unwrap();
        assert_eq!(conjugate(&n, &b).unwrap_err(), QrfError::NotUnitary);
    }
}
