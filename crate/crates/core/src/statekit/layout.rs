use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{QrfError, Result};

/// Subsystem role of a tensor factor. The derived ordering is the canonical
/// factor order of every layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
    C,
    Generic,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::A => "A",
            Role::B => "B",
            Role::C => "C",
            Role::Generic => "G",
        };
        f.write_str(s)
    }
}

/// One tensor factor. A factor without labels is the frame slot: the
/// subsystem currently serving as the reference frame, which carries no
/// amplitudes at all.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub role: Role,
    labels: Option<Vec<f64>>,
}

impl Factor {
    pub fn frame(role: Role) -> Self {
        Factor { role, labels: None }
    }

    pub fn active(role: Role, labels: Vec<f64>) -> Self {
        Factor {
            role,
            labels: Some(labels),
        }
    }

    /// Qubit factor labelled by the computational basis index.
    pub fn qubit(role: Role) -> Self {
        Factor::active(role, vec![0.0, 1.0])
    }

    /// Factor of dimension `dim` labelled `0..dim`.
    pub fn indexed(role: Role, dim: usize) -> Self {
        Factor::active(role, (0..dim).map(|i| i as f64).collect())
    }

    pub fn is_frame(&self) -> bool {
        self.labels.is_none()
    }

    /// Zero for the frame slot.
    pub fn dim(&self) -> usize {
        self.labels.as_ref().map_or(0, Vec::len)
    }

    pub fn labels(&self) -> &[f64] {
        self.labels.as_deref().unwrap_or(&[])
    }
}

/// Identifier of the orthonormal product basis a set of components is
/// expressed in, e.g. `A:frame|B:2|C:2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisId(pub String);

impl fmt::Display for BasisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered tensor-product layout. Exactly one factor is the frame slot,
/// roles are distinct and factors are kept in canonical role order.
/// Amplitudes are row-major over the active factors.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisLayout {
    factors: Vec<Factor>,
}

impl BasisLayout {
    pub fn new(mut factors: Vec<Factor>) -> Result<Self> {
        let frames = factors.iter().filter(|f| f.is_frame()).count();
        if frames != 1 {
            return Err(QrfError::BadLayout(format!(
                "expected exactly one frame slot, found {frames}"
            )));
        }
        if factors.iter().any(|f| !f.is_frame() && f.dim() == 0) {
            return Err(QrfError::BadLayout("active factor with no labels".into()));
        }
        factors.sort_by_key(|f| f.role);
        for pair in factors.windows(2) {
            if pair[0].role == pair[1].role {
                return Err(QrfError::RoleCollision(pair[0].role));
            }
        }
        Ok(BasisLayout { factors })
    }

    /// Frame slot `frame` plus qubits for every role in `active`.
    pub fn qubits(frame: Role, active: &[Role]) -> Result<Self> {
        let mut factors = vec![Factor::frame(frame)];
        factors.extend(active.iter().map(|&r| Factor::qubit(r)));
        BasisLayout::new(factors)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn frame_role(&self) -> Role {
        self.factors
            .iter()
            .find(|f| f.is_frame())
            .map(|f| f.role)
            .expect("layout invariant: one frame slot")
    }

    pub fn active_factors(&self) -> impl Iterator<Item = &Factor> {
        self.factors.iter().filter(|f| !f.is_frame())
    }

    pub fn active_roles(&self) -> Vec<Role> {
        self.active_factors().map(|f| f.role).collect()
    }

    pub fn active_dims(&self) -> Vec<usize> {
        self.active_factors().map(Factor::dim).collect()
    }

    /// Total state dimension: product of the active factor dimensions.
    pub fn dim(&self) -> usize {
        self.active_factors().map(Factor::dim).product()
    }

    /// Position of `role` among the active factors.
    pub fn axis_of(&self, role: Role) -> Result<usize> {
        self.active_factors()
            .position(|f| f.role == role)
            .ok_or(QrfError::UnknownRole(role))
    }

    pub fn factor(&self, role: Role) -> Result<&Factor> {
        self.factors
            .iter()
            .find(|f| f.role == role)
            .ok_or(QrfError::UnknownRole(role))
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.factors.iter().any(|f| f.role == role)
    }

    pub fn basis_id(&self) -> BasisId {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| {
                if f.is_frame() {
                    format!("{}:frame", f.role)
                } else {
                    format!("{}:{}", f.role, f.dim())
                }
            })
            .collect();
        BasisId(parts.join("|"))
    }

    /// Single-factor layout holding only `role` (plus a frame slot), used
    /// for local operators.
    pub fn local(&self, role: Role) -> Result<BasisLayout> {
        let factor = self.factor(role)?;
        if factor.is_frame() {
            return Err(QrfError::BadLayout(format!("role {role} is the frame slot")));
        }
        BasisLayout::new(vec![Factor::frame(self.frame_role()), factor.clone()])
    }

    /// Exchange the roles carried by two factors and restore canonical order.
    ///
    /// Returns the new layout together with the amplitude permutation
    /// `perm`, where amplitude index `i` of the old layout moves to
    /// `perm[i]`.
    pub fn swap_roles(&self, r1: Role, r2: Role) -> Result<(BasisLayout, Vec<usize>)> {
        if !self.has_role(r1) {
            return Err(QrfError::UnknownRole(r1));
        }
        if !self.has_role(r2) {
            return Err(QrfError::UnknownRole(r2));
        }
        let old_active = self.active_roles();
        let relabel = |r: Role| {
            if r == r1 {
                r2
            } else if r == r2 {
                r1
            } else {
                r
            }
        };
        let factors: Vec<Factor> = self
            .factors
            .iter()
            .map(|f| Factor {
                role: relabel(f.role),
                labels: f.labels.clone(),
            })
            .collect();
        let layout = BasisLayout::new(factors)?;
        let new_active = layout.active_roles();
        // order[k] = old axis that becomes new axis k
        let order: Vec<usize> = new_active
            .iter()
            .map(|&r| {
                let old = relabel(r);
                old_active.iter().position(|&o| o == old).unwrap()
            })
            .collect();
        let perm = axis_permutation(&self.active_dims(), &order);
        Ok((layout, perm))
    }
}

/// Row-major index permutation for reordering tensor axes: new axis `k` is
/// old axis `order[k]`. Entry `i` is the new flat index of old flat index `i`.
pub(crate) fn axis_permutation(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let mut new_strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        new_strides[k] = new_strides[k + 1] * new_dims[k + 1];
    }
    // stride in the new layout of each old axis
    let mut stride_of_old = vec![0usize; dims.len()];
    for (k, &o) in order.iter().enumerate() {
        stride_of_old[o] = new_strides[k];
    }
    let mut perm = Vec::with_capacity(total);
    let mut multi = vec![0usize; dims.len()];
    for _ in 0..total {
        perm.push(
            multi
                .iter()
                .zip(&stride_of_old)
                .map(|(m, s)| m * s)
                .sum(),
        );
        for axis in (0..dims.len()).rev() {
            multi[axis] += 1;
            if multi[axis] < dims[axis] {
                break;
            }
            multi[axis] = 0;
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_missing_or_duplicate_frame() {
        let err = BasisLayout::new(vec![Factor::qubit(Role::B)]).unwrap_err();
        assert!(matches!(err, QrfError::BadLayout(_)));
        let err =
            BasisLayout::new(vec![Factor::frame(Role::A), Factor::frame(Role::B)]).unwrap_err();
        assert!(matches!(err, QrfError::BadLayout(_)));
    }

    #[test]
    fn rejects_duplicate_roles() {
        let err = BasisLayout::new(vec![
            Factor::frame(Role::A),
            Factor::qubit(Role::B),
            Factor::qubit(Role::B),
        ])
        .unwrap_err();
        assert_eq!(err, QrfError::RoleCollision(Role::B));
    }

    #[test]
    fn canonical_order_and_dimension() {
        let l = BasisLayout::new(vec![
            Factor::indexed(Role::C, 3),
            Factor::frame(Role::A),
            Factor::qubit(Role::B),
        ])
        .unwrap();
        assert_eq!(l.active_roles(), vec![Role::B, Role::C]);
        assert_eq!(l.dim(), 6);
        assert_eq!(l.basis_id().0, "A:frame|B:2|C:3");
    }

    #[test]
    fn frame_swap_keeps_amplitude_order() {
        let l = BasisLayout::qubits(Role::A, &[Role::B, Role::C]).unwrap();
        let (m, perm) = l.swap_roles(Role::A, Role::B).unwrap();
        assert_eq!(m.frame_role(), Role::B);
        assert_eq!(m.active_roles(), vec![Role::A, Role::C]);
        assert_eq!(perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn active_swap_transposes() {
        let l = BasisLayout::new(vec![
            Factor::frame(Role::A),
            Factor::indexed(Role::B, 2),
            Factor::indexed(Role::C, 3),
        ])
        .unwrap();
        let (m, perm) = l.swap_roles(Role::B, Role::C).unwrap();
        assert_eq!(m.active_dims(), vec![3, 2]);
        // old (b, c) at 3b + c moves to new (c, b) at 2c + b
        for b in 0..2 {
            for c in 0..3 {
                assert_eq!(perm[3 * b + c], 2 * c + b);
            }
        }
    }
}
