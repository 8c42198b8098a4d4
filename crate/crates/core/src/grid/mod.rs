//! Cyclic position lattice, lattice momentum and the spatial frame change.
//!
//! Sites sit at `x_j = h (j − N/2)`; Dirac deltas become Kronecker deltas
//! and integrals become unit-weight sums. Momentum is diagonal in the
//! centered plane waves `e_m(j) = exp(i k_m x_j)/√N`,
//! `k_m = 2π (m − N/2) / (N h)`.

mod appendix;
mod cases;

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{QrfError, Result};
use crate::statekit::{operator_on_factor, BasisLayout, Factor, Operator, Role};
use crate::C64;

pub use appendix::{appendix_momentum_checks, momentum_identity_check, smooth_frame_momentum_checks};
pub use cases::{reverse_reading_check, run_grid_case, GridCase, GridScenario, Labels, Wavepacket};

/// Relative tolerance for recognizing a real number as a lattice label.
const LABEL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct GridBasis {
    n: usize,
    h: f64,
}

impl GridBasis {
    pub fn new(n: usize, h: f64) -> Result<GridBasis> {
        if n < 2 || n % 2 != 0 {
            return Err(QrfError::BadParameters(format!("grid size {n} must be even and at least 2")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(QrfError::BadParameters(format!("grid spacing {h} must be positive")));
        }
        Ok(GridBasis { n, h })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn period(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn label(&self, j: usize) -> f64 {
        self.h * (j as f64 - (self.n / 2) as f64)
    }

    pub fn labels(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.label(j)).collect()
    }

    pub fn momentum(&self, m: usize) -> f64 {
        2.0 * PI / self.period() * (m as f64 - (self.n / 2) as f64)
    }

    pub fn momenta(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.momentum(m)).collect()
    }

    /// Signed site offset `label / h` when `label` is an integer multiple of `h`.
    pub fn steps(&self, label: f64) -> Option<i64> {
        let t = label / self.h;
        let r = t.round();
        ((t - r).abs() <= LABEL_TOL * t.abs().max(1.0)).then_some(r as i64)
    }

    /// Index of an on-lattice label inside the window.
    pub fn index_of(&self, label: f64) -> Result<usize> {
        match self.unwrapped_index(label) {
            Some(j) if (0..self.n as i64).contains(&j) => Ok(j as usize),
            _ => Err(QrfError::OffGridLabel { label }),
        }
    }

    /// Index of a lattice label before reduction modulo `N`.
    pub fn unwrapped_index(&self, label: f64) -> Option<i64> {
        self.steps(label).map(|s| s + (self.n / 2) as i64)
    }

    pub fn wrap(&self, j: i64) -> usize {
        j.rem_euclid(self.n as i64) as usize
    }

    pub fn factor(&self, role: Role) -> Factor {
        Factor::active(role, self.labels())
    }

    /// Frame slot on `A`, lattice factors for `B` and `C`.
    pub fn initial_layout(&self) -> BasisLayout {
        BasisLayout::new(vec![
            Factor::frame(Role::A),
            self.factor(Role::B),
            self.factor(Role::C),
        ])
        .expect("static layout")
    }

    /// Plane wave `exp(i k_m x_j)/√N`, by direct evaluation.
    pub fn plane_wave(&self, m: usize) -> Vec<C64> {
        let norm = 1.0 / (self.n as f64).sqrt();
        let k = self.momentum(m);
        (0..self.n)
            .map(|j| C64::from_polar(norm, k * self.label(j)))
            .collect()
    }

    /// Index `m` of a lattice momentum.
    pub fn momentum_index(&self, k: f64) -> Option<usize> {
        let dk = 2.0 * PI / self.period();
        let t = k / dk + (self.n / 2) as f64;
        let r = t.round();
        ((t - r).abs() <= LABEL_TOL * t.abs().max(1.0) && r >= 0.0 && r < self.n as f64)
            .then_some(r as usize)
    }

    /// Unitary DFT coefficients `⟨e_m|ψ⟩`, by direct summation.
    pub fn momentum_amplitudes(&self, psi: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|m| {
                self.plane_wave(m)
                    .iter()
                    .zip(psi)
                    .map(|(e, p)| e.conj() * p)
                    .sum()
            })
            .collect()
    }
}

fn grid_factor_check(grid: &GridBasis, role: Role, layout: &BasisLayout) -> Result<()> {
    let f = layout.factor(role)?;
    if f.is_frame() {
        return Err(QrfError::BadLayout(format!("role {role} is the frame slot")));
    }
    let labels = grid.labels();
    if f.labels() != labels.as_slice() {
        return Err(QrfError::BadLayout(format!(
            "factor {role} does not carry the lattice labels"
        )));
    }
    Ok(())
}

/// `x̂` on `role`: the diagonal of lattice labels.
pub fn position_operator(grid: &GridBasis, role: Role, layout: &BasisLayout) -> Result<Operator> {
    grid_factor_check(grid, role, layout)?;
    let local = Operator::real_diagonal(layout.local(role)?, &grid.labels())?;
    operator_on_factor(&local, role, layout)
}

/// `p̂ = F† diag(k_m) F` on `role`.
pub fn momentum_operator(grid: &GridBasis, role: Role, layout: &BasisLayout) -> Result<Operator> {
    momentum_function(grid, role, layout, |k| C64::new(k, 0.0))
}

/// `g(p̂)` on `role` for a scalar function `g` of the lattice momentum.
pub fn momentum_function(
    grid: &GridBasis,
    role: Role,
    layout: &BasisLayout,
    g: impl Fn(f64) -> C64,
) -> Result<Operator> {
    grid_factor_check(grid, role, layout)?;
    let symbol = grid.momenta().into_iter().map(g).collect();
    let local = Operator::fourier(layout.local(role)?, symbol)?;
    operator_on_factor(&local, role, layout)
}

/// Single-factor momentum matrix `Σ_m k_m e_m e_m†` by explicit summation.
pub fn dense_momentum_matrix(grid: &GridBasis) -> DMatrix<C64> {
    let waves: Vec<Vec<C64>> = (0..grid.n()).map(|m| grid.plane_wave(m)).collect();
    DMatrix::from_fn(grid.n(), grid.n(), |r, c| {
        waves
            .iter()
            .enumerate()
            .map(|(m, e)| e[r] * e[c].conj() * grid.momentum(m))
            .sum()
    })
}

/// Role-swapping translation `|x⟩_B |y⟩_C → |−x⟩_A |y − x⟩_C`, with the
/// frame slot moving from `A` to `B`. Label arithmetic is cyclic.
pub fn build_translation_unitary(grid: &GridBasis, layout: &BasisLayout) -> Result<Operator> {
    if layout.frame_role() != Role::A || layout.active_roles() != [Role::B, Role::C] {
        return Err(QrfError::BadLayout(format!(
            "translation needs the frame slot on A with lattices on B and C, got {}",
            layout.basis_id()
        )));
    }
    grid_factor_check(grid, Role::B, layout)?;
    grid_factor_check(grid, Role::C, layout)?;
    let (target, _) = layout.swap_roles(Role::A, Role::B)?;
    let n = grid.n();
    let half = n / 2;
    let mut perm = vec![0usize; n * n];
    for j in 0..n {
        // −x_j = x_{N−j},  y_l − x_j = x_{l−j+N/2}
        let a = (n - j) % n;
        for l in 0..n {
            let c = (l + n + half - j) % n;
            perm[j * n + l] = a * n + c;
        }
    }
    Operator::permutation(layout.clone(), target, perm)
}

/// The frame-free translation `e^{iap̂}` on `role` as an exact cyclic shift;
/// it moves `⟨x̂⟩` by `−a`.
pub fn classical_translation(
    grid: &GridBasis,
    a: f64,
    role: Role,
    layout: &BasisLayout,
) -> Result<Operator> {
    grid_factor_check(grid, role, layout)?;
    let s = grid.steps(a).ok_or(QrfError::OffGridShift { shift: a })?;
    let n = grid.n() as i64;
    // (e^{iap̂} ψ)(x) = ψ(x + a): basis vector j lands on j − s
    let perm = (0..n).map(|j| (j - s).rem_euclid(n) as usize).collect();
    let local = Operator::permutation(layout.local(role)?, layout.local(role)?, perm)?;
    operator_on_factor(&local, role, layout)
}

/// Position-space wrap test for the translation. Returns the probability
/// carried by basis states whose initial or translated labels fall inside
/// `guard` sites of the window edge or leave the window.
pub fn translation_wrap_mass(grid: &GridBasis, amplitudes: &[C64], guard: usize) -> f64 {
    let n = grid.n() as i64;
    let half = n / 2;
    let g = guard as i64;
    let inside = |i: i64| i >= g && i < n - g;
    let mut mass = 0.0;
    for (idx, z) in amplitudes.iter().enumerate() {
        let p = z.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let (j, l) = ((idx as i64) / n, (idx as i64) % n);
        let a = n - j;
        let c = l - j + half;
        if !(inside(j) && inside(l) && inside(a) && inside(c)) {
            mass += p;
        }
    }
    mass
}

/// Momentum-window wrap test for one factor: probability within `guard`
/// momentum sites of the window edge.
pub fn momentum_edge_mass(grid: &GridBasis, psi: &[C64], guard: usize) -> f64 {
    let n = grid.n();
    let g = guard.max(1);
    grid.momentum_amplitudes(psi)
        .iter()
        .enumerate()
        .filter(|(m, _)| *m < g || *m >= n - g)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}
