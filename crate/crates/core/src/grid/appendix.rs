//! Momentum under the spatial translation.
//!
//! Pulling the final-basis operators back through the translation gives
//! `p_C → p_C` and `p_A → −p_B − p_C`. On the lattice the second identity
//! only holds on states whose summed momentum `k_B + k_C` stays inside the
//! Brillouin window; a position-sharp frame fills the whole window and the
//! folded part of `p_A` shows up as an `O(2π/(N h))` discrepancy.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::{translate, GridScenario, Wavepacket};
use super::{
    build_translation_unitary, dense_momentum_matrix, momentum_edge_mass, momentum_operator,
    position_operator, GridBasis,
};
use crate::error::{QrfError, Result};
use crate::{max_abs, max_dev};
use crate::ncvalue::{linear_combine, ncvalue_of, reexpress, star};
use crate::report::Check;
use crate::statekit::{apply, make_state, Operator, Role, State};
use crate::C64;

const MINUS_ONE: C64 = C64::new(-1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Edge mass allowed in the momentum window.
pub const MOMENTUM_EDGE_TOL: f64 = 1e-12;
pub const P_C_TOL: f64 = 1e-9;
pub const P_A_TOL: f64 = 1e-6;
pub const SUM_RULE_TOL: f64 = 1e-9;
pub const COMMUTATOR_TOL: f64 = 1e-3;
pub const ORACLE_TOL: f64 = 1e-9;
pub const ANALYTIC_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-6;

pub const P_A_NOTE: &str = "a position eigenstate of the frame spreads over the whole momentum \
window, so -(k_B + k_C) folds back into the window and the lattice p_A differs from -p_B - p_C";

/// `V` of `op` at `s` using the explicit single-factor momentum matrix.
fn dense_v(grid: &GridBasis, s: &State, role: Role) -> Result<(C64, Vec<C64>)> {
    let p = dense_momentum_matrix(grid);
    let n = grid.n();
    let axis = s.layout().axis_of(role)?;
    let z = s.amplitudes().as_slice();
    // M z with M = P on `axis` (two active factors, row-major)
    let mut mz = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for l in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += if axis == 0 {
                    p[(j, k)] * z[k * n + l]
                } else {
                    p[(l, k)] * z[j * n + k]
                };
            }
            mz[j * n + l] = acc;
        }
    }
    let f: C64 = z.iter().zip(&mz).map(|(a, b)| a.conj() * b).sum();
    let f = C64::new(f.re, 0.0);
    // P is Hermitian, so M† z = M z
    let v = mz.iter().zip(z).map(|(m, zz)| m.conj() - f * zz.conj()).collect();
    Ok((f, v))
}

/// Momentum checks for case (a): frame at a lattice site, packet on `C`.
pub fn appendix_momentum_checks(sc: &GridScenario) -> Result<Vec<Check>> {
    let g = &sc.grid;
    let psi = sc.psi()?;
    let mut checks = Vec::new();
    let edge = momentum_edge_mass(g, &psi, sc.wrap_guard);
    if edge > MOMENTUM_EDGE_TOL {
        return Err(QrfError::WrapAround {
            stage: "momentum".into(),
            mass: edge,
        });
    }
    checks.push(Check::new("momentum.edge_mass", edge, MOMENTUM_EDGE_TOL));

    let t = translate(sc, true)?;
    let back = t.u.adjoint();
    let (il, fl) = (t.initial.layout().clone(), t.fin.layout().clone());
    let pb = ncvalue_of(&momentum_operator(g, Role::B, &il)?, &t.initial)?;
    let pc_i = ncvalue_of(&momentum_operator(g, Role::C, &il)?, &t.initial)?;
    let pa = ncvalue_of(&momentum_operator(g, Role::A, &fl)?, &t.fin)?;
    let pc_f = ncvalue_of(&momentum_operator(g, Role::C, &fl)?, &t.fin)?;

    checks.push(Check::new(
        "momentum.p_C.final=p_C.initial",
        reexpress(&pc_f, &back)?.max_diff_on(&pc_i, &t.initial),
        P_C_TOL,
    ));
    let minus_sum = linear_combine(&[MINUS_ONE, MINUS_ONE], &[&pb, &pc_i])?;
    checks.push(
        Check::new(
            "momentum.p_A.final=-p_B-p_C.initial",
            reexpress(&pa, &back)?.max_diff_on(&minus_sum, &t.initial),
            P_A_TOL,
        )
        .with_note(P_A_NOTE),
    );
    checks.push(
        Check::new(
            "momentum.sum_rule.f",
            (pa.f + pb.f + pc_i.f).norm(),
            SUM_RULE_TOL,
        )
        .with_note(P_A_NOTE),
    );

    // ⟨[x, p]⟩ ≈ i needs a packet localized away from the cyclic seam
    if !matches!(sc.packet, Some(Wavepacket::PlaneWave { .. })) {
        checks.extend(commutator_checks(g, &t.initial)?);
    }

    let (fb, vb) = dense_v(g, &t.initial, Role::B)?;
    checks.push(Check::new(
        "momentum.V(p_B).dense_oracle",
        max_dev(pb.v.as_slice(), &vb).max((fb - pb.f).norm()),
        ORACLE_TOL,
    ));
    let (fc, vc) = dense_v(g, &t.initial, Role::C)?;
    checks.push(Check::new(
        "momentum.V(p_C).dense_oracle",
        max_dev(pc_i.v.as_slice(), &vc).max((fc - pc_i.f).norm()),
        ORACLE_TOL,
    ));

    let xo = g.index_of(sc.labels.x_o.unwrap_or(0.0))?;
    let n = g.n();
    match sc.packet {
        Some(Wavepacket::Gaussian { center, width, momentum }) => {
            // V_{p_C} = −i (y − y0)/(2σ²) ψ̄(y) on the frame row
            let mut expect = vec![C64::new(0.0, 0.0); n * n];
            for (l, p) in psi.iter().enumerate() {
                expect[xo * n + l] = -I * ((g.label(l) - center) / (2.0 * width * width)) * p.conj();
            }
            checks.push(Check::new(
                "momentum.V(p_C).gaussian_analytic",
                max_dev(pc_i.v.as_slice(), &expect),
                ANALYTIC_TOL,
            ));
            checks.push(Check::new(
                "momentum.f(p_C).gaussian=momentum",
                (pc_i.f - C64::new(momentum, 0.0)).norm(),
                ANALYTIC_TOL,
            ));
        }
        Some(Wavepacket::PlaneWave { momentum }) => {
            checks.push(Check::new("momentum.plane_wave.V(p_C).initial=0", max_abs(pc_i.v.as_slice()), ORACLE_TOL));
            checks.push(Check::exact(
                "momentum.plane_wave.V(p_A).final!=0",
                max_abs(pa.v.as_slice()) > 1e-6,
            ));
            checks.push(Check::new(
                "momentum.plane_wave.f(p_C)=p_o",
                (pc_i.f - C64::new(momentum, 0.0)).norm(),
                ORACLE_TOL,
            ));
        }
        _ => {}
    }
    Ok(checks)
}

/// `⟨[x_C, p_C]⟩ ≈ i` through the star product.
fn commutator_checks(g: &GridBasis, s: &State) -> Result<Vec<Check>> {
    let l = s.layout();
    let x = ncvalue_of(&position_operator(g, Role::C, l)?, s)?;
    let p = ncvalue_of(&momentum_operator(g, Role::C, l)?, s)?;
    let xp = star(&x, &p, s)?;
    let px = star(&p, &x, s)?;
    let comm = ncvalue_of(&x.m.commutator(&p.m)?, s)?;
    let closure: Vec<C64> = xp.v.iter().zip(px.v.iter()).map(|(a, b)| a - b).collect();
    Ok(vec![
        Check::new("momentum.commutator.f", (xp.f - px.f - I).norm(), COMMUTATOR_TOL),
        Check::new(
            "momentum.commutator.V_closure",
            max_dev(&closure, comm.v.as_slice()).max((xp.f - px.f - comm.f).norm()),
            ORACLE_TOL,
        ),
        Check::new("momentum.commutator.V_small", comm.v_norm_sqr().sqrt(), COMMUTATOR_TOL),
    ])
}

/// Product of Gaussians on `B` and `C`: with a smooth frame the `p_A`
/// identity and the sum rule hold on the lattice.
pub fn smooth_frame_momentum_checks(grid: &GridBasis, width_b: f64, width_c: f64) -> Result<Vec<Check>> {
    let b = Wavepacket::Gaussian { center: 0.0, width: width_b, momentum: 0.0 }.sample(grid)?;
    let c = Wavepacket::Gaussian { center: 0.0, width: width_c, momentum: 0.0 }.sample(grid)?;
    let n = grid.n();
    let layout = grid.initial_layout();
    let amps = DVector::from_fn(n * n, |i, _| b[i / n] * c[i % n]);
    let initial = make_state(layout.clone(), amps, false)?;
    let u = build_translation_unitary(grid, &layout)?;
    let fin = apply(&u, &initial)?;
    let back = u.adjoint();
    let fl = fin.layout().clone();

    let pb = ncvalue_of(&momentum_operator(grid, Role::B, &layout)?, &initial)?;
    let pc = ncvalue_of(&momentum_operator(grid, Role::C, &layout)?, &initial)?;
    let pa = ncvalue_of(&momentum_operator(grid, Role::A, &fl)?, &fin)?;
    let minus_sum = linear_combine(&[MINUS_ONE, MINUS_ONE], &[&pb, &pc])?;
    Ok(vec![
        Check::new(
            "momentum.smooth_frame.p_A.final=-p_B-p_C.initial",
            reexpress(&pa, &back)?.max_diff_on(&minus_sum, &initial),
            P_A_TOL,
        ),
        Check::new(
            "momentum.smooth_frame.sum_rule.f",
            (pa.f + pb.f + pc.f).norm(),
            SUM_RULE_TOL,
        ),
    ])
}

/// Operator identity `U† p_A U = −p_B − p_C` on random superpositions of
/// plane-wave pairs whose summed momentum does not fold.
pub fn momentum_identity_check(grid: &GridBasis, draws: usize, terms: usize, seed: u64) -> Result<Check> {
    let n = grid.n();
    let half = (n / 2) as i64;
    let layout = grid.initial_layout();
    let u = build_translation_unitary(grid, &layout)?;
    let pa = momentum_operator(grid, Role::A, u.codomain())?;
    let pulled = u.adjoint().compose(&pa)?.compose(&u)?;
    let pb = momentum_operator(grid, Role::B, &layout)?;
    let pc = momentum_operator(grid, Role::C, &layout)?;
    let minus_sum = Operator::linear_combination(&[(MINUS_ONE, &pb), (MINUS_ONE, &pc)])?;

    let waves: Vec<Vec<C64>> = (0..n).map(|m| grid.plane_wave(m)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let mut z = vec![C64::new(0.0, 0.0); n * n];
        let mut placed = 0;
        while placed < terms {
            let (mb, mc) = (rng.random_range(0..n), rng.random_range(0..n));
            // summed momentum index stays away from the fold at −N/2
            let total = (mb as i64 - half) + (mc as i64 - half);
            if total <= -half || total >= half {
                continue;
            }
            let w = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for j in 0..n {
                for l in 0..n {
                    z[j * n + l] += w * waves[mb][j] * waves[mc][l];
                }
            }
            placed += 1;
        }
        let lhs = pulled.apply_slice(&z);
        let rhs = minus_sum.apply_slice(&z);
        let scale = z.iter().map(|a| a.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        worst = worst.max(max_dev(&lhs, &rhs) / scale);
    }
    Ok(Check::new("momentum.operator_identity.alias_free", worst, IDENTITY_TOL))
}
