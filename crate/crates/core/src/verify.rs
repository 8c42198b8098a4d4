//! Property suites behind `verify`.
//!
//! Each property reports the largest error seen over its draws. The
//! reference values here are computed with plain loops over matrix
//! entries rather than through the operator machinery under test.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{QrfError, Result};
use crate::grid::{
    appendix_momentum_checks, build_translation_unitary, classical_translation, momentum_function,
    momentum_identity_check, momentum_operator, position_operator, reverse_reading_check,
    run_grid_case, smooth_frame_momentum_checks, translation_wrap_mass, GridBasis, GridCase,
    GridScenario, Labels, Wavepacket,
};
use crate::ncvalue::{
    ktilde_of, linear_combine, ncvalue_of, reexpress, star, uncertainty,
};
use crate::qubit::{pushforward_table_check, run_qubit_case, two_hop_check, QubitCase, QubitScenario};
use crate::report::{Check, ScenarioReport};
use crate::statekit::{make_state, BasisLayout, Factor, Operator, Role, State};
use crate::{max_abs, max_dev, C64};

pub const SUITES: [&str; 5] = ["ncvalue-core", "qubit", "grid", "appendix", "all"];
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "NCVAL_QRF_SEED";
pub const CALCULUS_TOL: f64 = 1e-10;
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-5;
pub const DEFAULT_GRID_N: usize = 64;
pub const DEFAULT_APPENDIX_N: usize = 256;

/// Seed from the environment, falling back to [`DEFAULT_SEED`].
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyParams {
    /// Inclusive range of Hilbert-space dimensions for random draws.
    pub dims: (usize, usize),
    pub draws: usize,
    pub seed: u64,
    /// Lattice size; `None` picks 64 for `grid` and 256 for `appendix`.
    pub grid_n: Option<usize>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        VerifyParams {
            dims: (2, 16),
            draws: 200,
            seed: default_seed(),
            grid_n: None,
        }
    }
}

impl VerifyParams {
    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.dims;
        if lo < 1 || lo > hi {
            return Err(QrfError::BadParameters(format!("dimension range {lo}..{hi} is empty")));
        }
        if self.draws == 0 {
            return Err(QrfError::BadParameters("draws must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub params: VerifyParams,
    pub checks: Vec<Check>,
}

impl SuiteSummary {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per property: name, max error, tolerance, verdict.
    pub fn render_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  max_err={:.3e}  tol={:.1e}  {}\n",
                c.name,
                c.error,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" },
            ));
        }
        let failed = self.failures().len();
        out.push_str(&format!(
            "{}: {} properties, {} failed\n",
            self.suite,
            self.checks.len(),
            failed
        ));
        out
    }

    pub fn to_json(&self) -> String {
        crate::report::to_canonical_json(self)
    }
}

pub fn verify(suite: &str, params: &VerifyParams) -> Result<SuiteSummary> {
    params.validate()?;
    let checks = match suite {
        "ncvalue-core" => ncvalue_suite(params)?,
        "qubit" => qubit_suite()?,
        "grid" => grid_suite(params)?,
        "appendix" => appendix_suite(params)?,
        "all" => {
            let mut all = Vec::new();
            for s in &SUITES[..4] {
                for mut c in verify(s, params)?.checks {
                    c.name = format!("{s}/{}", c.name);
                    all.push(c);
                }
            }
            all
        }
        other => return Err(QrfError::UnknownSuite(other.to_string())),
    };
    Ok(SuiteSummary {
        suite: suite.to_string(),
        params: params.clone(),
        checks,
    })
}

// ---------------------------------------------------------------------------
// random draws

fn gaussian_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| gaussian_c(rng))
}

pub(crate) fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    let g = ginibre(rng, d);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

pub(crate) fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    ginibre(rng, d).qr().q()
}

pub(crate) fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> DVector<C64> {
    let v = DVector::from_fn(d, |_, _| gaussian_c(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

fn generic_layout(frame: Role, d: usize) -> BasisLayout {
    BasisLayout::new(vec![Factor::frame(frame), Factor::indexed(Role::Generic, d)]).expect("static layout")
}

// ---------------------------------------------------------------------------
// loop oracles

fn mat_vec(m: &DMatrix<C64>, z: &[C64]) -> Vec<C64> {
    let d = z.len();
    (0..d).map(|r| (0..d).map(|c| m[(r, c)] * z[c]).sum()).collect()
}

/// `z̄ M z / z̄ z` by explicit summation.
fn oracle_f(m: &DMatrix<C64>, z: &[C64]) -> C64 {
    let d = z.len();
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for r in 0..d {
        den += z[r].norm_sqr();
        for c in 0..d {
            num += z[r].conj() * m[(r, c)] * z[c];
        }
    }
    num / den
}

/// `V_n = Σ_m z̄_m M_mn − f z̄_n`.
fn oracle_v(m: &DMatrix<C64>, z: &[C64], f: C64) -> Vec<C64> {
    let d = z.len();
    (0..d)
        .map(|n| (0..d).map(|r| z[r].conj() * m[(r, n)]).sum::<C64>() - f * z[n].conj())
        .collect()
}

/// `∂_n ∂_m̄ f` of the normalized expectation by central differences in
/// the real and imaginary parts of the coordinates.
pub fn finite_difference_ktilde(m: &DMatrix<C64>, z: &[C64], step: f64) -> DMatrix<C64> {
    let d = z.len();
    let eval = |shifts: [(usize, C64); 2]| -> C64 {
        let mut w = z.to_vec();
        for (i, dz) in shifts {
            w[i] += dz;
        }
        oracle_f(m, &w)
    };
    let re = C64::new(step, 0.0);
    let im = C64::new(0.0, step);
    let mixed = |a: usize, da: C64, b: usize, db: C64| -> C64 {
        (eval([(a, da), (b, db)]) - eval([(a, da), (b, -db)]) - eval([(a, -da), (b, db)])
            + eval([(a, -da), (b, -db)]))
            / (4.0 * step * step)
    };
    // ∂_n ∂_m̄ = ¼ [∂x_n ∂x_m + ∂y_n ∂y_m + i(∂x_n ∂y_m − ∂y_n ∂x_m)]
    DMatrix::from_fn(d, d, |m_, n_| {
        let xx = mixed(n_, re, m_, re);
        let yy = mixed(n_, im, m_, im);
        let xy = mixed(n_, re, m_, im);
        let yx = mixed(n_, im, m_, re);
        (xx + yy + C64::new(0.0, 1.0) * (xy - yx)) * 0.25
    })
}

// ---------------------------------------------------------------------------
// ncvalue-core

struct Tracker {
    rng: ChaCha8Rng,
    lo: usize,
    hi: usize,
}

impl Tracker {
    fn new(seed: u64, salt: u64, dims: (usize, usize)) -> Self {
        Tracker {
            rng: ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            lo: dims.0,
            hi: dims.1,
        }
    }

    fn dim(&mut self) -> usize {
        self.rng.random_range(self.lo..=self.hi)
    }

    fn state(&mut self, layout: &BasisLayout) -> Result<State> {
        let z = random_unit_vector(&mut self.rng, layout.dim());
        make_state(layout.clone(), z, false)
    }
}

fn ncvalue_suite(p: &VerifyParams) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let n = p.draws;

    // star product against f and V of the product operator
    let mut t = Tracker::new(p.seed, 1, p.dims);
    let mut err: f64 = 0.0;
    for _ in 0..n {
        let d = t.dim();
        let l = generic_layout(Role::A, d);
        let (b, g) = (random_hermitian(&mut t.rng, d), random_hermitian(&mut t.rng, d));
        let s = t.state(&l)?;
        let vb = ncvalue_of(&Operator::dense(l.clone(), b.clone())?, &s)?;
        let vg = ncvalue_of(&Operator::dense(l.clone(), g.clone())?, &s)?;
        let prod = star(&vb, &vg, &s)?;
        let z = s.amplitudes().as_slice();
        let bg = &b * &g;
        let f = oracle_f(&bg, z);
        err = err.max((prod.f - f).norm()).max(max_dev(prod.v.as_slice(), &oracle_v(&bg, z, f)));
    }
    checks.push(Check::new("star_homomorphism", err, CALCULUS_TOL));

    // Σ|V|² = f_{β²} − f²
    let mut t = Tracker::new(p.seed, 2, p.dims);
    let mut err: f64 = 0.0;
    for _ in 0..n {
        let d = t.dim();
        let l = generic_layout(Role::A, d);
        let b = random_hermitian(&mut t.rng, d);
        let s = t.state(&l)?;
        let v = ncvalue_of(&Operator::dense(l, b.clone())?, &s)?;
        let z = s.amplitudes().as_slice();
        let f2 = oracle_f(&(&b * &b), z);
        err = err.max((uncertainty(&v) - (f2 - v.f * v.f).re).abs());
    }
    checks.push(Check::new("uncertainty_identity", err, CALCULUS_TOL));

    // eigenstates have V = 0, and in general |V| = |β z − f z|
    let mut t = Tracker::new(p.seed, 3, p.dims);
    let mut err: f64 = 0.0;
    for _ in 0..n {
        let d = t.dim();
        let l = generic_layout(Role::A, d);
        let b = random_hermitian(&mut t.rng, d);
        let op = Operator::dense(l.clone(), b.clone())?;
        let eig = b.clone().symmetric_eigen();
        let k = t.rng.random_range(0..d);
        let e = eig.eigenvectors.column(k).into_owned();
        let es = make_state(l.clone(), e, true)?;
        err = err.max(max_abs(ncvalue_of(&op, &es)?.v.as_slice()));
        let s = t.state(&l)?;
        let v = ncvalue_of(&op, &s)?;
        let z = s.amplitudes().as_slice();
        let resid: f64 = mat_vec(&b, z)
            .iter()
            .zip(z)
            .map(|(bz, zz)| (bz - v.f * zz).norm_sqr())
            .sum::<f64>()
            .sqrt();
        err = err.max((v.v_norm_sqr().sqrt() - resid).abs());
    }
    checks.push(Check::new("eigenstate_iff_v_zero", err, CALCULUS_TOL));

    // value re-expressed through u equals the value of uβu† at uz
    let mut t = Tracker::new(p.seed, 4, p.dims);
    let mut err: f64 = 0.0;
    for _ in 0..n {
        let d = t.dim();
        let (l, l2) = (generic_layout(Role::A, d), generic_layout(Role::B, d));
        let b = random_hermitian(&mut t.rng, d);
        let u = random_unitary(&mut t.rng, d);
        let s = t.state(&l)?;
        let uop = Operator::dense_map(l.clone(), l2.clone(), u.clone())?;
        let re = reexpress(&ncvalue_of(&Operator::dense(l, b.clone())?, &s)?, &uop)?;
        let moved = make_state(l2.clone(), &u * s.amplitudes(), false)?;
        let direct = ncvalue_of(&Operator::dense(l2, &u * &b * u.adjoint())?, &moved)?;
        err = err.max(re.max_diff(&direct).unwrap_or(f64::INFINITY));
    }
    checks.push(Check::new("basis_covariance", err, CALCULUS_TOL));

    // linearity of the component-wise combination
    let mut t = Tracker::new(p.seed, 5, p.dims);
    let mut err: f64 = 0.0;
    for _ in 0..n {
        let d = t.dim();
        let l = generic_layout(Role::A, d);
        let (b, g) = (random_hermitian(&mut t.rng, d), random_hermitian(&mut t.rng, d));
        let (x, y) = (gaussian_c(&mut t.rng), gaussian_c(&mut t.rng));
        let s = t.state(&l)?;
        let vb = ncvalue_of(&Operator::dense(l.clone(), b.clone())?, &s)?;
        let vg = ncvalue_of(&Operator::dense(l.clone(), g.clone())?, &s)?;
        let lc = linear_combine(&[x, y], &[&vb, &vg])?;
        let m = &b * x + &g * y;
        let z = s.amplitudes().as_slice();
        let f = oracle_f(&m, z);
        err = err.max((lc.f - f).norm()).max(max_dev(lc.v.as_slice(), &oracle_v(&m, z, f)));
    }
    checks.push(Check::new("linearity", err, CALCULUS_TOL));

    // r·I is classical: f = r, V = 0, and it acts as a scalar under ⋆
    let mut t = Tracker::new(p.seed, 6, p.dims);
    let mut err: f64 = 0.0;
    for _ in 0..n {
        let d = t.dim();
        let l = generic_layout(Role::A, d);
        let r: f64 = t.rng.sample(StandardNormal);
        let s = t.state(&l)?;
        let ri = ncvalue_of(&Operator::identity(l.clone()).scale(C64::new(r, 0.0)), &s)?;
        let b = ncvalue_of(&Operator::dense(l.clone(), random_hermitian(&mut t.rng, d))?, &s)?;
        let scaled = linear_combine(&[C64::new(r, 0.0)], &[&b])?;
        err = err
            .max((ri.f - r).norm())
            .max(max_abs(ri.v.as_slice()))
            .max(star(&ri, &b, &s)?.max_fv_diff(&scaled))
            .max(star(&b, &ri, &s)?.max_fv_diff(&scaled));
    }
    checks.push(Check::new("classical_constant", err, CALCULUS_TOL));

    checks.extend(ktilde_checks(p, n)?);
    Ok(checks)
}

fn ktilde_checks(p: &VerifyParams, draws: usize) -> Result<Vec<Check>> {
    let mut t = Tracker::new(p.seed, 7, p.dims);
    let mut rec: f64 = 0.0;
    let mut fd: f64 = 0.0;
    for _ in 0..draws {
        let d = t.dim();
        let l = generic_layout(Role::A, d);
        let b = random_hermitian(&mut t.rng, d);
        let s = t.state(&l)?;
        let op = Operator::dense(l, b.clone())?;
        let v = ncvalue_of(&op, &s)?;
        let k = ktilde_of(&op, &s)?;
        let m = k.reconstruct_matrix(v.f, &v.v, s.amplitudes());
        rec = rec.max((&m - &b).iter().map(|x| x.norm()).fold(0.0, f64::max));
        let oracle = finite_difference_ktilde(&b, s.amplitudes().as_slice(), FD_STEP);
        fd = fd.max((&k.k - &oracle).iter().map(|x| x.norm()).fold(0.0, f64::max));
    }
    Ok(vec![
        Check::new("ktilde_reconstruction", rec, CALCULUS_TOL),
        Check::new("ktilde_finite_difference", fd, FD_TOL),
    ])
}

// ---------------------------------------------------------------------------
// qubit

/// Merge same-named checks from several reports, keeping the worst error.
pub fn aggregate(reports: &[ScenarioReport], prefix: &str) -> Vec<Check> {
    let mut merged: BTreeMap<String, Check> = BTreeMap::new();
    let mut order = Vec::new();
    let mut add = |c: Check| {
        let key = format!("{prefix}{}", c.name);
        match merged.get_mut(&key) {
            Some(m) => {
                m.pass &= c.pass;
                if c.error > m.error || c.error.is_nan() {
                    m.error = c.error;
                }
            }
            None => {
                order.push(key.clone());
                merged.insert(key.clone(), Check { name: key, ..c });
            }
        }
    };
    for r in reports {
        for c in &r.checks {
            add(c.clone());
        }
        for k in &r.ranks {
            add(Check::exact(format!("rank.{}.{}", k.name, k.bipartition), k.rank == k.expected));
        }
    }
    order.into_iter().map(|k| merged.remove(&k).expect("present")).collect()
}

fn qubit_suite() -> Result<Vec<Check>> {
    let mut checks = pushforward_table_check()?;
    checks.extend(two_hop_check()?);
    for case in [QubitCase::APrime, QubitCase::BPrime, QubitCase::C] {
        let mut reports = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                let theta = PI * (i as f64 + 0.5) / 5.0;
                let zeta = 2.0 * PI * j as f64 / 5.0;
                let sc = QubitScenario::new(case, theta, zeta, (0.7 + zeta) % (2.0 * PI))?;
                reports.push(run_qubit_case(&sc)?);
            }
        }
        checks.extend(aggregate(&reports, &format!("case_{}.", case.id())));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// grid

/// Labels scaled to the lattice so every case clears the wrap guard.
pub fn default_grid_scenario(case: GridCase, n: usize) -> Result<GridScenario> {
    let grid = GridBasis::new(n, 1.0)?;
    let q = (n / 16).max(1) as f64;
    let width = (n as f64 / 32.0).max(0.75);
    let labels = match case {
        GridCase::A => Labels { x_o: Some(q), ..Labels::default() },
        GridCase::APrime => Labels { x_o: Some(q), y_1: Some(-q), y_2: Some(2.0 * q), ..Labels::default() },
        GridCase::B => Labels { x_1: Some(-q), x_2: Some(2.0 * q), ..Labels::default() },
        GridCase::BPrime => Labels {
            x_1: Some(-q),
            x_2: Some(2.0 * q),
            y_1: Some(q),
            y_2: Some(-2.0 * q),
            ..Labels::default()
        },
        GridCase::C => Labels { x_1: Some(-q), x_2: Some(2.0 * q), y_o: Some(q), ..Labels::default() },
        GridCase::D => Labels { y_o: Some(q), ..Labels::default() },
    };
    let packet = match case {
        GridCase::A | GridCase::B => Some(Wavepacket::Gaussian { center: q, width, momentum: 0.3 }),
        GridCase::D => {
            // five-site packet around the origin with distinct weights
            let mut s = vec![C64::new(0.0, 0.0); n];
            for (k, w) in [(-2i64, 0.4), (-1, 0.9), (0, 1.0), (1, 0.6), (2, 0.3)] {
                s[grid.wrap(k + (n / 2) as i64)] = C64::from_polar(w, 0.5 * k as f64);
            }
            Some(Wavepacket::Samples(s))
        }
        _ => None,
    };
    Ok(GridScenario {
        case,
        grid,
        wrap_guard: (n / 16).max(1),
        labels,
        packet,
        theta: 1.1,
        zeta: 0.4,
        zeta_prime: 2.3,
    })
}

/// `Û [α, β] Û† = [Ûα Û†, Ûβ Û†]` over position and momentum on both
/// factors, with conjugation by the permutation done by reindexing.
fn canonicality_check(n: usize) -> Result<Check> {
    let g = GridBasis::new(n, 1.0)?;
    let l = g.initial_layout();
    let u = build_translation_unitary(&g, &l)?;
    let perm = u.as_permutation().expect("translation is a permutation").to_vec();
    let conj = |m: &DMatrix<C64>| {
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(perm[i], perm[j])] = m[(i, j)];
            }
        }
        out
    };
    let ops = [
        position_operator(&g, Role::B, &l)?,
        position_operator(&g, Role::C, &l)?,
        momentum_operator(&g, Role::B, &l)?,
        momentum_operator(&g, Role::C, &l)?,
    ];
    let dense: Vec<DMatrix<C64>> = ops.iter().map(|o| o.to_dense()).collect::<Result<_>>()?;
    let pushed: Vec<DMatrix<C64>> = dense.iter().map(&conj).collect();
    let mut err: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            let lhs = conj(&(&dense[i] * &dense[j] - &dense[j] * &dense[i]));
            let rhs = &pushed[i] * &pushed[j] - &pushed[j] * &pushed[i];
            err = err.max((lhs - rhs).iter().map(|x| x.norm()).fold(0.0, f64::max));
        }
    }
    Ok(Check::new("canonicality.dense", err, 1e-12))
}

/// Position identities `Û x_B = −x_A Û` and `Û x_C = (x_C − x_A) Û` acting
/// on random vectors supported on the wrap-safe basis states.
fn position_identity_check(n: usize, guard: usize, draws: usize, seed: u64) -> Result<Vec<Check>> {
    let g = GridBasis::new(n, 1.0)?;
    let l = g.initial_layout();
    let u = build_translation_unitary(&g, &l)?;
    let fl = u.codomain().clone();
    let xb = position_operator(&g, Role::B, &l)?;
    let xc = position_operator(&g, Role::C, &l)?;
    let xa_f = position_operator(&g, Role::A, &fl)?;
    let xc_f = position_operator(&g, Role::C, &fl)?;
    let safe: Vec<bool> = (0..n * n)
        .map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); n * n];
            e[i] = C64::new(1.0, 0.0);
            translation_wrap_mass(&g, &e, guard) == 0.0
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut eb, mut ec) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let z: Vec<C64> = safe
            .iter()
            .map(|&ok| if ok { gaussian_c(&mut rng) } else { C64::new(0.0, 0.0) })
            .collect();
        let uz = u.apply_slice(&z);
        let lhs_b = u.apply_slice(&xb.apply_slice(&z));
        let rhs_b: Vec<C64> = xa_f.apply_slice(&uz).into_iter().map(|x| -x).collect();
        eb = eb.max(max_dev(&lhs_b, &rhs_b));
        let lhs_c = u.apply_slice(&xc.apply_slice(&z));
        let rhs_c: Vec<C64> = xc_f
            .apply_slice(&uz)
            .iter()
            .zip(xa_f.apply_slice(&uz))
            .map(|(c, a)| c - a)
            .collect();
        ec = ec.max(max_dev(&lhs_c, &rhs_c));
    }
    let uu = u.adjoint().compose(&u)?;
    let unit_err = (0..n * n)
        .map(|i| {
            let mut e = vec![C64::new(0.0, 0.0); n * n];
            e[i] = C64::new(1.0, 0.0);
            max_dev(&uu.apply_slice(&e), &e)
        })
        .fold(0.0, f64::max);
    Ok(vec![
        Check::exact("translation.is_permutation", u.as_permutation().is_some()),
        Check::new("translation.unitarity", unit_err, 1e-15),
        Check::new("position.U x_B U+ = -x_A (wrap-safe)", eb, 1e-12),
        Check::new("position.U x_C U+ = x_C - x_A (wrap-safe)", ec, 1e-12),
    ])
}

fn momentum_operator_checks(n: usize) -> Result<Vec<Check>> {
    let g = GridBasis::new(n, 1.0)?;
    let l = BasisLayout::new(vec![Factor::frame(Role::A), g.factor(Role::B)])?;
    let p = momentum_operator(&g, Role::B, &l)?.to_dense()?;
    let herm = (&p - p.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let h = g.h();
    let expo = momentum_function(&g, Role::B, &l, |k| C64::from_polar(1.0, -h * k))?.to_dense()?;
    let shift = classical_translation(&g, -h, Role::B, &l)?.to_dense()?;
    let shift_err = (&expo - &shift).iter().map(|x| x.norm()).fold(0.0, f64::max);
    let ident = classical_translation(&g, 0.0, Role::B, &l)?.to_dense()?;
    let id_err = (&ident - DMatrix::identity(n, n)).iter().map(|x| x.norm()).fold(0.0, f64::max);

    // Gaussian moved by a: ⟨x⟩ → x0 − a, fluctuation unchanged
    let x0 = 0.0;
    let a = (n / 8) as f64 * h;
    let psi = Wavepacket::Gaussian { center: x0, width: (n as f64 / 32.0).max(1.0) * h, momentum: 0.2 }.sample(&g)?;
    let s = make_state(l.clone(), DVector::from_vec(psi), false)?;
    let x = position_operator(&g, Role::B, &l)?;
    let moved = crate::statekit::apply(&classical_translation(&g, a, Role::B, &l)?, &s)?;
    let (v0, v1) = (ncvalue_of(&x, &s)?, ncvalue_of(&x, &moved)?);
    Ok(vec![
        Check::new("momentum.hermitian", herm, 1e-12),
        Check::new("momentum.exp(-ihp) = unit shift", shift_err, 1e-10),
        Check::new("classical_translation.a=0 identity", id_err, 0.0),
        Check::new("classical_translation.<x> -> x0 - a", (v1.f.re - (x0 - a)).abs(), 1e-10),
        Check::new(
            "classical_translation.uncertainty unchanged",
            (uncertainty(&v1) - uncertainty(&v0)).abs(),
            1e-10,
        ),
    ])
}

fn grid_suite(p: &VerifyParams) -> Result<Vec<Check>> {
    let n = p.grid_n.unwrap_or(DEFAULT_GRID_N);
    let mut checks = vec![canonicality_check(n.min(12))?];
    checks.extend(position_identity_check(n, (n / 16).max(1), 4, p.seed)?);
    checks.extend(momentum_operator_checks(n)?);
    for case in [GridCase::A, GridCase::APrime, GridCase::B, GridCase::BPrime, GridCase::C, GridCase::D] {
        let sc = default_grid_scenario(case, n)?;
        let r = run_grid_case(&sc)?;
        checks.extend(aggregate(&[r], &format!("case_{}.", case.id())));
    }
    let q = (n / 16).max(1) as f64;
    checks.extend(reverse_reading_check(&GridBasis::new(n, 1.0)?, -q, 2.0 * q, q, 2.3)?);
    Ok(checks)
}

/// Case (a) with a Gaussian of width `8h` on `C`, frame at `x_o = 4h`.
pub fn appendix_gaussian_scenario(n: usize) -> Result<GridScenario> {
    let mut sc = default_grid_scenario(GridCase::A, n)?;
    sc.labels.x_o = Some(4.0);
    sc.packet = Some(Wavepacket::Gaussian { center: 0.0, width: 8.0, momentum: 0.25 });
    sc.wrap_guard = 4;
    Ok(sc)
}

/// Case (a) with a lattice plane wave on `C`; the frame sits at the
/// origin so the translation stays inside the window.
pub fn appendix_plane_wave_scenario(n: usize) -> Result<GridScenario> {
    let mut sc = default_grid_scenario(GridCase::A, n)?;
    sc.labels.x_o = Some(0.0);
    sc.packet = Some(Wavepacket::PlaneWave { momentum: sc.grid.momentum(n / 2 + n / 32) });
    sc.wrap_guard = 0;
    Ok(sc)
}

fn appendix_suite(p: &VerifyParams) -> Result<Vec<Check>> {
    let n = p.grid_n.unwrap_or(DEFAULT_APPENDIX_N);
    let mut checks = Vec::new();
    for c in appendix_momentum_checks(&appendix_gaussian_scenario(n)?)? {
        checks.push(Check { name: format!("gaussian.{}", c.name), ..c });
    }
    for c in appendix_momentum_checks(&appendix_plane_wave_scenario(n)?)? {
        checks.push(Check { name: format!("plane_wave.{}", c.name), ..c });
    }
    checks.extend(smooth_frame_momentum_checks(&GridBasis::new(n, 1.0)?, 8.0, 8.0)?);
    checks.push(momentum_identity_check(&GridBasis::new(n, 1.0)?, p.draws.min(8), 4, p.seed)?);

    // a real symmetric Gaussian has zero mean momentum
    let g = GridBasis::new(n, 1.0)?;
    let l = BasisLayout::new(vec![Factor::frame(Role::A), g.factor(Role::C)])?;
    let psi = Wavepacket::Gaussian { center: 0.0, width: 8.0, momentum: 0.0 }.sample(&g)?;
    // centered on a site, the grid Gaussian is symmetric about index N/2
    let s = make_state(l.clone(), DVector::from_vec(psi), false)?;
    let f = ncvalue_of(&momentum_operator(&g, Role::C, &l)?, &s)?.f;
    checks.push(Check::new("momentum.symmetric_gaussian.f=0", f.norm(), 1e-10));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_matches_hermitian_second_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(&mut rng, 3);
        let z = random_unit_vector(&mut rng, 3);
        let l = generic_layout(Role::A, 3);
        let s = make_state(l.clone(), z.clone(), false).unwrap();
        let k = ktilde_of(&Operator::dense(l, m.clone()).unwrap(), &s).unwrap();
        let fd = finite_difference_ktilde(&m, z.as_slice(), FD_STEP);
        assert!(max_abs((&k.k - fd).as_slice()) < FD_TOL);
    }

    #[test]
    fn small_ncvalue_suite_passes() {
        let p = VerifyParams { dims: (2, 5), draws: 10, seed: 1, grid_n: None };
        let s = verify("ncvalue-core", &p).unwrap();
        assert!(s.all_pass(), "{}", s.render_text());
    }

    #[test]
    fn qubit_suite_passes() {
        let s = verify("qubit", &VerifyParams::default()).unwrap();
        assert!(s.all_pass(), "{}", s.render_text());
    }

    #[test]
    fn small_grid_suite_passes() {
        let p = VerifyParams { grid_n: Some(32), ..VerifyParams::default() };
        let s = verify("grid", &p).unwrap();
        assert!(s.all_pass(), "{}", s.render_text());
    }

    #[test]
    fn unknown_suite() {
        assert!(matches!(
            verify("nope", &VerifyParams::default()),
            Err(QrfError::UnknownSuite(_))
        ));
    }
}
