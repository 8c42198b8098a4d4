//! Two-qubit analog of the spatial frame change.
//!
//! Qubit `B` is the new frame, qubit `C` is the observed system and `A` is
//! the old frame. The unitary maps
//!
//! ```text
//! |0⟩_A|00⟩ → |0⟩_B (|10⟩ + |11⟩)/√2     |0⟩_A|01⟩ → |0⟩_B (|10⟩ − |11⟩)/√2
//! |0⟩_A|10⟩ → |0⟩_B (|01⟩ − |00⟩)/√2     |0⟩_A|11⟩ → |0⟩_B (|00⟩ + |01⟩)/√2
//! ```
//!
//! with the primed pair ordered as `A, C` and the frame slot moved onto `B`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::error::{QrfError, Result};
use crate::max_dev;
use crate::ncvalue::{factor_rank, ncvalue_of, reexpress, star, NcValue, FACTOR_TOL};
use crate::report::{
    Check, Discrepancy, NcRecord, RankRecord, ScenarioReport, StateSummary, LITERATURE_DISCREPANCY,
};
use crate::statekit::{apply, conjugate, make_state, BasisLayout, Operator, Role, State};
use crate::C64;

/// Tolerance for identities that are exact up to round-off.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for value comparisons routed through products and re-expression.
pub const VALUE_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Pauli matrix `σ_k`, with `σ_0 = I`.
pub fn pauli(k: usize) -> DMatrix<C64> {
    let i = C64::new(0.0, 1.0);
    let entries = match k {
        0 => [ONE, ZERO, ZERO, ONE],
        1 => [ZERO, ONE, ONE, ZERO],
        2 => [ZERO, -i, i, ZERO],
        3 => [ONE, ZERO, ZERO, -ONE],
        _ => panic!("no Pauli matrix with index {k}"),
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// `coeff · Π σ_k(role)` on a qubit layout; roles not named get `I`.
pub fn pauli_string(layout: &BasisLayout, coeff: f64, factors: &[(Role, usize)]) -> Result<Operator> {
    for (role, k) in factors {
        let f = layout.factor(*role)?;
        if f.is_frame() {
            return Err(QrfError::BadLayout(format!("role {role} is the frame slot")));
        }
        if f.dim() != 2 || *k > 3 {
            return Err(QrfError::BadLayout(format!("σ_{k} needs a qubit on {role}")));
        }
    }
    let mut m = DMatrix::from_element(1, 1, C64::new(coeff, 0.0));
    for f in layout.active_factors() {
        let k = factors
            .iter()
            .filter(|(r, _)| *r == f.role)
            .fold(pauli(0), |acc, (_, k)| acc * pauli(*k));
        m = m.kronecker(&k);
    }
    Operator::dense(layout.clone(), m)
}

/// `|0⟩_A ⊗ {|00⟩,|01⟩,|10⟩,|11⟩}_BC` initial layout.
pub fn initial_layout() -> BasisLayout {
    BasisLayout::qubits(Role::A, &[Role::B, Role::C]).expect("static layout")
}

/// Split a qubit layout into (frame role, role that becomes the frame).
fn frame_pair(layout: &BasisLayout) -> Result<(Role, Role)> {
    let frame = layout.frame_role();
    let active = layout.active_roles();
    let ok_dims = layout.active_dims() == [2, 2];
    let other = active.first().copied();
    match other {
        Some(o)
            if ok_dims
                && active.len() == 2
                && active[1] == Role::C
                && matches!((frame, o), (Role::A, Role::B) | (Role::B, Role::A)) =>
        {
            Ok((frame, o))
        }
        _ => Err(QrfError::BadLayout(format!(
            "qubit frame change needs frame slot A or B with the other and C as qubits, got {}",
            layout.basis_id()
        ))),
    }
}

/// The frame-change unitary. With the frame slot on `A` and qubits `B, C`,
/// the result maps onto the layout with `A, C` active and the frame slot on
/// `B`; with roles of `A` and `B` exchanged it performs the reverse hop.
pub fn build_qubit_qrf_unitary(layout: &BasisLayout) -> Result<Operator> {
    let (frame, other) = frame_pair(layout)?;
    let (target, _) = layout.swap_roles(frame, other)?;
    let r = FRAC_1_SQRT_2;
    #[rustfmt::skip]
    let cols = [
        [0.0, 0.0, r, r],
        [0.0, 0.0, r, -r],
        [-r, r, 0.0, 0.0],
        [r, r, 0.0, 0.0],
    ];
    let m = DMatrix::from_fn(4, 4, |row, col| C64::new(cols[col][row], 0.0));
    Operator::dense_map(layout.clone(), target, m)
}

/// Primed coordinates of the frame change written out componentwise.
pub fn coordinate_transform(z: &[C64; 4]) -> [C64; 4] {
    let r = FRAC_1_SQRT_2;
    let [z00, z01, z10, z11] = *z;
    [
        (z11 - z10) * r,
        (z11 + z10) * r,
        (z00 + z01) * r,
        (z00 - z01) * r,
    ]
}

/// Written-out re-expression of a final-basis covector in the initial
/// basis, `V_nñ` from `V'_n'ñ'`.
pub fn reexpression_rule(vp: &[C64]) -> [C64; 4] {
    let r = FRAC_1_SQRT_2;
    [
        (vp[2] + vp[3]) * r,
        (vp[2] - vp[3]) * r,
        (vp[1] - vp[0]) * r,
        (vp[1] + vp[0]) * r,
    ]
}

/// Symbolic slot in the pushforward table: the qubit that turns into the
/// frame (`Old`), the old frame that becomes observable (`New`), or `C`.
#[derive(Clone, Copy)]
enum Slot {
    Old,
    New,
    C,
}

/// `σ_k(source) → coeff · Π σ(target)`.
const PUSHFORWARD: [(Slot, usize, f64, &[(Slot, usize)]); 6] = [
    (Slot::Old, 1, 1.0, &[(Slot::New, 2), (Slot::C, 2)]),
    (Slot::Old, 2, 1.0, &[(Slot::New, 1), (Slot::C, 2)]),
    (Slot::Old, 3, -1.0, &[(Slot::New, 3)]),
    (Slot::C, 1, -1.0, &[(Slot::New, 3), (Slot::C, 3)]),
    (Slot::C, 2, -1.0, &[(Slot::C, 2)]),
    (Slot::C, 3, -1.0, &[(Slot::New, 3), (Slot::C, 1)]),
];

fn slot_role(slot: Slot, frame: Role, other: Role) -> Role {
    match slot {
        Slot::Old => other,
        Slot::New => frame,
        Slot::C => Role::C,
    }
}

fn label(role: Role, k: usize) -> String {
    format!("sigma{k}_{role}")
}

/// One pushforward relation instantiated on `layout`: source operator on
/// the domain, printed image on the codomain.
pub struct Pushforward {
    pub name: String,
    pub source: Operator,
    pub image: Operator,
}

pub fn pushforward_table(layout: &BasisLayout) -> Result<Vec<Pushforward>> {
    let (frame, other) = frame_pair(layout)?;
    let (target, _) = layout.swap_roles(frame, other)?;
    PUSHFORWARD
        .iter()
        .map(|(src, k, coeff, img)| {
            let src_role = slot_role(*src, frame, other);
            let factors: Vec<(Role, usize)> = img
                .iter()
                .map(|(s, j)| (slot_role(*s, frame, other), *j))
                .collect();
            let rhs: Vec<String> = factors.iter().map(|(r, j)| label(*r, *j)).collect();
            let sign = if *coeff < 0.0 { "-" } else { "" };
            Ok(Pushforward {
                name: format!("{} -> {sign}{}", label(src_role, *k), rhs.join("*")),
                source: pauli_string(layout, 1.0, &[(src_role, *k)])?,
                image: pauli_string(&target, *coeff, &factors)?,
            })
        })
        .collect()
}

/// `‖U σ U† − image‖_max` for each of the six relations, plus the
/// commutators among all images.
pub fn pushforward_table_check() -> Result<Vec<Check>> {
    let layout = initial_layout();
    let u = build_qubit_qrf_unitary(&layout)?;
    let table = pushforward_table(&layout)?;
    let mut checks = Vec::new();
    for p in &table {
        let pushed = conjugate(&u, &p.source)?;
        let err = pushed.max_abs_diff(&p.image).unwrap_or(f64::INFINITY);
        checks.push(Check::new(format!("pushforward.{}", p.name), err, EXACT_TOL));
    }
    let mut worst: f64 = 0.0;
    for a in &table {
        for b in &table {
            let lhs = conjugate(&u, &a.source.commutator(&b.source)?)?;
            let rhs = a.image.commutator(&b.image)?;
            worst = worst.max(lhs.max_abs_diff(&rhs).unwrap_or(f64::INFINITY));
        }
    }
    checks.push(Check::new("pushforward.commutators", worst, EXACT_TOL));
    Ok(checks)
}

/// Two successive hops `A → B → A`: conjugation by the composite unitary
/// agrees with substituting the table into itself.
pub fn two_hop_check() -> Result<Vec<Check>> {
    let l0 = initial_layout();
    let u1 = build_qubit_qrf_unitary(&l0)?;
    let u2 = build_qubit_qrf_unitary(u1.codomain())?;
    let w = u2.compose(&u1)?;
    let first = pushforward_table(&l0)?;
    let second = pushforward_table(u1.codomain())?;
    let mut checks = Vec::new();
    let mut back: f64 = 0.0;
    for p in &first {
        // expand the image factor by factor through the second table
        let mut expanded = Operator::identity(w.codomain().clone());
        let sign = image_sign(&p.image)?;
        for (role, k) in pauli_factors(&p.image)? {
            let entry = second
                .iter()
                .find(|q| q.name.starts_with(&format!("{} ->", label(role, k))))
                .ok_or_else(|| QrfError::BadLayout(format!("no entry for {}", label(role, k))))?;
            expanded = expanded.compose(&entry.image)?;
        }
        let expanded = expanded.scale(C64::new(sign, 0.0));
        let direct = conjugate(&w, &p.source)?;
        let err = direct.max_abs_diff(&expanded).unwrap_or(f64::INFINITY);
        checks.push(Check::new(format!("two_hop.{}", p.name), err, VALUE_TOL));
        // hopping back with the adjoint restores the source exactly
        let restored = conjugate(&u1.adjoint(), &conjugate(&u1, &p.source)?)?;
        back = back.max(restored.max_abs_diff(&p.source).unwrap_or(f64::INFINITY));
    }
    checks.push(Check::new("two_hop.round_trip", back, VALUE_TOL));
    Ok(checks)
}

/// Decompose a dense Pauli-string operator on a two-qubit layout by trace
/// projection: returns the nontrivial `(role, k)` factors.
fn pauli_factors(op: &Operator) -> Result<Vec<(Role, usize)>> {
    let (roles, (i, j)) = dominant_string(op)?;
    let mut out = Vec::new();
    if i != 0 {
        out.push((roles[0], i));
    }
    if j != 0 {
        out.push((roles[1], j));
    }
    Ok(out)
}

fn image_sign(op: &Operator) -> Result<f64> {
    let m = op.to_dense()?;
    let (_, (i, j)) = dominant_string(op)?;
    let p = pauli(i).kronecker(&pauli(j));
    Ok((p.adjoint() * m).trace().re.signum())
}

fn dominant_string(op: &Operator) -> Result<(Vec<Role>, (usize, usize))> {
    let m = op.to_dense()?;
    let roles = op.codomain().active_roles();
    let mut best = (0.0, (0, 0));
    for i in 0..4 {
        for j in 0..4 {
            let p = pauli(i).kronecker(&pauli(j));
            let w = (p.adjoint() * &m).trace().norm() / 4.0;
            if w > best.0 {
                best = (w, (i, j));
            }
        }
    }
    Ok((roles, best.1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitCase {
    APrime,
    BPrime,
    C,
}

impl QubitCase {
    pub fn id(self) -> &'static str {
        match self {
            QubitCase::APrime => "a_prime",
            QubitCase::BPrime => "b_prime",
            QubitCase::C => "c",
        }
    }

    pub fn parse(s: &str) -> Option<QubitCase> {
        match s {
            "a_prime" | "a'" | "a′" => Some(QubitCase::APrime),
            "b_prime" | "b'" | "b′" => Some(QubitCase::BPrime),
            "c" => Some(QubitCase::C),
            _ => None,
        }
    }
}

impl fmt::Display for QubitCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Case label plus the angles fixing `c = cos(θ/2) e^{−iζ/2}`,
/// `s = sin(θ/2) e^{iζ/2}` and the relative phase `ζ′`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitScenario {
    pub case: QubitCase,
    pub theta: f64,
    pub zeta: f64,
    pub zeta_prime: f64,
}

impl QubitScenario {
    pub fn new(case: QubitCase, theta: f64, zeta: f64, zeta_prime: f64) -> Result<Self> {
        let in_range = |v: f64, hi: f64| v.is_finite() && (0.0..hi).contains(&v);
        if !in_range(theta, PI) {
            return Err(QrfError::BadParameters(format!("theta = {theta} outside [0, π)")));
        }
        if !in_range(zeta, 2.0 * PI) {
            return Err(QrfError::BadParameters(format!("zeta = {zeta} outside [0, 2π)")));
        }
        if !in_range(zeta_prime, 2.0 * PI) {
            return Err(QrfError::BadParameters(format!(
                "zeta_prime = {zeta_prime} outside [0, 2π)"
            )));
        }
        Ok(QubitScenario {
            case,
            theta,
            zeta,
            zeta_prime,
        })
    }

    pub fn c(&self) -> C64 {
        C64::from_polar((self.theta / 2.0).cos(), -self.zeta / 2.0)
    }

    pub fn s(&self) -> C64 {
        C64::from_polar((self.theta / 2.0).sin(), self.zeta / 2.0)
    }

    pub fn initial_amplitudes(&self) -> [C64; 4] {
        let (c, s) = (self.c(), self.s());
        let e = C64::from_polar(FRAC_1_SQRT_2, self.zeta_prime);
        let r = FRAC_1_SQRT_2;
        match self.case {
            QubitCase::APrime => [c, s, ZERO, ZERO],
            QubitCase::BPrime => [c * r, s * r, e * c, e * s],
            QubitCase::C => [c, ZERO, ZERO, s],
        }
    }

    /// Final amplitudes in the printed superposition form.
    pub fn printed_final_amplitudes(&self) -> [C64; 4] {
        let (c, s) = (self.c(), self.s());
        let r = FRAC_1_SQRT_2;
        let e = C64::from_polar(1.0, self.zeta_prime);
        match self.case {
            QubitCase::APrime => [ZERO, ZERO, (c + s) * r, (c - s) * r],
            QubitCase::BPrime => [
                -e * (c - s) / 2.0,
                e * (c + s) / 2.0,
                (c + s) / 2.0,
                (c - s) / 2.0,
            ],
            QubitCase::C => [s * r, s * r, c * r, c * r],
        }
    }

    /// Rank of the initial and final amplitude matrices from their closed-form
    /// singular values.
    fn expected_ranks(&self) -> (usize, usize) {
        let (c, s) = (self.c(), self.s());
        let rank2 = |smin: f64, smax: f64| if smin > FACTOR_TOL * smax { 2 } else { 1 };
        match self.case {
            QubitCase::APrime => (1, 1),
            QubitCase::BPrime => {
                // σ1² + σ2² = 1 and σ1 σ2 = |det| = |c² + s²| / 2
                let d = (c * c + s * s).norm() / 2.0;
                let disc = (1.0 - 4.0 * d * d).max(0.0).sqrt();
                let lo = ((1.0 - disc) / 2.0).max(0.0).sqrt();
                let hi = ((1.0 + disc) / 2.0).sqrt();
                (1, rank2(lo, hi))
            }
            QubitCase::C => {
                let (a, b) = (c.norm(), s.norm());
                (rank2(a.min(b), a.max(b)), 1)
            }
        }
    }
}

fn value_of(op: &Operator, s: &State) -> Result<NcValue> {
    ncvalue_of(op, s)
}

fn uncertainty_identity(v: &NcValue, s: &State) -> Result<f64> {
    let sq = star(v, v, s)?;
    Ok((sq.f - v.f * v.f).re - v.v_norm_sqr())
}

fn rank_record(name: &str, bip: &str, data: &[C64], expected: usize) -> Result<RankRecord> {
    Ok(RankRecord {
        name: name.into(),
        bipartition: bip.into(),
        rank: factor_rank(data, 2, 2, FACTOR_TOL)?,
        expected,
        tolerance: FACTOR_TOL,
    })
}

pub fn run_qubit_case(sc: &QubitScenario) -> Result<ScenarioReport> {
    let layout = initial_layout();
    let u = build_qubit_qrf_unitary(&layout)?;
    let z = sc.initial_amplitudes();
    let initial = make_state(layout.clone(), DVector::from_row_slice(&z), false)?;
    if !initial.is_normalized() {
        return Err(QrfError::BadParameters("initial state not normalized".into()));
    }
    let fin = apply(&u, &initial)?;
    let fl = fin.layout().clone();
    let (c, s) = (sc.c(), sc.s());

    let mut checks = Vec::new();
    let uu = u.compose(&u.adjoint())?;
    checks.push(Check::new(
        "unitary.unitarity",
        uu.max_abs_diff(&Operator::identity(fl.clone())).unwrap_or(f64::INFINITY),
        EXACT_TOL,
    ));
    let zf = fin.amplitudes().as_slice();
    checks.push(Check::new(
        "final_state.printed_form",
        max_dev(zf, &sc.printed_final_amplitudes()),
        EXACT_TOL,
    ));
    checks.push(Check::new(
        "final_state.coordinate_transform",
        max_dev(zf, &coordinate_transform(&z)),
        EXACT_TOL,
    ));
    let back = apply(&u.adjoint(), &fin)?;
    checks.push(Check::new(
        "final_state.inverse",
        max_dev(back.amplitudes().as_slice(), &z),
        EXACT_TOL,
    ));

    let s3b = pauli_string(&layout, 1.0, &[(Role::B, 3)])?;
    let s3c_i = pauli_string(&layout, 1.0, &[(Role::C, 3)])?;
    let m3a = pauli_string(&fl, -1.0, &[(Role::A, 3)])?;
    let s3c_f = pauli_string(&fl, 1.0, &[(Role::C, 3)])?;
    let m3a1c = pauli_string(&fl, -1.0, &[(Role::A, 3), (Role::C, 1)])?;

    let v3b = value_of(&s3b, &initial)?;
    let v3c_i = value_of(&s3c_i, &initial)?;
    let vm3a = value_of(&m3a, &fin)?;
    let v3c_f = value_of(&s3c_f, &fin)?;
    let vm3a1c = value_of(&m3a1c, &fin)?;

    let records = [
        ("sigma3_B", "initial", &v3b, &initial),
        ("sigma3_C", "initial", &v3c_i, &initial),
        ("-sigma3_A", "final", &vm3a, &fin),
        ("sigma3_C", "final", &v3c_f, &fin),
        ("-sigma3_A*sigma1_C", "final", &vm3a1c, &fin),
    ];
    for (name, stage, v, st) in records {
        checks.push(Check::new(
            format!("uncertainty_identity.{name}.{stage}"),
            uncertainty_identity(v, st)?.abs(),
            VALUE_TOL,
        ));
    }

    let back_u = u.adjoint();
    let pairs = [
        ("sigma3_B", &v3b, "-sigma3_A", &vm3a),
        ("sigma3_C", &v3c_i, "-sigma3_A*sigma1_C", &vm3a1c),
    ];
    for (ni, vi, nf, vf) in pairs {
        let re = reexpress(vf, &back_u)?;
        let err = re.max_diff(vi).unwrap_or(f64::INFINITY);
        checks.push(Check::new(format!("invariance.{ni}.initial={nf}.final"), err, VALUE_TOL));
        let rule = reexpression_rule(vf.v.as_slice());
        checks.push(Check::new(
            format!("reexpression_rule.{nf}"),
            max_dev(&rule, vi.v.as_slice()),
            EXACT_TOL,
        ));
    }

    let (c2, s2) = (c.norm_sqr(), s.norm_sqr());
    let mut discrepancies = Vec::new();
    let (exp_i, exp_f) = sc.expected_ranks();
    let mut ranks = vec![
        rank_record("initial_state", "B|C", &z, exp_i)?,
        rank_record("final_state", "A|C", zf, exp_f)?,
    ];

    if sc.case == QubitCase::C {
        let r2 = 2.0_f64.sqrt();
        let f0 = C64::new(c2 - s2, 0.0);
        checks.push(Check::new("golden.f.sigma3_B.initial", (v3b.f - f0).norm(), EXACT_TOL));
        checks.push(Check::new("golden.f.-sigma3_A.final", (vm3a.f - f0).norm(), EXACT_TOL));
        let gv = [c.conj() * 2.0 * s2, ZERO, ZERO, -s.conj() * 2.0 * c2];
        checks.push(Check::new("golden.V.sigma3_B.initial", max_dev(v3b.v.as_slice(), &gv), EXACT_TOL));
        checks.push(Check::new("golden.V.sigma3_C.initial", max_dev(v3c_i.v.as_slice(), &gv), EXACT_TOL));
        let gvp = [
            -s.conj() * r2 * c2,
            -s.conj() * r2 * c2,
            c.conj() * r2 * s2,
            c.conj() * r2 * s2,
        ];
        checks.push(Check::new("golden.V.-sigma3_A.final", max_dev(vm3a.v.as_slice(), &gvp), EXACT_TOL));
        checks.push(Check::new(
            "golden.V.-sigma3_A*sigma1_C.final",
            max_dev(vm3a1c.v.as_slice(), &gvp),
            EXACT_TOL,
        ));
        let r = FRAC_1_SQRT_2;
        let g3c = [s.conj() * r, -s.conj() * r, c.conj() * r, -c.conj() * r];
        checks.push(Check::new("golden.f.sigma3_C.final", v3c_f.f.norm(), EXACT_TOL));
        checks.push(Check::new("golden.V.sigma3_C.final", max_dev(v3c_f.v.as_slice(), &g3c), EXACT_TOL));
        let back3c = reexpress(&v3c_f, &back_u)?;
        checks.push(Check::new(
            "golden.V.sigma3_C.final_in_initial_basis",
            max_dev(back3c.v.as_slice(), &[ZERO, c.conj(), -s.conj(), ZERO]),
            EXACT_TOL,
        ));
        checks.push(Check::new(
            "golden.uncertainty.sigma3_C.final",
            (v3c_f.v_norm_sqr() - 1.0).abs(),
            EXACT_TOL,
        ));
        let var_i = v3c_i.v_norm_sqr();
        let brute = 1.0 - (c2 - s2).powi(2);
        checks.push(Check::new(
            "golden.uncertainty.sigma3_C.initial",
            (var_i - 4.0 * s2 * c2).abs().max((var_i - brute).abs()),
            EXACT_TOL,
        ));
        discrepancies.push(Discrepancy {
            kind: LITERATURE_DISCREPANCY.into(),
            name: "uncertainty.sigma3_C.initial".into(),
            computed: var_i,
            published: 2.0 * s2 * c2,
            note: "published coefficient 2|s|^2|c|^2; sum |V_n|^2 and 1 - f^2 both give 4|s|^2|c|^2"
                .into(),
        });
        // V_σ3B = diag(2c̄|s|², −2s̄|c|²) has singular values 2|c||s|·{|s|, |c|}
        let (a, b) = (c.norm(), s.norm());
        let (vb_rank, vp_rank) = if a * b == 0.0 {
            (0, 0)
        } else if a.min(b) > FACTOR_TOL * a.max(b) {
            (2, 1)
        } else {
            (1, 1)
        };
        ranks.push(rank_record("V.sigma3_B.initial", "B|C", v3b.v.as_slice(), vb_rank)?);
        ranks.push(rank_record("V.-sigma3_A.final", "A|C", vm3a.v.as_slice(), vp_rank)?);
        ranks.push(rank_record("V.sigma3_C.final", "A|C", v3c_f.v.as_slice(), 1)?);
    }

    let values = records
        .iter()
        .map(|(name, stage, v, _)| NcRecord::new(name, stage, v))
        .collect();

    Ok(ScenarioReport {
        scenario_id: format!("qubit-{}", sc.case),
        system: "qubit".into(),
        case: sc.case.id().into(),
        parameters: json!({
            "case": sc.case.id(),
            "theta": sc.theta,
            "zeta": sc.zeta,
            "zeta_prime": sc.zeta_prime,
        }),
        initial: StateSummary::from(&initial),
        final_state: StateSummary::from(&fin),
        values,
        ranks,
        checks,
        discrepancies,
        wall_time_s: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_match_mapping() {
        let u = build_qubit_qrf_unitary(&initial_layout()).unwrap();
        let m = u.to_dense().unwrap();
        let r = FRAC_1_SQRT_2;
        let col0: Vec<f64> = m.column(0).iter().map(|z| z.re).collect();
        let col1: Vec<f64> = m.column(1).iter().map(|z| z.re).collect();
        assert_eq!(col0, vec![0.0, 0.0, r, r]);
        assert_eq!(col1, vec![0.0, 0.0, r, -r]);
        assert!(u.is_unitary());
        assert_eq!(u.codomain().frame_role(), Role::B);
        assert_eq!(u.codomain().active_roles(), vec![Role::A, Role::C]);
    }

    #[test]
    fn rejects_wrong_layout() {
        let l = BasisLayout::qubits(Role::C, &[Role::A, Role::B]).unwrap();
        assert!(matches!(build_qubit_qrf_unitary(&l), Err(QrfError::BadLayout(_))));
    }

    #[test]
    fn coordinates_of_basis_vector() {
        let r = FRAC_1_SQRT_2;
        let z = coordinate_transform(&[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(z, [ZERO, ZERO, C64::new(r, 0.0), C64::new(r, 0.0)]);
    }

    #[test]
    fn pushforward_table_holds() {
        for c in pushforward_table_check().unwrap() {
            assert!(c.pass, "{} error {}", c.name, c.error);
        }
    }

    #[test]
    fn two_hops_compose() {
        for c in two_hop_check().unwrap() {
            assert!(c.pass, "{} error {}", c.name, c.error);
        }
    }

    #[test]
    fn pauli_string_on_c() {
        let op = pauli_string(&initial_layout(), 1.0, &[(Role::C, 3)]).unwrap();
        let d: Vec<f64> = op.to_dense().unwrap().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn a_prime_with_s_zero() {
        let sc = QubitScenario::new(QubitCase::APrime, 0.0, 0.0, 0.0).unwrap();
        let rep = run_qubit_case(&sc).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(rep.final_state.amplitudes.re, vec![0.0, 0.0, r, r]);
        assert!(rep.all_pass(), "{:?}", rep.failures());
    }

    #[test]
    fn all_cases_pass() {
        for case in [QubitCase::APrime, QubitCase::BPrime, QubitCase::C] {
            let sc = QubitScenario::new(case, 1.3, 0.4, 2.2).unwrap();
            let rep = run_qubit_case(&sc).unwrap();
            assert!(rep.all_pass(), "{case}: {:?} {:?}", rep.failures(), rep.ranks);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(QubitScenario::new(QubitCase::C, PI, 0.0, 0.0).is_err());
        assert!(QubitScenario::new(QubitCase::C, 0.1, -0.1, 0.0).is_err());
        assert!(QubitScenario::new(QubitCase::C, 0.1, 0.0, f64::NAN).is_err());
    }
}
