//! Scenario reports and their serialized forms.

use std::io;

use nalgebra::DVector;
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::ncvalue::NcValue;
use crate::statekit::State;
use crate::C64;

/// Discrepancy kind used when a computed value disagrees with a published one.
pub const LITERATURE_DISCREPANCY: &str = "literature-discrepancy";

#[derive(Clone, Copy, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub fn to_c64(self) -> C64 {
        C64::new(self.re, self.im)
    }
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

/// Complex vector as paired real/imaginary arrays.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct ComplexVec {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexVec {
    pub fn from_slice(v: &[C64]) -> Self {
        ComplexVec {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| C64::new(re, im))
            .collect()
    }
}

impl From<&DVector<C64>> for ComplexVec {
    fn from(v: &DVector<C64>) -> Self {
        ComplexVec::from_slice(v.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct StateSummary {
    pub basis_id: String,
    pub frame: String,
    pub roles: Vec<String>,
    pub dims: Vec<usize>,
    pub amplitudes: ComplexVec,
}

impl From<&State> for StateSummary {
    fn from(s: &State) -> Self {
        let layout = s.layout();
        StateSummary {
            basis_id: layout.basis_id().0,
            frame: layout.frame_role().to_string(),
            roles: layout.active_roles().iter().map(|r| r.to_string()).collect(),
            dims: layout.active_dims(),
            amplitudes: s.amplitudes().into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct NcRecord {
    pub observable: String,
    pub stage: String,
    pub basis_id: String,
    pub f: Complex,
    pub v: ComplexVec,
    pub uncertainty: f64,
}

impl NcRecord {
    pub fn new(observable: &str, stage: &str, value: &NcValue) -> Self {
        NcRecord {
            observable: observable.into(),
            stage: stage.into(),
            basis_id: value.basis.0.clone(),
            f: value.f.into(),
            v: (&value.v).into(),
            uncertainty: value.v_norm_sqr(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct RankRecord {
    pub name: String,
    pub bipartition: String,
    pub rank: usize,
    pub expected: usize,
    pub tolerance: f64,
}

/// One numerical comparison. Passes iff `error <= tolerance`.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct Check {
    pub name: String,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            error,
            tolerance,
            pass: error <= tolerance,
            note: None,
        }
    }

    /// Exact-agreement check on a boolean or integer outcome.
    pub fn exact(name: impl Into<String>, ok: bool) -> Self {
        Check::new(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// A computed quantity recorded next to a differing published value.
/// Recorded rather than failed.
#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct Discrepancy {
    pub kind: String,
    pub name: String,
    pub computed: f64,
    pub published: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
pub struct ScenarioReport {
    pub scenario_id: String,
    pub system: String,
    pub case: String,
    pub parameters: serde_json::Value,
    pub initial: StateSummary,
    #[serde(rename = "final")]
    pub final_state: StateSummary,
    pub values: Vec<NcRecord>,
    pub ranks: Vec<RankRecord>,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub discrepancies: Vec<Discrepancy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl ScenarioReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.ranks.iter().all(|r| r.rank == r.expected)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, observable: &str, stage: &str) -> Option<&NcRecord> {
        self.values
            .iter()
            .find(|v| v.observable == observable && v.stage == stage)
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    /// One row per check: `scenario_id,check,error,tolerance,pass`.
    pub fn to_csv_summary(&self) -> String {
        let mut out = String::from("scenario_id,check,error,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                csv_field(&self.scenario_id),
                csv_field(&c.name),
                fmt_float(c.error),
                fmt_float(c.tolerance),
                c.pass
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

/// Pretty-printed JSON with every float written by [`fmt_float`], so equal
/// values always serialize to identical bytes.
struct CanonicalFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for CanonicalFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_float(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_fixed_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_float(f64::NAN), "null");
        let s = to_canonical_json(&Complex { re: 1.0, im: 0.0 });
        assert!(s.contains("\"re\": 1.0000000000000000e0"));
        let back: Complex = serde_json::from_str(&s).unwrap();
        assert_eq!(back, Complex { re: 1.0, im: 0.0 });
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }

    #[test]
    fn check_pass_rule() {
        assert!(Check::new("x", 1e-13, 1e-12).pass);
        assert!(!Check::new("x", 1e-11, 1e-12).pass);
        assert!(!Check::new("x", f64::NAN, 1e-12).pass);
        assert!(Check::exact("y", true).pass);
    }
}
