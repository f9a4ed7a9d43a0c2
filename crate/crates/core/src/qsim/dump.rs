//! JSON-lines state snapshots.
//!
//! A snapshot is one `header` record followed by one `term` record per basis
//! term in canonical order. Amplitudes are rounded to 12 significant digits.

use std::io::{self, BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::product::ProductState;
use super::state::{QuantumState, Value};

/// Anything that can be written as a snapshot.
pub trait TermSource {
    fn register_ids(&self) -> Vec<String>;
    fn support(&self) -> usize;
    fn norm_sqr(&self) -> f64;
    /// Visits up to `limit` terms in canonical order.
    fn visit_terms(&self, limit: usize, visit: &mut dyn FnMut(&[&[Value]], Complex64));
}

impl TermSource for QuantumState {
    fn register_ids(&self) -> Vec<String> {
        self.registers().iter().map(|r| r.id.clone()).collect()
    }

    fn support(&self) -> usize {
        QuantumState::support(self)
    }

    fn norm_sqr(&self) -> f64 {
        QuantumState::norm_sqr(self)
    }

    fn visit_terms(&self, limit: usize, visit: &mut dyn FnMut(&[&[Value]], Complex64)) {
        for (values, amp) in self.terms().take(limit) {
            visit(&values, amp);
        }
    }
}

impl TermSource for ProductState {
    fn register_ids(&self) -> Vec<String> {
        self.registers().map(|r| r.id.clone()).collect()
    }

    fn support(&self) -> usize {
        ProductState::support(self)
    }

    fn norm_sqr(&self) -> f64 {
        ProductState::norm_sqr(self)
    }

    fn visit_terms(&self, limit: usize, visit: &mut dyn FnMut(&[&[Value]], Complex64)) {
        ProductState::visit_terms(self, limit, visit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub step: String,
    pub norm: f64,
    pub support: usize,
    pub truncated: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub step: String,
    pub registers: Vec<String>,
    /// One entry per register: a number, or an array for multi-slot registers.
    pub values: Vec<Json>,
    pub amp_re: f64,
    pub amp_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
pub enum DumpRecord {
    Header(SnapshotHeader),
    Term(TermRecord),
}

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// A header plus at most `cap` rendered terms of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub header: SnapshotHeader,
    pub terms: Vec<TermRecord>,
}

impl Snapshot {
    /// Renders up to `cap` terms of `state` under label `step`.
    pub fn capture(step: &str, state: &dyn TermSource, cap: usize) -> Self {
        let header = SnapshotHeader {
            step: step.to_string(),
            norm: round_sig(state.norm_sqr().sqrt(), 12),
            support: state.support(),
            truncated: state.support() > cap,
            probability: None,
            note: None,
        };
        let registers = state.register_ids();
        let mut terms = Vec::with_capacity(state.support().min(cap));
        state.visit_terms(cap, &mut |values, amp| {
            terms.push(TermRecord {
                step: step.to_string(),
                registers: registers.clone(),
                values: values.iter().map(|v| value_json(v)).collect(),
                amp_re: round_sig(amp.re, 12),
                amp_im: round_sig(amp.im, 12),
            });
        });
        Self { header, terms }
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.header.probability = Some(round_sig(p, 12));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.header.note = Some(note.into());
        self
    }

    /// One header line, then one line per term.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> io::Result<()> {
        serde_json::to_writer(&mut *out, &DumpRecord::Header(self.header.clone()))?;
        out.write_all(b"\n")?;
        for t in &self.terms {
            serde_json::to_writer(&mut *out, &DumpRecord::Term(t.clone()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// A register value as JSON: a number, or an array for multi-slot registers.
pub fn value_json(v: &[Value]) -> Json {
    if v.len() == 1 {
        Json::from(v[0])
    } else {
        Json::from(v.to_vec())
    }
}

/// Parses a JSON-lines dump; blank lines are skipped.
pub fn read_records<R: BufRead>(input: R) -> io::Result<Vec<DumpRecord>> {
    let mut records = Vec::new();
    for (no, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", no + 1))
        })?;
        records.push(rec);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Combine, RegisterSpec};

    #[test]
    fn rounding() {
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        assert_eq!(round_sig(-2.0f64.sqrt(), 3), -1.41);
        assert_eq!(round_sig(0.0, 12), 0.0);
    }

    #[test]
    fn round_trip() {
        let s = QuantumState::init(vec![
            RegisterSpec::qubits("A", 3),
            RegisterSpec::tuple("E", 2, 2),
        ])
        .unwrap()
        .load_uniform("A", &[1, 2, 5])
        .unwrap()
        .apply_oracle(&["A"], "E", Combine::Overwrite, |a, e| {
            e[0] = a[0] % 4;
            e[1] = a[0] / 4;
        })
        .unwrap();
        let mut buf = Vec::new();
        Snapshot::capture("1.1", &s, 10)
            .with_note("n")
            .write_jsonl(&mut buf)
            .unwrap();
        let recs = read_records(buf.as_slice()).unwrap();
        assert_eq!(recs.len(), 4);
        match &recs[0] {
            DumpRecord::Header(h) => {
                assert_eq!((h.support, h.truncated, h.norm), (3, false, 1.0));
                assert_eq!((h.probability, h.note.as_deref()), (None, Some("n")));
            }
            other => panic!("{other:?}"),
        }
        match &recs[3] {
            DumpRecord::Term(t) => {
                assert_eq!(t.registers, vec!["A", "E"]);
                assert_eq!(t.values, vec![Json::from(5), Json::from(vec![1, 1])]);
                assert_eq!(t.amp_re, round_sig(1.0 / 3f64.sqrt(), 12));
            }
            other => panic!("{other:?}"),
        }
        let mut short = Vec::new();
        Snapshot::capture("x", &s, 1)
            .write_jsonl(&mut short)
            .unwrap();
        let recs = read_records(short.as_slice()).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(matches!(&recs[0], DumpRecord::Header(h) if h.truncated));
    }

    #[test]
    fn bad_line_reports_position() {
        let err = read_records("\n{\"record\":\"nope\"}\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
