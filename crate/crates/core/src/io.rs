//! File formats. Reals are written as shortest round-trip decimal strings,
//! integers as plain decimals; basis files hold integer coordinates only.

use std::io::Write;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::cutproject::{BDPairing, PointSet, Scheme};
use crate::dynamics::{ConditionResult, RemainderTrace, ReturnSequence};
use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, RotationContext};
use crate::real::format_real;
use crate::region::{ConditionReport, SpecialBasis};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisFile {
    s: usize,
    alpha: Vec<String>,
    vectors: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    k: usize,
    d: usize,
    alphas: Vec<Vec<String>>,
}

pub fn basis_to_json(basis: &SpecialBasis) -> Result<String> {
    let file = BasisFile {
        s: basis.dim(),
        alpha: basis.context().alpha().iter().map(format_real).collect(),
        vectors: basis.vectors().iter().map(LatticeVector::to_row).collect(),
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn basis_from_json(text: &str, precision: u32) -> Result<SpecialBasis> {
    let file: BasisFile = serde_json::from_str(text)?;
    if file.alpha.len() != file.s {
        return Err(Error::DimensionMismatch {
            expected: file.s,
            found: file.alpha.len(),
        });
    }
    let ctx = RotationContext::from_decimal(&file.alpha, precision)?;
    let vectors = file
        .vectors
        .iter()
        .map(|r| LatticeVector::from_row(r))
        .collect::<Result<Vec<_>>>()?;
    SpecialBasis::new(ctx, vectors)
}

pub fn scheme_to_json(scheme: &Scheme) -> Result<String> {
    let file = SchemeFile {
        k: scheme.k(),
        d: scheme.d(),
        alphas: scheme
            .alphas()
            .iter()
            .map(|r| r.iter().map(format_real).collect())
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

pub fn scheme_from_json(text: &str, precision: u32) -> Result<Scheme> {
    let file: SchemeFile = serde_json::from_str(text)?;
    Scheme::from_decimal(file.k, file.d, &file.alphas, precision)
}

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}_{i}"))
}

/// CSV `N,remainder`, one row per sample.
pub fn write_trace<W: Write>(out: W, trace: &RemainderTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "remainder"])?;
    for s in &trace.samples {
        w.write_record([s.n.to_string(), format_real(&s.remainder)])?;
    }
    w.flush()?;
    Ok(())
}

/// CSV `k,ell,u_1,...,u_s`.
pub fn write_returns<W: Write>(out: W, seq: &ReturnSequence, s: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = ["k".to_string(), "ell".to_string()]
        .into_iter()
        .chain(numbered("u", s))
        .collect();
    w.write_record(&header)?;
    for e in &seq.entries {
        let row: Vec<String> = [e.k.to_string(), e.ell.to_string()]
            .into_iter()
            .chain(e.u.iter().map(format_real))
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV `n_1,...,n_d,emb_1,...,emb_k`.
pub fn write_points<W: Write>(out: W, points: &PointSet, d: usize, k: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = numbered("n", d).chain(numbered("emb", k)).collect();
    w.write_record(&header)?;
    for (p, e) in points.embedded() {
        let row: Vec<String> = p.iter().map(i64::to_string).chain(e.iter().map(format_real)).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV `n_1,...,n_d,i,target_1,displacement`.
pub fn write_pairing<W: Write>(out: W, pairing: &BDPairing, d: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = numbered("n", d)
        .chain(["i".to_string(), "target_1".to_string(), "displacement".to_string()])
        .collect();
    w.write_record(&header)?;
    for p in pairing.pairs() {
        let row: Vec<String> = p
            .source
            .iter()
            .map(i64::to_string)
            .chain([p.i.to_string(), format_real(&p.target), format_real(&p.displacement)])
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct ReportEntry {
    pub condition: String,
    pub pass: bool,
    pub max_residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
}

impl From<&ConditionResult> for ReportEntry {
    fn from(r: &ConditionResult) -> Self {
        ReportEntry {
            condition: r.condition.clone(),
            pass: r.pass,
            max_residual: r.max_residual.as_ref().map(format_real),
            witness: r.witness.clone(),
        }
    }
}

/// The special-region conditions as report entries `S1` to `S4`.
pub fn condition_entries(report: &ConditionReport) -> Vec<ConditionResult> {
    let mut s3 = ConditionResult::new("S3", report.s3);
    if !report.s3 {
        s3.witness = Some(format!("determinant {}", report.determinant));
    }
    let mut s2 = ConditionResult::new("S2", report.s2);
    if !report.s2 && !report.t.is_empty() {
        let t: Vec<String> = report.t.iter().map(format_real).collect();
        s2.witness = Some(format!("t = ({})", t.join(", ")));
    }
    let mut s4 = ConditionResult::new("S4", report.s4);
    if !report.s4_exhaustive {
        s4.witness = Some("subset check skipped; sign invariant only".into());
    }
    vec![ConditionResult::new("S1", report.s1), s2, s3, s4]
}

pub fn report_to_json(results: &[ConditionResult]) -> Result<String> {
    let entries: Vec<ReportEntry> = results.iter().map(ReportEntry::from).collect();
    Ok(serde_json::to_string_pretty(&entries)? + "\n")
}

/// Parses a comma-separated list of reals.
pub fn parse_reals(text: &str, precision: u32) -> Result<Vec<Float>> {
    text.split(',')
        .map(|x| crate::real::parse_real(x.trim(), precision))
        .collect()
}
