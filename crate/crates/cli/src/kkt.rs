use serde::Deserialize;
use sqvar::optcert::{
    nlp_approx_2n_measure, ssv_approx_2n_measure, thm35_transfer, CertError, Nlp2nMeasures, NlpData, Ssv2nMeasures,
};

use crate::report::{Table, Value};

/// Floor applied to the squared-slack measures before the transfer.
const MEASURE_FLOOR: f64 = 1e-12;

/// Input of `check-kkt`: derivative data of `min f(x) s.t. c(x) ≥ 0` at `x`,
/// multipliers `s`, and optionally the slack roots `v` of the squared-slack form.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointFile {
    pub problem: NlpData,
    pub s: Vec<f64>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub v: Option<Vec<f64>>,
    /// Multipliers for the primal-dual test; zeros when absent.
    #[serde(default)]
    pub a: Option<Vec<f64>>,
}

fn push_nlp(t: &mut Table, source: &str, m: &Nlp2nMeasures) {
    for (name, value) in [
        ("eps_foc", m.eps_foc),
        ("eps_pf", m.eps_pf),
        ("eps_cs", m.eps_cs),
        ("eps_pd", m.eps_pd),
        ("eps_soc", m.eps_soc),
        ("zeta", m.zeta),
    ] {
        t.push(vec![source.into(), name.into(), Value::Num(value)]);
    }
}

/// Long-format table of `(source, measure, value)`. `source` is `direct` for
/// measures computed on the constrained problem, `ssv` for the squared-slack
/// measures, and `transfer` for the bounds implied by the latter. The
/// transfer rows are omitted, with a note, when its hypotheses fail.
pub fn check_kkt(point: &PointFile, zeta: f64) -> Result<(Table, Vec<String>), CertError> {
    let m = point.problem.m();
    if let Some(x) = &point.x {
        if x.len() != point.problem.n() {
            return Err(CertError::DimensionMismatch(format!(
                "x has length {}, expected {}",
                x.len(),
                point.problem.n()
            )));
        }
    }
    let a = point.a.clone().unwrap_or_else(|| vec![0.0; m]);
    let mut t = Table::new(&["source", "measure", "value"]);
    let mut notes = vec![];
    push_nlp(
        &mut t,
        "direct",
        &nlp_approx_2n_measure(&point.problem, &point.s, &a, zeta)?,
    );
    if let Some(v) = &point.v {
        let e = ssv_approx_2n_measure(&point.problem, v, &point.s)?;
        for (name, value) in [("eps1", e.eps1), ("eps2", e.eps2), ("eps3", e.eps3)] {
            t.push(vec!["ssv".into(), name.into(), Value::Num(value)]);
        }
        let floored = Ssv2nMeasures {
            eps1: e.eps1.max(MEASURE_FLOOR),
            eps2: e.eps2.max(MEASURE_FLOOR),
            eps3: e.eps3.max(MEASURE_FLOOR),
        };
        match thm35_transfer(&point.problem, v, &point.s, floored, zeta) {
            Ok(bounds) => push_nlp(&mut t, "transfer", &bounds),
            Err(err) => notes.push(format!("transfer bounds unavailable: {err}")),
        }
    }
    Ok((t, notes))
}
