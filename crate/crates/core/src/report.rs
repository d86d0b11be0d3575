//! Machine-readable assessment reports. JSON goes through [`to_json_string`] so every
//! front end emits identical bytes for identical inputs.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::{csv_error, Dataset};
use crate::error::Result;
use crate::models::{verify_duality, DualityReport, GoalUnitPrices, PriceFrame, ProgramKind, VgaAssessment};
use crate::post_analysis::{decompose, geometry, interlinkage, Decomposition, Geometry, Interlinkage};

pub const SCHEMA_VERSION: &str = "1.0";
pub const JSON_SIGNIFICANT_DIGITS: usize = 15;
pub const CSV_DECIMALS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub name: String,
    pub observed: f64,
    pub slack_ratio: f64,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub schema_version: String,
    pub dmu: String,
    #[serde(flatten)]
    pub program: ProgramKind,
    pub efficiency: f64,
    pub gamma: f64,
    pub t: f64,
    pub peers: Vec<String>,
    pub intensities: Vec<Intensity>,
    pub input_targets: Vec<TargetRow>,
    pub output_targets: Vec<TargetRow>,
    pub step1: PriceFrame,
    pub step2: PriceFrame,
    pub decomposition: Decomposition,
    pub goal_unit_prices: GoalUnitPrices,
    pub interlinkage: Interlinkage,
    pub geometry: Geometry,
    pub duality: DualityReport,
    pub degenerate: bool,
}

impl AssessmentReport {
    pub fn build(d: &Dataset, a: &VgaAssessment) -> Self {
        let rows = |names: &[crate::dataset::IndexName], obs: &[f64], ratios: &[f64], target: &[f64]| {
            names
                .iter()
                .zip(obs)
                .zip(ratios)
                .zip(target)
                .map(|(((n, &observed), &slack_ratio), &target)| TargetRow {
                    name: n.to_string(),
                    observed,
                    slack_ratio,
                    target,
                })
                .collect()
        };
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            dmu: a.dmu.clone(),
            program: a.kind,
            efficiency: a.efficiency,
            gamma: a.gamma,
            t: a.t,
            peers: a.peers.clone(),
            intensities: a
                .dmu_ids
                .iter()
                .zip(&a.pi)
                .map(|(id, &value)| Intensity { id: id.clone(), value })
                .collect(),
            input_targets: rows(&d.input_names, &a.x_o, &a.q, &a.x_hat),
            output_targets: rows(&d.output_names, &a.y_o, &a.p, &a.y_hat),
            step1: a.interim.clone(),
            step2: a.normalized.clone(),
            decomposition: decompose(a),
            goal_unit_prices: a.goal_unit_prices.clone(),
            interlinkage: interlinkage(a),
            geometry: geometry(d, a),
            duality: verify_duality(d, a),
            degenerate: a.degenerate,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        to_json_string(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Flat `section,name,value` rows with values at four decimals.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["section", "name", "value"]).map_err(csv_error)?;
        let mut row = |section: &str, name: &str, value: f64| {
            out.write_record([section, name, &format!("{value:.CSV_DECIMALS$}")])
                .map_err(csv_error)
        };
        if let Some(k) = self.program.kappa() {
            row("program", "kappa", k)?;
        }
        row("score", "E", self.decomposition.efficiency)?;
        row("score", "F", self.decomposition.inefficiency)?;
        row("score", "T", self.decomposition.technical_efficiency)?;
        row("score", "T_check", self.decomposition.technical_inefficiency)?;
        row("score", "T_dot", self.decomposition.technical_inefficiency_plain)?;
        row("score", "S", self.decomposition.scale)?;
        row("score", "Xi", self.decomposition.xi)?;
        row("score", "gamma", self.gamma)?;
        row("score", "t", self.t)?;
        for (label, f) in [("step1", &self.step1), ("step2", &self.step2)] {
            row(label, "tau", f.tau)?;
            row(label, "delta", f.delta)?;
            row(label, "gap", f.gap)?;
            row(label, "w", f.w)?;
            row(label, "omega", f.omega)?;
            row(label, "alpha", f.alpha)?;
            row(label, "beta", f.beta)?;
            row(label, "alpha_aff", f.alpha_aff)?;
            row(label, "beta_aff", f.beta_aff)?;
            row(label, "alpha_hat_aff", f.alpha_hat_aff)?;
            row(label, "beta_hat_aff", f.beta_hat_aff)?;
            for (i, v) in f.v.iter().enumerate() {
                row(label, &format!("v{}", i + 1), *v)?;
            }
            for (r, u) in f.u.iter().enumerate() {
                row(label, &format!("u{}", r + 1), *u)?;
            }
        }
        for p in &self.intensities {
            row("intensity", &p.id, p.value)?;
        }
        for (section, targets) in [("input", &self.input_targets), ("output", &self.output_targets)] {
            for t in targets {
                row(section, &format!("{}:observed", t.name), t.observed)?;
                row(section, &format!("{}:slack_ratio", t.name), t.slack_ratio)?;
                row(section, &format!("{}:target", t.name), t.target)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Rounds a finite float to the fixed number of significant digits.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", JSON_SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every number in a JSON tree. Non-finite floats become `null` in serde_json.
pub fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                if let Some(r) = serde_json::Number::from_f64(round_significant(f)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_rounded_value<T: Serialize>(x: &T) -> Result<Value> {
    let mut v = serde_json::to_value(x)?;
    round_value(&mut v);
    Ok(v)
}

/// Pretty JSON at 15 significant digits, newline terminated.
pub fn to_json_string<T: Serialize>(x: &T) -> Result<String> {
    let v = to_rounded_value(x)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::example_dataset;
    use crate::models::assess;

    #[test]
    fn rounding_is_idempotent() {
        for x in [1.0 / 3.0, 2.301047913, -1e-300, 123_456_789.123_456_8, 0.1 + 0.2] {
            let r = round_significant(x);
            assert_eq!(r, round_significant(r));
            assert!((r - x).abs() <= x.abs() * 1e-14);
        }
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
    }

    #[test]
    fn report_round_trip() {
        let d = example_dataset();
        let a = assess(&d, "K", ProgramKind::ste(1.0).unwrap()).unwrap();
        let json = AssessmentReport::build(&d, &a).to_json_string().unwrap();
        let back = AssessmentReport::from_json_str(&json).unwrap();
        assert_eq!(back.to_json_string().unwrap(), json);
        assert_eq!(back.program, ProgramKind::Ste { kappa: 1.0 });
        assert!(json.contains("\"schema_version\": \"1.0\""));
    }

    #[test]
    fn csv_uses_four_decimals() {
        let d = example_dataset();
        let a = assess(&d, "K", ProgramKind::Pte).unwrap();
        let csv = AssessmentReport::build(&d, &a).to_csv_string().unwrap();
        assert!(csv.starts_with("section,name,value\n"));
        assert!(csv.contains("score,E,0.5887\n"), "{csv}");
        assert!(csv.contains("intensity,B,1.4212\n"));
    }
}
