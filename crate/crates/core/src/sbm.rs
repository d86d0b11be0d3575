//! Constant-returns slack-based measure, used as a baseline for the virtual gap scores.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, VgaError};
use crate::models::{assess, ProgramKind};
use crate::simplex::{self, LinearProgram, LpStatus, Relation, Sense};

/// Tolerance used when flagging an incomplete SBM solution.
pub const FLAG_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmResult {
    pub dmu: String,
    pub rho: f64,
    /// Charnes-Cooper normalizer of the linearized program.
    pub t_cc: f64,
    /// Input excesses `s⁻`.
    pub input_slacks: Vec<f64>,
    /// Output shortfalls `s⁺`.
    pub output_slacks: Vec<f64>,
    /// `s⁻_i / x_io`.
    pub input_ratios: Vec<f64>,
    /// `s⁺_r / y_ro`.
    pub output_ratios: Vec<f64>,
    pub lambda: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// `v·x_o`.
    pub alpha: f64,
    /// `u·y_o`.
    pub beta: f64,
    pub e_rel: f64,
    /// `v·(x_o − t·s⁻)`.
    pub alpha_hat: f64,
    /// `u·(y_o + t·s⁺)`.
    pub beta_hat: f64,
    pub goal_ratio: f64,
}

impl SbmResult {
    /// The ratio form of the measure evaluated at the reported slacks.
    pub fn rho_from_slacks(&self) -> f64 {
        let m = self.input_ratios.len() as f64;
        let s = self.output_ratios.len() as f64;
        (1.0 - self.input_ratios.iter().sum::<f64>() / m) / (1.0 + self.output_ratios.iter().sum::<f64>() / s)
    }
}

/// Solves the fractional program through its linearization
///
/// ```text
/// min  t − (1/m) Σ S⁻_i / x_io
/// s.t. t + (1/s) Σ S⁺_r / y_ro = 1
///      −t x_o + X Λ + S⁻ = 0
///      −t y_o + Y Λ − S⁺ = 0
/// ```
///
/// and maps the scaled variables back with `s = S/t`, `λ = Λ/t`.
pub fn solve_sbm(d: &Dataset, o: &str) -> Result<SbmResult> {
    let jo = d.index_of(o)?;
    let (n, m, s) = (d.n(), d.m(), d.s());
    let dmu = &d.dmus[jo];
    for (name, &v) in d.input_names.iter().zip(&dmu.inputs).chain(d.output_names.iter().zip(&dmu.outputs)) {
        if v <= 0.0 {
            return Err(VgaError::ZeroAssessedValue {
                dmu: o.to_string(),
                index: name.to_string(),
            });
        }
    }
    let (x_o, y_o) = (&dmu.inputs, &dmu.outputs);
    // Columns: t, Λ_1..Λ_n, S⁻_1..S⁻_m, S⁺_1..S⁺_s.
    let nv = 1 + n + m + s;
    let mut objective = vec![0.0; nv];
    objective[0] = 1.0;
    for i in 0..m {
        objective[1 + n + i] = -1.0 / (m as f64 * x_o[i]);
    }
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    let mut norm = vec![0.0; nv];
    norm[0] = 1.0;
    for r in 0..s {
        norm[1 + n + m + r] = 1.0 / (s as f64 * y_o[r]);
    }
    lp.add_constraint(norm, Relation::Eq, 1.0);
    for i in 0..m {
        let mut row = vec![0.0; nv];
        row[0] = -x_o[i];
        for j in 0..n {
            row[1 + j] = d.input(i, j);
        }
        row[1 + n + i] = 1.0;
        lp.add_constraint(row, Relation::Eq, 0.0);
    }
    for r in 0..s {
        let mut row = vec![0.0; nv];
        row[0] = -y_o[r];
        for j in 0..n {
            row[1 + j] = d.output(r, j);
        }
        row[1 + n + m + r] = -1.0;
        lp.add_constraint(row, Relation::Eq, 0.0);
    }
    let sol = simplex::solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(VgaError::Infeasible(format!("SBM program for `{o}`"))),
        LpStatus::Unbounded => return Err(VgaError::Unbounded(format!("SBM program for `{o}`"))),
    }
    let t = sol.values[0];
    let scaled = |k: usize| sol.values[k].max(0.0);
    let input_slacks: Vec<f64> = (0..m).map(|i| scaled(1 + n + i) / t).collect();
    let output_slacks: Vec<f64> = (0..s).map(|r| scaled(1 + n + m + r) / t).collect();
    let lambda = (0..n).map(|j| scaled(1 + j) / t).collect();
    // Duals of the scaled rows are already the SBM multipliers.
    let v: Vec<f64> = (0..m).map(|i| -sol.duals[1 + i]).collect();
    let u: Vec<f64> = (0..s).map(|r| sol.duals[1 + m + r]).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let alpha = dot(&v, x_o);
    let beta = dot(&u, y_o);
    let x_goal: Vec<f64> = (0..m).map(|i| x_o[i] - scaled(1 + n + i)).collect();
    let y_goal: Vec<f64> = (0..s).map(|r| y_o[r] + scaled(1 + n + m + r)).collect();
    let alpha_hat = dot(&v, &x_goal);
    let beta_hat = dot(&u, &y_goal);
    Ok(SbmResult {
        dmu: o.to_string(),
        rho: sol.objective,
        t_cc: t,
        input_ratios: input_slacks.iter().zip(x_o).map(|(q, x)| q / x).collect(),
        output_ratios: output_slacks.iter().zip(y_o).map(|(p, y)| p / y).collect(),
        input_slacks,
        output_slacks,
        lambda,
        e_rel: beta / alpha,
        goal_ratio: beta_hat / alpha_hat,
        v,
        u,
        alpha,
        beta,
        alpha_hat,
        beta_hat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmComparison {
    pub dmu: String,
    pub rho: f64,
    pub e_rel: f64,
    /// PTE efficiency, the exact relative efficiency of the unit.
    pub e_pte: f64,
    pub goal_ratio: f64,
    pub flagged: bool,
    pub reasons: Vec<String>,
}

/// Flags the SBM solution as incomplete when its score falls below the relative
/// efficiency of its own prices, or when its goal is not priced at parity.
pub fn compare_sbm_vga(d: &Dataset, o: &str) -> Result<SbmComparison> {
    let sbm = solve_sbm(d, o)?;
    let pte = assess(d, o, ProgramKind::Pte)?;
    let mut reasons = Vec::new();
    if sbm.rho < sbm.e_rel - FLAG_TOL {
        reasons.push(format!("rho {:.4} is below E_rel {:.4}", sbm.rho, sbm.e_rel));
    }
    if (sbm.goal_ratio - 1.0).abs() > FLAG_TOL {
        reasons.push(format!(
            "goal ratio {:.4}/{:.4} = {:.4} is not 1",
            sbm.beta_hat, sbm.alpha_hat, sbm.goal_ratio
        ));
    }
    Ok(SbmComparison {
        dmu: o.to_string(),
        rho: sbm.rho,
        e_rel: sbm.e_rel,
        e_pte: pte.efficiency,
        goal_ratio: sbm.goal_ratio,
        flagged: !reasons.is_empty(),
        reasons,
    })
}
