//! Total-slack-price programs for the PTE and STE variants and the two-step
//! price normalization.
//!
//! Step I solves the slack program with the virtual goal price fixed at $1; its duals
//! are the interim prices. Step II rescales every money quantity by `t` so that the
//! (affected) virtual input of the assessed unit equals $1. Slack ratios and
//! intensities are shared by both steps.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Result, VgaError};
use crate::post_analysis::Decomposition;
use crate::simplex::{self, LinearProgram, LpError, LpSolution, LpStatus, Relation, Sense, TOLERANCES};

/// Intensities above this are treated as positive when forming the peer set.
pub const PEER_TOL: f64 = 1e-9;
/// |ω#| at or below this counts as a zero scalar price when splitting it.
const OMEGA_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "program", rename_all = "lowercase")]
pub enum ProgramKind {
    Pte,
    /// STE program with the sum-of-intensities condition `Σπ = kappa`.
    Ste { kappa: f64 },
}

impl ProgramKind {
    pub fn ste(kappa: f64) -> Result<Self> {
        if kappa.is_finite() && kappa > 0.0 {
            Ok(ProgramKind::Ste { kappa })
        } else {
            Err(VgaError::InvalidKappa(kappa))
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match *self {
            ProgramKind::Pte => None,
            ProgramKind::Ste { kappa } => Some(kappa),
        }
    }

    pub fn is_ste(&self) -> bool {
        matches!(self, ProgramKind::Ste { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ProgramKind::Pte => "pte",
            ProgramKind::Ste { .. } => "ste",
        }
    }
}

/// Step I optimum: slack ratios and intensities from the primal, interim prices from
/// the duals, all at a goal price of $1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepISolution {
    pub dmu: String,
    pub dmu_index: usize,
    pub kind: ProgramKind,
    pub tau: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub pi: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// Price of the SIC scalar; zero for PTE.
    pub w: f64,
    /// Total slack price `τ(ΣQ + ΣP)`.
    pub delta: f64,
    /// Total gap price `v·x_o − u·y_o + κw`.
    pub gap: f64,
    pub x_o: Vec<f64>,
    pub y_o: Vec<f64>,
    pub degenerate: bool,
    pub basis: Vec<usize>,
}

impl StepISolution {
    pub fn sum_q(&self) -> f64 {
        self.q.iter().sum()
    }

    pub fn sum_p(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn kappa(&self) -> f64 {
        self.kind.kappa().unwrap_or(0.0)
    }

    pub fn omega(&self) -> f64 {
        self.kappa() * self.w
    }
}

/// Money-valued quantities of one step (all in virtual $).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceFrame {
    pub tau: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub w: f64,
    /// vScalar `κw`.
    pub omega: f64,
    pub delta: f64,
    pub gap: f64,
    /// vInput `v·x_o`.
    pub alpha: f64,
    /// vOutput `u·y_o`.
    pub beta: f64,
    /// avInput `v·x_o + (1−γ)ω`.
    pub alpha_aff: f64,
    /// avOutput `u·y_o − γω`.
    pub beta_aff: f64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub alpha_hat_aff: f64,
    pub beta_hat_aff: f64,
}

struct FrameInputs<'a> {
    tau: f64,
    v: Vec<f64>,
    u: Vec<f64>,
    w: f64,
    kappa: f64,
    gamma: f64,
    slack_sum: f64,
    x_o: &'a [f64],
    y_o: &'a [f64],
    x_hat: &'a [f64],
    y_hat: &'a [f64],
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl PriceFrame {
    fn compute(f: FrameInputs<'_>) -> Self {
        let omega = f.kappa * f.w;
        let alpha = dot(&f.v, f.x_o);
        let beta = dot(&f.u, f.y_o);
        let alpha_hat = dot(&f.v, f.x_hat);
        let beta_hat = dot(&f.u, f.y_hat);
        Self {
            tau: f.tau,
            omega,
            delta: f.tau * f.slack_sum,
            gap: alpha - beta + omega,
            alpha,
            beta,
            alpha_aff: alpha + (1.0 - f.gamma) * omega,
            beta_aff: beta - f.gamma * omega,
            alpha_hat,
            beta_hat,
            alpha_hat_aff: alpha_hat + (1.0 - f.gamma) * omega,
            beta_hat_aff: beta_hat - f.gamma * omega,
            v: f.v,
            u: f.u,
            w: f.w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalUnitPrices {
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
}

/// Normalized (Step II) assessment of one DMU, carrying the Step I frame alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VgaAssessment {
    pub dmu: String,
    pub kind: ProgramKind,
    pub dmu_ids: Vec<String>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub pi: Vec<f64>,
    pub peers: Vec<String>,
    pub x_o: Vec<f64>,
    pub y_o: Vec<f64>,
    pub x_hat: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub gamma: f64,
    pub t: f64,
    pub interim: PriceFrame,
    pub normalized: PriceFrame,
    pub efficiency: f64,
    pub inefficiency: f64,
    pub decomposition: Decomposition,
    pub goal_unit_prices: GoalUnitPrices,
    pub degenerate: bool,
    pub basis: Vec<usize>,
}

impl VgaAssessment {
    pub fn kappa(&self) -> Option<f64> {
        self.kind.kappa()
    }

    pub fn tau_star(&self) -> f64 {
        self.normalized.tau
    }

    pub fn xi(&self) -> f64 {
        self.decomposition.xi
    }

    pub fn intensity(&self, id: &str) -> Option<f64> {
        self.dmu_ids.iter().position(|x| x == id).map(|j| self.pi[j])
    }

    pub fn sum_pi(&self) -> f64 {
        self.pi.iter().sum()
    }
}

/// Row index of the SIC equality in an STE slack program.
pub fn sic_row(d: &Dataset) -> usize {
    d.m() + d.s()
}

/// Slack program with variables `(π_1..π_n, Q_1..Q_m, P_1..P_s)`. Output rows keep the
/// printed orientation `−Σ y_rj π_j + P_r y_ro = −y_ro`, so their duals are the output
/// prices directly.
pub fn build_tsp(d: &Dataset, o: &str, kind: ProgramKind) -> Result<LinearProgram> {
    build_tsp_with_tau(d, o, kind, 1.0)
}

pub fn build_tsp_with_tau(d: &Dataset, o: &str, kind: ProgramKind, tau: f64) -> Result<LinearProgram> {
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
    if let ProgramKind::Ste { kappa } = kind {
        ProgramKind::ste(kappa)?;
    }

    let nv = n + m + s;
    let mut objective = vec![0.0; nv];
    objective[n..].iter_mut().for_each(|c| *c = tau);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    for i in 0..m {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[j] = d.input(i, j);
        }
        row[n + i] = dmu.inputs[i];
        lp.add_constraint(row, Relation::Eq, dmu.inputs[i]);
    }
    for r in 0..s {
        let mut row = vec![0.0; nv];
        for j in 0..n {
            row[j] = -d.output(r, j);
        }
        row[n + m + r] = dmu.outputs[r];
        lp.add_constraint(row, Relation::Eq, -dmu.outputs[r]);
    }
    if let ProgramKind::Ste { kappa } = kind {
        let mut row = vec![0.0; nv];
        row[..n].iter_mut().for_each(|a| *a = 1.0);
        lp.add_constraint(row, Relation::Eq, kappa);
    }
    Ok(lp)
}

pub fn solve_step1(d: &Dataset, o: &str, kind: ProgramKind) -> Result<StepISolution> {
    let lp = build_tsp(d, o, kind)?;
    let sol = simplex::solve(&lp)?;
    step1_from_solution(d, o, kind, &sol)
}

/// Step I from a known optimal basis, falling back to a cold solve when the basis is
/// not optimal for this program.
pub fn solve_step1_with_basis(d: &Dataset, o: &str, kind: ProgramKind, basis: &[usize]) -> Result<StepISolution> {
    let lp = build_tsp(d, o, kind)?;
    match simplex::solve_from_basis(&lp, basis) {
        Ok(sol) => step1_from_solution(d, o, kind, &sol),
        Err(LpError::BasisNotOptimal { .. }) | Err(LpError::SingularBasis) => solve_step1(d, o, kind),
        Err(e) => Err(e.into()),
    }
}

pub fn step1_from_solution(d: &Dataset, o: &str, kind: ProgramKind, sol: &LpSolution) -> Result<StepISolution> {
    let jo = d.index_of(o)?;
    let (n, m, s) = (d.n(), d.m(), d.s());
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(VgaError::Infeasible(match kind {
                ProgramKind::Pte => format!("PTE slack program for `{o}`"),
                ProgramKind::Ste { kappa } => format!("STE slack program for `{o}` with kappa={kappa}"),
            }))
        }
        LpStatus::Unbounded => {
            return Err(VgaError::Unbounded(format!(
                "slack program for `{o}` (a DMU consumes no input)"
            )))
        }
    }
    let clamp = |x: f64| if x.abs() <= TOLERANCES.feas { 0.0 } else { x };
    let pi: Vec<f64> = sol.values[..n].iter().map(|&x| clamp(x)).collect();
    let q: Vec<f64> = sol.values[n..n + m].iter().map(|&x| clamp(x)).collect();
    let p: Vec<f64> = sol.values[n + m..].iter().map(|&x| clamp(x)).collect();
    let v = sol.duals[..m].to_vec();
    let u = sol.duals[m..m + s].to_vec();
    let w = if kind.is_ste() { sol.duals[m + s] } else { 0.0 };
    let dmu = &d.dmus[jo];
    let gap = dot(&v, &dmu.inputs) - dot(&u, &dmu.outputs) + kind.kappa().unwrap_or(0.0) * w;
    Ok(StepISolution {
        dmu: o.to_string(),
        dmu_index: jo,
        kind,
        tau: 1.0,
        delta: q.iter().sum::<f64>() + p.iter().sum::<f64>(),
        q,
        p,
        pi,
        v,
        u,
        w,
        gap,
        x_o: dmu.inputs.clone(),
        y_o: dmu.outputs.clone(),
        degenerate: sol.degenerate,
        basis: sol.basis.clone(),
    })
}

/// Input share of the total slack price, used to split the scalar price ω between
/// the input and output sides. Defaults to 0.5 when ω# is zero or the unit has no slack.
pub fn compute_gamma(step1: &StepISolution) -> f64 {
    let (sq, sp) = (step1.sum_q(), step1.sum_p());
    if step1.omega().abs() <= OMEGA_ZERO || sq + sp <= TOLERANCES.feas {
        0.5
    } else {
        sq / (sq + sp)
    }
}

/// Rescales Step I so that the assessed unit's affected virtual input is $1.
pub fn normalize_step2(d: &Dataset, step1: &StepISolution, gamma: f64) -> VgaAssessment {
    let kappa = step1.kappa();
    let x_hat: Vec<f64> = step1.x_o.iter().zip(&step1.q).map(|(x, q)| x * (1.0 - q)).collect();
    let y_hat: Vec<f64> = step1.y_o.iter().zip(&step1.p).map(|(y, p)| y * (1.0 + p)).collect();
    let slack_sum = step1.sum_q() + step1.sum_p();

    let interim = PriceFrame::compute(FrameInputs {
        tau: step1.tau,
        v: step1.v.clone(),
        u: step1.u.clone(),
        w: step1.w,
        kappa,
        gamma,
        slack_sum,
        x_o: &step1.x_o,
        y_o: &step1.y_o,
        x_hat: &x_hat,
        y_hat: &y_hat,
    });
    let t = step1.tau / interim.alpha_aff;
    let normalized = PriceFrame::compute(FrameInputs {
        tau: t * step1.tau,
        v: step1.v.iter().map(|v| t * v).collect(),
        u: step1.u.iter().map(|u| t * u).collect(),
        w: t * step1.w,
        kappa,
        gamma,
        slack_sum,
        x_o: &step1.x_o,
        y_o: &step1.y_o,
        x_hat: &x_hat,
        y_hat: &y_hat,
    });

    let efficiency = normalized.beta_aff / normalized.alpha_aff;
    let decomposition = Decomposition::from_frame(&normalized, step1.kind);
    let dmu_ids: Vec<String> = d.ids().map(str::to_string).collect();
    let peers = dmu_ids
        .iter()
        .zip(&step1.pi)
        .filter(|(_, &pi)| pi > PEER_TOL)
        .map(|(id, _)| id.clone())
        .collect();
    let goal_unit_prices = GoalUnitPrices {
        inputs: step1.x_o.iter().map(|x| normalized.tau / x).collect(),
        outputs: step1.y_o.iter().map(|y| normalized.tau / y).collect(),
    };
    VgaAssessment {
        dmu: step1.dmu.clone(),
        kind: step1.kind,
        dmu_ids,
        q: step1.q.clone(),
        p: step1.p.clone(),
        pi: step1.pi.clone(),
        peers,
        x_o: step1.x_o.clone(),
        y_o: step1.y_o.clone(),
        x_hat,
        y_hat,
        gamma,
        t,
        interim,
        normalized,
        efficiency,
        inefficiency: 1.0 - efficiency,
        decomposition,
        goal_unit_prices,
        degenerate: step1.degenerate,
        basis: step1.basis.clone(),
    }
}

/// Step I, γ and Step II in one call.
pub fn assess(d: &Dataset, o: &str, kind: ProgramKind) -> Result<VgaAssessment> {
    let step1 = solve_step1(d, o, kind)?;
    Ok(assessment_from_step1(d, &step1))
}

pub fn assessment_from_step1(d: &Dataset, step1: &StepISolution) -> VgaAssessment {
    let gamma = compute_gamma(step1);
    normalize_step2(d, step1, gamma)
}

/// Targets `x̂ = x_o(1 − Q)` and `ŷ = y_o(1 + P)`.
pub fn compute_targets(a: &VgaAssessment) -> (Vec<f64>, Vec<f64>) {
    (a.x_hat.clone(), a.y_hat.clone())
}

/// Targets composed from the best peers, `Σ x_j π_j` and `Σ y_j π_j`.
pub fn peer_targets(d: &Dataset, a: &VgaAssessment) -> (Vec<f64>, Vec<f64>) {
    let x = (0..d.m())
        .map(|i| (0..d.n()).map(|j| d.input(i, j) * a.pi[j]).sum())
        .collect();
    let y = (0..d.s())
        .map(|r| (0..d.n()).map(|j| d.output(r, j) * a.pi[j]).sum())
        .collect();
    (x, y)
}

/// Affected virtual output over affected virtual input at the target; 1 on the boundary.
pub fn boundary_efficiency(a: &VgaAssessment) -> f64 {
    a.normalized.beta_hat_aff / a.normalized.alpha_hat_aff
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub checks: Vec<DualityCheck>,
}

impl DualityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &DualityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&DualityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Certifies the normalized solution against strong duality and every complementary
/// slackness condition of the program pair. Residuals are absolute, in virtual $,
/// except the target rows, which are relative to the unit's own data.
pub fn verify_duality(d: &Dataset, a: &VgaAssessment) -> DualityReport {
    let f = &a.normalized;
    let tol = TOLERANCES.cs;
    let mut checks = Vec::new();
    let mut push = |name: &str, residual: f64, tolerance: f64| {
        checks.push(DualityCheck {
            name: name.to_string(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    };

    push("strong_duality", (f.delta - f.gap).abs(), TOLERANCES.duality);

    let (px, py) = peer_targets(d, a);
    let target_residual = px
        .iter()
        .zip(&a.x_hat)
        .zip(&a.x_o)
        .chain(py.iter().zip(&a.y_hat).zip(&a.y_o))
        .map(|((peer, target), own)| (peer - target).abs() / own.max(1.0))
        .fold(0.0, f64::max);
    push("peer_targets", target_residual, tol);

    let index_slackness = px
        .iter()
        .zip(&a.x_hat)
        .zip(&f.v)
        .chain(py.iter().zip(&a.y_hat).zip(&f.u))
        .map(|((peer, target), price)| ((peer - target) * price).abs())
        .fold(0.0, f64::max);
    push("index_slackness", index_slackness, tol);

    let unit_gaps: Vec<f64> = (0..d.n())
        .map(|j| {
            let vx: f64 = (0..d.m()).map(|i| f.v[i] * d.input(i, j)).sum();
            let uy: f64 = (0..d.s()).map(|r| f.u[r] * d.output(r, j)).sum();
            vx - uy + f.w
        })
        .collect();
    let peer_gap = unit_gaps
        .iter()
        .zip(&a.pi)
        .map(|(g, pi)| (g * pi).abs())
        .fold(0.0, f64::max);
    push("peer_zero_gap", peer_gap, tol);

    let bound_slackness = f
        .v
        .iter()
        .zip(&a.x_o)
        .zip(&a.q)
        .chain(f.u.iter().zip(&a.y_o).zip(&a.p))
        .map(|((price, own), ratio)| ((price * own - f.tau) * ratio).abs())
        .fold(0.0, f64::max);
    push("binding_goal_price", bound_slackness, tol);

    let sic = match a.kind {
        ProgramKind::Pte => 0.0,
        ProgramKind::Ste { kappa } => ((a.sum_pi() - kappa) * f.w).abs(),
    };
    push("sic_slackness", sic, tol);

    let most_negative_gap = unit_gaps.iter().fold(0.0_f64, |acc, g| acc.max(-g));
    push("nonnegative_gaps", most_negative_gap, tol);

    let floor = f
        .v
        .iter()
        .zip(&a.x_o)
        .chain(f.u.iter().zip(&a.y_o))
        .fold(0.0_f64, |acc, (price, own)| acc.max(f.tau - price * own));
    push("goal_price_floor", floor, tol);

    DualityReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::example_dataset;
    use approx::assert_abs_diff_eq;

    const KAPPA1: f64 = 1.5153;

    #[test]
    fn program_shapes() {
        let d = example_dataset();
        let pte = build_tsp(&d, "K", ProgramKind::Pte).unwrap();
        assert_eq!((pte.num_vars(), pte.num_constraints()), (10, 4));
        let ste = build_tsp(&d, "K", ProgramKind::ste(KAPPA1).unwrap()).unwrap();
        assert_eq!((ste.num_vars(), ste.num_constraints()), (10, 5));
        assert_eq!(ste.constraints[4].rhs, KAPPA1);
    }

    #[test]
    fn zero_assessed_value_rejected() {
        let mut d = example_dataset();
        d.dmus[0].inputs[0] = 0.0;
        assert!(matches!(
            build_tsp(&d, "K", ProgramKind::Pte),
            Err(VgaError::ZeroAssessedValue { .. })
        ));
        assert!(matches!(ProgramKind::ste(0.0), Err(VgaError::InvalidKappa(_))));
    }

    #[test]
    fn pte_step1_for_k() {
        let d = example_dataset();
        let s1 = solve_step1(&d, "K", ProgramKind::Pte).unwrap();
        assert_abs_diff_eq!(s1.delta, 2.3010, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.q[0], 0.0, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.q[1], 0.5334, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.p[0], 0.0, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.p[1], 1.7677, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.pi[2], 1.421, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.pi[3], 0.094, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.v[0], 2.8713, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.v[1], 0.0069, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.u[0], 0.0022, epsilon = 2e-3);
        assert_abs_diff_eq!(s1.u[1], 0.0204, epsilon = 2e-3);
        assert_eq!(s1.w, 0.0);
        assert_abs_diff_eq!(s1.delta, s1.gap, epsilon = 1e-9);
    }

    #[test]
    fn gamma_rules() {
        let d = example_dataset();
        let mut s1 = solve_step1(&d, "K", ProgramKind::ste(KAPPA1).unwrap()).unwrap();
        // ω# = 0 for PTE
        assert_eq!(compute_gamma(&solve_step1(&d, "K", ProgramKind::Pte).unwrap()), 0.5);
        s1.q = vec![0.0, 0.5334];
        s1.p = vec![0.0, 1.7677];
        assert_abs_diff_eq!(compute_gamma(&s1), 0.232, epsilon = 1e-3);
        s1.q = vec![0.4554, 0.2089];
        s1.p = vec![0.0, 0.0];
        assert_abs_diff_eq!(compute_gamma(&s1), 1.0, epsilon = 1e-12);
        s1.w = 0.0;
        assert_eq!(compute_gamma(&s1), 0.5);
    }

    #[test]
    fn pte_normalization_for_k() {
        let d = example_dataset();
        let a = assess(&d, "K", ProgramKind::Pte).unwrap();
        assert_abs_diff_eq!(a.t, 0.179, epsilon = 2e-3);
        assert_abs_diff_eq!(a.normalized.gap, 0.4113, epsilon = 2e-3);
        assert_abs_diff_eq!(a.normalized.alpha, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.normalized.beta, 0.589, epsilon = 2e-3);
        assert_abs_diff_eq!(a.efficiency, 0.589, epsilon = 2e-3);
        assert_abs_diff_eq!(a.x_hat[0], 1.6, epsilon = 2e-3);
        assert_abs_diff_eq!(a.x_hat[1], 67.66, epsilon = 2e-2);
        assert_abs_diff_eq!(a.y_hat[0], 1036.0, epsilon = 2e-3);
        assert_abs_diff_eq!(a.y_hat[1], 135.6, epsilon = 2e-2);
        assert_eq!(a.peers, vec!["B".to_string(), "D".to_string()]);
        assert_abs_diff_eq!(boundary_efficiency(&a), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(a.normalized.alpha_hat, 0.905, epsilon = 2e-3);
    }

    #[test]
    fn efficient_unit_targets_itself() {
        let d = example_dataset();
        for id in ["B", "D"] {
            let a = assess(&d, id, ProgramKind::Pte).unwrap();
            assert_abs_diff_eq!(a.efficiency, 1.0, epsilon = 1e-9);
            for (t, x) in a.x_hat.iter().zip(&a.x_o).chain(a.y_hat.iter().zip(&a.y_o)) {
                assert_abs_diff_eq!(t, x, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn duality_certificate_for_k() {
        let d = example_dataset();
        let a = assess(&d, "K", ProgramKind::Pte).unwrap();
        let report = verify_duality(&d, &a);
        assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
        // Q_2 > 0 forces v_2 x_2o onto the goal price.
        assert_abs_diff_eq!(a.normalized.v[1] * 145.0, a.tau_star(), epsilon = 1e-9);
        assert_abs_diff_eq!(a.tau_star(), 0.179, epsilon = 2e-3);
    }

    #[test]
    fn tau_does_not_move_step1_primal() {
        let d = example_dataset();
        let base = simplex::solve(&build_tsp(&d, "K", ProgramKind::Pte).unwrap()).unwrap();
        for tau in [0.01, 0.179, 7.5] {
            let lp = build_tsp_with_tau(&d, "K", ProgramKind::Pte, tau).unwrap();
            let sol = simplex::solve(&lp).unwrap();
            for (a, b) in sol.values.iter().zip(&base.values) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
            assert_abs_diff_eq!(sol.objective, tau * base.objective, epsilon = 1e-9);
        }
    }
}
