//! The four-phase procedure: PTE, STE at the PTE intensity sum, ranging of the SIC
//! scalar, and interactive selection of the final scalar.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dataset::Dataset;
use crate::error::{Result, VgaError};
use crate::models::{
    self, assess, assessment_from_step1, build_tsp, sic_row, step1_from_solution, ProgramKind, VgaAssessment,
};
use crate::post_analysis::TOL_W;
use crate::report::{to_rounded_value, AssessmentReport, SCHEMA_VERSION};
use crate::simplex::{self, basis_toward, rhs_range, LpSolution, RangeDirection};

/// An unbounded range is reported as `κ¹ ± RANGE_CAP·κ¹` and marked open.
pub const RANGE_CAP: f64 = 10.0;
/// Relative slack allowed when testing a scalar against the interval ends.
const INTERVAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaInterval {
    pub min: f64,
    pub max: f64,
    pub open_min: bool,
    pub open_max: bool,
}

impl KappaInterval {
    pub fn point(k: f64) -> Self {
        Self {
            min: k,
            max: k,
            open_min: false,
            open_max: false,
        }
    }

    pub fn contains(&self, kappa: f64) -> bool {
        let slack = INTERVAL_TOL * self.max.abs().max(1.0);
        kappa >= self.min - slack && kappa <= self.max + slack
    }

    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Report {
    pub assessment: VgaAssessment,
    /// Direction in which the selected optimal basis lets κ move.
    pub direction: Option<RangeDirection>,
    pub allowable_decrease: f64,
    pub allowable_increase: f64,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase3Report {
    pub kappa2: f64,
    /// The range ran past the cap in the improving direction.
    pub open: bool,
    pub interval: KappaInterval,
    pub assessment: VgaAssessment,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum WhatIf {
    Accepted { kappa: f64, assessment: Box<VgaAssessment> },
    Rejected { kappa: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalChoice {
    pub kappa: f64,
    pub assessment: VgaAssessment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase4Session {
    pub dataset: Dataset,
    pub o: String,
    pub excluded: BTreeSet<String>,
    pub phase1: VgaAssessment,
    pub kappa1: f64,
    pub phase2: Phase2Report,
    pub phase3: Phase3Report,
    pub what_if_log: Vec<WhatIf>,
    pub final_choice: Option<FinalChoice>,
    /// Earlier rounds, oldest first, each before its exclusion.
    pub history: Vec<Phase4Session>,
    basis: Vec<usize>,
}

/// PTE assessment and the intensity sum of its peers.
pub fn phase1(d: &Dataset, o: &str) -> Result<(VgaAssessment, f64)> {
    let a = assess(d, o, ProgramKind::Pte)?;
    let kappa1 = a.sum_pi();
    Ok((a, kappa1))
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// STE at `κ¹`. The PTE optimum is degenerate there, so several optimal bases exist
/// with different SIC prices. The basis kept is the one whose range of κ is positive,
/// the wider one if both directions are open, and the decreasing one on a tie.
pub fn phase2(d: &Dataset, o: &str, pte: &VgaAssessment, kappa1: f64) -> Result<Phase2Report> {
    let (report, _) = phase2_with_basis(d, o, pte, kappa1)?;
    Ok(report)
}

fn phase2_with_basis(d: &Dataset, o: &str, pte: &VgaAssessment, kappa1: f64) -> Result<(Phase2Report, Vec<usize>)> {
    let kind = ProgramKind::ste(kappa1)?;
    let lp = build_tsp(d, o, kind)?;
    let row = sic_row(d);
    let cold = simplex::solve(&lp)?;
    // Surface infeasibility through the model layer's typed error.
    if !cold.is_optimal() {
        step1_from_solution(d, o, kind, &cold)?;
    }
    let zero = TOLERANCES_ZERO * kappa1.max(1.0);
    let mut candidates: Vec<(RangeDirection, LpSolution, f64, f64)> = Vec::new();
    for dir in [RangeDirection::Decrease, RangeDirection::Increase] {
        if let Some(sol) = basis_toward(&lp, &cold, row, dir)? {
            let r = rhs_range(&lp, &sol, row)?;
            let width = match dir {
                RangeDirection::Decrease => r.allowable_decrease,
                RangeDirection::Increase => r.allowable_increase,
            };
            if width > zero {
                candidates.push((dir, sol, r.allowable_decrease, r.allowable_increase));
            }
        }
    }
    let width = |c: &(RangeDirection, LpSolution, f64, f64)| match c.0 {
        RangeDirection::Decrease => c.2,
        RangeDirection::Increase => c.3,
    };
    let chosen = match candidates.len() {
        0 => None,
        1 => candidates.pop(),
        _ => {
            let inc = candidates.pop().expect("two candidates");
            let dec = candidates.pop().expect("two candidates");
            if width(&inc) > width(&dec) {
                Some(inc)
            } else {
                Some(dec)
            }
        }
    };
    let (direction, sol, dec, inc) = match chosen {
        Some((dir, sol, dec, inc)) => (Some(dir), sol, dec, inc),
        None => {
            let r = rhs_range(&lp, &cold, row)?;
            (None, cold, r.allowable_decrease, r.allowable_increase)
        }
    };
    let step1 = step1_from_solution(d, o, kind, &sol)?;
    let assessment = assessment_from_step1(d, &step1);

    let slack_diff = max_abs_diff(&assessment.q, &pte.q).max(max_abs_diff(&assessment.p, &pte.p));
    let delta_diff = (assessment.interim.delta - pte.interim.delta).abs();
    let sic_diff = (assessment.sum_pi() - kappa1).abs();
    let price_diff =
        max_abs_diff(&assessment.interim.v, &pte.interim.v).max(max_abs_diff(&assessment.interim.u, &pte.interim.u));
    let tol = simplex::TOLERANCES.cs;
    let checks = vec![
        Check::new("same_slack_ratios", slack_diff <= tol, format!("max |ΔQ|,|ΔP| = {slack_diff:.3e}")),
        Check::new("same_total_slack_price", delta_diff <= tol, format!("|Δδ#| = {delta_diff:.3e}")),
        Check::new("sic_holds", sic_diff <= tol, format!("|Σπ − κ¹| = {sic_diff:.3e}")),
        Check::new(
            "prices_differ",
            price_diff > tol || assessment.interim.w.abs() <= TOL_W,
            format!("max |Δv#|,|Δu#| = {price_diff:.3e}"),
        ),
    ];
    let basis = sol.basis.clone();
    Ok((
        Phase2Report {
            assessment,
            direction,
            allowable_decrease: dec,
            allowable_increase: inc,
            checks,
        },
        basis,
    ))
}

const TOLERANCES_ZERO: f64 = 1e-9;

/// Boundary scalar from ranging the SIC row in the direction that raises efficiency.
pub fn kappa2_from_range(kappa1: f64, w: f64, allowable_decrease: f64, allowable_increase: f64) -> (f64, bool) {
    let cap = RANGE_CAP * kappa1;
    if w > TOL_W {
        if allowable_decrease.is_finite() && allowable_decrease <= cap {
            (kappa1 - allowable_decrease, false)
        } else {
            ((kappa1 - cap).max(0.0), true)
        }
    } else if w < -TOL_W {
        if allowable_increase.is_finite() && allowable_increase <= cap {
            (kappa1 + allowable_increase, false)
        } else {
            (kappa1 + cap, true)
        }
    } else {
        (kappa1, false)
    }
}

fn evaluate(d: &Dataset, o: &str, basis: &[usize], kappa: f64) -> Result<VgaAssessment> {
    let kind = ProgramKind::ste(kappa)?;
    let step1 = models::solve_step1_with_basis(d, o, kind, basis)?;
    Ok(assessment_from_step1(d, &step1))
}

pub fn phase3(d: &Dataset, o: &str, phase2: &Phase2Report, basis: &[usize], kappa1: f64) -> Result<Phase3Report> {
    let ste1 = &phase2.assessment;
    let w = ste1.interim.w;
    let (kappa2, open) = kappa2_from_range(kappa1, w, phase2.allowable_decrease, phase2.allowable_increase);
    let interval = KappaInterval {
        min: kappa1.min(kappa2),
        max: kappa1.max(kappa2),
        open_min: open && kappa2 < kappa1,
        open_max: open && kappa2 > kappa1,
    };
    let ste2 = evaluate(d, o, basis, kappa2)?;
    let tol = simplex::TOLERANCES.cs;
    let price_diff = max_abs_diff(&ste2.interim.v, &ste1.interim.v)
        .max(max_abs_diff(&ste2.interim.u, &ste1.interim.u))
        .max((ste2.interim.w - w).abs());
    let pi_diff = max_abs_diff(&ste2.pi, &ste1.pi);
    let checks = vec![
        Check::new(
            "same_peers",
            ste2.peers == ste1.peers,
            format!("{:?} vs {:?}", ste1.peers, ste2.peers),
        ),
        Check::new("same_step1_prices", price_diff <= tol, format!("max |Δ(v#,u#,w#)| = {price_diff:.3e}")),
        Check::new(
            "intensities_differ",
            pi_diff > tol || interval.width() <= tol,
            format!("max |Δπ| = {pi_diff:.3e}"),
        ),
    ];
    Ok(Phase3Report {
        kappa2,
        open,
        interval,
        assessment: ste2,
        checks,
    })
}

impl Phase4Session {
    /// Runs phases 1 to 3 for `o`.
    pub fn start(d: &Dataset, o: &str) -> Result<Self> {
        let (pte, kappa1) = phase1(d, o)?;
        let (phase2, basis) = phase2_with_basis(d, o, &pte, kappa1)?;
        let phase3 = phase3(d, o, &phase2, &basis, kappa1)?;
        Ok(Self {
            dataset: d.clone(),
            o: o.to_string(),
            excluded: BTreeSet::new(),
            phase1: pte,
            kappa1,
            phase2,
            phase3,
            what_if_log: Vec::new(),
            final_choice: None,
            history: Vec::new(),
            basis,
        })
    }

    pub fn kappa2(&self) -> f64 {
        self.phase3.kappa2
    }

    pub fn interval(&self) -> KappaInterval {
        self.phase3.interval
    }

    pub fn is_finalized(&self) -> bool {
        self.final_choice.is_some()
    }

    /// The peers a user may mark as incompatible.
    pub fn peers(&self) -> BTreeSet<String> {
        self.phase1
            .peers
            .iter()
            .chain(&self.phase2.assessment.peers)
            .filter(|p| **p != self.o)
            .cloned()
            .collect()
    }

    fn admit(&self, kappa: f64) -> Result<f64> {
        ProgramKind::ste(kappa)?;
        let iv = self.interval();
        if iv.contains(kappa) {
            // Snap rounding noise at the ends onto the interval.
            Ok(kappa.clamp(iv.min, iv.max))
        } else {
            Err(VgaError::OutsideInterval {
                kappa,
                min: iv.min,
                max: iv.max,
            })
        }
    }

    /// STE at `kappa` with the phase 2 basis. Scalars outside the interval are logged
    /// as rejected and returned as an error.
    pub fn what_if(&mut self, kappa: f64) -> Result<VgaAssessment> {
        match self.admit(kappa) {
            Ok(k) => {
                let a = evaluate(&self.dataset, &self.o, &self.basis, k)?;
                self.what_if_log.push(WhatIf::Accepted {
                    kappa,
                    assessment: Box::new(a.clone()),
                });
                Ok(a)
            }
            Err(e) => {
                if let VgaError::OutsideInterval { .. } = e {
                    self.what_if_log.push(WhatIf::Rejected {
                        kappa,
                        reason: "outside feasible interval".to_string(),
                    });
                }
                Err(e)
            }
        }
    }

    pub fn finalize(&mut self, kappa: f64) -> Result<VgaAssessment> {
        if self.is_finalized() {
            return Err(VgaError::AlreadyFinalized);
        }
        let k = self.admit(kappa)?;
        let a = evaluate(&self.dataset, &self.o, &self.basis, k)?;
        self.final_choice = Some(FinalChoice {
            kappa,
            assessment: a.clone(),
        });
        Ok(a)
    }

    /// Drops incompatible peers from the data and reruns phases 1 to 3. The current
    /// round is kept in the new session's history.
    pub fn exclude_and_rerun(&self, ids: &BTreeSet<String>) -> Result<Self> {
        if ids.is_empty() {
            return Ok(self.clone());
        }
        let peers = self.peers();
        let bad: Vec<String> = ids.iter().filter(|id| !peers.contains(*id)).cloned().collect();
        if !bad.is_empty() {
            return Err(VgaError::NotAPeer(bad));
        }
        let reduced = self.dataset.exclude(ids)?;
        let mut next = Self::start(&reduced, &self.o)?;
        next.excluded = self.excluded.union(ids).cloned().collect();
        let mut previous = self.clone();
        next.history = std::mem::take(&mut previous.history);
        next.history.push(previous);
        Ok(next)
    }

    pub fn rounds(&self) -> usize {
        self.history.len() + 1
    }

    /// JSON view of the session with full reports for each phase.
    pub fn snapshot(&self) -> Result<Value> {
        let d = &self.dataset;
        let report = |a: &VgaAssessment| to_rounded_value(&AssessmentReport::build(d, a));
        let log = self
            .what_if_log
            .iter()
            .map(|entry| match entry {
                WhatIf::Accepted { kappa, assessment } => Ok(json!({
                    "kappa": kappa,
                    "outcome": "accepted",
                    "report": report(assessment)?,
                })),
                WhatIf::Rejected { kappa, reason } => Ok(json!({
                    "kappa": kappa,
                    "outcome": "rejected",
                    "reason": reason,
                })),
            })
            .collect::<Result<Vec<_>>>()?;
        let final_block = match &self.final_choice {
            Some(f) => json!({ "kappa": f.kappa, "report": report(&f.assessment)? }),
            None => Value::Null,
        };
        let mut v = json!({
            "schema_version": SCHEMA_VERSION,
            "o": self.o,
            "excluded": self.excluded,
            "round": self.rounds(),
            "kappa1": self.kappa1,
            "kappa2": self.phase3.kappa2,
            "kappa2_open": self.phase3.open,
            "interval": self.phase3.interval,
            "direction": self.phase2.direction,
            "phase_reports": {
                "pte": report(&self.phase1)?,
                "ste1": report(&self.phase2.assessment)?,
                "ste2": report(&self.phase3.assessment)?,
            },
            "checks": {
                "ste1": self.phase2.checks,
                "ste2": self.phase3.checks,
            },
            "what_if_log": log,
            "final": final_block,
        });
        crate::report::round_value(&mut v);
        Ok(v)
    }
}
