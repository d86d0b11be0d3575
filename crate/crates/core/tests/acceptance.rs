//! Acceptance suite: one PASS/FAIL line per criterion. Failures are always printed;
//! set `VGA_ACCEPTANCE_STRICT=1` to also turn them into a non-zero exit status.

mod common;

use std::process::ExitCode;

use vga_core::dataset::example_dataset;
use vga_core::models::{assess, boundary_efficiency, verify_duality, ProgramKind, VgaAssessment};
use vga_core::post_analysis::{decompose, geometry, vector_identity_residual, PointKind};
use vga_core::sbm::{compare_sbm_vga, solve_sbm};
use vga_core::simplex::{self, LpStatus};
use vga_core::{Dataset, Phase4Session};

const TOL: f64 = 2e-3;

/// Tolerance for a reference printed with `decimals` places when that is coarser than
/// `TOL`: half a unit in the last printed place.
fn printed(decimals: i32) -> f64 {
    TOL.max(0.5 * 10f64.powi(-decimals))
}

#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.checks += 1;
        if (got - want).abs().is_nan() || (got - want).abs() > tol {
            self.failures.push(format!("{label}: got {got:.6}, want {want} ± {tol:e}"));
        }
    }

    fn ok(&mut self, label: &str, cond: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !cond {
            self.failures.push(format!("{label}: {}", detail()));
        }
    }

    fn fail(&mut self, label: &str, err: impl std::fmt::Display) {
        self.checks += 1;
        self.failures.push(format!("{label}: {err}"));
    }
}

fn pte_reproduction() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let a = assess(&d, "K", ProgramKind::Pte).unwrap();
    c.near("delta#", a.interim.delta, 2.3010, TOL);
    c.near("t", a.t, 0.179, TOL);
    c.near("E", a.efficiency, 0.589, TOL);
    c.near("Q1", a.q[0], 0.0, TOL);
    c.near("Q2", a.q[1], 0.5334, TOL);
    c.near("P1", a.p[0], 0.0, TOL);
    c.near("P2", a.p[1], 1.7677, TOL);
    c.near("pi_B", a.intensity("B").unwrap(), 1.421, TOL);
    c.near("pi_D", a.intensity("D").unwrap(), 0.094, TOL);
    c.near("x_hat1", a.x_hat[0], 1.6, TOL);
    c.near("x_hat2", a.x_hat[1], 67.66, printed(2));
    c.near("y_hat1", a.y_hat[0], 1036.0, TOL);
    c.near("y_hat2", a.y_hat[1], 135.6, printed(1));
    c.near("Xi", decompose(&a).xi, 1.699, TOL);
    c
}

fn ste1_reproduction() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let s = Phase4Session::start(&d, "K").unwrap();
    let a = &s.phase2.assessment;
    let dec = decompose(a);
    c.near("kappa1", s.kappa1, 1.5153, TOL);
    c.near("w#", a.interim.w, 1.6362, TOL);
    c.near("gamma", a.gamma, 0.232, TOL);
    c.near("t", a.t, 0.256, TOL);
    c.near("E", a.efficiency, 0.411, TOL);
    c.near("T", dec.technical_efficiency, 1.046, TOL);
    c.near("S", dec.scale, 0.635, TOL);
    c.near("omega*", a.normalized.omega, 0.635, TOL);
    c.near("alpha_aff#", a.interim.alpha_aff, 3.905, TOL);
    c.near("beta_aff#", a.interim.beta_aff, 1.604, TOL);
    c
}

fn phase3_ranging() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let s = Phase4Session::start(&d, "K").unwrap();
    let ste1 = &s.phase2.assessment;
    let a = &s.phase3.assessment;
    let dec = decompose(a);
    c.near("kappa2", s.kappa2(), 0.5150, TOL);
    c.near("Q1", a.q[0], 0.4554, TOL);
    c.near("Q2", a.q[1], 0.2089, TOL);
    c.near("P1", a.p[0], 0.0, TOL);
    c.near("P2", a.p[1], 0.0, TOL);
    c.near("pi_B", a.intensity("B").unwrap(), 0.119, TOL);
    c.near("pi_D", a.intensity("D").unwrap(), 0.396, TOL);
    c.near("E", a.efficiency, 0.668, TOL);
    c.near("S", dec.scale, 0.421, TOL);
    c.near("Xi", dec.xi, 1.497, TOL);
    for (label, x, y) in [
        ("v1#", a.interim.v[0], ste1.interim.v[0]),
        ("v2#", a.interim.v[1], ste1.interim.v[1]),
        ("u1#", a.interim.u[0], ste1.interim.u[0]),
        ("u2#", a.interim.u[1], ste1.interim.u[1]),
        ("w#", a.interim.w, ste1.interim.w),
    ] {
        c.near(&format!("{label} equal at kappa1 and kappa2"), x, y, 1e-9);
    }
    c.ok("same peers", a.peers == ste1.peers, || format!("{:?} vs {:?}", a.peers, ste1.peers));
    c
}

fn ste3_what_if() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let mut s = Phase4Session::start(&d, "K").unwrap();
    let a = s.what_if(1.0).unwrap();
    let dec = decompose(&a);
    c.near("E", a.efficiency, 0.508, TOL);
    c.near("T", dec.technical_efficiency, 1.060, TOL);
    c.near("S", dec.scale, 0.552, TOL);
    c.near("gamma", a.gamma, 0.412, TOL);
    c.near("pi_B", a.intensity("B").unwrap(), 0.75, TOL);
    c.near("pi_D", a.intensity("D").unwrap(), 0.25, TOL);
    c.near("x_hat1", a.x_hat[0], 1.225, TOL);
    c.near("x_hat2", a.x_hat[1], 91.90, printed(2));
    c.near("y_hat1", a.y_hat[0], 1036.0, TOL);
    c.near("y_hat2", a.y_hat[1], 91.00, printed(2));
    c
}

fn sbm_comparison() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let r = solve_sbm(&d, "K").unwrap();
    let cmp = compare_sbm_vga(&d, "K").unwrap();
    c.near("rho", r.rho, 0.3893, TOL);
    c.near("E_rel", r.e_rel, 0.621, TOL);
    c.near("v.x_o", r.alpha, 1.612, TOL);
    c.near("alpha_hat", r.alpha_hat, 1.470, TOL);
    c.near("beta_hat", r.beta_hat, 1.184, TOL);
    c.ok("goal ratio differs from 1", (cmp.goal_ratio - 1.0).abs() > 1e-6, || {
        format!("{}", cmp.goal_ratio)
    });
    c.ok("flagged incomplete", cmp.flagged, || "not flagged".into());
    c.near("E_pte reported", cmp.e_pte, 0.589, TOL);
    c
}

fn certify(c: &mut Criterion, d: &Dataset, a: &VgaAssessment, tag: &str) {
    let report = verify_duality(d, a);
    for f in report.failures() {
        c.fail(&format!("{tag} {}", f.name), format!("residual {:.3e}", f.residual));
    }
    c.checks += report.checks.len();
    let dec = decompose(a);
    c.ok(&format!("{tag} 0<E<=1"), a.efficiency > 0.0 && a.efficiency <= 1.0 + 1e-9, || {
        format!("E = {}", a.efficiency)
    });
    c.ok(&format!("{tag} E=T-S"), (dec.efficiency - (dec.technical_efficiency - dec.scale)).abs() <= 1e-9, || {
        "identity broken".into()
    });
    c.ok(&format!("{tag} F=Tc+S"), (dec.inefficiency - (dec.technical_inefficiency + dec.scale)).abs() <= 1e-9, || {
        "identity broken".into()
    });
    let be = boundary_efficiency(a);
    c.ok(&format!("{tag} bE=1"), (be - 1.0).abs() <= 1e-7, || format!("bE = {be}"));
}

fn certify_all_units(c: &mut Criterion, d: &Dataset, label: &str) {
    for id in d.ids() {
        match Phase4Session::start(d, id) {
            Ok(s) => {
                certify(c, d, &s.phase1, &format!("{label}/{id}/pte"));
                certify(c, d, &s.phase2.assessment, &format!("{label}/{id}/ste1"));
            }
            Err(e) => c.fail(&format!("{label}/{id}"), e),
        }
    }
}

fn duality_suite() -> Criterion {
    let mut c = Criterion::default();
    certify_all_units(&mut c, &example_dataset(), "example");
    let mut rng = common::rng(2024);
    for k in 0..100 {
        let d = common::random_dataset(&mut rng);
        certify_all_units(&mut c, &d, &format!("random{k}"));
    }
    c
}

fn oracle_equivalence() -> Criterion {
    let mut c = Criterion::default();
    let mut rng = common::rng(99);
    for k in 0..200 {
        let lp = common::random_lp(&mut rng);
        let sol = simplex::solve(&lp).unwrap();
        match common::vertex_oracle(&lp) {
            Some(z) => c.ok(&format!("lp{k}"), sol.status == LpStatus::Optimal && (sol.objective - z).abs() <= 1e-9, || {
                format!("{:?} {} vs oracle {z}", sol.status, sol.objective)
            }),
            None => c.ok(&format!("lp{k}"), sol.status == LpStatus::Infeasible, || {
                format!("{:?} but oracle found no vertex", sol.status)
            }),
        }
    }
    c
}

fn sweep(s: &mut Phase4Session, points: usize) -> Vec<(f64, f64)> {
    let iv = s.interval();
    (0..=points)
        .map(|k| {
            let kappa = iv.min + iv.width() * k as f64 / points as f64;
            (kappa, s.what_if(kappa).map(|a| a.efficiency).unwrap_or(f64::NAN))
        })
        .collect()
}

fn monotonicity() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let mut s = Phase4Session::start(&d, "K").unwrap();
    let w = s.phase2.assessment.interim.w;
    c.ok("w*>0 for K", w > 0.0, || format!("w = {w}"));
    let curve = sweep(&mut s, 20);
    for pair in curve.windows(2) {
        let ((k0, e0), (k1, e1)) = (pair[0], pair[1]);
        c.ok(&format!("E non-increasing on [{k0:.4}, {k1:.4}]"), e1 <= e0 + 1e-9, || format!("{e0} -> {e1}"));
    }

    let mut rng = common::rng(5);
    let mut instances = 0;
    for k in 0..100 {
        let d = common::random_dataset(&mut rng);
        for id in d.ids() {
            let Ok(s) = Phase4Session::start(&d, id) else { continue };
            let w = s.phase2.assessment.interim.w;
            if w.abs() <= 1e-6 || s.interval().width() <= 1e-9 {
                continue;
            }
            instances += 1;
            let iv = s.interval();
            let e_at = |kappa: f64| {
                if (kappa - s.kappa1).abs() <= 1e-12 {
                    s.phase2.assessment.efficiency
                } else {
                    s.phase3.assessment.efficiency
                }
            };
            let rise = e_at(iv.max) - e_at(iv.min);
            c.ok(&format!("random{k}/{id} direction law"), rise * w.signum() <= 1e-9, || {
                format!("w = {w:.3e}, E({:.4}) - E({:.4}) = {rise:.3e}", iv.max, iv.min)
            });
        }
    }
    c.ok("random instances with |w*|>1e-6", instances >= 20, || format!("only {instances}"));
    c
}

fn geometry_invariants() -> Criterion {
    let mut c = Criterion::default();
    let d = example_dataset();
    let s = Phase4Session::start(&d, "K").unwrap();
    for (frame, a) in [("pte", &s.phase1), ("ste1", &s.phase2.assessment), ("ste2", &s.phase3.assessment)] {
        let g = geometry(&d, a);
        for id in ["B", "D"] {
            let p = g.point(id).unwrap();
            c.near(&format!("{frame} {id} on diagonal"), p.x - p.y, 0.0, 1e-7);
        }
        for p in g.points.iter().filter(|p| matches!(p.kind, PointKind::Dmu | PointKind::Peer | PointKind::Assessed)) {
            c.ok(&format!("{frame} {} below diagonal", p.id), p.y <= p.x + 1e-7, || format!("({}, {})", p.x, p.y));
        }
        let f = &a.normalized;
        c.near(&format!("{frame} anchor x"), g.anchor.x, (1.0 - a.gamma) * f.omega, 1e-9);
        c.near(&format!("{frame} anchor y"), g.anchor.y, -a.gamma * f.omega, 1e-9);
        c.near(&format!("{frame} vector identity"), vector_identity_residual(&g, a), 0.0, 1e-9);
    }
    let g = geometry(&d, &s.phase2.assessment);
    c.near("ste1 anchor x", g.anchor.x, 0.488, TOL);
    c.near("ste1 anchor y", g.anchor.y, -0.147, TOL);
    c.ok("ste1 anchor in fourth quadrant", g.point("AP").map(|p| p.quadrant) == Some(4), || {
        format!("{:?}", g.point("AP"))
    });
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Criterion); 9] = [
        ("PTE reproduction (o=K)", pte_reproduction),
        ("STE1 reproduction (kappa=1.5153)", ste1_reproduction),
        ("Phase 3 ranging and STE2", phase3_ranging),
        ("STE3 what-if (kappa=1)", ste3_what_if),
        ("SBM comparison", sbm_comparison),
        ("Duality suite (example + 100 random datasets)", duality_suite),
        ("Oracle equivalence (200 random LPs)", oracle_equivalence),
        ("Monotonicity and direction law", monotonicity),
        ("Geometry invariants", geometry_invariants),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let c = run();
        if c.failures.is_empty() {
            println!("PASS  {name} ({} checks)", c.checks);
        } else {
            failed += 1;
            println!("FAIL  {name} ({} of {} checks failed)", c.failures.len(), c.checks);
            for f in c.failures.iter().take(10) {
                println!("        {f}");
            }
            if c.failures.len() > 10 {
                println!("        ... {} more", c.failures.len() - 10);
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    let strict = std::env::var("VGA_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed == 0 || !strict {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
