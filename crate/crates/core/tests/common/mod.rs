#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vga_core::dataset::{Dataset, DmuRecord, IndexName};
use vga_core::simplex::{LinearProgram, Relation, Sense};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random dataset with `m, s ∈ [1, 3]`, `n ∈ [max(6, m+s+1), 12]` and values in (0.1, 100).
pub fn random_dataset(rng: &mut StdRng) -> Dataset {
    let m = rng.random_range(1..=3);
    let s = rng.random_range(1..=3);
    let n = rng.random_range(6.max(m + s + 1)..=12);
    let value = |rng: &mut StdRng| rng.random_range(0.1..100.0);
    let dmus = (0..n)
        .map(|j| DmuRecord {
            id: format!("U{j}"),
            inputs: (0..m).map(|_| value(rng)).collect(),
            outputs: (0..s).map(|_| value(rng)).collect(),
        })
        .collect();
    Dataset::new(
        (0..m).map(|i| IndexName::new(format!("x{}", i + 1), None)).collect(),
        (0..s).map(|r| IndexName::new(format!("y{}", r + 1), None)).collect(),
        dmus,
    )
    .expect("generated dataset is valid")
}

/// Small random LP in inequality form over nonnegative variables. A positive budget
/// row keeps every feasible region bounded.
pub fn random_lp(rng: &mut StdRng) -> LinearProgram {
    let n = rng.random_range(1..=4);
    let rows = rng.random_range(1..=4);
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let objective = (0..n).map(|_| rng.random_range(-5i32..=5) as f64).collect();
    let mut lp = LinearProgram::new(sense, objective);
    lp.add_constraint((0..n).map(|_| rng.random_range(1i32..=4) as f64).collect(), Relation::Le, rng.random_range(5i32..=20) as f64);
    for _ in 0..rows {
        let coefficients = (0..n).map(|_| rng.random_range(-3i32..=4) as f64).collect();
        let relation = if rng.random_bool(0.7) { Relation::Le } else { Relation::Ge };
        lp.add_constraint(coefficients, relation, rng.random_range(-4i32..=12) as f64);
    }
    lp
}

/// Solves a square system by Gaussian elimination with partial pivoting.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets(k: usize, total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, k: usize, total: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..total {
            cur.push(i);
            rec(i + 1, k, total, cur, out);
            cur.pop();
        }
    }
    rec(0, k, total, &mut cur, &mut out);
    out
}

/// Optimal objective by enumerating every vertex of a bounded inequality-form LP, or
/// `None` when no vertex is feasible.
pub fn vertex_oracle(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    // Every bound as a row `a·x ≤ b`, nonnegativity included.
    let mut rows: Vec<(Vec<f64>, f64)> = lp
        .constraints
        .iter()
        .map(|c| match c.relation {
            Relation::Le | Relation::Eq => (c.coefficients.clone(), c.rhs),
            Relation::Ge => (c.coefficients.iter().map(|a| -a).collect(), -c.rhs),
        })
        .collect();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        rows.push((a, 0.0));
    }
    let mut best: Option<f64> = None;
    for active in subsets(n, rows.len()) {
        let a = active.iter().map(|&k| rows[k].0.clone()).collect();
        let b = active.iter().map(|&k| rows[k].1).collect();
        let Some(x) = solve_square(a, b) else { continue };
        let feasible = rows
            .iter()
            .all(|(a, b)| a.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= b + 1e-9);
        if !feasible {
            continue;
        }
        let z: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
        best = Some(match (best, lp.sense) {
            (None, _) => z,
            (Some(b), Sense::Maximize) => b.max(z),
            (Some(b), Sense::Minimize) => b.min(z),
        });
    }
    best
}
