//! Dense two-phase primal simplex with exact dual values and right-hand-side ranging.
//!
//! Problems handled here are tiny (a handful of rows, a few dozen columns), so the
//! solver keeps a full tableau `B⁻¹[A | I | b]`. The artificial block is never dropped:
//! its columns always hold `B⁻¹`, which is what dual extraction and ranging read.
//!
//! Rows with a negative right-hand side are negated during standardization. Every
//! value reported back (duals, reduced costs, ranges) is expressed in the orientation
//! of the rows as the caller wrote them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarSign {
    NonNegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over `n` variables: optimize `c·z` subject to row constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub signs: Vec<VarSign>,
}

impl LinearProgram {
    /// A program with the given objective and all variables nonnegative.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let signs = vec![VarSign::NonNegative; objective.len()];
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            signs,
        }
    }

    pub fn add_constraint(&mut self, coefficients: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coefficients,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_free(&mut self, var: usize) {
        self.signs[var] = VarSign::Free;
    }

    pub fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.constraints[row].rhs = rhs;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.signs.len() != n {
            return Err(LpError::InvalidProgram(format!(
                "{} sign restrictions for {} variables",
                self.signs.len(),
                n
            )));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::InvalidProgram("non-finite objective coefficient".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(LpError::InvalidProgram(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(LpError::InvalidProgram(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. Only `status` is meaningful unless the status is `Optimal`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub values: Vec<f64>,
    /// Shadow price of each row: the rate of change of the optimal objective per unit
    /// increase of that row's right-hand side, as written by the caller.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Basic column of each tableau row, in standardized column numbering.
    pub basis: Vec<usize>,
    /// Some basic variable sits at zero, so duals may not be unique.
    pub degenerate: bool,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            values: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NAN,
            basis: Vec::new(),
            degenerate: false,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `b·y`, the objective of the dual program.
    pub fn dual_objective(&self, lp: &LinearProgram) -> f64 {
        lp.constraints
            .iter()
            .zip(&self.duals)
            .map(|(row, y)| row.rhs * y)
            .sum()
    }
}

/// How far a single right-hand side may move while the current basis stays optimal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsRange {
    pub constraint: usize,
    pub allowable_decrease: f64,
    pub allowable_increase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RangeDirection {
    Decrease,
    Increase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feas: f64,
    pub duality: f64,
    pub cs: f64,
    pub pivot: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    feas: 1e-9,
    duality: 1e-7,
    cs: 1e-7,
    pivot: 1e-10,
};

const OPT_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 50_000;
/// Consecutive degenerate pivots tolerated under the largest-coefficient rule before
/// switching to Bland's rule for the rest of the phase.
const DEGENERACY_TRIP: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("invalid linear program: {0}")]
    InvalidProgram(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("iteration limit of {0} pivots reached")]
    IterationLimit(usize),
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("constraint index {0} out of range")]
    ConstraintOutOfRange(usize),
    #[error("basis is singular")]
    SingularBasis,
    #[error("basis is not optimal (primal feasible: {primal_feasible}, dual feasible: {dual_feasible})")]
    BasisNotOptimal {
        primal_feasible: bool,
        dual_feasible: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Plus(usize),
    Minus(usize),
    Slack(usize),
    Artificial(usize),
}

/// Standardized equality form `A z = b`, `z ≥ 0`, `b ≥ 0`, internal sense minimize.
#[derive(Debug, Clone)]
struct Standard {
    columns: Vec<Column>,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    /// -1 where the caller's row was negated.
    flip: Vec<f64>,
    /// +1 for minimize, -1 for maximize.
    sense_factor: f64,
    art_start: usize,
    scale: f64,
}

impl Standard {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.num_constraints();
        let sense_factor = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut columns = Vec::new();
        for (j, sign) in lp.signs.iter().enumerate() {
            columns.push(Column::Plus(j));
            if *sign == VarSign::Free {
                columns.push(Column::Minus(j));
            }
        }
        for (i, row) in lp.constraints.iter().enumerate() {
            if row.relation != Relation::Eq {
                columns.push(Column::Slack(i));
            }
        }
        let art_start = columns.len();
        columns.extend((0..m).map(Column::Artificial));

        let flip: Vec<f64> = lp
            .constraints
            .iter()
            .map(|row| if row.rhs < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let mut rows = vec![vec![0.0; columns.len()]; m];
        for (k, col) in columns.iter().enumerate() {
            match *col {
                Column::Plus(j) => {
                    for i in 0..m {
                        rows[i][k] = flip[i] * lp.constraints[i].coefficients[j];
                    }
                }
                Column::Minus(j) => {
                    for i in 0..m {
                        rows[i][k] = -flip[i] * lp.constraints[i].coefficients[j];
                    }
                }
                Column::Slack(i) => {
                    let s = match lp.constraints[i].relation {
                        Relation::Le => 1.0,
                        Relation::Ge => -1.0,
                        Relation::Eq => unreachable!(),
                    };
                    rows[i][k] = flip[i] * s;
                }
                Column::Artificial(i) => rows[i][k] = 1.0,
            }
        }
        let rhs: Vec<f64> = lp
            .constraints
            .iter()
            .zip(&flip)
            .map(|(row, f)| row.rhs * f)
            .collect();
        let cost = columns
            .iter()
            .map(|col| match *col {
                Column::Plus(j) => sense_factor * lp.objective[j],
                Column::Minus(j) => -sense_factor * lp.objective[j],
                _ => 0.0,
            })
            .collect();
        let scale = 1.0 + rhs.iter().fold(0.0_f64, |acc, b| acc.max(b.abs()));
        Self {
            columns,
            rows,
            rhs,
            cost,
            flip,
            sense_factor,
            art_start,
            scale,
        }
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.art_start
    }
}

/// Tableau `B⁻¹[A | b]` plus the reduced-cost row for the current cost vector.
#[derive(Debug, Clone)]
struct Tableau {
    t: Vec<Vec<f64>>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<f64>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn initial(std: &Standard) -> Self {
        let ncols = std.columns.len();
        let t = std
            .rows
            .iter()
            .zip(&std.rhs)
            .map(|(row, b)| {
                let mut r = row.clone();
                r.push(*b);
                r
            })
            .collect();
        let basis = (0..std.rhs.len()).map(|i| std.art_start + i).collect();
        Self {
            t,
            obj: vec![0.0; ncols + 1],
            basis,
            ncols,
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.ncols]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let mut obj = cost.to_vec();
        obj.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                for (o, a) in obj.iter_mut().zip(&self.t[i]) {
                    *o -= cb * a;
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for a in self.t[row].iter_mut() {
            *a /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (a, pr) in r.iter_mut().zip(&pivot_row) {
                    *a -= f * pr;
                }
                r[col] = 0.0;
            }
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (a, pr) in self.obj.iter_mut().zip(&pivot_row) {
                *a -= f * pr;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Primal simplex on the current cost row. Columns for which `barred` is true never enter.
    fn optimize(
        &mut self,
        barred: impl Fn(usize) -> bool,
        iterations: &mut usize,
    ) -> Result<PhaseOutcome, LpError> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if *iterations >= MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
            let entering = if bland {
                (0..self.ncols).find(|&j| !barred(j) && self.obj[j] < -OPT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.ncols {
                    let r = self.obj[j];
                    if !barred(j) && r < -OPT_TOL && best.is_none_or(|(_, b)| r < b) {
                        best = Some((j, r));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            let mut tiny_pivot = false;
            for i in 0..self.t.len() {
                let a = self.t[i][col];
                if a > TOLERANCES.pivot {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((r, best)) => {
                            let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                            let better = if tie {
                                if bland {
                                    self.basis[i] < self.basis[r]
                                } else {
                                    a > self.t[r][col]
                                }
                            } else {
                                ratio < best
                            };
                            if better {
                                Some((i, ratio))
                            } else {
                                Some((r, best))
                            }
                        }
                    };
                } else if a > 0.0 {
                    tiny_pivot = true;
                }
            }
            let Some((row, ratio)) = leave else {
                if tiny_pivot {
                    return Err(LpError::NumericalBreakdown(format!(
                        "entering column {col} has only pivots below {:e}",
                        TOLERANCES.pivot
                    )));
                }
                return Ok(PhaseOutcome::Unbounded);
            };
            if ratio <= TOLERANCES.feas {
                degenerate_run += 1;
                if degenerate_run >= DEGENERACY_TRIP {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
            *iterations += 1;
        }
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Solves `lp` from scratch with the two-phase method.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let std = Standard::build(lp);
    let mut tab = Tableau::initial(&std);
    let mut iterations = 0;

    let phase1_cost: Vec<f64> = (0..std.columns.len())
        .map(|k| if std.is_artificial(k) { 1.0 } else { 0.0 })
        .collect();
    tab.set_costs(&phase1_cost);
    tab.optimize(|_| false, &mut iterations)?;
    let infeasibility = -tab.obj[tab.ncols];
    if infeasibility > TOLERANCES.feas * std.scale {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, iterations));
    }
    drive_out_artificials(&std, &mut tab);

    tab.set_costs(&std.cost);
    match tab.optimize(|k| std.is_artificial(k), &mut iterations)? {
        PhaseOutcome::Unbounded => Ok(LpSolution::non_optimal(LpStatus::Unbounded, iterations)),
        PhaseOutcome::Optimal => Ok(extract(lp, &std, &tab, iterations)),
    }
}

/// Pivots basic artificials at zero out of the basis. Rows where no structural or
/// slack column can replace them are redundant and keep their artificial.
fn drive_out_artificials(std: &Standard, tab: &mut Tableau) {
    for i in 0..tab.basis.len() {
        if !std.is_artificial(tab.basis[i]) {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for j in 0..std.art_start {
            let a = tab.t[i][j].abs();
            if a > TOLERANCES.pivot && best.is_none_or(|(_, b)| a > b) {
                best = Some((j, a));
            }
        }
        if let Some((j, _)) = best {
            tab.pivot(i, j);
        }
    }
}

/// Rebuilds the tableau of a known basis and returns its solution, provided the basis
/// is both primal and dual feasible for `lp`.
pub fn solve_from_basis(lp: &LinearProgram, basis: &[usize]) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let std = Standard::build(lp);
    let tab = factor_basis(&std, basis)?;
    let primal_feasible = (0..tab.t.len()).all(|i| tab.rhs(i) >= -TOLERANCES.feas * std.scale);
    let dual_feasible = (0..std.art_start).all(|j| tab.obj[j] >= -OPT_TOL * 10.0);
    if !(primal_feasible && dual_feasible) {
        return Err(LpError::BasisNotOptimal {
            primal_feasible,
            dual_feasible,
        });
    }
    Ok(extract(lp, &std, &tab, 0))
}

fn factor_basis(std: &Standard, basis: &[usize]) -> Result<Tableau, LpError> {
    let m = std.rhs.len();
    if basis.len() != m || basis.iter().any(|&c| c >= std.columns.len()) {
        return Err(LpError::SingularBasis);
    }
    let mut tab = Tableau::initial(std);
    let mut assigned = vec![false; m];
    for &col in basis {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            if assigned[i] {
                continue;
            }
            let a = tab.t[i][col].abs();
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((i, a));
            }
        }
        let (row, mag) = best.ok_or(LpError::SingularBasis)?;
        if mag <= TOLERANCES.pivot {
            return Err(LpError::SingularBasis);
        }
        tab.pivot(row, col);
        assigned[row] = true;
    }
    tab.set_costs(&std.cost);
    Ok(tab)
}

fn extract(lp: &LinearProgram, std: &Standard, tab: &Tableau, iterations: usize) -> LpSolution {
    let m = lp.num_constraints();
    let mut col_values = vec![0.0; std.columns.len()];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_values[b] = tab.rhs(i);
    }
    let mut values = vec![0.0; lp.num_vars()];
    for (k, col) in std.columns.iter().enumerate() {
        match *col {
            Column::Plus(j) => values[j] += col_values[k],
            Column::Minus(j) => values[j] -= col_values[k],
            _ => {}
        }
    }

    // y = c_B B⁻¹ with B⁻¹ read from the artificial block.
    let duals: Vec<f64> = (0..m)
        .map(|k| {
            let col = std.art_start + k;
            let y: f64 = tab
                .basis
                .iter()
                .enumerate()
                .map(|(i, &b)| std.cost[b] * tab.t[i][col])
                .sum();
            std.sense_factor * std.flip[k] * y
        })
        .collect();
    let reduced_costs = (0..lp.num_vars())
        .map(|j| {
            lp.objective[j]
                - lp.constraints
                    .iter()
                    .zip(&duals)
                    .map(|(row, y)| row.coefficients[j] * y)
                    .sum::<f64>()
        })
        .collect();
    let objective = lp.objective.iter().zip(&values).map(|(c, z)| c * z).sum();
    let degenerate = (0..tab.t.len()).any(|i| tab.rhs(i).abs() <= TOLERANCES.feas * std.scale);

    LpSolution {
        status: LpStatus::Optimal,
        values,
        duals,
        reduced_costs,
        objective,
        basis: tab.basis.clone(),
        degenerate,
        iterations,
    }
}

/// Largest moves of one right-hand side that keep the basis of `sol` primal feasible.
/// Dual values are constant over the whole range.
pub fn rhs_range(lp: &LinearProgram, sol: &LpSolution, constraint: usize) -> Result<RhsRange, LpError> {
    if !sol.is_optimal() {
        return Err(LpError::NotOptimal);
    }
    if constraint >= lp.num_constraints() {
        return Err(LpError::ConstraintOutOfRange(constraint));
    }
    let std = Standard::build(lp);
    let tab = factor_basis(&std, &sol.basis)?;
    Ok(range_on(&std, &tab, constraint))
}

fn range_on(std: &Standard, tab: &Tableau, constraint: usize) -> RhsRange {
    let (decrease, increase) = blocking(std, tab, constraint);
    RhsRange {
        constraint,
        allowable_decrease: decrease.map_or(f64::INFINITY, |(_, limit)| limit),
        allowable_increase: increase.map_or(f64::INFINITY, |(_, limit)| limit),
    }
}

/// For each direction, the row that blocks first and the distance to it.
fn blocking(std: &Standard, tab: &Tableau, constraint: usize) -> (Option<(usize, f64)>, Option<(usize, f64)>) {
    let col = std.art_start + constraint;
    let eps = 1e-12;
    let mut dec: Option<(usize, f64)> = None;
    let mut inc: Option<(usize, f64)> = None;
    let consider = |slot: &mut Option<(usize, f64)>, row: usize, limit: f64, basis: &[usize]| {
        let better = match *slot {
            None => true,
            Some((r, best)) => limit < best || (limit == best && basis[row] < basis[r]),
        };
        if better {
            *slot = Some((row, limit));
        }
    };
    for i in 0..tab.t.len() {
        // Change of basic value i per unit increase of the caller's right-hand side.
        let d = std.flip[constraint] * tab.t[i][col];
        let value = tab.rhs(i).max(0.0);
        if std.is_artificial(tab.basis[i]) {
            if d.abs() > eps {
                consider(&mut dec, i, 0.0, &tab.basis);
                consider(&mut inc, i, 0.0, &tab.basis);
            }
            continue;
        }
        if d < -eps {
            consider(&mut inc, i, value / -d, &tab.basis);
        } else if d > eps {
            consider(&mut dec, i, value / d, &tab.basis);
        }
    }
    (dec, inc)
}

/// Starting from an optimal basis, performs degenerate dual-simplex exchanges until the
/// basis admits a strictly positive move of `constraint`'s right-hand side in
/// `direction`. Returns `None` when no optimal basis allows such a move, which means
/// the program turns infeasible as soon as the right-hand side moves that way.
pub fn basis_toward(
    lp: &LinearProgram,
    sol: &LpSolution,
    constraint: usize,
    direction: RangeDirection,
) -> Result<Option<LpSolution>, LpError> {
    if !sol.is_optimal() {
        return Err(LpError::NotOptimal);
    }
    if constraint >= lp.num_constraints() {
        return Err(LpError::ConstraintOutOfRange(constraint));
    }
    let std = Standard::build(lp);
    let mut tab = factor_basis(&std, &sol.basis)?;
    let zero = TOLERANCES.feas * std.scale;
    for _ in 0..MAX_ITERATIONS.min(10 * std.columns.len()) {
        let (dec, inc) = blocking(&std, &tab, constraint);
        let block = match direction {
            RangeDirection::Decrease => dec,
            RangeDirection::Increase => inc,
        };
        let row = match block {
            Some((row, limit)) if limit <= zero => row,
            _ => return Ok(Some(extract(lp, &std, &tab, 0))),
        };
        if std.is_artificial(tab.basis[row]) {
            return Ok(None);
        }
        // Basic value of `row` falls below zero when moving; it must leave. The entering
        // column keeps every reduced cost nonnegative.
        let sign = match direction {
            RangeDirection::Decrease => -1.0,
            RangeDirection::Increase => 1.0,
        };
        let falling = sign * std.flip[constraint] * tab.t[row][std.art_start + constraint] < 0.0;
        debug_assert!(falling);
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..std.art_start {
            if tab.basis.contains(&j) {
                continue;
            }
            let a = tab.t[row][j];
            if a < -TOLERANCES.pivot {
                let ratio = tab.obj[j].max(0.0) / -a;
                if entering.is_none_or(|(_, best)| ratio < best - 1e-12) {
                    entering = Some((j, ratio));
                }
            }
        }
        match entering {
            Some((j, _)) => tab.pivot(row, j),
            None => return Ok(None),
        }
    }
    Err(LpError::IterationLimit(10 * std.columns.len()))
}
