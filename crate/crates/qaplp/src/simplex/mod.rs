//! Two-phase revised simplex for equality-form LPs with nonnegative
//! variables (`min c'x : Ax = b, x >= 0`).
//!
//! The basis inverse is kept as a sparse LU factorization plus a
//! product-form eta file, refactorized periodically. Pricing is devex
//! with an automatic fallback to Bland's rule after long degenerate
//! stalls. Phase one minimizes the sum of artificial variables; phase
//! two keeps leftover artificials pinned at zero by letting them leave
//! the basis at a zero-length step whenever a pivot would increase them.
//!
//! The same engine can be pointed at the dual: [`dual_model`] transposes
//! the problem (free duals split into signed pairs, one slack per
//! original column) and [`solve`] maps the answer back.

pub mod lu;

use std::path::Path;
use std::time::{Duration, Instant};

use crate::model::{Row, RowFamily, SparseModel};
use crate::{Error, Result};
use lu::LuFactors;

/// Which side of the problem the engine should run on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveForm {
    Primal,
    Dual,
}

/// Entering-variable selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Devex pricing with a Bland fallback on degenerate stalls.
    Devex,
    /// Bland's rule throughout (slow but cycle-free).
    Bland,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub form: SolveForm,
    pub pivot_rule: PivotRule,
    /// Primal feasibility / dual optimality tolerance.
    pub tol_feas: f64,
    /// Smallest magnitude accepted as a pivot element.
    pub tol_pivot: f64,
    pub iter_limit: usize,
    /// Refactorize after this many eta updates.
    pub refactor_every: usize,
    /// Structural columns to crash into the starting basis (for example
    /// the support of a known feasible 0/1 point).
    pub initial_basis: Option<Vec<usize>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            form: SolveForm::Primal,
            pivot_rule: PivotRule::Devex,
            tol_feas: 1e-7,
            tol_pivot: 1e-9,
            iter_limit: 200_000,
            refactor_every: 100,
            initial_basis: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: SolveStatus,
    /// Structural variable values.
    pub primal: Vec<f64>,
    pub objective: f64,
    /// One dual multiplier per constraint row.
    pub duals: Vec<f64>,
    /// Final basis (extended column index per basis slot; indices past
    /// the structural count are artificials). `None` when the solution
    /// was mapped back from the dual form.
    pub basis: Option<Vec<usize>>,
    pub iterations: usize,
    pub phase1_iterations: usize,
    pub wall: Duration,
}

struct Eta {
    r: usize,
    diag: f64,
    /// entries of the pivot column excluding position `r`
    col: Vec<(usize, f64)>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Core<'a> {
    m: usize,
    nstruct: usize,
    cols: Vec<Vec<(usize, f64)>>,
    art_cols: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    /// per-row sign flip applied so every right-hand side is nonnegative
    row_sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    x_b: Vec<f64>,
    factors: LuFactors,
    etas: Vec<Eta>,
    eta_nnz: usize,
    iterations: usize,
    opts: &'a SolveOptions,
}

impl<'a> Core<'a> {
    fn new(model: &SparseModel, opts: &'a SolveOptions) -> Core<'a> {
        let m = model.num_rows();
        let nstruct = model.num_cols();
        let row_sign: Vec<f64> = model
            .rows
            .iter()
            .map(|r| if r.rhs < 0.0 { -1.0 } else { 1.0 })
            .collect();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nstruct];
        for (ri, row) in model.rows.iter().enumerate() {
            for &(c, v) in &row.entries {
                cols[c].push((ri, v * row_sign[ri]));
            }
        }
        let art_cols: Vec<Vec<(usize, f64)>> = (0..m).map(|r| vec![(r, 1.0)]).collect();
        let b: Vec<f64> = model.rows.iter().map(|r| r.rhs.abs()).collect();
        let basis: Vec<usize> = (0..m).map(|r| nstruct + r).collect();
        let mut in_basis = vec![false; nstruct + m];
        for &j in &basis {
            in_basis[j] = true;
        }
        let factors = LuFactors::factorize(&art_cols, opts.tol_pivot);
        let x_b = factors.ftran(&b);
        Core {
            m,
            nstruct,
            cols,
            art_cols,
            b,
            row_sign,
            basis,
            in_basis,
            x_b,
            factors,
            etas: Vec::new(),
            eta_nnz: 0,
            iterations: 0,
            opts,
        }
    }

    fn ext_col(&self, j: usize) -> &[(usize, f64)] {
        if j < self.nstruct {
            &self.cols[j]
        } else {
            &self.art_cols[j - self.nstruct]
        }
    }

    fn ftran_full(&self, b_rows: &[f64]) -> Vec<f64> {
        let mut v = self.factors.ftran(b_rows);
        for eta in &self.etas {
            let t = v[eta.r] / eta.diag;
            if t != 0.0 {
                for &(i, a) in &eta.col {
                    v[i] -= a * t;
                }
            }
            v[eta.r] = t;
        }
        v
    }

    fn btran_full(&self, c_slots: &[f64]) -> Vec<f64> {
        let mut y = c_slots.to_vec();
        for eta in self.etas.iter().rev() {
            let mut s = 0.0;
            for &(i, a) in &eta.col {
                s += a * y[i];
            }
            y[eta.r] = (y[eta.r] - s) / eta.diag;
        }
        self.factors.btran(&y)
    }

    fn ftran_col(&self, j: usize) -> Vec<f64> {
        let mut dense = vec![0.0; self.m];
        for &(r, v) in self.ext_col(j) {
            dense[r] = v;
        }
        self.ftran_full(&dense)
    }

    fn refactorize(&mut self) {
        self.etas.clear();
        self.eta_nnz = 0;
        let cols: Vec<Vec<(usize, f64)>> =
            self.basis.iter().map(|&j| self.ext_col(j).to_vec()).collect();
        self.factors = LuFactors::factorize(&cols, self.opts.tol_pivot);
        let repairs: Vec<(usize, usize)> = self.factors.repaired_slots().to_vec();
        for (slot, row) in repairs {
            let old = self.basis[slot];
            self.in_basis[old] = false;
            self.basis[slot] = self.nstruct + row;
            self.in_basis[self.nstruct + row] = true;
        }
        self.x_b = self.ftran_full(&self.b.clone());
    }

    fn reduced_cost(&self, j: usize, y: &[f64], costs: &[f64]) -> f64 {
        let mut d = costs[j];
        for &(r, v) in self.ext_col(j) {
            d -= y[r] * v;
        }
        d
    }

    /// entering column, or `None` at optimality
    fn price(&self, y: &[f64], costs: &[f64], bland: bool, weights: &[f64]) -> Option<usize> {
        let tol = self.opts.tol_feas;
        if bland {
            (0..self.nstruct)
                .find(|&j| !self.in_basis[j] && self.reduced_cost(j, y, costs) < -tol)
        } else {
            let mut best = None;
            let mut best_score = 0.0;
            for j in 0..self.nstruct {
                if self.in_basis[j] {
                    continue;
                }
                let d = self.reduced_cost(j, y, costs);
                if d < -tol {
                    let score = d * d / weights[j];
                    if score > best_score {
                        best_score = score;
                        best = Some(j);
                    }
                }
            }
            best
        }
    }

    /// leaving slot and step length, or `None` when unbounded
    fn ratio_test(&self, alpha: &[f64], phase2: bool, bland: bool) -> Option<(usize, f64)> {
        let tol_p = self.opts.tol_pivot;
        let tol_f = self.opts.tol_feas;
        let mut best: Option<(usize, f64, f64)> = None; // slot, ratio, |alpha|
        for slot in 0..self.m {
            let a = alpha[slot];
            let ratio = if a > tol_p {
                self.x_b[slot].max(0.0) / a
            } else if phase2
                && a < -tol_p
                && self.basis[slot] >= self.nstruct
                && self.x_b[slot] <= tol_f
            {
                // a pivot here would lift an artificial off zero; instead
                // let the artificial leave at a zero-length step
                0.0
            } else {
                continue;
            };
            match best {
                None => best = Some((slot, ratio, a.abs())),
                Some((bslot, bratio, babs)) => {
                    let better = if ratio < bratio - 1e-10 {
                        true
                    } else if ratio > bratio + 1e-10 {
                        false
                    } else if bland {
                        self.basis[slot] < self.basis[bslot]
                    } else {
                        a.abs() > babs
                    };
                    if better {
                        best = Some((slot, ratio, a.abs()));
                    }
                }
            }
        }
        best.map(|(slot, ratio, _)| (slot, ratio))
    }

    fn run_phase(&mut self, costs: &[f64], phase2: bool) -> PhaseEnd {
        let mut weights = vec![1.0f64; self.nstruct];
        let mut bland = self.opts.pivot_rule == PivotRule::Bland;
        let forced_bland = bland;
        let mut stall = 0usize;
        loop {
            if self.iterations >= self.opts.iter_limit {
                return PhaseEnd::IterationLimit;
            }
            let c_b: Vec<f64> = self.basis.iter().map(|&j| costs[j]).collect();
            let y = self.btran_full(&c_b);
            let Some(q) = self.price(&y, costs, bland, &weights) else {
                return PhaseEnd::Optimal;
            };
            let alpha = self.ftran_col(q);
            let Some((leave, theta)) = self.ratio_test(&alpha, phase2, bland) else {
                return PhaseEnd::Unbounded;
            };

            if !bland {
                self.update_devex_weights(&mut weights, q, leave, &alpha);
            }

            // pivot
            for slot in 0..self.m {
                if alpha[slot] != 0.0 {
                    self.x_b[slot] -= theta * alpha[slot];
                }
            }
            self.x_b[leave] = theta;
            let out = self.basis[leave];
            self.in_basis[out] = false;
            self.in_basis[q] = true;
            self.basis[leave] = q;
            let diag = alpha[leave];
            let col: Vec<(usize, f64)> = alpha
                .iter()
                .enumerate()
                .filter(|&(i, &v)| i != leave && v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect();
            self.eta_nnz += col.len() + 1;
            self.etas.push(Eta { r: leave, diag, col });
            self.iterations += 1;

            if theta <= 1e-10 {
                stall += 1;
                if stall > 1000 {
                    bland = true;
                }
            } else {
                stall = 0;
                if !forced_bland {
                    bland = false;
                }
            }

            if self.etas.len() >= self.opts.refactor_every
                || self.eta_nnz > 8 * self.factors.nnz() + 4 * self.m
            {
                self.refactorize();
            }
        }
    }

    fn update_devex_weights(&self, weights: &mut [f64], q: usize, leave: usize, alpha: &[f64]) {
        let alpha_q = alpha[leave];
        if alpha_q == 0.0 {
            return;
        }
        let gamma = weights[q];
        if gamma > 1e12 {
            for w in weights.iter_mut() {
                *w = 1.0;
            }
            return;
        }
        let mut e = vec![0.0; self.m];
        e[leave] = 1.0;
        let rho = self.btran_full(&e);
        for j in 0..self.nstruct {
            if self.in_basis[j] || j == q {
                continue;
            }
            let mut aj = 0.0;
            for &(r, v) in &self.cols[j] {
                aj += rho[r] * v;
            }
            if aj != 0.0 {
                let cand = (aj / alpha_q) * (aj / alpha_q) * gamma;
                if cand > weights[j] {
                    weights[j] = cand;
                }
            }
        }
        let out = self.basis[leave];
        if out < self.nstruct {
            weights[out] = (gamma / (alpha_q * alpha_q)).max(1.0);
        }
    }

    /// Pivot the given structural columns into artificial basis slots
    /// before phase one, falling back to the all-artificial start if the
    /// crashed basis is not primal feasible.
    fn crash(&mut self, columns: &[usize]) {
        for &q in columns {
            if q >= self.nstruct || self.in_basis[q] {
                continue;
            }
            let alpha = self.ftran_col(q);
            let mut best: Option<(usize, f64)> = None;
            for slot in 0..self.m {
                if self.basis[slot] >= self.nstruct {
                    let a = alpha[slot].abs();
                    if a > 1e-7 && best.map_or(true, |(_, ba)| a > ba) {
                        best = Some((slot, a));
                    }
                }
            }
            let Some((slot, _)) = best else { continue };
            let out = self.basis[slot];
            self.in_basis[out] = false;
            self.in_basis[q] = true;
            self.basis[slot] = q;
            let diag = alpha[slot];
            let col: Vec<(usize, f64)> = alpha
                .iter()
                .enumerate()
                .filter(|&(i, &v)| i != slot && v != 0.0)
                .map(|(i, &v)| (i, v))
                .collect();
            self.eta_nnz += col.len() + 1;
            self.etas.push(Eta { r: slot, diag, col });
        }
        self.refactorize();
        if self.x_b.iter().any(|&v| v < -self.opts.tol_feas) {
            // crashed basis is infeasible for phase one; start over
            self.basis = (0..self.m).map(|r| self.nstruct + r).collect();
            for f in self.in_basis.iter_mut() {
                *f = false;
            }
            for &j in &self.basis {
                self.in_basis[j] = true;
            }
            self.refactorize();
        }
    }
}

/// Solve `model`, dispatching on [`SolveOptions::form`].
pub fn solve(model: &SparseModel, opts: &SolveOptions) -> Result<LpSolution> {
    match opts.form {
        SolveForm::Primal => solve_primal(model, opts),
        SolveForm::Dual => {
            let dual = dual_model(model);
            let mut dopts = opts.clone();
            dopts.form = SolveForm::Primal;
            // the slack columns are a ready-made basis, and it is feasible
            // outright whenever all objective coefficients are nonnegative
            let m = model.num_rows();
            dopts.initial_basis = Some((2 * m..2 * m + model.num_cols()).collect());
            let dsol = solve_primal(&dual, &dopts)?;
            let m = model.num_rows();
            let n = model.num_cols();
            let primal: Vec<f64> = (0..n).map(|j| -dsol.duals[j]).collect();
            let duals: Vec<f64> = (0..m).map(|i| dsol.primal[i] - dsol.primal[m + i]).collect();
            let status = match dsol.status {
                SolveStatus::Optimal => SolveStatus::Optimal,
                SolveStatus::Unbounded => SolveStatus::Infeasible,
                SolveStatus::Infeasible => SolveStatus::Unbounded,
                SolveStatus::IterationLimit => SolveStatus::IterationLimit,
            };
            Ok(LpSolution {
                status,
                primal,
                objective: -dsol.objective,
                duals,
                basis: None,
                iterations: dsol.iterations,
                phase1_iterations: dsol.phase1_iterations,
                wall: dsol.wall,
            })
        }
    }
}

/// Solve `model` as given with the primal simplex.
pub fn solve_primal(model: &SparseModel, opts: &SolveOptions) -> Result<LpSolution> {
    let start = Instant::now();
    let mut core = Core::new(model, opts);
    if let Some(cols) = &opts.initial_basis {
        core.crash(cols);
    }

    let nstruct = core.nstruct;
    let m = core.m;
    let mut phase1_costs = vec![0.0; nstruct + m];
    for c in phase1_costs[nstruct..].iter_mut() {
        *c = 1.0;
    }
    let end1 = core.run_phase(&phase1_costs, false);
    let phase1_iterations = core.iterations;
    let finish = |core: &Core, status: SolveStatus| -> LpSolution {
        let mut primal = vec![0.0; nstruct];
        for slot in 0..m {
            if core.basis[slot] < nstruct {
                let v = core.x_b[slot];
                primal[core.basis[slot]] = if v.abs() < 1e-12 { 0.0 } else { v };
            }
        }
        let objective: f64 = model.cost.iter().zip(&primal).map(|(c, x)| c * x).sum();
        let real_cb: Vec<f64> = core
            .basis
            .iter()
            .map(|&j| if j < nstruct { model.cost[j] } else { 0.0 })
            .collect();
        let mut duals = core.btran_full(&real_cb);
        for (y, s) in duals.iter_mut().zip(&core.row_sign) {
            *y *= s;
        }
        LpSolution {
            status,
            primal,
            objective,
            duals,
            basis: Some(core.basis.clone()),
            iterations: core.iterations,
            phase1_iterations,
            wall: start.elapsed(),
        }
    };

    match end1 {
        PhaseEnd::IterationLimit => return Ok(finish(&core, SolveStatus::IterationLimit)),
        PhaseEnd::Unbounded => {
            // phase one is bounded below by zero
            return Err(Error::Solver("phase one reported unbounded".into()));
        }
        PhaseEnd::Optimal => {}
    }
    let infeas: f64 = (0..m)
        .filter(|&s| core.basis[s] >= nstruct)
        .map(|s| core.x_b[s].max(0.0))
        .sum();
    if infeas > opts.tol_feas * 10.0 {
        return Ok(finish(&core, SolveStatus::Infeasible));
    }

    let mut phase2_costs = vec![0.0; nstruct + m];
    phase2_costs[..nstruct].copy_from_slice(&model.cost);
    let end2 = core.run_phase(&phase2_costs, true);
    let status = match end2 {
        PhaseEnd::Optimal => SolveStatus::Optimal,
        PhaseEnd::Unbounded => SolveStatus::Unbounded,
        PhaseEnd::IterationLimit => SolveStatus::IterationLimit,
    };
    Ok(finish(&core, status))
}

/// True when every coordinate is within `tol` of an integer.
pub fn vertex_is_integral(x: &[f64], tol: f64) -> bool {
    x.iter().all(|&v| (v - v.round()).abs() <= tol)
}

/// Independent quality check of a solution: row residuals and the duality
/// gap via compensated summation, and the worst dual violation.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub max_primal_residual: f64,
    pub duality_gap: f64,
    pub max_dual_violation: f64,
    pub objective: f64,
}

fn neumaier_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in it {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

pub fn verify_solution(model: &SparseModel, sol: &LpSolution) -> VerifyReport {
    let x = &sol.primal;
    let y = &sol.duals;
    let mut max_res = 0.0f64;
    for row in &model.rows {
        let lhs = neumaier_sum(row.entries.iter().map(|&(c, v)| v * x[c]));
        max_res = max_res.max((lhs - row.rhs).abs());
    }
    let objective = neumaier_sum(model.cost.iter().zip(x).map(|(c, v)| c * v));
    let by = neumaier_sum(model.rows.iter().zip(y).map(|(r, yv)| r.rhs * yv));
    let mut max_viol = 0.0f64;
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_cols()];
    for (ri, row) in model.rows.iter().enumerate() {
        for &(c, v) in &row.entries {
            cols[c].push((ri, v));
        }
    }
    for (j, col) in cols.iter().enumerate() {
        let d = model.cost[j] - neumaier_sum(col.iter().map(|&(r, v)| y[r] * v));
        if -d > max_viol {
            max_viol = -d;
        }
    }
    VerifyReport {
        max_primal_residual: max_res,
        duality_gap: (objective - by).abs(),
        max_dual_violation: max_viol,
        objective,
    }
}

/// The transposed problem: one equality row per original column, a
/// split pair of signed columns per original row, and one slack per new
/// row. Minimizing it solves `max b'y : A'y <= c`; the original
/// variables reappear (negated) as the duals of the new rows.
pub fn dual_model(model: &SparseModel) -> SparseModel {
    let m = model.num_rows();
    let n = model.num_cols();
    let mut col_names = Vec::with_capacity(2 * m + n);
    let mut cost = Vec::with_capacity(2 * m + n);
    for row in &model.rows {
        col_names.push(format!("YPOS_{}", row.name));
        cost.push(-row.rhs);
    }
    for row in &model.rows {
        col_names.push(format!("YNEG_{}", row.name));
        cost.push(row.rhs);
    }
    for name in &model.col_names {
        col_names.push(format!("SLK_{name}"));
        cost.push(0.0);
    }
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (ri, row) in model.rows.iter().enumerate() {
        for &(c, v) in &row.entries {
            entries[c].push((ri, v));
            entries[c].push((m + ri, -v));
        }
    }
    let rows: Vec<Row> = entries
        .into_iter()
        .enumerate()
        .map(|(j, mut ent)| {
            ent.push((2 * m + j, 1.0));
            ent.sort_unstable_by_key(|&(c, _)| c);
            Row {
                name: format!("DC_{}", model.col_names[j]),
                family: RowFamily::Other,
                entries: ent,
                rhs: model.cost[j],
            }
        })
        .collect();
    SparseModel {
        name: format!("{}_DUAL", model.name),
        col_names,
        cost,
        rows,
    }
}

/// Outcome of an external solver run on an exported file.
#[derive(Debug, Clone, serde::Deserialize)]
pub struct ExternalCheck {
    pub status: String,
    pub objective: Option<f64>,
}

/// Export `model` and solve it with the helper script (an independent
/// LP code); used to cross-check the built-in engine.
pub fn external_cross_check(model: &SparseModel, script: &Path) -> Result<ExternalCheck> {
    let path = std::env::temp_dir().join(format!(
        "qaplp_check_{}_{}.mps",
        std::process::id(),
        model.name
    ));
    std::fs::write(&path, crate::mps::write_mps(model))?;
    let out = std::process::Command::new("python3").arg(script).arg(&path).output();
    let _ = std::fs::remove_file(&path);
    let out = out.map_err(|e| Error::Solver(format!("external solver launch failed: {e}")))?;
    if !out.status.success() {
        return Err(Error::Solver(format!(
            "external solver failed: {}",
            String::from_utf8_lossy(&out.stderr)
        )));
    }
    serde_json::from_slice(&out.stdout)
        .map_err(|e| Error::Solver(format!("external solver output unreadable: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexer::VariableSpace;
    use crate::instance::{CostMode, QapInstance};
    use crate::model::{build_model, embed, BuildOptions};

    fn row(name: &str, entries: Vec<(usize, f64)>, rhs: f64) -> Row {
        Row {
            name: name.into(),
            family: RowFamily::Other,
            entries,
            rhs,
        }
    }

    /// classic textbook LP in equality form (slacks appended):
    /// max 3a + 5b st a <= 4, 2b <= 12, 3a + 2b <= 18 -> opt (2, 6), 36
    fn textbook() -> SparseModel {
        SparseModel {
            name: "TEXTBOOK".into(),
            col_names: ["A", "B", "S1", "S2", "S3"].map(String::from).to_vec(),
            cost: vec![-3.0, -5.0, 0.0, 0.0, 0.0],
            rows: vec![
                row("R1", vec![(0, 1.0), (2, 1.0)], 4.0),
                row("R2", vec![(1, 2.0), (3, 1.0)], 12.0),
                row("R3", vec![(0, 3.0), (1, 2.0), (4, 1.0)], 18.0),
            ],
        }
    }

    #[test]
    fn textbook_optimum() {
        let model = textbook();
        let sol = solve(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - -36.0).abs() < 1e-9);
        assert!((sol.primal[0] - 2.0).abs() < 1e-9);
        assert!((sol.primal[1] - 6.0).abs() < 1e-9);
        let rep = verify_solution(&model, &sol);
        assert!(rep.max_primal_residual < 1e-9);
        assert!(rep.duality_gap < 1e-9);
        assert!(rep.max_dual_violation < 1e-9);
    }

    #[test]
    fn textbook_with_bland_rule() {
        let model = textbook();
        let opts = SolveOptions {
            pivot_rule: PivotRule::Bland,
            ..SolveOptions::default()
        };
        let sol = solve(&model, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - -36.0).abs() < 1e-9);
    }

    #[test]
    fn textbook_dual_form_agrees() {
        let model = textbook();
        let opts = SolveOptions {
            form: SolveForm::Dual,
            ..SolveOptions::default()
        };
        let sol = solve(&model, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - -36.0).abs() < 1e-7);
        assert!((sol.primal[0] - 2.0).abs() < 1e-7);
        assert!((sol.primal[1] - 6.0).abs() < 1e-7);
        assert!(sol.basis.is_none());
    }

    #[test]
    fn infeasible_detected() {
        let model = SparseModel {
            name: "INF".into(),
            col_names: vec!["X".into(), "Y".into()],
            cost: vec![1.0, 1.0],
            rows: vec![
                row("R1", vec![(0, 1.0), (1, 1.0)], 1.0),
                row("R2", vec![(0, 1.0), (1, 1.0)], 3.0),
            ],
        };
        let sol = solve(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let model = SparseModel {
            name: "UNB".into(),
            col_names: vec!["X".into(), "Y".into()],
            cost: vec![-1.0, 0.0],
            rows: vec![row("R1", vec![(0, 1.0), (1, -1.0)], 0.0)],
        };
        let sol = solve(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // multiple rows binding at the origin vertex
        let model = SparseModel {
            name: "DEGEN".into(),
            col_names: ["X", "Y", "S1", "S2", "S3"].map(String::from).to_vec(),
            cost: vec![-1.0, -1.0, 0.0, 0.0, 0.0],
            rows: vec![
                row("R1", vec![(0, 1.0), (2, 1.0)], 1.0),
                row("R2", vec![(0, 1.0), (1, 1.0), (3, 1.0)], 1.0),
                row("R3", vec![(0, 1.0), (1, 2.0), (4, 1.0)], 1.0),
            ],
        };
        let sol = solve(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - -1.0).abs() < 1e-9);
    }

    fn lp_of_instance(n: usize, seed: u64, cuts: bool) -> (QapInstance, VariableSpace, SparseModel) {
        let inst = QapInstance::generate_random(n, CostMode::WithOpcost, seed, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let model = build_model(&inst, &space, BuildOptions { valid_cuts: cuts }).unwrap();
        (inst, space, model)
    }

    #[test]
    fn uniform_relaxation_values() {
        for (n, expect) in [(3usize, 3000.0), (4, 6000.0)] {
            for cuts in [false, true] {
                let inst = QapInstance::make_uniform(n, 50.0, 10.0).unwrap();
                let space = VariableSpace::build(n).unwrap();
                let model = build_model(&inst, &space, BuildOptions { valid_cuts: cuts }).unwrap();
                let sol = solve(&model, &SolveOptions::default()).unwrap();
                assert_eq!(sol.status, SolveStatus::Optimal, "n={n} cuts={cuts}");
                assert!((sol.objective - expect).abs() < 1e-6, "n={n} cuts={cuts} got {}", sol.objective);
            }
        }
    }

    #[test]
    fn relaxation_bounds_brute_force_and_often_matches() {
        for seed in 0..5u64 {
            let (inst, _, model) = lp_of_instance(4, seed, true);
            let sol = solve(&model, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            let (_, opt) = inst.brute_force_optimum().unwrap();
            assert!(sol.objective <= opt + 1e-6, "seed={seed}: lp {} > opt {opt}", sol.objective);
            let rep = verify_solution(&model, &sol);
            assert!(rep.max_primal_residual < 1e-6, "seed={seed}");
            assert!(rep.duality_gap < 1e-5 * (1.0 + opt.abs()), "seed={seed}");
            assert!(rep.max_dual_violation < 1e-6, "seed={seed}");
        }
    }

    #[test]
    fn crash_basis_from_embedding_gives_same_optimum() {
        let (inst, space, model) = lp_of_instance(4, 3, true);
        let cold = solve(&model, &SolveOptions::default()).unwrap();
        let (best, _) = inst.brute_force_optimum().unwrap();
        let emb = embed(&space, &best).unwrap();
        let warm_opts = SolveOptions {
            initial_basis: Some(emb.ones().to_vec()),
            ..SolveOptions::default()
        };
        let warm = solve(&model, &warm_opts).unwrap();
        assert_eq!(warm.status, SolveStatus::Optimal);
        assert!((warm.objective - cold.objective).abs() < 1e-6);
    }

    #[test]
    fn dual_form_matches_primal_on_lifted_model() {
        let (_, _, model) = lp_of_instance(3, 7, true);
        let p = solve(&model, &SolveOptions::default()).unwrap();
        let d = solve(
            &model,
            &SolveOptions {
                form: SolveForm::Dual,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(p.status, SolveStatus::Optimal);
        assert_eq!(d.status, SolveStatus::Optimal);
        assert!((p.objective - d.objective).abs() < 1e-6);
        let rep = verify_solution(&model, &d);
        assert!(rep.max_primal_residual < 1e-6);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let (_, _, model) = lp_of_instance(4, 1, true);
        let opts = SolveOptions {
            iter_limit: 3,
            ..SolveOptions::default()
        };
        let sol = solve(&model, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::IterationLimit);
    }

    #[test]
    fn integrality_detector() {
        assert!(vertex_is_integral(&[0.0, 1.0, 2.0000000001], 1e-6));
        assert!(!vertex_is_integral(&[0.5], 1e-6));
        assert!(vertex_is_integral(&[], 1e-6));
    }

    #[test]
    fn duals_satisfy_strong_duality_on_random_lifted_models() {
        for seed in 10..14u64 {
            let (_, _, model) = lp_of_instance(3, seed, false);
            let sol = solve(&model, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            let by: f64 = model.rows.iter().zip(&sol.duals).map(|(r, y)| r.rhs * y).sum();
            assert!((by - sol.objective).abs() < 1e-6, "seed={seed}");
        }
    }
}
