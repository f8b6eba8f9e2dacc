//! Assembly of the equality-constrained LP over the lifted variable space:
//! objective coefficients, the constraint families, optional valid-cut
//! rows, and 0/1 embeddings of matchings.
//!
//! Constraint families (names used in row tags and exports):
//!   F1   - all flow starts at stage one (the single rhs-1 row);
//!   F2   - every later arc's flow equals its mass paired with stage one;
//!   F3   - node balance between consecutive stages;
//!   F4   - per-arc layer balance of each free level across stages;
//!   F5   - pair mass equals the triple marginal over the later free stage;
//!   F6   - pair mass equals the triple marginal over the earlier free stage;
//!   F7   - pair mass equals the triple marginal over the middle free stage;
//!   F8   - stage-one layers must visit every free level;
//!   F9   - sub-layers rooted at stage one must visit every free level;
//!   F10a-F10e - valid marginal-tie cuts (diagonal/pair and pair/triple).
//!
//! The level-revisit restrictions are enforced by excluding inadmissible
//! variables in the indexer, not by emitting rows.

use crate::indexer::{Arc, VariableSpace};
use crate::instance::{Matching, QapInstance};
use crate::{Error, Result};

/// Constraint family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[allow(missing_docs)]
pub enum RowFamily {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10a,
    F10b,
    F10c,
    F10d,
    F10e,
    Other,
}

impl RowFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            RowFamily::F1 => "F1",
            RowFamily::F2 => "F2",
            RowFamily::F3 => "F3",
            RowFamily::F4 => "F4",
            RowFamily::F5 => "F5",
            RowFamily::F6 => "F6",
            RowFamily::F7 => "F7",
            RowFamily::F8 => "F8",
            RowFamily::F9 => "F9",
            RowFamily::F10a => "F10a",
            RowFamily::F10b => "F10b",
            RowFamily::F10c => "F10c",
            RowFamily::F10d => "F10d",
            RowFamily::F10e => "F10e",
            RowFamily::Other => "ROW",
        }
    }

    pub fn from_name(name: &str) -> RowFamily {
        let prefix = name.split('_').next().unwrap_or("");
        match prefix {
            "F1" => RowFamily::F1,
            "F2" => RowFamily::F2,
            "F3" => RowFamily::F3,
            "F4" => RowFamily::F4,
            "F5" => RowFamily::F5,
            "F6" => RowFamily::F6,
            "F7" => RowFamily::F7,
            "F8" => RowFamily::F8,
            "F9" => RowFamily::F9,
            "F10a" => RowFamily::F10a,
            "F10b" => RowFamily::F10b,
            "F10c" => RowFamily::F10c,
            "F10d" => RowFamily::F10d,
            "F10e" => RowFamily::F10e,
            _ => RowFamily::Other,
        }
    }
}

/// One equality row: sparse entries (sorted by column), right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub family: RowFamily,
    pub entries: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// The assembled LP in sparse row form. All rows are equalities; every
/// column has lower bound zero and no upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseModel {
    pub name: String,
    pub col_names: Vec<String>,
    pub cost: Vec<f64>,
    pub rows: Vec<Row>,
}

impl SparseModel {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_entries(&self) -> usize {
        self.rows.iter().map(|r| r.entries.len()).sum()
    }

    /// Inner product of the cost vector with `x`.
    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.cost.len() {
            return Err(Error::SizeMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cost.len()
            )));
        }
        Ok(self.cost.iter().zip(x).map(|(c, v)| c * v).sum())
    }

    /// Maximum absolute row residual of `x`.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .map(|row| {
                let lhs: f64 = row.entries.iter().map(|&(c, v)| v * x[c]).sum();
                (lhs - row.rhs).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Exact integer residual check for 0/1 vectors. All constraint
    /// coefficients are +-1 and the rhs 0/1, so the arithmetic is exact.
    pub fn max_integer_residual(&self, zero_one: &[bool]) -> i64 {
        self.rows
            .iter()
            .map(|row| {
                let lhs: i64 = row
                    .entries
                    .iter()
                    .map(|&(c, v)| if zero_one[c] { v as i64 } else { 0 })
                    .sum();
                (lhs - row.rhs as i64).abs()
            })
            .max()
            .unwrap_or(0)
    }
}

/// Build options for [`build_model`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Emit the F10 valid-cut families (default on).
    pub valid_cuts: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { valid_cuts: true }
    }
}

/// Cost of diagonal arc `(i, r, j)` (zero-based): the operating cost of
/// the tail placement plus the handling cost of the two consecutive
/// sites, and additionally the head's operating cost on the last stage.
pub fn cost_c(inst: &QapInstance, i: usize, r: usize, j: usize) -> Result<f64> {
    let n = inst.n();
    if i >= n || j >= n || r + 1 >= n {
        return Err(Error::IndexOutOfRange(format!("arc ({i},{r},{j}) outside n={n}")));
    }
    if i == j {
        return Err(Error::InvalidArgument(format!("arc ({i},{r},{j}) has equal tail and head")));
    }
    let mut c = inst.o(i, r) + inst.f(i, j) * inst.d(r, r + 1) + inst.f(j, i) * inst.d(r + 1, r);
    if r == n - 2 {
        c += inst.o(j, r + 1);
    }
    Ok(c)
}

/// Pair-variable objective coefficient: the handling cost between the
/// first arc's tail placement and the second arc's head placement.
fn cost_pair(inst: &QapInstance, a: &Arc, b: &Arc) -> f64 {
    let (i, r) = (a.tail, a.stage);
    let (t, s1) = (b.head, b.stage + 1);
    inst.f(i, t) * inst.d(r, s1) + inst.f(t, i) * inst.d(s1, r)
}

struct Builder {
    arcs_at: Vec<Vec<Arc>>,
    rows: Vec<Row>,
}

impl Builder {
    fn new(space: &VariableSpace) -> Self {
        let stages = space.n() - 1;
        let mut arcs_at = vec![Vec::new(); stages];
        for a in space.arcs() {
            arcs_at[a.stage].push(*a);
        }
        Builder {
            arcs_at,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, name: String, family: RowFamily, mut entries: Vec<(usize, f64)>, rhs: f64) {
        entries.sort_unstable_by_key(|&(c, _)| c);
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0), "duplicate column in {name}");
        self.rows.push(Row {
            name,
            family,
            entries,
            rhs,
        });
    }
}

/// Assemble the full model for `inst` over `space`.
pub fn build_model(inst: &QapInstance, space: &VariableSpace, opts: BuildOptions) -> Result<SparseModel> {
    let n = inst.n();
    if n != space.n() {
        return Err(Error::SizeMismatch(format!(
            "instance n={n} against variable space n={}",
            space.n()
        )));
    }
    let stages = n - 1;
    let mut cost = vec![0.0; space.num_columns()];
    for (k, a) in space.arcs().iter().enumerate() {
        cost[k] = cost_c(inst, a.tail, a.stage, a.head)?;
    }
    let pair_base = space.diagonal_count();
    for (k, (a, b)) in space.pairs().iter().enumerate() {
        cost[pair_base + k] = cost_pair(inst, a, b);
    }

    let mut b = Builder::new(space);
    let sp = space;

    // F1: all flow starts at stage one.
    {
        let entries: Vec<(usize, f64)> = b.arcs_at[0]
            .iter()
            .map(|a| (sp.column_of_arc(a).unwrap(), 1.0))
            .collect();
        b.push("F1".into(), RowFamily::F1, entries, 1.0);
    }

    // F2: flow on a later arc equals its joint mass with stage one.
    for a in sp.arcs().iter().filter(|a| a.stage >= 1) {
        let mut entries = vec![(sp.column_of_arc(a).unwrap(), 1.0)];
        for first in &b.arcs_at[0] {
            if let Some(col) = sp.column_of_pair(first, a) {
                entries.push((col, -1.0));
            }
        }
        b.push(
            format!("F2_{}_{}_{}", a.tail + 1, a.stage + 1, a.head + 1),
            RowFamily::F2,
            entries,
            0.0,
        );
    }

    // F3: node balance between consecutive stages.
    for r in 1..stages {
        for j in 0..n {
            let mut entries = Vec::new();
            for a in &b.arcs_at[r - 1] {
                if a.head == j {
                    entries.push((sp.column_of_arc(a).unwrap(), 1.0));
                }
            }
            for a in &b.arcs_at[r] {
                if a.tail == j {
                    entries.push((sp.column_of_arc(a).unwrap(), -1.0));
                }
            }
            b.push(format!("F3_{}_{}", r + 1, j + 1), RowFamily::F3, entries, 0.0);
        }
    }

    // F4: within the layer of each arc, every free level's inflow at a
    // stage equals its outflow at the next.
    for a in sp.arcs() {
        for t in (0..n).filter(|&t| t != a.tail && t != a.head) {
            for s in (a.stage + 1)..stages.saturating_sub(1) {
                let mut entries = Vec::new();
                for arr in &b.arcs_at[s] {
                    if arr.head == t {
                        if let Some(col) = sp.column_of_pair(a, arr) {
                            entries.push((col, 1.0));
                        }
                    }
                }
                for dep in &b.arcs_at[s + 1] {
                    if dep.tail == t {
                        if let Some(col) = sp.column_of_pair(a, dep) {
                            entries.push((col, -1.0));
                        }
                    }
                }
                b.push(
                    format!("F4_{}_{}_{}_{}_{}", a.tail + 1, a.stage + 1, a.head + 1, t + 1, s + 1),
                    RowFamily::F4,
                    entries,
                    0.0,
                );
            }
        }
    }

    // F5: pair mass equals its triple marginal over each later free stage.
    for (first, mid) in sp.pairs().iter().filter(|(_, m)| m.stage + 1 < stages) {
        let pair_col = sp.column_of_pair(first, mid).unwrap();
        for s in (mid.stage + 1)..stages {
            let mut entries = vec![(pair_col, 1.0)];
            for last in &b.arcs_at[s] {
                if let Some(col) = sp.column_of_triple(first, mid, last) {
                    entries.push((col, -1.0));
                }
            }
            b.push(
                format!(
                    "F5_{}_{}_{}_{}_{}_{}_{}",
                    first.tail + 1,
                    first.stage + 1,
                    first.head + 1,
                    mid.tail + 1,
                    mid.stage + 1,
                    mid.head + 1,
                    s + 1
                ),
                RowFamily::F5,
                entries,
                0.0,
            );
        }
    }

    // F6: pair mass equals its triple marginal over each earlier free stage.
    for (mid, last) in sp.pairs().iter().filter(|(m, _)| m.stage >= 1) {
        let pair_col = sp.column_of_pair(mid, last).unwrap();
        for p in 0..mid.stage {
            let mut entries = vec![(pair_col, 1.0)];
            for first in &b.arcs_at[p] {
                if let Some(col) = sp.column_of_triple(first, mid, last) {
                    entries.push((col, -1.0));
                }
            }
            b.push(
                format!(
                    "F6_{}_{}_{}_{}_{}_{}_{}",
                    mid.tail + 1,
                    mid.stage + 1,
                    mid.head + 1,
                    last.tail + 1,
                    last.stage + 1,
                    last.head + 1,
                    p + 1
                ),
                RowFamily::F6,
                entries,
                0.0,
            );
        }
    }

    // F7: pair mass equals its triple marginal over each middle free stage.
    for (first, last) in sp.pairs().iter().filter(|(f, l)| f.stage + 2 <= l.stage) {
        let pair_col = sp.column_of_pair(first, last).unwrap();
        for r in (first.stage + 1)..last.stage {
            let mut entries = vec![(pair_col, 1.0)];
            for mid in &b.arcs_at[r] {
                if let Some(col) = sp.column_of_triple(first, mid, last) {
                    entries.push((col, -1.0));
                }
            }
            b.push(
                format!(
                    "F7_{}_{}_{}_{}_{}_{}_{}",
                    first.tail + 1,
                    first.stage + 1,
                    first.head + 1,
                    last.tail + 1,
                    last.stage + 1,
                    last.head + 1,
                    r + 1
                ),
                RowFamily::F7,
                entries,
                0.0,
            );
        }
    }

    // F8: the layer of each stage-one arc visits every free level.
    for first in &b.arcs_at[0].clone() {
        for t in (0..n).filter(|&t| t != first.tail && t != first.head) {
            let mut entries = vec![(sp.column_of_arc(first).unwrap(), 1.0)];
            for s in 1..stages {
                for later in &b.arcs_at[s] {
                    if later.head == t {
                        if let Some(col) = sp.column_of_pair(first, later) {
                            entries.push((col, -1.0));
                        }
                    }
                }
            }
            b.push(
                format!("F8_{}_{}_{}", first.tail + 1, first.head + 1, t + 1),
                RowFamily::F8,
                entries,
                0.0,
            );
        }
    }

    // F9: each sub-layer rooted at stage one visits every free level,
    // counted as an arc tail before the sub-layer's stage and as an arc
    // head after it.
    for (first, mid) in sp.pairs().iter().filter(|(f, _)| f.stage == 0) {
        let pair_col = sp.column_of_pair(first, mid).unwrap();
        let used = [first.tail, first.head, mid.tail, mid.head];
        for t in (0..n).filter(|t| !used.contains(t)) {
            let mut entries = vec![(pair_col, 1.0)];
            for s in 1..mid.stage {
                for visit in &b.arcs_at[s] {
                    if visit.tail == t {
                        if let Some(col) = sp.column_of_triple(first, visit, mid) {
                            entries.push((col, -1.0));
                        }
                    }
                }
            }
            for s in (mid.stage + 1)..stages {
                for visit in &b.arcs_at[s] {
                    if visit.head == t {
                        if let Some(col) = sp.column_of_triple(first, mid, visit) {
                            entries.push((col, -1.0));
                        }
                    }
                }
            }
            b.push(
                format!(
                    "F9_{}_{}_{}_{}_{}_{}",
                    first.tail + 1,
                    first.head + 1,
                    mid.tail + 1,
                    mid.stage + 1,
                    mid.head + 1,
                    t + 1
                ),
                RowFamily::F9,
                entries,
                0.0,
            );
        }
    }

    if opts.valid_cuts {
        // F10a: diagonal mass equals pair mass towards each earlier stage.
        for a in sp.arcs().iter().filter(|a| a.stage >= 1) {
            for s in 0..a.stage {
                let mut entries = vec![(sp.column_of_arc(a).unwrap(), 1.0)];
                for earlier in &b.arcs_at[s] {
                    if let Some(col) = sp.column_of_pair(earlier, a) {
                        entries.push((col, -1.0));
                    }
                }
                b.push(
                    format!("F10a_{}_{}_{}_{}", a.tail + 1, a.stage + 1, a.head + 1, s + 1),
                    RowFamily::F10a,
                    entries,
                    0.0,
                );
            }
        }
        // F10b: diagonal mass equals pair mass towards each later stage.
        for a in sp.arcs().iter().filter(|a| a.stage + 1 < stages) {
            for s in (a.stage + 1)..stages {
                let mut entries = vec![(sp.column_of_arc(a).unwrap(), 1.0)];
                for later in &b.arcs_at[s] {
                    if let Some(col) = sp.column_of_pair(a, later) {
                        entries.push((col, -1.0));
                    }
                }
                b.push(
                    format!("F10b_{}_{}_{}_{}", a.tail + 1, a.stage + 1, a.head + 1, s + 1),
                    RowFamily::F10b,
                    entries,
                    0.0,
                );
            }
        }
        // F10c/d/e: for a fixed arc pair, the triple marginal over the
        // free arc agrees across every admissible free-stage placement.
        for (a, c) in sp.pairs() {
            let name_base = format!(
                "{}_{}_{}_{}_{}_{}",
                a.tail + 1,
                a.stage + 1,
                a.head + 1,
                c.tail + 1,
                c.stage + 1,
                c.head + 1
            );
            for g in 0..a.stage {
                for p in (a.stage + 1)..c.stage {
                    let mut entries = Vec::new();
                    for free in &b.arcs_at[g] {
                        if let Some(col) = sp.column_of_triple(free, a, c) {
                            entries.push((col, 1.0));
                        }
                    }
                    for free in &b.arcs_at[p] {
                        if let Some(col) = sp.column_of_triple(a, free, c) {
                            entries.push((col, -1.0));
                        }
                    }
                    b.push(
                        format!("F10c_{}_{}_{}", name_base, g + 1, p + 1),
                        RowFamily::F10c,
                        entries,
                        0.0,
                    );
                }
            }
            for g in 0..a.stage {
                for q in (c.stage + 1)..stages {
                    let mut entries = Vec::new();
                    for free in &b.arcs_at[g] {
                        if let Some(col) = sp.column_of_triple(free, a, c) {
                            entries.push((col, 1.0));
                        }
                    }
                    for free in &b.arcs_at[q] {
                        if let Some(col) = sp.column_of_triple(a, c, free) {
                            entries.push((col, -1.0));
                        }
                    }
                    b.push(
                        format!("F10d_{}_{}_{}", name_base, g + 1, q + 1),
                        RowFamily::F10d,
                        entries,
                        0.0,
                    );
                }
            }
            for p in (a.stage + 1)..c.stage {
                for q in (c.stage + 1)..stages {
                    let mut entries = Vec::new();
                    for free in &b.arcs_at[p] {
                        if let Some(col) = sp.column_of_triple(a, free, c) {
                            entries.push((col, 1.0));
                        }
                    }
                    for free in &b.arcs_at[q] {
                        if let Some(col) = sp.column_of_triple(a, c, free) {
                            entries.push((col, -1.0));
                        }
                    }
                    b.push(
                        format!("F10e_{}_{}_{}", name_base, p + 1, q + 1),
                        RowFamily::F10e,
                        entries,
                        0.0,
                    );
                }
            }
        }
    }

    Ok(SparseModel {
        name: format!("QAPLP_N{n}"),
        col_names: space.column_names(),
        cost,
        rows: b.rows,
    })
}

/// 0/1 lifted vector of one matching.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedSolution {
    ones: Vec<usize>,
    num_columns: usize,
}

impl EmbeddedSolution {
    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.num_columns];
        for &c in &self.ones {
            x[c] = 1.0;
        }
        x
    }

    pub fn to_mask(&self) -> Vec<bool> {
        let mut x = vec![false; self.num_columns];
        for &c in &self.ones {
            x[c] = true;
        }
        x
    }
}

/// The lifted 0/1 vector of a matching: its path arcs, all their pairs,
/// and all their triples.
pub fn embed(space: &VariableSpace, m: &Matching) -> Result<EmbeddedSolution> {
    let n = space.n();
    if m.n() != n {
        return Err(Error::SizeMismatch(format!(
            "matching of size {} against variable space n={n}",
            m.n()
        )));
    }
    let stages = n - 1;
    let arcs: Vec<Arc> = (0..stages)
        .map(|r| Arc::new(m.facility_at(r), r, m.facility_at(r + 1)))
        .collect();
    let mut ones = Vec::new();
    for a in &arcs {
        ones.push(
            space
                .column_of_arc(a)
                .ok_or_else(|| Error::InvalidMatching(format!("arc {a} missing from space")))?,
        );
    }
    for r in 0..stages {
        for s in (r + 1)..stages {
            ones.push(space.column_of_pair(&arcs[r], &arcs[s]).ok_or_else(|| {
                Error::InvalidMatching(format!("pair ({},{}) of {m} inadmissible", arcs[r], arcs[s]))
            })?);
        }
    }
    for p in 0..stages {
        for r in (p + 1)..stages {
            for s in (r + 1)..stages {
                ones.push(space.column_of_triple(&arcs[p], &arcs[r], &arcs[s]).ok_or_else(|| {
                    Error::InvalidMatching(format!("triple of {m} inadmissible"))
                })?);
            }
        }
    }
    Ok(EmbeddedSolution {
        ones,
        num_columns: space.num_columns(),
    })
}

/// Rough upper estimate of the memory needed to materialize the space and
/// model for a given `n`, used by the CLI's pre-size guard.
pub fn estimate_model_bytes(n: usize, valid_cuts: bool) -> u64 {
    let vars = crate::indexer::predicted_total_variables(n);
    let rows = crate::indexer::predicted_row_count(n, valid_cuts);
    // per column: tuple storage, two hash-map sides, name, cost
    // per row: name, rhs, and a handful of 16-byte entries
    vars * 200 + rows * 400
}
