//! Enumeration of the lifted variable families over the multipartite stage
//! graph.
//!
//! An arc `(i, r, j)` places facility `i` at site `r` and facility `j` at
//! site `r+1` (stages are zero-based here, `r` in `0..n-1`). Variables are
//! flows on single arcs (diagonal), admissible arc pairs, and admissible
//! arc triples. Admissibility is the partial-injection rule: the
//! level-at-position assertions of the arcs involved must assign no
//! facility to two sites and no site to two facilities. Inadmissible
//! tuples are excluded up front instead of being pinned to zero by
//! explicit restriction rows, which keeps the model at its streamlined
//! size.

use std::collections::HashMap;
use std::fmt;

use crate::{Error, Result};

/// A stage-graph arc: facility `tail` at site `stage`, facility `head` at
/// site `stage + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub tail: usize,
    pub stage: usize,
    pub head: usize,
}

impl Arc {
    pub fn new(tail: usize, stage: usize, head: usize) -> Self {
        Arc { tail, stage, head }
    }

    /// The two (site, facility) assertions this arc makes.
    fn assertions(&self) -> [(usize, usize); 2] {
        [(self.stage, self.tail), (self.stage + 1, self.head)]
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.tail + 1, self.stage + 1, self.head + 1)
    }
}

fn assertions_injective(asserts: &[(usize, usize)]) -> bool {
    for (a, &(pa, la)) in asserts.iter().enumerate() {
        for &(pb, lb) in &asserts[a + 1..] {
            if (pa == pb) != (la == lb) {
                return false;
            }
        }
    }
    true
}

pub(crate) fn pair_admissible_unchecked(a: &Arc, b: &Arc) -> bool {
    let [a0, a1] = a.assertions();
    let [b0, b1] = b.assertions();
    assertions_injective(&[a0, a1, b0, b1])
}

/// Whether two arcs with `a.stage < b.stage` may carry joint flow.
///
/// Consequences of the rule: if `b` is at the next stage it must chain
/// (`b.tail == a.head`) and introduce a fresh facility; with a gap of two
/// or more, all four facilities are pairwise distinct.
pub fn pair_admissible(a: &Arc, b: &Arc) -> Result<bool> {
    if a.stage >= b.stage {
        return Err(Error::InvalidArgument(format!(
            "pair admissibility needs increasing stages, got {} then {}",
            a.stage, b.stage
        )));
    }
    Ok(pair_admissible_unchecked(a, b))
}

pub(crate) fn triple_admissible_unchecked(a: &Arc, b: &Arc, c: &Arc) -> bool {
    pair_admissible_unchecked(a, b)
        && pair_admissible_unchecked(a, c)
        && pair_admissible_unchecked(b, c)
}

/// Whether three arcs with strictly increasing stages may carry joint flow
/// (all three pairs admissible).
pub fn triple_admissible(a: &Arc, b: &Arc, c: &Arc) -> Result<bool> {
    if !(a.stage < b.stage && b.stage < c.stage) {
        return Err(Error::InvalidArgument(format!(
            "triple admissibility needs increasing stages, got {}, {}, {}",
            a.stage, b.stage, c.stage
        )));
    }
    Ok(triple_admissible_unchecked(a, b, c))
}

/// Identity of one enumerated column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    Diagonal(Arc),
    Pair(Arc, Arc),
    Triple(Arc, Arc, Arc),
}

/// The full enumerated variable space for a given `n`: diagonal arcs,
/// admissible arc pairs, admissible arc triples, with bidirectional
/// tuple/column maps. Column order is family-major (diagonal, pair,
/// triple), lexicographic by index tuple within each family.
#[derive(Debug)]
pub struct VariableSpace {
    n: usize,
    arcs: Vec<Arc>,
    pairs: Vec<(Arc, Arc)>,
    triples: Vec<(Arc, Arc, Arc)>,
    arc_col: HashMap<Arc, usize>,
    pair_col: HashMap<(Arc, Arc), usize>,
    triple_col: HashMap<(Arc, Arc, Arc), usize>,
}

impl VariableSpace {
    pub fn build(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("variable space needs n >= 2, got {n}")));
        }
        let stages = n - 1;
        let mut arcs = Vec::new();
        for i in 0..n {
            for r in 0..stages {
                for j in 0..n {
                    if i != j {
                        arcs.push(Arc::new(i, r, j));
                    }
                }
            }
        }
        let mut pairs = Vec::new();
        for a in &arcs {
            for b in &arcs {
                if b.stage > a.stage && pair_admissible_unchecked(a, b) {
                    pairs.push((*a, *b));
                }
            }
        }
        let mut triples = Vec::new();
        for &(a, b) in &pairs {
            for c in &arcs {
                if c.stage > b.stage
                    && pair_admissible_unchecked(&a, c)
                    && pair_admissible_unchecked(&b, c)
                {
                    triples.push((a, b, *c));
                }
            }
        }
        // The pair scan above runs in (a, b) order which is already
        // lexicographic by (i, r, j, k, s, t); triples likewise.
        let arc_col = arcs.iter().enumerate().map(|(k, a)| (*a, k)).collect();
        let base = arcs.len();
        let pair_col = pairs.iter().enumerate().map(|(k, p)| (*p, base + k)).collect();
        let base = base + pairs.len();
        let triple_col = triples.iter().enumerate().map(|(k, t)| (*t, base + k)).collect();
        Ok(VariableSpace {
            n,
            arcs,
            pairs,
            triples,
            arc_col,
            pair_col,
            triple_col,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diagonal_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn num_columns(&self) -> usize {
        self.arcs.len() + self.pairs.len() + self.triples.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn pairs(&self) -> &[(Arc, Arc)] {
        &self.pairs
    }

    pub fn triples(&self) -> &[(Arc, Arc, Arc)] {
        &self.triples
    }

    pub fn column_of_arc(&self, a: &Arc) -> Option<usize> {
        self.arc_col.get(a).copied()
    }

    pub fn column_of_pair(&self, a: &Arc, b: &Arc) -> Option<usize> {
        self.pair_col.get(&(*a, *b)).copied()
    }

    pub fn column_of_triple(&self, a: &Arc, b: &Arc, c: &Arc) -> Option<usize> {
        self.triple_col.get(&(*a, *b, *c)).copied()
    }

    pub fn variable(&self, col: usize) -> Variable {
        let na = self.arcs.len();
        let np = self.pairs.len();
        if col < na {
            Variable::Diagonal(self.arcs[col])
        } else if col < na + np {
            let (a, b) = self.pairs[col - na];
            Variable::Pair(a, b)
        } else {
            let (a, b, c) = self.triples[col - na - np];
            Variable::Triple(a, b, c)
        }
    }

    /// Canonical export name, one-based: `YD_i_r_j`, `YP_i_r_j_k_s_t`,
    /// `Z_u_p_v_i_r_j_k_s_t`.
    pub fn column_name(&self, col: usize) -> String {
        match self.variable(col) {
            Variable::Diagonal(a) => {
                format!("YD_{}_{}_{}", a.tail + 1, a.stage + 1, a.head + 1)
            }
            Variable::Pair(a, b) => format!(
                "YP_{}_{}_{}_{}_{}_{}",
                a.tail + 1,
                a.stage + 1,
                a.head + 1,
                b.tail + 1,
                b.stage + 1,
                b.head + 1
            ),
            Variable::Triple(a, b, c) => format!(
                "Z_{}_{}_{}_{}_{}_{}_{}_{}_{}",
                a.tail + 1,
                a.stage + 1,
                a.head + 1,
                b.tail + 1,
                b.stage + 1,
                b.head + 1,
                c.tail + 1,
                c.stage + 1,
                c.head + 1
            ),
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        (0..self.num_columns()).map(|c| self.column_name(c)).collect()
    }
}

fn falling(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    ((n - k + 1)..=n).map(|v| v as u64).product()
}

/// Closed-form count of diagonal-arc variables: `n (n-1)^2`.
pub fn predicted_diagonal_count(n: usize) -> u64 {
    (n as u64) * ((n - 1) as u64) * ((n - 1) as u64)
}

/// Admissible arc count for one ordered stage pair with the given gap.
fn pair_count_for_gap(n: usize, gap: usize) -> u64 {
    if gap == 1 {
        falling(n, 3)
    } else {
        falling(n, 4)
    }
}

/// Closed-form count of admissible pair variables.
pub fn predicted_pair_count(n: usize) -> u64 {
    let stages = n - 1;
    let mut total = 0;
    for r in 0..stages {
        for s in (r + 1)..stages {
            total += pair_count_for_gap(n, s - r);
        }
    }
    total
}

/// Admissible arc count for one stage triple, classified by the two gaps.
fn triple_count_for_gaps(n: usize, gap1: usize, gap2: usize) -> u64 {
    match (gap1 == 1, gap2 == 1) {
        (true, true) => falling(n, 4),
        (true, false) | (false, true) => falling(n, 5),
        (false, false) => falling(n, 6),
    }
}

/// Closed-form count of admissible triple variables.
pub fn predicted_triple_count(n: usize) -> u64 {
    let stages = n - 1;
    let mut total = 0;
    for p in 0..stages {
        for r in (p + 1)..stages {
            for s in (r + 1)..stages {
                total += triple_count_for_gaps(n, r - p, s - r);
            }
        }
    }
    total
}

pub fn predicted_total_variables(n: usize) -> u64 {
    predicted_diagonal_count(n) + predicted_pair_count(n) + predicted_triple_count(n)
}

/// Closed-form count of the rows the model builder emits, kept in lockstep
/// with the builder's emission rules (cross-checked by tests against
/// materialized models).
pub fn predicted_row_count(n: usize, valid_cuts: bool) -> u64 {
    let nn = n as u64;
    let stages = n - 1; // zero-based stages 0..stages
    let arcs_per_stage = nn * (nn - 1);
    let mut rows = 1; // flow initiation
    // per-arc tie to stage-1 mass, for every arc past stage one
    rows += (stages as u64 - 1) * arcs_per_stage;
    // node balance
    rows += (stages as u64 - 1) * nn;
    // layer balance: arc x free level x stage window
    for r in 0..stages {
        let window = (stages.saturating_sub(1)).saturating_sub(r + 1) as u64;
        rows += arcs_per_stage * (nn - 2) * window;
    }
    // layer consistency over the later free stage
    for p in 0..stages {
        for r in (p + 1)..stages.saturating_sub(1) {
            rows += pair_count_for_gap(n, r - p) * ((stages - 1 - r) as u64);
        }
    }
    // layer consistency over the earlier free stage
    for r in 1..stages {
        for s in (r + 1)..stages {
            rows += pair_count_for_gap(n, s - r) * (r as u64);
        }
    }
    // layer consistency over the middle free stage
    for p in 0..stages {
        for s in (p + 2)..stages {
            rows += pair_count_for_gap(n, s - p) * ((s - p - 1) as u64);
        }
    }
    // visit requirements at stage one
    rows += arcs_per_stage * (nn - 2);
    // visit requirements within sub-layers
    for r in 1..stages {
        let free_levels = if r == 1 { nn - 3 } else { nn - 4 };
        rows += pair_count_for_gap(n, r) * free_levels;
    }
    if valid_cuts {
        // diagonal/pair marginal ties, both directions
        for r in 1..stages {
            rows += arcs_per_stage * (r as u64);
        }
        for r in 0..stages.saturating_sub(1) {
            rows += arcs_per_stage * ((stages - 1 - r) as u64);
        }
        // pair/z marginal ties across the three free-stage placements
        for r in 0..stages {
            for s in (r + 1)..stages {
                let before = r as u64;
                let middle = (s - r - 1) as u64;
                let after = (stages - 1 - s) as u64;
                let combos = before * middle + before * after + middle * after;
                rows += pair_count_for_gap(n, s - r) * combos;
            }
        }
    }
    rows
}

/// One line of a growth report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthEntry {
    pub n: usize,
    pub diagonal: u64,
    pub pair: u64,
    pub triple: u64,
    pub total_variables: u64,
    pub rows: u64,
}

/// Variable/row counts over a range of `n`, with fitted growth exponents.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthReport {
    pub entries: Vec<GrowthEntry>,
    pub variable_exponent: f64,
    pub triple_exponent: f64,
    pub row_exponent: f64,
}

/// Growth exponent of a count family, i.e. the degree of the integer
/// polynomial behind `count`. The counts are sums of falling factorials
/// in `n`, so a log-log slope over small `n` badly overshoots the
/// polynomial degree (n(n-1)(n-2) already has slope > 3 there). Exact
/// unit-spaced finite differences sidestep the fitting problem entirely:
/// the d-th differences of a degree-d polynomial are a nonzero constant
/// and the (d+1)-th vanish. Evaluates `count` starting above the small-n
/// boundary cases so only the generic polynomial regime is sampled.
pub fn fit_growth_exponent(count: &dyn Fn(usize) -> u64) -> f64 {
    const START: usize = 6; // all constraint families are nonempty from here on
    const MAX_DEGREE: usize = 12;
    let mut diffs: Vec<i128> = (START..START + MAX_DEGREE + 2)
        .map(|n| count(n) as i128)
        .collect();
    let mut degree = 0usize;
    while diffs.len() > 1 {
        if diffs.iter().all(|&d| d == 0) {
            return degree.saturating_sub(1) as f64;
        }
        diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
        degree += 1;
    }
    // never constant within MAX_DEGREE differences: not polynomial growth
    f64::NAN
}

/// Per-`n` variable and row counts with fitted growth exponents.
pub fn growth_report(ns: &[usize], valid_cuts: bool) -> Result<GrowthReport> {
    if ns.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument("growth report needs every n >= 2".into()));
    }
    let entries: Vec<GrowthEntry> = ns
        .iter()
        .map(|&n| GrowthEntry {
            n,
            diagonal: predicted_diagonal_count(n),
            pair: predicted_pair_count(n),
            triple: predicted_triple_count(n),
            total_variables: predicted_total_variables(n),
            rows: predicted_row_count(n, valid_cuts),
        })
        .collect();
    Ok(GrowthReport {
        entries,
        variable_exponent: fit_growth_exponent(&predicted_total_variables),
        triple_exponent: fit_growth_exponent(&predicted_triple_count),
        row_exponent: fit_growth_exponent(&|n| predicted_row_count(n, valid_cuts)),
    })
}
