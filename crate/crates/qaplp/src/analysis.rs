//! Decomposition of fractional solutions and the integrality audit.
//!
//! An LP solution over the lifted space is read as a superposition of
//! stage-to-stage flows. [`decompose`] repeatedly extracts a layered
//! path (one support arc per stage, mutually consistent in the pair
//! variables), interprets it as a perfect matching, and peels it off
//! with the largest weight that keeps every variable nonnegative. When
//! the peel-off terminates with no residual mass, the solution was a
//! convex combination of embedded matchings; [`audit`] compares the LP
//! value against a brute-force oracle and classifies what that means for
//! the claim that the relaxation solves the assignment problem exactly.

use serde::Serialize;

use crate::indexer::{Arc, VariableSpace};
use crate::instance::{Matching, QapInstance};
use crate::model::embed;
use crate::{Error, Result};

/// The arcs carrying positive diagonal flow, grouped by stage in
/// lexicographic order.
#[derive(Debug, Clone)]
pub struct SupportGraph {
    n: usize,
    stage_arcs: Vec<Vec<(Arc, f64)>>,
}

impl SupportGraph {
    pub fn from_point(space: &VariableSpace, x: &[f64], tol: f64) -> Result<SupportGraph> {
        if x.len() != space.num_columns() {
            return Err(Error::SizeMismatch(format!(
                "point of length {} against {} columns",
                x.len(),
                space.num_columns()
            )));
        }
        let n = space.n();
        let mut stage_arcs = vec![Vec::new(); n - 1];
        for a in space.arcs() {
            let v = x[space.column_of_arc(a).unwrap()];
            if v > tol {
                stage_arcs[a.stage].push((*a, v));
            }
        }
        Ok(SupportGraph { n, stage_arcs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs_at(&self, stage: usize) -> &[(Arc, f64)] {
        &self.stage_arcs[stage]
    }

    pub fn arc_count(&self) -> usize {
        self.stage_arcs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stage_arcs.iter().all(Vec::is_empty)
    }
}

/// First layered path through the support, stage-major lexicographic:
/// one arc per stage, consecutive arcs chained head-to-tail, and every
/// arc pair both admissible and positive in the pair variables. Such a
/// path names a full assignment, returned as a matching.
pub fn find_layered_path(space: &VariableSpace, x: &[f64], tol: f64) -> Result<Option<Matching>> {
    let support = SupportGraph::from_point(space, x, tol)?;
    let stages = space.n() - 1;
    let mut chosen: Vec<Arc> = Vec::with_capacity(stages);
    if dfs_extend(space, x, tol, &support, &mut chosen) {
        let mut assign: Vec<usize> = chosen.iter().map(|a| a.tail).collect();
        assign.push(chosen[stages - 1].head);
        Ok(Some(Matching::new(assign)?))
    } else {
        Ok(None)
    }
}

fn dfs_extend(
    space: &VariableSpace,
    x: &[f64],
    tol: f64,
    support: &SupportGraph,
    chosen: &mut Vec<Arc>,
) -> bool {
    let stage = chosen.len();
    if stage == space.n() - 1 {
        return true;
    }
    for &(a, _) in support.arcs_at(stage) {
        if let Some(prev) = chosen.last() {
            if a.tail != prev.head {
                continue;
            }
        }
        let consistent = chosen.iter().all(|b| {
            space
                .column_of_pair(b, &a)
                .map(|col| x[col] > tol)
                .unwrap_or(false)
        });
        if !consistent {
            continue;
        }
        chosen.push(a);
        if dfs_extend(space, x, tol, support, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// The weight the embedding of `m` carries inside `x`: the minimum pair
/// value over all stage pairs of the path (the single diagonal value
/// when the path has one arc).
pub fn flow_value(space: &VariableSpace, x: &[f64], m: &Matching) -> Result<f64> {
    let n = space.n();
    if m.n() != n || x.len() != space.num_columns() {
        return Err(Error::SizeMismatch("matching/point/space dimensions disagree".into()));
    }
    let stages = n - 1;
    let arcs: Vec<Arc> = (0..stages)
        .map(|r| Arc::new(m.facility_at(r), r, m.facility_at(r + 1)))
        .collect();
    if stages == 1 {
        let col = space
            .column_of_arc(&arcs[0])
            .ok_or_else(|| Error::InvalidMatching(format!("arc {} not indexed", arcs[0])))?;
        return Ok(x[col]);
    }
    let mut min = f64::INFINITY;
    for r in 0..stages {
        for s in (r + 1)..stages {
            let col = space.column_of_pair(&arcs[r], &arcs[s]).ok_or_else(|| {
                Error::InvalidMatching(format!("pair ({},{}) not indexed", arcs[r], arcs[s]))
            })?;
            min = min.min(x[col]);
        }
    }
    Ok(min)
}

/// One peeled-off matching with its weight and objective cost.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionTerm {
    /// facility at each site, 1-based
    pub assignment: Vec<usize>,
    pub weight: f64,
    pub cost: f64,
}

impl DecompositionTerm {
    pub fn matching(&self) -> Matching {
        Matching::new(self.assignment.iter().map(|&v| v - 1).collect()).expect("stored assignment is a permutation")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionReport {
    pub terms: Vec<DecompositionTerm>,
    pub total_weight: f64,
    /// diagonal mass left on the first stage when extraction stopped
    pub residual_mass: f64,
    /// no residual mass remains anywhere
    pub complete: bool,
    /// subtraction drove some variable meaningfully negative, so the
    /// point was not a superposition of embedded matchings
    pub stuck: bool,
    pub iterations: usize,
}

const NEGATIVE_DIP: f64 = -1e-9;

/// Peel `x` into weighted matchings. Each round extracts the
/// lexicographically first layered path, weights it by [`flow_value`],
/// and subtracts its embedding; the minimizing pair variable drops to
/// zero each time, so the loop needs at most one round per pair column.
pub fn decompose(
    inst: &QapInstance,
    space: &VariableSpace,
    x: &[f64],
    tol: f64,
) -> Result<DecompositionReport> {
    let mut resid = x.to_vec();
    let mut terms: Vec<DecompositionTerm> = Vec::new();
    let mut stuck = false;
    let mut iterations = 0;
    let cap = space.pair_count() + space.n();
    while iterations < cap {
        let Some(m) = find_layered_path(space, &resid, tol)? else {
            break;
        };
        let lambda = flow_value(space, &resid, &m)?;
        if lambda <= tol {
            break;
        }
        iterations += 1;
        let emb = embed(space, &m)?;
        let mut dip = 0.0f64;
        for &c in emb.ones() {
            resid[c] -= lambda;
            dip = dip.min(resid[c]);
        }
        let cost = inst.evaluate(&m)?;
        terms.push(DecompositionTerm {
            assignment: m.assign().iter().map(|&v| v + 1).collect(),
            weight: lambda,
            cost,
        });
        if dip < NEGATIVE_DIP {
            stuck = true;
            break;
        }
    }
    let residual_mass: f64 = space
        .arcs()
        .iter()
        .filter(|a| a.stage == 0)
        .map(|a| resid[space.column_of_arc(a).unwrap()].max(0.0))
        .sum();
    let complete = !stuck && resid.iter().all(|&v| v.abs() <= tol.max(1e-7) * 10.0);
    Ok(DecompositionReport {
        total_weight: terms.iter().map(|t| t.weight).sum(),
        terms,
        residual_mass,
        complete,
        stuck,
        iterations,
    })
}

/// Verdict of one instance-level audit of the exactness claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// LP value matched the true optimum and the solution was integral.
    ClaimConsistent,
    /// LP value fell strictly below the true optimum: a counterexample.
    GapFound,
    /// LP value matched the optimum but the vertex was fractional, and
    /// it decomposed into optimal matchings.
    NonintegralVertex,
    /// The fractional solution could not be peeled into matchings.
    DecompositionFailed,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::ClaimConsistent => "claim-consistent",
            Classification::GapFound => "gap-found",
            Classification::NonintegralVertex => "nonintegral-vertex",
            Classification::DecompositionFailed => "decomposition-failed",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimAudit {
    pub n: usize,
    pub lp_objective: f64,
    pub lp_integral: bool,
    /// exact optimum by enumeration, absent beyond the oracle limit
    pub ilp_objective: Option<f64>,
    pub ilp_assignment: Option<Vec<usize>>,
    pub gap: Option<f64>,
    pub decomposition: Option<DecompositionReport>,
    /// |sum of weight*cost - LP objective| when decomposition applies
    pub reconstruction_error: Option<f64>,
    pub classification: Classification,
}

/// Relative tolerance for comparing LP and enumeration objectives.
pub const OBJECTIVE_MATCH_TOL: f64 = 1e-6;

/// Audit one solved instance: compare the LP value to the brute-force
/// optimum, test vertex integrality, and decompose fractional points.
pub fn audit(
    inst: &QapInstance,
    space: &VariableSpace,
    x: &[f64],
    lp_objective: f64,
    oracle_limit: usize,
    tol: f64,
) -> Result<ClaimAudit> {
    let n = inst.n();
    let lp_integral = crate::simplex::vertex_is_integral(x, 1e-6);
    let oracle = if n <= oracle_limit {
        Some(inst.brute_force_optimum_with_limit(oracle_limit)?)
    } else {
        None
    };
    let ilp_objective = oracle.as_ref().map(|(_, v)| *v);
    let ilp_assignment = oracle
        .as_ref()
        .map(|(m, _)| m.assign().iter().map(|&v| v + 1).collect());
    let gap = ilp_objective.map(|opt| opt - lp_objective);
    let scale = 1.0 + lp_objective.abs();

    let gap_found = gap.map_or(false, |g| g > OBJECTIVE_MATCH_TOL * scale);
    let mut decomposition = None;
    let mut reconstruction_error = None;
    let classification = if gap_found {
        Classification::GapFound
    } else if lp_integral {
        Classification::ClaimConsistent
    } else {
        let report = decompose(inst, space, x, tol)?;
        let rebuilt: f64 = report.terms.iter().map(|t| t.weight * t.cost).sum();
        reconstruction_error = Some((rebuilt - lp_objective).abs());
        let ok = report.complete && !report.stuck;
        decomposition = Some(report);
        if ok {
            Classification::NonintegralVertex
        } else {
            Classification::DecompositionFailed
        }
    };
    Ok(ClaimAudit {
        n,
        lp_objective,
        lp_integral,
        ilp_objective,
        ilp_assignment,
        gap,
        decomposition,
        reconstruction_error,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::CostMode;
    use crate::model::{build_model, BuildOptions};
    use crate::simplex::{solve, SolveOptions, SolveStatus};

    const TOL: f64 = 1e-7;

    #[test]
    fn embedding_decomposes_to_itself() {
        for n in [2usize, 3, 4, 5] {
            let inst = QapInstance::generate_random(n, CostMode::WithOpcost, 3, false).unwrap();
            let space = VariableSpace::build(n).unwrap();
            for m in Matching::enumerate(n).take(6) {
                let x = embed(&space, &m).unwrap().to_dense();
                let report = decompose(&inst, &space, &x, TOL).unwrap();
                assert!(report.complete, "n={n} m={m}");
                assert_eq!(report.terms.len(), 1);
                assert_eq!(report.terms[0].matching(), m);
                assert_eq!(report.terms[0].weight, 1.0);
                assert_eq!(report.terms[0].cost, inst.evaluate(&m).unwrap());
            }
        }
    }

    #[test]
    fn convex_combination_recovers_terms() {
        let n = 4;
        let inst = QapInstance::generate_random(n, CostMode::NoOpcost, 5, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let m1 = Matching::identity(n);
        let m2 = Matching::new(vec![1, 0, 3, 2]).unwrap();
        let m3 = Matching::new(vec![3, 2, 1, 0]).unwrap();
        let e1 = embed(&space, &m1).unwrap().to_dense();
        let e2 = embed(&space, &m2).unwrap().to_dense();
        let e3 = embed(&space, &m3).unwrap().to_dense();
        let weights = [0.5, 0.3, 0.2];
        let x: Vec<f64> = (0..space.num_columns())
            .map(|c| weights[0] * e1[c] + weights[1] * e2[c] + weights[2] * e3[c])
            .collect();
        let report = decompose(&inst, &space, &x, TOL).unwrap();
        assert!(report.complete && !report.stuck);
        assert!((report.total_weight - 1.0).abs() < 1e-9);
        let mut found: Vec<(Matching, f64)> =
            report.terms.iter().map(|t| (t.matching(), t.weight)).collect();
        found.sort_by(|a, b| b.1.total_cmp(&a.1));
        assert_eq!(found.len(), 3);
        assert_eq!(found[0].0, m1);
        assert!((found[0].1 - 0.5).abs() < 1e-9);
        let expect_cost: f64 = weights
            .iter()
            .zip([&m1, &m2, &m3])
            .map(|(w, m)| w * inst.evaluate(m).unwrap())
            .sum();
        let rebuilt: f64 = report.terms.iter().map(|t| t.weight * t.cost).sum();
        assert!((rebuilt - expect_cost).abs() < 1e-9);
    }

    #[test]
    fn flow_value_on_combination_is_min_shared_pair() {
        let n = 3;
        let space = VariableSpace::build(n).unwrap();
        let m1 = Matching::identity(n);
        let m2 = Matching::new(vec![2, 1, 0]).unwrap();
        let e1 = embed(&space, &m1).unwrap().to_dense();
        let e2 = embed(&space, &m2).unwrap().to_dense();
        let x: Vec<f64> = (0..space.num_columns()).map(|c| 0.7 * e1[c] + 0.3 * e2[c]).collect();
        assert!((flow_value(&space, &x, &m1).unwrap() - 0.7).abs() < 1e-12);
        assert!((flow_value(&space, &x, &m2).unwrap() - 0.3).abs() < 1e-12);
        // a matching absent from the combination carries no flow
        let m3 = Matching::new(vec![1, 0, 2]).unwrap();
        assert_eq!(flow_value(&space, &x, &m3).unwrap(), 0.0);
    }

    #[test]
    fn support_graph_reflects_positive_arcs() {
        let n = 4;
        let space = VariableSpace::build(n).unwrap();
        let m = Matching::identity(n);
        let x = embed(&space, &m).unwrap().to_dense();
        let support = SupportGraph::from_point(&space, &x, TOL).unwrap();
        assert_eq!(support.arc_count(), n - 1);
        for stage in 0..n - 1 {
            assert_eq!(support.arcs_at(stage).len(), 1);
            assert_eq!(support.arcs_at(stage)[0].0, Arc::new(stage, stage, stage + 1));
        }
        let zero = vec![0.0; space.num_columns()];
        assert!(SupportGraph::from_point(&space, &zero, TOL).unwrap().is_empty());
        assert!(find_layered_path(&space, &zero, TOL).unwrap().is_none());
    }

    #[test]
    fn audit_uniform_instance_is_consistent_or_decomposes() {
        let n = 4;
        let inst = QapInstance::make_uniform(n, 50.0, 10.0).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let model = build_model(&inst, &space, BuildOptions::default()).unwrap();
        let sol = solve(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        let a = audit(&inst, &space, &sol.primal, sol.objective, 9, TOL).unwrap();
        assert_eq!(a.ilp_objective, Some(6000.0));
        assert!(matches!(
            a.classification,
            Classification::ClaimConsistent | Classification::NonintegralVertex
        ));
        if let Some(err) = a.reconstruction_error {
            assert!(err < 1e-6);
        }
    }

    #[test]
    fn audit_random_instances_small_n() {
        for seed in 0..6u64 {
            let n = 3 + (seed as usize % 2);
            let inst = QapInstance::generate_random(n, CostMode::WithOpcost, seed, false).unwrap();
            let space = VariableSpace::build(n).unwrap();
            let model = build_model(&inst, &space, BuildOptions::default()).unwrap();
            let sol = solve(&model, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            let a = audit(&inst, &space, &sol.primal, sol.objective, 9, TOL).unwrap();
            // LP is a relaxation: value never above the optimum
            let opt = a.ilp_objective.unwrap();
            assert!(sol.objective <= opt + 1e-6 * (1.0 + opt));
            if a.classification == Classification::GapFound {
                assert!(a.gap.unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn audit_detects_planted_gap() {
        // fabricate a fractional "solution" strictly cheaper than any
        // matching: the audit must flag the gap
        let n = 3;
        let inst = QapInstance::generate_random(n, CostMode::WithOpcost, 11, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let x = vec![0.0; space.num_columns()];
        let (_, opt) = inst.brute_force_optimum().unwrap();
        let a = audit(&inst, &space, &x, opt - 100.0, 9, TOL).unwrap();
        assert_eq!(a.classification, Classification::GapFound);
    }

    #[test]
    fn decompose_reports_stuck_point_honestly() {
        // positive pairs whose mass cannot be explained by any single
        // path: take a valid combination and delete one triple's mass
        let n = 4;
        let inst = QapInstance::generate_random(n, CostMode::WithOpcost, 2, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let m1 = Matching::identity(n);
        let m2 = Matching::new(vec![1, 0, 3, 2]).unwrap();
        let e1 = embed(&space, &m1).unwrap().to_dense();
        let e2 = embed(&space, &m2).unwrap().to_dense();
        let mut x: Vec<f64> = (0..space.num_columns()).map(|c| 0.5 * (e1[c] + e2[c])).collect();
        let tcol = space.diagonal_count() + space.pair_count();
        let first_triple = (tcol..space.num_columns()).find(|&c| x[c] > 0.0).unwrap();
        x[first_triple] = 0.0;
        let report = decompose(&inst, &space, &x, TOL).unwrap();
        assert!(report.stuck || !report.complete);
    }

    #[test]
    fn classification_serializes_kebab_case() {
        let s = serde_json::to_string(&Classification::NonintegralVertex).unwrap();
        assert_eq!(s, "\"nonintegral-vertex\"");
        assert_eq!(Classification::GapFound.to_string(), "gap-found");
    }
}
