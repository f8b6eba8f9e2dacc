//! Command-line front end: instance generation, model building and
//! export, solving, auditing, sweeps over seeds and sizes, and result
//! tables. Runs append machine-readable JSONL records that `table`
//! aggregates.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{audit, ClaimAudit};
use crate::indexer::VariableSpace;
use crate::instance::{instance_header, CostMode, Matching, QapInstance};
use crate::model::{build_model, embed, estimate_model_bytes, BuildOptions, SparseModel};
use crate::simplex::{
    solve, verify_solution, LpSolution, PivotRule, SolveForm, SolveOptions, SolveStatus,
};
use crate::{Error, Result};

/// Models whose estimated footprint exceeds this are refused without
/// `--force`.
pub const DEFAULT_MODEL_BYTES_LIMIT: u64 = 2 << 30;

/// Sizes above this skip the enumeration oracle by default.
pub const DEFAULT_ORACLE_LIMIT: usize = 8;

const SUPPORT_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "qaplp", version, about = "lifted-LP laboratory for the quadratic assignment problem")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance file
    Gen {
        /// problem size (facilities = sites)
        #[arg(long)]
        n: usize,
        /// cost mode: no-opcost | with-opcost
        #[arg(long, default_value = "no-opcost")]
        mode: CostMode,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// mirror traffic and distance matrices
        #[arg(long)]
        symmetric: bool,
        /// constant matrices instead of random ones (the calibration family)
        #[arg(long)]
        uniform: bool,
        /// output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Build the LP and print its dimensions
    Build {
        input: PathBuf,
        /// leave out the marginal-tie cut rows
        #[arg(long)]
        no_cuts: bool,
        /// ignore the model-size guard
        #[arg(long)]
        force: bool,
    },
    /// Write the LP as a fixed-format MPS file
    Export {
        input: PathBuf,
        #[arg(long)]
        no_cuts: bool,
        /// output path (defaults to the input with extension .mps)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Solve the LP relaxation
    Solve {
        input: PathBuf,
        #[arg(long)]
        no_cuts: bool,
        /// primal | dual
        #[arg(long, default_value = "dual")]
        form: String,
        /// devex | bland
        #[arg(long, default_value = "devex")]
        pivot: String,
        /// crash the identity embedding into the starting basis
        #[arg(long)]
        warm_start: bool,
        #[arg(long)]
        iter_limit: Option<usize>,
        /// append a JSONL record here
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Solve, decompose, and classify against the enumeration oracle
    Audit {
        input: PathBuf,
        #[arg(long)]
        no_cuts: bool,
        #[arg(long, default_value = "dual")]
        form: String,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        oracle_limit: usize,
        /// print the full audit as JSON instead of a summary
        #[arg(long)]
        json: bool,
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Aggregate JSONL records into a table
    Table {
        records: PathBuf,
        /// also write the aggregate as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate, solve, and audit a grid of instances
    Sweep {
        /// comma-separated sizes
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// seeds 1..=this per size
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, default_value = "no-opcost")]
        mode: CostMode,
        /// also run the constant-matrix calibration instance per size
        #[arg(long)]
        include_uniform: bool,
        #[arg(long)]
        no_cuts: bool,
        #[arg(long, default_value = "dual")]
        form: String,
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        oracle_limit: usize,
        /// directory for generated instance files
        #[arg(long, default_value = "instances")]
        out: PathBuf,
        /// JSONL record sink
        #[arg(long, default_value = "records.jsonl")]
        record: PathBuf,
        #[arg(long)]
        force: bool,
    },
}

/// One solve/audit outcome, appended as a JSON line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub n: usize,
    pub mode: String,
    pub seed: u64,
    pub uniform: bool,
    pub cuts: bool,
    pub form: String,
    pub status: String,
    pub rows: usize,
    pub cols: usize,
    pub lp_objective: f64,
    pub ilp_objective: Option<f64>,
    pub gap: Option<f64>,
    pub lp_integral: Option<bool>,
    pub classification: Option<String>,
    pub decomposition_terms: Option<usize>,
    pub iterations: usize,
    pub phase1_iterations: usize,
    pub wall_ms: u64,
    pub max_residual: f64,
    pub duality_gap: f64,
}

/// Canonical instance name: `QAPn{n}s{seed}` for the plain family,
/// `QAPo{n}s{seed}` with operating costs, `QAPn{n}x` for the constant
/// calibration instance.
pub fn instance_name(n: usize, mode: CostMode, seed: u64, uniform: bool) -> String {
    if uniform {
        format!("QAPn{n}x")
    } else {
        match mode {
            CostMode::NoOpcost => format!("QAPn{n}s{seed}"),
            CostMode::WithOpcost => format!("QAPo{n}s{seed}"),
        }
    }
}

fn parse_form(s: &str) -> Result<SolveForm> {
    match s {
        "primal" => Ok(SolveForm::Primal),
        "dual" => Ok(SolveForm::Dual),
        other => Err(Error::InvalidArgument(format!("unknown form '{other}' (primal|dual)"))),
    }
}

fn parse_pivot(s: &str) -> Result<PivotRule> {
    match s {
        "devex" => Ok(PivotRule::Devex),
        "bland" => Ok(PivotRule::Bland),
        other => Err(Error::InvalidArgument(format!("unknown pivot rule '{other}' (devex|bland)"))),
    }
}

fn status_str(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Unbounded => "unbounded",
        SolveStatus::IterationLimit => "iteration-limit",
    }
}

fn guard_size(n: usize, cuts: bool, force: bool) -> Result<()> {
    let bytes = estimate_model_bytes(n, cuts);
    if bytes > DEFAULT_MODEL_BYTES_LIMIT && !force {
        return Err(Error::ModelTooLarge(format!(
            "n={n} needs an estimated {bytes} bytes (limit {DEFAULT_MODEL_BYTES_LIMIT}); pass --force to try anyway"
        )));
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<(QapInstance, Vec<(String, String)>)> {
    QapInstance::read_file(path)
}

fn header_get<'a>(header: &'a [(String, String)], key: &str) -> Option<&'a str> {
    header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn build_for(inst: &QapInstance, cuts: bool) -> Result<(VariableSpace, SparseModel)> {
    let space = VariableSpace::build(inst.n())?;
    let model = build_model(inst, &space, BuildOptions { valid_cuts: cuts })?;
    Ok((space, model))
}

fn solve_instance(
    inst: &QapInstance,
    space: &VariableSpace,
    model: &SparseModel,
    form: SolveForm,
    pivot: PivotRule,
    warm_start: bool,
    iter_limit: Option<usize>,
) -> Result<LpSolution> {
    let mut opts = SolveOptions {
        form,
        pivot_rule: pivot,
        ..SolveOptions::default()
    };
    if let Some(limit) = iter_limit {
        opts.iter_limit = limit;
    }
    if warm_start && form == SolveForm::Primal {
        let emb = embed(space, &Matching::identity(inst.n()))?;
        opts.initial_basis = Some(emb.ones().to_vec());
    }
    solve(model, &opts)
}

fn append_record(path: &Path, record: &ExperimentRecord) -> Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    let line = serde_json::to_string(record)
        .map_err(|e| Error::InvalidArgument(format!("record serialization failed: {e}")))?;
    writeln!(f, "{line}")?;
    Ok(())
}

fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str(l).map_err(|e| Error::Parse(format!("bad record line: {e}")))
        })
        .collect()
}

struct RunOutcome {
    record: ExperimentRecord,
    audit: Option<ClaimAudit>,
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    inst: &QapInstance,
    name: &str,
    mode: CostMode,
    seed: u64,
    uniform: bool,
    cuts: bool,
    form: SolveForm,
    oracle_limit: Option<usize>,
    iter_limit: Option<usize>,
) -> Result<RunOutcome> {
    let (space, model) = build_for(inst, cuts)?;
    let sol = solve_instance(inst, &space, &model, form, PivotRule::Devex, false, iter_limit)?;
    let quality = verify_solution(&model, &sol);
    let audit_out = match oracle_limit {
        Some(limit) if sol.status == SolveStatus::Optimal => Some(audit(
            inst,
            &space,
            &sol.primal,
            sol.objective,
            limit,
            SUPPORT_TOL,
        )?),
        _ => None,
    };
    let record = ExperimentRecord {
        name: name.to_string(),
        n: inst.n(),
        mode: mode.to_string(),
        seed,
        uniform,
        cuts,
        form: if form == SolveForm::Primal { "primal" } else { "dual" }.into(),
        status: status_str(sol.status).into(),
        rows: model.num_rows(),
        cols: model.num_cols(),
        lp_objective: sol.objective,
        ilp_objective: audit_out.as_ref().and_then(|a| a.ilp_objective),
        gap: audit_out.as_ref().and_then(|a| a.gap),
        lp_integral: audit_out.as_ref().map(|a| a.lp_integral),
        classification: audit_out.as_ref().map(|a| a.classification.to_string()),
        decomposition_terms: audit_out
            .as_ref()
            .and_then(|a| a.decomposition.as_ref())
            .map(|d| d.terms.len()),
        iterations: sol.iterations,
        phase1_iterations: sol.phase1_iterations,
        wall_ms: sol.wall.as_millis() as u64,
        max_residual: quality.max_primal_residual,
        duality_gap: quality.duality_gap,
    };
    Ok(RunOutcome {
        record,
        audit: audit_out,
    })
}

/// Aggregate rows of the `table` command, one per (n, mode, cuts) group.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub n: usize,
    pub mode: String,
    pub cuts: bool,
    pub count: usize,
    pub mean_lp: f64,
    pub mean_ilp: Option<f64>,
    pub mean_gap: Option<f64>,
    pub gaps_found: usize,
    pub fractional: usize,
    pub mean_wall_ms: f64,
}

/// Group records by (n, mode, cuts), averaging objectives. The constant
/// calibration instances are excluded from averages: their fixed values
/// would skew every mean they touch.
pub fn aggregate_records(records: &[ExperimentRecord]) -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = Vec::new();
    let mut keys: Vec<(usize, String, bool)> = Vec::new();
    for r in records {
        if r.uniform || r.status != "optimal" {
            continue;
        }
        let key = (r.n, r.mode.clone(), r.cuts);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort();
    for (n, mode, cuts) in keys {
        let group: Vec<&ExperimentRecord> = records
            .iter()
            .filter(|r| !r.uniform && r.status == "optimal" && r.n == n && r.mode == mode && r.cuts == cuts)
            .collect();
        let count = group.len();
        let mean = |f: &dyn Fn(&ExperimentRecord) -> f64| -> f64 {
            group.iter().map(|r| f(r)).sum::<f64>() / count as f64
        };
        let with_ilp: Vec<&&ExperimentRecord> =
            group.iter().filter(|r| r.ilp_objective.is_some()).collect();
        let mean_ilp = (!with_ilp.is_empty()).then(|| {
            with_ilp.iter().map(|r| r.ilp_objective.unwrap()).sum::<f64>() / with_ilp.len() as f64
        });
        let mean_gap = (!with_ilp.is_empty()).then(|| {
            with_ilp.iter().map(|r| r.gap.unwrap_or(0.0)).sum::<f64>() / with_ilp.len() as f64
        });
        rows.push(TableRow {
            n,
            mode: mode.clone(),
            cuts,
            count,
            mean_lp: mean(&|r| r.lp_objective),
            mean_ilp,
            mean_gap,
            gaps_found: group
                .iter()
                .filter(|r| r.classification.as_deref() == Some("gap-found"))
                .count(),
            fractional: group.iter().filter(|r| r.lp_integral == Some(false)).count(),
            mean_wall_ms: mean(&|r| r.wall_ms as f64),
        });
    }
    rows
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into())
}

/// Fixed-width rendering of the aggregate table.
pub fn render_table(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3} {:<12} {:>5} {:>5} {:>14} {:>14} {:>10} {:>5} {:>6} {:>10}",
        "n", "mode", "cuts", "runs", "mean-lp", "mean-ilp", "mean-gap", "gaps", "frac", "wall-ms"
    );
    let _ = writeln!(out, "{}", "-".repeat(93));
    for r in rows {
        let _ = writeln!(
            out,
            "{:>3} {:<12} {:>5} {:>5} {:>14.2} {:>14} {:>10} {:>5} {:>6} {:>10.1}",
            r.n,
            r.mode,
            if r.cuts { "on" } else { "off" },
            r.count,
            r.mean_lp,
            fmt_opt(r.mean_ilp),
            fmt_opt(r.mean_gap),
            r.gaps_found,
            r.fractional,
            r.mean_wall_ms
        );
    }
    out
}

/// CSV rendering of the aggregate table.
pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("n,mode,cuts,runs,mean_lp,mean_ilp,mean_gap,gaps_found,fractional,mean_wall_ms\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.mode,
            r.cuts,
            r.count,
            r.mean_lp,
            r.mean_ilp.map(|v| v.to_string()).unwrap_or_default(),
            r.mean_gap.map(|v| v.to_string()).unwrap_or_default(),
            r.gaps_found,
            r.fractional,
            r.mean_wall_ms
        );
    }
    out
}

fn cmd_gen(n: usize, mode: CostMode, seed: u64, symmetric: bool, uniform: bool, out: &Path) -> Result<PathBuf> {
    let inst = if uniform {
        QapInstance::make_uniform(n, 50.0, 10.0)?
    } else {
        QapInstance::generate_random(n, mode, seed, symmetric)?
    };
    let name = instance_name(n, mode, seed, uniform);
    let header = instance_header(&name, mode, seed, symmetric);
    fs::create_dir_all(out)?;
    let path = out.join(format!("{name}.dat"));
    inst.write_file(&path, &header)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn cmd_build(input: &Path, cuts: bool, force: bool) -> Result<()> {
    let (inst, _) = load_instance(input)?;
    guard_size(inst.n(), cuts, force)?;
    let (space, model) = build_for(&inst, cuts)?;
    println!(
        "n={} rows={} cols={} nnz={} (diagonal={} pair={} triple={})",
        inst.n(),
        model.num_rows(),
        model.num_cols(),
        model.num_entries(),
        space.diagonal_count(),
        space.pair_count(),
        space.triple_count()
    );
    Ok(())
}

fn cmd_export(input: &Path, cuts: bool, out: Option<PathBuf>, force: bool) -> Result<()> {
    let (inst, _) = load_instance(input)?;
    guard_size(inst.n(), cuts, force)?;
    let (_, model) = build_for(&inst, cuts)?;
    let out = out.unwrap_or_else(|| input.with_extension("mps"));
    fs::write(&out, crate::mps::write_mps(&model))?;
    println!("wrote {} ({} rows, {} cols)", out.display(), model.num_rows(), model.num_cols());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    input: &Path,
    cuts: bool,
    form: &str,
    pivot: &str,
    warm_start: bool,
    iter_limit: Option<usize>,
    record: Option<&Path>,
    force: bool,
) -> Result<()> {
    let (inst, header) = load_instance(input)?;
    guard_size(inst.n(), cuts, force)?;
    let form = parse_form(form)?;
    let pivot = parse_pivot(pivot)?;
    let (space, model) = build_for(&inst, cuts)?;
    let sol = solve_instance(&inst, &space, &model, form, pivot, warm_start, iter_limit)?;
    let quality = verify_solution(&model, &sol);
    println!(
        "{}: status={} objective={:.6} iterations={} (phase1 {}) wall={:.1?}",
        header_get(&header, "name").unwrap_or("instance"),
        status_str(sol.status),
        sol.objective,
        sol.iterations,
        sol.phase1_iterations,
        sol.wall
    );
    println!(
        "residual={:.3e} duality-gap={:.3e} dual-violation={:.3e}",
        quality.max_primal_residual, quality.duality_gap, quality.max_dual_violation
    );
    if let Some(path) = record {
        let name = header_get(&header, "name").unwrap_or("instance").to_string();
        let mode: CostMode = header_get(&header, "mode").unwrap_or("no-opcost").parse()?;
        let seed: u64 = header_get(&header, "seed").and_then(|s| s.parse().ok()).unwrap_or(0);
        let uniform = name.ends_with('x');
        let outcome = ExperimentRecord {
            name,
            n: inst.n(),
            mode: mode.to_string(),
            seed,
            uniform,
            cuts,
            form: if form == SolveForm::Primal { "primal" } else { "dual" }.into(),
            status: status_str(sol.status).into(),
            rows: model.num_rows(),
            cols: model.num_cols(),
            lp_objective: sol.objective,
            ilp_objective: None,
            gap: None,
            lp_integral: None,
            classification: None,
            decomposition_terms: None,
            iterations: sol.iterations,
            phase1_iterations: sol.phase1_iterations,
            wall_ms: sol.wall.as_millis() as u64,
            max_residual: quality.max_primal_residual,
            duality_gap: quality.duality_gap,
        };
        append_record(path, &outcome)?;
    }
    Ok(())
}

fn cmd_audit(
    input: &Path,
    cuts: bool,
    form: &str,
    oracle_limit: usize,
    json: bool,
    record: Option<&Path>,
    force: bool,
) -> Result<()> {
    let (inst, header) = load_instance(input)?;
    guard_size(inst.n(), cuts, force)?;
    let form = parse_form(form)?;
    let name = header_get(&header, "name").unwrap_or("instance").to_string();
    let mode: CostMode = header_get(&header, "mode").unwrap_or("no-opcost").parse()?;
    let seed: u64 = header_get(&header, "seed").and_then(|s| s.parse().ok()).unwrap_or(0);
    let uniform = name.ends_with('x');
    let outcome = run_one(
        &inst,
        &name,
        mode,
        seed,
        uniform,
        cuts,
        form,
        Some(oracle_limit),
        None,
    )?;
    if let Some(a) = &outcome.audit {
        if json {
            println!(
                "{}",
                serde_json::to_string_pretty(a)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?
            );
        } else {
            println!(
                "{name}: lp={:.6} ilp={} classification={}",
                a.lp_objective,
                a.ilp_objective.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into()),
                a.classification
            );
        }
    } else {
        println!("{name}: solve did not reach optimality ({})", outcome.record.status);
    }
    if let Some(path) = record {
        append_record(path, &outcome.record)?;
    }
    Ok(())
}

fn cmd_table(records_path: &Path, csv: Option<&Path>) -> Result<()> {
    let records = read_records(records_path)?;
    let rows = aggregate_records(&records);
    print!("{}", render_table(&rows));
    if let Some(path) = csv {
        fs::write(path, render_csv(&rows))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    sizes: &[usize],
    seeds: u64,
    mode: CostMode,
    include_uniform: bool,
    cuts: bool,
    form: &str,
    oracle_limit: usize,
    out: &Path,
    record: &Path,
    force: bool,
) -> Result<()> {
    let form = parse_form(form)?;
    for &n in sizes {
        guard_size(n, cuts, force)?;
        let mut jobs: Vec<(u64, bool)> = (1..=seeds).map(|s| (s, false)).collect();
        if include_uniform {
            jobs.push((0, true));
        }
        for (seed, uniform) in jobs {
            let inst = if uniform {
                QapInstance::make_uniform(n, 50.0, 10.0)?
            } else {
                QapInstance::generate_random(n, mode, seed, false)?
            };
            let name = instance_name(n, mode, seed, uniform);
            fs::create_dir_all(out)?;
            let header = instance_header(&name, mode, seed, false);
            inst.write_file(out.join(format!("{name}.dat")), &header)?;
            let outcome = run_one(
                &inst,
                &name,
                mode,
                seed,
                uniform,
                cuts,
                form,
                Some(oracle_limit),
                None,
            )?;
            println!(
                "{name}: status={} lp={:.2} ilp={} class={} wall={}ms",
                outcome.record.status,
                outcome.record.lp_objective,
                outcome
                    .record
                    .ilp_objective
                    .map(|v| format!("{v:.2}"))
                    .unwrap_or_else(|| "-".into()),
                outcome.record.classification.as_deref().unwrap_or("-"),
                outcome.record.wall_ms
            );
            append_record(record, &outcome.record)?;
        }
    }
    println!("records appended to {}", record.display());
    Ok(())
}

/// Entry point used by the binary.
pub fn run() -> Result<()> {
    let cli = Cli::parse();
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            n,
            mode,
            seed,
            symmetric,
            uniform,
            out,
        } => cmd_gen(n, mode, seed, symmetric, uniform, &out).map(|_| ()),
        Command::Build { input, no_cuts, force } => cmd_build(&input, !no_cuts, force),
        Command::Export {
            input,
            no_cuts,
            out,
            force,
        } => cmd_export(&input, !no_cuts, out, force),
        Command::Solve {
            input,
            no_cuts,
            form,
            pivot,
            warm_start,
            iter_limit,
            record,
            force,
        } => cmd_solve(
            &input,
            !no_cuts,
            &form,
            &pivot,
            warm_start,
            iter_limit,
            record.as_deref(),
            force,
        ),
        Command::Audit {
            input,
            no_cuts,
            form,
            oracle_limit,
            json,
            record,
            force,
        } => cmd_audit(&input, !no_cuts, &form, oracle_limit, json, record.as_deref(), force),
        Command::Table { records, csv } => cmd_table(&records, csv.as_deref()),
        Command::Sweep {
            sizes,
            seeds,
            mode,
            include_uniform,
            no_cuts,
            form,
            oracle_limit,
            out,
            record,
            force,
        } => cmd_sweep(
            &sizes,
            seeds,
            mode,
            include_uniform,
            !no_cuts,
            &form,
            oracle_limit,
            &out,
            &record,
            force,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, mode: &str, uniform: bool, lp: f64, ilp: f64) -> ExperimentRecord {
        ExperimentRecord {
            name: instance_name(n, mode.parse().unwrap(), 1, uniform),
            n,
            mode: mode.into(),
            seed: 1,
            uniform,
            cuts: true,
            form: "dual".into(),
            status: "optimal".into(),
            rows: 10,
            cols: 5,
            lp_objective: lp,
            ilp_objective: Some(ilp),
            gap: Some(ilp - lp),
            lp_integral: Some(lp == ilp),
            classification: Some(if ilp > lp { "gap-found" } else { "claim-consistent" }.into()),
            decomposition_terms: None,
            iterations: 10,
            phase1_iterations: 5,
            wall_ms: 7,
            max_residual: 0.0,
            duality_gap: 0.0,
        }
    }

    #[test]
    fn naming_scheme() {
        assert_eq!(instance_name(6, CostMode::NoOpcost, 3, false), "QAPn6s3");
        assert_eq!(instance_name(5, CostMode::WithOpcost, 12, false), "QAPo5s12");
        assert_eq!(instance_name(6, CostMode::NoOpcost, 0, true), "QAPn6x");
    }

    #[test]
    fn record_round_trips_as_json_line() {
        let r = record(4, "no-opcost", false, 100.0, 120.0);
        let line = serde_json::to_string(&r).unwrap();
        let back: ExperimentRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back.name, r.name);
        assert_eq!(back.gap, r.gap);
        // key order is the declaration order, stable across runs
        assert!(line.starts_with("{\"name\""));
    }

    #[test]
    fn aggregate_excludes_uniform_and_failed_runs() {
        let mut bad = record(4, "no-opcost", false, 1.0, 1.0);
        bad.status = "iteration-limit".into();
        let records = vec![
            record(4, "no-opcost", false, 100.0, 110.0),
            record(4, "no-opcost", false, 120.0, 120.0),
            record(4, "no-opcost", true, 6000.0, 6000.0),
            bad,
        ];
        let rows = aggregate_records(&records);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].count, 2);
        assert!((rows[0].mean_lp - 110.0).abs() < 1e-12);
        assert_eq!(rows[0].mean_ilp, Some(115.0));
        assert_eq!(rows[0].gaps_found, 1);
    }

    #[test]
    fn aggregate_groups_sorted_by_size_then_mode() {
        let records = vec![
            record(5, "no-opcost", false, 1.0, 1.0),
            record(4, "with-opcost", false, 1.0, 1.0),
            record(4, "no-opcost", false, 1.0, 1.0),
        ];
        let rows = aggregate_records(&records);
        let keys: Vec<(usize, &str)> = rows.iter().map(|r| (r.n, r.mode.as_str())).collect();
        assert_eq!(keys, vec![(4, "no-opcost"), (4, "with-opcost"), (5, "no-opcost")]);
    }

    #[test]
    fn table_layout_is_stable() {
        let rows = aggregate_records(&[
            record(4, "no-opcost", false, 100.0, 110.0),
            record(4, "no-opcost", false, 120.0, 120.0),
        ]);
        let text = render_table(&rows);
        let expect = concat!(
            "  n mode          cuts  runs        mean-lp       mean-ilp   mean-gap  gaps   frac    wall-ms\n",
            "---------------------------------------------------------------------------------------------\n",
            "  4 no-opcost       on     2         110.00         115.00       5.00     1      1        7.0\n",
        );
        assert_eq!(text, expect);
        let csv = render_csv(&rows);
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "4,no-opcost,true,2,110,115,5,1,1,7"
        );
    }

    #[test]
    fn size_guard_triggers_for_huge_sizes() {
        assert!(guard_size(6, true, false).is_ok());
        assert!(matches!(guard_size(60, true, false), Err(Error::ModelTooLarge(_))));
        assert!(guard_size(60, true, true).is_ok());
    }

    #[test]
    fn form_and_pivot_parsing() {
        assert_eq!(parse_form("primal").unwrap(), SolveForm::Primal);
        assert_eq!(parse_form("dual").unwrap(), SolveForm::Dual);
        assert!(parse_form("simplex").is_err());
        assert_eq!(parse_pivot("bland").unwrap(), PivotRule::Bland);
        assert!(parse_pivot("dantzig").is_err());
    }
}
