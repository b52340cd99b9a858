//! Fit, evolve, compare against the oracle and write CSV artifacts.

use crate::basis::TestBasis;
use crate::config::{ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionRun, RunStatus, SolverKind};
use crate::init_fit::{fit_initial, FitOutcome};
use crate::kan::KanNetwork;
use crate::metrics::{boundary_gradient_error, energy, free_energy, l2_relative_error, Edge, MetricSeries};
use crate::numerics::gauss_legendre_grid;
use crate::oracle::{run_oracle, FdmGrid, OracleSettings};
use crate::pde::{drift_potential, BoundaryKind, PdeProblem};
use crate::trial::TrialSpace;
use log::info;
use rayon::prelude::*;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Samples per edge for the boundary gradient error.
const EDGE_SAMPLES: usize = 64;

/// 17 significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Untrained trial space for `cfg`, network drawn from `cfg.seed`.
pub fn build_space(cfg: &ExperimentConfig) -> Result<TrialSpace> {
    let problem = cfg.problem()?;
    let net = KanNetwork::random(cfg.layers()?, cfg.seed)?;
    TrialSpace::new(net, cfg.constraint()?, problem.domain())
}

/// Strong collocation grid (open for Dirichlet problems) or weak projector.
pub fn build_solver(cfg: &ExperimentConfig, method: Method, points: usize) -> Result<SolverKind> {
    let problem = cfg.problem()?;
    let domain = problem.domain();
    match method {
        Method::Strong => {
            let closed = problem.boundary() != BoundaryKind::Dirichlet;
            Ok(SolverKind::strong(domain.uniform_points(points, closed)?))
        }
        Method::Weak => {
            let per_axis = crate::domain::per_axis_count(points, domain.dim())?;
            let quad = gauss_legendre_grid(domain.axes(), per_axis)?;
            let basis = TestBasis::new(cfg.weak_basis()?, domain)?;
            SolverKind::weak(&quad, &basis)
        }
    }
}

/// Evaluation-grid points (first axis fastest) and the node count per axis.
pub fn evaluation_grid(cfg: &ExperimentConfig) -> Result<(Vec<Vec<f64>>, usize)> {
    let n = cfg.evaluation_nodes();
    Ok((cfg.domain()?.uniform_grid(n, true)?, n))
}

/// Trial function on `points`, component-major.
pub fn sample(space: &TrialSpace, points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = space.components();
    let mut out = vec![Vec::with_capacity(points.len()); m];
    for x in points {
        for (c, v) in space.eval(x)?.into_iter().enumerate() {
            out[c].push(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub step: usize,
    pub time: f64,
    /// Trial function on the evaluation grid, per component.
    pub solution: Vec<Vec<f64>>,
    /// Oracle on the evaluation grid, per component.
    pub reference: Option<Vec<Vec<f64>>>,
    pub l2_error: Option<f64>,
    pub energy: Option<f64>,
    pub free_energy: Option<f64>,
    /// Mean |∂u/∂n| on left, right, bottom, top (Neumann problems).
    pub boundary_errors: Option<[f64; 4]>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub problem: PdeProblem,
    pub method: Method,
    pub points: usize,
    pub param_count: usize,
    /// Network of the fitted space; parameters of the snapshots live in `run`.
    pub network: KanNetwork,
    /// Rows of the assembled least-squares system.
    pub system_rows: usize,
    pub fit: FitOutcome,
    pub run: EvolutionRun,
    pub evaluations: Vec<Evaluation>,
    pub eval_nodes: usize,
    pub eval_points: Vec<Vec<f64>>,
}

impl RunOutput {
    pub fn errors(&self) -> MetricSeries {
        let mut s = MetricSeries::new("l2_error");
        for e in &self.evaluations {
            if let Some(v) = e.l2_error {
                s.push(e.time, v).expect("snapshots are time-ordered");
            }
        }
        s
    }

    pub fn final_error(&self) -> Option<f64> {
        self.evaluations.last().and_then(|e| e.l2_error)
    }

    /// Free-energy dissipation flag; `None` for problems without an energy.
    pub fn energy_valid(&self) -> Option<bool> {
        let mut s = MetricSeries::new("free_energy");
        for e in &self.evaluations {
            s.push(e.time, e.free_energy?).expect("snapshots are time-ordered");
        }
        Some(self.run.completed() && s.monotone_decay())
    }

    pub fn mean_step_seconds(&self) -> f64 {
        if self.run.reports.is_empty() {
            0.0
        } else {
            self.run.total_wall_seconds() / self.run.reports.len() as f64
        }
    }
}

/// Fitted trial space for `cfg`.
pub fn fit(cfg: &ExperimentConfig) -> Result<(TrialSpace, FitOutcome)> {
    let problem = cfg.problem()?;
    let mut space = build_space(cfg)?;
    let outcome = fit_initial(&space, &problem, &cfg.adam()?)?;
    info!(
        "fit {}: mse {:.3e} after {} iterations{}",
        problem.name(),
        outcome.mse,
        outcome.iterations,
        if outcome.restarted { " (restarted)" } else { "" }
    );
    space.set_params(&outcome.params)?;
    Ok((space, outcome))
}

/// Oracle snapshots on the evaluation grid at `times`, per component.
pub fn reference(cfg: &ExperimentConfig, times: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    let problem = cfg.problem()?;
    let n = cfg.evaluation_nodes();
    run_oracle(&problem, &cfg.oracle_settings()?, times)?.iter().map(|g| g.restrict(n)).collect()
}

fn snapshot_times(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let evo = cfg.evolution()?;
    Ok((0..=evo.steps / evo.snapshot_every).map(|k| evo.dt * (k * evo.snapshot_every) as f64).collect())
}

/// Evolve a fitted space with one solver and evaluate every snapshot.
/// `refs` are oracle fields at the config's snapshot times, when available.
pub fn evolve_and_evaluate(
    cfg: &ExperimentConfig,
    fitted: &TrialSpace,
    fit: &FitOutcome,
    method: Method,
    points: usize,
    refs: Option<&[Vec<Vec<f64>>]>,
) -> Result<RunOutput> {
    let problem = cfg.problem()?;
    let solver = build_solver(cfg, method, points)?;
    let system_rows = match &solver {
        SolverKind::Strong { points } => points.len() * problem.components(),
        SolverKind::Weak { projector } => projector.test_count() * problem.components(),
    };
    let evo = cfg.evolution()?;
    info!("{} {} with {} points: {} steps of {:.3e}", problem.name(), method.name(), points, evo.steps, evo.dt);
    let run = evolve(fitted, &problem, &solver, &evo)?;
    if let RunStatus::Failed { step, reason } = &run.status {
        info!("{} {} with {} points stopped at step {step}: {reason}", problem.name(), method.name(), points);
    }
    let (eval_points, n) = evaluation_grid(cfg)?;
    let domain = problem.domain();
    let h = domain.length(0) / (n - 1) as f64;
    let potential: Vec<f64> = match problem {
        PdeProblem::PmeDrift2d => eval_points.iter().map(|x| drift_potential(x[0], x[1])).collect(),
        _ => Vec::new(),
    };
    let mut space = fitted.clone();
    let mut evaluations = Vec::with_capacity(run.trajectory.len());
    for (k, snap) in run.trajectory.iter().enumerate() {
        space.set_params(&snap.params)?;
        let solution = sample(&space, &eval_points)?;
        let reference = refs.and_then(|r| r.get(k)).cloned();
        let l2_error = match &reference {
            Some(r) => Some(l2_relative_error(&solution.concat(), &r.concat())?),
            None => None,
        };
        let (e, fe) = if problem == PdeProblem::PmeDrift2d {
            (Some(energy(&solution[0], n, 2, h)?), Some(free_energy(&solution[0], &potential, n, 2, h)?))
        } else {
            (None, None)
        };
        let boundary_errors = if problem.boundary() == BoundaryKind::Neumann {
            let mut b = [0.0; 4];
            for (slot, edge) in b.iter_mut().zip(Edge::ALL) {
                *slot = boundary_gradient_error(&space, edge, 0.0, EDGE_SAMPLES)?;
            }
            Some(b)
        } else {
            None
        };
        evaluations.push(Evaluation {
            step: snap.step,
            time: snap.time,
            solution,
            reference,
            l2_error,
            energy: e,
            free_energy: fe,
            boundary_errors,
        });
    }
    Ok(RunOutput {
        problem,
        method,
        points,
        param_count: fitted.param_count(),
        network: fitted.network().clone(),
        system_rows,
        fit: fit.clone(),
        run,
        evaluations,
        eval_nodes: n,
        eval_points,
    })
}

/// Fit, evolve and evaluate one configuration.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (space, outcome) = fit(cfg)?;
    let refs = if cfg.oracle.enabled { Some(reference(cfg, &snapshot_times(cfg)?)?) } else { None };
    evolve_and_evaluate(cfg, &space, &outcome, cfg.solver.kind, cfg.solver.points, refs.as_deref())
}

/// Every (method, point count) of the sweep from one shared fitted `W(t₀)`,
/// on a pool of `jobs` workers. Rows come back in sweep order.
pub fn sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RunOutput>> {
    let sw = cfg.sweep.as_ref().ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    let (space, outcome) = fit(cfg)?;
    let refs = if cfg.oracle.enabled { Some(reference(cfg, &snapshot_times(cfg)?)?) } else { None };
    let tasks: Vec<(Method, usize)> = sw.methods.iter().flat_map(|&m| sw.points.iter().map(move |&p| (m, p))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    pool.install(|| {
        tasks
            .par_iter()
            .map(|&(m, p)| evolve_and_evaluate(&cfg.with_solver(m, p), &space, &outcome, m, p, refs.as_deref()))
            .collect()
    })
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(File::create(path)?)))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn axis_names(dim: usize) -> &'static [&'static str] {
    if dim == 1 {
        &["x"]
    } else {
        &["x", "y"]
    }
}

/// `run.csv`, `errors.csv`, `solution_<step>.csv`, `summary.csv` (all
/// deterministic) plus `timing.csv` with the wall-clock measurements.
pub fn write_run(out: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let m = out.problem.components();
    let dim = out.problem.dim();

    let mut w = csv_writer(&dir.join("run.csv"))?;
    w.write_record(["step", "time", "condition", "residual_norm", "gamma_norm", "solver"])?;
    for r in &out.run.reports {
        w.write_record([
            r.step.to_string(),
            fmt(r.time),
            opt(r.condition),
            fmt(r.residual_norm),
            fmt(r.gamma_norm),
            format!("{:?}", r.method).to_lowercase(),
        ])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("timing.csv"))?;
    w.write_record(["step", "wall_seconds"])?;
    for r in &out.run.reports {
        w.write_record([r.step.to_string(), fmt(r.wall_seconds)])?;
    }
    w.flush()?;

    let mut w = csv_writer(&dir.join("errors.csv"))?;
    w.write_record(["step", "time", "l2_error", "energy", "free_energy", "grad_left", "grad_right", "grad_bottom", "grad_top"])?;
    for e in &out.evaluations {
        let mut rec = vec![e.step.to_string(), fmt(e.time), opt(e.l2_error), opt(e.energy), opt(e.free_energy)];
        match e.boundary_errors {
            Some(b) => rec.extend(b.iter().map(|v| fmt(*v))),
            None => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        w.write_record(rec)?;
    }
    w.flush()?;

    for e in &out.evaluations {
        let mut w = csv_writer(&dir.join(format!("solution_{:06}.csv", e.step)))?;
        let mut header: Vec<String> = axis_names(dim).iter().map(|s| s.to_string()).collect();
        header.extend((0..m).map(|c| format!("u{c}")));
        if e.reference.is_some() {
            header.extend((0..m).map(|c| format!("ref{c}")));
        }
        w.write_record(&header)?;
        for (i, x) in out.eval_points.iter().enumerate() {
            let mut rec: Vec<String> = x.iter().map(|v| fmt(*v)).collect();
            rec.extend(e.solution.iter().map(|f| fmt(f[i])));
            if let Some(r) = &e.reference {
                rec.extend(r.iter().map(|f| fmt(f[i])));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }

    let mut w = csv_writer(&dir.join("summary.csv"))?;
    w.write_record(SUMMARY_HEADER)?;
    w.write_record(summary_record(out))?;
    w.flush()?;

    let mut t = File::create(dir.join("timing_summary.csv"))?;
    writeln!(t, "steps,total_wall_seconds,mean_step_seconds")?;
    writeln!(t, "{},{},{}", out.run.reports.len(), fmt(out.run.total_wall_seconds()), fmt(out.mean_step_seconds()))?;
    Ok(())
}

const SUMMARY_HEADER: [&str; 13] = [
    "problem",
    "method",
    "point_count",
    "param_count",
    "system_rows",
    "steps_completed",
    "status",
    "fit_mse",
    "fit_iterations",
    "l2_error",
    "cond_max",
    "energy_valid",
    "failure",
];

fn summary_record(out: &RunOutput) -> Vec<String> {
    let (status, failure) = match &out.run.status {
        RunStatus::Completed => ("completed", String::new()),
        RunStatus::Failed { step, reason } => ("failed", format!("step {step}: {reason}")),
    };
    vec![
        out.problem.name().to_string(),
        out.method.name().to_string(),
        out.points.to_string(),
        out.param_count.to_string(),
        out.system_rows.to_string(),
        out.run.reports.len().to_string(),
        status.to_string(),
        fmt(out.fit.mse),
        out.fit.iterations.to_string(),
        opt(out.final_error()),
        opt(out.run.max_condition()),
        out.energy_valid().map(|v| v.to_string()).unwrap_or_default(),
        failure,
    ]
}

/// `sweep.csv` (deterministic columns) and `sweep_timing.csv`; each run's
/// own files go to `<dir>/<method>_<points>/`.
pub fn write_sweep(rows: &[RunOutput], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("sweep.csv"))?;
    w.write_record(["method", "point_count", "l2_error", "cond_max", "valid_flag", "status", "system_rows"])?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.points.to_string(),
            opt(r.final_error()),
            opt(r.run.max_condition()),
            r.energy_valid().map(|v| v.to_string()).unwrap_or_default(),
            if r.run.completed() { "completed" } else { "failed" }.to_string(),
            r.system_rows.to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = csv_writer(&dir.join("sweep_timing.csv"))?;
    w.write_record(["method", "point_count", "steps_completed", "wall_seconds", "mean_step_seconds"])?;
    for r in rows {
        w.write_record([
            r.method.name().to_string(),
            r.points.to_string(),
            r.run.reports.len().to_string(),
            fmt(r.run.total_wall_seconds()),
            fmt(r.mean_step_seconds()),
        ])?;
    }
    w.flush()?;
    for r in rows {
        write_run(r, &dir.join(format!("{}_{}", r.method.name(), r.points)))?;
    }
    Ok(())
}

/// Oracle fields at the snapshot times, and the change of each snapshot
/// against a run with half the refinement (when that still aligns).
pub struct OracleOutput {
    pub grids: Vec<FdmGrid>,
    pub eval_nodes: usize,
    /// `(time, relative L2 change vs the coarser oracle)`.
    pub convergence: Vec<(f64, Option<f64>)>,
}

pub fn oracle(cfg: &ExperimentConfig) -> Result<OracleOutput> {
    let problem = cfg.problem()?;
    let times = snapshot_times(cfg)?;
    let settings = cfg.oracle_settings()?;
    let n = cfg.evaluation_nodes();
    let grids = run_oracle(&problem, &settings, &times)?;
    let refine = cfg.oracle.refine.unwrap_or(match problem {
        PdeProblem::AllenCahn1d { .. } => 8,
        _ => 2,
    });
    let convergence = if refine % 2 == 0 {
        let coarse = OracleSettings { dt: settings.dt, ..OracleSettings::aligned(&problem, n, refine / 2) };
        let cg = run_oracle(&problem, &coarse, &times)?;
        grids
            .iter()
            .zip(&cg)
            .map(|(f, c)| {
                let (a, b) = (f.restrict(n)?.concat(), c.restrict(n)?.concat());
                Ok((f.time, l2_relative_error(&b, &a).ok()))
            })
            .collect::<Result<_>>()?
    } else {
        grids.iter().map(|g| (g.time, None)).collect()
    };
    Ok(OracleOutput { grids, eval_nodes: n, convergence })
}

/// One CSV per snapshot and component. 1D: columns `x,u`. 2D: header row of
/// x coordinates, then one row per y-line led by its y coordinate.
pub fn write_oracle(out: &OracleOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv_writer(&dir.join("oracle.csv"))?;
    w.write_record(["index", "time", "nodes", "change_vs_half_resolution"])?;
    for (k, (g, (_, ch))) in out.grids.iter().zip(&out.convergence).enumerate() {
        w.write_record([k.to_string(), fmt(g.time), g.nodes.to_string(), opt(*ch)])?;
    }
    w.flush()?;
    for (k, g) in out.grids.iter().enumerate() {
        for (c, field) in g.fields.iter().enumerate() {
            let mut w = csv_writer(&dir.join(format!("oracle_{k:04}_c{c}.csv")))?;
            let coords: Vec<String> = (0..g.nodes).map(|i| fmt(g.coordinate(i))).collect();
            if g.dim == 1 {
                w.write_record(["x", "u"])?;
                for (x, v) in coords.iter().zip(field) {
                    w.write_record([x.clone(), fmt(*v)])?;
                }
            } else {
                let mut header = vec!["y\\x".to_string()];
                header.extend(coords.iter().cloned());
                w.write_record(&header)?;
                for (j, y) in coords.iter().enumerate() {
                    let mut rec = vec![y.clone()];
                    rec.extend(field[j * g.nodes..(j + 1) * g.nodes].iter().map(|v| fmt(*v)));
                    w.write_record(&rec)?;
                }
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Network checkpoints of every snapshot.
pub fn write_checkpoints(out: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut net = out.network.clone();
    for s in &out.run.trajectory {
        net.set_params(&s.params)?;
        std::fs::write(dir.join(format!("checkpoint_{:06}.txt", s.step)), net.to_checkpoint())?;
    }
    Ok(())
}
