//! Experiment configuration: a TOML document checked before any computation.

use crate::basis::BasisKind;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::init_fit::AdamConfig;
use crate::kan::LayerSpec;
use crate::metrics::evaluation_nodes;
use crate::oracle::OracleSettings;
use crate::pde::{BoundaryKind, PdeProblem};
use crate::trial::{Constraint, DirichletConstraint, Lifting, PeriodicEmbedding};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSection,
    pub network: NetworkSection,
    #[serde(default)]
    pub trial: TrialSection,
    pub solver: SolverSection,
    pub time: TimeSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub evaluation: EvaluationSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    AllenCahn,
    Burgers,
    Heat,
    Pme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub id: ProblemId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    /// Hidden layer widths; input and output widths follow from the problem.
    pub hidden: Vec<usize>,
    /// RBF centers per edge.
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Unconstrained,
    Dirichlet,
    DirichletLifted,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LiftingSpec {
    Constant { value: f64 },
    SeparableTrig { amplitude: f64, freq: Vec<f64>, phase: Vec<f64> },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSection {
    /// Defaults to the constraint matching the problem's boundary condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harmonics: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifting: Option<LiftingSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Strong,
    Weak,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Strong => "strong",
            Method::Weak => "weak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisName {
    #[serde(rename = "sine-1d")]
    Sine1d,
    #[serde(rename = "sine-2d")]
    Sine2d,
    #[serde(rename = "fourier-2d")]
    Fourier2d,
    #[serde(rename = "cosine-2d")]
    Cosine2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub kind: Method,
    /// Collocation points (strong) or quadrature nodes (weak), total over the domain.
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisName>,
    /// Count for sine-1d, per-axis count for sine-2d/cosine-2d, max mode for fourier-2d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_every: Option<usize>,
    #[serde(default)]
    pub regularization: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_mse: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    /// Evaluation grid nodes per axis, endpoints included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "yes")]
    pub enabled: bool,
    /// Oracle intervals per evaluation-grid interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refine: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self { enabled: true, refine: None, dt: None }
    }
}

fn yes() -> bool {
    true
}

fn both_methods() -> Vec<Method> {
    vec![Method::Strong, Method::Weak]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub points: Vec<usize>,
    #[serde(default = "both_methods")]
    pub methods: Vec<Method>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// Also write a network checkpoint for every snapshot.
    #[serde(default)]
    pub checkpoints: bool,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical TOML form: fields in declaration order, unset options omitted.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    /// Full schema check; every derived object is built once and discarded.
    pub fn validate(&self) -> Result<()> {
        let problem = self.problem()?;
        let layers = self.layers()?;
        self.constraint()?;
        self.basis()?;
        self.evolution()?;
        self.adam()?;
        let pts = self.solver.points;
        if pts == 0 {
            return Err(config_err("solver.points must be positive"));
        }
        if problem.dim() == 2 {
            crate::domain::per_axis_count(pts, 2).map_err(|e| config_err(format!("solver.points: {e}")))?;
        }
        if layers.is_empty() {
            return Err(config_err("network has no layers"));
        }
        let n = self.evaluation_nodes();
        if n < 2 {
            return Err(config_err("evaluation.nodes must be at least 2"));
        }
        if self.oracle.refine == Some(0) {
            return Err(config_err("oracle.refine must be positive"));
        }
        if let Some(dt) = self.oracle.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(config_err(format!("oracle.dt must be positive, got {dt}")));
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.points.is_empty() || sw.methods.is_empty() {
                return Err(config_err("sweep needs at least one point count and one method"));
            }
            for &p in &sw.points {
                if p == 0 || (problem.dim() == 2 && crate::domain::per_axis_count(p, 2).is_err()) {
                    return Err(config_err(format!("sweep point count {p} is not usable for a {}D problem", problem.dim())));
                }
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<PdeProblem> {
        let p = &self.problem;
        let unexpected = |name: &str| config_err(format!("coefficient {name} does not apply to problem {:?}", p.id));
        let problem = match p.id {
            ProblemId::AllenCahn => {
                if p.nu.is_some() || p.alpha.is_some() {
                    return Err(unexpected(if p.nu.is_some() { "nu" } else { "alpha" }));
                }
                PdeProblem::AllenCahn1d { eps: p.eps.unwrap_or(crate::pde::ALLEN_CAHN_EPS) }
            }
            ProblemId::Burgers => {
                if p.eps.is_some() || p.alpha.is_some() {
                    return Err(unexpected(if p.eps.is_some() { "eps" } else { "alpha" }));
                }
                PdeProblem::Burgers2d { nu: p.nu.unwrap_or(crate::pde::BURGERS_NU) }
            }
            ProblemId::Heat => {
                if p.eps.is_some() || p.nu.is_some() {
                    return Err(unexpected(if p.eps.is_some() { "eps" } else { "nu" }));
                }
                PdeProblem::HeatReaction2d { alpha: p.alpha.unwrap_or(crate::pde::HEAT_ALPHA) }
            }
            ProblemId::Pme => {
                if let Some(name) = [("eps", p.eps), ("nu", p.nu), ("alpha", p.alpha)].iter().find(|(_, v)| v.is_some()).map(|(n, _)| *n) {
                    return Err(unexpected(name));
                }
                PdeProblem::PmeDrift2d
            }
        };
        problem.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(problem)
    }

    pub fn domain(&self) -> Result<Domain> {
        Ok(self.problem()?.domain())
    }

    pub fn constraint_kind(&self) -> Result<ConstraintKind> {
        Ok(match self.trial.constraint {
            Some(k) => k,
            None => match self.problem()?.boundary() {
                BoundaryKind::Dirichlet => ConstraintKind::Dirichlet,
                BoundaryKind::Neumann => ConstraintKind::Unconstrained,
                BoundaryKind::Periodic => ConstraintKind::Periodic,
            },
        })
    }

    pub fn harmonics(&self) -> usize {
        self.trial.harmonics.unwrap_or(2)
    }

    pub fn constraint(&self) -> Result<Constraint> {
        let problem = self.problem()?;
        let dim = problem.dim();
        let kind = self.constraint_kind()?;
        let t = &self.trial;
        let uses_dirichlet = matches!(kind, ConstraintKind::Dirichlet | ConstraintKind::DirichletLifted);
        if !uses_dirichlet && (t.exponents.is_some() || t.hidden_power.is_some()) {
            return Err(config_err("trial.exponents and trial.hidden_power need a Dirichlet constraint"));
        }
        if kind != ConstraintKind::Periodic && t.harmonics.is_some() {
            return Err(config_err("trial.harmonics needs the periodic constraint"));
        }
        if kind != ConstraintKind::DirichletLifted && t.lifting.is_some() {
            return Err(config_err("trial.lifting needs the dirichlet-lifted constraint"));
        }
        let dirichlet = || -> Result<DirichletConstraint> {
            let exponents = t.exponents.clone().unwrap_or_else(|| vec![1.0; dim]);
            if exponents.len() != dim {
                return Err(config_err(format!("trial.exponents needs {dim} entries")));
            }
            if exponents.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                return Err(config_err("trial.exponents must lie in (0, 1]"));
            }
            let q = t.hidden_power.unwrap_or(1.0);
            if !(q > 0.0 && q <= 1.0) {
                return Err(config_err("trial.hidden_power must lie in (0, 1]"));
            }
            Ok(DirichletConstraint { exponents, hidden_power: q })
        };
        Ok(match kind {
            ConstraintKind::Unconstrained => Constraint::Unconstrained,
            ConstraintKind::Dirichlet => Constraint::Dirichlet(dirichlet()?),
            ConstraintKind::DirichletLifted => {
                let lifting = match &t.lifting {
                    None => return Err(config_err("dirichlet-lifted needs trial.lifting")),
                    Some(LiftingSpec::Constant { value }) => Lifting::Constant(*value),
                    Some(LiftingSpec::SeparableTrig { amplitude, freq, phase }) => {
                        if freq.len() != dim || phase.len() != dim {
                            return Err(config_err(format!("lifting freq and phase need {dim} entries")));
                        }
                        Lifting::SeparableTrig { amplitude: *amplitude, freq: freq.clone(), phase: phase.clone() }
                    }
                };
                Constraint::DirichletLifted(dirichlet()?, lifting)
            }
            ConstraintKind::Periodic => {
                let h = self.harmonics();
                if h == 0 {
                    return Err(config_err("trial.harmonics must be at least 1"));
                }
                Constraint::Periodic(PeriodicEmbedding::for_domain(&problem.domain(), h))
            }
        })
    }

    /// Width of the network input: the coordinates, or the periodic features.
    pub fn input_width(&self) -> Result<usize> {
        let dim = self.problem()?.dim();
        Ok(match self.constraint_kind()? {
            ConstraintKind::Periodic => 2 * self.harmonics() * dim,
            _ => dim,
        })
    }

    pub fn layers(&self) -> Result<Vec<LayerSpec>> {
        let n = &self.network;
        if n.hidden.iter().any(|&w| w == 0) {
            return Err(config_err("hidden widths must be positive"));
        }
        if n.grid == 0 {
            return Err(config_err("network.grid must be at least 1"));
        }
        let mut widths = vec![self.input_width()?];
        widths.extend(&n.hidden);
        widths.push(self.problem()?.components());
        let (lo, hi) = (n.center_lo.unwrap_or(-2.0), n.center_hi.unwrap_or(2.0));
        let layers: Vec<LayerSpec> = widths
            .windows(2)
            .map(|w| {
                let l = LayerSpec::with_span(w[0], w[1], n.grid, lo, hi);
                l.validate().map(|_| l)
            })
            .collect::<Result<_>>()
            .map_err(|e| config_err(e.to_string()))?;
        Ok(layers)
    }

    /// Test basis of the weak solver; `None` for the strong solver.
    pub fn basis(&self) -> Result<Option<BasisKind>> {
        let s = &self.solver;
        if s.kind == Method::Strong && (s.basis.is_some() || s.modes.is_some()) {
            // a sweep may still use them for its weak runs
            if self.sweep.as_ref().is_none_or(|sw| !sw.methods.contains(&Method::Weak)) {
                return Err(config_err("solver.basis and solver.modes apply to the weak solver"));
            }
        }
        let uses_weak = s.kind == Method::Weak || self.sweep.as_ref().is_some_and(|sw| sw.methods.contains(&Method::Weak));
        if !uses_weak {
            return Ok(None);
        }
        self.weak_basis().map(Some)
    }

    /// Basis used by weak runs, defaulting per boundary condition.
    pub fn weak_basis(&self) -> Result<BasisKind> {
        let problem = self.problem()?;
        let s = &self.solver;
        let name = s.basis.unwrap_or(match problem.boundary() {
            BoundaryKind::Dirichlet if problem.dim() == 1 => BasisName::Sine1d,
            BoundaryKind::Dirichlet => BasisName::Sine2d,
            BoundaryKind::Neumann => BasisName::Cosine2d,
            BoundaryKind::Periodic => BasisName::Fourier2d,
        });
        let kind = match name {
            BasisName::Sine1d => BasisKind::Sine1d { count: s.modes.unwrap_or(10) },
            BasisName::Sine2d => BasisKind::Sine2d { per_axis: s.modes.unwrap_or(6) },
            BasisName::Fourier2d => BasisKind::Fourier2d { max_mode: s.modes.unwrap_or(3) },
            BasisName::Cosine2d => BasisKind::Cosine2d { per_axis: s.modes.unwrap_or(6) },
        };
        if kind.dim() != problem.dim() {
            return Err(config_err(format!("basis {} is {}D, problem is {}D", kind.name(), kind.dim(), problem.dim())));
        }
        if !kind.compatible_with(problem.boundary()) {
            return Err(config_err(format!("basis {} does not match {:?} boundary conditions", kind.name(), problem.boundary())));
        }
        let modes = match kind {
            BasisKind::Sine1d { count } => count,
            BasisKind::Sine2d { per_axis } | BasisKind::Cosine2d { per_axis } => per_axis,
            BasisKind::Fourier2d { max_mode } => max_mode,
        };
        if modes == 0 {
            return Err(config_err("solver.modes must be positive"));
        }
        Ok(kind)
    }

    pub fn evolution(&self) -> Result<EvolutionConfig> {
        let t = &self.time;
        let mut cfg = EvolutionConfig::new(t.dt, t.steps);
        cfg.regularization = t.regularization;
        if let Some(s) = t.snapshot_every {
            cfg.snapshot_every = s;
        }
        if let Some(c) = t.condition_every {
            cfg.condition_every = c;
        }
        if let Some(b) = t.blowup_factor {
            cfg.blowup_factor = b;
        }
        cfg.validate().map_err(|e| config_err(format!("time: {e}")))?;
        Ok(cfg)
    }

    pub fn adam(&self) -> Result<AdamConfig> {
        let f = &self.fit;
        let d = AdamConfig::default();
        let cfg = AdamConfig {
            learning_rate: f.learning_rate.unwrap_or(d.learning_rate),
            max_iterations: f.max_iterations.unwrap_or(d.max_iterations),
            target_mse: f.target_mse.unwrap_or(d.target_mse),
            samples: f.samples,
            seed: self.seed,
            ..d
        };
        cfg.validate().map_err(|e| config_err(format!("fit: {e}")))?;
        Ok(cfg)
    }

    pub fn evaluation_nodes(&self) -> usize {
        self.evaluation.nodes.unwrap_or_else(|| self.problem().map(|p| evaluation_nodes(p.dim())).unwrap_or(64))
    }

    pub fn oracle_settings(&self) -> Result<OracleSettings> {
        let problem = self.problem()?;
        let refine = self.oracle.refine.unwrap_or(match problem {
            PdeProblem::AllenCahn1d { .. } => 8,
            _ => 2,
        });
        let mut s = OracleSettings::aligned(&problem, self.evaluation_nodes(), refine);
        s.dt = self.oracle.dt;
        Ok(s)
    }

    /// Copy with another solver kind and point count (used by sweeps).
    pub fn with_solver(&self, kind: Method, points: usize) -> Self {
        let mut c = self.clone();
        c.solver.kind = kind;
        c.solver.points = points;
        c.sweep = None;
        c
    }
}
