//! Scenario files: TOML with one task per file and strict keys.

use std::path::{Path, PathBuf};

use hyst2d_core::expr::Expr;
use hyst2d_core::field::{GridField, ScalarField};
use hyst2d_core::identify::{CurveRecoveryConfig, TaggedCurve, TransversalCurve};
use hyst2d_core::{
    Domain, FoliationPair, InitialState, ParamPair, ParamRange, Point2, Sampling, Signal2D, WeightFunction,
};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    AnalyzeVariation,
    IdentifyWeight,
    IdentifyCurves,
    ValidateFoliation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub foliation: FoliationBlock,
    pub weight: Option<WeightBlock>,
    pub grid: Option<GridBlock>,
    pub signal: Option<SignalBlock>,
    pub variation: Option<VariationBlock>,
    pub identify: Option<IdentifyBlock>,
    pub curves: Option<CurvesBlock>,
    pub validate: Option<ValidateBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FoliationBlock {
    pub kind: FoliationKindTag,
    /// Linear only.
    pub normal: Option<[f64; 2]>,
    /// Radial only.
    pub center: Option<[f64; 2]>,
    pub constant: Option<f64>,
    /// Tabulated only.
    pub c0: Option<FieldSource>,
    pub c1: Option<FieldSource>,
    pub domain: DomainBlock,
    pub c0_range: [f64; 2],
    pub c1_range: [f64; 2],
    #[serde(default = "default_delta_min")]
    pub delta_min: f64,
    pub sampling: Option<SamplingBlock>,
}

fn default_delta_min() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FoliationKindTag {
    Linear,
    Radial,
    Tabulated,
}

/// An expression in `x1, x2`, or a CSV table `x,y,value`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Expr(String),
    Table { csv: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainBlock {
    Rectangle { x1: [f64; 2], x2: [f64; 2] },
    Annulus { center: [f64; 2], r_min: f64, r_max: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingBlock {
    pub cover: Option<usize>,
    pub curve_points: Option<usize>,
    pub random_pairs: Option<usize>,
    pub contour: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightBlock {
    Constant { value: f64 },
    Expression { expr: String },
    Table { csv: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Initial {
    Zero,
    One,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub h: f64,
    #[serde(default = "default_initial")]
    pub initial: Initial,
}

fn default_initial() -> Initial {
    Initial::Zero
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalBlock {
    Sine { center: [f64; 2], amplitude: [f64; 2], frequency: f64, #[serde(default)] phase: f64, duration: f64, samples: usize },
    Ramp { from: [f64; 2], to: [f64; 2], duration: f64 },
    /// Unit-speed path through the waypoints.
    Polyline { points: Vec<[f64; 2]> },
    Samples { times: Vec<f64>, points: Vec<[f64; 2]> },
    Csv { path: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationBlock {
    pub c0: f64,
    pub c1: f64,
    #[serde(default)]
    pub xi: bool,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    1000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransversalBlock {
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub s_start: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifyBlock {
    pub transversal: TransversalBlock,
    pub h_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggedBlock {
    pub xi: f64,
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub s_start: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesBlock {
    pub h_s: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub s0_ref: Option<f64>,
    pub s1_ref: Option<f64>,
    #[serde(default)]
    pub levels0: Vec<f64>,
    #[serde(default)]
    pub levels1: Vec<f64>,
    pub transversal: Vec<TaggedBlock>,
}

fn default_tol() -> f64 {
    1e-3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateBlock {
    pub transversal: Option<Vec<[f64; 2]>>,
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn require<'a, T>(v: &'a Option<T>, field: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| config_err(field, "required here"))
}

fn positive(v: f64, field: &str) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(field, format!("must be positive, got {v}")))
    }
}

fn pt(p: [f64; 2]) -> Point2 {
    Point2::new(p[0], p[1])
}

/// A parsed scenario with paths resolved against the config's directory.
#[derive(Debug)]
pub struct Loaded {
    pub scenario: Scenario,
    pub base: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let scenario: Scenario = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { scenario, base })
}

impl Loaded {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() { p.to_path_buf() } else { self.base.join(p) }
    }

    fn open(&self, p: &Path, field: &str) -> Result<std::fs::File, CliError> {
        std::fs::File::open(self.resolve(p)).map_err(|e| config_err(field, format!("{}: {e}", p.display())))
    }

    /// Field-level checks for `task` that do not need the model.
    pub fn check(&self, task: Task) -> Result<(), CliError> {
        let s = &self.scenario;
        let f = &s.foliation;
        positive(f.delta_min, "foliation.delta_min")?;
        let stray = |name: &str, set: bool, allowed: bool| {
            if set && !allowed {
                Err(config_err(&format!("foliation.{name}"), format!("not used by kind {:?}", f.kind)))
            } else {
                Ok(())
            }
        };
        stray("normal", f.normal.is_some(), f.kind == FoliationKindTag::Linear)?;
        stray("center", f.center.is_some(), f.kind == FoliationKindTag::Radial)?;
        stray("constant", f.constant.is_some(), f.kind == FoliationKindTag::Radial)?;
        stray("c0", f.c0.is_some(), f.kind == FoliationKindTag::Tabulated)?;
        stray("c1", f.c1.is_some(), f.kind == FoliationKindTag::Tabulated)?;
        match task {
            Task::Simulate => {
                require(&s.weight, "weight")?;
                positive(require(&s.grid, "grid")?.h, "grid.h")?;
                require(&s.signal, "signal")?;
            }
            Task::AnalyzeVariation => {
                require(&s.signal, "signal")?;
                if require(&s.variation, "variation")?.trials == 0 {
                    return Err(config_err("variation.trials", "must be positive"));
                }
            }
            Task::IdentifyWeight => {
                require(&s.weight, "weight")?;
                positive(require(&s.grid, "grid")?.h, "grid.h")?;
                positive(require(&s.identify, "identify")?.h_s, "identify.h_s")?;
            }
            Task::IdentifyCurves => {
                require(&s.weight, "weight")?;
                positive(require(&s.grid, "grid")?.h, "grid.h")?;
                let c = require(&s.curves, "curves")?;
                positive(c.h_s, "curves.h_s")?;
                positive(c.tol, "curves.tol")?;
                if c.transversal.is_empty() {
                    return Err(config_err("curves.transversal", "need at least one curve"));
                }
            }
            Task::ValidateFoliation => {}
        }
        if let Some(SignalBlock::Csv { path }) = &s.signal {
            if !self.resolve(path).is_file() {
                return Err(config_err("signal.path", format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn foliation(&self) -> Result<FoliationPair, CliError> {
        let f = &self.scenario.foliation;
        let range = |r: [f64; 2], field: &str| ParamRange::new(r[0], r[1]).map_err(|e| config_err(field, e));
        let domain = match &f.domain {
            DomainBlock::Rectangle { x1, x2 } => Domain::rectangle(x1[0], x1[1], x2[0], x2[1]),
            DomainBlock::Annulus { center, r_min, r_max } => Domain::annulus(pt(*center), *r_min, *r_max),
        }
        .map_err(|e| config_err("foliation.domain", e))?;
        let (r0, r1) = (range(f.c0_range, "foliation.c0_range")?, range(f.c1_range, "foliation.c1_range")?);
        let pair = match f.kind {
            FoliationKindTag::Linear => {
                FoliationPair::linear(domain, pt(*require(&f.normal, "foliation.normal")?), r0, r1, f.delta_min)
            }
            FoliationKindTag::Radial => FoliationPair::radial(
                domain,
                pt(*require(&f.center, "foliation.center")?),
                *require(&f.constant, "foliation.constant")?,
                r0,
                r1,
                f.delta_min,
            ),
            FoliationKindTag::Tabulated => FoliationPair::tabulated(
                domain,
                self.field(require(&f.c0, "foliation.c0")?, "foliation.c0")?,
                self.field(require(&f.c1, "foliation.c1")?, "foliation.c1")?,
                r0,
                r1,
                f.delta_min,
            ),
        }
        .map_err(|e| config_err("foliation", e))?;
        Ok(match &f.sampling {
            None => pair,
            Some(s) => {
                let d = pair.sampling();
                pair.with_sampling(Sampling {
                    cover: s.cover.unwrap_or(d.cover),
                    curve_points: s.curve_points.unwrap_or(d.curve_points),
                    random_pairs: s.random_pairs.unwrap_or(d.random_pairs),
                    contour: s.contour.unwrap_or(d.contour),
                })
            }
        })
    }

    fn field(&self, source: &FieldSource, field: &str) -> Result<ScalarField, CliError> {
        match source {
            FieldSource::Expr(src) => Expr::parse(src, ["x1", "x2"]).map(ScalarField::Expr).map_err(|e| config_err(field, e)),
            FieldSource::Table { csv } => {
                GridField::from_csv(self.open(csv, field)?).map(ScalarField::Grid).map_err(|e| config_err(field, e))
            }
        }
    }

    pub fn weight(&self) -> Result<WeightFunction, CliError> {
        match require(&self.scenario.weight, "weight")? {
            WeightBlock::Constant { value } if value.is_finite() => Ok(WeightFunction::Constant(*value)),
            WeightBlock::Constant { value } => Err(config_err("weight.value", format!("must be finite, got {value}"))),
            WeightBlock::Expression { expr } => WeightFunction::expression(expr).map_err(|e| config_err("weight.expr", e)),
            WeightBlock::Table { csv } => GridField::from_csv(self.open(csv, "weight.csv")?)
                .map(WeightFunction::Grid)
                .map_err(|e| config_err("weight.csv", e)),
        }
    }

    pub fn grid(&self) -> Result<(f64, InitialState), CliError> {
        let g = require(&self.scenario.grid, "grid")?;
        let i0 = match g.initial {
            Initial::Zero => InitialState::AllZero,
            Initial::One => InitialState::AllOne,
        };
        Ok((g.h, i0))
    }

    pub fn signal(&self) -> Result<Signal2D, CliError> {
        let err = |e| config_err("signal", e);
        match require(&self.scenario.signal, "signal")? {
            SignalBlock::Sine { center, amplitude, frequency, phase, duration, samples } => {
                Signal2D::sine(pt(*center), pt(*amplitude), *frequency, *phase, *duration, *samples).map_err(err)
            }
            SignalBlock::Ramp { from, to, duration } => Signal2D::ramp(pt(*from), pt(*to), *duration).map_err(err),
            SignalBlock::Polyline { points } => {
                Signal2D::polyline(&points.iter().copied().map(pt).collect::<Vec<_>>()).map_err(err)
            }
            SignalBlock::Samples { times, points } => {
                Signal2D::new(times.clone(), points.iter().copied().map(pt).collect()).map_err(err)
            }
            SignalBlock::Csv { path } => Signal2D::from_csv(self.open(path, "signal.path")?).map_err(err),
        }
    }

    pub fn relay(&self) -> Result<(ParamPair, bool, usize), CliError> {
        let v = require(&self.scenario.variation, "variation")?;
        Ok((ParamPair::new(v.c0, v.c1), v.xi, v.trials))
    }

    pub fn transversal(&self) -> Result<(TransversalCurve, f64), CliError> {
        let i = require(&self.scenario.identify, "identify")?;
        let k = TransversalCurve::new(i.transversal.points.iter().copied().map(pt).collect(), i.transversal.s_start)
            .map_err(|e| config_err("identify.transversal", e))?;
        Ok((k, i.h_s))
    }

    pub fn curves(&self) -> Result<(Vec<TaggedCurve>, Vec<f64>, Vec<f64>, CurveRecoveryConfig), CliError> {
        let c = require(&self.scenario.curves, "curves")?;
        let tagged = c
            .transversal
            .iter()
            .map(|t| {
                TransversalCurve::new(t.points.iter().copied().map(pt).collect(), t.s_start)
                    .map(|curve| TaggedCurve { xi: t.xi, curve })
                    .map_err(|e| config_err("curves.transversal", e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let cfg = CurveRecoveryConfig { h_s: c.h_s, tol: c.tol, s0_ref: c.s0_ref, s1_ref: c.s1_ref };
        Ok((tagged, c.levels0.clone(), c.levels1.clone(), cfg))
    }

    pub fn validation_transversal(&self) -> Option<Vec<Point2>> {
        let v = self.scenario.validate.as_ref()?;
        v.transversal.as_ref().map(|t| t.iter().copied().map(pt).collect())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(self.scenario.output.as_deref().unwrap_or(Path::new("out")))
    }
}
