//! TOML experiment configs: raw deserialization with spans, then validation
//! into [`Config`] with line-precise errors.

use std::ops::Range;

use homsim::{BeamSplitter, Complex64};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, CliResult};

pub const DEFAULT_GRID_CAP: usize = 100_000;
pub const DEFAULT_LEAKAGE_BOUND: f64 = 1e-8;
pub const DEFAULT_IDLER_CUTOFF: usize = 6;
pub const S_MAX: f64 = 0.8;
pub const CUTOFF_MAX: usize = 60;
pub const N_MAX: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExperimentId {
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig6a,
    Fig6b,
    Noon,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Fig4a,
        ExperimentId::Fig4b,
        ExperimentId::Fig5a,
        ExperimentId::Fig5b,
        ExperimentId::Fig6a,
        ExperimentId::Fig6b,
        ExperimentId::Noon,
        ExperimentId::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Fig4a => "fig4a",
            ExperimentId::Fig4b => "fig4b",
            ExperimentId::Fig5a => "fig5a",
            ExperimentId::Fig5b => "fig5b",
            ExperimentId::Fig6a => "fig6a",
            ExperimentId::Fig6b => "fig6b",
            ExperimentId::Noon => "noon",
            ExperimentId::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Config shipped in `configs/`, compiled in so `figure <id>` needs no files.
    pub fn shipped_config(self) -> &'static str {
        match self {
            ExperimentId::Fig4a => include_str!("../configs/fig4a.toml"),
            ExperimentId::Fig4b => include_str!("../configs/fig4b.toml"),
            ExperimentId::Fig5a => include_str!("../configs/fig5a.toml"),
            ExperimentId::Fig5b => include_str!("../configs/fig5b.toml"),
            ExperimentId::Fig6a => include_str!("../configs/fig6a.toml"),
            ExperimentId::Fig6b => include_str!("../configs/fig6b.toml"),
            ExperimentId::Noon => include_str!("../configs/noon.toml"),
            ExperimentId::Custom => include_str!("../configs/custom.toml"),
        }
    }

    /// Smallest per-mode cutoff the recipe can represent its target in.
    fn min_cutoff(self) -> usize {
        match self {
            ExperimentId::Fig4a | ExperimentId::Fig4b => 4,
            ExperimentId::Fig5a
            | ExperimentId::Fig5b
            | ExperimentId::Fig6a
            | ExperimentId::Fig6b => 4,
            ExperimentId::Noon | ExperimentId::Custom => 1,
        }
    }

    fn axes(self) -> &'static [Axis] {
        match self {
            ExperimentId::Fig4a | ExperimentId::Fig4b => &[Axis::S],
            ExperimentId::Fig5a | ExperimentId::Fig5b => &[Axis::S, Axis::Eta],
            ExperimentId::Fig6a | ExperimentId::Fig6b => &[Axis::S, Axis::P, Axis::Eta],
            ExperimentId::Noon => &[Axis::N, Axis::S, Axis::Eta],
            ExperimentId::Custom => &[Axis::S, Axis::Eta, Axis::Phi],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    S,
    Eta,
    P,
    Phi,
    N,
}

impl Axis {
    fn field(self) -> &'static str {
        match self {
            Axis::S => "grid.s",
            Axis::Eta => "grid.eta",
            Axis::P => "grid.p",
            Axis::Phi => "grid.phi",
            Axis::N => "grid.n",
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Spanned<String>,
    out: Option<String>,
    format: Option<Spanned<String>>,
    workers: Option<Spanned<i64>>,
    cutoff: Option<Spanned<i64>>,
    leakage_bound: Option<Spanned<f64>>,
    grid_cap: Option<Spanned<i64>>,
    #[serde(default)]
    grid: RawGrid,
    noon: Option<Spanned<RawNoon>>,
    custom: Option<Spanned<RawCustom>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    s: Option<Spanned<RawAxis>>,
    eta: Option<Spanned<RawAxis>>,
    p: Option<Spanned<RawAxis>>,
    phi: Option<Spanned<RawAxis>>,
    n: Option<Spanned<RawIntAxis>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawAxis {
    One(f64),
    Many(Vec<f64>),
    Range(RawRange),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawIntAxis {
    One(i64),
    Many(Vec<i64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoon {
    mode: Option<Spanned<String>>,
    idler_cutoff: Option<Spanned<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustom {
    modes: Spanned<i64>,
    inputs: Spanned<i64>,
    cutoffs: Option<Spanned<Vec<i64>>>,
    input: Spanned<Vec<RawTerm>>,
    target: Option<Spanned<Vec<RawTerm>>>,
    gates: Spanned<Vec<RawGate>>,
    #[serde(default)]
    herald: Option<Spanned<Vec<RawHerald>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    occ: Vec<i64>,
    #[serde(default)]
    re: f64,
    #[serde(default)]
    im: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawGate {
    Squeezer {
        modes: Vec<i64>,
        s: Option<f64>,
        #[serde(default)]
        phase: f64,
    },
    BeamSplitter {
        modes: Vec<i64>,
        t: Option<[f64; 2]>,
        r: Option<[f64; 2]>,
    },
    Phase {
        mode: i64,
        phi: Option<f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHerald {
    mode: i64,
    outcome: String,
    n: Option<i64>,
    eta: Option<f64>,
}

/// Parameter grid; an axis is `None` when the experiment does not use it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    pub s: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub p: Option<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
    pub n: Option<Vec<usize>>,
}

impl Grid {
    pub fn points(&self) -> usize {
        let len = |v: &Option<Vec<f64>>| v.as_ref().map_or(1, Vec::len);
        len(&self.s)
            * len(&self.eta)
            * len(&self.p)
            * len(&self.phi)
            * self.n.as_ref().map_or(1, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoonSettings {
    pub physical: bool,
    pub idler_cutoff: usize,
}

impl Default for NoonSettings {
    fn default() -> Self {
        Self {
            physical: false,
            idler_cutoff: DEFAULT_IDLER_CUTOFF,
        }
    }
}

/// `None` parameters are taken from the grid axis of the same name.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    Squeezer {
        modes: (usize, usize),
        s: Option<f64>,
        phase: f64,
    },
    BeamSplitter {
        modes: (usize, usize),
        param: BeamSplitter,
    },
    Phase {
        mode: usize,
        phi: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutcomeSpec {
    Fock(usize),
    Click(Option<f64>),
    NoClick(Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CustomSpec {
    pub cutoffs: Vec<usize>,
    pub inputs: usize,
    pub input: Vec<(Complex64, Vec<usize>)>,
    pub target: Option<Vec<(Complex64, Vec<usize>)>>,
    pub gates: Vec<GateSpec>,
    pub herald: Vec<(usize, OutcomeSpec)>,
}

impl CustomSpec {
    /// Modes left after the herald, in register order.
    pub fn output_modes(&self) -> Vec<usize> {
        (0..self.cutoffs.len())
            .filter(|m| self.herald.iter().all(|(h, _)| h != m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub experiment: ExperimentId,
    /// File path or `builtin:<id>`, used in messages and the manifest.
    pub origin: String,
    pub text: String,
    pub out: Option<String>,
    pub format: Format,
    pub workers: Option<usize>,
    pub cutoff: usize,
    pub leakage_bound: f64,
    pub grid_cap: usize,
    pub grid: Grid,
    pub noon: NoonSettings,
    pub custom: Option<CustomSpec>,
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<String>,
    pub format: Option<Format>,
    pub cutoff: Option<usize>,
    pub workers: Option<usize>,
}

struct Ctx<'a> {
    origin: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn line_col(&self, offset: usize) -> (usize, usize) {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before
            .rfind('\n')
            .map_or(before.len(), |i| before.len() - i - 1)
            + 1;
        (line, column)
    }

    fn range(&self, span: Range<usize>, field: &str, message: impl Into<String>) -> CliError {
        CliError::Range {
            origin: self.origin.to_string(),
            line: self.line_col(span.start).0,
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn parse(&self, err: toml::de::Error) -> CliError {
        let (line, column) = self.line_col(err.span().map_or(0, |s| s.start));
        CliError::Parse {
            origin: self.origin.to_string(),
            line,
            column,
            message: err.message().trim().to_string(),
        }
    }

    fn positive(&self, v: &Spanned<i64>, field: &str, max: usize) -> CliResult<usize> {
        let x = *v.get_ref();
        if x < 1 || x as u64 > max as u64 {
            return Err(self.range(v.span(), field, format!("{x} outside [1, {max}]")));
        }
        Ok(x as usize)
    }
}

impl Config {
    pub fn from_shipped(id: ExperimentId) -> CliResult<Self> {
        Self::parse(id.shipped_config(), &format!("builtin:{}", id.name()))
    }

    pub fn from_path(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Schema and range validation. Axes an experiment uses but the file
    /// omits are taken from its shipped config.
    pub fn parse(text: &str, origin: &str) -> CliResult<Self> {
        let ctx = Ctx { origin, text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| ctx.parse(e))?;
        let experiment = ExperimentId::from_name(raw.experiment.get_ref()).ok_or_else(|| {
            let names: Vec<_> = ExperimentId::ALL.iter().map(|e| e.name()).collect();
            CliError::Parse {
                origin: origin.to_string(),
                line: ctx.line_col(raw.experiment.span().start).0,
                column: ctx.line_col(raw.experiment.span().start).1,
                message: format!(
                    "unknown experiment `{}`, expected one of {}",
                    raw.experiment.get_ref(),
                    names.join(", ")
                ),
            }
        })?;
        let shipped = if origin == format!("builtin:{}", experiment.name()) {
            None
        } else {
            Some(Self::from_shipped(experiment)?)
        };

        let format = match &raw.format {
            None => Format::Csv,
            Some(f) => match f.get_ref().as_str() {
                "csv" => Format::Csv,
                "json" => Format::Json,
                other => {
                    return Err(ctx.range(
                        f.span(),
                        "format",
                        format!("`{other}` is not csv or json"),
                    ))
                }
            },
        };
        let workers = raw
            .workers
            .as_ref()
            .map(|w| ctx.positive(w, "workers", 4096))
            .transpose()?;
        let cutoff = match &raw.cutoff {
            Some(c) => ctx.positive(c, "cutoff", CUTOFF_MAX)?,
            None => match &shipped {
                Some(s) => s.cutoff,
                None => return Err(missing(&ctx, "cutoff")),
            },
        };
        let leakage_bound = match &raw.leakage_bound {
            Some(b) if !(*b.get_ref() > 0.0 && b.get_ref().is_finite()) => {
                return Err(ctx.range(b.span(), "leakage_bound", "must be positive and finite"))
            }
            Some(b) => *b.get_ref(),
            None => DEFAULT_LEAKAGE_BOUND,
        };
        let grid_cap = match &raw.grid_cap {
            Some(c) => ctx.positive(c, "grid_cap", usize::MAX)?,
            None => DEFAULT_GRID_CAP,
        };

        let noon = match (&raw.noon, experiment) {
            (Some(n), ExperimentId::Noon) => noon_settings(&ctx, n.get_ref())?,
            (Some(n), _) => {
                return Err(ctx.range(
                    n.span(),
                    "noon",
                    format!("not used by {}", experiment.name()),
                ))
            }
            (None, _) => NoonSettings::default(),
        };
        let custom = match (&raw.custom, experiment) {
            (Some(c), ExperimentId::Custom) => Some(custom_spec(&ctx, c, cutoff)?),
            (Some(c), _) => {
                return Err(ctx.range(
                    c.span(),
                    "custom",
                    format!("not used by {}", experiment.name()),
                ))
            }
            (None, ExperimentId::Custom) => return Err(missing(&ctx, "custom")),
            (None, _) => None,
        };

        let g = &raw.grid;
        let used = |a: Axis| -> bool {
            match experiment {
                ExperimentId::Noon => match a {
                    Axis::N => true,
                    Axis::S | Axis::Eta => noon.physical,
                    _ => false,
                },
                ExperimentId::Custom => {
                    let c = custom.as_ref().expect("custom spec parsed");
                    match a {
                        Axis::S => c
                            .gates
                            .iter()
                            .any(|g| matches!(g, GateSpec::Squeezer { s: None, .. })),
                        Axis::Phi => c
                            .gates
                            .iter()
                            .any(|g| matches!(g, GateSpec::Phase { phi: None, .. })),
                        Axis::Eta => c.herald.iter().any(|(_, o)| {
                            matches!(o, OutcomeSpec::Click(None) | OutcomeSpec::NoClick(None))
                        }),
                        _ => false,
                    }
                }
                _ => experiment.axes().contains(&a),
            }
        };
        // noon's eta is optional: absent means exact single-photon heralds
        let optional = |a: Axis| experiment == ExperimentId::Noon && a == Axis::Eta;

        let mut grid = Grid::default();
        for (axis, raw_axis) in [
            (Axis::S, &g.s),
            (Axis::Eta, &g.eta),
            (Axis::P, &g.p),
            (Axis::Phi, &g.phi),
        ] {
            let values = match raw_axis {
                Some(v) if !used(axis) => {
                    return Err(ctx.range(
                        v.span(),
                        axis.field(),
                        format!("not used by this {} config", experiment.name()),
                    ))
                }
                Some(v) => Some(real_axis(&ctx, axis, v, grid_cap)?),
                None if !used(axis) || optional(axis) => None,
                None => Some(
                    shipped
                        .as_ref()
                        .and_then(|s| s.grid.axis(axis).cloned())
                        .ok_or_else(|| missing(&ctx, axis.field()))?,
                ),
            };
            grid.set(axis, values);
        }
        grid.n = match &g.n {
            Some(v) if !used(Axis::N) => {
                return Err(ctx.range(
                    v.span(),
                    "grid.n",
                    format!("not used by {}", experiment.name()),
                ))
            }
            Some(v) => Some(int_axis(&ctx, v)?),
            None if !used(Axis::N) => None,
            None => Some(
                shipped
                    .as_ref()
                    .and_then(|s| s.grid.n.clone())
                    .ok_or_else(|| missing(&ctx, "grid.n"))?,
            ),
        };

        let cfg = Config {
            experiment,
            origin: origin.to_string(),
            text: text.to_string(),
            out: raw.out.clone(),
            format,
            workers,
            cutoff,
            leakage_bound,
            grid_cap,
            grid,
            noon,
            custom,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> CliResult<()> {
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(f) = o.format {
            self.format = f;
        }
        if let Some(w) = o.workers {
            if w == 0 {
                return Err(CliError::Range {
                    origin: "command line".into(),
                    line: 0,
                    field: "workers".into(),
                    message: "must be at least 1".into(),
                });
            }
            self.workers = Some(w);
        }
        if let Some(c) = o.cutoff {
            if c == 0 || c > CUTOFF_MAX {
                return Err(CliError::Range {
                    origin: "command line".into(),
                    line: 0,
                    field: "cutoff".into(),
                    message: format!("{c} outside [1, {CUTOFF_MAX}]"),
                });
            }
            self.cutoff = c;
            if let Some(cs) = self.custom.as_mut() {
                cs.cutoffs = vec![c; cs.cutoffs.len()];
            }
        }
        self.check()
    }

    /// Grid cap and cutoff requirements; rerun after overrides.
    pub fn check(&self) -> CliResult<()> {
        let points = self.grid.points();
        if points > self.grid_cap {
            return Err(CliError::GridTooLarge {
                points,
                cap: self.grid_cap,
            });
        }
        let too_small = |required: usize, cutoff: usize| CliError::CutoffTooSmall {
            experiment: self.experiment.name().to_string(),
            cutoff,
            required,
        };
        let required = match self.experiment {
            ExperimentId::Noon => self
                .grid
                .n
                .as_ref()
                .and_then(|n| n.iter().max().copied())
                .unwrap_or(1),
            e => e.min_cutoff(),
        };
        if self.cutoff < required {
            return Err(too_small(required, self.cutoff));
        }
        if let Some(c) = &self.custom {
            let out_modes = c.output_modes();
            let mut terms: Vec<(&[usize], Vec<usize>)> = c
                .input
                .iter()
                .map(|(_, occ)| (occ.as_slice(), (0..c.inputs).collect()))
                .collect();
            if let Some(t) = &c.target {
                terms.extend(t.iter().map(|(_, occ)| (occ.as_slice(), out_modes.clone())));
            }
            for (occ, modes) in terms {
                for (n, m) in occ.iter().zip(modes) {
                    if *n > c.cutoffs[m] {
                        return Err(too_small(*n, c.cutoffs[m]));
                    }
                }
            }
            for (m, o) in &c.herald {
                if let OutcomeSpec::Fock(n) = o {
                    if *n > c.cutoffs[*m] {
                        return Err(too_small(*n, c.cutoffs[*m]));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Grid {
    fn axis(&self, a: Axis) -> Option<&Vec<f64>> {
        match a {
            Axis::S => self.s.as_ref(),
            Axis::Eta => self.eta.as_ref(),
            Axis::P => self.p.as_ref(),
            Axis::Phi => self.phi.as_ref(),
            Axis::N => None,
        }
    }

    fn set(&mut self, a: Axis, v: Option<Vec<f64>>) {
        match a {
            Axis::S => self.s = v,
            Axis::Eta => self.eta = v,
            Axis::P => self.p = v,
            Axis::Phi => self.phi = v,
            Axis::N => {}
        }
    }
}

fn missing(ctx: &Ctx, field: &str) -> CliError {
    CliError::Parse {
        origin: ctx.origin.to_string(),
        line: 1,
        column: 1,
        message: format!("missing field `{field}`"),
    }
}

fn real_axis(ctx: &Ctx, axis: Axis, v: &Spanned<RawAxis>, cap: usize) -> CliResult<Vec<f64>> {
    let field = axis.field();
    let values = match v.get_ref() {
        RawAxis::One(x) => vec![*x],
        RawAxis::Many(xs) => xs.clone(),
        RawAxis::Range(r) => {
            if !(r.step > 0.0 && r.step.is_finite() && r.start.is_finite() && r.stop.is_finite()) {
                return Err(ctx.range(
                    v.span(),
                    field,
                    "range needs finite bounds and a positive step",
                ));
            }
            if r.stop < r.start {
                return Err(ctx.range(v.span(), field, "range stop is below start"));
            }
            let count = ((r.stop - r.start) / r.step + 1e-9).floor() + 1.0;
            if count > cap as f64 {
                return Err(CliError::GridTooLarge {
                    points: count.min(usize::MAX as f64) as usize,
                    cap,
                });
            }
            (0..count as usize)
                .map(|i| tidy(r.start + i as f64 * r.step))
                .collect()
        }
    };
    if values.is_empty() {
        return Err(ctx.range(v.span(), field, "grid axis is empty"));
    }
    let (lo, hi) = match axis {
        Axis::S => (0.0, S_MAX),
        Axis::Eta | Axis::P => (0.0, 1.0),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    if let Some(x) = values
        .iter()
        .find(|x| !(x.is_finite() && **x >= lo && **x <= hi))
    {
        let msg = if lo.is_finite() {
            format!("value {x} outside [{lo}, {hi}]")
        } else {
            format!("value {x} is not finite")
        };
        return Err(ctx.range(v.span(), field, msg));
    }
    Ok(values)
}

/// Rounds away the `start + i·step` representation noise.
fn tidy(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

fn int_axis(ctx: &Ctx, v: &Spanned<RawIntAxis>) -> CliResult<Vec<usize>> {
    let values = match v.get_ref() {
        RawIntAxis::One(n) => vec![*n],
        RawIntAxis::Many(ns) => ns.clone(),
    };
    if values.is_empty() {
        return Err(ctx.range(v.span(), "grid.n", "grid axis is empty"));
    }
    values
        .into_iter()
        .map(|n| {
            if n < 2 || n % 2 != 0 || n as usize > N_MAX {
                Err(ctx.range(
                    v.span(),
                    "grid.n",
                    format!("N = {n} must be even and in [2, {N_MAX}]"),
                ))
            } else {
                Ok(n as usize)
            }
        })
        .collect()
}

fn noon_settings(ctx: &Ctx, raw: &RawNoon) -> CliResult<NoonSettings> {
    let physical = match &raw.mode {
        None => false,
        Some(m) => match m.get_ref().as_str() {
            "ideal" => false,
            "physical" => true,
            other => {
                return Err(ctx.range(
                    m.span(),
                    "noon.mode",
                    format!("`{other}` is not ideal or physical"),
                ))
            }
        },
    };
    let idler_cutoff = match &raw.idler_cutoff {
        Some(c) => ctx.positive(c, "noon.idler_cutoff", CUTOFF_MAX)?,
        None => DEFAULT_IDLER_CUTOFF,
    };
    Ok(NoonSettings {
        physical,
        idler_cutoff,
    })
}

fn custom_spec(ctx: &Ctx, raw: &Spanned<RawCustom>, cutoff: usize) -> CliResult<CustomSpec> {
    let c = raw.get_ref();
    let modes = ctx.positive(&c.modes, "custom.modes", 8)?;
    let inputs = ctx.positive(&c.inputs, "custom.inputs", modes)?;
    let cutoffs = match &c.cutoffs {
        None => None,
        Some(cs) => {
            if cs.get_ref().len() != modes {
                return Err(ctx.range(
                    cs.span(),
                    "custom.cutoffs",
                    format!("need {modes} entries"),
                ));
            }
            let mut out = Vec::with_capacity(modes);
            for &x in cs.get_ref() {
                if x < 1 || x as usize > CUTOFF_MAX {
                    return Err(ctx.range(
                        cs.span(),
                        "custom.cutoffs",
                        format!("{x} outside [1, {CUTOFF_MAX}]"),
                    ));
                }
                out.push(x as usize);
            }
            Some(out)
        }
    };
    let mode_index = |x: i64, span: Range<usize>, field: &str| -> CliResult<usize> {
        if x < 0 || x as usize >= modes {
            Err(ctx.range(span, field, format!("mode {x} outside [0, {}]", modes - 1)))
        } else {
            Ok(x as usize)
        }
    };
    let pair = |ms: &[i64], span: Range<usize>| -> CliResult<(usize, usize)> {
        if ms.len() != 2 {
            return Err(ctx.range(
                span,
                "custom.gates",
                "two-mode gate needs exactly two modes",
            ));
        }
        let a = mode_index(ms[0], span.clone(), "custom.gates")?;
        let b = mode_index(ms[1], span.clone(), "custom.gates")?;
        if a == b {
            return Err(ctx.range(span, "custom.gates", format!("mode {a} used twice")));
        }
        Ok((a, b))
    };

    let gspan = c.gates.span();
    let mut gates = Vec::new();
    for g in c.gates.get_ref() {
        gates.push(match g {
            RawGate::Squeezer {
                modes: ms,
                s,
                phase,
            } => {
                if let Some(s) = s.filter(|s| !(s.is_finite() && *s >= 0.0 && *s <= S_MAX)) {
                    return Err(ctx.range(
                        gspan.clone(),
                        "custom.gates",
                        format!("squeezer s = {s} outside [0, {S_MAX}]"),
                    ));
                }
                if !phase.is_finite() {
                    return Err(ctx.range(
                        gspan.clone(),
                        "custom.gates",
                        "squeezer phase is not finite",
                    ));
                }
                GateSpec::Squeezer {
                    modes: pair(ms, gspan.clone())?,
                    s: *s,
                    phase: *phase,
                }
            }
            RawGate::BeamSplitter { modes: ms, t, r } => {
                let param = match (t, r) {
                    (None, None) => BeamSplitter::balanced(),
                    (Some(t), Some(r)) => {
                        BeamSplitter::new(Complex64::new(t[0], t[1]), Complex64::new(r[0], r[1]))
                            .map_err(|e| ctx.range(gspan.clone(), "custom.gates", e.to_string()))?
                    }
                    _ => {
                        return Err(ctx.range(
                            gspan.clone(),
                            "custom.gates",
                            "give both t and r or neither",
                        ))
                    }
                };
                GateSpec::BeamSplitter {
                    modes: pair(ms, gspan.clone())?,
                    param,
                }
            }
            RawGate::Phase { mode, phi } => {
                if phi.is_some_and(|p| !p.is_finite()) {
                    return Err(ctx.range(gspan.clone(), "custom.gates", "phase is not finite"));
                }
                GateSpec::Phase {
                    mode: mode_index(*mode, gspan.clone(), "custom.gates")?,
                    phi: *phi,
                }
            }
        });
    }

    let mut herald = Vec::new();
    if let Some(h) = &c.herald {
        let hspan = h.span();
        for e in h.get_ref() {
            let mode = mode_index(e.mode, hspan.clone(), "custom.herald")?;
            if mode < inputs {
                return Err(ctx.range(
                    hspan,
                    "custom.herald",
                    format!("mode {mode} is an input mode"),
                ));
            }
            if herald.iter().any(|(m, _)| *m == mode) {
                return Err(ctx.range(
                    hspan,
                    "custom.herald",
                    format!("mode {mode} heralded twice"),
                ));
            }
            if let Some(eta) = e.eta.filter(|x| !(*x >= 0.0 && *x <= 1.0)) {
                return Err(ctx.range(
                    hspan,
                    "custom.herald",
                    format!("eta = {eta} outside [0, 1]"),
                ));
            }
            let outcome = match (e.outcome.as_str(), e.n) {
                ("fock", Some(n)) if n >= 0 && e.eta.is_none() => OutcomeSpec::Fock(n as usize),
                ("fock", _) => {
                    return Err(ctx.range(
                        hspan,
                        "custom.herald",
                        "fock outcome needs n >= 0 and no eta",
                    ))
                }
                ("click", None) => OutcomeSpec::Click(e.eta),
                ("no_click", None) => OutcomeSpec::NoClick(e.eta),
                ("click" | "no_click", Some(_)) => {
                    return Err(ctx.range(hspan, "custom.herald", "click outcomes take eta, not n"))
                }
                (other, _) => {
                    return Err(ctx.range(
                        hspan,
                        "custom.herald",
                        format!("outcome `{other}` is not fock, click or no_click"),
                    ))
                }
            };
            herald.push((mode, outcome));
        }
    }
    if herald.len() == modes {
        return Err(ctx.range(
            raw.span(),
            "custom.herald",
            "every mode is heralded, nothing is left",
        ));
    }

    let terms = |t: &Spanned<Vec<RawTerm>>,
                 field: &str,
                 width: usize|
     -> CliResult<Vec<(Complex64, Vec<usize>)>> {
        if t.get_ref().is_empty() {
            return Err(ctx.range(t.span(), field, "needs at least one term"));
        }
        let mut out = Vec::new();
        let mut norm = 0.0;
        for term in t.get_ref() {
            if term.occ.len() != width {
                return Err(ctx.range(
                    t.span(),
                    field,
                    format!("occupation lists need {width} entries"),
                ));
            }
            if term.occ.iter().any(|n| *n < 0) {
                return Err(ctx.range(t.span(), field, "negative occupation"));
            }
            let amp = Complex64::new(term.re, term.im);
            if !(amp.re.is_finite() && amp.im.is_finite()) {
                return Err(ctx.range(t.span(), field, "amplitude is not finite"));
            }
            norm += amp.norm_sqr();
            out.push((amp, term.occ.iter().map(|n| *n as usize).collect()));
        }
        if !(norm > 0.0) {
            return Err(ctx.range(t.span(), field, "amplitudes are all zero"));
        }
        Ok(out)
    };
    let input = terms(&c.input, "custom.input", inputs)?;
    let target = c
        .target
        .as_ref()
        .map(|t| terms(t, "custom.target", modes - herald.len()))
        .transpose()?;

    Ok(CustomSpec {
        cutoffs: cutoffs.unwrap_or_else(|| vec![cutoff; modes]),
        inputs,
        input,
        target,
        gates,
        herald,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_shipped_config_parses() {
        for id in ExperimentId::ALL {
            let cfg = Config::from_shipped(id).unwrap_or_else(|e| panic!("{}: {e}", id.name()));
            assert_eq!(cfg.experiment, id);
        }
    }

    #[test]
    fn pinned_cutoffs() {
        let cut = |id| Config::from_shipped(id).unwrap().cutoff;
        assert_eq!(cut(ExperimentId::Fig4a), 25);
        assert_eq!(cut(ExperimentId::Fig4b), 25);
        assert_eq!(cut(ExperimentId::Fig5a), 12);
        assert_eq!(cut(ExperimentId::Fig5b), 12);
        assert_eq!(cut(ExperimentId::Fig6a), 12);
        assert_eq!(cut(ExperimentId::Fig6b), 12);
    }

    #[test]
    fn range_axis_is_inclusive_and_tidy() {
        let cfg = Config::parse(
            "experiment = \"fig5b\"\n[grid]\ns = { start = 0.01, stop = 0.2, step = 0.01 }\n",
            "t",
        )
        .unwrap();
        let s = cfg.grid.s.unwrap();
        assert_eq!(s.len(), 20);
        assert_eq!(s[2], 0.03);
        assert_eq!(s[19], 0.2);
    }

    #[test]
    fn eta_out_of_range_names_field_and_line() {
        let err = Config::parse("experiment = \"fig5b\"\n\n[grid]\neta = 1.2\n", "t").unwrap_err();
        match err {
            CliError::Range { line, field, .. } => {
                assert_eq!(line, 4);
                assert_eq!(field, "grid.eta");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_experiment_is_parse_error() {
        let err = Config::parse("cutoff = 12\n", "t").unwrap_err();
        assert!(matches!(err, CliError::Parse { .. }), "{err}");
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let err = Config::parse("experiment = \"fig5b\"\nbogus = 1\n", "t").unwrap_err();
        match err {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unused_axis_rejected() {
        let err = Config::parse("experiment = \"fig4a\"\n[grid]\np = 0.5\n", "t").unwrap_err();
        assert!(
            matches!(err, CliError::Range { ref field, .. } if field == "grid.p"),
            "{err}"
        );
    }

    #[test]
    fn odd_noon_rejected() {
        let err = Config::parse("experiment = \"noon\"\n[grid]\nn = [2, 3]\n", "t").unwrap_err();
        assert!(
            matches!(err, CliError::Range { ref field, .. } if field == "grid.n"),
            "{err}"
        );
    }

    #[test]
    fn grid_cap_enforced() {
        let err = Config::parse(
            "experiment = \"fig6a\"\ngrid_cap = 10\n[grid]\np = [0.1, 0.2, 0.3]\neta = [0.1, 0.2, 0.3, 0.4]\n",
            "t",
        )
        .unwrap_err();
        assert!(
            matches!(
                err,
                CliError::GridTooLarge {
                    points: 12,
                    cap: 10
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn cutoff_override_checked() {
        let mut cfg = Config::from_shipped(ExperimentId::Noon).unwrap();
        let err = cfg
            .apply(&Overrides {
                cutoff: Some(4),
                ..Default::default()
            })
            .unwrap_err();
        assert!(
            matches!(err, CliError::CutoffTooSmall { required: 8, .. }),
            "{err}"
        );
    }
}
