//! Grid expansion and parallel evaluation of every experiment id.

use homsim::experiments::{fig4_row, noon_row, Fig5Engine, Fig6Engine};
use homsim::schemes::{CascadeMode, IdlerHerald};
use homsim::{
    fidelity, Circuit, Detector, DetectorModel, Error, Gate, Herald, HeraldOutcome, MixedState,
    ModeLayout, Objective, Squeeze, State,
};
use rayon::prelude::*;

use crate::config::{Config, CustomSpec, ExperimentId, GateSpec, OutcomeSpec};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(Option<f64>),
    Int(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Truncation leakage above the configured bound.
    Leakage,
    /// The herald cannot fire (conditional state has zero norm).
    ZeroProbability,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Leakage => "leakage",
            Status::ZeroProbability => "zero_probability",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Parameter cells followed by metric cells, in column order.
    pub cells: Vec<Cell>,
    pub probability: Option<f64>,
    pub leakage: Option<f64>,
    pub status: Status,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn flagged(&self) -> usize {
        self.rows.iter().filter(|r| r.status != Status::Ok).count()
    }
}

/// Columns that follow the per-experiment ones in every table.
pub const TRAILING_COLUMNS: [&str; 3] = ["probability", "leakage", "status"];

pub fn columns(id: ExperimentId) -> (Vec<&'static str>, Vec<&'static str>) {
    match id {
        ExperimentId::Fig4a => (
            vec!["s"],
            vec![
                "entropy_tmss",
                "entropy_first",
                "r_first",
                "entropy_second",
                "r_second",
            ],
        ),
        ExperimentId::Fig4b => (
            vec!["s"],
            vec!["epr_tmss", "epr_first", "r_first", "epr_second", "r_second"],
        ),
        ExperimentId::Fig5a | ExperimentId::Fig5b => (vec!["s", "eta"], vec!["fidelity"]),
        ExperimentId::Fig6a => (vec!["s", "p", "eta"], vec!["delta_phi", "phi"]),
        ExperimentId::Fig6b => (vec!["s", "p", "eta"], vec!["fidelity"]),
        ExperimentId::Noon => (vec!["n", "s", "eta"], vec!["fidelity"]),
        ExperimentId::Custom => (vec!["s", "eta", "phi"], vec!["fidelity"]),
    }
}

/// Metric values of one successful grid point.
struct Measured {
    metrics: Vec<Option<f64>>,
    probability: Option<f64>,
    leakage: f64,
}

fn finish(params: Vec<Cell>, width: usize, result: homsim::Result<Measured>, bound: f64) -> Row {
    let blank = || vec![Cell::Real(None); width];
    let mut cells = params;
    match result {
        Ok(m) => {
            let finite = m
                .metrics
                .iter()
                .chain([&m.probability, &Some(m.leakage)])
                .all(|v| v.is_none_or(f64::is_finite));
            if !finite {
                cells.extend(blank());
                return Row {
                    cells,
                    probability: None,
                    leakage: None,
                    status: Status::Failed,
                    note: Some("non-finite metric".into()),
                };
            }
            cells.extend(m.metrics.into_iter().map(Cell::Real));
            Row {
                cells,
                probability: m.probability,
                leakage: Some(m.leakage),
                status: if m.leakage > bound {
                    Status::Leakage
                } else {
                    Status::Ok
                },
                note: None,
            }
        }
        Err(Error::ZeroNormState { .. }) => {
            cells.extend(blank());
            Row {
                cells,
                probability: Some(0.0),
                leakage: None,
                status: Status::ZeroProbability,
                note: None,
            }
        }
        Err(e) => {
            cells.extend(blank());
            Row {
                cells,
                probability: None,
                leakage: None,
                status: Status::Failed,
                note: Some(e.to_string()),
            }
        }
    }
}

pub fn run(cfg: &Config) -> CliResult<Table> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let (params, metrics) = columns(cfg.experiment);
    let rows = pool.install(|| evaluate(cfg, metrics.len()))?;
    let mut columns = params;
    columns.extend(metrics);
    columns.extend(TRAILING_COLUMNS);
    Ok(Table { columns, rows })
}

fn axis(v: &Option<Vec<f64>>) -> Vec<Option<f64>> {
    match v {
        Some(xs) => xs.iter().copied().map(Some).collect(),
        None => vec![None],
    }
}

fn real(v: Option<f64>) -> Cell {
    Cell::Real(v)
}

fn evaluate(cfg: &Config, width: usize) -> CliResult<Vec<Row>> {
    let g = &cfg.grid;
    let bound = cfg.leakage_bound;
    let cutoff = cfg.cutoff;
    let ss = axis(&g.s);
    let etas = axis(&g.eta);
    let ps = axis(&g.p);
    let phis = axis(&g.phi);
    let unwrap = |v: Option<f64>| v.expect("axis required by this experiment");

    let rows = match cfg.experiment {
        ExperimentId::Fig4a | ExperimentId::Fig4b => {
            let objective = if cfg.experiment == ExperimentId::Fig4a {
                Objective::MaxEntropy
            } else {
                Objective::MinEpr
            };
            ss.par_iter()
                .map(|&s| {
                    let r = fig4_row(unwrap(s), objective, cutoff).map(|r| Measured {
                        metrics: vec![
                            Some(r.tmss),
                            Some(r.first),
                            Some(r.r_first),
                            Some(r.second),
                            Some(r.r_second),
                        ],
                        probability: None,
                        leakage: r.leakage,
                    });
                    finish(vec![real(s)], width, r, bound)
                })
                .collect()
        }
        ExperimentId::Fig5a | ExperimentId::Fig5b => ss
            .par_iter()
            .flat_map_iter(|&s| {
                let engine = Fig5Engine::new(unwrap(s), cutoff);
                etas.iter()
                    .map(|&eta| {
                        let r = engine.as_ref().map_err(Clone::clone).and_then(|e| {
                            let pt = e.evaluate(unwrap(eta))?;
                            Ok(Measured {
                                metrics: vec![Some(pt.fidelity)],
                                probability: Some(pt.probability),
                                leakage: pt.leakage,
                            })
                        });
                        finish(vec![real(s), real(eta)], width, r, bound)
                    })
                    .collect::<Vec<_>>()
            })
            .collect(),
        ExperimentId::Fig6a | ExperimentId::Fig6b => {
            let sensitivity = cfg.experiment == ExperimentId::Fig6a;
            let inner: Vec<(Option<f64>, Option<f64>)> = ps
                .iter()
                .flat_map(|&p| etas.iter().map(move |&eta| (p, eta)))
                .collect();
            let mut rows = Vec::with_capacity(ss.len() * inner.len());
            for &s in &ss {
                let engine = Fig6Engine::new(unwrap(s), cutoff);
                let block: Vec<Row> = inner
                    .par_iter()
                    .map(|&(p, eta)| {
                        let r = engine.as_ref().map_err(Clone::clone).and_then(|e| {
                            let (p, eta) = (unwrap(p), unwrap(eta));
                            if sensitivity {
                                let pt = e.evaluate(p, eta)?;
                                Ok(Measured {
                                    metrics: vec![Some(pt.delta_phi), Some(pt.phi)],
                                    probability: Some(pt.probability),
                                    leakage: pt.leakage,
                                })
                            } else {
                                let h = e.heralded(p, eta)?;
                                Ok(Measured {
                                    metrics: vec![Some(fidelity(e.target(), &h.state)?)],
                                    probability: Some(h.probability),
                                    leakage: h.leakage,
                                })
                            }
                        });
                        finish(vec![real(s), real(p), real(eta)], width, r, bound)
                    })
                    .collect();
                rows.extend(block);
            }
            rows
        }
        ExperimentId::Noon => {
            let ns = g.n.clone().unwrap_or_default();
            let mut points = Vec::new();
            for &n in &ns {
                for &s in &ss {
                    points.extend(etas.iter().map(|&eta| (n, s, eta)));
                }
            }
            let idler_cutoff = cfg.noon.idler_cutoff;
            let physical = cfg.noon.physical;
            points
                .par_iter()
                .map(|&(n, s, eta)| {
                    let r = (|| {
                        let mode = if physical {
                            let herald = match eta {
                                Some(eta) => IdlerHerald::OnOff(DetectorModel::on_off(eta)?),
                                None => IdlerHerald::Exact,
                            };
                            CascadeMode::Physical {
                                s: unwrap(s),
                                herald,
                                idler_cutoff,
                            }
                        } else {
                            CascadeMode::Ideal
                        };
                        let row = noon_row(n, mode, cutoff)?;
                        Ok(Measured {
                            metrics: vec![Some(row.fidelity)],
                            probability: Some(row.probability),
                            leakage: row.leakage,
                        })
                    })();
                    finish(vec![Cell::Int(n), real(s), real(eta)], width, r, bound)
                })
                .collect()
        }
        ExperimentId::Custom => {
            let spec = cfg
                .custom
                .as_ref()
                .expect("custom experiment carries a circuit");
            let prepared = Prepared::new(spec)?;
            let mut points = Vec::new();
            for &s in &ss {
                for &eta in &etas {
                    points.extend(phis.iter().map(|&phi| (s, eta, phi)));
                }
            }
            points
                .par_iter()
                .map(|&(s, eta, phi)| {
                    let r = prepared.run(spec, s, eta, phi);
                    finish(vec![real(s), real(eta), real(phi)], width, r, bound)
                })
                .collect()
        }
    };
    Ok(rows)
}

/// Input and target states of a custom circuit, built once per run.
struct Prepared {
    layout: ModeLayout,
    input: State,
    target: Option<State>,
}

impl Prepared {
    fn new(spec: &CustomSpec) -> homsim::Result<Self> {
        let layout = ModeLayout::new(spec.cutoffs.clone())?;
        let input_layout = layout.select(&(0..spec.inputs).collect::<Vec<_>>())?;
        let input = State::from_terms(input_layout, &spec.input)?.normalize()?.0;
        let target = match &spec.target {
            Some(t) => Some(
                State::from_terms(layout.select(&spec.output_modes())?, t)?
                    .normalize()?
                    .0,
            ),
            None => None,
        };
        Ok(Self {
            layout,
            input,
            target,
        })
    }

    fn run(
        &self,
        spec: &CustomSpec,
        s: Option<f64>,
        eta: Option<f64>,
        phi: Option<f64>,
    ) -> homsim::Result<Measured> {
        let pick =
            |own: Option<f64>, grid: Option<f64>| own.or(grid).expect("validated against the grid");
        let gates = spec
            .gates
            .iter()
            .map(|g| {
                Ok(match g {
                    GateSpec::Squeezer {
                        modes,
                        s: own,
                        phase,
                    } => Gate::Squeezer {
                        signal: modes.0,
                        idler: modes.1,
                        xi: Squeeze::new(pick(*own, s), *phase)?,
                    },
                    GateSpec::BeamSplitter { modes, param } => Gate::BeamSplitter {
                        modes: *modes,
                        param: *param,
                    },
                    GateSpec::Phase { mode, phi: own } => Gate::Phase {
                        mode: *mode,
                        phi: pick(*own, phi),
                    },
                })
            })
            .collect::<homsim::Result<Vec<_>>>()?;
        let detector = |own: Option<f64>| -> homsim::Result<Detector> {
            DetectorModel::on_off(pick(own, eta))
        };
        let entries = spec
            .herald
            .iter()
            .map(|(m, o)| {
                Ok((
                    *m,
                    match o {
                        OutcomeSpec::Fock(n) => HeraldOutcome::Fock(*n),
                        OutcomeSpec::Click(own) => HeraldOutcome::Click(detector(*own)?),
                        OutcomeSpec::NoClick(own) => HeraldOutcome::NoClick(detector(*own)?),
                    },
                ))
            })
            .collect::<homsim::Result<Vec<_>>>()?;

        let (state, probability, leakage) = if entries.is_empty() {
            let c = Circuit::new(
                self.layout.clone(),
                spec.inputs,
                gates,
                Herald::new(vec![])?,
            )?;
            let out = c.evolve(&self.input)?;
            (MixedState::pure(out.state.normalize()?.0), 1.0, out.leakage)
        } else {
            let c = Circuit::new(
                self.layout.clone(),
                spec.inputs,
                gates,
                Herald::new(entries)?,
            )?;
            let h = c.run(&self.input)?;
            (h.state, h.probability, h.leakage)
        };
        let fid = match &self.target {
            Some(t) => Some(fidelity(t, &state)?),
            None => None,
        };
        Ok(Measured {
            metrics: vec![fid],
            probability: Some(probability),
            leakage,
        })
    }
}
