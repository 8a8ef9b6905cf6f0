//! Ready-made `f64` recipes behind the reproduction tables: heralded
//! four-photon NOON generation, imperfect-source NOON generation with parity
//! metrology, entanglement concentration of a two-mode squeezed vacuum and the
//! NOON cascade.

use crate::detectors::{herald_evolved, DetectorModel, HeraldOutcome, HeraldSpec, Heralded};
use crate::error::Result;
use crate::fock::{MixedState, ModeLayout, PureState, Truncated};
use crate::metrics::{
    entanglement_entropy, epr_sum, fidelity, optimize_r, Objective, Order, ParitySignal,
};
use crate::optics::{apply_beam_splitter_5050, tmss_state, SqueezeParam};
use crate::scalar::C;
use crate::schemes::{
    noon_cascade, prepare_hom_input, squeezer_phases_for, superpose_add2_circuit, CascadeMode,
    IdlerHerald, SourceModel,
};

pub const FIG4_CUTOFF: usize = 25;
pub const FIG5_CUTOFF: usize = 12;
pub const FIG6_CUTOFF: usize = 12;
/// Phase grid used before refining the best parity sensitivity.
pub const PHASE_GRID: usize = 720;

/// `(|N,0⟩ ± |0,N⟩)/√2` on a two-mode layout with the given cutoff.
pub fn noon_state(n: usize, minus: bool, cutoff: usize) -> Result<PureState<f64>> {
    let h = 0.5f64.sqrt();
    let sign = if minus { -h } else { h };
    PureState::from_terms(
        ModeLayout::uniform(2, cutoff)?,
        &[
            (C::new(h, 0.0), vec![n, 0]),
            (C::new(sign, 0.0), vec![0, n]),
        ],
    )
}

/// Squeezer pair realizing `â†² + b̂†²`, which maps `|2,0⟩ − |0,2⟩` onto
/// `|4,0⟩ − |0,4⟩`.
pub fn noon4_squeezers(s: f64) -> Result<(SqueezeParam<f64>, SqueezeParam<f64>)> {
    let (p1, p2) = squeezer_phases_for(0.0);
    Ok((SqueezeParam::new(s, p1)?, SqueezeParam::new(s, p2)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig5Point {
    pub s: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub probability: f64,
    pub leakage: f64,
}

/// Evolved register for the ideal two-photon NOON input at coupling `s`.
pub struct Fig5Engine {
    s: f64,
    cutoff: usize,
    evolved: Truncated<f64>,
    target: PureState<f64>,
}

impl Fig5Engine {
    pub fn new(s: f64, cutoff: usize) -> Result<Self> {
        let layout = ModeLayout::uniform(2, cutoff)?;
        let (s1, s2) = noon4_squeezers(s)?;
        let circuit = superpose_add2_circuit(&layout, s1, s2, IdlerHerald::Exact, cutoff)?;
        let input = apply_beam_splitter_5050(&PureState::fock(layout, &[1, 1])?, 0, 1)?.state;
        Ok(Self {
            s,
            cutoff,
            evolved: circuit.evolve(&input)?,
            target: noon_state(4, true, cutoff)?,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn evaluate(&self, eta: f64) -> Result<Fig5Point> {
        let click = HeraldOutcome::Click(DetectorModel::on_off(eta)?);
        let spec = HeraldSpec::new(vec![(2, click), (3, click)])?;
        let h = herald_evolved(&[(1.0, self.evolved.clone())], &spec)?;
        Ok(Fig5Point {
            s: self.s,
            eta,
            fidelity: fidelity(&self.target, &h.state)?,
            probability: h.probability,
            leakage: h.leakage,
        })
    }
}

pub fn fig5_point(s: f64, eta: f64, cutoff: usize) -> Result<Fig5Point> {
    Fig5Engine::new(s, cutoff)?.evaluate(eta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig6Point {
    pub s: f64,
    pub p: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub delta_phi: f64,
    /// Interferometer phase at which `delta_phi` is attained.
    pub phi: f64,
    pub probability: f64,
    pub leakage: f64,
}

/// Caches the evolved register for each of the four source branches so that
/// `(p, η)` grids reuse one squeezer evolution per `s`.
pub struct Fig6Engine {
    s: f64,
    cutoff: usize,
    /// Evolved `B|0,0⟩, B|1,0⟩, B|0,1⟩, B|1,1⟩`.
    evolved: [Truncated<f64>; 4],
    target: PureState<f64>,
}

impl Fig6Engine {
    pub fn new(s: f64, cutoff: usize) -> Result<Self> {
        let layout = ModeLayout::uniform(2, cutoff)?;
        let (s1, s2) = noon4_squeezers(s)?;
        let circuit = superpose_add2_circuit(&layout, s1, s2, IdlerHerald::Exact, cutoff)?;
        let run = |occ: [usize; 2]| -> Result<Truncated<f64>> {
            let input =
                apply_beam_splitter_5050(&PureState::fock(layout.clone(), &occ)?, 0, 1)?.state;
            circuit.evolve(&input)
        };
        Ok(Self {
            s,
            cutoff,
            evolved: [run([0, 0])?, run([1, 0])?, run([0, 1])?, run([1, 1])?],
            target: noon_state(4, true, cutoff)?,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Target `(|4,0⟩ − |0,4⟩)/√2`.
    pub fn target(&self) -> &PureState<f64> {
        &self.target
    }

    pub fn evaluate(&self, p: f64, eta: f64) -> Result<Fig6Point> {
        let h = self.heralded(p, eta)?;
        let (phi, delta_phi) = ParitySignal::new(&h.state)?.best_sensitivity(PHASE_GRID)?;
        Ok(Fig6Point {
            s: self.s,
            p,
            eta,
            fidelity: fidelity(&self.target, &h.state)?,
            delta_phi,
            phi,
            probability: h.probability,
            leakage: h.leakage,
        })
    }

    /// Click-click conditional state for source efficiency `p`.
    pub fn heralded(&self, p: f64, eta: f64) -> Result<Heralded<f64>> {
        let q = 1.0 - p;
        let source = SourceModel::new(p)?;
        let priors = [q * q, q * source.p(), source.p() * q, p * p];
        let weighted: Vec<(f64, Truncated<f64>)> = priors
            .iter()
            .zip(&self.evolved)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, e)| (*w, e.clone()))
            .collect();
        let click = HeraldOutcome::Click(DetectorModel::on_off(eta)?);
        let spec = HeraldSpec::new(vec![(2, click), (3, click)])?;
        herald_evolved(&weighted, &spec)
    }
}

/// Source mixture after the input splitter, for inspection.
pub fn fig6_input(p: f64, cutoff: usize) -> Result<MixedState<f64>> {
    prepare_hom_input(SourceModel::new(p)?, cutoff)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig4Row {
    pub s: f64,
    pub tmss: f64,
    pub first: f64,
    pub r_first: f64,
    pub second: f64,
    pub r_second: f64,
    pub leakage: f64,
}

/// Entropy (`MaxEntropy`) or EPR sum (`MinEpr`) of the squeezed vacuum and of
/// its first- and second-order operated versions at their optimal `r`.
pub fn fig4_row(s: f64, objective: Objective, cutoff: usize) -> Result<Fig4Row> {
    let tm = tmss_state(s, ModeLayout::uniform(2, cutoff)?)?;
    let tmss = match objective {
        Objective::MaxEntropy => entanglement_entropy(&tm.state, &[0])?,
        Objective::MinEpr => epr_sum(&tm.state, 0, 1)?,
    };
    let first = optimize_r(objective, Order::First, s, cutoff)?;
    let second = optimize_r(objective, Order::Second, s, cutoff)?;
    Ok(Fig4Row {
        s,
        tmss,
        first: first.value,
        r_first: first.r,
        second: second.value,
        r_second: second.r,
        leakage: tm.leakage + first.leakage.max(second.leakage),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoonRow {
    pub n: usize,
    pub fidelity: f64,
    pub probability: f64,
    pub leakage: f64,
}

/// Cascade output compared with `(|N,0⟩ + |0,N⟩)/√2`.
pub fn noon_row(n: usize, mode: CascadeMode<f64>, cutoff: usize) -> Result<NoonRow> {
    let c = noon_cascade(n, mode, cutoff)?;
    let target = noon_state(n, false, cutoff)?;
    Ok(NoonRow {
        n,
        fidelity: fidelity(&target, &c.state)?,
        probability: c.probability,
        leakage: c.leakage,
    })
}
