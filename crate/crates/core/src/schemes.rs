//! Heralded circuits realizing second-order superposition operations.
//!
//! Register conventions (leading modes are inputs, the rest start in vacuum):
//!
//! * nonlocal `â†² + e^{iφ} b̂†²`: `a, b | c, d`; `S_ac`, `S_bd`, balanced `B_cd`,
//!   herald on `c, d`.
//! * weighted nonlocal: `a, b | c, d, e, f`; additionally `B_ce(t₁)`, `B_df(t₂)`
//!   before the balanced splitter, with `e, f` vetoed.
//! * local `â² + γ â†²`: `a | b, c, d, e`; `B_ab` taps photons into `b`,
//!   `S_ad` adds pairs, `B_bc(t₁)`, `B_de(t₂)`, balanced `B_bd`; herald on
//!   `b, d`, veto on `c, e`.
//!
//! With idler vacuum the exact ⟨1,1| herald on the nonlocal circuit yields
//! `½(ζ₁² â†² − ζ₂² b̂†²) cosh(s₁)^{−(n̂_a+1)} cosh(s₂)^{−(n̂_b+1)} |ψ⟩` with
//! `ζⱼ = e^{iφⱼ} tanh sⱼ`, i.e. superposition phase `φ = 2(φ₂ − φ₁) + π`.

use crate::circuit::{Circuit, Gate};
use crate::detectors::{herald_mixed, DetectorModel, HeraldOutcome, HeraldSpec, Heralded};
use crate::error::{Error, Result};
use crate::fock::{MixedState, ModeLayout, PureState, Truncated};
use crate::optics::{apply_beam_splitter_5050, BeamSplitterParam, SqueezeParam};
use crate::scalar::{cone, Real, C};

/// Population above which a level counts as occupied for headroom checks.
const HEADROOM_TOL: f64 = 1e-12;

/// Detection event requested on the two idlers feeding the balanced splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdlerHerald<T> {
    /// Exact single-photon projection on both detectors.
    Exact,
    /// Coincident clicks of two on-off detectors.
    OnOff(DetectorModel<T>),
}

impl<T: Real> IdlerHerald<T> {
    fn outcome(&self) -> HeraldOutcome<T> {
        match self {
            IdlerHerald::Exact => HeraldOutcome::Fock(1),
            IdlerHerald::OnOff(d) => HeraldOutcome::Click(*d),
        }
    }
}

/// Largest occupied level of `mode` (population above the headroom tolerance).
fn max_occupied<T: Real>(state: &PureState<T>, mode: usize) -> usize {
    let l = state.layout();
    let tol = T::lit(HEADROOM_TOL);
    let mut pops = vec![T::zero(); l.cutoff(mode) + 1];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let n = l.occupation(i, mode);
        pops[n] = pops[n] + a.norm_sqr();
    }
    pops.iter().rposition(|p| *p > tol).unwrap_or(0)
}

fn check_headroom<T: Real>(state: &PureState<T>, headroom: usize) -> Result<()> {
    let l = state.layout();
    for m in 0..l.num_modes() {
        let required = max_occupied(state, m) + headroom;
        if required > l.cutoff(m) {
            return Err(Error::CutoffTooSmall {
                cutoff: l.cutoff(m),
                required,
            });
        }
    }
    Ok(())
}

fn require_modes<T: Real>(state: &PureState<T>, modes: usize) -> Result<()> {
    if state.layout().num_modes() != modes {
        return Err(Error::InvalidLayout(format!(
            "expected a {modes}-mode state, got {}",
            state.layout().num_modes()
        )));
    }
    Ok(())
}

/// Superposition phase realized by squeezer phases `(φ₁, φ₂)`.
pub fn superposition_phase<T: Real>(phi1: T, phi2: T) -> T {
    T::lit(2.0) * (phi2 - phi1) + T::PI()
}

/// Squeezer phases `(0, (φ − π)/2)` realizing superposition phase `φ`.
pub fn squeezer_phases_for<T: Real>(phi: T) -> (T, T) {
    (T::zero(), (phi - T::PI()) * T::lit(0.5))
}

/// Circuit for `â†² + e^{iφ} b̂†²` on a signal layout.
pub fn superpose_add2_circuit<T: Real>(
    signal_layout: &ModeLayout,
    s1: SqueezeParam<T>,
    s2: SqueezeParam<T>,
    herald: IdlerHerald<T>,
    idler_cutoff: usize,
) -> Result<Circuit<T>> {
    if signal_layout.num_modes() != 2 {
        return Err(Error::InvalidLayout("signal must have 2 modes".into()));
    }
    let layout = signal_layout.concat(&ModeLayout::uniform(2, idler_cutoff)?)?;
    let gates = vec![
        Gate::Squeezer {
            signal: 0,
            idler: 2,
            xi: s1,
        },
        Gate::Squeezer {
            signal: 1,
            idler: 3,
            xi: s2,
        },
        Gate::balanced(2, 3),
    ];
    let spec = HeraldSpec::new(vec![(2, herald.outcome()), (3, herald.outcome())])?;
    Circuit::new(layout, 2, gates, spec)
}

/// Heralded `â†² + e^{iφ} b̂†²` with `φ = 2(φ₂ − φ₁) + π`.
pub fn superpose_add2<T: Real>(
    signal: &PureState<T>,
    s1: SqueezeParam<T>,
    s2: SqueezeParam<T>,
    herald: IdlerHerald<T>,
    idler_cutoff: usize,
) -> Result<Heralded<T>> {
    require_modes(signal, 2)?;
    check_headroom(signal, 2)?;
    superpose_add2_circuit(signal.layout(), s1, s2, herald, idler_cutoff)?.run(signal)
}

/// `(â†² + e^{iφ} γ b̂†²)|ψ⟩`, normalized, with its squared norm.
pub fn superpose_add2_ideal<T: Real>(
    signal: &PureState<T>,
    phi: T,
    gamma: C<T>,
) -> Result<(PureState<T>, T)> {
    require_modes(signal, 2)?;
    check_headroom(signal, 2)?;
    let aa = raise_twice(signal, 0)?;
    let bb = raise_twice(signal, 1)?;
    let v = aa.add_scaled(C::from_polar(T::one(), phi) * gamma, &bb)?;
    let (unit, norm) = v.normalize()?;
    Ok((unit, norm * norm))
}

fn raise_twice<T: Real>(s: &PureState<T>, mode: usize) -> Result<PureState<T>> {
    Ok(s.apply_creation(mode)?.state.apply_creation(mode)?.state)
}

fn lower_twice<T: Real>(s: &PureState<T>, mode: usize) -> Result<PureState<T>> {
    s.apply_annihilation(mode)?.apply_annihilation(mode)
}

/// Weight `γ = t₂² / t₁²` of the weighted nonlocal operation.
pub fn weighted_gamma<T: Real>(t1: &BeamSplitterParam<T>, t2: &BeamSplitterParam<T>) -> C<T> {
    let a = t1.t() * t1.t();
    let b = t2.t() * t2.t();
    b / a
}

#[allow(clippy::too_many_arguments)]
pub fn superpose_add2_weighted_circuit<T: Real>(
    signal_layout: &ModeLayout,
    s1: SqueezeParam<T>,
    s2: SqueezeParam<T>,
    t1: BeamSplitterParam<T>,
    t2: BeamSplitterParam<T>,
    herald: IdlerHerald<T>,
    veto: HeraldOutcome<T>,
    idler_cutoff: usize,
) -> Result<Circuit<T>> {
    if signal_layout.num_modes() != 2 {
        return Err(Error::InvalidLayout("signal must have 2 modes".into()));
    }
    let layout = signal_layout.concat(&ModeLayout::uniform(4, idler_cutoff)?)?;
    let gates = vec![
        Gate::Squeezer {
            signal: 0,
            idler: 2,
            xi: s1,
        },
        Gate::Squeezer {
            signal: 1,
            idler: 3,
            xi: s2,
        },
        Gate::BeamSplitter {
            modes: (2, 4),
            param: t1,
        },
        Gate::BeamSplitter {
            modes: (3, 5),
            param: t2,
        },
        Gate::balanced(2, 3),
    ];
    let spec = HeraldSpec::new(vec![
        (2, herald.outcome()),
        (3, herald.outcome()),
        (4, veto),
        (5, veto),
    ])?;
    Circuit::new(layout, 2, gates, spec)
}

/// Heralded `â†² + e^{iφ} γ b̂†²` with `γ = t₂²/t₁²` (ancillas `e, f` vetoed
/// by exact vacuum projection).
pub fn superpose_add2_weighted<T: Real>(
    signal: &PureState<T>,
    s1: SqueezeParam<T>,
    s2: SqueezeParam<T>,
    t1: BeamSplitterParam<T>,
    t2: BeamSplitterParam<T>,
    herald: IdlerHerald<T>,
    idler_cutoff: usize,
) -> Result<Heralded<T>> {
    require_modes(signal, 2)?;
    check_headroom(signal, 2)?;
    superpose_add2_weighted_circuit(
        signal.layout(),
        s1,
        s2,
        t1,
        t2,
        herald,
        HeraldOutcome::Fock(0),
        idler_cutoff,
    )?
    .run(signal)
}

/// Local-operation weight `γ = −ζ² t₂² / ((r/t)² t₁²)`, `ζ = e^{iφ} tanh s`,
/// where `(t, r)` is the tapping splitter.
pub fn local_gamma<T: Real>(
    tap: &BeamSplitterParam<T>,
    xi: &SqueezeParam<T>,
    t1: &BeamSplitterParam<T>,
    t2: &BeamSplitterParam<T>,
) -> C<T> {
    let zeta = C::from_polar(xi.s().tanh(), xi.phi());
    let ratio = tap.r() / tap.t();
    -(zeta * zeta) * t2.t() * t2.t() / (ratio * ratio * t1.t() * t1.t())
}

#[allow(clippy::too_many_arguments)]
pub fn local_superpose_circuit<T: Real>(
    signal_layout: &ModeLayout,
    tap: BeamSplitterParam<T>,
    xi: SqueezeParam<T>,
    t1: BeamSplitterParam<T>,
    t2: BeamSplitterParam<T>,
    herald: IdlerHerald<T>,
    veto: HeraldOutcome<T>,
    ancilla_cutoff: usize,
) -> Result<Circuit<T>> {
    if signal_layout.num_modes() != 1 {
        return Err(Error::InvalidLayout("signal must have 1 mode".into()));
    }
    let layout = signal_layout.concat(&ModeLayout::uniform(4, ancilla_cutoff)?)?;
    // a=0, b=1, c=2, d=3, e=4
    let gates = vec![
        Gate::BeamSplitter {
            modes: (0, 1),
            param: tap,
        },
        Gate::Squeezer {
            signal: 0,
            idler: 3,
            xi,
        },
        Gate::BeamSplitter {
            modes: (1, 2),
            param: t1,
        },
        Gate::BeamSplitter {
            modes: (3, 4),
            param: t2,
        },
        Gate::balanced(1, 3),
    ];
    let spec = HeraldSpec::new(vec![
        (1, herald.outcome()),
        (3, herald.outcome()),
        (2, veto),
        (4, veto),
    ])?;
    Circuit::new(layout, 1, gates, spec)
}

/// Heralded local `â² + γ â†²` on a single mode, see [`local_gamma`].
#[allow(clippy::too_many_arguments)]
pub fn local_superpose<T: Real>(
    signal: &PureState<T>,
    tap: BeamSplitterParam<T>,
    xi: SqueezeParam<T>,
    t1: BeamSplitterParam<T>,
    t2: BeamSplitterParam<T>,
    herald: IdlerHerald<T>,
    ancilla_cutoff: usize,
) -> Result<Heralded<T>> {
    require_modes(signal, 1)?;
    check_headroom(signal, 2)?;
    local_superpose_circuit(
        signal.layout(),
        tap,
        xi,
        t1,
        t2,
        herald,
        HeraldOutcome::Fock(0),
        ancilla_cutoff,
    )?
    .run(signal)
}

/// `(â² + γ â†²)|ψ⟩` on a single mode, normalized, with its squared norm.
pub fn local_superpose_ideal<T: Real>(
    signal: &PureState<T>,
    gamma: C<T>,
) -> Result<(PureState<T>, T)> {
    require_modes(signal, 1)?;
    check_headroom(signal, 2)?;
    let v = lower_twice(signal, 0)?.add_scaled(gamma, &raise_twice(signal, 0)?)?;
    let (unit, norm) = v.normalize()?;
    Ok((unit, norm * norm))
}

/// Phases `φ_k = π + 2π(2k − 1)/N`, `k = 1..N/2`, for which
/// `Π_k (â†² + e^{iφ_k} b̂†²)|0,0⟩ ∝ (â†ᴺ + b̂†ᴺ)|0,0⟩` for every even `N`.
pub fn cascade_phases<T: Real>(n: usize) -> Vec<T> {
    let nf = T::from_usize_lossy(n);
    (1..=n / 2)
        .map(|k| T::PI() + T::TAU() * T::from_usize_lossy(2 * k - 1) / nf)
        .collect()
}

/// Phases `φ_k = 4πk/N`, `k = 1..N/2`. Their product is
/// `â†ᴺ − (−1)^{N/2} b̂†ᴺ`, so the relative sign of the NOON state flips
/// when `N/2` is even.
pub fn uniform_cascade_phases<T: Real>(n: usize) -> Vec<T> {
    let nf = T::from_usize_lossy(n);
    (1..=n / 2)
        .map(|k| T::lit(2.0) * T::TAU() * T::from_usize_lossy(k) / nf)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CascadeMode<T> {
    /// Exact operator application.
    Ideal,
    /// Repeated heralded circuits with both squeezers at strength `s`.
    Physical {
        s: T,
        herald: IdlerHerald<T>,
        idler_cutoff: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cascade<T> {
    pub state: MixedState<T>,
    /// Product of the stage herald probabilities (1 in ideal mode).
    pub probability: T,
    pub stage_probabilities: Vec<T>,
    pub leakage: T,
}

fn check_cascade_n(n: usize, cutoff: usize) -> Result<()> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "NOON cascade needs an even N >= 2, got {n}"
        )));
    }
    if cutoff < n {
        return Err(Error::CutoffTooSmall {
            cutoff,
            required: n,
        });
    }
    Ok(())
}

/// Eigen-weights of a cascade mixture at or below this are dropped.
const COMPRESS_TOL: f64 = 1e-14;

/// Builds `(â†ᴺ + b̂†ᴺ)|0,0⟩` by `N/2` second-order operations with
/// [`cascade_phases`].
pub fn noon_cascade<T: Real>(n: usize, mode: CascadeMode<T>, cutoff: usize) -> Result<Cascade<T>> {
    noon_cascade_with_phases(n, &cascade_phases(n), mode, cutoff)
}

pub fn noon_cascade_with_phases<T: Real>(
    n: usize,
    phases: &[T],
    mode: CascadeMode<T>,
    cutoff: usize,
) -> Result<Cascade<T>> {
    check_cascade_n(n, cutoff)?;
    if phases.len() != n / 2 {
        return Err(Error::InvalidParameter(format!(
            "{} phases for {} stages",
            phases.len(),
            n / 2
        )));
    }
    let layout = ModeLayout::uniform(2, cutoff)?;
    let vac = PureState::vacuum(layout.clone());
    match mode {
        CascadeMode::Ideal => {
            let mut st = vac;
            for &phi in phases {
                st = superpose_add2_ideal(&st, phi, cone())?.0;
            }
            Ok(Cascade {
                state: MixedState::pure(st),
                probability: T::one(),
                stage_probabilities: vec![T::one(); phases.len()],
                leakage: T::zero(),
            })
        }
        CascadeMode::Physical {
            s,
            herald,
            idler_cutoff,
        } => {
            let mut mix = MixedState::pure(vac);
            let mut stage_probabilities = Vec::with_capacity(phases.len());
            let mut leakage = T::zero();
            for &phi in phases {
                let (p1, p2) = squeezer_phases_for(phi);
                let circuit = superpose_add2_circuit(
                    &layout,
                    SqueezeParam::new(s, p1)?,
                    SqueezeParam::new(s, p2)?,
                    herald,
                    idler_cutoff,
                )?;
                let h = herald_mixed(&mix, &circuit)?;
                stage_probabilities.push(h.probability);
                leakage = leakage + h.leakage;
                // on-off heralds multiply branches every stage
                mix = h.state.compress(T::lit(COMPRESS_TOL));
            }
            let probability = stage_probabilities.iter().fold(T::one(), |a, p| a * *p);
            Ok(Cascade {
                state: mix,
                probability,
                stage_probabilities,
                leakage,
            })
        }
    }
}

/// `(â + b̂)|ψ⟩`, normalized, with its squared norm.
pub fn coherent_subtract<T: Real>(state: &PureState<T>) -> Result<(PureState<T>, T)> {
    require_modes(state, 2)?;
    let v = state
        .apply_annihilation(0)?
        .add_scaled(cone(), &state.apply_annihilation(1)?)?;
    let (unit, norm) = v.normalize()?;
    Ok((unit, norm * norm))
}

/// Single-photon source emitting `(1 − p)|0⟩⟨0| + p|1⟩⟨1|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel<T> {
    p: T,
}

impl<T: Real> SourceModel<T> {
    pub fn new(p: T) -> Result<Self> {
        if !(p >= T::zero() && p <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "source efficiency {p} outside [0, 1]"
            )));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> T {
        self.p
    }
}

/// Two imperfect single photons sent through a balanced splitter: branches
/// `|0,0⟩, B|1,0⟩, B|0,1⟩, B|1,1⟩` with binomial weights; empty branches are
/// omitted.
pub fn prepare_hom_input<T: Real>(source: SourceModel<T>, cutoff: usize) -> Result<MixedState<T>> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall {
            cutoff,
            required: 2,
        });
    }
    let layout = ModeLayout::uniform(2, cutoff)?;
    let p = source.p();
    let q = T::one() - p;
    let mut branches = Vec::new();
    for (w, occ) in [
        (q * q, [0, 0]),
        (p * q, [1, 0]),
        (q * p, [0, 1]),
        (p * p, [1, 1]),
    ] {
        if w > T::zero() {
            let Truncated { state, .. } =
                apply_beam_splitter_5050(&PureState::fock(layout.clone(), &occ)?, 0, 1)?;
            branches.push((w, state));
        }
    }
    MixedState::new(branches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn noon(n: usize, sign: f64, cut: usize) -> PureState<f64> {
        let h = 0.5f64.sqrt();
        PureState::from_terms(
            ModeLayout::uniform(2, cut).unwrap(),
            &[(c(h, 0.), vec![n, 0]), (c(sign * h, 0.), vec![0, n])],
        )
        .unwrap()
    }

    fn overlap(a: &PureState<f64>, b: &PureState<f64>) -> f64 {
        a.inner(b).unwrap().norm_sqr()
    }

    #[test]
    fn ideal_operation_examples() {
        let vac = PureState::vacuum(ModeLayout::uniform(2, 4).unwrap());
        let (minus, n2) = superpose_add2_ideal(&vac, PI, cone()).unwrap();
        assert_abs_diff_eq!(overlap(&minus, &noon(2, -1.0, 4)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(n2, 4.0, epsilon = 1e-13);
        let (only_a, _) = superpose_add2_ideal(&vac, 0.0, c(0., 0.)).unwrap();
        assert_abs_diff_eq!(only_a.amplitude(&[2, 0]).unwrap().re, 1.0, epsilon = 1e-14);
        let (plus, _) = superpose_add2_ideal(&vac, 0.0, cone()).unwrap();
        assert_abs_diff_eq!(overlap(&plus, &noon(2, 1.0, 4)), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn headroom_is_enforced() {
        let s = PureState::fock(ModeLayout::uniform(2, 3).unwrap(), &[2, 0]).unwrap();
        assert!(matches!(
            superpose_add2_ideal(&s, 0.0, cone()),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn uniform_phases_flip_sign_for_n_multiple_of_four() {
        for (n, sign) in [(2usize, 1.0f64), (4, -1.0), (6, 1.0), (8, -1.0)] {
            let out =
                noon_cascade_with_phases(n, &uniform_cascade_phases(n), CascadeMode::Ideal, n)
                    .unwrap();
            let st = &out.state.branches()[0].1;
            assert_abs_diff_eq!(overlap(st, &noon(n, sign, n)), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn cascade_rejects_odd_or_small() {
        assert!(noon_cascade::<f64>(3, CascadeMode::Ideal, 4).is_err());
        assert!(matches!(
            noon_cascade::<f64>(6, CascadeMode::Ideal, 4),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn coherent_subtraction_examples() {
        let (out, _) = coherent_subtract(&noon(4, 1.0, 4)).unwrap();
        assert_abs_diff_eq!(overlap(&out, &noon(3, 1.0, 4)), 1.0, epsilon = 1e-14);
        let one = PureState::<f64>::fock(ModeLayout::uniform(2, 2).unwrap(), &[1, 0]).unwrap();
        let (v, _) = coherent_subtract(&one).unwrap();
        assert_abs_diff_eq!(v.amplitude(&[0, 0]).unwrap().re, 1.0, epsilon = 1e-15);
        let vac = PureState::<f64>::vacuum(ModeLayout::uniform(2, 2).unwrap());
        assert!(matches!(
            coherent_subtract(&vac),
            Err(Error::ZeroNormState { .. })
        ));
    }

    #[test]
    fn hom_input_branches() {
        let m = prepare_hom_input(SourceModel::new(1.0f64).unwrap(), 4).unwrap();
        assert_eq!(m.len(), 1);
        assert_abs_diff_eq!(
            overlap(&m.branches()[0].1, &noon(2, -1.0, 4)),
            1.0,
            epsilon = 1e-14
        );
        let v = prepare_hom_input(SourceModel::new(0.0f64).unwrap(), 4).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(
            v.branches()[0].1,
            PureState::vacuum(ModeLayout::uniform(2, 4).unwrap())
        );
        for p in [0.1, 0.37, 0.69, 0.95] {
            let m = prepare_hom_input(SourceModel::new(p).unwrap(), 3).unwrap();
            assert_abs_diff_eq!(m.total_weight(), 1.0, epsilon = 1e-15);
            assert_eq!(m.len(), 4);
        }
        assert!(SourceModel::new(1.2f64).is_err());
    }

    #[test]
    fn phase_mapping_round_trip() {
        for phi in [0.0, 0.4, PI, 5.0] {
            let (a, b) = squeezer_phases_for(phi);
            assert_abs_diff_eq!(superposition_phase(a, b), phi, epsilon = 1e-14);
        }
    }
}
