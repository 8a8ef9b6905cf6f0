//! Measurement models and heralded conditional states.
//!
//! Conditioning never builds a POVM element as a matrix. Both detector
//! elements are diagonal in the Fock basis, so the conditional state is an
//! explicit sum over idler Fock outcomes, each weighted by the product of the
//! per-detector weights.

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::fock::{MixedState, ModeLayout, PureState, Truncated, ZERO_NORM_SQR};
use crate::scalar::{czero, Real, C};

/// Posterior branches lighter than this are dropped.
pub const PRUNE_WEIGHT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    /// Resolves exactly one photon (click) or none (no click).
    IdealSpd,
    /// Bucket detector with efficiency `eta`.
    OnOff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel<T> {
    pub eta: T,
    pub kind: DetectorKind,
}

impl<T: Real> DetectorModel<T> {
    pub fn on_off(eta: T) -> Result<Self> {
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "detector efficiency {eta} outside [0, 1]"
            )));
        }
        Ok(Self {
            eta,
            kind: DetectorKind::OnOff,
        })
    }

    pub fn ideal_spd() -> Self {
        Self {
            eta: T::one(),
            kind: DetectorKind::IdealSpd,
        }
    }

    pub fn no_click_weight(&self, n: usize) -> T {
        match self.kind {
            DetectorKind::OnOff => povm_no_click_weight(n, self.eta),
            DetectorKind::IdealSpd => {
                if n == 0 {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    pub fn click_weight(&self, n: usize) -> T {
        match self.kind {
            DetectorKind::OnOff => T::one() - povm_no_click_weight(n, self.eta),
            DetectorKind::IdealSpd => {
                if n == 1 {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

/// `(1 − η)ⁿ`, the no-click element of the on-off POVM on `|n⟩`.
pub fn povm_no_click_weight<T: Real>(n: usize, eta: T) -> T {
    (T::one() - eta).powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeraldOutcome<T> {
    Fock(usize),
    Click(DetectorModel<T>),
    NoClick(DetectorModel<T>),
}

impl<T: Real> HeraldOutcome<T> {
    pub fn weight(&self, n: usize) -> T {
        match self {
            HeraldOutcome::Fock(k) => {
                if *k == n {
                    T::one()
                } else {
                    T::zero()
                }
            }
            HeraldOutcome::Click(d) => d.click_weight(n),
            HeraldOutcome::NoClick(d) => d.no_click_weight(n),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeraldSpec<T> {
    entries: Vec<(usize, HeraldOutcome<T>)>,
}

impl<T: Real> HeraldSpec<T> {
    pub fn new(entries: Vec<(usize, HeraldOutcome<T>)>) -> Result<Self> {
        let mut modes: Vec<usize> = entries.iter().map(|(m, _)| *m).collect();
        modes.sort_unstable();
        if let Some(w) = modes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!(
                "mode {} heralded twice",
                w[0]
            )));
        }
        Ok(Self { entries })
    }

    /// Exact Fock projections.
    pub fn exact(outcomes: &[(usize, usize)]) -> Result<Self> {
        Self::new(
            outcomes
                .iter()
                .map(|&(m, n)| (m, HeraldOutcome::Fock(n)))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[(usize, HeraldOutcome<T>)] {
        &self.entries
    }

    pub fn modes(&self) -> Vec<usize> {
        self.entries.iter().map(|(m, _)| *m).collect()
    }

    pub(crate) fn check_against(&self, layout: &ModeLayout) -> Result<()> {
        for (m, _) in &self.entries {
            layout.check_mode(*m)?;
        }
        if self.entries.len() >= layout.num_modes() {
            return Err(Error::InvalidParameter(
                "herald must leave at least one unmeasured mode".into(),
            ));
        }
        Ok(())
    }
}

/// Conditional state after a herald.
#[derive(Debug, Clone, PartialEq)]
pub struct Heralded<T> {
    pub state: MixedState<T>,
    /// Success probability (the normalizing denominator).
    pub probability: T,
    /// Posterior weight dropped by pruning.
    pub pruned: T,
    /// Truncation leakage accumulated before the measurement.
    pub leakage: T,
}

/// Unnormalized outcome branches `(w·‖v‖², v)` before posterior weighting.
struct RawBranches<T> {
    layout: ModeLayout,
    branches: Vec<(T, PureState<T>)>,
}

fn contract<T: Real>(state: &PureState<T>, spec: &HeraldSpec<T>) -> Result<RawBranches<T>> {
    let layout = state.layout();
    spec.check_against(layout)?;
    let hmodes = spec.modes();
    let rmodes: Vec<usize> = (0..layout.num_modes())
        .filter(|m| !hmodes.contains(m))
        .collect();
    let rlayout = layout.select(&rmodes)?;

    // combo index over herald digits, first herald entry slowest
    let hcut: Vec<usize> = hmodes.iter().map(|&m| layout.cutoff(m)).collect();
    let mut hstride = vec![1usize; hmodes.len()];
    let mut ncombo = 1usize;
    for k in (0..hmodes.len()).rev() {
        hstride[k] = ncombo;
        ncombo *= hcut[k] + 1;
    }
    let weights: Vec<T> = (0..ncombo)
        .map(|ci| {
            spec.entries
                .iter()
                .enumerate()
                .fold(T::one(), |acc, (k, (_, outcome))| {
                    acc * outcome.weight((ci / hstride[k]) % (hcut[k] + 1))
                })
        })
        .collect();
    let mut vecs: Vec<Option<Vec<C<T>>>> = weights
        .iter()
        .map(|w| (*w > T::zero()).then(|| vec![czero(); rlayout.dim()]))
        .collect();
    for (i, a) in state.amplitudes().iter().enumerate() {
        if *a == czero() {
            continue;
        }
        let ci = hmodes
            .iter()
            .enumerate()
            .fold(0, |acc, (k, &m)| acc + layout.occupation(i, m) * hstride[k]);
        if let Some(v) = vecs[ci].as_mut() {
            let ri = rmodes.iter().enumerate().fold(0, |acc, (k, &m)| {
                acc + layout.occupation(i, m) * rlayout.stride(k)
            });
            v[ri] = *a;
        }
    }
    let mut branches = Vec::new();
    for (w, v) in weights.into_iter().zip(vecs) {
        let Some(v) = v else { continue };
        let st = PureState::from_amplitudes(rlayout.clone(), v)?;
        let p = w * st.norm_sqr();
        if p > T::zero() {
            branches.push((p, st));
        }
    }
    Ok(RawBranches {
        layout: rlayout,
        branches,
    })
}

/// Turns weighted unnormalized branches into a pruned posterior mixture.
fn posterior<T: Real>(
    layout: ModeLayout,
    raw: Vec<(T, PureState<T>)>,
    probability: T,
    leakage: T,
) -> Result<Heralded<T>> {
    let total = raw.iter().fold(T::zero(), |a, (p, _)| a + *p);
    if !(total >= T::lit(ZERO_NORM_SQR)) {
        return Err(Error::ZeroNormState {
            norm_sqr: total.to_f64().unwrap_or(0.0),
        });
    }
    let cut = T::lit(PRUNE_WEIGHT);
    let mut pruned = T::zero();
    let mut kept = Vec::new();
    for (p, st) in raw {
        let w = p / total;
        if w < cut {
            pruned = pruned + w;
            continue;
        }
        let n = st.norm();
        kept.push((w, st.scaled(C::new(T::one() / n, T::zero()))));
    }
    let norm = T::one() - pruned;
    for (w, _) in kept.iter_mut() {
        *w = *w / norm;
    }
    let state = if kept.is_empty() {
        return Err(Error::ZeroNormState { norm_sqr: 0.0 });
    } else {
        MixedState::new(kept)?
    };
    debug_assert_eq!(state.layout(), &layout);
    Ok(Heralded {
        state,
        probability,
        pruned,
        leakage,
    })
}

/// Projects the listed modes onto Fock bras. Returns the normalized state of
/// the remaining modes and the squared norm of the contraction.
pub fn herald_exact<T: Real>(
    state: &PureState<T>,
    outcomes: &[(usize, usize)],
) -> Result<(PureState<T>, T)> {
    let spec = HeraldSpec::exact(outcomes)?;
    let raw = contract(state, &spec)?;
    let prob = raw.branches.iter().fold(T::zero(), |a, (p, _)| a + *p);
    let branch = raw.branches.into_iter().next();
    match branch {
        Some((p, st)) if p >= T::lit(ZERO_NORM_SQR) => Ok((st.normalize()?.0, prob)),
        _ => Err(Error::ZeroNormState {
            norm_sqr: prob.to_f64().unwrap_or(0.0),
        }),
    }
}

/// Conditions `state` on a general herald (exact, click or no-click per mode).
pub fn herald_on_off<T: Real>(state: &PureState<T>, spec: &HeraldSpec<T>) -> Result<Heralded<T>> {
    let raw = contract(state, spec)?;
    let probability = raw.branches.iter().fold(T::zero(), |a, (p, _)| a + *p);
    posterior(raw.layout, raw.branches, probability, T::zero())
}

/// Heralds a mixture of already-evolved branches `(prior weight, evolved state)`.
pub fn herald_evolved<T: Real>(
    evolved: &[(T, Truncated<T>)],
    spec: &HeraldSpec<T>,
) -> Result<Heralded<T>> {
    let prior_total = evolved.iter().fold(T::zero(), |a, (w, _)| a + *w);
    if !(prior_total > T::zero()) {
        return Err(Error::InvalidParameter("mixture has no weight".into()));
    }
    let mut layout = None;
    let mut raw = Vec::new();
    let mut joint = T::zero();
    let mut leakage = T::zero();
    for (w, tr) in evolved {
        let w = *w / prior_total;
        leakage = leakage + w * tr.leakage;
        if w == T::zero() {
            continue;
        }
        let rb = contract(&tr.state, spec)?;
        layout.get_or_insert(rb.layout);
        for (p, st) in rb.branches {
            joint = joint + w * p;
            raw.push((w * p, st));
        }
    }
    let layout = layout.ok_or(Error::ZeroNormState { norm_sqr: 0.0 })?;
    posterior(layout, raw, joint, leakage)
}

/// Sends every branch of `input` through `circuit` and heralds with the
/// circuit's herald. Probability is the prior-weighted branch probability;
/// output weights are posteriors.
pub fn herald_mixed<T: Real>(input: &MixedState<T>, circuit: &Circuit<T>) -> Result<Heralded<T>> {
    let evolved = input
        .branches()
        .iter()
        .map(|(w, s)| Ok((*w, circuit.evolve(s)?)))
        .collect::<Result<Vec<_>>>()?;
    herald_evolved(&evolved, circuit.herald())
}
