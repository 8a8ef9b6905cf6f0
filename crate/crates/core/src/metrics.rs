//! Figures of merit: fidelity, entanglement entropy, EPR variance sum,
//! Mach–Zehnder parity signal and phase sensitivity, and the first/second
//! order local operations on a two-mode squeezed vacuum.
//!
//! Quadratures are `x̂ = (â + â†)/√2`, `p̂ = (â − â†)/(i√2)`; entropies are in bits.
//! The probe state occupies the two interferometer arms: `e^{iφ n̂_b}` acts on
//! mode 1, the arms recombine on a balanced splitter and mode 1 is measured
//! for photon-number parity.

use crate::error::{Error, Result};
use crate::fock::{Ensemble, ModeLayout, PureState};
use crate::linalg::{hermitian_eigenvalues, CMatrix};
use crate::optics::{apply_beam_splitter_5050, tmss_state, BeamSplitterParam};
use crate::scalar::{cone, creal, czero, Real, C};

/// Step of the central-difference parity derivative.
pub const PARITY_STEP: f64 = 1e-4;

pub fn fidelity<T: Real, E: Ensemble<T> + ?Sized>(target: &PureState<T>, state: &E) -> Result<T> {
    if target.layout() != state.layout() {
        return Err(Error::LayoutMismatch {
            left: target.layout().cutoffs().to_vec(),
            right: state.layout().cutoffs().to_vec(),
        });
    }
    state
        .weighted_branches()
        .into_iter()
        .try_fold(T::zero(), |acc, (w, s)| {
            Ok(acc + w * target.inner(s)?.norm_sqr())
        })
}

/// `−Σ λ log₂ λ` over a spectrum, with `0 log 0 = 0`.
pub fn entropy_bits<T: Real>(eigenvalues: &[T]) -> T {
    eigenvalues
        .iter()
        .filter(|l| **l > T::zero())
        .fold(T::zero(), |acc, &l| acc - l * l.log2())
}

/// Von Neumann entropy (bits) of the reduction of a pure state onto `partition`.
pub fn entanglement_entropy<T: Real>(state: &PureState<T>, partition: &[usize]) -> Result<T> {
    state.require_normalized()?;
    let rho = state.reduced_density(partition)?;
    Ok(entropy_bits(&hermitian_eigenvalues(&rho)))
}

fn mode_pair_check(layout: &ModeLayout, a: usize, b: usize) -> Result<()> {
    layout.check_mode(a)?;
    layout.check_mode(b)?;
    if a == b {
        return Err(Error::SameMode(a));
    }
    Ok(())
}

/// `Δ²(x̂_A − x̂_B) + Δ²(p̂_A + p̂_B)`.
///
/// Only annihilation operators are applied; the creation-side moments follow
/// from `[û, û†] = 2` for `û = â ± b̂`, which is exact for any state with
/// finite Fock support.
pub fn epr_sum<T: Real, E: Ensemble<T> + ?Sized>(
    state: &E,
    mode_a: usize,
    mode_b: usize,
) -> Result<T> {
    mode_pair_check(state.layout(), mode_a, mode_b)?;
    state.require_normalized()?;
    let two = T::lit(2.0);
    let sqrt2 = two.sqrt();
    let (mut x2, mut x1, mut p2, mut p1) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (w, psi) in state.weighted_branches() {
        let n = psi.norm_sqr();
        let a = psi.apply_annihilation(mode_a)?;
        let b = psi.apply_annihilation(mode_b)?;
        let u = a.add_scaled(creal(-T::one()), &b)?;
        let v = a.add_scaled(cone(), &b)?;
        let uu = u
            .apply_annihilation(mode_a)?
            .add_scaled(creal(-T::one()), &u.apply_annihilation(mode_b)?)?;
        let vv = v
            .apply_annihilation(mode_a)?
            .add_scaled(cone(), &v.apply_annihilation(mode_b)?)?;
        let mean_u = psi.inner(&u)?;
        let mean_v = psi.inner(&v)?;
        let mean_uu = psi.inner(&uu)?;
        let mean_vv = psi.inner(&vv)?;
        x2 = x2 + w * (mean_uu.re + u.norm_sqr() + n);
        x1 = x1 + w * sqrt2 * mean_u.re;
        p2 = p2 + w * (-mean_vv.re + v.norm_sqr() + n);
        p1 = p1 + w * sqrt2 * mean_v.im;
    }
    Ok((x2 - x1 * x1) + (p2 - p1 * p1))
}

/// Largest total photon number carrying population above `1e-14`.
fn max_total_photons<T: Real, E: Ensemble<T> + ?Sized>(state: &E) -> usize {
    let l = state.layout();
    let tol = T::lit(1e-14);
    let mut best = 0;
    for (w, psi) in state.weighted_branches() {
        for (i, a) in psi.amplitudes().iter().enumerate() {
            if w * a.norm_sqr() > tol {
                best = best.max(l.occupation(i, 0) + l.occupation(i, 1));
            }
        }
    }
    best
}

/// Layout in which the interferometer cannot lose photons.
fn interferometer_layout<T: Real, E: Ensemble<T> + ?Sized>(state: &E) -> Result<ModeLayout> {
    let l = state.layout();
    if l.num_modes() != 2 {
        return Err(Error::InvalidLayout(format!(
            "parity measurement needs a 2-mode state, got {}",
            l.num_modes()
        )));
    }
    let n = max_total_photons(state).max(1);
    ModeLayout::new(vec![l.cutoff(0).max(n), l.cutoff(1).max(n)])
}

/// `⟨Π̂_b⟩(φ)` evaluated directly: the full interferometer is applied to every
/// branch at every phase.
pub fn parity_phase_scan<T: Real, E: Ensemble<T> + ?Sized>(
    state: &E,
    phis: &[T],
) -> Result<Vec<T>> {
    let layout = interferometer_layout(state)?;
    let branches = state
        .weighted_branches()
        .into_iter()
        .map(|(w, s)| Ok((w, s.embed(layout.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    phis.iter()
        .map(|&phi| {
            let mut acc = T::zero();
            for (w, s) in &branches {
                let b = s.apply_phase(1, phi)?;
                let c = apply_beam_splitter_5050(&b, 0, 1)?.state;
                acc = acc + *w * parity_of(&c, 1);
            }
            Ok(acc)
        })
        .collect()
}

fn parity_of<T: Real>(s: &PureState<T>, mode: usize) -> T {
    let l = s.layout();
    s.amplitudes()
        .iter()
        .enumerate()
        .fold(T::zero(), |acc, (i, a)| {
            if l.occupation(i, mode) % 2 == 0 {
                acc + a.norm_sqr()
            } else {
                acc - a.norm_sqr()
            }
        })
}

/// Parity signal as a trigonometric polynomial `Σ_k c_k e^{ikφ}`.
///
/// The interferometer conserves the total photon number `N`, so only the
/// `N`-diagonal blocks of the state matter. Per block, with `B` the balanced
/// splitter and `Q = B† Π B`, `c_k = Σ_{m_i − m_j = k} ρ_{ij} Q_{ji}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParitySignal<T> {
    /// `coeffs[k + order]` holds `c_k` for `k ∈ [−order, order]`.
    coeffs: Vec<C<T>>,
    order: usize,
}

impl<T: Real> ParitySignal<T> {
    pub fn new<E: Ensemble<T> + ?Sized>(state: &E) -> Result<Self> {
        let layout = interferometer_layout(state)?;
        let nmax = max_total_photons(state);
        let order = nmax;
        let mut coeffs = vec![czero(); 2 * order + 1];
        let bs = BeamSplitterParam::<T>::balanced();
        let branches = state
            .weighted_branches()
            .into_iter()
            .map(|(w, s)| Ok((w, s.embed(layout.clone())?)))
            .collect::<Result<Vec<_>>>()?;
        for total in 0..=nmax {
            let dim = total + 1;
            // basis index m = photons in mode 1, n = total - m in mode 0
            let mut b = CMatrix::<T>::zeros(dim);
            for m_out in 0..dim {
                for m_in in 0..dim {
                    b[(m_out, m_in)] = bs.element(total - m_in, m_in, total - m_out);
                }
            }
            let mut sigma = CMatrix::<T>::zeros(dim);
            for (w, s) in &branches {
                let x: Vec<C<T>> = (0..dim)
                    .map(|m| s.amplitude(&[total - m, m]).unwrap_or(czero()))
                    .collect();
                if x.iter().all(|a| *a == czero()) {
                    continue;
                }
                let y = x;
                for i in 0..dim {
                    for j in 0..dim {
                        sigma[(i, j)] = sigma[(i, j)] + y[i] * y[j].conj() * *w;
                    }
                }
            }
            let mut pi = CMatrix::<T>::zeros(dim);
            for m in 0..dim {
                pi[(m, m)] = if m % 2 == 0 { cone() } else { -cone() };
            }
            let q = b.adjoint().matmul(&pi).matmul(&b);
            for i in 0..dim {
                for j in 0..dim {
                    let k = i as isize - j as isize + order as isize;
                    coeffs[k as usize] = coeffs[k as usize] + sigma[(i, j)] * q[(j, i)];
                }
            }
        }
        Ok(Self { coeffs, order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `|c_k|` for `k ≥ 0`, combining `±k`.
    pub fn harmonic_magnitude(&self, k: usize) -> T {
        if k > self.order {
            return T::zero();
        }
        let p = self.coeffs[self.order + k].norm();
        if k == 0 {
            p
        } else {
            p + self.coeffs[self.order - k].norm()
        }
    }

    pub fn value(&self, phi: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (idx, c)| {
                let k = T::from_usize_lossy(idx) - T::from_usize_lossy(self.order);
                acc + (*c * C::from_polar(T::one(), k * phi)).re
            })
    }

    pub fn derivative(&self, phi: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (idx, c)| {
                let k = T::from_usize_lossy(idx) - T::from_usize_lossy(self.order);
                acc + (*c * C::new(T::zero(), k) * C::from_polar(T::one(), k * phi)).re
            })
    }

    /// Central difference with step `h`, checked against one Richardson
    /// extrapolation step; the extrapolated value is returned if they differ.
    pub fn numerical_derivative(&self, phi: T) -> T {
        let h = T::lit(PARITY_STEP);
        let two = T::lit(2.0);
        let d1 = (self.value(phi + h) - self.value(phi - h)) / (two * h);
        let h2 = h / two;
        let d2 = (self.value(phi + h2) - self.value(phi - h2)) / (two * h2);
        let richardson = (T::lit(4.0) * d2 - d1) / T::lit(3.0);
        if (richardson - d1).abs() <= T::lit(1e-9) * d1.abs().max(T::one()) {
            d1
        } else {
            richardson
        }
    }

    /// `ΔΠ / |∂⟨Π⟩/∂φ|` with `ΔΠ = √(1 − ⟨Π⟩²)`.
    pub fn sensitivity(&self, phi: T) -> Result<T> {
        let p = self.value(phi);
        let spread = (T::one() - p * p).max(T::zero()).sqrt();
        let d = self.numerical_derivative(phi);
        if d.abs() <= T::lit(1e-9) {
            return Err(Error::DerivativeVanishes(phi.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(spread / d.abs())
    }

    /// Minimum of [`Self::sensitivity`] over `grid` equally spaced phases in
    /// `[0, 2π)`, refined by golden-section search around the best grid point.
    pub fn best_sensitivity(&self, grid: usize) -> Result<(T, T)> {
        let grid = grid.max(8);
        let step = T::TAU() / T::from_usize_lossy(grid);
        let mut best: Option<(T, T)> = None;
        for i in 0..grid {
            let phi = step * T::from_usize_lossy(i);
            if let Ok(v) = self.sensitivity(phi) {
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((phi, v));
                }
            }
        }
        let (phi0, v0) = best.ok_or(Error::DerivativeVanishes(0.0))?;
        let f = |x: T| self.sensitivity(x).unwrap_or(T::infinity());
        let (phi1, v1) = golden_section_min(f, phi0 - step, phi0 + step, T::lit(1e-7));
        Ok(if v1 < v0 { (phi1, v1) } else { (phi0, v0) })
    }
}

/// Phase sensitivity at a fixed interferometer phase.
pub fn phase_sensitivity<T: Real, E: Ensemble<T> + ?Sized>(state: &E, phi: T) -> Result<T> {
    state.require_normalized()?;
    ParitySignal::new(state)?.sensitivity(phi)
}

/// Minimal phase sensitivity over a phase grid, with its phase.
pub fn best_phase_sensitivity<T: Real, E: Ensemble<T> + ?Sized>(
    state: &E,
    grid: usize,
) -> Result<(T, T)> {
    state.require_normalized()?;
    ParitySignal::new(state)?.best_sensitivity(grid)
}

fn golden_section_min<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, tol: T) -> (T, T) {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        // ties shrink toward the lower end
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / T::lit(2.0);
    (x, f(x))
}

/// Output of a deterministic (non-heralded) operator application.
#[derive(Debug, Clone, PartialEq)]
pub struct Operated<T> {
    pub state: PureState<T>,
    /// Squared norm before renormalization.
    pub norm_sqr: T,
    pub leakage: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

/// `(t â^k + r â†^k)` on `mode`, `k = 1` or `2`.
fn local_op<T: Real>(
    state: &PureState<T>,
    mode: usize,
    t: T,
    r: T,
    order: Order,
) -> Result<(PureState<T>, T)> {
    let (down, up, leak) = match order {
        Order::First => {
            let up = state.apply_creation(mode)?;
            (state.apply_annihilation(mode)?, up.state, up.leakage)
        }
        Order::Second => {
            let up1 = state.apply_creation(mode)?;
            let up2 = up1.state.apply_creation(mode)?;
            let down = state.apply_annihilation(mode)?.apply_annihilation(mode)?;
            (down, up2.state, up1.leakage + up2.leakage)
        }
    };
    let out = down.scaled(creal(t)).add_scaled(creal(r), &up)?;
    Ok((out, leak))
}

fn apply_local_pair<T: Real>(
    state: &PureState<T>,
    t: T,
    r: T,
    order: Order,
) -> Result<Operated<T>> {
    if state.layout().num_modes() != 2 {
        return Err(Error::InvalidLayout("expected a 2-mode state".into()));
    }
    let (a, la) = local_op(state, 0, t, r, order)?;
    let (b, lb) = local_op(&a, 1, t, r, order)?;
    let (unit, norm) = b.normalize()?;
    Ok(Operated {
        state: unit,
        norm_sqr: norm * norm,
        leakage: la + lb,
    })
}

/// `(t â + r â†)(t b̂ + r b̂†)|ψ⟩`, normalized.
pub fn apply_first_order_superpose<T: Real>(
    state: &PureState<T>,
    t: T,
    r: T,
) -> Result<Operated<T>> {
    apply_local_pair(state, t, r, Order::First)
}

/// `(t â² + r â†²)(t b̂² + r b̂†²)|ψ⟩`, normalized.
pub fn apply_second_order_superpose<T: Real>(
    state: &PureState<T>,
    t: T,
    r: T,
) -> Result<Operated<T>> {
    apply_local_pair(state, t, r, Order::Second)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MaxEntropy,
    MinEpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum<T> {
    pub r: T,
    pub value: T,
    pub leakage: T,
}

/// Objective of the operated two-mode squeezed vacuum at reflectivity `r`
/// (`t = √(1 − r²)`), or `None` when the operation annihilates the state.
pub fn operated_tmss_objective<T: Real>(
    tmss: &PureState<T>,
    objective: Objective,
    order: Order,
    r: T,
) -> Result<Option<(T, T)>> {
    let t = (T::one() - r * r).max(T::zero()).sqrt();
    let op = match apply_local_pair(tmss, t, r, order) {
        Ok(op) => op,
        Err(Error::ZeroNormState { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let v = match objective {
        Objective::MaxEntropy => entanglement_entropy(&op.state, &[0])?,
        Objective::MinEpr => epr_sum(&op.state, 0, 1)?,
    };
    Ok(Some((v, op.leakage)))
}

/// Optimizes the reflectivity of the local operation applied to a two-mode
/// squeezed vacuum: grid `r ∈ [0, 1]` with step 0.01, then golden-section
/// refinement to `|Δr| < 1e-4`. Ties resolve toward the smaller `r`.
pub fn optimize_r<T: Real>(
    objective: Objective,
    order: Order,
    s: T,
    cutoff: usize,
) -> Result<Optimum<T>> {
    let tmss = tmss_state(s, ModeLayout::uniform(2, cutoff)?)?;
    optimize_r_on(&tmss.state, objective, order)
}

pub fn optimize_r_on<T: Real>(
    tmss: &PureState<T>,
    objective: Objective,
    order: Order,
) -> Result<Optimum<T>> {
    // internally always minimize
    let sign = match objective {
        Objective::MaxEntropy => -T::one(),
        Objective::MinEpr => T::one(),
    };
    let eval = |r: T| -> Result<Option<(T, T)>> {
        Ok(operated_tmss_objective(tmss, objective, order, r)?.map(|(v, l)| (sign * v, l)))
    };
    let mut best: Option<(T, T, T)> = None;
    for i in 0..=100usize {
        let r = T::from_usize_lossy(i) / T::lit(100.0);
        if let Some((v, l)) = eval(r)? {
            if best.is_none_or(|(_, bv, _)| v < bv) {
                best = Some((r, v, l));
            }
        }
    }
    let (r0, v0, l0) = best.ok_or(Error::ZeroNormState { norm_sqr: 0.0 })?;
    let lo = (r0 - T::lit(0.01)).max(T::zero());
    let hi = (r0 + T::lit(0.01)).min(T::one());
    let f = |r: T| match eval(r) {
        Ok(Some((v, _))) => v,
        _ => T::infinity(),
    };
    let (r1, v1) = golden_section_min(f, lo, hi, T::lit(1e-4));
    let (r, v, l) = if v1 < v0 {
        let l1 = eval(r1)?.map(|(_, l)| l).unwrap_or(T::zero());
        (r1, v1, l1)
    } else {
        (r0, v0, l0)
    };
    Ok(Optimum {
        r,
        value: sign * v,
        leakage: l,
    })
}
