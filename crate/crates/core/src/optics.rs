//! Beam splitters, two-mode squeezers and the two-mode squeezed vacuum.
//!
//! Beam splitters act on creation operators of the state as
//! `â₁† → t â₁† − r â₂†`, `â₂† → r* â₁† + t* â₂†`. The balanced splitter is the
//! special case `t = 1/√2`, `r = −1/√2`, which sends `|1,1⟩` to
//! `(|2,0⟩ − |0,2⟩)/√2`.
//!
//! The two-mode squeezer is `exp(−ξ â†ĉ† + ξ* âĉ)` with `ξ = s e^{iφ}`.

use crate::error::{Error, Result};
use crate::fock::{ModeLayout, PureState, Truncated};
use crate::linalg::{expm, CMatrix};
use crate::scalar::{czero, ln_factorial, sqrt_falling, Real, C};

/// Extra levels per mode used while exponentiating the squeezer generator.
pub const SQUEEZER_PADDING: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterParam<T> {
    t: C<T>,
    r: C<T>,
}

impl<T: Real> BeamSplitterParam<T> {
    pub fn new(t: C<T>, r: C<T>) -> Result<Self> {
        let total = t.norm_sqr() + r.norm_sqr();
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if !((total - T::one()).abs() <= tol) {
            return Err(Error::NonUnitaryParam(total.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { t, r })
    }

    /// Real transmissivity amplitude `t ∈ [0, 1]` with `r = √(1 − t²)`.
    pub fn real(t: T) -> Result<Self> {
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "transmissivity {t} outside [0, 1]"
            )));
        }
        let r = (T::one() - t * t).max(T::zero()).sqrt();
        Self::new(C::new(t, T::zero()), C::new(r, T::zero()))
    }

    pub fn balanced() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self {
            t: C::new(h, T::zero()),
            r: C::new(-h, T::zero()),
        }
    }

    pub fn identity() -> Self {
        Self {
            t: C::new(T::one(), T::zero()),
            r: czero(),
        }
    }

    pub fn t(&self) -> C<T> {
        self.t
    }

    pub fn r(&self) -> C<T> {
        self.r
    }

    /// Amplitude `⟨k, N−k| B |n, m⟩` for `N = n + m`.
    pub(crate) fn element(&self, n: usize, m: usize, k: usize) -> C<T> {
        let total = n + m;
        let lnf = |x: usize| ln_factorial::<T>(x);
        let ln_binom = |a: usize, b: usize| lnf(a) - lnf(b) - lnf(a - b);
        let prefactor = ((lnf(k) + lnf(total - k) - lnf(n) - lnf(m)) * T::lit(0.5)).exp();
        let minus_r = -self.r;
        let rc = self.r.conj();
        let tc = self.t.conj();
        let lo = k.saturating_sub(m);
        let hi = k.min(n);
        let mut acc = czero();
        for i in lo..=hi {
            let j = k - i;
            let w = (ln_binom(n, i) + ln_binom(m, j)).exp();
            let term = self.t.powu(i as u32)
                * minus_r.powu((n - i) as u32)
                * rc.powu(j as u32)
                * tc.powu((m - j) as u32);
            acc = acc + term * w;
        }
        acc * prefactor
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeParam<T> {
    s: T,
    phi: T,
}

impl<T: Real> SqueezeParam<T> {
    /// Coupling `ξ = s e^{iφ}`; the phase is wrapped into `[0, 2π)`.
    pub fn new(s: T, phi: T) -> Result<Self> {
        if !(s >= T::zero()) || !s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeezing strength {s} must be finite and nonnegative"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(
                "squeezing phase is not finite".into(),
            ));
        }
        let two_pi = T::TAU();
        let mut phi = phi % two_pi;
        if phi < T::zero() {
            phi = phi + two_pi;
        }
        if phi >= two_pi {
            phi = T::zero();
        }
        Ok(Self { s, phi })
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn xi(&self) -> C<T> {
        C::from_polar(self.s, self.phi)
    }
}

/// Gathers the `(n_p, n_q)` grid for every configuration of the other modes,
/// maps it through `f` and scatters the result back. `f` returns the squared
/// magnitude it discarded.
fn map_pair_grids<T, F>(state: &PureState<T>, p: usize, q: usize, mut f: F) -> Result<Truncated<T>>
where
    T: Real,
    F: FnMut(&[C<T>], &mut [C<T>]) -> T,
{
    let layout = state.layout();
    layout.check_pair(p, q)?;
    let (cp, cq) = (layout.cutoff(p), layout.cutoff(q));
    let (sp, sq) = (layout.stride(p), layout.stride(q));
    let width = cq + 1;
    let mut grid_in = vec![czero(); (cp + 1) * width];
    let mut grid_out = vec![czero(); (cp + 1) * width];
    let mut out = PureState::zeros(layout.clone());
    let mut leakage = T::zero();
    let amps = state.amplitudes();
    for base in layout.pair_bases(p, q) {
        let mut any = false;
        for n in 0..=cp {
            for m in 0..=cq {
                let a = amps[base + n * sp + m * sq];
                any |= a != czero();
                grid_in[n * width + m] = a;
            }
        }
        if !any {
            continue;
        }
        grid_out.iter_mut().for_each(|x| *x = czero());
        leakage = leakage + f(&grid_in, &mut grid_out);
        let dst = out.amplitudes_mut();
        for n in 0..=cp {
            for m in 0..=cq {
                dst[base + n * sp + m * sq] = grid_out[n * width + m];
            }
        }
    }
    Ok(Truncated {
        state: out,
        leakage,
    })
}

pub fn apply_beam_splitter<T: Real>(
    state: &PureState<T>,
    mode_1: usize,
    mode_2: usize,
    bs: &BeamSplitterParam<T>,
) -> Result<Truncated<T>> {
    let layout = state.layout();
    layout.check_pair(mode_1, mode_2)?;
    let (cp, cq) = (layout.cutoff(mode_1), layout.cutoff(mode_2));
    let width = cq + 1;
    // blocks[N][k][n] for inputs with n ≤ cp, N − n ≤ cq; every k in 0..=N
    let blocks: Vec<Vec<Vec<C<T>>>> = (0..=cp + cq)
        .map(|total| {
            (0..=total)
                .map(|k| {
                    (0..=total)
                        .map(|n| {
                            if n <= cp && total - n <= cq {
                                bs.element(n, total - n, k)
                            } else {
                                czero()
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    map_pair_grids(state, mode_1, mode_2, |input, output| {
        let mut lost = T::zero();
        for (total, block) in blocks.iter().enumerate() {
            let n_lo = total.saturating_sub(cq);
            let n_hi = total.min(cp);
            if (n_lo..=n_hi).all(|n| input[n * width + total - n] == czero()) {
                continue;
            }
            for (k, row) in block.iter().enumerate() {
                let mut acc = czero();
                for n in n_lo..=n_hi {
                    acc = acc + row[n] * input[n * width + total - n];
                }
                if k <= cp && total - k <= cq {
                    output[k * width + total - k] = acc;
                } else {
                    lost = lost + acc.norm_sqr();
                }
            }
        }
        lost
    })
}

pub fn apply_beam_splitter_5050<T: Real>(
    state: &PureState<T>,
    mode_c: usize,
    mode_d: usize,
) -> Result<Truncated<T>> {
    apply_beam_splitter(state, mode_c, mode_d, &BeamSplitterParam::balanced())
}

/// Exact truncated two-mode squeezer.
///
/// The generator is exponentiated block by block (the photon-number difference
/// `n_signal − n_idler` labels the blocks) on a space padded by
/// [`SQUEEZER_PADDING`] levels per mode; the result is projected back onto the
/// original cutoffs and the dropped population reported as leakage.
pub fn apply_two_mode_squeezer<T: Real>(
    state: &PureState<T>,
    mode_signal: usize,
    mode_idler: usize,
    xi: &SqueezeParam<T>,
) -> Result<Truncated<T>> {
    let layout = state.layout();
    layout.check_pair(mode_signal, mode_idler)?;
    if xi.s() == T::zero() {
        return Ok(Truncated {
            state: state.clone(),
            leakage: T::zero(),
        });
    }
    let (cp, cq) = (layout.cutoff(mode_signal), layout.cutoff(mode_idler));
    let (pp, pq) = (cp + SQUEEZER_PADDING, cq + SQUEEZER_PADDING);
    let width = cq + 1;
    let z = xi.xi();

    // One block per difference d = n_p − n_q reachable from the input grid.
    struct Block<T> {
        start: (usize, usize),
        len: usize,
        unitary: CMatrix<T>,
    }
    let mut blocks = Vec::new();
    for d in -(cq as isize)..=(cp as isize) {
        let start = if d >= 0 {
            (d as usize, 0)
        } else {
            (0, (-d) as usize)
        };
        let len = (pp - start.0).min(pq - start.1) + 1;
        let mut g = CMatrix::zeros(len);
        for k in 0..len - 1 {
            let (np, nq) = (start.0 + k, start.1 + k);
            let amp = T::from_usize_lossy((np + 1) * (nq + 1)).sqrt();
            g[(k + 1, k)] = -z * amp;
            g[(k, k + 1)] = z.conj() * amp;
        }
        blocks.push(Block {
            start,
            len,
            unitary: expm(&g),
        });
    }

    map_pair_grids(state, mode_signal, mode_idler, |input, output| {
        let mut lost = T::zero();
        for b in &blocks {
            let x: Vec<C<T>> = (0..b.len)
                .map(|k| {
                    let (np, nq) = (b.start.0 + k, b.start.1 + k);
                    if np <= cp && nq <= cq {
                        input[np * width + nq]
                    } else {
                        czero()
                    }
                })
                .collect();
            if x.iter().all(|a| *a == czero()) {
                continue;
            }
            let y = b.unitary.mul_vec(&x);
            for (k, v) in y.into_iter().enumerate() {
                let (np, nq) = (b.start.0 + k, b.start.1 + k);
                if np <= cp && nq <= cq {
                    output[np * width + nq] = v;
                } else {
                    lost = lost + v.norm_sqr();
                }
            }
        }
        lost
    })
}

/// Squeezer evaluated through its disentangled normal-ordered form
/// `exp(−e^{iφ} tanh s â†ĉ†) · cosh(s)^{−(n̂_a + n̂_c + 1)} · exp(e^{−iφ} tanh s âĉ)`.
///
/// Every factor is applied exactly in the infinite-dimensional space and the
/// result projected onto the cutoffs, so it is independent of the padded
/// matrix exponential in [`apply_two_mode_squeezer`].
pub fn apply_squeezer_factored<T: Real>(
    state: &PureState<T>,
    mode_signal: usize,
    mode_idler: usize,
    xi: &SqueezeParam<T>,
) -> Result<Truncated<T>> {
    let layout = state.layout();
    layout.check_pair(mode_signal, mode_idler)?;
    let (cp, cq) = (layout.cutoff(mode_signal), layout.cutoff(mode_idler));
    let width = cq + 1;
    let tanh = xi.s().tanh();
    let cosh = xi.s().cosh();
    let raise = -C::from_polar(tanh, xi.phi());
    let lower = C::from_polar(tanh, -xi.phi());
    let inv_fact: Vec<T> = (0..=cp.max(cq))
        .map(|k| (-ln_factorial::<T>(k)).exp())
        .collect();
    let mut mid = vec![czero::<T>(); (cp + 1) * width];

    map_pair_grids(state, mode_signal, mode_idler, |input, output| {
        let in_norm = input.iter().fold(T::zero(), |a, x| a + x.norm_sqr());
        mid.iter_mut().for_each(|x| *x = czero());
        for n in 0..=cp {
            for m in 0..=cq {
                let x = input[n * width + m];
                if x == czero() {
                    continue;
                }
                for k in 0..=n.min(m) {
                    let c = lower.powu(k as u32)
                        * (inv_fact[k] * sqrt_falling::<T>(n, n - k) * sqrt_falling::<T>(m, m - k));
                    mid[(n - k) * width + (m - k)] = mid[(n - k) * width + (m - k)] + x * c;
                }
            }
        }
        for n in 0..=cp {
            for m in 0..=cq {
                mid[n * width + m] = mid[n * width + m] * cosh.powi(-((n + m + 1) as i32));
            }
        }
        for n in 0..=cp {
            for m in 0..=cq {
                let y = mid[n * width + m];
                if y == czero() {
                    continue;
                }
                let mut k = 0;
                while n + k <= cp && m + k <= cq {
                    let c = raise.powu(k as u32)
                        * (inv_fact[k] * sqrt_falling::<T>(n + k, n) * sqrt_falling::<T>(m + k, m));
                    output[(n + k) * width + (m + k)] = output[(n + k) * width + (m + k)] + y * c;
                    k += 1;
                }
            }
        }
        let out_norm = output.iter().fold(T::zero(), |a, x| a + x.norm_sqr());
        (in_norm - out_norm).max(T::zero())
    })
}

/// `√(1−λ²) Σ λⁿ |n,n⟩` with `λ = tanh s`, cut at the smaller cutoff and
/// renormalized; the truncated tail is reported as leakage.
pub fn tmss_state<T: Real>(s: T, layout: ModeLayout) -> Result<Truncated<T>> {
    if layout.num_modes() != 2 {
        return Err(Error::InvalidLayout(format!(
            "two-mode squeezed vacuum needs 2 modes, got {}",
            layout.num_modes()
        )));
    }
    if !(s >= T::zero()) {
        return Err(Error::InvalidParameter(format!("squeezing {s} < 0")));
    }
    let lambda = s.tanh();
    let head = (T::one() - lambda * lambda).sqrt();
    let top = layout.cutoff(0).min(layout.cutoff(1));
    let mut st = PureState::zeros(layout);
    let mut amp = head;
    for n in 0..=top {
        let idx = st.layout().index_of(&[n, n])?;
        st.amplitudes_mut()[idx] = C::new(amp, T::zero());
        amp = amp * lambda;
    }
    let kept = st.norm_sqr();
    let (state, _) = st.normalize()?;
    Ok(Truncated {
        state,
        leakage: (T::one() - kept).max(T::zero()),
    })
}
