//! Multi-mode truncated Fock space.
//!
//! Amplitudes are stored densely in lexicographic order of the photon numbers,
//! mode 0 varying slowest. Every mode carries its own inclusive cutoff.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_ensemble, CMatrix};
use crate::scalar::{czero, Real, C};

/// Largest kept-subsystem dimension `reduced_density` will densify.
pub const REDUCED_DIM_GUARD: usize = 4096;

/// Norms below this are treated as a vanished herald branch.
pub const ZERO_NORM_SQR: f64 = 1e-14;

/// Tolerance used when a routine requires a normalized input.
pub const NORMALIZED_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeLayout {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl ModeLayout {
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidLayout("at least one mode required".into()));
        }
        if let Some(m) = cutoffs.iter().position(|&c| c == 0) {
            return Err(Error::InvalidLayout(format!("mode {m} has cutoff 0")));
        }
        let mut strides = vec![1usize; cutoffs.len()];
        let mut dim = 1usize;
        for (i, &c) in cutoffs.iter().enumerate().rev() {
            strides[i] = dim;
            dim = dim
                .checked_mul(c + 1)
                .ok_or_else(|| Error::InvalidLayout("dimension overflows usize".into()))?;
        }
        Ok(Self {
            cutoffs,
            strides,
            dim,
        })
    }

    pub fn uniform(modes: usize, cutoff: usize) -> Result<Self> {
        Self::new(vec![cutoff; modes])
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Total number of basis states.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.num_modes() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                modes: self.num_modes(),
            })
        }
    }

    pub(crate) fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        if a == b {
            return Err(Error::SameMode(a));
        }
        Ok(())
    }

    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.cutoffs[mode] + 1)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.num_modes())
            .map(|m| self.occupation(index, m))
            .collect()
    }

    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.num_modes() {
            return Err(Error::InvalidParameter(format!(
                "expected {} occupations, got {}",
                self.num_modes(),
                occupations.len()
            )));
        }
        let mut idx = 0;
        for (mode, (&n, &c)) in occupations.iter().zip(&self.cutoffs).enumerate() {
            if n > c {
                return Err(Error::OccupationExceedsCutoff {
                    mode,
                    occupation: n,
                    cutoff: c,
                });
            }
            idx += n * self.strides[mode];
        }
        Ok(idx)
    }

    /// Layout of `self` followed by `other`.
    pub fn concat(&self, other: &ModeLayout) -> Result<Self> {
        let mut c = self.cutoffs.clone();
        c.extend_from_slice(&other.cutoffs);
        Self::new(c)
    }

    /// Layout restricted to `modes`, in the order given.
    pub fn select(&self, modes: &[usize]) -> Result<Self> {
        for &m in modes {
            self.check_mode(m)?;
        }
        Self::new(modes.iter().map(|&m| self.cutoffs[m]).collect())
    }

    /// Base indices of all basis states with zero photons in both `a` and `b`.
    pub(crate) fn pair_bases(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.dim)
            .filter(|&i| self.occupation(i, a) == 0 && self.occupation(i, b) == 0)
            .collect()
    }
}

/// Dense amplitude vector over a [`ModeLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    layout: ModeLayout,
    amps: Vec<C<T>>,
}

/// Result of an operation that may push amplitude above a cutoff.
///
/// `leakage` is the squared magnitude that was dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncated<T> {
    pub state: PureState<T>,
    pub leakage: T,
}

impl<T: Real> PureState<T> {
    pub fn vacuum(layout: ModeLayout) -> Self {
        let mut amps = vec![czero(); layout.dim()];
        amps[0] = C::new(T::one(), T::zero());
        Self { layout, amps }
    }

    pub fn zeros(layout: ModeLayout) -> Self {
        let amps = vec![czero(); layout.dim()];
        Self { layout, amps }
    }

    pub fn fock(layout: ModeLayout, occupations: &[usize]) -> Result<Self> {
        let idx = layout.index_of(occupations)?;
        let mut s = Self::zeros(layout);
        s.amps[idx] = C::new(T::one(), T::zero());
        Ok(s)
    }

    pub fn from_amplitudes(layout: ModeLayout, amps: Vec<C<T>>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes, got {}",
                layout.dim(),
                amps.len()
            )));
        }
        Ok(Self { layout, amps })
    }

    /// Superposition `Σ c_k |occ_k⟩`, not normalized.
    pub fn from_terms(layout: ModeLayout, terms: &[(C<T>, Vec<usize>)]) -> Result<Self> {
        let mut s = Self::zeros(layout);
        for (c, occ) in terms {
            let idx = s.layout.index_of(occ)?;
            s.amps[idx] = s.amps[idx] + *c;
        }
        Ok(s)
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C<T>] {
        &mut self.amps
    }

    pub fn amplitude(&self, occupations: &[usize]) -> Result<C<T>> {
        Ok(self.amps[self.layout.index_of(occupations)?])
    }

    pub fn norm_sqr(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - T::one()).abs() <= T::lit(NORMALIZED_TOL)
    }

    pub(crate) fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(
                self.norm_sqr().to_f64().unwrap_or(f64::NAN),
            ))
        }
    }

    pub fn scaled(&self, c: C<T>) -> Self {
        Self {
            layout: self.layout.clone(),
            amps: self.amps.iter().map(|a| *a * c).collect(),
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: C<T>, other: &Self) -> Result<Self> {
        self.check_same_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| *a + *b * c)
                .collect(),
        })
    }

    fn check_same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch {
                left: self.layout.cutoffs.clone(),
                right: other.layout.cutoffs.clone(),
            });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        self.check_same_layout(other)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b))
    }

    /// Returns the unit-norm state and the original norm.
    pub fn normalize(&self) -> Result<(Self, T)> {
        let n2 = self.norm_sqr();
        if n2 < T::lit(ZERO_NORM_SQR) {
            return Err(Error::ZeroNormState {
                norm_sqr: n2.to_f64().unwrap_or(0.0),
            });
        }
        let n = n2.sqrt();
        Ok((self.scaled(C::new(T::one() / n, T::zero())), n))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let layout = self
            .layout
            .concat(&other.layout)
            .expect("concatenation of valid layouts");
        let mut amps = Vec::with_capacity(layout.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(*a * *b);
            }
        }
        Self { layout, amps }
    }

    /// Applies `â†` on `mode`. Amplitude on the top level has no representable
    /// image; its population is reported as leakage.
    pub fn apply_creation(&self, mode: usize) -> Result<Truncated<T>> {
        self.layout.check_mode(mode)?;
        let stride = self.layout.stride(mode);
        let cutoff = self.layout.cutoff(mode);
        let mut out = vec![czero(); self.amps.len()];
        let mut leakage = T::zero();
        for (i, a) in self.amps.iter().enumerate() {
            let n = self.layout.occupation(i, mode);
            if n == cutoff {
                leakage = leakage + a.norm_sqr();
            } else {
                out[i + stride] = *a * T::from_usize_lossy(n + 1).sqrt();
            }
        }
        Ok(Truncated {
            state: Self {
                layout: self.layout.clone(),
                amps: out,
            },
            leakage,
        })
    }

    /// Applies `â` on `mode`; exact within the truncated space.
    pub fn apply_annihilation(&self, mode: usize) -> Result<Self> {
        self.layout.check_mode(mode)?;
        let stride = self.layout.stride(mode);
        let mut out = vec![czero(); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let n = self.layout.occupation(i, mode);
            if n > 0 {
                out[i - stride] = *a * T::from_usize_lossy(n).sqrt();
            }
        }
        Ok(Self {
            layout: self.layout.clone(),
            amps: out,
        })
    }

    /// Multiplies each amplitude by `e^{iφ n}` where `n` is the occupation of `mode`.
    pub fn apply_phase(&self, mode: usize, phi: T) -> Result<Self> {
        self.layout.check_mode(mode)?;
        let cutoff = self.layout.cutoff(mode);
        let phases: Vec<C<T>> = (0..=cutoff)
            .map(|n| C::from_polar(T::one(), phi * T::from_usize_lossy(n)))
            .collect();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| *a * phases[self.layout.occupation(i, mode)])
            .collect();
        Ok(Self {
            layout: self.layout.clone(),
            amps,
        })
    }

    /// Expectation of `n̂` on `mode` (unnormalized state gives `⟨ψ|n̂|ψ⟩`).
    pub fn mean_photons(&self, mode: usize) -> Result<T> {
        self.layout.check_mode(mode)?;
        Ok(self.amps.iter().enumerate().fold(T::zero(), |acc, (i, a)| {
            acc + a.norm_sqr() * T::from_usize_lossy(self.layout.occupation(i, mode))
        }))
    }

    /// Population on the top `levels` levels of `mode`.
    pub fn top_population(&self, mode: usize, levels: usize) -> Result<T> {
        self.layout.check_mode(mode)?;
        let c = self.layout.cutoff(mode);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.layout.occupation(*i, mode) + levels > c)
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr()))
    }

    /// Copies the state into a layout with larger (or equal) cutoffs.
    pub fn embed(&self, layout: ModeLayout) -> Result<Self> {
        if layout.num_modes() != self.layout.num_modes()
            || layout
                .cutoffs()
                .iter()
                .zip(self.layout.cutoffs())
                .any(|(n, o)| n < o)
        {
            return Err(Error::LayoutMismatch {
                left: self.layout.cutoffs.clone(),
                right: layout.cutoffs.clone(),
            });
        }
        let mut out = Self::zeros(layout);
        for (i, a) in self.amps.iter().enumerate() {
            let j = out.layout.index_of(&self.layout.occupations(i))?;
            out.amps[j] = *a;
        }
        Ok(out)
    }

    /// Projects onto a layout with smaller cutoffs; dropped population is leakage.
    pub fn truncate(&self, layout: ModeLayout) -> Result<Truncated<T>> {
        if layout.num_modes() != self.layout.num_modes() {
            return Err(Error::LayoutMismatch {
                left: self.layout.cutoffs.clone(),
                right: layout.cutoffs.clone(),
            });
        }
        let mut out = Self::zeros(layout);
        let mut leakage = T::zero();
        for (i, a) in self.amps.iter().enumerate() {
            match out.layout.index_of(&self.layout.occupations(i)) {
                Ok(j) => out.amps[j] = *a,
                Err(_) => leakage = leakage + a.norm_sqr(),
            }
        }
        Ok(Truncated {
            state: out,
            leakage,
        })
    }

    /// Reduced density operator over `keep_modes` (in the given order).
    pub fn reduced_density(&self, keep_modes: &[usize]) -> Result<CMatrix<T>> {
        let mut acc = None;
        accumulate_reduced(self, T::one(), keep_modes, &mut acc)?;
        Ok(acc.expect("accumulator populated"))
    }
}

fn accumulate_reduced<T: Real>(
    state: &PureState<T>,
    weight: T,
    keep_modes: &[usize],
    acc: &mut Option<CMatrix<T>>,
) -> Result<()> {
    let layout = state.layout();
    let mut seen = vec![false; layout.num_modes()];
    for &m in keep_modes {
        layout.check_mode(m)?;
        if seen[m] {
            return Err(Error::InvalidParameter(format!("mode {m} kept twice")));
        }
        seen[m] = true;
    }
    let kept = layout.select(keep_modes)?;
    let traced_modes: Vec<usize> = (0..layout.num_modes()).filter(|m| !seen[*m]).collect();
    let kdim = kept.dim();
    if kdim > REDUCED_DIM_GUARD {
        return Err(Error::DimensionGuardExceeded {
            dim: kdim,
            guard: REDUCED_DIM_GUARD,
        });
    }
    let tdim = if traced_modes.is_empty() {
        1
    } else {
        layout.select(&traced_modes)?.dim()
    };
    let traced_strides: Vec<usize> = {
        let mut s = vec![1usize; traced_modes.len()];
        let mut d = 1;
        for (k, &m) in traced_modes.iter().enumerate().rev() {
            s[k] = d;
            d *= layout.cutoff(m) + 1;
        }
        s
    };
    // psi[k][t]
    let mut psi = vec![czero::<T>(); kdim * tdim];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let mut ki = 0;
        for (k, &m) in keep_modes.iter().enumerate() {
            ki += layout.occupation(i, m) * kept.stride(k);
        }
        let mut ti = 0;
        for (k, &m) in traced_modes.iter().enumerate() {
            ti += layout.occupation(i, m) * traced_strides[k];
        }
        psi[ki * tdim + ti] = *a;
    }
    let rho = acc.get_or_insert_with(|| CMatrix::zeros(kdim));
    if rho.dim() != kdim {
        return Err(Error::LayoutMismatch {
            left: vec![rho.dim()],
            right: vec![kdim],
        });
    }
    for i in 0..kdim {
        let row_i = &psi[i * tdim..(i + 1) * tdim];
        for j in i..kdim {
            let row_j = &psi[j * tdim..(j + 1) * tdim];
            let v = row_i
                .iter()
                .zip(row_j)
                .fold(czero::<T>(), |s, (x, y)| s + *x * y.conj())
                * weight;
            rho[(i, j)] = rho[(i, j)] + v;
            if i != j {
                rho[(j, i)] = rho[(j, i)] + v.conj();
            }
        }
    }
    Ok(())
}

/// Weighted ensemble of pure branches over one shared layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState<T> {
    layout: ModeLayout,
    branches: Vec<(T, PureState<T>)>,
}

impl<T: Real> MixedState<T> {
    pub fn new(branches: Vec<(T, PureState<T>)>) -> Result<Self> {
        let layout = branches
            .first()
            .map(|(_, s)| s.layout().clone())
            .ok_or_else(|| Error::InvalidParameter("mixed state needs a branch".into()))?;
        for (w, s) in &branches {
            if s.layout() != &layout {
                return Err(Error::LayoutMismatch {
                    left: layout.cutoffs().to_vec(),
                    right: s.layout().cutoffs().to_vec(),
                });
            }
            if !(*w >= T::zero()) {
                return Err(Error::InvalidParameter("negative branch weight".into()));
            }
        }
        Ok(Self { layout, branches })
    }

    pub fn pure(state: PureState<T>) -> Self {
        Self {
            layout: state.layout().clone(),
            branches: vec![(T::one(), state)],
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn branches(&self) -> &[(T, PureState<T>)] {
        &self.branches
    }

    pub fn into_branches(self) -> Vec<(T, PureState<T>)> {
        self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn total_weight(&self) -> T {
        self.branches.iter().fold(T::zero(), |a, (w, _)| a + *w)
    }

    /// `Tr ρ = Σ w_i ‖ψ_i‖²`.
    pub fn trace(&self) -> T {
        self.branches
            .iter()
            .fold(T::zero(), |a, (w, s)| a + *w * s.norm_sqr())
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - T::one()).abs() <= T::lit(NORMALIZED_TOL)
    }

    /// Full density matrix over the layout's flat index.
    pub fn density(&self) -> CMatrix<T> {
        let d = self.layout.dim();
        let mut rho = CMatrix::zeros(d);
        for (w, s) in &self.branches {
            let a = s.amplitudes();
            for (i, ai) in a.iter().enumerate() {
                if ai.norm_sqr() == T::zero() {
                    continue;
                }
                let wi = *ai * *w;
                for (j, aj) in a.iter().enumerate() {
                    rho[(i, j)] = rho[(i, j)] + wi * aj.conj();
                }
            }
        }
        rho
    }

    /// Re-expresses the ensemble through the spectrum of its density matrix
    /// when that needs fewer branches, dropping weights at or below `tol`.
    /// The state `ρ` is unchanged up to the dropped weight.
    pub fn compress(self, tol: T) -> Self {
        if self.branches.len() <= 2 * self.layout.dim() {
            return self;
        }
        let branches = hermitian_ensemble(&self.density())
            .into_iter()
            .filter(|(w, _)| *w > tol)
            .map(|(w, z)| {
                let st = PureState {
                    layout: self.layout.clone(),
                    amps: z,
                };
                (w, st)
            })
            .collect();
        Self {
            layout: self.layout,
            branches,
        }
    }

    pub fn reduced_density(&self, keep_modes: &[usize]) -> Result<CMatrix<T>> {
        let mut acc = None;
        for (w, s) in &self.branches {
            accumulate_reduced(s, *w, keep_modes, &mut acc)?;
        }
        Ok(acc.expect("at least one branch"))
    }
}

/// Anything that can be viewed as a weighted list of pure branches.
pub trait Ensemble<T: Real> {
    fn layout(&self) -> &ModeLayout;
    fn weighted_branches(&self) -> Vec<(T, &PureState<T>)>;

    /// `Tr ρ`.
    fn trace(&self) -> T {
        self.weighted_branches()
            .iter()
            .fold(T::zero(), |a, (w, s)| a + *w * s.norm_sqr())
    }

    fn require_normalized(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - T::one()).abs() <= T::lit(NORMALIZED_TOL) {
            Ok(())
        } else {
            Err(Error::NotNormalized(tr.to_f64().unwrap_or(f64::NAN)))
        }
    }
}

impl<T: Real> Ensemble<T> for PureState<T> {
    fn layout(&self) -> &ModeLayout {
        &self.layout
    }
    fn weighted_branches(&self) -> Vec<(T, &PureState<T>)> {
        vec![(T::one(), self)]
    }
}

impl<T: Real> Ensemble<T> for MixedState<T> {
    fn layout(&self) -> &ModeLayout {
        &self.layout
    }
    fn weighted_branches(&self) -> Vec<(T, &PureState<T>)> {
        self.branches.iter().map(|(w, s)| (*w, s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn layout_rejects_zero_cutoff_and_empty() {
        assert!(ModeLayout::new(vec![]).is_err());
        assert!(ModeLayout::new(vec![3, 0]).is_err());
        let l = ModeLayout::new(vec![2, 3]).unwrap();
        assert_eq!(l.dim(), 12);
        assert_eq!(l.index_of(&[1, 2]).unwrap(), 6);
    }

    #[test]
    fn layout_dimension_overflow_is_reported() {
        assert!(ModeLayout::uniform(64, 1usize << 20).is_err());
    }

    #[test]
    fn vacuum_amplitudes() {
        let v = PureState::<f64>::vacuum(ModeLayout::new(vec![2]).unwrap());
        assert_eq!(v.amplitudes(), &[c(1., 0.), c(0., 0.), c(0., 0.)]);
        let v2 = PureState::<f64>::vacuum(ModeLayout::new(vec![1, 1]).unwrap());
        assert_eq!(v2.amplitude(&[0, 0]).unwrap(), c(1., 0.));
        assert_abs_diff_eq!(v2.norm(), 1.0);
    }

    #[test]
    fn fock_state_bounds() {
        let l = ModeLayout::new(vec![4, 4]).unwrap();
        let s = PureState::<f64>::fock(l.clone(), &[2, 0]).unwrap();
        assert_eq!(s.amplitude(&[2, 0]).unwrap(), c(1., 0.));
        assert_eq!(
            PureState::<f64>::fock(l, &[5, 0]).unwrap_err(),
            Error::OccupationExceedsCutoff {
                mode: 0,
                occupation: 5,
                cutoff: 4
            }
        );
    }

    #[test]
    fn fock_orthonormality() {
        let l = ModeLayout::new(vec![2, 2]).unwrap();
        for a in 0..l.dim() {
            for b in 0..l.dim() {
                let sa = PureState::<f64>::fock(l.clone(), &l.occupations(a)).unwrap();
                let sb = PureState::<f64>::fock(l.clone(), &l.occupations(b)).unwrap();
                let ip = sa.inner(&sb).unwrap();
                assert_eq!(ip, c(if a == b { 1. } else { 0. }, 0.));
            }
        }
    }

    #[test]
    fn creation_and_annihilation_edges() {
        let l = ModeLayout::new(vec![3]).unwrap();
        let vac = PureState::<f64>::vacuum(l.clone());
        let up = vac.apply_creation(0).unwrap();
        assert_eq!(up.state.amplitude(&[1]).unwrap(), c(1., 0.));
        assert_eq!(up.leakage, 0.0);

        let top = PureState::<f64>::fock(l.clone(), &[3]).unwrap();
        let lost = top.apply_creation(0).unwrap();
        assert_eq!(lost.state.norm_sqr(), 0.0);
        assert_eq!(lost.leakage, 1.0);

        let one = PureState::<f64>::fock(l.clone(), &[1]).unwrap();
        assert_eq!(one.apply_annihilation(0).unwrap(), vac);
        assert_eq!(vac.apply_annihilation(0).unwrap().norm_sqr(), 0.0);
    }

    #[test]
    fn double_creation_on_vacuum() {
        let l = ModeLayout::new(vec![4, 4]).unwrap();
        let vac = PureState::<f64>::vacuum(l);
        let s = vac
            .apply_creation(0)
            .unwrap()
            .state
            .apply_creation(0)
            .unwrap()
            .state;
        assert_abs_diff_eq!(
            s.amplitude(&[2, 0]).unwrap().re,
            2f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(s.norm_sqr(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn coherent_subtraction_of_noon4() {
        let l = ModeLayout::new(vec![5, 5]).unwrap();
        let h = 0.5f64.sqrt();
        let noon =
            PureState::from_terms(l, &[(c(h, 0.), vec![4, 0]), (c(h, 0.), vec![0, 4])]).unwrap();
        let sub = noon
            .apply_annihilation(0)
            .unwrap()
            .add_scaled(c(1., 0.), &noon.apply_annihilation(1).unwrap())
            .unwrap();
        let (n, _) = sub.normalize().unwrap();
        assert_abs_diff_eq!(n.amplitude(&[3, 0]).unwrap().re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(n.amplitude(&[0, 3]).unwrap().re, h, epsilon = 1e-15);
    }

    #[test]
    fn tensor_product_layout_and_norm() {
        let one = PureState::<f64>::fock(ModeLayout::new(vec![2]).unwrap(), &[1]).unwrap();
        let vac = PureState::<f64>::vacuum(ModeLayout::new(vec![2, 2]).unwrap());
        let t = one.tensor(&vac);
        assert_eq!(t.layout().cutoffs(), &[2, 2, 2]);
        assert_eq!(t.amplitude(&[1, 0, 0]).unwrap(), c(1., 0.));

        let vv = vac.tensor(&vac);
        assert_eq!(vv, PureState::vacuum(ModeLayout::uniform(4, 2).unwrap()));

        let a = one.scaled(c(2., 0.));
        let b = vac.scaled(c(0., 3.));
        assert_abs_diff_eq!(a.tensor(&b).norm(), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_product_properties() {
        let l = ModeLayout::new(vec![2, 2]).unwrap();
        let x = PureState::<f64>::fock(l.clone(), &[2, 0]).unwrap();
        let y = PureState::<f64>::fock(l.clone(), &[0, 2]).unwrap();
        assert_eq!(x.inner(&y).unwrap(), c(0., 0.));
        let psi = PureState::from_terms(
            l.clone(),
            &[(c(0.3, 0.1), vec![1, 1]), (c(-0.2, 0.7), vec![2, 0])],
        )
        .unwrap();
        assert_abs_diff_eq!(psi.inner(&psi).unwrap().re, psi.norm_sqr(), epsilon = 1e-15);
        let k = c(0.4, -1.3);
        let lhs = psi.inner(&x.scaled(k)).unwrap();
        let rhs = psi.inner(&x).unwrap() * k;
        assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-15);
        let other = PureState::<f64>::vacuum(ModeLayout::new(vec![3, 2]).unwrap());
        assert!(matches!(x.inner(&other), Err(Error::LayoutMismatch { .. })));
    }

    #[test]
    fn normalize_cases() {
        let l = ModeLayout::new(vec![2]).unwrap();
        let one = PureState::<f64>::fock(l.clone(), &[1]).unwrap();
        let (n, norm) = one.scaled(c(2., 0.)).normalize().unwrap();
        assert_eq!(norm, 2.0);
        assert_eq!(n, one);
        assert!(matches!(
            PureState::<f64>::zeros(l).normalize(),
            Err(Error::ZeroNormState { .. })
        ));
        let (same, nn) = one.normalize().unwrap();
        assert_eq!(same, one);
        assert_eq!(nn, 1.0);
    }

    #[test]
    fn reduced_density_examples() {
        let l = ModeLayout::new(vec![2, 2]).unwrap();
        let vac = PureState::<f64>::vacuum(l.clone());
        let r = vac.reduced_density(&[0]).unwrap();
        assert_eq!(r.dim(), 3);
        assert_eq!(r[(0, 0)], c(1., 0.));
        assert_eq!(r[(1, 1)], c(0., 0.));

        let h = 0.5f64.sqrt();
        let noon =
            PureState::from_terms(l, &[(c(h, 0.), vec![2, 0]), (c(-h, 0.), vec![0, 2])]).unwrap();
        let r = noon.reduced_density(&[0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j && i != 1 { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(r[(i, j)].re, want, epsilon = 1e-15);
                assert_abs_diff_eq!(r[(i, j)].im, 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn reduced_density_guard() {
        let l = ModeLayout::new(vec![64, 64, 1]).unwrap();
        let vac = PureState::<f64>::vacuum(l);
        assert!(matches!(
            vac.reduced_density(&[0, 1]),
            Err(Error::DimensionGuardExceeded { .. })
        ));
    }

    #[test]
    fn mixed_state_rejects_mismatched_layouts() {
        let a = PureState::<f64>::vacuum(ModeLayout::new(vec![2]).unwrap());
        let b = PureState::<f64>::vacuum(ModeLayout::new(vec![3]).unwrap());
        assert!(MixedState::new(vec![(0.5, a.clone()), (0.5, b)]).is_err());
        let m = MixedState::new(vec![(0.25, a.clone()), (0.75, a)]).unwrap();
        assert!(m.is_normalized());
    }

    #[test]
    fn works_in_single_precision() {
        let l = ModeLayout::new(vec![3, 3]).unwrap();
        let s = PureState::<f32>::vacuum(l)
            .apply_creation(1)
            .unwrap()
            .state
            .apply_creation(1)
            .unwrap()
            .state;
        assert!((s.norm_sqr() - 2.0f32).abs() < 1e-6);
    }

    #[test]
    fn compress_keeps_density() {
        let l = ModeLayout::uniform(1, 1).unwrap();
        let branches: Vec<_> = (0..7)
            .map(|k| {
                let th = k as f64 * 0.4;
                let st =
                    PureState::from_amplitudes(l.clone(), vec![c(th.cos(), 0.0), c(0.0, th.sin())])
                        .unwrap();
                (1.0 / 7.0, st)
            })
            .collect();
        let mix = MixedState::new(branches).unwrap();
        let before = mix.density();
        let small = mix.compress(1e-14);
        assert!(small.len() <= 4);
        let after = small.density();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    (before[(i, j)] - after[(i, j)]).norm(),
                    0.0,
                    epsilon = 1e-13
                );
            }
        }
    }
}
