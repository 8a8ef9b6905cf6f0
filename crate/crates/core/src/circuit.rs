//! Gate sequences on a register whose leading modes carry the input state and
//! whose trailing modes start in vacuum.

use crate::detectors::{herald_on_off, HeraldSpec, Heralded};
use crate::error::{Error, Result};
use crate::fock::{ModeLayout, PureState, Truncated};
use crate::optics::{
    apply_beam_splitter, apply_two_mode_squeezer, BeamSplitterParam, SqueezeParam,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate<T> {
    BeamSplitter {
        modes: (usize, usize),
        param: BeamSplitterParam<T>,
    },
    Squeezer {
        signal: usize,
        idler: usize,
        xi: SqueezeParam<T>,
    },
    Phase {
        mode: usize,
        phi: T,
    },
}

impl<T: Real> Gate<T> {
    pub fn balanced(a: usize, b: usize) -> Self {
        Gate::BeamSplitter {
            modes: (a, b),
            param: BeamSplitterParam::balanced(),
        }
    }

    fn modes(&self) -> Vec<usize> {
        match self {
            Gate::BeamSplitter { modes, .. } => vec![modes.0, modes.1],
            Gate::Squeezer { signal, idler, .. } => vec![*signal, *idler],
            Gate::Phase { mode, .. } => vec![*mode],
        }
    }

    pub fn apply(&self, state: &PureState<T>) -> Result<Truncated<T>> {
        match self {
            Gate::BeamSplitter { modes, param } => {
                apply_beam_splitter(state, modes.0, modes.1, param)
            }
            Gate::Squeezer { signal, idler, xi } => {
                apply_two_mode_squeezer(state, *signal, *idler, xi)
            }
            Gate::Phase { mode, phi } => Ok(Truncated {
                state: state.apply_phase(*mode, *phi)?,
                leakage: T::zero(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit<T> {
    layout: ModeLayout,
    inputs: usize,
    gates: Vec<Gate<T>>,
    herald: HeraldSpec<T>,
}

impl<T: Real> Circuit<T> {
    /// `inputs` leading modes receive the input state; gates are applied in
    /// list order; herald modes must all be ancillas.
    pub fn new(
        layout: ModeLayout,
        inputs: usize,
        gates: Vec<Gate<T>>,
        herald: HeraldSpec<T>,
    ) -> Result<Self> {
        if inputs == 0 || inputs > layout.num_modes() {
            return Err(Error::InvalidParameter(format!(
                "{inputs} input modes on a {}-mode register",
                layout.num_modes()
            )));
        }
        for g in &gates {
            let ms = g.modes();
            for &m in &ms {
                layout.check_mode(m)?;
            }
            if ms.len() == 2 && ms[0] == ms[1] {
                return Err(Error::SameMode(ms[0]));
            }
        }
        herald.check_against(&layout)?;
        if let Some(m) = herald.modes().into_iter().find(|&m| m < inputs) {
            return Err(Error::InvalidParameter(format!(
                "herald on input mode {m}; only ancilla modes may be measured"
            )));
        }
        Ok(Self {
            layout,
            inputs,
            gates,
            herald,
        })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn herald(&self) -> &HeraldSpec<T> {
        &self.herald
    }

    pub fn with_herald(&self, herald: HeraldSpec<T>) -> Result<Self> {
        Self::new(self.layout.clone(), self.inputs, self.gates.clone(), herald)
    }

    pub fn input_layout(&self) -> ModeLayout {
        self.layout
            .select(&(0..self.inputs).collect::<Vec<_>>())
            .expect("input modes exist")
    }

    /// Applies the gate sequence to `input ⊗ |0…0⟩`.
    pub fn evolve(&self, input: &PureState<T>) -> Result<Truncated<T>> {
        let want = self.input_layout();
        if input.layout() != &want {
            return Err(Error::LayoutMismatch {
                left: input.layout().cutoffs().to_vec(),
                right: want.cutoffs().to_vec(),
            });
        }
        let mut state = if self.inputs == self.layout.num_modes() {
            input.clone()
        } else {
            let anc = self
                .layout
                .select(&(self.inputs..self.layout.num_modes()).collect::<Vec<_>>())?;
            input.tensor(&PureState::vacuum(anc))
        };
        let mut leakage = T::zero();
        for g in &self.gates {
            let out = g.apply(&state)?;
            leakage = leakage + out.leakage;
            state = out.state;
        }
        Ok(Truncated { state, leakage })
    }

    pub fn run(&self, input: &PureState<T>) -> Result<Heralded<T>> {
        let evolved = self.evolve(input)?;
        let mut h = herald_on_off(&evolved.state, &self.herald)?;
        h.leakage = evolved.leakage;
        Ok(h)
    }
}
