//! The four-state persistent walk on a periodic 1-D lattice.
//!
//! States 1 and 3 move right, 2 and 4 move left; at every step half of the
//! walkers keep their state and half advance along the cycle 1→2→3→4→1.
//! States 1,2 carry parity +1 and states 3,4 parity −1. The change of
//! variables `z = (p₁+p₃)/2, (p₂+p₄)/2` and `φ = (p₁−p₃)/2, (p₂−p₄)/2`
//! splits the dynamics into a diffusive block and a parity block.

mod monte_carlo;

pub use monte_carlo::{monte_carlo_estimate, McEstimate};

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// Parity-block normalization that keeps the walk probabilistic.
pub const ALPHA_PROBABILISTIC: f64 = 1.0;
/// Parity-block normalization that makes the transfer matrix unitary.
pub const ALPHA_UNITARY: f64 = SQRT_2;

const PARALLEL_SITES: usize = 1 << 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    delta: f64,
    epsilon: f64,
    alpha: f64,
    sites: usize,
}

impl LatticeParams {
    pub fn new(delta: f64, epsilon: f64, alpha: f64, sites: usize) -> Result<Self> {
        positive("delta", delta)?;
        positive("epsilon", epsilon)?;
        if !alpha.is_finite() {
            return Err(Error::NotFinite {
                name: "alpha",
                value: alpha,
            });
        }
        if sites < 3 {
            return Err(Error::InvalidParameter(format!(
                "lattice needs at least 3 sites, got {sites}"
            )));
        }
        Ok(Self {
            delta,
            epsilon,
            alpha,
            sites,
        })
    }

    /// Parameters on the diffusive scaling line `δ²/ε = 2D`.
    pub fn diffusive(delta: f64, diffusion_constant: f64, alpha: f64, sites: usize) -> Result<Self> {
        positive("diffusion_constant", diffusion_constant)?;
        positive("delta", delta)?;
        Self::new(delta, delta * delta / (2.0 * diffusion_constant), alpha, sites)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    /// `D = δ²/(2ε)`.
    pub fn diffusion_constant(&self) -> f64 {
        self.delta * self.delta / (2.0 * self.epsilon)
    }

    /// Storage index of lattice label `m = 0`.
    pub fn origin(&self) -> usize {
        self.sites / 2
    }

    /// Storage index of lattice label `m`, wrapped periodically.
    pub fn index_of(&self, m: i64) -> usize {
        (self.origin() as i64 + m).rem_euclid(self.sites as i64) as usize
    }

    pub fn label_of(&self, index: usize) -> i64 {
        index as i64 - self.origin() as i64
    }

    pub fn position(&self, index: usize) -> f64 {
        self.label_of(index) as f64 * self.delta
    }

    /// Refuses runs whose light cone would wrap around the periodic lattice:
    /// `n_steps` from an initial support `support` sites wide must fit.
    pub fn check_no_wrap(&self, n_steps: usize, support: usize) -> Result<()> {
        if self.sites > 2 * n_steps + support {
            Ok(())
        } else {
            Err(Error::Wraparound {
                steps: n_steps,
                support,
                sites: self.sites,
            })
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.sites {
            Ok(())
        } else {
            Err(Error::SizeMismatch {
                expected: self.sites,
                found: len,
            })
        }
    }
}

/// Densities `p₁..p₄` per site at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourStateField {
    pub p: Vec<[f64; 4]>,
    pub step: usize,
}

impl FourStateField {
    pub fn zeros(sites: usize) -> Self {
        Self {
            p: vec![[0.0; 4]; sites],
            step: 0,
        }
    }

    /// All mass in state `state` (1..=4) at lattice label `m0`.
    pub fn unit_state(params: &LatticeParams, state: usize, m0: i64) -> Result<Self> {
        if !(1..=4).contains(&state) {
            return Err(Error::InvalidParameter(format!(
                "walker state must be 1..=4, got {state}"
            )));
        }
        let mut f = Self::zeros(params.sites());
        f.p[params.index_of(m0)][state - 1] = 1.0;
        Ok(f)
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn rows(&self, params: &LatticeParams) -> Vec<FourStateRow> {
        self.p
            .iter()
            .enumerate()
            .map(|(i, p)| FourStateRow {
                step: self.step,
                m: params.label_of(i),
                x: params.position(i),
                p1: p[0],
                p2: p[1],
                p3: p[2],
                p4: p[3],
            })
            .collect()
    }
}

/// `(z₁, z₂)` and `(φ₁, φ₂)` per site at one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposedField {
    pub z: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    pub step: usize,
}

impl DecomposedField {
    pub fn zeros(sites: usize) -> Self {
        Self {
            z: vec![[0.0; 2]; sites],
            phi: vec![[0.0; 2]; sites],
            step: 0,
        }
    }

    /// `(φ₁, φ₂) = (0, √2)` at `m0`, so that both `ψ±(p, 0) = 1/√2`.
    pub fn paper_delta(params: &LatticeParams, m0: i64) -> Self {
        let mut f = Self::zeros(params.sites());
        f.phi[params.index_of(m0)] = [0.0, SQRT_2];
        f
    }

    /// `(z₁, z₂) = (½, ½)` at `m0`: unit total z-mass, split evenly by
    /// direction.
    pub fn diffusion_delta(params: &LatticeParams, m0: i64) -> Self {
        let mut f = Self::zeros(params.sites());
        f.z[params.index_of(m0)] = [0.5, 0.5];
        f
    }

    /// `Σ (z₁ + z₂)`, the mean and the variance of position under it.
    pub fn z_moments(&self, params: &LatticeParams) -> Moments {
        moments(
            self.z
                .iter()
                .enumerate()
                .map(|(i, z)| (params.position(i), z[0] + z[1])),
        )
    }

    pub fn rows(&self, params: &LatticeParams) -> Vec<DecomposedRow> {
        self.z
            .iter()
            .zip(&self.phi)
            .enumerate()
            .map(|(i, (z, phi))| DecomposedRow {
                step: self.step,
                m: params.label_of(i),
                x: params.position(i),
                z1: z[0],
                z2: z[1],
                phi1: phi[0],
                phi2: phi[1],
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

fn moments(weights: impl Iterator<Item = (f64, f64)> + Clone) -> Moments {
    let mass: f64 = weights.clone().map(|(_, w)| w).sum();
    let mean = weights.clone().map(|(x, w)| x * w).sum::<f64>() / mass;
    let variance = weights.map(|(x, w)| (x - mean) * (x - mean) * w).sum::<f64>() / mass;
    Moments {
        mass,
        mean,
        variance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourStateRow {
    pub step: usize,
    pub m: i64,
    pub x: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecomposedRow {
    pub step: usize,
    pub m: i64,
    pub x: f64,
    pub z1: f64,
    pub z2: f64,
    pub phi1: f64,
    pub phi2: f64,
}

/// Builds `out[m] = rule(in[m-1], in[m+1])` with periodic wraparound. Each
/// output site reads only the old array, so the parallel path is bitwise
/// identical to the serial one.
fn stencil<T, F>(input: &[T], rule: F) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(&T, &T) -> T + Sync + Send,
{
    let n = input.len();
    let at = |i: usize| rule(&input[(i + n - 1) % n], &input[(i + 1) % n]);
    if n >= PARALLEL_SITES {
        (0..n).into_par_iter().map(at).collect()
    } else {
        (0..n).map(at).collect()
    }
}

/// One step of the four-state difference equations.
pub fn step_four_state(field: &FourStateField, params: &LatticeParams) -> Result<FourStateField> {
    params.check_len(field.p.len())?;
    let p = stencil(&field.p, |left, right| {
        [
            0.5 * left[0] + 0.5 * right[3],
            0.5 * right[1] + 0.5 * left[0],
            0.5 * left[2] + 0.5 * right[1],
            0.5 * right[3] + 0.5 * left[2],
        ]
    });
    Ok(FourStateField {
        p,
        step: field.step + 1,
    })
}

pub fn decompose(field: &FourStateField) -> DecomposedField {
    let (z, phi) = field
        .p
        .iter()
        .map(|p| {
            (
                [0.5 * (p[0] + p[2]), 0.5 * (p[1] + p[3])],
                [0.5 * (p[0] - p[2]), 0.5 * (p[1] - p[3])],
            )
        })
        .unzip();
    DecomposedField {
        z,
        phi,
        step: field.step,
    }
}

pub fn compose(field: &DecomposedField) -> FourStateField {
    let p = field
        .z
        .iter()
        .zip(&field.phi)
        .map(|(z, phi)| [z[0] + phi[0], z[1] + phi[1], z[0] - phi[0], z[1] - phi[1]])
        .collect();
    FourStateField {
        p,
        step: field.step,
    }
}

/// Diffusive block: both components become `½(z₁(m−1) + z₂(m+1))`.
pub fn z_step(z: &[[f64; 2]]) -> Vec<[f64; 2]> {
    stencil(z, |left, right| {
        let v = 0.5 * (left[0] + right[1]);
        [v, v]
    })
}

/// Parity block with per-step normalization `alpha`.
pub fn phi_step(phi: &[[f64; 2]], alpha: f64) -> Vec<[f64; 2]> {
    let h = 0.5 * alpha;
    stencil(phi, |left, right| {
        [h * (left[0] - right[1]), h * (left[0] + right[1])]
    })
}

/// Anything that advances one lattice step at a time.
pub trait LatticeState: Sized {
    fn advance(&self, params: &LatticeParams) -> Result<Self>;
    fn step_index(&self) -> usize;
}

impl LatticeState for FourStateField {
    fn advance(&self, params: &LatticeParams) -> Result<Self> {
        step_four_state(self, params)
    }

    fn step_index(&self) -> usize {
        self.step
    }
}

impl LatticeState for DecomposedField {
    fn advance(&self, params: &LatticeParams) -> Result<Self> {
        params.check_len(self.z.len())?;
        params.check_len(self.phi.len())?;
        Ok(DecomposedField {
            z: z_step(&self.z),
            phi: phi_step(&self.phi, params.alpha()),
            step: self.step + 1,
        })
    }

    fn step_index(&self) -> usize {
        self.step
    }
}

/// Whether step counts must be multiples of 8 (the mean state-cycle return
/// time), which strips the fine-scale oscillation from the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stepping {
    Stroboscopic,
    Raw,
}

pub fn evolve<S: LatticeState + Clone>(
    field: &S,
    params: &LatticeParams,
    n_steps: usize,
    stepping: Stepping,
) -> Result<S> {
    if stepping == Stepping::Stroboscopic && !n_steps.is_multiple_of(8) {
        return Err(Error::NotStroboscopic(n_steps));
    }
    let mut state = field.clone();
    for _ in 0..n_steps {
        state = state.advance(params)?;
    }
    Ok(state)
}
