//! Momentum-space picture of the parity block: the lattice Fourier
//! transform, the 2×2 transfer matrix and its powers, and the continuum
//! objects it approaches.

use std::f64::consts::{FRAC_PI_4, PI};
use std::ops::Mul;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::lattice::LatticeParams;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Dense 2×2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2(m.map(|row| row.map(|v| C64::new(v, 0.0))))
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// `self^n` by binary exponentiation; the multiply order depends only
    /// on `n`.
    pub fn pow(&self, mut n: u64) -> Mat2 {
        let mut result = Mat2::IDENTITY;
        let mut base = *self;
        while n > 0 {
            if n & 1 == 1 {
                result = result * base;
            }
            n >>= 1;
            if n > 0 {
                base = base * base;
            }
        }
        result
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

/// One-step propagator of the parity pair at momentum `p`:
/// `(α/2)·[[e^{−ipδ}, −e^{ipδ}], [e^{−ipδ}, e^{ipδ}]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub matrix: Mat2,
    pub p: f64,
    pub delta: f64,
    pub alpha: f64,
}

pub fn transfer_matrix(p: f64, delta: f64, alpha: f64) -> TransferMatrix {
    let h = 0.5 * alpha;
    let back = C64::from_polar(h, -p * delta);
    let ahead = C64::from_polar(h, p * delta);
    TransferMatrix {
        matrix: Mat2([[back, -ahead], [back, ahead]]),
        p,
        delta,
        alpha,
    }
}

/// Closed-form eigenvalues `λ± = (α/2)(cos pδ ± i√(1 + sin² pδ))`.
pub fn eigenvalues(t: &TransferMatrix) -> (C64, C64) {
    let (s, c) = (t.p * t.delta).sin_cos();
    let h = 0.5 * t.alpha;
    let im = (1.0 + s * s).sqrt();
    (C64::new(h * c, h * im), C64::new(h * c, -h * im))
}

/// Small-`pδ` form of `λ₊`: `(α/√2)e^{iπ/4}(1 + i p²δ²/2)`, accurate to
/// `O((pδ)⁴)`.
pub fn eigenvalue_expansion(p: f64, delta: f64, alpha: f64) -> C64 {
    let theta = p * delta;
    C64::from_polar(alpha / 2f64.sqrt(), FRAC_PI_4) * C64::new(1.0, 0.5 * theta * theta)
}

/// `T^steps`, restricted to multiples of 8.
pub fn stroboscopic_power(t: &Mat2, steps: u64) -> Result<Mat2> {
    if !steps.is_multiple_of(8) {
        return Err(Error::NotStroboscopic(steps as usize));
    }
    Ok(t.pow(steps))
}

/// Continuum limit of `T^s`: rotation by `p²Dt`.
pub fn continuum_propagator(p: f64, diffusion_constant: f64, t: f64) -> Result<[[f64; 2]; 2]> {
    finite("t", t)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time must be non-negative, got {t}")));
    }
    let (s, c) = (p * p * diffusion_constant * t).sin_cos();
    Ok([[c, -s], [s, c]])
}

/// `ψ± = (±iφ₁ + φ₂)/2`.
pub fn assemble_psi(phi1: C64, phi2: C64) -> (C64, C64) {
    let i_phi1 = C64::i() * phi1;
    ((i_phi1 + phi2) * 0.5, (-i_phi1 + phi2) * 0.5)
}

/// Inverse of [`assemble_psi`]: `φ₁ = −i(ψ₊ − ψ₋)`, `φ₂ = ψ₊ + ψ₋`.
pub fn disassemble_psi(psi_plus: C64, psi_minus: C64) -> (C64, C64) {
    (-C64::i() * (psi_plus - psi_minus), psi_plus + psi_minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// `e^{ix²/4Dt}/√(4πiDt)` for `Plus` (principal `√i = e^{iπ/4}`) and its
/// complex conjugate for `Minus`.
pub fn fresnel_kernel(x: f64, t: f64, diffusion_constant: f64, branch: Branch) -> Result<C64> {
    positive("t", t)?;
    positive("diffusion_constant", diffusion_constant)?;
    let four_dt = 4.0 * diffusion_constant * t;
    let k = C64::from_polar((PI * four_dt).sqrt().recip(), x * x / four_dt - FRAC_PI_4);
    Ok(match branch {
        Branch::Plus => k,
        Branch::Minus => k.conj(),
    })
}

/// `p_j = 2πj/(Nδ)` for `j = −⌊N/2⌋, …, N − 1 − ⌊N/2⌋`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub p: Vec<f64>,
    pub delta: f64,
}

impl MomentumGrid {
    pub fn new(sites: usize, delta: f64) -> Self {
        let lowest = -((sites / 2) as i64);
        let p = (0..sites as i64)
            .map(|k| 2.0 * PI * (lowest + k) as f64 / (sites as f64 * delta))
            .collect();
        Self { p, delta }
    }

    pub fn for_lattice(params: &LatticeParams) -> Self {
        Self::new(params.sites(), params.delta())
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// Generating function `φ_k(p) = Σ_m φ_k(mδ) e^{−ipmδ}` on the momentum grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub grid: MomentumGrid,
    pub phi: Vec<[C64; 2]>,
    pub step: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub p: f64,
    pub re_phi1: f64,
    pub im_phi1: f64,
    pub re_phi2: f64,
    pub im_phi2: f64,
}

impl SpectralField {
    /// `Σ_p |φ₁(p)|² + |φ₂(p)|²`.
    pub fn norm_sq(&self) -> f64 {
        self.phi.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum()
    }

    /// Applies `T^steps` at every grid momentum.
    pub fn propagate(&self, alpha: f64, steps: u64) -> SpectralField {
        let phi = self
            .grid
            .p
            .iter()
            .zip(&self.phi)
            .map(|(&p, v)| transfer_matrix(p, self.grid.delta, alpha).matrix.pow(steps).apply(*v))
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            phi,
            step: self.step + steps as usize,
        }
    }

    pub fn rows(&self) -> Vec<SpectralRow> {
        self.grid
            .p
            .iter()
            .zip(&self.phi)
            .map(|(&p, v)| SpectralRow {
                p,
                re_phi1: v[0].re,
                im_phi1: v[0].im,
                re_phi2: v[1].re,
                im_phi2: v[1].im,
            })
            .collect()
    }
}

// e^{2πi·sign·j·o/N} with the exponent reduced in integers first.
fn origin_phase(j: i64, origin: i64, sites: i64, sign: f64) -> C64 {
    let r = (j * origin).rem_euclid(sites);
    C64::from_polar(1.0, sign * 2.0 * PI * r as f64 / sites as f64)
}

pub fn to_spectral(phi: &[[f64; 2]], params: &LatticeParams) -> Result<SpectralField> {
    let complex: Vec<[C64; 2]> = phi
        .iter()
        .map(|v| [C64::new(v[0], 0.0), C64::new(v[1], 0.0)])
        .collect();
    to_spectral_complex(&complex, params)
}

pub fn to_spectral_complex(phi: &[[C64; 2]], params: &LatticeParams) -> Result<SpectralField> {
    let n = params.sites();
    if phi.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: phi.len(),
        });
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let lowest = -((n / 2) as i64);
    let origin = params.origin() as i64;
    let mut out = vec![[ZERO; 2]; n];
    for k in 0..2 {
        let mut buf: Vec<C64> = phi.iter().map(|v| v[k]).collect();
        fft.process(&mut buf);
        for (slot, j) in out.iter_mut().zip(lowest..) {
            let bin = j.rem_euclid(n as i64) as usize;
            slot[k] = buf[bin] * origin_phase(j, origin, n as i64, 1.0);
        }
    }
    Ok(SpectralField {
        grid: MomentumGrid::for_lattice(params),
        phi: out,
        step: 0,
    })
}

/// Inverse transform back to lattice sites (complex, since transforms of
/// propagated fields need not be Hermitian).
pub fn from_spectral(field: &SpectralField, params: &LatticeParams) -> Result<Vec<[C64; 2]>> {
    let n = params.sites();
    if field.phi.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: field.phi.len(),
        });
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let lowest = -((n / 2) as i64);
    let origin = params.origin() as i64;
    let scale = 1.0 / n as f64;
    let mut out = vec![[ZERO; 2]; n];
    for k in 0..2 {
        let mut buf = vec![ZERO; n];
        for (v, j) in field.phi.iter().zip(lowest..) {
            let bin = j.rem_euclid(n as i64) as usize;
            buf[bin] = v[k] * origin_phase(j, origin, n as i64, -1.0);
        }
        fft.process(&mut buf);
        for (slot, v) in out.iter_mut().zip(buf) {
            slot[k] = v * scale;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{phi_step, ALPHA_UNITARY};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

    fn random_phi(n: usize, seed: u64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
        (0..n).map(|_| [u(), u()]).collect()
    }

    // Direct O(N²) evaluation of the defining sum.
    fn naive_dft(phi: &[[f64; 2]], params: &LatticeParams) -> Vec<[C64; 2]> {
        let grid = MomentumGrid::for_lattice(params);
        grid.p
            .iter()
            .map(|&p| {
                let mut acc = [ZERO; 2];
                for (i, v) in phi.iter().enumerate() {
                    let m = i as f64 - params.origin() as f64;
                    let w = C64::from_polar(1.0, -p * m * params.delta());
                    acc[0] += w * v[0];
                    acc[1] += w * v[1];
                }
                acc
            })
            .collect()
    }

    fn lattice(n: usize) -> LatticeParams {
        LatticeParams::new(0.1, 0.01, ALPHA_UNITARY, n).unwrap()
    }

    #[test]
    fn momentum_grid_contains_zero() {
        for n in [8, 9, 1024] {
            let g = MomentumGrid::new(n, 0.1);
            assert_eq!(g.len(), n);
            assert!(g.p.contains(&0.0));
            assert!(g.p.windows(2).all(|w| w[1] > w[0]));
        }
        let g = MomentumGrid::new(8, 0.5);
        assert_abs_diff_eq!(g.p[0], -2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn delta_and_uniform_transforms() {
        let params = lattice(16);
        let mut phi = vec![[0.0; 2]; 16];
        phi[params.index_of(0)] = [0.0, 1.0];
        let s = to_spectral(&phi, &params).unwrap();
        for v in &s.phi {
            assert_abs_diff_eq!(v[1].re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v[1].im, 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v[0].norm(), 0.0, epsilon = 1e-15);
        }
        let s = to_spectral(&vec![[2.0, 0.0]; 16], &params).unwrap();
        for (p, v) in s.grid.p.iter().zip(&s.phi) {
            let expected = if *p == 0.0 { 32.0 } else { 0.0 };
            assert_abs_diff_eq!(v[0].norm(), expected, epsilon = 1e-13);
        }
    }

    #[test]
    fn matches_naive_sum_for_even_and_odd_sizes() {
        for n in [16, 15, 64, 101] {
            let params = lattice(n);
            let phi = random_phi(n, n as u64);
            let fast = to_spectral(&phi, &params).unwrap();
            let slow = naive_dft(&phi, &params);
            for (a, b) in fast.phi.iter().zip(&slow) {
                assert!((a[0] - b[0]).norm() < 1e-12);
                assert!((a[1] - b[1]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn real_fields_are_hermitian() {
        let params = lattice(32);
        let s = to_spectral(&random_phi(32, 5), &params).unwrap();
        // p_j and p_{-j} for j = 1..15 sit at indices 16 ± j.
        for j in 1..16 {
            let a = s.phi[16 + j];
            let b = s.phi[16 - j];
            assert!((a[0] - b[0].conj()).norm() < 1e-13);
            assert!((a[1] - b[1].conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn transfer_matrix_at_zero_momentum() {
        let t = transfer_matrix(0.0, 0.1, SQRT_2).matrix;
        let expected = Mat2::from_real([[FRAC_1_SQRT_2, -FRAC_1_SQRT_2], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]]);
        assert!(t.max_abs_diff(&expected) < 1e-15);
        let t8 = stroboscopic_power(&t, 8).unwrap();
        assert!(t8.max_abs_diff(&Mat2::IDENTITY) < 1e-14);
        let t16 = stroboscopic_power(&t, 16).unwrap();
        assert!(t16.max_abs_diff(&Mat2::IDENTITY) < 1e-14);
        assert_eq!(stroboscopic_power(&t, 12), Err(Error::NotStroboscopic(12)));
    }

    #[test]
    fn eigenvalues_at_zero_momentum() {
        let (lp, lm) = eigenvalues(&transfer_matrix(0.0, 0.3, SQRT_2));
        assert!((lp - C64::from_polar(1.0, FRAC_PI_4)).norm() < 1e-15);
        assert!((lm - C64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-15);
        let (lp, lm) = eigenvalues(&transfer_matrix(1.0, 0.1, SQRT_2));
        assert_abs_diff_eq!(lp.norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(lm.norm(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_agree_with_trace_and_determinant() {
        for &(p, d, a) in &[(0.3, 0.2, 1.0), (2.0, 0.05, SQRT_2), (-7.0, 0.4, 0.8)] {
            let t = transfer_matrix(p, d, a);
            let (lp, lm) = eigenvalues(&t);
            assert!((lp + lm - t.matrix.trace()).norm() < 1e-14);
            assert!((lp * lm - t.matrix.det()).norm() < 1e-14);
            // Characteristic polynomial.
            for l in [lp, lm] {
                let r = l * l - t.matrix.trace() * l + t.matrix.det();
                assert!(r.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn powers_diagonalize() {
        let t = transfer_matrix(1.3, 0.2, SQRT_2);
        let (lp, lm) = eigenvalues(&t);
        let ts = stroboscopic_power(&t.matrix, 64).unwrap();
        let (sp, sm) = (lp.powu(64), lm.powu(64));
        assert!((ts.trace() - (sp + sm)).norm() < 1e-12);
        assert!((ts.det() - sp * sm).norm() < 1e-12);
    }

    #[test]
    fn rotation_propagator() {
        assert_eq!(continuum_propagator(0.0, 0.5, 3.0).unwrap(), [[1.0, -0.0], [0.0, 1.0]]);
        let r = continuum_propagator(1.0, 0.5, PI).unwrap();
        assert_abs_diff_eq!(r[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[0][1], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1][0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r[1][1], 0.0, epsilon = 1e-15);
        assert!(continuum_propagator(1.0, 0.5, -1.0).is_err());
    }

    #[test]
    fn psi_assembly() {
        let (pp, pm) = assemble_psi(C64::new(0.0, 0.0), C64::new(SQRT_2, 0.0));
        assert!((pp - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((pm - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert_eq!(assemble_psi(ZERO, ZERO), (ZERO, ZERO));
    }

    #[test]
    fn fresnel_kernel_properties() {
        let (t, d) = (1.7, 0.4);
        for x in [0.0, 0.3, -2.0, 11.0] {
            let k = fresnel_kernel(x, t, d, Branch::Plus).unwrap();
            assert_abs_diff_eq!(k.norm(), 1.0 / (4.0 * PI * d * t).sqrt(), epsilon = 1e-15);
            assert_eq!(fresnel_kernel(x, t, d, Branch::Minus).unwrap(), k.conj());
        }
        // At x = 0 the phase is −π/4.
        let k0 = fresnel_kernel(0.0, t, d, Branch::Plus).unwrap();
        assert_abs_diff_eq!(k0.arg(), -FRAC_PI_4, epsilon = 1e-15);
        assert!(fresnel_kernel(0.0, 0.0, d, Branch::Plus).is_err());
        assert!(fresnel_kernel(0.0, -1.0, d, Branch::Plus).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(seed in any::<u64>(), n in 3usize..200) {
            let params = lattice(n);
            let phi = random_phi(n, seed);
            let back = from_spectral(&to_spectral(&phi, &params).unwrap(), &params).unwrap();
            for (a, b) in phi.iter().zip(&back) {
                prop_assert!((b[0].re - a[0]).abs() < 1e-12 && b[0].im.abs() < 1e-12);
                prop_assert!((b[1].re - a[1]).abs() < 1e-12 && b[1].im.abs() < 1e-12);
            }
        }

        #[test]
        fn unitary_and_determinant(p in -50.0..50.0_f64, delta in 0.001..1.0_f64, alpha in 0.1..3.0_f64) {
            let t = transfer_matrix(p, delta, alpha).matrix;
            prop_assert!((t.det() - C64::new(alpha * alpha / 2.0, 0.0)).norm() < 1e-14 * alpha * alpha);
            prop_assert!((t.trace().norm() - alpha * (p * delta).cos().abs()).abs() < 1e-14 * alpha);
            let u = transfer_matrix(p, delta, SQRT_2).matrix;
            prop_assert!((u.adjoint() * u).max_abs_diff(&Mat2::IDENTITY) < 1e-14);
        }

        #[test]
        fn transfer_matrix_is_one_phi_step(seed in any::<u64>()) {
            let params = lattice(48);
            let phi = random_phi(48, seed);
            let stepped = to_spectral(&phi_step(&phi, params.alpha()), &params).unwrap();
            let via_t = to_spectral(&phi, &params).unwrap().propagate(params.alpha(), 1);
            for (a, b) in stepped.phi.iter().zip(&via_t.phi) {
                prop_assert!((a[0] - b[0]).norm() < 1e-12);
                prop_assert!((a[1] - b[1]).norm() < 1e-12);
            }
        }

        #[test]
        fn psi_round_trip(a in -5.0..5.0_f64, b in -5.0..5.0_f64, c in -5.0..5.0_f64, d in -5.0..5.0_f64) {
            let (phi1, phi2) = (C64::new(a, b), C64::new(c, d));
            let (pp, pm) = assemble_psi(phi1, phi2);
            let (q1, q2) = disassemble_psi(pp, pm);
            prop_assert!((q1 - phi1).norm() < 1e-14);
            prop_assert!((q2 - phi2).norm() < 1e-14);
        }

        #[test]
        fn rotations_compose(p in -5.0..5.0_f64, t1 in 0.0..10.0_f64, t2 in 0.0..10.0_f64) {
            let a = Mat2::from_real(continuum_propagator(p, 0.5, t1).unwrap());
            let b = Mat2::from_real(continuum_propagator(p, 0.5, t2).unwrap());
            let ab = Mat2::from_real(continuum_propagator(p, 0.5, t1 + t2).unwrap());
            prop_assert!((a * b).max_abs_diff(&ab) < 1e-12);
        }
    }
}
