//! End-to-end numerical studies: each one builds its inputs, runs the
//! lattice or analytic machinery, and returns the measured quantities. The
//! command-line runner and the acceptance suite share these.

use std::f64::consts::FRAC_1_SQRT_2;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::{
    classical_control, double_slit_phi, gap_intervals, plane_pattern, plane_pattern_crossings,
    GapInterval, PatternSample, SlitGeometry,
};
use crate::error::{positive, Error, Result};
use crate::kinematics::UnitsConfig;
use crate::lattice::{
    decompose, monte_carlo_estimate, phi_step, step_four_state, z_step, DecomposedField,
    FourStateField, LatticeParams, McEstimate, ALPHA_PROBABILISTIC, ALPHA_UNITARY,
};
use crate::reference::{
    bisect_zeros, compare, diffusion_green, feynman_free, fit_order, linear_fit,
    two_source_node_spacing, two_source_superposition, CompareMode, ComparisonReport,
    SampledSignal, SignalMeta,
};
use crate::spectral::{
    continuum_propagator, eigenvalue_expansion, eigenvalues, fresnel_kernel, stroboscopic_power,
    to_spectral, transfer_matrix, Branch, Mat2, C64,
};

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Number of steps `t/ε`, which must come out a whole number.
fn steps_for(t: f64, epsilon: f64) -> Result<usize> {
    let s = t / epsilon;
    let rounded = s.round();
    if rounded < 1.0 || (s - rounded).abs() > 1e-9 * s.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "t/ε = {s} is not a positive whole number of steps"
        )));
    }
    Ok(rounded as usize)
}

fn halving(first: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| first / f64::powi(2.0, k as i32)).collect()
}

fn is_strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

// ---------------------------------------------------------------- spectral

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTableRow {
    pub p: f64,
    pub unitarity_residual: f64,
    pub abs_lambda_plus: f64,
    pub abs_lambda_minus: f64,
    pub re_det: f64,
    pub im_det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralIdentities {
    pub alpha: f64,
    pub delta: f64,
    /// `max ‖T†T − (α²/2)I‖` over the grid.
    pub max_unitarity_residual: f64,
    pub max_det_residual: f64,
    /// `max ||λ±| − α/√2|`.
    pub max_eigen_modulus_residual: f64,
    /// `‖T⁸(p=0) − I‖` (meaningful for α = √2).
    pub t8_identity_residual: f64,
    pub rows: Vec<SpectralTableRow>,
}

pub fn spectral_identities(points: usize, delta: f64, alpha: f64) -> Result<SpectralIdentities> {
    positive("delta", delta)?;
    if points < 2 {
        return Err(Error::InvalidParameter("need at least two momentum points".into()));
    }
    let grid = crate::spectral::MomentumGrid::new(points, delta);
    let half_sq = alpha * alpha / 2.0;
    let scaled_identity = Mat2::from_real([[half_sq, 0.0], [0.0, half_sq]]);
    let modulus = alpha * FRAC_1_SQRT_2;
    let mut out = SpectralIdentities {
        alpha,
        delta,
        max_unitarity_residual: 0.0,
        max_det_residual: 0.0,
        max_eigen_modulus_residual: 0.0,
        t8_identity_residual: 0.0,
        rows: Vec::with_capacity(points),
    };
    for &p in &grid.p {
        let t = transfer_matrix(p, delta, alpha);
        let unitarity = (t.matrix.adjoint() * t.matrix).max_abs_diff(&scaled_identity);
        let det = t.matrix.det();
        let (lp, lm) = eigenvalues(&t);
        out.max_unitarity_residual = out.max_unitarity_residual.max(unitarity);
        out.max_det_residual = out.max_det_residual.max((det - half_sq).norm());
        out.max_eigen_modulus_residual = out
            .max_eigen_modulus_residual
            .max((lp.norm() - modulus).abs())
            .max((lm.norm() - modulus).abs());
        out.rows.push(SpectralTableRow {
            p,
            unitarity_residual: unitarity,
            abs_lambda_plus: lp.norm(),
            abs_lambda_minus: lm.norm(),
            re_det: det.re,
            im_det: det.im,
        });
    }
    let t0 = transfer_matrix(0.0, delta, alpha).matrix;
    out.t8_identity_residual = stroboscopic_power(&t0, 8)?.max_abs_diff(&Mat2::IDENTITY);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionStudy {
    pub p: f64,
    pub alpha: f64,
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
}

/// Error of the small-`pδ` eigenvalue form against the exact `λ₊`.
pub fn expansion_order(p: f64, deltas: &[f64], alpha: f64) -> Result<ExpansionStudy> {
    let errors: Vec<f64> = deltas
        .iter()
        .map(|&d| {
            let (exact, _) = eigenvalues(&transfer_matrix(p, d, alpha));
            (exact - eigenvalue_expansion(p, d, alpha)).norm()
        })
        .collect();
    let order = fit_order(deltas, &errors)?;
    Ok(ExpansionStudy {
        p,
        alpha,
        deltas: deltas.to_vec(),
        errors,
        order,
    })
}

// ------------------------------------------------------------------ lattice

/// Largest deviation between stepping the four-state densities then
/// decomposing, and decomposing then stepping the two blocks, over
/// `fields` random signed fields.
pub fn block_diagonal_residual(fields: usize, sites: usize, seed: u64) -> Result<f64> {
    let params = LatticeParams::new(0.1, 0.01, ALPHA_PROBABILISTIC, sites)?;
    let mut worst = 0.0_f64;
    for k in 0..fields {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let mut f = FourStateField::zeros(sites);
        for p in f.p.iter_mut() {
            for v in p.iter_mut() {
                *v = 2.0 * uniform(&mut rng) - 1.0;
            }
        }
        let a = decompose(&step_four_state(&f, &params)?);
        let d = decompose(&f);
        let z = z_step(&d.z);
        let phi = phi_step(&d.phi, ALPHA_PROBABILISTIC);
        for (x, y) in a.z.iter().flatten().zip(z.iter().flatten()) {
            worst = worst.max((x - y).abs());
        }
        for (x, y) in a.phi.iter().flatten().zip(phi.iter().flatten()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionLevel {
    pub delta: f64,
    pub steps: usize,
    pub sites: usize,
    pub l1_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionStudy {
    pub diffusion_constant: f64,
    pub t: f64,
    pub levels: Vec<DiffusionLevel>,
    pub monotone: bool,
    pub l1_order: Option<f64>,
    /// Fitted `d Var/dt` at the coarsest level.
    pub variance_slope: f64,
    pub variance_samples: Vec<(f64, f64)>,
}

/// z-density `(z₁+z₂)/(2δ)` on the occupied sublattice against the heat
/// kernel, for a delta started at the origin.
pub fn diffusion_density_error(field: &DecomposedField, params: &LatticeParams, t: f64) -> Result<f64> {
    let d = params.diffusion_constant();
    let delta = params.delta();
    let parity = (field.step % 2) as i64;
    let mut l1 = 0.0;
    for (i, z) in field.z.iter().enumerate() {
        if params.label_of(i).rem_euclid(2) != parity {
            continue;
        }
        let rho = (z[0] + z[1]) / (2.0 * delta);
        l1 += (rho - diffusion_green(params.position(i), t, d)?).abs() * 2.0 * delta;
    }
    Ok(l1)
}

pub fn diffusion_study(diffusion_constant: f64, t: f64, deltas: &[f64]) -> Result<DiffusionStudy> {
    positive("t", t)?;
    let mut levels = Vec::new();
    let mut variance_samples = Vec::new();
    for (k, &delta) in deltas.iter().enumerate() {
        let probe = LatticeParams::diffusive(delta, diffusion_constant, ALPHA_PROBABILISTIC, 3)?;
        let steps = steps_for(t, probe.epsilon())?;
        let sites = 2 * steps + 3;
        let params = LatticeParams::diffusive(delta, diffusion_constant, ALPHA_PROBABILISTIC, sites)?;
        params.check_no_wrap(steps, 1)?;
        let mut field = DecomposedField::diffusion_delta(&params, 0);
        let sample_every = (steps / 10).max(1);
        for s in 1..=steps {
            field.z = z_step(&field.z);
            field.step = s;
            if k == 0 && s % sample_every == 0 {
                variance_samples.push((s as f64 * params.epsilon(), field.z_moments(&params).variance));
            }
        }
        levels.push(DiffusionLevel {
            delta,
            steps,
            sites,
            l1_error: diffusion_density_error(&field, &params, t)?,
        });
    }
    let errors: Vec<f64> = levels.iter().map(|l| l.l1_error).collect();
    let (ts, vs): (Vec<f64>, Vec<f64>) = variance_samples.iter().copied().unzip();
    let variance_slope = linear_fit(&ts, &vs)?.0;
    Ok(DiffusionStudy {
        diffusion_constant,
        t,
        monotone: is_strictly_decreasing(&errors),
        l1_order: if deltas.len() >= 2 { Some(fit_order(deltas, &errors)?) } else { None },
        levels,
        variance_slope,
        variance_samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerLevel {
    pub delta: f64,
    pub steps: usize,
    pub sites: usize,
    /// `‖T^s − R(p²Dt)‖` in L² over the momentum window (Frobenius norm
    /// per point).
    pub rotation_l2_error: f64,
    pub rotation_max_error: f64,
    /// `max |λ₊^s − e^{ip²Dt}|` over the momentum window.
    pub eigenphase_error: f64,
    /// L² distance between the assembled `ψ₊` density and `K₊/√2` on the
    /// position window.
    pub psi_l2_error: f64,
    /// `‖T⁸(p=0) − I‖`.
    pub t8_identity_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerStudy {
    pub diffusion_constant: f64,
    pub t: f64,
    pub x_window: f64,
    pub p_window: f64,
    pub levels: Vec<SchrodingerLevel>,
    pub rotation_order: f64,
    pub psi_order: f64,
    pub eigenphase_order: f64,
}

fn rotation_errors(delta: f64, steps: usize, d: f64, t: f64, p_window: f64, points: usize) -> Result<(f64, f64, f64)> {
    let h = 2.0 * p_window / (points - 1) as f64;
    let mut l2 = 0.0;
    let mut max = 0.0_f64;
    let mut phase = 0.0_f64;
    for j in 0..points {
        let p = -p_window + j as f64 * h;
        let t_mat = transfer_matrix(p, delta, ALPHA_UNITARY);
        let ts = stroboscopic_power(&t_mat.matrix, steps as u64)?;
        let r = Mat2::from_real(continuum_propagator(p, d, t)?);
        let mut frob = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let e = (ts.0[a][b] - r.0[a][b]).norm();
                frob += e * e;
                max = max.max(e);
            }
        }
        let w = if j == 0 || j == points - 1 { 0.5 * h } else { h };
        l2 += w * frob;
        let (lp, _) = eigenvalues(&t_mat);
        phase = phase.max((lp.powu(steps as u32) - C64::from_polar(1.0, p * p * d * t)).norm());
    }
    Ok((l2.sqrt(), max, phase))
}

/// Evolves the parity delta with `α = √2`, assembles `ψ₊` and measures its
/// distance from the Fresnel kernel on `|x| ≤ x_window`.
pub fn schrodinger_psi_error(params: &LatticeParams, steps: usize, t: f64, x_window: f64) -> Result<f64> {
    let d = params.diffusion_constant();
    let delta = params.delta();
    let mut phi = DecomposedField::paper_delta(params, 0).phi;
    for _ in 0..steps {
        phi = phi_step(&phi, params.alpha());
    }
    let parity = (steps % 2) as i64;
    let mut l2 = 0.0;
    for (i, v) in phi.iter().enumerate() {
        let x = params.position(i);
        if params.label_of(i).rem_euclid(2) != parity || x.abs() > x_window {
            continue;
        }
        let (psi_plus, _) = crate::spectral::assemble_psi(C64::new(v[0], 0.0), C64::new(v[1], 0.0));
        let lattice = psi_plus / (2.0 * delta);
        let continuum = fresnel_kernel(x, t, d, Branch::Plus)? * FRAC_1_SQRT_2;
        l2 += (lattice - continuum).norm_sqr() * 2.0 * delta;
    }
    Ok(l2.sqrt())
}

/// Step counts `t/ε` for each level, all of which must be multiples of 8.
pub fn stroboscopic_levels(diffusion_constant: f64, t: f64, deltas: &[f64]) -> Result<Vec<usize>> {
    positive("t", t)?;
    deltas
        .iter()
        .map(|&delta| {
            let probe = LatticeParams::diffusive(delta, diffusion_constant, ALPHA_UNITARY, 3)?;
            let steps = steps_for(t, probe.epsilon())?;
            if steps % 8 != 0 {
                return Err(Error::NotStroboscopic(steps));
            }
            Ok(steps)
        })
        .collect()
}

pub fn schrodinger_study(
    diffusion_constant: f64,
    t: f64,
    deltas: &[f64],
    x_window: f64,
    p_window: f64,
) -> Result<SchrodingerStudy> {
    positive("t", t)?;
    positive("x_window", x_window)?;
    positive("p_window", p_window)?;
    if deltas.len() < 2 {
        return Err(Error::InvalidParameter("a convergence study needs at least two levels".into()));
    }
    let steps_per_level = stroboscopic_levels(diffusion_constant, t, deltas)?;
    let mut levels = Vec::new();
    for (&delta, &steps) in deltas.iter().zip(&steps_per_level) {
        let sites = 2 * steps + 3;
        let params = LatticeParams::diffusive(delta, diffusion_constant, ALPHA_UNITARY, sites)?;
        params.check_no_wrap(steps, 1)?;
        let (rotation_l2_error, rotation_max_error, eigenphase_error) =
            rotation_errors(delta, steps, diffusion_constant, t, p_window, 401)?;
        let t0 = transfer_matrix(0.0, delta, ALPHA_UNITARY).matrix;
        levels.push(SchrodingerLevel {
            delta,
            steps,
            sites,
            rotation_l2_error,
            rotation_max_error,
            eigenphase_error,
            psi_l2_error: schrodinger_psi_error(&params, steps, t, x_window)?,
            t8_identity_residual: stroboscopic_power(&t0, 8)?.max_abs_diff(&Mat2::IDENTITY),
        });
    }
    let col = |f: fn(&SchrodingerLevel) -> f64| levels.iter().map(f).collect::<Vec<f64>>();
    Ok(SchrodingerStudy {
        diffusion_constant,
        t,
        x_window,
        p_window,
        rotation_order: fit_order(deltas, &col(|l| l.rotation_l2_error))?,
        psi_order: fit_order(deltas, &col(|l| l.psi_l2_error))?,
        eigenphase_order: fit_order(deltas, &col(|l| l.eigenphase_error))?,
        levels,
    })
}

/// Default refinement ladders for the two continuum studies.
pub fn default_deltas(first: f64, levels: usize) -> Vec<f64> {
    halving(first, levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStudy {
    pub steps: usize,
    pub sites: usize,
    /// `max_k |‖φ_k‖/‖φ_0‖ − 1|` for `α = √2`.
    pub unitary_drift: f64,
    /// `max_k |‖φ_{k+1}‖/‖φ_k‖ − 1/√2|` for `α = 1`.
    pub probabilistic_decay_residual: f64,
}

/// Spectral ℓ² norm of a random parity field under repeated steps.
pub fn norm_study(steps: usize, sites: usize, seed: u64) -> Result<NormStudy> {
    let params = LatticeParams::new(0.1, 0.01, ALPHA_UNITARY, sites)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<[f64; 2]> = (0..sites)
        .map(|_| [2.0 * uniform(&mut rng) - 1.0, 2.0 * uniform(&mut rng) - 1.0])
        .collect();
    let norm = |phi: &[[f64; 2]]| -> Result<f64> { Ok(to_spectral(phi, &params)?.norm_sq().sqrt()) };
    let n0 = norm(&start)?;
    let mut unitary_drift = 0.0_f64;
    let mut phi = start.clone();
    for _ in 0..steps {
        phi = phi_step(&phi, ALPHA_UNITARY);
        unitary_drift = unitary_drift.max((norm(&phi)? / n0 - 1.0).abs());
    }
    let mut residual = 0.0_f64;
    let mut phi = start;
    let mut prev = n0;
    for _ in 0..steps {
        phi = phi_step(&phi, ALPHA_PROBABILISTIC);
        let n = norm(&phi)?;
        residual = residual.max((n / prev - FRAC_1_SQRT_2).abs());
        prev = n;
    }
    Ok(NormStudy {
        steps,
        sites,
        unitary_drift,
        probabilistic_decay_residual: residual,
    })
}

// -------------------------------------------------------------- Monte Carlo

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McComparison {
    pub estimate: McEstimate,
    pub exact_phi: Vec<[f64; 2]>,
    pub exact_z: Vec<[f64; 2]>,
    /// Standard error used for each site/component: the larger of the
    /// sampled one and the one implied by the exact probabilities.
    pub phi_se: Vec<[f64; 2]>,
    /// `max |φ̂ − φ| / SE` over sites with nonzero SE.
    pub max_phi_z_score: f64,
    /// Sites whose deviation exceeds 4 SE.
    pub outliers: usize,
    /// RMS of `(φ̂ − φ)/α^s` over all sites and components.
    pub rms_error: f64,
}

pub fn mc_comparison(
    params: &LatticeParams,
    steps: usize,
    paths: u64,
    seed: u64,
    initial_state: usize,
) -> Result<McComparison> {
    params.check_no_wrap(steps, 1)?;
    let estimate = monte_carlo_estimate(params, steps, paths, seed, initial_state, 0)?;
    let mut exact = decompose(&FourStateField::unit_state(params, initial_state, 0)?);
    for _ in 0..steps {
        exact.z = z_step(&exact.z);
        exact.phi = phi_step(&exact.phi, params.alpha());
    }
    let scale = params.alpha().powi(steps as i32).abs();
    let n = paths as f64;
    let mut phi_se = Vec::with_capacity(params.sites());
    let mut max_z = 0.0_f64;
    let mut outliers = 0;
    let mut sq = 0.0;
    for i in 0..params.sites() {
        let mut se = [0.0; 2];
        for k in 0..2 {
            let bare = exact.phi[i][k] / scale;
            let exact_var = (0.5 * exact.z[i][k] - bare * bare).max(0.0);
            se[k] = (scale * (exact_var / n).sqrt()).max(estimate.phi_se[i][k]);
            let dev = (estimate.phi[i][k] - exact.phi[i][k]).abs();
            sq += (dev / scale).powi(2);
            if se[k] > 0.0 {
                max_z = max_z.max(dev / se[k]);
            }
            if dev > 4.0 * se[k] + 1e-12 * scale {
                outliers += 1;
            }
        }
        phi_se.push(se);
    }
    Ok(McComparison {
        rms_error: (sq / (2 * params.sites()) as f64).sqrt(),
        estimate,
        exact_phi: exact.phi,
        exact_z: exact.z,
        phi_se,
        max_phi_z_score: max_z,
        outliers,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McScaling {
    pub paths: Vec<u64>,
    pub rms_errors: Vec<f64>,
    pub slope: f64,
}

/// RMS error against the deterministic field as the path count grows.
pub fn mc_scaling(params: &LatticeParams, steps: usize, paths: &[u64], seed: u64) -> Result<McScaling> {
    let rms_errors = paths
        .iter()
        .enumerate()
        .map(|(k, &n)| Ok(mc_comparison(params, steps, n, seed.wrapping_add(k as u64), 1)?.rms_error))
        .collect::<Result<Vec<f64>>>()?;
    let ln: Vec<f64> = paths.iter().map(|&n| n as f64).collect();
    Ok(McScaling {
        slope: fit_order(&ln, &rms_errors)?,
        paths: paths.to_vec(),
        rms_errors,
    })
}

// -------------------------------------------------------------------- clock

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorRow {
    pub x: f64,
    pub clock_parity: i8,
    pub re_feynman: f64,
    pub sign_re_feynman: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagatorStudy {
    pub t: f64,
    pub window: f64,
    pub spacing: f64,
    pub report: ComparisonReport,
    /// Roots of `Re K` in the window, by bisection.
    pub analytic_feynman_crossings: Vec<f64>,
    /// Clock crossings in the window from the closed form.
    pub analytic_clock_crossings: Vec<f64>,
    pub rows: Vec<PropagatorRow>,
}

fn sign_i8(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Binary plane pattern against `sign(Re K)` on `|x| ≤ window`, grid step
/// `spacing` (the grid always contains `x = 0`).
pub fn propagator_compare(t: f64, window: f64, spacing: f64, units: &UnitsConfig) -> Result<PropagatorStudy> {
    positive("t", t)?;
    positive("window", window)?;
    positive("spacing", spacing)?;
    let half = (window / spacing + 1e-9).floor() as i64;
    let x: Vec<f64> = (-half..=half).map(|i| i as f64 * spacing).collect();
    let pattern = plane_pattern(t, &x, units)?;
    let re_k = x
        .iter()
        .map(|&xi| Ok(feynman_free(xi, t, units)?.re))
        .collect::<Result<Vec<f64>>>()?;
    let meta = |label: &str| SignalMeta {
        label: label.into(),
        t,
        diffusion_constant: None,
        mass: Some(units.mass()),
    };
    let clock = SampledSignal::real(x.clone(), pattern.iter().map(|s| f64::from(s.value)).collect(), meta("clock"))?;
    let feynman = SampledSignal::real(x.clone(), re_k.iter().map(|&v| f64::from(sign_i8(v))).collect(), meta("sign Re K"))?;
    let report = compare(&clock, &feynman, CompareMode { align_sign: true })?;
    let analytic_feynman_crossings = bisect_zeros(
        |xi| feynman_free(xi, t, units).map(|k| k.re).unwrap_or(f64::NAN),
        -window,
        window,
        (2 * half).max(1) as usize,
        1e-10 * t,
    );
    let mut analytic_clock_crossings: Vec<f64> = plane_pattern_crossings(t, units)
        .into_iter()
        .filter(|c| *c <= window)
        .flat_map(|c| [-c, c])
        .collect();
    analytic_clock_crossings.sort_by(f64::total_cmp);
    let rows = pattern
        .iter()
        .zip(&re_k)
        .map(|(s, &k)| PropagatorRow {
            x: s.x,
            clock_parity: s.value,
            re_feynman: k,
            sign_re_feynman: sign_i8(k),
        })
        .collect();
    Ok(PropagatorStudy {
        t,
        window,
        spacing,
        report,
        analytic_feynman_crossings,
        analytic_clock_crossings,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleSlitRow {
    pub x: f64,
    pub in_cone: bool,
    pub phi: i8,
    pub phi_sq: i8,
    pub classical: i8,
    pub feynman_intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleSlitStudy {
    pub rows: Vec<DoubleSlitRow>,
    pub gaps: Vec<GapInterval>,
    /// Every in-cone `φ²` is 0 or 1.
    pub phi_sq_binary: bool,
    pub classical_gaps: usize,
    /// Samples where `φ² = 0` disagrees with the independent parity scan.
    pub brute_force_mismatches: usize,
    /// Largest distance from a gap boundary to the nearest boundary of the
    /// fine-grid disagreement set.
    pub max_boundary_offset: f64,
    pub fine_gaps: Vec<GapInterval>,
    pub feynman_nodes: Vec<f64>,
    pub feynman_maxima: Vec<f64>,
    pub expected_node_spacing: f64,
    /// `max |Δnode / (πt/ma) − 1|`.
    pub node_spacing_error: Option<f64>,
}

/// Screen positions `x_min + 10·i·(h/10)`, so that every coarse sample is
/// bitwise one of the samples of the 10× finer scan.
pub fn screen_grid(x_min: f64, h: f64, samples: usize, refine: usize) -> Vec<f64> {
    let fine = h / refine as f64;
    (0..samples).map(|i| x_min + (i * refine) as f64 * fine).collect()
}

// Direct evaluation of the two path proper times, independent of the
// worldline machinery.
fn brute_force_disagreement(x: f64, geometry: &SlitGeometry, units: &UnitsConfig) -> Option<bool> {
    let a = geometry.half_separation();
    let t1 = geometry.source_to_slit_time();
    let t2 = geometry.slit_to_screen_time();
    if (x + a).abs() > t2 || (x - a).abs() > t2 {
        return None;
    }
    let first = (t1 * t1 - a * a).sqrt();
    let parity = |dx: f64| ((first + (t2 * t2 - dx * dx).sqrt()) / units.half_period()).floor() as i64 % 2;
    Some(parity(x + a) != parity(x - a))
}

fn local_extrema(x: &[f64], y: &[f64], minima: bool) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..y.len().saturating_sub(1) {
        let (l, c, r) = if minima { (y[i - 1], y[i], y[i + 1]) } else { (-y[i - 1], -y[i], -y[i + 1]) };
        if c <= l && c < r {
            // Vertex of the parabola through the three samples.
            let h = x[i + 1] - x[i];
            let denom = l - 2.0 * c + r;
            let shift = if denom > 0.0 { 0.5 * h * (l - r) / denom } else { 0.0 };
            out.push(x[i] + shift);
        }
    }
    out
}

pub fn double_slit_study(
    geometry: &SlitGeometry,
    units: &UnitsConfig,
    x_min: f64,
    h: f64,
    refine: usize,
) -> Result<DoubleSlitStudy> {
    let phi = double_slit_phi(geometry, units)?;
    let classical = classical_control(geometry, units)?;
    let t2 = geometry.slit_to_screen_time();
    let a = geometry.half_separation();
    let screen = geometry.screen();
    let intensity = screen
        .iter()
        .map(|&x| Ok(two_source_superposition(x, t2, a, units)?.intensity))
        .collect::<Result<Vec<f64>>>()?;

    let phi_sq: Vec<PatternSample> = phi
        .iter()
        .map(|s| PatternSample {
            value: s.value * s.value,
            ..*s
        })
        .collect();
    let phi_sq_binary = phi_sq.iter().filter(|s| s.in_cone).all(|s| s.value == 0 || s.value == 1);
    let gaps = gap_intervals(&phi_sq);
    let classical_gaps = gap_intervals(&classical).len();

    // Independent scan on the refined grid.
    let fine_count = (screen.len().saturating_sub(1)) * refine + 1;
    let fine_h = h / refine as f64;
    let fine: Vec<PatternSample> = (0..fine_count)
        .map(|k| {
            let x = x_min + k as f64 * fine_h;
            match brute_force_disagreement(x, geometry, units) {
                Some(d) => PatternSample {
                    x,
                    value: if d { 0 } else { 1 },
                    in_cone: true,
                    on_cone: false,
                },
                None => PatternSample {
                    x,
                    value: 0,
                    in_cone: false,
                    on_cone: false,
                },
            }
        })
        .collect();
    let mut brute_force_mismatches = 0;
    for (i, s) in phi_sq.iter().enumerate() {
        let f = &fine[i * refine];
        if f.x != s.x || f.in_cone != s.in_cone || (s.in_cone && f.value != s.value) {
            brute_force_mismatches += 1;
        }
    }
    let fine_gaps = gap_intervals(&fine);
    let mut max_boundary_offset = 0.0_f64;
    for g in &gaps {
        for (edge, pick) in [(g.first, true), (g.last, false)] {
            let nearest = fine_gaps
                .iter()
                .map(|f| (if pick { f.first } else { f.last } - edge).abs())
                .fold(f64::INFINITY, f64::min);
            max_boundary_offset = max_boundary_offset.max(nearest);
        }
    }

    // Nodes and maxima of the two-source intensity strictly inside the
    // region both slits reach.
    let reach = t2 - a;
    let (inner_x, inner_i): (Vec<f64>, Vec<f64>) = screen
        .iter()
        .zip(&intensity)
        .filter(|(x, _)| x.abs() < reach)
        .map(|(x, i)| (*x, *i))
        .unzip();
    let feynman_nodes = local_extrema(&inner_x, &inner_i, true);
    let feynman_maxima = local_extrema(&inner_x, &inner_i, false);
    let expected_node_spacing = two_source_node_spacing(t2, a, units)?;
    let node_spacing_error = if feynman_nodes.len() >= 2 {
        Some(
            feynman_nodes
                .windows(2)
                .map(|w| ((w[1] - w[0]) / expected_node_spacing - 1.0).abs())
                .fold(0.0, f64::max),
        )
    } else {
        None
    };

    let rows = phi
        .iter()
        .zip(&classical)
        .zip(&intensity)
        .map(|((p, c), &i)| DoubleSlitRow {
            x: p.x,
            in_cone: p.in_cone,
            phi: p.value,
            phi_sq: p.value * p.value,
            classical: c.value,
            feynman_intensity: i,
        })
        .collect();
    Ok(DoubleSlitStudy {
        rows,
        gaps,
        phi_sq_binary,
        classical_gaps,
        brute_force_mismatches,
        max_boundary_offset,
        fine_gaps,
        feynman_nodes,
        feynman_maxima,
        expected_node_spacing,
        node_spacing_error,
    })
}
