//! Signed-path Monte Carlo for the four-state walk.
//!
//! Each walker draws its coin flips from a ChaCha8 stream keyed by
//! `(seed, path index)`, and all accumulation is in integer counts, so the
//! estimate does not depend on how paths are split across threads.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LatticeParams;
use crate::error::{Error, Result};

const PATHS_PER_CHUNK: u64 = 4096;

/// Monte Carlo estimates of `(z₁, z₂)` and `(φ₁, φ₂)` per site, with their
/// standard errors. `φ` is already scaled by `α^steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub z: Vec<[f64; 2]>,
    pub phi: Vec<[f64; 2]>,
    pub z_se: Vec<[f64; 2]>,
    pub phi_se: Vec<[f64; 2]>,
    /// Final-state counts per site, states 1..4.
    pub counts: Vec<[u64; 4]>,
    pub n_paths: u64,
    pub seed: u64,
    pub steps: usize,
}

pub fn monte_carlo_estimate(
    params: &LatticeParams,
    n_steps: usize,
    n_paths: u64,
    seed: u64,
    initial_state: usize,
    initial_site: i64,
) -> Result<McEstimate> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
    }
    if !(1..=4).contains(&initial_state) {
        return Err(Error::InvalidParameter(format!(
            "walker state must be 1..=4, got {initial_state}"
        )));
    }
    let sites = params.sites();
    let start = params.index_of(initial_site);
    let chunks = n_paths.div_ceil(PATHS_PER_CHUNK);

    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut counts = vec![[0u64; 4]; sites];
            let first = chunk * PATHS_PER_CHUNK;
            let last = (first + PATHS_PER_CHUNK).min(n_paths);
            for path in first..last {
                let (site, state) = walk(seed, path, start, initial_state - 1, n_steps, sites);
                counts[site][state] += 1;
            }
            counts
        })
        .reduce(
            || vec![[0u64; 4]; sites],
            |mut acc, part| {
                for (a, b) in acc.iter_mut().zip(part) {
                    for k in 0..4 {
                        a[k] += b[k];
                    }
                }
                acc
            },
        );

    let n = n_paths as f64;
    let scale = params.alpha().powi(n_steps as i32);
    let bessel = if n_paths > 1 { n / (n - 1.0) } else { 1.0 };
    let mut z = Vec::with_capacity(sites);
    let mut phi = Vec::with_capacity(sites);
    let mut z_se = Vec::with_capacity(sites);
    let mut phi_se = Vec::with_capacity(sites);
    for c in &counts {
        let q = c.map(|k| k as f64 / n);
        let mut zs = [0.0; 2];
        let mut ps = [0.0; 2];
        let mut zse = [0.0; 2];
        let mut pse = [0.0; 2];
        // Direction k = 0 collects states 1 and 3, k = 1 states 2 and 4.
        for k in 0..2 {
            let plus = q[k];
            let minus = q[k + 2];
            let occupied = plus + minus;
            // Each walker deposits ½ into its z bucket and ±½ into its φ bucket.
            zs[k] = 0.5 * occupied;
            ps[k] = 0.5 * (plus - minus);
            let z_var = 0.25 * occupied - zs[k] * zs[k];
            let phi_var = 0.25 * occupied - ps[k] * ps[k];
            zse[k] = (z_var.max(0.0) * bessel / n).sqrt();
            pse[k] = scale.abs() * (phi_var.max(0.0) * bessel / n).sqrt();
            ps[k] *= scale;
        }
        z.push(zs);
        phi.push(ps);
        z_se.push(zse);
        phi_se.push(pse);
    }

    Ok(McEstimate {
        z,
        phi,
        z_se,
        phi_se,
        counts,
        n_paths,
        seed,
        steps: n_steps,
    })
}

/// Final `(site index, state index)` of one walker.
fn walk(
    seed: u64,
    path: u64,
    start: usize,
    initial_state: usize,
    n_steps: usize,
    sites: usize,
) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    let mut offset: i64 = 0;
    let mut state = initial_state;
    let mut bits = 0u64;
    for step in 0..n_steps {
        if step % 64 == 0 {
            bits = rng.next_u64();
        }
        // States 1 and 3 (indices 0, 2) move right.
        offset += if state.is_multiple_of(2) { 1 } else { -1 };
        if bits & 1 == 1 {
            state = (state + 1) % 4;
        }
        bits >>= 1;
    }
    let site = (start as i64 + offset).rem_euclid(sites as i64) as usize;
    (site, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{decompose, evolve, FourStateField, Stepping};

    fn params(alpha: f64) -> LatticeParams {
        LatticeParams::new(0.1, 0.01, alpha, 201).unwrap()
    }

    #[test]
    fn zero_steps_is_the_initial_delta() {
        let p = params(1.0);
        let est = monte_carlo_estimate(&p, 0, 10, 1, 3, 5).unwrap();
        let exact = decompose(&FourStateField::unit_state(&p, 3, 5).unwrap());
        assert_eq!(est.z, exact.z);
        assert_eq!(est.phi, exact.phi);
        assert!(est.z_se.iter().flatten().all(|&s| s == 0.0));
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = params(1.0);
        assert!(monte_carlo_estimate(&p, 4, 0, 1, 1, 0).is_err());
        assert!(monte_carlo_estimate(&p, 4, 10, 1, 0, 0).is_err());
        assert!(monte_carlo_estimate(&p, 4, 10, 1, 5, 0).is_err());
    }

    #[test]
    fn one_step_matches_difference_equations() {
        let p = params(1.0);
        let est = monte_carlo_estimate(&p, 1, 200_000, 42, 1, 0).unwrap();
        let exact = decompose(&evolve(&FourStateField::unit_state(&p, 1, 0).unwrap(), &p, 1, Stepping::Raw).unwrap());
        let i = p.index_of(1);
        assert_eq!(exact.z[i], [0.25, 0.25]);
        for k in 0..2 {
            assert!((est.z[i][k] - exact.z[i][k]).abs() <= 3.0 * est.z_se[i][k]);
            assert!((est.phi[i][k] - exact.phi[i][k]).abs() <= 3.0 * est.phi_se[i][k]);
        }
        // Nothing lands anywhere else after one step.
        let elsewhere: u64 = est
            .counts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.iter().sum::<u64>())
            .sum();
        assert_eq!(elsewhere, 0);
    }

    #[test]
    fn same_seed_same_answer_any_pool_size() {
        let p = params(std::f64::consts::SQRT_2);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo_estimate(&p, 32, 20_000, 9, 2, 0).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let c = monte_carlo_estimate(&p, 32, 20_000, 10, 2, 0).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn alpha_scales_phi_only() {
        let a = monte_carlo_estimate(&params(1.0), 16, 5_000, 3, 1, 0).unwrap();
        let b = monte_carlo_estimate(&params(2.0), 16, 5_000, 3, 1, 0).unwrap();
        assert_eq!(a.z, b.z);
        for (x, y) in a.phi.iter().zip(&b.phi) {
            assert_eq!(x[0] * 65536.0, y[0]);
            assert_eq!(x[1] * 65536.0, y[1]);
        }
    }
}
