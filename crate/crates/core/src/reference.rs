//! Analytic reference signals and the metrics used to compare sampled
//! signals against them.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::kinematics::UnitsConfig;
use crate::spectral::C64;

/// Free-particle kernel `e^{imx²/2t}/√(2πit/m)` on the principal branch.
pub fn feynman_free(x: f64, t: f64, units: &UnitsConfig) -> Result<C64> {
    positive("t", t)?;
    finite("x", x)?;
    let m = units.mass();
    Ok(C64::from_polar((m / (2.0 * PI * t)).sqrt(), m * x * x / (2.0 * t) - FRAC_PI_4))
}

/// Heat kernel `e^{−x²/4Dt}/√(4πDt)`.
pub fn diffusion_green(x: f64, t: f64, diffusion_constant: f64) -> Result<f64> {
    positive("t", t)?;
    positive("diffusion_constant", diffusion_constant)?;
    let four_dt = 4.0 * diffusion_constant * t;
    Ok((-x * x / four_dt).exp() / (PI * four_dt).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSource {
    pub amplitude: C64,
    pub intensity: f64,
}

/// `K(x − a, t) + K(x + a, t)` and its squared modulus.
pub fn two_source_superposition(x: f64, t: f64, a: f64, units: &UnitsConfig) -> Result<TwoSource> {
    finite("a", a)?;
    let amplitude = feynman_free(x - a, t, units)? + feynman_free(x + a, t, units)?;
    Ok(TwoSource {
        amplitude,
        intensity: amplitude.norm_sqr(),
    })
}

/// Distance between neighbouring nodes of the two-source intensity,
/// `πt/(ma)`.
pub fn two_source_node_spacing(t: f64, a: f64, units: &UnitsConfig) -> Result<f64> {
    positive("t", t)?;
    positive("a", a)?;
    Ok(PI * t / (units.mass() * a))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SignalMeta {
    pub label: String,
    pub t: f64,
    pub diffusion_constant: Option<f64>,
    pub mass: Option<f64>,
}

/// Values on a strictly increasing grid. Real signals carry zero imaginary
/// parts; sign and zero-crossing metrics look at the real part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    x: Vec<f64>,
    values: Vec<C64>,
    pub meta: SignalMeta,
}

impl SampledSignal {
    pub fn new(x: Vec<f64>, values: Vec<C64>, meta: SignalMeta) -> Result<Self> {
        if x.len() != values.len() {
            return Err(Error::SizeMismatch {
                expected: x.len(),
                found: values.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::GridMismatch("empty grid".into()));
        }
        if let Some(w) = x.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch(format!(
                "grid not strictly increasing at {} → {}",
                w[0], w[1]
            )));
        }
        Ok(Self { x, values, meta })
    }

    pub fn real(x: Vec<f64>, values: Vec<f64>, meta: SignalMeta) -> Result<Self> {
        Self::new(x, values.into_iter().map(|v| C64::new(v, 0.0)).collect(), meta)
    }

    /// Samples `f` on `x`.
    pub fn sample(
        x: Vec<f64>,
        meta: SignalMeta,
        f: impl Fn(f64) -> Result<C64>,
    ) -> Result<Self> {
        let values = x.iter().map(|&xi| f(xi)).collect::<Result<Vec<_>>>()?;
        Self::new(x, values, meta)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Zero crossings of the real part. Exact zeros are skipped over, and a
    /// crossing is placed by linear interpolation between the two nonzero
    /// samples that bracket it; for a ±1 signal that is the grid midpoint.
    pub fn zero_crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut last: Option<(f64, f64)> = None;
        for (&x, v) in self.x.iter().zip(&self.values) {
            let y = v.re;
            if y == 0.0 {
                continue;
            }
            if let Some((x0, y0)) = last {
                if (y0 < 0.0) != (y < 0.0) {
                    out.push(x0 + (x - x0) * y0 / (y0 - y));
                }
            }
            last = Some((x, y));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompareMode {
    /// Flip the sign of `b` when that improves sign agreement.
    pub align_sign: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub sign_agreement_fraction: f64,
    pub sign_flipped: bool,
    pub zero_crossings_a: Vec<f64>,
    pub zero_crossings_b: Vec<f64>,
    /// `None` when either signal has fewer than two crossings.
    pub crossing_spacing_error: Option<f64>,
    pub insufficient_crossings: bool,
    pub convergence_order: Option<f64>,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Trapezoid weights for a nonuniform grid.
fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    trapezoid_weights(x).iter().zip(y).map(|(w, v)| w * v).sum()
}

/// Relative mismatch of successive-crossing spacings. Each spacing of `a`
/// is paired with the spacing of `b` whose midpoint is closest.
fn spacing_error(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let spans = |c: &[f64]| -> Vec<(f64, f64)> {
        c.windows(2).map(|w| (0.5 * (w[0] + w[1]), w[1] - w[0])).collect()
    };
    let sb = spans(b);
    let worst = spans(a)
        .into_iter()
        .map(|(mid, da)| {
            let (_, db) = sb
                .iter()
                .copied()
                .min_by(|p, q| (p.0 - mid).abs().total_cmp(&(q.0 - mid).abs()))
                .expect("b has at least one spacing");
            (da - db).abs() / db
        })
        .fold(0.0, f64::max);
    Some(worst)
}

pub fn compare(a: &SampledSignal, b: &SampledSignal, mode: CompareMode) -> Result<ComparisonReport> {
    if a.x != b.x {
        return Err(Error::GridMismatch(format!(
            "signals '{}' and '{}' are on different grids",
            a.meta.label, b.meta.label
        )));
    }
    let w = trapezoid_weights(&a.x);
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut linf = 0.0_f64;
    let mut same = 0usize;
    let mut opposite = 0usize;
    for ((va, vb), wi) in a.values.iter().zip(&b.values).zip(&w) {
        let d = (va - vb).norm();
        l1 += wi * d;
        l2 += wi * d * d;
        linf = linf.max(d);
        let (sa, sb) = (sign(va.re), sign(vb.re));
        if sa == sb {
            same += 1;
        }
        if sa == -sb {
            opposite += 1;
        }
    }
    let n = a.len() as f64;
    let sign_flipped = mode.align_sign && opposite > same;
    let agreeing = if sign_flipped { opposite } else { same };
    let zero_crossings_a = a.zero_crossings();
    let zero_crossings_b = b.zero_crossings();
    let crossing_spacing_error = spacing_error(&zero_crossings_a, &zero_crossings_b);
    Ok(ComparisonReport {
        l1,
        l2: l2.sqrt(),
        linf,
        sign_agreement_fraction: agreeing as f64 / n,
        sign_flipped,
        insufficient_crossings: crossing_spacing_error.is_none(),
        zero_crossings_a,
        zero_crossings_b,
        crossing_spacing_error,
        convergence_order: None,
    })
}

/// Roots of `f` on `[lo, hi]`: sign changes are bracketed on `brackets`
/// uniform cells and refined by bisection until the bracket is below `tol`.
pub fn bisect_zeros(f: impl Fn(f64) -> f64, lo: f64, hi: f64, brackets: usize, tol: f64) -> Vec<f64> {
    let h = (hi - lo) / brackets as f64;
    let mut roots = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=brackets {
        let x1 = lo + i as f64 * h;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            let (mut a, mut b, mut fa) = (x0, x1, f0);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                let fm = f(mid);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (fm < 0.0) == (fa < 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}

/// Ordinary least-squares `(slope, intercept)` of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("a line fit needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Convergence order: slope of `log(error)` against `log(h)`.
pub fn fit_order(h: &[f64], errors: &[f64]) -> Result<f64> {
    if let Some(&bad) = h.iter().chain(errors).find(|v| !(**v > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "order fit needs positive step sizes and errors, got {bad}"
        )));
    }
    let lx: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    Ok(linear_fit(&lx, &ly)?.0)
}
