//! Binary clock signals carried by worldlines, the fixed-time plane pattern
//! they induce, and the parity filter applied to pairs of paths.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};
use crate::kinematics::{dilation_factor, interval_proper_time, reachable, Event, UnitsConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn value(self) -> i8 {
        match self {
            Parity::Plus => 1,
            Parity::Minus => -1,
        }
    }
}

impl Neg for Parity {
    type Output = Parity;

    fn neg(self) -> Parity {
        match self {
            Parity::Plus => Parity::Minus,
            Parity::Minus => Parity::Plus,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// Average of two parities: ±1 when they agree, 0 when they cancel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterValue {
    Minus,
    Zero,
    Plus,
}

impl FilterValue {
    pub fn value(self) -> i8 {
        match self {
            FilterValue::Minus => -1,
            FilterValue::Zero => 0,
            FilterValue::Plus => 1,
        }
    }
}

impl From<Parity> for FilterValue {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Plus => FilterValue::Plus,
            Parity::Minus => FilterValue::Minus,
        }
    }
}

/// One point of a sampled pattern. `value` holds a parity, a filter value or
/// its square depending on the producing function, and is always 0 when
/// `in_cone` is false. `on_cone` marks samples lying exactly on a light cone
/// (zero proper time on at least one leg).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSample {
    pub x: f64,
    pub value: i8,
    pub in_cone: bool,
    pub on_cone: bool,
}

impl PatternSample {
    fn outside(x: f64, on_cone: bool) -> Self {
        Self {
            x,
            value: 0,
            in_cone: false,
            on_cone,
        }
    }
}

/// Parity of a clock that has aged `proper_time`: `(-1)^floor(τ/(T/2))`.
///
/// Half-open intervals `[kT/2, (k+1)T/2)` decide the nodes, so the signal is
/// right-continuous and agrees with `sign(sin(2πτ/T))` away from them.
pub fn parity_of_proper_time(proper_time: f64, units: &UnitsConfig) -> Result<Parity> {
    finite("proper_time", proper_time)?;
    if proper_time < 0.0 {
        return Err(Error::NegativeProperTime(proper_time));
    }
    let half_periods = (proper_time / units.half_period()).floor();
    Ok(if half_periods.rem_euclid(2.0) == 0.0 {
        Parity::Plus
    } else {
        Parity::Minus
    })
}

pub fn rest_clock(t: f64, units: &UnitsConfig) -> Result<Parity> {
    parity_of_proper_time(t, units)
}

/// Parity at coordinate time `t` of a clock moving with velocity `v`.
pub fn boosted_clock(t: f64, velocity: f64, units: &UnitsConfig) -> Result<Parity> {
    let factor = dilation_factor(velocity)?;
    finite("t", t)?;
    if t < 0.0 {
        return Err(Error::NegativeProperTime(t));
    }
    parity_of_proper_time(t * factor, units)
}

/// Parity at `(x, t)` of the clock boosted from the origin to reach it,
/// for every `x` in the grid. Samples with `|x| >= t` are out of the cone.
pub fn plane_pattern(t: f64, x_grid: &[f64], units: &UnitsConfig) -> Result<Vec<PatternSample>> {
    positive("t", t)?;
    x_grid
        .iter()
        .map(|&x| {
            finite("x", x)?;
            let ax = x.abs();
            if ax >= t {
                return Ok(PatternSample::outside(x, ax == t));
            }
            let tau = ((t - ax) * (t + ax)).sqrt();
            Ok(PatternSample {
                x,
                value: parity_of_proper_time(tau, units)?.value(),
                in_cone: true,
                on_cone: false,
            })
        })
        .collect()
}

/// What the plane pattern would look like without time dilation: a single
/// parity at fixed `t`, whatever `x` is.
pub fn galilean_pattern(
    t: f64,
    x_grid: &[f64],
    units: &UnitsConfig,
) -> Result<Vec<PatternSample>> {
    positive("t", t)?;
    let p = rest_clock(t, units)?.value();
    Ok(x_grid
        .iter()
        .map(|&x| PatternSample {
            x,
            value: p,
            in_cone: true,
            on_cone: false,
        })
        .collect())
}

/// Positive positions where the plane pattern at time `t` changes sign:
/// `√(t² − (kT/2)²)` for every `k ≥ 1` with `kT/2 < t`. The mirror images at
/// `-x` are crossings too.
pub fn plane_pattern_crossings(t: f64, units: &UnitsConfig) -> Vec<f64> {
    let half = units.half_period();
    let mut out = Vec::new();
    let mut k = 1.0;
    while k * half < t {
        let tau = k * half;
        out.push(((t - tau) * (t + tau)).sqrt());
        k += 1.0;
    }
    out.reverse();
    out
}

pub fn lorentz_filter(a: Parity, b: Parity) -> FilterValue {
    if a == b {
        a.into()
    } else {
        FilterValue::Zero
    }
}

/// Source at the origin, two slits at `x = ±a` reached at time `t₁`, and a
/// screen `t₂` later.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlitGeometry {
    half_separation: f64,
    source_to_slit_time: f64,
    slit_to_screen_time: f64,
    screen: Vec<f64>,
}

impl SlitGeometry {
    pub fn new(
        half_separation: f64,
        source_to_slit_time: f64,
        slit_to_screen_time: f64,
        screen: Vec<f64>,
    ) -> Result<Self> {
        finite("half_separation", half_separation)?;
        if half_separation < 0.0 {
            return Err(Error::Geometry(format!(
                "half separation must be non-negative, got {half_separation}"
            )));
        }
        finite("source_to_slit_time", source_to_slit_time)?;
        if source_to_slit_time <= half_separation {
            return Err(Error::Geometry(format!(
                "source cannot reach the slits at ±{half_separation} within {source_to_slit_time}"
            )));
        }
        positive("slit_to_screen_time", slit_to_screen_time)?;
        for &x in &screen {
            finite("screen x", x)?;
        }
        Ok(Self {
            half_separation,
            source_to_slit_time,
            slit_to_screen_time,
            screen,
        })
    }

    pub fn half_separation(&self) -> f64 {
        self.half_separation
    }

    pub fn source_to_slit_time(&self) -> f64 {
        self.source_to_slit_time
    }

    pub fn slit_to_screen_time(&self) -> f64 {
        self.slit_to_screen_time
    }

    pub fn screen(&self) -> &[f64] {
        &self.screen
    }

    /// The two slit events, left then right.
    pub fn slits(&self) -> [Event; 2] {
        let t = self.source_to_slit_time;
        [
            Event::new(-self.half_separation, t),
            Event::new(self.half_separation, t),
        ]
    }

    pub fn screen_time(&self) -> f64 {
        self.source_to_slit_time + self.slit_to_screen_time
    }
}

/// Clock parities at screen position `x` for the paths through the left and
/// right slit, or `None` if `x` is not reachable from both. The flag reports
/// whether either leg lies on a light cone.
pub fn slit_parities(
    geometry: &SlitGeometry,
    x: f64,
    units: &UnitsConfig,
) -> Result<Option<([Parity; 2], bool)>> {
    let screen = Event::new(x, geometry.screen_time());
    let [left, right] = geometry.slits();
    if !(reachable(left, screen) && reachable(right, screen)) {
        return Ok(None);
    }
    let mut parities = [Parity::Plus; 2];
    let mut on_cone = false;
    for (slot, slit) in parities.iter_mut().zip([left, right]) {
        let first = interval_proper_time(Event::ORIGIN, slit)?;
        let second = interval_proper_time(slit, screen)?;
        on_cone |= second == 0.0;
        *slot = parity_of_proper_time(first + second, units)?;
    }
    Ok(Some((parities, on_cone)))
}

/// Filter value φ(x) on the screen for the two-slit hinged paths.
pub fn double_slit_phi(geometry: &SlitGeometry, units: &UnitsConfig) -> Result<Vec<PatternSample>> {
    geometry
        .screen
        .iter()
        .map(|&x| {
            Ok(match slit_parities(geometry, x, units)? {
                Some(([a, b], on_cone)) => PatternSample {
                    x,
                    value: lorentz_filter(a, b).value(),
                    in_cone: true,
                    on_cone,
                },
                None => PatternSample::outside(x, false),
            })
        })
        .collect()
}

/// φ²(x): 1 where the two paths are parity-equivalent, 0 in the gaps.
pub fn double_slit_intensity(
    geometry: &SlitGeometry,
    units: &UnitsConfig,
) -> Result<Vec<PatternSample>> {
    Ok(double_slit_phi(geometry, units)?
        .into_iter()
        .map(|s| PatternSample {
            value: s.value * s.value,
            ..s
        })
        .collect())
}

/// The classical alternative: average the squared signals instead of the
/// signals. Constant 1 wherever both slits reach the screen.
pub fn classical_control(
    geometry: &SlitGeometry,
    units: &UnitsConfig,
) -> Result<Vec<PatternSample>> {
    geometry
        .screen
        .iter()
        .map(|&x| {
            Ok(match slit_parities(geometry, x, units)? {
                Some(([a, b], on_cone)) => {
                    let squares = i16::from(a.value()).pow(2) + i16::from(b.value()).pow(2);
                    PatternSample {
                        x,
                        value: (squares / 2) as i8,
                        in_cone: true,
                        on_cone,
                    }
                }
                None => PatternSample::outside(x, false),
            })
        })
        .collect()
}

/// A maximal run of in-cone samples whose value is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapInterval {
    /// First and last sample position inside the gap.
    pub first: f64,
    pub last: f64,
    pub samples: usize,
}

pub fn gap_intervals(samples: &[PatternSample]) -> Vec<GapInterval> {
    let mut gaps = Vec::new();
    let mut open: Option<GapInterval> = None;
    for s in samples {
        if s.in_cone && s.value == 0 {
            match open.as_mut() {
                Some(g) => {
                    g.last = s.x;
                    g.samples += 1;
                }
                None => {
                    open = Some(GapInterval {
                        first: s.x,
                        last: s.x,
                        samples: 1,
                    })
                }
            }
        } else if let Some(g) = open.take() {
            gaps.push(g);
        }
    }
    gaps.extend(open);
    gaps
}
