//! Events, piecewise-inertial ("hinged") worldlines and proper time in 1+1
//! dimensions with c = 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{finite, positive, Error, Result};

/// Velocities at or beyond this magnitude are refused by the command-line
/// front end; `1 - v²` loses most of its digits past this point.
pub const CLI_VELOCITY_LIMIT: f64 = 1.0 - 1e-12;

/// Natural units: c = 1, action scale 1, and a clock whose rest-frame period
/// (the Compton period) is configurable. The default period of 4 puts the
/// clock nodes on even integers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsConfig {
    compton_period: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { compton_period: 4.0 }
    }
}

impl UnitsConfig {
    pub fn new(compton_period: f64) -> Result<Self> {
        positive("compton_period", compton_period)?;
        Ok(Self { compton_period })
    }

    pub fn compton_period(&self) -> f64 {
        self.compton_period
    }

    /// Half a clock period; parity flips every half period of proper time.
    pub fn half_period(&self) -> f64 {
        0.5 * self.compton_period
    }

    /// Mass in inverse-time units. Equal to the clock's angular frequency,
    /// `2π/T` (π/2 at the default period).
    pub fn mass(&self) -> f64 {
        2.0 * PI / self.compton_period
    }

    /// `D = 1/(2m)`.
    pub fn diffusion_constant(&self) -> f64 {
        1.0 / (2.0 * self.mass())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub x: f64,
    pub t: f64,
}

impl Event {
    pub const ORIGIN: Event = Event { x: 0.0, t: 0.0 };

    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }
}

/// One inertial leg of a hinged worldline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    velocity: f64,
    duration: f64,
}

impl Segment {
    pub fn new(velocity: f64, duration: f64) -> Result<Self> {
        finite("velocity", velocity)?;
        if velocity.abs() >= 1.0 {
            return Err(Error::Superluminal(velocity));
        }
        positive("duration", duration)?;
        Ok(Self { velocity, duration })
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn displacement(&self) -> f64 {
        self.velocity * self.duration
    }
}

/// `√(1 − v²)`, written as `√((1 − v)(1 + v))` so that near-luminal
/// velocities keep their relative accuracy.
pub fn dilation_factor(velocity: f64) -> Result<f64> {
    finite("velocity", velocity)?;
    if velocity.abs() >= 1.0 {
        return Err(Error::Superluminal(velocity));
    }
    Ok(((1.0 - velocity) * (1.0 + velocity)).sqrt())
}

pub fn segment_proper_time(segment: &Segment) -> f64 {
    let v = segment.velocity;
    segment.duration * ((1.0 - v) * (1.0 + v)).sqrt()
}

/// A start event followed by constant-velocity legs. Velocity changes happen
/// instantaneously at the joins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HingedWorldline {
    origin: Event,
    segments: Vec<Segment>,
}

impl HingedWorldline {
    pub fn new(origin: Event, segments: Vec<Segment>) -> Result<Self> {
        finite("origin.x", origin.x)?;
        finite("origin.t", origin.t)?;
        if segments.is_empty() {
            return Err(Error::EmptyWorldline);
        }
        Ok(Self { origin, segments })
    }

    /// The straight inertial worldline between two timelike-separated events.
    pub fn straight(from: Event, to: Event) -> Result<Self> {
        let dt = to.t - from.t;
        positive("duration", dt)?;
        let segment = Segment::new((to.x - from.x) / dt, dt)?;
        Self::new(from, vec![segment])
    }

    pub fn origin(&self) -> Event {
        self.origin
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn coordinate_duration(&self) -> f64 {
        compensated_sum(self.segments.iter().map(Segment::duration))
    }

    pub fn proper_time(&self) -> f64 {
        compensated_sum(self.segments.iter().map(segment_proper_time))
    }

    pub fn endpoint(&self) -> Event {
        Event {
            x: self.origin.x + compensated_sum(self.segments.iter().map(Segment::displacement)),
            t: self.origin.t + self.coordinate_duration(),
        }
    }

    /// Appends `other`'s legs after this worldline's end. `other`'s origin is
    /// ignored; the result is continuous by construction.
    pub fn concat(&self, other: &HingedWorldline) -> HingedWorldline {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        HingedWorldline {
            origin: self.origin,
            segments,
        }
    }
}

pub fn worldline_proper_time(worldline: &HingedWorldline) -> f64 {
    worldline.proper_time()
}

pub fn endpoint(worldline: &HingedWorldline) -> Event {
    worldline.endpoint()
}

/// Whether `to` lies in the closed future light cone of `from`. The cone
/// surface itself counts as reachable; the apex does not.
pub fn reachable(from: Event, to: Event) -> bool {
    let dt = to.t - from.t;
    dt > 0.0 && (to.x - from.x).abs() <= dt
}

/// Proper time along the straight path between two events, zero on the
/// light cone.
pub fn interval_proper_time(from: Event, to: Event) -> Result<f64> {
    if !reachable(from, to) {
        return Err(Error::NotReachable {
            from_x: from.x,
            from_t: from.t,
            to_x: to.x,
            to_t: to.t,
        });
    }
    let dt = to.t - from.t;
    let dx = (to.x - from.x).abs();
    Ok(((dt - dx) * (dt + dx)).sqrt())
}

// Neumaier summation.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn seg(v: f64, dt: f64) -> Segment {
        Segment::new(v, dt).unwrap()
    }

    #[test]
    fn default_units() {
        let u = UnitsConfig::default();
        assert_eq!(u.compton_period(), 4.0);
        assert_relative_eq!(u.mass(), PI / 2.0);
        assert_eq!(u.diffusion_constant(), 1.0 / (2.0 * u.mass()));
        assert!(UnitsConfig::new(0.0).is_err());
        assert!(UnitsConfig::new(f64::NAN).is_err());
    }

    #[test]
    fn segment_proper_times() {
        assert_eq!(segment_proper_time(&seg(0.0, 7.0)), 7.0);
        assert_relative_eq!(segment_proper_time(&seg(0.6, 20.0)), 16.0, epsilon = 1e-12);
        // √0.0199, checked with 50-digit arithmetic: 0.14106735979665883...
        assert_relative_eq!(
            segment_proper_time(&seg(0.99, 1.0)),
            0.141_067_359_796_658_83,
            max_relative = 1e-15
        );
    }

    #[test]
    fn segment_rejects_bad_input() {
        assert_eq!(Segment::new(1.0, 1.0), Err(Error::Superluminal(1.0)));
        assert!(Segment::new(-1.2, 1.0).is_err());
        assert!(Segment::new(0.5, 0.0).is_err());
        assert!(Segment::new(0.5, -1.0).is_err());
        assert!(dilation_factor(1.0).is_err());
    }

    #[test]
    fn worldline_proper_times() {
        let w = HingedWorldline::new(Event::ORIGIN, vec![seg(0.0, 5.0), seg(0.0, 5.0)]).unwrap();
        assert_eq!(worldline_proper_time(&w), 10.0);
        let w = HingedWorldline::new(Event::ORIGIN, vec![seg(0.6, 10.0), seg(-0.6, 10.0)]).unwrap();
        assert_relative_eq!(worldline_proper_time(&w), 16.0, epsilon = 1e-12);
        let w = HingedWorldline::new(Event::ORIGIN, vec![seg(0.8, 5.0), seg(0.0, 3.0)]).unwrap();
        assert_relative_eq!(worldline_proper_time(&w), 6.0, epsilon = 1e-12);
        assert_eq!(
            HingedWorldline::new(Event::ORIGIN, vec![]),
            Err(Error::EmptyWorldline)
        );
    }

    #[test]
    fn endpoints() {
        let w = HingedWorldline::new(Event::ORIGIN, vec![seg(0.5, 4.0)]).unwrap();
        assert_eq!(endpoint(&w), Event::new(2.0, 4.0));
        let w = HingedWorldline::new(Event::new(1.0, 1.0), vec![seg(0.5, 2.0), seg(-0.5, 2.0)])
            .unwrap();
        assert_eq!(endpoint(&w), Event::new(1.0, 5.0));
        let w = HingedWorldline::new(Event::ORIGIN, vec![seg(0.0, 3.5)]).unwrap();
        assert_eq!(endpoint(&w), Event::new(0.0, 3.5));
    }

    #[test]
    fn light_cone() {
        assert!(reachable(Event::ORIGIN, Event::new(3.0, 5.0)));
        assert!(!reachable(Event::ORIGIN, Event::new(6.0, 5.0)));
        assert!(reachable(Event::ORIGIN, Event::new(5.0, 5.0)));
        assert!(reachable(Event::ORIGIN, Event::new(-5.0, 5.0)));
        assert!(!reachable(Event::ORIGIN, Event::ORIGIN));
        assert!(!reachable(Event::ORIGIN, Event::new(0.0, -1.0)));
        assert_eq!(interval_proper_time(Event::ORIGIN, Event::new(5.0, 5.0)), Ok(0.0));
        assert_eq!(interval_proper_time(Event::ORIGIN, Event::new(3.0, 5.0)), Ok(4.0));
        assert!(interval_proper_time(Event::ORIGIN, Event::new(6.0, 5.0)).is_err());
    }

    proptest! {
        #[test]
        fn dilation_is_even_and_decreasing(v in 0.0..0.999_f64, dv in 1e-6..1e-3_f64, dt in 0.1..100.0_f64) {
            let a = segment_proper_time(&seg(v, dt));
            prop_assert_eq!(a, segment_proper_time(&seg(-v, dt)));
            prop_assert!(a <= dt);
            let w = (v + dv).min(0.9999);
            if w > v {
                prop_assert!(segment_proper_time(&seg(w, dt)) < a);
            }
        }

        #[test]
        fn concatenation_is_additive(
            legs in prop::collection::vec((-0.99..0.99_f64, 0.01..50.0_f64), 1..6),
            more in prop::collection::vec((-0.99..0.99_f64, 0.01..50.0_f64), 1..6),
        ) {
            let a = HingedWorldline::new(Event::ORIGIN, legs.iter().map(|&(v, dt)| seg(v, dt)).collect()).unwrap();
            let b = HingedWorldline::new(a.endpoint(), more.iter().map(|&(v, dt)| seg(v, dt)).collect()).unwrap();
            let joined = a.concat(&b).proper_time();
            let parts = a.proper_time() + b.proper_time();
            prop_assert!((joined - parts).abs() <= f64::EPSILON * joined.abs());
        }

        #[test]
        fn straight_path_maximizes_proper_time(
            t in 0.5..50.0_f64,
            frac in -0.95..0.95_f64,
            hinge_t in 0.05..0.95_f64,
            hinge_x in -1.0..1.0_f64,
        ) {
            let x = frac * t;
            let th = hinge_t * t;
            let v1 = 0.999 * hinge_x;
            let v2 = (x - v1 * th) / (t - th);
            prop_assume!(v2.abs() < 1.0);
            let w = HingedWorldline::new(Event::ORIGIN, vec![seg(v1, th), seg(v2, t - th)]).unwrap();
            let straight = ((t - x) * (t + x)).sqrt();
            prop_assert!(w.proper_time() <= straight * (1.0 + 1e-12));
        }
    }

    #[test]
    fn straight_path_equality_case() {
        let (x, t) = (6.0, 10.0);
        let v = x / t;
        let w = HingedWorldline::new(Event::ORIGIN, vec![seg(v, 4.0), seg(v, 6.0)]).unwrap();
        assert_relative_eq!(w.proper_time(), 8.0, epsilon = 1e-12);
        let bent = HingedWorldline::new(Event::ORIGIN, vec![seg(0.3, 4.0), seg(0.8, 6.0)]).unwrap();
        let end = bent.endpoint();
        assert_relative_eq!(end.x, 6.0, epsilon = 1e-12);
        assert_relative_eq!(end.t, 10.0, epsilon = 1e-12);
        assert!(bent.proper_time() < 8.0);
    }
}
