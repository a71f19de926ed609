//! The scenarios. Each one resolves and validates its parameters into a
//! plan first; running the plan produces the data files and checks without
//! touching the disk. Default values are illustrative.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use cparticle::clock::{plane_pattern, plane_pattern_crossings, SlitGeometry};
use cparticle::lattice::{compose, DecomposedField, FourStateField, LatticeParams, Stepping};
use cparticle::reference::linear_fit;
use cparticle::studies::{
    default_deltas, diffusion_study, double_slit_study, expansion_order, mc_comparison,
    propagator_compare, schrodinger_study, screen_grid, spectral_identities, stroboscopic_levels,
};
use cparticle::UnitsConfig;

use crate::config::Resolver;
use crate::output::{DataFile, Format, Outcome};
use crate::{CliError, CommonArgs};

const MAX_SAMPLES: usize = 50_000_000;

pub struct Context {
    pub format: Format,
    pub seed: u64,
}

pub enum Plan {
    ClockPattern(ClockPlan),
    Propagator(PropagatorPlan),
    DoubleSlit(DoubleSlitPlan),
    Lattice(LatticePlan),
    Continuum(ContinuumPlan),
    Spectral(SpectralPlan),
}

impl Plan {
    pub fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        match self {
            Plan::ClockPattern(p) => p.run(ctx),
            Plan::Propagator(p) => p.run(ctx),
            Plan::DoubleSlit(p) => p.run(ctx),
            Plan::Lattice(p) => p.run(ctx),
            Plan::Continuum(p) => p.run(ctx),
            Plan::Spectral(p) => p.run(ctx),
        }
    }
}

fn require(ok: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(msg.into()))
    }
}

/// Symmetric grid `i·h` for `|i·h| ≤ half_width`.
fn symmetric_grid(half_width: f64, h: f64) -> Result<Vec<f64>, CliError> {
    require(h > 0.0 && h.is_finite(), format!("grid step must be positive, got {h}"))?;
    require(half_width >= 0.0 && half_width.is_finite(), format!("grid half-width must be non-negative, got {half_width}"))?;
    let n = (half_width / h + 1e-9).floor();
    require(2.0 * n + 1.0 <= MAX_SAMPLES as f64, "grid too large")?;
    let n = n as i64;
    Ok((-n..=n).map(|i| i as f64 * h).collect())
}

fn sci(v: f64) -> String {
    format!("{v:.3e}")
}

// ------------------------------------------------------------ clock-pattern

#[derive(Debug, Clone, Default, Args)]
pub struct ClockPatternArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Compton period T.
    #[arg(long)]
    pub period: Option<f64>,
    /// Time of the fixed-t slice.
    #[arg(long)]
    pub t: Option<f64>,
    /// Half-width of the x range.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_step: Option<f64>,
    #[arg(long)]
    pub raster_t_step: Option<f64>,
    #[arg(long)]
    pub raster_x_step: Option<f64>,
}

pub struct ClockPlan {
    units: UnitsConfig,
    t: f64,
    slice_x: Vec<f64>,
    raster_t: Vec<f64>,
    raster_x: Vec<f64>,
    x_step: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ClockRow {
    x: f64,
    t: f64,
    parity: i8,
    in_cone: bool,
}

impl ClockPatternArgs {
    pub fn plan(&self, r: &mut Resolver) -> Result<Plan, CliError> {
        let units = UnitsConfig::new(r.take("period", self.period, 4.0)?)?;
        let t = r.take("t", self.t, 20.0)?;
        require(t > 0.0 && t.is_finite(), format!("t must be positive, got {t}"))?;
        let x_max = r.take("x-max", self.x_max, 22.0)?;
        let x_step = r.take("x-step", self.x_step, 0.01)?;
        let rt = r.take("raster-t-step", self.raster_t_step, 0.25)?;
        let rx = r.take("raster-x-step", self.raster_x_step, 0.25)?;
        require(rt > 0.0 && rt.is_finite(), format!("raster-t-step must be positive, got {rt}"))?;
        let rows = (t / rt + 1e-9).floor() as usize;
        require(rows >= 1, "raster needs at least one time row")?;
        let raster_x = symmetric_grid(x_max, rx)?;
        require(rows.saturating_mul(raster_x.len()) <= MAX_SAMPLES, "raster too large")?;
        Ok(Plan::ClockPattern(ClockPlan {
            units,
            t,
            slice_x: symmetric_grid(x_max, x_step)?,
            raster_t: (1..=rows).map(|j| j as f64 * rt).collect(),
            raster_x,
            x_step,
        }))
    }
}

impl ClockPlan {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let to_rows = |t: f64, x: &[f64]| -> Result<Vec<ClockRow>, CliError> {
            Ok(plane_pattern(t, x, &self.units)?
                .into_iter()
                .map(|s| ClockRow {
                    x: s.x,
                    t,
                    parity: s.value,
                    in_cone: s.in_cone,
                })
                .collect())
        };
        let slice = to_rows(self.t, &self.slice_x)?;
        let mut raster = Vec::with_capacity(self.raster_t.len() * self.raster_x.len());
        for &t in &self.raster_t {
            raster.extend(to_rows(t, &self.raster_x)?);
        }

        let mut out = Outcome::default();
        let n = slice.len();
        let symmetric = (0..n).all(|i| slice[i].parity == slice[n - 1 - i].parity);
        out.check("slice_symmetric", symmetric, "parity(x) = parity(-x)");
        let outside_zero = slice.iter().chain(&raster).filter(|r| !r.in_cone).all(|r| r.parity == 0);
        out.check("out_of_cone_zero", outside_zero, "every |x| >= t sample is 0");

        let mut observed = Vec::new();
        for w in slice.windows(2) {
            if w[0].in_cone && w[1].in_cone && w[0].parity != w[1].parity {
                observed.push(0.5 * (w[0].x + w[1].x));
            }
        }
        let mut predicted: Vec<f64> = plane_pattern_crossings(self.t, &self.units)
            .into_iter()
            .filter(|c| c + self.x_step < self.t && *c <= self.slice_x[n - 1])
            .flat_map(|c| [-c, c])
            .collect();
        predicted.sort_by(f64::total_cmp);
        // A proper time of exactly k·T/2 at x = 0 is a tangential node: the
        // sampled slice shows it as a one-sample spike.
        let k = self.t / self.units.half_period();
        let tangential = k == k.round();
        let h = self.x_step;
        let explained = observed
            .iter()
            .all(|o| predicted.iter().any(|p| (o - p).abs() <= h) || (tangential && o.abs() <= h));
        let found = predicted.iter().all(|p| observed.iter().any(|o| (o - p).abs() <= h));
        out.check(
            "crossings_match_closed_form",
            explained && found,
            format!("{} predicted, {} observed sign changes", predicted.len(), observed.len()),
        );
        out.metric("t", self.t);
        out.metric("compton_period", self.units.compton_period());
        out.metric("predicted_crossings", &predicted);
        out.metric("observed_crossings", &observed);
        out.metric("tangential_node_at_origin", tangential);
        out.files.push(DataFile::encode("slice", &slice, ctx.format)?);
        out.files.push(DataFile::encode("raster", &raster, ctx.format)?);
        Ok(out)
    }
}

// ------------------------------------------------------- propagator-compare

#[derive(Debug, Clone, Default, Args)]
pub struct PropagatorArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub period: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Comparison window |x| <= window.
    #[arg(long)]
    pub window: Option<f64>,
    #[arg(long)]
    pub x_step: Option<f64>,
}

pub struct PropagatorPlan {
    units: UnitsConfig,
    t: f64,
    window: f64,
    x_step: f64,
}

impl PropagatorArgs {
    pub fn plan(&self, r: &mut Resolver) -> Result<Plan, CliError> {
        let units = UnitsConfig::new(r.take("period", self.period, 4.0)?)?;
        let t = r.take("t", self.t, 20.0)?;
        let window = r.take("window", self.window, 4.0)?;
        let x_step = r.take("x-step", self.x_step, 0.01)?;
        require(t > 0.0 && t.is_finite(), format!("t must be positive, got {t}"))?;
        require(window > 0.0 && window < t, format!("window must lie in (0, t), got {window}"))?;
        symmetric_grid(window, x_step)?;
        Ok(Plan::Propagator(PropagatorPlan {
            units,
            t,
            window,
            x_step,
        }))
    }
}

impl PropagatorPlan {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let s = propagator_compare(self.t, self.window, self.x_step, &self.units)?;
        let mut out = Outcome::default();
        let spacing_ok = matches!(s.report.crossing_spacing_error, Some(e) if e <= 0.10);
        let detail = match s.report.crossing_spacing_error {
            Some(e) => format!("max relative spacing mismatch {e:.4}"),
            None => format!(
                "insufficient crossings: {} clock, {} propagator in |x| <= {}",
                s.report.zero_crossings_a.len(),
                s.report.zero_crossings_b.len(),
                self.window
            ),
        };
        out.check("crossing_spacing_within_10pct", spacing_ok, detail);
        out.check(
            "sign_agreement_at_least_95pct",
            s.report.sign_agreement_fraction >= 0.95,
            format!("aligned agreement {:.4}", s.report.sign_agreement_fraction),
        );
        out.metric("t", self.t);
        out.metric("window", self.window);
        out.metric("x_step", self.x_step);
        out.metric("l1", s.report.l1);
        out.metric("l2", s.report.l2);
        out.metric("linf", s.report.linf);
        out.metric("sign_agreement_fraction", s.report.sign_agreement_fraction);
        out.metric("sign_flipped", s.report.sign_flipped);
        out.metric("zero_crossings_clock", &s.report.zero_crossings_a);
        out.metric("zero_crossings_propagator", &s.report.zero_crossings_b);
        out.metric("crossing_spacing_error", s.report.crossing_spacing_error);
        out.metric("insufficient_crossings", s.report.insufficient_crossings);
        out.metric("analytic_clock_crossings", &s.analytic_clock_crossings);
        out.metric("analytic_propagator_crossings", &s.analytic_feynman_crossings);
        out.files.push(DataFile::encode("propagator", &s.rows, ctx.format)?);
        Ok(out)
    }
}

// -------------------------------------------------------------- double-slit

#[derive(Debug, Clone, Default, Args)]
pub struct DoubleSlitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub period: Option<f64>,
    /// Half separation of the slits.
    #[arg(long)]
    pub a: Option<f64>,
    /// Source-to-slit time.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Slit-to-screen time.
    #[arg(long)]
    pub t2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub x_step: Option<f64>,
    /// Refinement factor of the brute-force parity scan.
    #[arg(long)]
    pub refine: Option<usize>,
}

pub struct DoubleSlitPlan {
    units: UnitsConfig,
    geometry: SlitGeometry,
    x_min: f64,
    x_step: f64,
    refine: usize,
}

impl DoubleSlitArgs {
    pub fn plan(&self, r: &mut Resolver) -> Result<Plan, CliError> {
        let units = UnitsConfig::new(r.take("period", self.period, 4.0)?)?;
        let a = r.take("a", self.a, 4.0)?;
        let t1 = r.take("t1", self.t1, 8.0)?;
        let t2 = r.take("t2", self.t2, 40.0)?;
        let x_min = r.take("x-min", self.x_min, -40.0)?;
        let x_max = r.take("x-max", self.x_max, 40.0)?;
        let x_step = r.take("x-step", self.x_step, 0.01)?;
        let refine = r.take("refine", self.refine, 10usize)?;
        require(x_step > 0.0 && x_step.is_finite(), format!("x-step must be positive, got {x_step}"))?;
        require(x_max > x_min, "x-max must exceed x-min")?;
        require(refine >= 1, "refine must be at least 1")?;
        let samples = ((x_max - x_min) / x_step + 1e-9).floor() as usize + 1;
        require(samples.saturating_mul(refine) <= MAX_SAMPLES, "screen grid too large")?;
        let geometry = SlitGeometry::new(a, t1, t2, screen_grid(x_min, x_step, samples, refine))?;
        Ok(Plan::DoubleSlit(DoubleSlitPlan {
            units,
            geometry,
            x_min,
            x_step,
            refine,
        }))
    }
}

impl DoubleSlitPlan {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let s = double_slit_study(&self.geometry, &self.units, self.x_min, self.x_step, self.refine)?;
        let mut out = Outcome::default();
        out.check("phi_squared_binary", s.phi_sq_binary, "phi^2 in {0, 1} on the valid mask");
        out.check(
            "gaps_match_brute_force",
            s.brute_force_mismatches == 0 && s.max_boundary_offset <= self.x_step,
            format!(
                "{} mismatched samples, boundary offset {:.3e} at {}x resolution",
                s.brute_force_mismatches, s.max_boundary_offset, self.refine
            ),
        );
        out.check(
            "classical_control_gap_free",
            s.classical_gaps == 0,
            format!("{} gaps in the squared-signal control", s.classical_gaps),
        );
        out.check(
            "two_source_node_spacing_1pct",
            matches!(s.node_spacing_error, Some(e) if e <= 0.01),
            format!(
                "{} nodes, expected spacing {}, max relative error {:?}",
                s.feynman_nodes.len(),
                s.expected_node_spacing,
                s.node_spacing_error
            ),
        );
        out.check(
            "two_source_three_maxima",
            s.feynman_maxima.len() == 3,
            format!("{} maxima where both slits reach the screen", s.feynman_maxima.len()),
        );
        out.metric("gap_count", s.gaps.len());
        out.metric("brute_force_mismatches", s.brute_force_mismatches);
        out.metric("max_boundary_offset", s.max_boundary_offset);
        out.metric("classical_gap_count", s.classical_gaps);
        out.metric("feynman_nodes", &s.feynman_nodes);
        out.metric("feynman_maxima", &s.feynman_maxima);
        out.metric("expected_node_spacing", s.expected_node_spacing);
        out.metric("node_spacing_error", s.node_spacing_error);
        out.files.push(DataFile::encode("screen", &s.rows, ctx.format)?);
        out.files.push(DataFile::encode("gaps", &s.gaps, ctx.format)?);
        Ok(out)
    }
}

// ------------------------------------------------------------ lattice-evolve

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    /// A unit density in one of the four states at the origin.
    State,
    /// `(φ₁, φ₂) = (0, √2)` at the origin.
    PaperDelta,
    /// `(z₁, z₂) = (½, ½)` at the origin.
    DiffusionDelta,
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::State => "state",
            Init::PaperDelta => "paper-delta",
            Init::DiffusionDelta => "diffusion-delta",
        })
    }
}

impl FromStr for Init {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Init as ValueEnum>::from_str(s, false)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub diffusion_constant: Option<f64>,
    /// Parity-block normalization (1: probabilistic, √2: unitary).
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Lattice sites (0: just enough for the light cone plus a margin).
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Restrict step counts to multiples of 8.
    #[arg(long, action = clap::ArgAction::Set)]
    pub stroboscopic: Option<bool>,
    #[arg(long, value_enum)]
    pub init: Option<Init>,
    /// Walker state 1..=4 for `init = state`.
    #[arg(long)]
    pub initial_state: Option<usize>,
    /// Monte Carlo paths for the overlay (0: none).
    #[arg(long)]
    pub mc_paths: Option<u64>,
}

pub struct LatticePlan {
    params: LatticeParams,
    steps: usize,
    snapshot_every: usize,
    init: Init,
    initial_state: usize,
    mc_paths: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct MomentRow {
    step: usize,
    t: f64,
    mass: f64,
    mean: f64,
    variance: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct McRow {
    m: i64,
    x: f64,
    z1_mc: f64,
    z2_mc: f64,
    phi1_mc: f64,
    phi2_mc: f64,
    phi1_se: f64,
    phi2_se: f64,
    phi1_exact: f64,
    phi2_exact: f64,
}

impl LatticeArgs {
    pub fn plan(&self, r: &mut Resolver) -> Result<Plan, CliError> {
        let delta = r.take("delta", self.delta, 0.1)?;
        let d = r.take("diffusion-constant", self.diffusion_constant, 0.5)?;
        let alpha = r.take("alpha", self.alpha, SQRT_2)?;
        let steps = r.take("steps", self.steps, 64usize)?;
        let sites = r.take("sites", self.sites, 0usize)?;
        let snapshot_every = r.take("snapshot-every", self.snapshot_every, 8usize)?;
        let stroboscopic = r.take("stroboscopic", self.stroboscopic, true)?;
        let init = r.take("init", self.init, Init::State)?;
        let initial_state = r.take("initial-state", self.initial_state, 1usize)?;
        let mc_paths = r.take("mc-paths", self.mc_paths, 100_000u64)?;
        require(snapshot_every >= 1, "snapshot-every must be at least 1")?;
        require((1..=4).contains(&initial_state), format!("initial-state must be 1..=4, got {initial_state}"))?;
        if stroboscopic {
            for (name, v) in [("steps", steps), ("snapshot-every", snapshot_every)] {
                require(v % 8 == 0, format!("{name} = {v} is not a multiple of 8 (stroboscopic mode)"))?;
            }
        }
        let sites = if sites == 0 { 2 * steps + 41 } else { sites };
        let params = LatticeParams::diffusive(delta, d, alpha, sites)?;
        params.check_no_wrap(steps, 1)?;
        require(mc_paths == 0 || init == Init::State, "the Monte Carlo overlay needs init = state")?;
        Ok(Plan::Lattice(LatticePlan {
            params,
            steps,
            snapshot_every,
            init,
            initial_state,
            mc_paths,
        }))
    }
}

impl LatticePlan {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let p = &self.params;
        let mut field = match self.init {
            Init::State => cparticle::lattice::decompose(&FourStateField::unit_state(p, self.initial_state, 0)?),
            Init::PaperDelta => DecomposedField::paper_delta(p, 0),
            Init::DiffusionDelta => DecomposedField::diffusion_delta(p, 0),
        };
        let mut decomposed_rows = Vec::new();
        let mut four_state_rows = Vec::new();
        let mut moments = Vec::with_capacity(self.steps + 1);
        let mut snapshot = |f: &DecomposedField| {
            decomposed_rows.extend(f.rows(p));
            four_state_rows.extend(compose(f).rows(p));
        };
        let record = |f: &DecomposedField, moments: &mut Vec<MomentRow>| {
            let m = f.z_moments(p);
            moments.push(MomentRow {
                step: f.step,
                t: f.step as f64 * p.epsilon(),
                mass: m.mass,
                mean: m.mean,
                variance: m.variance,
            });
        };
        snapshot(&field);
        record(&field, &mut moments);
        let stepping = Stepping::Raw;
        for s in 1..=self.steps {
            field = cparticle::lattice::evolve(&field, p, 1, stepping)?;
            record(&field, &mut moments);
            if s % self.snapshot_every == 0 || s == self.steps {
                snapshot(&field);
            }
        }

        let mut out = Outcome::default();
        let mass0 = moments[0].mass;
        let drift = moments.iter().map(|m| (m.mass - mass0).abs()).fold(0.0, f64::max);
        let allowed = 1e-12 * (self.steps as f64 / 1e4).max(1.0);
        out.check(
            "mass_conservation",
            drift <= allowed,
            format!("max drift {} over {} steps (allowed {})", sci(drift), self.steps, sci(allowed)),
        );
        if mass0 > 0.0 && self.steps >= 2 {
            let tail: Vec<&MomentRow> = moments.iter().skip(1).collect();
            let ts: Vec<f64> = tail.iter().map(|m| m.t).collect();
            let vs: Vec<f64> = tail.iter().map(|m| m.variance).collect();
            let slope = linear_fit(&ts, &vs)?.0;
            let target = 2.0 * p.diffusion_constant();
            out.check(
                "variance_slope_2d",
                ((slope - target) / target).abs() <= 0.02,
                format!("slope {slope:.6} vs 2D = {target}"),
            );
            out.metric("variance_slope", slope);
        }
        out.metric("mass_drift", drift);
        out.metric("epsilon", p.epsilon());
        out.metric("sites", p.sites());

        if self.mc_paths > 0 {
            let mc = mc_comparison(p, self.steps, self.mc_paths, ctx.seed, self.initial_state)?;
            out.check(
                "monte_carlo_within_4_sigma",
                mc.outliers == 0,
                format!("{} outliers, max |z| {:.3}", mc.outliers, mc.max_phi_z_score),
            );
            out.metric("mc_max_z_score", mc.max_phi_z_score);
            out.metric("mc_rms_error", mc.rms_error);
            let rows: Vec<McRow> = (0..p.sites())
                .map(|i| McRow {
                    m: p.label_of(i),
                    x: p.position(i),
                    z1_mc: mc.estimate.z[i][0],
                    z2_mc: mc.estimate.z[i][1],
                    phi1_mc: mc.estimate.phi[i][0],
                    phi2_mc: mc.estimate.phi[i][1],
                    phi1_se: mc.phi_se[i][0],
                    phi2_se: mc.phi_se[i][1],
                    phi1_exact: mc.exact_phi[i][0],
                    phi2_exact: mc.exact_phi[i][1],
                })
                .collect();
            out.files.push(DataFile::encode("monte_carlo", &rows, ctx.format)?);
        }
        out.files.push(DataFile::encode("decomposed", &decomposed_rows, ctx.format)?);
        out.files.push(DataFile::encode("four_state", &four_state_rows, ctx.format)?);
        out.files.push(DataFile::encode("moments", &moments, ctx.format)?);
        Ok(out)
    }
}

// ----------------------------------------------------------- continuum-check

#[derive(Debug, Clone, Default, Args)]
pub struct ContinuumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub diffusion_constant: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Coarsest δ; each further level halves it.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub diffusion_levels: Option<usize>,
    /// Position window |x| <= x-window for the ψ comparison.
    #[arg(long)]
    pub x_window: Option<f64>,
    /// Momentum window |p| <= p-window for the rotation comparison.
    #[arg(long)]
    pub p_window: Option<f64>,
}

pub struct ContinuumPlan {
    d: f64,
    t: f64,
    deltas: Vec<f64>,
    diffusion_deltas: Vec<f64>,
    x_window: f64,
    p_window: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct VarianceRow {
    t: f64,
    variance: f64,
}

impl ContinuumArgs {
    pub fn plan(&self, r: &mut Resolver) -> Result<Plan, CliError> {
        let d = r.take("diffusion-constant", self.diffusion_constant, 0.5)?;
        let t = r.take("t", self.t, 1.0)?;
        let delta = r.take("delta", self.delta, 0.05)?;
        let levels = r.take("levels", self.levels, 4usize)?;
        let diffusion_levels = r.take("diffusion-levels", self.diffusion_levels, 3usize)?;
        let x_window = r.take("x-window", self.x_window, 3.0)?;
        let p_window = r.take("p-window", self.p_window, 2.0)?;
        require(levels >= 3, format!("order fits need at least 3 levels, got {levels}"))?;
        require(diffusion_levels >= 2, format!("need at least 2 diffusion levels, got {diffusion_levels}"))?;
        require(x_window > 0.0 && p_window > 0.0, "windows must be positive")?;
        let deltas = default_deltas(delta, levels);
        let diffusion_deltas = default_deltas(delta, diffusion_levels);
        stroboscopic_levels(d, t, &deltas)?;
        stroboscopic_levels(d, t, &diffusion_deltas)?;
        Ok(Plan::Continuum(ContinuumPlan {
            d,
            t,
            deltas,
            diffusion_deltas,
            x_window,
            p_window,
        }))
    }
}

impl ContinuumPlan {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let s = schrodinger_study(self.d, self.t, &self.deltas, self.x_window, self.p_window)?;
        let diff = diffusion_study(self.d, self.t, &self.diffusion_deltas)?;
        let mut out = Outcome::default();
        out.check(
            "rotation_order_at_least_1.8",
            s.rotation_order >= 1.8,
            format!("fitted order {:.3}", s.rotation_order),
        );
        out.check(
            "psi_order_at_least_1.8",
            s.psi_order >= 1.8,
            format!("fitted order {:.3}", s.psi_order),
        );
        let t8 = s.levels.iter().map(|l| l.t8_identity_residual).fold(0.0, f64::max);
        out.check("t8_identity_at_p0", t8 <= 1e-14, format!("max residual {}", sci(t8)));
        let first = diff.levels[0].l1_error;
        out.check(
            "diffusion_l1_at_most_2pct",
            first <= 0.02,
            format!("L1 error {} at delta {}", sci(first), diff.levels[0].delta),
        );
        out.check("diffusion_error_monotone", diff.monotone, "L1 error decreases as delta halves");
        let target = 2.0 * self.d;
        out.check(
            "variance_slope_2d",
            ((diff.variance_slope - target) / target).abs() <= 0.02,
            format!("slope {:.6} vs 2D = {target}", diff.variance_slope),
        );
        out.metric("rotation_order", s.rotation_order);
        out.metric("psi_order", s.psi_order);
        out.metric("eigenphase_order", s.eigenphase_order);
        out.metric("diffusion_order", diff.l1_order);
        out.metric("variance_slope", diff.variance_slope);
        out.metric("x_window", self.x_window);
        out.metric("p_window", self.p_window);
        let variance: Vec<VarianceRow> = diff
            .variance_samples
            .iter()
            .map(|&(t, variance)| VarianceRow { t, variance })
            .collect();
        out.files.push(DataFile::encode("schrodinger_levels", &s.levels, ctx.format)?);
        out.files.push(DataFile::encode("diffusion_levels", &diff.levels, ctx.format)?);
        out.files.push(DataFile::encode("variance", &variance, ctx.format)?);
        Ok(out)
    }
}

// ------------------------------------------------------------ spectral-check

#[derive(Debug, Clone, Default, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Momentum grid points.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Momentum of the expansion-order fit.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub expansion_delta: Option<f64>,
    #[arg(long)]
    pub expansion_levels: Option<usize>,
}

pub struct SpectralPlan {
    points: usize,
    delta: f64,
    alpha: f64,
    p: f64,
    expansion_deltas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ExpansionRow {
    delta: f64,
    error: f64,
}

impl SpectralArgs {
    pub fn plan(&self, r: &mut Resolver) -> Result<Plan, CliError> {
        let points = r.take("points", self.points, 1024usize)?;
        let delta = r.take("delta", self.delta, 0.05)?;
        let alpha = r.take("alpha", self.alpha, SQRT_2)?;
        let p = r.take("p", self.p, 1.0)?;
        let ed = r.take("expansion-delta", self.expansion_delta, 0.2)?;
        let levels = r.take("expansion-levels", self.expansion_levels, 3usize)?;
        require((2..=MAX_SAMPLES).contains(&points), format!("points must be in 2..={MAX_SAMPLES}"))?;
        require(delta > 0.0 && delta.is_finite(), format!("delta must be positive, got {delta}"))?;
        require(alpha.is_finite() && alpha > 0.0, format!("alpha must be positive, got {alpha}"))?;
        require(p.is_finite() && p != 0.0, "p must be finite and nonzero")?;
        require(ed > 0.0 && ed.is_finite(), "expansion-delta must be positive")?;
        require(levels >= 2, "expansion-levels must be at least 2")?;
        Ok(Plan::Spectral(SpectralPlan {
            points,
            delta,
            alpha,
            p,
            expansion_deltas: default_deltas(ed, levels),
        }))
    }
}

impl SpectralPlan {
    fn run(&self, ctx: &Context) -> Result<Outcome, CliError> {
        let s = spectral_identities(self.points, self.delta, self.alpha)?;
        let e = expansion_order(self.p, &self.expansion_deltas, self.alpha)?;
        let mut out = Outcome::default();
        out.check(
            "unitarity_residual",
            s.max_unitarity_residual <= 1e-14,
            format!("max |T†T - (α²/2)I| = {}", sci(s.max_unitarity_residual)),
        );
        out.check(
            "eigenvalue_modulus",
            s.max_eigen_modulus_residual <= 1e-14,
            format!("max ||λ±| - α/√2| = {}", sci(s.max_eigen_modulus_residual)),
        );
        out.check(
            "determinant",
            s.max_det_residual <= 1e-14,
            format!("max |det T - α²/2| = {}", sci(s.max_det_residual)),
        );
        if self.alpha == SQRT_2 {
            out.check(
                "t8_identity_at_p0",
                s.t8_identity_residual <= 1e-14,
                format!("|T⁸(0) - I| = {}", sci(s.t8_identity_residual)),
            );
        }
        out.check(
            "expansion_order_at_least_3.8",
            e.order >= 3.8,
            format!("fitted order {:.4}", e.order),
        );
        out.metric("max_unitarity_residual", s.max_unitarity_residual);
        out.metric("max_eigen_modulus_residual", s.max_eigen_modulus_residual);
        out.metric("max_det_residual", s.max_det_residual);
        out.metric("t8_identity_residual", s.t8_identity_residual);
        out.metric("expansion_order", e.order);
        let rows: Vec<ExpansionRow> = e
            .deltas
            .iter()
            .zip(&e.errors)
            .map(|(&delta, &error)| ExpansionRow { delta, error })
            .collect();
        out.files.push(DataFile::encode("spectral", &s.rows, ctx.format)?);
        out.files.push(DataFile::encode("expansion", &rows, ctx.format)?);
        Ok(out)
    }
}
