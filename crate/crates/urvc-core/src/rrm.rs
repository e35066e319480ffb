//! Network-assisted radio resource management: power control for
//! device-to-device pairs sharing one uplink resource with a broadband user.
//!
//! Each D2D pair `i` must reach a SINR target γ_i at its receiver while
//! every transmitter respects a power cap. Writing the interference
//! coupling as `F[i][j] = γ_i·g[i][j]/g[i][i]` (zero diagonal) and the
//! noise-plus-external load as `u_i = γ_i·(σ² + ext_i)/g[i][i]`, the classic
//! power-control result applies: targets are jointly achievable iff the
//! spectral radius ρ(F) is below one, in which case `p* = (I − F)⁻¹u` is the
//! componentwise-minimal power vector meeting every target with equality.
//! Feasibility additionally requires `p* ≤ p_max`.
//!
//! *Availability* of the constrained service is the probability, over random
//! topology drops (placement + shadowing), that this problem is feasible.
//! When a broadband transmitter shares the resource, its power is pushed as
//! high as the D2D constraints allow — the feasible set in that power is an
//! interval starting at zero, so bisection finds the edge — and its uplink
//! rate at the optimum is reported.
//!
//! Gains follow a standard distance power law with lognormal shadowing:
//! `g = 10^(K_dB/10) · d^(−α) · 10^(X/10)`, `X ~ N(0, σ_dB²)` per link.

use crate::{seed, Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Pathloss exponent default: urban macro-ish.
pub const DEFAULT_PATHLOSS_EXPONENT: f64 = 3.5;
/// Reference gain at 1 m, in dB.
pub const DEFAULT_REFERENCE_GAIN_DB: f64 = -30.0;
/// Lognormal shadowing standard deviation, in dB.
pub const DEFAULT_SHADOWING_SIGMA_DB: f64 = 6.0;
/// Distances below this are clamped (and flagged) before the power law.
pub const DEFAULT_MIN_DISTANCE_M: f64 = 1.0;

// ===== Geometry =====

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[must_use]
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Deployment area `[0, width] × [0, height]` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

impl Area {
    #[must_use]
    pub fn contains(self, p: Point) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    #[must_use]
    pub fn center(self) -> Point {
        Point { x: self.width / 2.0, y: self.height / 2.0 }
    }

    fn clamp(self, p: Point) -> Point {
        Point {
            x: p.x.clamp(0.0, self.width),
            y: p.y.clamp(0.0, self.height),
        }
    }
}

/// One D2D transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UmtcPair {
    pub tx: Point,
    pub rx: Point,
}

/// Node placement for one drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub umtc_pairs: Vec<UmtcPair>,
    #[serde(default)]
    pub xmbb_user: Option<Point>,
    #[serde(default)]
    pub basestation: Option<Point>,
    pub area: Area,
}

impl Topology {
    pub fn validate(&self) -> Result<()> {
        if self.umtc_pairs.is_empty() {
            return Err(Error::InvalidConfig("topology needs at least one pair".into()));
        }
        if !(self.area.width > 0.0 && self.area.height > 0.0) {
            return Err(Error::InvalidConfig("area dimensions must be positive".into()));
        }
        let mut points: Vec<Point> = Vec::new();
        for p in &self.umtc_pairs {
            points.push(p.tx);
            points.push(p.rx);
        }
        points.extend(self.xmbb_user);
        points.extend(self.basestation);
        for p in points {
            if !self.area.contains(p) {
                return Err(Error::InvalidConfig(format!(
                    "position ({}, {}) lies outside the {}x{} m area",
                    p.x, p.y, self.area.width, self.area.height
                )));
            }
        }
        if self.xmbb_user.is_some() && self.basestation.is_none() {
            return Err(Error::InvalidConfig(
                "a broadband user needs a basestation to transmit to".into(),
            ));
        }
        Ok(())
    }
}

// ===== Gains =====

/// Distance power law with lognormal shadowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathlossModel {
    pub exponent: f64,
    pub reference_gain_db: f64,
    pub shadowing_sigma_db: f64,
    pub min_distance_m: f64,
}

impl Default for PathlossModel {
    fn default() -> Self {
        PathlossModel {
            exponent: DEFAULT_PATHLOSS_EXPONENT,
            reference_gain_db: DEFAULT_REFERENCE_GAIN_DB,
            shadowing_sigma_db: DEFAULT_SHADOWING_SIGMA_DB,
            min_distance_m: DEFAULT_MIN_DISTANCE_M,
        }
    }
}

impl PathlossModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidConfig("pathloss exponent must be positive".into()));
        }
        if !self.reference_gain_db.is_finite() {
            return Err(Error::InvalidConfig("reference gain must be finite".into()));
        }
        if !(self.shadowing_sigma_db >= 0.0 && self.shadowing_sigma_db.is_finite()) {
            return Err(Error::InvalidConfig("shadowing sigma must be nonnegative".into()));
        }
        if !(self.min_distance_m > 0.0) {
            return Err(Error::InvalidConfig("minimum distance must be positive".into()));
        }
        Ok(())
    }
}

/// Linear power gains for one drop. Indexing is `[receiver][transmitter]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    /// `umtc[(i, j)]`: D2D transmitter `j` into D2D receiver `i`.
    pub umtc: DMatrix<f64>,
    /// Broadband transmitter into each D2D receiver.
    pub xmbb_to_umtc: Option<DVector<f64>>,
    /// Each D2D transmitter into the basestation.
    pub umtc_to_bs: Option<DVector<f64>>,
    /// Broadband transmitter into the basestation.
    pub xmbb_to_bs: Option<f64>,
    /// Links whose distance was clamped to the model minimum.
    pub clamped_links: u32,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Draws all link gains for a topology. Links are sampled in a fixed order
/// (D2D rows by receiver then transmitter, then broadband-to-D2D, then
/// uplinks to the basestation) so results are reproducible from the RNG
/// stream alone.
pub fn build_gain_matrix<R: Rng + ?Sized>(
    topology: &Topology,
    model: &PathlossModel,
    rng: &mut R,
) -> GainMatrix {
    let shadow = Normal::new(0.0, model.shadowing_sigma_db)
        .expect("validated nonnegative sigma");
    let mut clamped = 0u32;
    let mut link_gain = |from: Point, to: Point, rng: &mut R| -> f64 {
        let mut d = from.distance(to);
        if d < model.min_distance_m {
            d = model.min_distance_m;
            clamped += 1;
        }
        let x_db: f64 = shadow.sample(rng);
        db_to_linear(model.reference_gain_db) * d.powf(-model.exponent) * db_to_linear(x_db)
    };

    let n = topology.umtc_pairs.len();
    let mut umtc = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            umtc[(i, j)] = link_gain(
                topology.umtc_pairs[j].tx,
                topology.umtc_pairs[i].rx,
                rng,
            );
        }
    }
    let xmbb_to_umtc = topology.xmbb_user.map(|x| {
        DVector::from_fn(n, |i, _| link_gain(x, topology.umtc_pairs[i].rx, rng))
    });
    let umtc_to_bs = topology.basestation.map(|bs| {
        DVector::from_fn(n, |i, _| link_gain(topology.umtc_pairs[i].tx, bs, rng))
    });
    let xmbb_to_bs = match (topology.xmbb_user, topology.basestation) {
        (Some(x), Some(bs)) => Some(link_gain(x, bs, rng)),
        _ => None,
    };

    GainMatrix { umtc, xmbb_to_umtc, umtc_to_bs, xmbb_to_bs, clamped_links: clamped }
}

// ===== Feasibility =====

/// SINR targets and power limits for the D2D links.
///
/// `p_max = 0` is permitted as a degenerate cap (the problem is then never
/// feasible, since minimal powers are strictly positive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinrTargets {
    /// Per-link SINR target, linear.
    pub gamma: Vec<f64>,
    /// Receiver noise power σ².
    pub noise: f64,
    /// Per-transmitter power cap.
    pub p_max: f64,
}

impl SinrTargets {
    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_empty() {
            return Err(Error::InvalidConfig("at least one SINR target required".into()));
        }
        if !self.gamma.iter().all(|&g| g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidConfig("SINR targets must be positive".into()));
        }
        if !(self.noise > 0.0 && self.noise.is_finite()) {
            return Err(Error::InvalidConfig("noise power must be positive".into()));
        }
        if !(self.p_max >= 0.0 && self.p_max.is_finite()) {
            return Err(Error::InvalidConfig("power cap must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn uniform(n: usize, gamma: f64, noise: f64, p_max: f64) -> Result<Self> {
        let t = SinrTargets { gamma: vec![gamma; n], noise, p_max };
        t.validate()?;
        Ok(t)
    }
}

/// Verdict of the power-control problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    /// Targets achievable; `powers` is the componentwise-minimal solution.
    Feasible { powers: DVector<f64> },
    Infeasible,
}

impl Feasibility {
    #[must_use]
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Boundary guard: spectral radii within this of 1 are classified
/// infeasible (conservative).
const RADIUS_MARGIN: f64 = 1e-9;

/// Spectral radius of a nonnegative matrix by normalized power iteration.
///
/// The per-step growth ratio oscillates with period two on matrices with
/// bipartite support (every two-link instance is one), so convergence is
/// tested on the geometric mean of consecutive ratios, which is exact for
/// that case and converges for the primitive case.
fn spectral_radius(f: &DMatrix<f64>) -> f64 {
    let n = f.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut prev_ratio: Option<f64> = None;
    let mut estimate = f64::NAN;
    for _ in 0..10_000 {
        let w = f * &v;
        let ratio = w.norm();
        if ratio == 0.0 {
            return 0.0; // start vector annihilated: nilpotent-like, radius 0
        }
        v = w / ratio;
        if let Some(prev) = prev_ratio {
            let next = (ratio * prev).sqrt();
            if (next - estimate).abs() <= 1e-12 * next.max(1.0) {
                return next;
            }
            estimate = next;
        }
        prev_ratio = Some(ratio);
    }
    estimate
}

/// Decides whether per-link SINR targets are jointly achievable under the
/// power cap, given D2D gains and fixed external interference at each
/// receiver, and returns the minimal power vector when they are.
pub fn feasibility_check(
    gains: &DMatrix<f64>,
    targets: &SinrTargets,
    external_interference: &DVector<f64>,
) -> Result<Feasibility> {
    let n = gains.nrows();
    if gains.ncols() != n || n == 0 {
        return Err(Error::InvalidConfig("gain matrix must be square and non-empty".into()));
    }
    targets.validate()?;
    if targets.gamma.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} SINR targets for {n} links",
            targets.gamma.len()
        )));
    }
    if external_interference.len() != n {
        return Err(Error::InvalidConfig(format!(
            "{} external interference terms for {n} links",
            external_interference.len()
        )));
    }
    if !gains.iter().all(|&g| g > 0.0 && g.is_finite()) {
        return Err(Error::InvalidConfig("gains must be positive and finite".into()));
    }
    if !external_interference.iter().all(|&e| e >= 0.0 && e.is_finite()) {
        return Err(Error::InvalidConfig("external interference must be nonnegative".into()));
    }

    let f = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            targets.gamma[i] * gains[(i, j)] / gains[(i, i)]
        }
    });
    let u = DVector::from_fn(n, |i, _| {
        targets.gamma[i] * (targets.noise + external_interference[i]) / gains[(i, i)]
    });

    if spectral_radius(&f) >= 1.0 - RADIUS_MARGIN {
        return Ok(Feasibility::Infeasible);
    }
    let system = DMatrix::identity(n, n) - f;
    let Some(powers) = system.lu().solve(&u) else {
        return Ok(Feasibility::Infeasible); // numerically singular at the boundary
    };
    if !powers.iter().all(|&p| p.is_finite() && p >= 0.0) {
        return Ok(Feasibility::Infeasible);
    }
    if powers.iter().any(|&p| p > targets.p_max) {
        return Ok(Feasibility::Infeasible);
    }
    Ok(Feasibility::Feasible { powers })
}

/// Joint allocation when a broadband transmitter shares the resource.
#[derive(Debug, Clone, PartialEq)]
pub enum XmbbAllocation {
    Feasible {
        /// Largest broadband power keeping every D2D target achievable.
        xmbb_power: f64,
        /// Broadband uplink spectral rate at the operating point.
        xmbb_rate: f64,
        /// Minimal D2D power vector at that operating point.
        umtc_powers: DVector<f64>,
    },
    Infeasible,
}

/// Pushes the broadband transmit power as high as the D2D constraints
/// allow, up to `xmbb_p_max`.
///
/// The minimal D2D power vector grows componentwise with the broadband
/// power, so the feasible region in that power is an interval containing 0
/// whenever anything is feasible at all; bisection finds its upper edge.
pub fn max_xmbb_power(
    gains: &GainMatrix,
    targets: &SinrTargets,
    xmbb_p_max: f64,
) -> Result<XmbbAllocation> {
    let Some(xmbb_to_umtc) = gains.xmbb_to_umtc.as_ref() else {
        return Err(Error::InvalidConfig("no broadband transmitter in the gain matrix".into()));
    };
    let (Some(umtc_to_bs), Some(xmbb_to_bs)) = (gains.umtc_to_bs.as_ref(), gains.xmbb_to_bs)
    else {
        return Err(Error::InvalidConfig("basestation gains missing".into()));
    };
    if !(xmbb_p_max >= 0.0 && xmbb_p_max.is_finite()) {
        return Err(Error::InvalidConfig("broadband power cap must be nonnegative".into()));
    }

    let at = |p_x: f64| -> Result<Feasibility> {
        feasibility_check(&gains.umtc, targets, &(xmbb_to_umtc * p_x))
    };

    // Closed endpoints first: the cap itself may be feasible (always the
    // case when the broadband user is decoupled), and zero may already fail.
    let best = match at(xmbb_p_max)? {
        Feasibility::Feasible { powers } => Some((xmbb_p_max, powers)),
        Feasibility::Infeasible => match at(0.0)? {
            Feasibility::Infeasible => None,
            Feasibility::Feasible { powers } => {
                let mut lo = 0.0f64;
                let mut hi = xmbb_p_max;
                let mut lo_powers = powers;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break; // interval exhausted in floating point
                    }
                    match at(mid)? {
                        Feasibility::Feasible { powers } => {
                            lo = mid;
                            lo_powers = powers;
                        }
                        Feasibility::Infeasible => hi = mid,
                    }
                }
                Some((lo, lo_powers))
            }
        },
    };

    Ok(match best {
        None => XmbbAllocation::Infeasible,
        Some((xmbb_power, umtc_powers)) => {
            let interference: f64 = umtc_to_bs.dot(&umtc_powers);
            let sinr = xmbb_to_bs * xmbb_power / (targets.noise + interference);
            XmbbAllocation::Feasible {
                xmbb_power,
                xmbb_rate: (1.0 + sinr).log2(),
                umtc_powers,
            }
        }
    })
}

// ===== Availability over random drops =====

/// How node positions are produced for each drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyModel {
    /// D2D transmitters uniform in the area; each receiver at a uniform
    /// angle and uniform distance from its transmitter (clamped into the
    /// area); optionally one uniform broadband user with the basestation at
    /// the area center.
    Random {
        area: Area,
        n_pairs: usize,
        pair_distance_m: (f64, f64),
        xmbb: bool,
    },
    /// The same explicit placement every drop (randomness only in
    /// shadowing, if enabled).
    Fixed(Topology),
}

impl TopologyModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            TopologyModel::Random { area, n_pairs, pair_distance_m: (lo, hi), .. } => {
                if !(area.width > 0.0 && area.height > 0.0) {
                    return Err(Error::InvalidConfig("area dimensions must be positive".into()));
                }
                if *n_pairs == 0 {
                    return Err(Error::InvalidConfig("at least one pair required".into()));
                }
                if !(0.0 < *lo && lo <= hi && hi.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "pair distance range must satisfy 0 < min <= max".into(),
                    ));
                }
                Ok(())
            }
            TopologyModel::Fixed(t) => t.validate(),
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Topology {
        match self {
            TopologyModel::Fixed(t) => t.clone(),
            TopologyModel::Random { area, n_pairs, pair_distance_m: (lo, hi), xmbb } => {
                let uniform_point = |rng: &mut R| Point {
                    x: rng.gen_range(0.0..=area.width),
                    y: rng.gen_range(0.0..=area.height),
                };
                let umtc_pairs = (0..*n_pairs)
                    .map(|_| {
                        let tx = uniform_point(rng);
                        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                        let d = rng.gen_range(*lo..=*hi);
                        let rx = area.clamp(Point {
                            x: tx.x + d * angle.cos(),
                            y: tx.y + d * angle.sin(),
                        });
                        UmtcPair { tx, rx }
                    })
                    .collect();
                let xmbb_user = xmbb.then(|| uniform_point(rng));
                Topology {
                    umtc_pairs,
                    xmbb_user,
                    basestation: xmbb.then(|| area.center()),
                    area: *area,
                }
            }
        }
    }
}

/// Everything needed to score one random drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrmScenario {
    pub topology: TopologyModel,
    #[serde(default)]
    pub pathloss: PathlossModel,
    /// Common SINR target for every D2D link, in dB.
    pub sinr_target_db: f64,
    pub noise: f64,
    pub p_max: f64,
    #[serde(default)]
    pub xmbb_p_max: f64,
}

impl RrmScenario {
    pub fn validate(&self) -> Result<()> {
        self.topology.validate()?;
        self.pathloss.validate()?;
        let targets = SinrTargets {
            gamma: vec![db_to_linear(self.sinr_target_db)],
            noise: self.noise,
            p_max: self.p_max,
        };
        targets.validate()?;
        if !(self.xmbb_p_max >= 0.0 && self.xmbb_p_max.is_finite()) {
            return Err(Error::InvalidConfig("broadband power cap must be nonnegative".into()));
        }
        if self.has_xmbb() && self.xmbb_p_max == 0.0 {
            return Err(Error::InvalidConfig(
                "broadband user present but its power cap is zero".into(),
            ));
        }
        Ok(())
    }

    fn has_xmbb(&self) -> bool {
        match &self.topology {
            TopologyModel::Random { xmbb, .. } => *xmbb,
            TopologyModel::Fixed(t) => t.xmbb_user.is_some(),
        }
    }

    fn n_pairs(&self) -> usize {
        match &self.topology {
            TopologyModel::Random { n_pairs, .. } => *n_pairs,
            TopologyModel::Fixed(t) => t.umtc_pairs.len(),
        }
    }

    /// Scores a single drop with its own RNG stream. Returns whether the
    /// problem was feasible and, if a broadband user is present and the drop
    /// feasible, the achieved broadband rate.
    pub fn drop_outcome<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(bool, Option<f64>)> {
        let topology = self.topology.sample(rng);
        let gains = build_gain_matrix(&topology, &self.pathloss, rng);
        let targets = SinrTargets::uniform(
            self.n_pairs(),
            db_to_linear(self.sinr_target_db),
            self.noise,
            self.p_max,
        )?;
        if topology.xmbb_user.is_some() {
            match max_xmbb_power(&gains, &targets, self.xmbb_p_max)? {
                XmbbAllocation::Feasible { xmbb_rate, .. } => Ok((true, Some(xmbb_rate))),
                XmbbAllocation::Infeasible => Ok((false, None)),
            }
        } else {
            let ext = DVector::zeros(self.n_pairs());
            Ok((feasibility_check(&gains.umtc, &targets, &ext)?.is_feasible(), None))
        }
    }
}

/// One point of an availability sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvailabilityPoint {
    pub sinr_target_db: f64,
    pub availability: f64,
    pub stderr: f64,
    pub n_drops: u64,
    /// Mean broadband rate over feasible drops; absent without a broadband
    /// user or when nothing was feasible.
    pub mean_xmbb_rate: Option<f64>,
}

/// Availability as the fraction of feasible drops, with binomial standard
/// error. Drops run in parallel on per-drop RNG streams derived from
/// `seed`; results are merged in drop order, so the outcome is independent
/// of thread scheduling.
pub fn availability_estimate(
    scenario: &RrmScenario,
    n_drops: u64,
    seed: u64,
) -> Result<AvailabilityPoint> {
    if n_drops == 0 {
        return Err(Error::InvalidConfig("at least one drop required".into()));
    }
    scenario.validate()?;
    let outcomes: Vec<(bool, Option<f64>)> = (0..n_drops)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::stream(seed, seed::domain::RRM_EPISODE, i);
            scenario.drop_outcome(&mut rng)
        })
        .collect::<Result<_>>()?;
    let feasible = outcomes.iter().filter(|(ok, _)| *ok).count() as u64;
    let availability = feasible as f64 / n_drops as f64;
    let rates: Vec<f64> = outcomes.iter().filter_map(|&(_, r)| r).collect();
    Ok(AvailabilityPoint {
        sinr_target_db: scenario.sinr_target_db,
        availability,
        stderr: (availability * (1.0 - availability) / n_drops as f64).sqrt(),
        n_drops,
        mean_xmbb_rate: if rates.is_empty() {
            None
        } else {
            Some(rates.iter().sum::<f64>() / rates.len() as f64)
        },
    })
}

/// Availability across SINR targets, one point per target, all points
/// scored on the *same* drops (common random numbers): the per-drop
/// feasibility is monotone in the target, so the availability column is
/// exactly non-increasing.
pub fn availability_sweep(
    scenario: &RrmScenario,
    sinr_targets_db: &[f64],
    n_drops: u64,
    seed: u64,
) -> Result<Vec<AvailabilityPoint>> {
    sinr_targets_db
        .iter()
        .map(|&g| {
            let point = RrmScenario { sinr_target_db: g, ..scenario.clone() };
            availability_estimate(&point, n_drops, seed)
        })
        .collect()
}

/// Writes an availability sweep as CSV.
pub fn write_availability_csv<W: std::io::Write>(
    points: &[AvailabilityPoint],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "gamma_db,availability,stderr,mean_xmbb_rate")?;
    for p in points {
        let rate = p.mean_xmbb_rate.map_or(String::new(), |r| format!("{r}"));
        writeln!(w, "{},{},{},{}", p.sinr_target_db, p.availability, p.stderr, rate)?;
    }
    Ok(())
}
