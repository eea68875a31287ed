//! Monte Carlo path engine for the coupled skew pair.
//!
//! Each coordinate follows a skew Brownian motion: Euler proposals driven by
//! correlated Gaussian increments, a Brownian-bridge test for zero visits
//! between grid points, and an excursion sign resample on every detected
//! visit (positive side with probability `(1 + kappa) / 2`). Conditional on
//! its own driving noise a single coordinate's grid skeleton is exact in law;
//! the only discretisation freedom is the within-step coupling of the two
//! coordinates' membrane decisions, which are resolved independently.
//!
//! Trials are reproducible in isolation: trial `i` draws from a dedicated
//! counter-mode stream (`ChaCha8`, stream id = trial index) of the base seed,
//! so results do not depend on scheduling or thread count.

use crate::calibration;
use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Parameters of one simulated pair trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub alpha: f64,
    /// Start point; must differ from the double membrane point (0, 0).
    pub x0: [f64; 2],
    /// Time step (process time).
    pub dt: f64,
    /// Total simulated horizon.
    pub horizon: f64,
    pub seed: u64,
    pub trial_index: u64,
    /// Half-width of the occupation band feeding the running local-time
    /// estimates.
    pub lt_bandwidth: f64,
}

impl SimParams {
    /// Engine defaults for the given membrane/correlation triple.
    pub fn new(kappa1: f64, kappa2: f64, alpha: f64) -> Self {
        SimParams {
            kappa1,
            kappa2,
            alpha,
            x0: calibration::DEFAULT_X0,
            dt: calibration::DEFAULT_DT,
            horizon: calibration::DEFAULT_HORIZON,
            seed: calibration::DEFAULT_SEED,
            trial_index: 0,
            lt_bandwidth: calibration::DEFAULT_LT_BANDWIDTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::geometry::check_kappa("kappa1", self.kappa1)?;
        crate::geometry::check_kappa("kappa2", self.kappa2)?;
        crate::geometry::check_alpha(self.alpha)?;
        if !(self.dt > 0.0) {
            return Err(Error::domain("dt", self.dt, "(0, inf)"));
        }
        if !(self.horizon > self.dt) {
            return Err(Error::InvalidParams(format!(
                "horizon {} must exceed dt {}",
                self.horizon, self.dt
            )));
        }
        if self.x0 == [0.0, 0.0] {
            return Err(Error::InvalidParams(
                "start point (0, 0) is excluded: the pair must start away from the double membrane point".into(),
            ));
        }
        if !(self.lt_bandwidth > 0.0) {
            return Err(Error::domain(
                "lt_bandwidth",
                self.lt_bandwidth,
                "(0, inf)",
            ));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Dedicated RNG stream for one trial of one experiment.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Draws one centred bivariate Gaussian increment with covariance
/// `dt * [[1, alpha], [alpha, 1]]`.
#[inline]
pub fn next_increment<R: Rng>(alpha: f64, sqrt_dt: f64, rng: &mut R) -> [f64; 2] {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    [
        sqrt_dt * z1,
        sqrt_dt * (alpha * z1 + (1.0 - alpha * alpha).sqrt() * z2),
    ]
}

/// A batch of i.i.d. correlated increments from the given stream.
pub fn correlated_increments<R: Rng>(
    alpha: f64,
    dt: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<[f64; 2]>> {
    crate::geometry::check_alpha(alpha)?;
    if !(dt > 0.0) {
        return Err(Error::domain("dt", dt, "(0, inf)"));
    }
    let sqrt_dt = dt.sqrt();
    Ok((0..count)
        .map(|_| next_increment(alpha, sqrt_dt, rng))
        .collect())
}

/// Probability that a Brownian bridge from `x` to `y` over time `dt`
/// touches zero: 1 on a sign change (or an endpoint at zero), otherwise
/// `exp(-2 x y / dt)` by the reflection principle.
#[inline]
pub fn bridge_zero_crossing_prob(x: f64, y: f64, dt: f64) -> f64 {
    let xy = x * y;
    if xy <= 0.0 {
        1.0
    } else {
        (-2.0 * xy / dt).exp()
    }
}

/// Result of one coordinate step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewStepOutcome {
    pub x_next: f64,
    pub crossed: bool,
    /// Occupation-band contribution of the new sample:
    /// `dt / (2 eps) * 1[|x_next| <= eps]`.
    pub local_time_increment: f64,
}

/// Advances one skew coordinate by one step.
///
/// Proposes `y = x + dw`; declares a zero visit with the bridge probability
/// (forced on sign changes); on a visit the exit side is resampled, positive
/// with probability `(1 + kappa) / 2` and magnitude `|y|`.
#[inline]
pub fn skew_step<R: Rng>(
    x: f64,
    kappa: f64,
    dw: f64,
    dt: f64,
    epsilon: f64,
    rng: &mut R,
) -> SkewStepOutcome {
    let y = x + dw;
    let crossed = if x * y <= 0.0 {
        true
    } else {
        let p = (-2.0 * x * y / dt).exp();
        rng.gen::<f64>() < p
    };
    let x_next = if crossed {
        let positive = rng.gen::<f64>() < (1.0 + kappa) / 2.0;
        if positive {
            y.abs()
        } else {
            -y.abs()
        }
    } else {
        y
    };
    let local_time_increment = if x_next.abs() <= epsilon {
        dt / (2.0 * epsilon)
    } else {
        0.0
    };
    SkewStepOutcome {
        x_next,
        crossed,
        local_time_increment,
    }
}

/// Sampled pair trajectory with running statistics.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub times: Vec<f64>,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub dt: f64,
    /// Occupation-band local-time estimates at the engine bandwidth.
    pub local_time_1: f64,
    pub local_time_2: f64,
    /// First grid time with `max(|x1|, |x2|) <= delta`, if any.
    pub joint_hit_time: Option<f64>,
    pub crossings_1: u64,
    pub crossings_2: u64,
}

/// Band-occupation local-time estimates recomputed from a sampled path at an
/// arbitrary bandwidth: `(1 / 2 eps) * sum_i dt * 1[|x(t_i)| <= eps]` over
/// every stored sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeEstimate {
    pub l1: f64,
    pub l2: f64,
    /// Set when `epsilon < 3 sqrt(dt)`: the band is narrower than the step
    /// scale and the estimator is under-resolved at this bandwidth.
    pub under_resolved: bool,
}

pub fn local_time_estimate(path: &PathResult, epsilon: f64) -> Result<LocalTimeEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::domain("epsilon", epsilon, "(0, inf)"));
    }
    let weight = path.dt / (2.0 * epsilon);
    let occ = |xs: &[f64]| {
        xs.iter()
            .map(|x| if x.abs() <= epsilon { weight } else { 0.0 })
            .sum()
    };
    Ok(LocalTimeEstimate {
        l1: occ(&path.x1),
        l2: occ(&path.x2),
        under_resolved: epsilon < 3.0 * path.dt.sqrt(),
    })
}

/// Per-trial summary used by the experiment loops (no path arrays kept).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Per-delta first hit time of the sup-norm ball, aligned with the
    /// delta grid handed in.
    pub hit_time: Vec<Option<f64>>,
    pub local_time: [f64; 2],
    pub crossings: [u64; 2],
    pub final_pos: [f64; 2],
}

/// Streams one pair trajectory, recording first hit times for every delta in
/// `deltas` in one pass. Hit checks include the start point (time 0).
pub fn run_trial(params: &SimParams, deltas: &[f64]) -> Result<TrialOutcome> {
    params.validate()?;
    let mut rng = trial_rng(params.seed, params.trial_index);
    let eps = params.lt_bandwidth;
    let sqrt_dt = params.dt.sqrt();
    let n = params.steps();
    let mut x = params.x0;
    let weight = params.dt / (2.0 * eps);
    let mut lt = [0.0f64; 2];
    for c in 0..2 {
        if x[c].abs() <= eps {
            lt[c] += weight;
        }
    }
    let mut hit_time: Vec<Option<f64>> = deltas
        .iter()
        .map(|&d| {
            if x[0].abs().max(x[1].abs()) <= d {
                Some(0.0)
            } else {
                None
            }
        })
        .collect();
    let mut crossings = [0u64; 2];
    let kappas = [params.kappa1, params.kappa2];
    for i in 1..=n {
        let dw = next_increment(params.alpha, sqrt_dt, &mut rng);
        for c in 0..2 {
            let out = skew_step(x[c], kappas[c], dw[c], params.dt, eps, &mut rng);
            x[c] = out.x_next;
            lt[c] += out.local_time_increment;
            crossings[c] += out.crossed as u64;
        }
        let t = i as f64 * params.dt;
        let m = x[0].abs().max(x[1].abs());
        for (slot, &d) in hit_time.iter_mut().zip(deltas.iter()) {
            if slot.is_none() && m <= d {
                *slot = Some(t);
            }
        }
    }
    Ok(TrialOutcome {
        hit_time,
        local_time: lt,
        crossings,
        final_pos: x,
    })
}

/// Simulates one pair trajectory and keeps the full sampled path.
pub fn simulate_pair(params: &SimParams, delta: f64) -> Result<PathResult> {
    params.validate()?;
    if !(delta >= 0.0) {
        return Err(Error::domain("delta", delta, "[0, inf)"));
    }
    let mut rng = trial_rng(params.seed, params.trial_index);
    let eps = params.lt_bandwidth;
    let sqrt_dt = params.dt.sqrt();
    let n = params.steps();
    let mut x = params.x0;
    let mut times = Vec::with_capacity(n + 1);
    let mut x1 = Vec::with_capacity(n + 1);
    let mut x2 = Vec::with_capacity(n + 1);
    times.push(0.0);
    x1.push(x[0]);
    x2.push(x[1]);
    let weight = params.dt / (2.0 * eps);
    let mut lt = [0.0f64; 2];
    for c in 0..2 {
        if x[c].abs() <= eps {
            lt[c] += weight;
        }
    }
    let mut joint_hit_time = if x[0].abs().max(x[1].abs()) <= delta {
        Some(0.0)
    } else {
        None
    };
    let mut crossings = [0u64; 2];
    let kappas = [params.kappa1, params.kappa2];
    for i in 1..=n {
        let dw = next_increment(params.alpha, sqrt_dt, &mut rng);
        for c in 0..2 {
            let out = skew_step(x[c], kappas[c], dw[c], params.dt, eps, &mut rng);
            x[c] = out.x_next;
            lt[c] += out.local_time_increment;
            crossings[c] += out.crossed as u64;
        }
        let t = i as f64 * params.dt;
        times.push(t);
        x1.push(x[0]);
        x2.push(x[1]);
        if joint_hit_time.is_none() && x[0].abs().max(x[1].abs()) <= delta {
            joint_hit_time = Some(t);
        }
    }
    Ok(PathResult {
        times,
        x1,
        x2,
        dt: params.dt,
        local_time_1: lt[0],
        local_time_2: lt[1],
        joint_hit_time,
        crossings_1: crossings[0],
        crossings_2: crossings[1],
    })
}

/// Summary of one single-coordinate trial (used by the marginal-law and
/// local-time studies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarTrial {
    pub final_x: f64,
    pub local_time: f64,
    pub crossings: u64,
    /// Fraction of post-start samples with `x > 0`.
    pub positive_fraction: f64,
}

/// Runs one skew coordinate alone from `x0` for `steps` steps.
pub fn run_skew_trial(
    kappa: f64,
    x0: f64,
    dt: f64,
    steps: usize,
    epsilon: f64,
    seed: u64,
    trial_index: u64,
) -> Result<ScalarTrial> {
    crate::geometry::check_kappa("kappa", kappa)?;
    if !(dt > 0.0) {
        return Err(Error::domain("dt", dt, "(0, inf)"));
    }
    let mut rng = trial_rng(seed, trial_index);
    let sqrt_dt = dt.sqrt();
    let mut x = x0;
    let mut lt = if x.abs() <= epsilon {
        dt / (2.0 * epsilon)
    } else {
        0.0
    };
    let mut crossings = 0u64;
    let mut positive = 0usize;
    for _ in 0..steps {
        let dw: f64 = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        let out = skew_step(x, kappa, dw, dt, epsilon, &mut rng);
        x = out.x_next;
        lt += out.local_time_increment;
        crossings += out.crossed as u64;
        positive += (x > 0.0) as usize;
    }
    Ok(ScalarTrial {
        final_x: x,
        local_time: lt,
        crossings,
        positive_fraction: positive as f64 / steps as f64,
    })
}
