//! Correlation model, whitening transform, and membrane ray configurations.
//!
//! The driving noise of the coupled pair has covariance `B = [[1, a], [a, 1]]`
//! per unit time. The whitening map `A = B^{-1/2}` turns it into independent
//! components and sends the two membrane lines (the coordinate axes) to a pair
//! of lines crossing at angle `xi` with `cos(xi) = -alpha`. Splitting those
//! lines at the origin yields four rays carrying oblique membranes; that
//! configuration is what the hitting criterion consumes.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Driving-noise correlation together with the whitening transform.
///
/// `a`, `b`, `c` are the radical coefficients of `A = B^{-1/2}`:
/// `a = sqrt(1-alpha) + sqrt(1+alpha)`, `b = sqrt(1-alpha) - sqrt(1+alpha)`,
/// `c = 2 sqrt(1-alpha^2)`, and `A = [[a, b], [b, a]] / c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Per-unit-time covariance matrix `B` of the raw noise.
    pub covariance: [[f64; 2]; 2],
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.abs() < 1.0) {
        return Err(Error::domain(
            "alpha",
            alpha,
            "the open interval (-1, 1)",
        ));
    }
    Ok(())
}

pub(crate) fn check_kappa(name: &'static str, kappa: f64) -> Result<()> {
    if !(kappa.abs() <= 1.0) {
        return Err(Error::domain(name, kappa, "the closed interval [-1, 1]"));
    }
    Ok(())
}

/// Builds the correlation model for noise correlation `alpha` in (-1, 1).
pub fn build_correlation_model(alpha: f64) -> Result<CorrelationModel> {
    check_alpha(alpha)?;
    let a = (1.0 - alpha).sqrt() + (1.0 + alpha).sqrt();
    let b = (1.0 - alpha).sqrt() - (1.0 + alpha).sqrt();
    let c = 2.0 * (1.0 - alpha * alpha).sqrt();
    Ok(CorrelationModel {
        alpha,
        a,
        b,
        c,
        covariance: [[1.0, alpha], [alpha, 1.0]],
    })
}

/// Angle between the whitened images of the two membrane lines:
/// `xi = arccos(-alpha)`, in (0, pi).
pub fn membrane_angle(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((-alpha).acos())
}

impl CorrelationModel {
    /// Applies the whitening map: returns `A * point`.
    pub fn whiten(&self, point: [f64; 2]) -> [f64; 2] {
        [
            (self.a * point[0] + self.b * point[1]) / self.c,
            (self.b * point[0] + self.a * point[1]) / self.c,
        ]
    }

    /// Applies the inverse map `A^{-1} = B^{1/2} = [[a, -b], [-b, a]] / 2`
    /// (using `a^2 - b^2 = 2c`).
    pub fn unwhiten(&self, point: [f64; 2]) -> [f64; 2] {
        [
            (self.a * point[0] - self.b * point[1]) / 2.0,
            (-self.b * point[0] + self.a * point[1]) / 2.0,
        ]
    }
}

/// Applies the whitening transform to a point.
pub fn apply_whitening(model: &CorrelationModel, point: [f64; 2]) -> [f64; 2] {
    model.whiten(point)
}

/// A configuration of `n` membrane rays with a common endpoint at the origin.
///
/// Rays are indexed anticlockwise; `xi[k]` is the gap angle from ray `k` to
/// ray `k+1` (cyclically), `gamma[k]` the permeability, `theta[k]` the
/// obliqueness angle of the push direction `v[k]` measured from the
/// anticlockwise unit normal `n_k` (positive when `v[k]` tilts towards the
/// origin). Every `v[k]` satisfies `(v_k, n_k) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayConfig {
    pub n: usize,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub theta: Vec<f64>,
    pub v: Vec<[f64; 2]>,
    pub origin_label: String,
}

impl RayConfig {
    /// Builds a configuration from ray angles, permeabilities, and
    /// obliqueness angles. Gap angles and push vectors are derived.
    pub fn new(
        phi: Vec<f64>,
        gamma: Vec<f64>,
        theta: Vec<f64>,
        origin_label: impl Into<String>,
    ) -> Result<Self> {
        let n = phi.len();
        if n < 3 {
            return Err(Error::InvalidConfig(format!(
                "need at least 3 rays, got {n}"
            )));
        }
        if gamma.len() != n || theta.len() != n {
            return Err(Error::InvalidConfig(format!(
                "length mismatch: {n} angles, {} permeabilities, {} obliqueness angles",
                gamma.len(),
                theta.len()
            )));
        }
        if phi[0] < 0.0 || phi[n - 1] >= 2.0 * PI {
            return Err(Error::InvalidConfig(
                "ray angles must lie in [0, 2*pi)".into(),
            ));
        }
        for k in 1..n {
            if phi[k] <= phi[k - 1] {
                return Err(Error::InvalidConfig(
                    "ray angles must be strictly increasing".into(),
                ));
            }
        }
        for (k, &g) in gamma.iter().enumerate() {
            if !(g.abs() <= 1.0) {
                return Err(Error::domain("gamma", g, "the closed interval [-1, 1]"))
                    .map_err(|e| match e {
                        Error::Domain { value, .. } => Error::InvalidConfig(format!(
                            "gamma[{k}] = {value} outside [-1, 1]"
                        )),
                        other => other,
                    });
            }
        }
        for (k, &t) in theta.iter().enumerate() {
            if !(t.abs() < PI / 2.0) {
                return Err(Error::InvalidConfig(format!(
                    "theta[{k}] = {t} outside (-pi/2, pi/2)"
                )));
            }
        }
        let mut xi = Vec::with_capacity(n);
        for k in 0..n {
            let gap = if k + 1 < n {
                phi[k + 1] - phi[k]
            } else {
                2.0 * PI - phi[n - 1] + phi[0]
            };
            if !(gap > 0.0 && gap <= PI + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "gap angle xi[{k}] = {gap} outside (0, pi]"
                )));
            }
            xi.push(gap);
        }
        // v_k sits at angle phi_k + pi/2 + theta_k with magnitude 1/cos(theta_k),
        // which is the unique vector at angle theta_k from n_k with (v_k, n_k) = 1.
        let v = phi
            .iter()
            .zip(theta.iter())
            .map(|(&p, &t)| {
                let ang = p + PI / 2.0 + t;
                let mag = 1.0 / t.cos();
                [mag * ang.cos(), mag * ang.sin()]
            })
            .collect();
        Ok(RayConfig {
            n,
            phi,
            xi,
            gamma,
            theta,
            v,
            origin_label: origin_label.into(),
        })
    }

    /// Unit direction of ray `k`.
    pub fn ray_direction(&self, k: usize) -> [f64; 2] {
        [self.phi[k].cos(), self.phi[k].sin()]
    }

    /// Anticlockwise unit normal of ray `k`.
    pub fn normal(&self, k: usize) -> [f64; 2] {
        [-self.phi[k].sin(), self.phi[k].cos()]
    }
}

/// Builds the four-ray configuration induced by the pair of membranes with
/// permeabilities `kappa1`, `kappa2` and noise correlation `alpha`.
///
/// The whitened images of the two membrane lines cross at angle
/// `xi = arccos(-alpha)`. The frame is rotated so the image of the positive
/// first-coordinate axis lies at angle 0; rays are stored anticlockwise from
/// it. Gap angles alternate `(xi, pi - xi)`, permeabilities are
/// `(kappa1, -kappa2, -kappa1, kappa2)`, and obliqueness angles alternate
/// `(xi - pi/2, pi/2 - xi)`.
pub fn build_four_ray_config(kappa1: f64, kappa2: f64, alpha: f64) -> Result<RayConfig> {
    check_kappa("kappa1", kappa1)?;
    check_kappa("kappa2", kappa2)?;
    let xi = membrane_angle(alpha)?;
    let phi = vec![0.0, xi, PI, PI + xi];
    let gamma = vec![kappa1, -kappa2, -kappa1, kappa2];
    let t1 = xi - PI / 2.0;
    let theta = vec![t1, -t1, t1, -t1];
    RayConfig::new(
        phi,
        gamma,
        theta,
        format!("whitened axis membranes: kappa1={kappa1}, kappa2={kappa2}, alpha={alpha}"),
    )
}
