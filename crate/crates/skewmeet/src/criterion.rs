//! Exact hitting criterion: embedded ray chain, stationary distribution, and
//! the decision statistic.
//!
//! The process restricted to its membrane visits induces a cyclic Markov
//! chain on ray indices with nearest-neighbour transitions. Its stationary
//! distribution weights the per-ray radial push, and the sign of the
//! resulting statistic `S` decides origin hitting: `S > 0` means the process
//! reaches the common endpoint almost surely, `S <= 0` means it never does.
//! For the four-ray configuration of an axis-membrane pair the whole pipeline
//! collapses to closed forms, and the verdict reduces to the sign of
//! `kappa1 * kappa2 * alpha`.

use crate::error::{Error, Result};
use crate::geometry::{check_alpha, check_kappa, membrane_angle, RayConfig};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use std::fmt;

const DENOM_FLOOR: f64 = 1e-14;

/// Outcome of the zero-one hitting law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HitsAlmostSurely,
    DoesNotHit,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::HitsAlmostSurely => write!(f, "HIT"),
            Verdict::DoesNotHit => write!(f, "NO-HIT"),
        }
    }
}

/// How the stationary distribution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    LinearSolve,
    SpecialCase,
}

/// Full solution of the criterion pipeline for one configuration.
#[derive(Debug, Clone)]
pub struct ChainSolution {
    pub p_tilde: Vec<f64>,
    pub q_tilde: Vec<f64>,
    pub pi: Vec<f64>,
    pub s: f64,
    pub verdict: Verdict,
    /// Four-ray closed-form denominator, when that route was taken.
    pub d: Option<f64>,
    pub method: Method,
}

fn denominator(xi: &[f64], gamma: &[f64], k: usize) -> f64 {
    let n = xi.len();
    let xim = xi[(k + n - 1) % n];
    let xik = xi[k];
    (xim + xik) + gamma[k] * (xim - xik)
}

/// Transition probabilities of the embedded ray chain:
/// `p_k = (1+gamma_k) xi_{k-1} / den_k`, `q_k = (1-gamma_k) xi_k / den_k`
/// with `den_k = (xi_{k-1} + xi_k) + gamma_k (xi_{k-1} - xi_k)` and the
/// cyclic convention `xi_0 = xi_n`. Row sums are exactly 1.
pub fn transition_probabilities(config: &RayConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = config.n;
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for k in 0..n {
        let den = denominator(&config.xi, &config.gamma, k);
        if den <= DENOM_FLOOR {
            return Err(Error::DegenerateDenominator {
                index: k,
                value: den,
            });
        }
        let xim = config.xi[(k + n - 1) % n];
        p.push((1.0 + config.gamma[k]) * xim / den);
        q.push((1.0 - config.gamma[k]) * config.xi[k] / den);
    }
    Ok((p, q))
}

/// Row-stochastic transition matrix: from state `k`, anticlockwise to `k+1`
/// with probability `p_k`, clockwise to `k-1` with probability `q_k`.
pub fn transition_matrix(p_tilde: &[f64], q_tilde: &[f64]) -> DMatrix<f64> {
    let n = p_tilde.len();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        m[(k, (k + 1) % n)] = p_tilde[k];
        m[(k, (k + n - 1) % n)] = q_tilde[k];
    }
    m
}

/// Number of closed communicating classes of the support graph.
fn closed_class_count(p_tilde: &[f64], q_tilde: &[f64]) -> usize {
    let n = p_tilde.len();
    let succ = |k: usize| {
        let mut out = Vec::with_capacity(2);
        if p_tilde[k] > 0.0 {
            out.push((k + 1) % n);
        }
        if q_tilde[k] > 0.0 {
            out.push((k + n - 1) % n);
        }
        out
    };
    // reach[i] = set of states reachable from i (including i)
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        let mut stack = vec![i];
        reach[i][i] = true;
        while let Some(k) = stack.pop() {
            for j in succ(k) {
                if !reach[i][j] {
                    reach[i][j] = true;
                    stack.push(j);
                }
            }
        }
    }
    let mut seen = vec![false; n];
    let mut closed = 0;
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
        for &j in &class {
            seen[j] = true;
        }
        let is_closed = class
            .iter()
            .all(|&j| succ(j).iter().all(|t| reach[i][*t] && reach[*t][i]));
        if is_closed {
            closed += 1;
        }
    }
    closed
}

/// Solves `pi P = pi`, `sum(pi) = 1` by a direct dense linear solve.
///
/// Errors with [`Error::NonUniqueStationary`] when the chain splits into
/// more than one closed class.
pub fn stationary_distribution(p_tilde: &[f64], q_tilde: &[f64]) -> Result<Vec<f64>> {
    let n = p_tilde.len();
    let classes = closed_class_count(p_tilde, q_tilde);
    if classes != 1 {
        return Err(Error::NonUniqueStationary {
            closed_classes: classes,
        });
    }
    // (P^T - I) pi = 0 with the last row replaced by the normalisation.
    let p = transition_matrix(p_tilde, q_tilde);
    let mut m = p.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let solved = m.lu().solve(&rhs).ok_or(Error::NonUniqueStationary {
        closed_classes: classes,
    })?;
    let mut pi: Vec<f64> = solved.iter().copied().collect();
    for x in &mut pi {
        if *x < 0.0 && *x > -1e-13 {
            *x = 0.0;
        }
    }
    Ok(pi)
}

/// The decision statistic
/// `S = sum_k gamma_k pi_k xi_{k-1} xi_k / den_k * tan(theta_k)`.
pub fn statistic_s(config: &RayConfig, pi: &[f64]) -> Result<f64> {
    if pi.len() != config.n {
        return Err(Error::InvalidParams(format!(
            "pi has length {} for an {}-ray configuration",
            pi.len(),
            config.n
        )));
    }
    let n = config.n;
    let mut s = 0.0;
    for k in 0..n {
        let den = denominator(&config.xi, &config.gamma, k);
        if den <= DENOM_FLOOR {
            return Err(Error::DegenerateDenominator {
                index: k,
                value: den,
            });
        }
        let xim = config.xi[(k + n - 1) % n];
        s += config.gamma[k] * pi[k] * xim * config.xi[k] / den * config.theta[k].tan();
    }
    Ok(s)
}

/// Sign rule of the dichotomy: the process hits iff `S > 0`; `S = 0` falls
/// in the no-hit branch.
pub fn verdict(s: f64) -> Verdict {
    if s > 0.0 {
        Verdict::HitsAlmostSurely
    } else {
        Verdict::DoesNotHit
    }
}

fn check_interior_nonzero(name: &'static str, kappa: f64) -> Result<()> {
    if !(kappa.abs() < 1.0) || kappa == 0.0 {
        return Err(Error::domain(
            name,
            kappa,
            "the open interval (-1, 1) excluding 0",
        ));
    }
    Ok(())
}

/// Closed-form stationary distribution of the four-ray configuration, for
/// interior nonzero permeabilities, together with the denominator
/// `D = 2[(1 + g1 g2) xi + (1 - g1 g2)(pi - xi)]` where `g1 = kappa1`,
/// `g2 = -kappa2`.
pub fn closed_form_pi_four_ray(kappa1: f64, kappa2: f64, xi: f64) -> Result<(Vec<f64>, f64)> {
    check_interior_nonzero("kappa1", kappa1)?;
    check_interior_nonzero("kappa2", kappa2)?;
    if !(xi > 0.0 && xi < PI) {
        return Err(Error::domain("xi", xi, "the open interval (0, pi)"));
    }
    let g1 = kappa1;
    let g2 = -kappa2;
    let co = PI - xi;
    let d = 2.0 * ((1.0 + g1 * g2) * xi + (1.0 - g1 * g2) * co);
    // The raw numerators sum to 2D, so the normalised weights carry 1/(2D).
    let pi = vec![
        (1.0 - g2) * ((1.0 + g1) * co + (1.0 - g1) * xi) / (2.0 * d),
        (1.0 + g1) * ((1.0 - g2) * co + (1.0 + g2) * xi) / (2.0 * d),
        (1.0 + g2) * ((1.0 - g1) * co + (1.0 + g1) * xi) / (2.0 * d),
        (1.0 - g1) * ((1.0 + g2) * co + (1.0 - g2) * xi) / (2.0 * d),
    ];
    Ok((pi, d))
}

/// Closed-form statistic for the four-ray configuration:
/// `S = 2 xi (pi - xi) / D * (-kappa1 kappa2 cot(xi))` with
/// `cot(xi) = -alpha / sqrt(1 - alpha^2)`.
pub fn closed_form_s_four_ray(kappa1: f64, kappa2: f64, alpha: f64) -> Result<f64> {
    check_interior_nonzero("kappa1", kappa1)?;
    check_interior_nonzero("kappa2", kappa2)?;
    check_alpha(alpha)?;
    let xi = membrane_angle(alpha)?;
    let (_, d) = closed_form_pi_four_ray(kappa1, kappa2, xi)?;
    let cot = -alpha / (1.0 - alpha * alpha).sqrt();
    Ok(2.0 * xi * (PI - xi) / d * (-kappa1 * kappa2 * cot))
}

/// Stationary distributions for the boundary (`|kappa| = 1`) and transparent
/// (`kappa = 0`) cases, where the closed forms above do not apply.
///
/// Every returned vector satisfies `pi P = pi` exactly for the four-ray
/// chain; each is derived from the local transition structure (deterministic
/// moves pin the recurrent class, a transparent membrane leaves the chain
/// irreducible with an explicit product-form solution).
pub fn special_case_pi(kappa1: f64, kappa2: f64, alpha: f64) -> Result<Vec<f64>> {
    check_kappa("kappa1", kappa1)?;
    check_kappa("kappa2", kappa2)?;
    check_alpha(alpha)?;
    let config = crate::geometry::build_four_ray_config(kappa1, kappa2, alpha)?;
    let (p, q) = transition_probabilities(&config)?;
    let b1 = kappa1.abs() == 1.0;
    let b2 = kappa2.abs() == 1.0;
    let pi = match (kappa1, kappa2) {
        _ if b1 && b2 => match (kappa1 > 0.0, kappa2 > 0.0) {
            (true, true) => vec![0.5, 0.5, 0.0, 0.0],
            (true, false) => vec![0.0, 0.5, 0.5, 0.0],
            (false, true) => vec![0.5, 0.0, 0.0, 0.5],
            (false, false) => vec![0.0, 0.0, 0.5, 0.5],
        },
        _ if b1 => {
            if kappa1 > 0.0 {
                // rays 1 and 3 reflect towards ray 2; ray 4 is transient
                vec![q[1] / 2.0, 0.5, p[1] / 2.0, 0.0]
            } else {
                vec![p[3] / 2.0, 0.0, q[3] / 2.0, 0.5]
            }
        }
        _ if b2 => {
            if kappa2 > 0.0 {
                vec![0.5, p[0] / 2.0, 0.0, q[0] / 2.0]
            } else {
                vec![0.0, q[2] / 2.0, 0.5, p[2] / 2.0]
            }
        }
        _ if kappa1 == 0.0 => {
            let d2 = denominator(&config.xi, &config.gamma, 1);
            let d4 = denominator(&config.xi, &config.gamma, 3);
            vec![
                (1.0 + kappa2) / 4.0,
                d2 / (4.0 * PI),
                (1.0 - kappa2) / 4.0,
                d4 / (4.0 * PI),
            ]
        }
        _ if kappa2 == 0.0 => {
            let d1 = denominator(&config.xi, &config.gamma, 0);
            let d3 = denominator(&config.xi, &config.gamma, 2);
            vec![
                d1 / (4.0 * PI),
                (1.0 + kappa1) / 4.0,
                d3 / (4.0 * PI),
                (1.0 - kappa1) / 4.0,
            ]
        }
        _ => {
            return Err(Error::NoSpecialCase { kappa1, kappa2 });
        }
    };
    Ok(pi)
}

/// Shortcut form of the Theorem: hits almost surely iff
/// `kappa1 * kappa2 * alpha > 0`.
pub fn theorem_decision(kappa1: f64, kappa2: f64, alpha: f64) -> Result<Verdict> {
    check_kappa("kappa1", kappa1)?;
    check_kappa("kappa2", kappa2)?;
    check_alpha(alpha)?;
    Ok(verdict(kappa1 * kappa2 * alpha))
}

/// Runs the full pipeline for an axis-membrane pair and returns every
/// intermediate quantity.
///
/// Interior nonzero permeabilities take the closed-form route; boundary and
/// zero permeabilities take the explicit special-case distributions. Both
/// agree with the generic linear solve, which remains available through
/// [`stationary_distribution`] as an independent cross-check.
pub fn solve_four_ray(kappa1: f64, kappa2: f64, alpha: f64) -> Result<ChainSolution> {
    let config = crate::geometry::build_four_ray_config(kappa1, kappa2, alpha)?;
    let (p_tilde, q_tilde) = transition_probabilities(&config)?;
    let special = kappa1.abs() == 1.0 || kappa2.abs() == 1.0 || kappa1 == 0.0 || kappa2 == 0.0;
    let (pi, d, method) = if special {
        (special_case_pi(kappa1, kappa2, alpha)?, None, Method::SpecialCase)
    } else {
        let xi = membrane_angle(alpha)?;
        let (pi, d) = closed_form_pi_four_ray(kappa1, kappa2, xi)?;
        (pi, Some(d), Method::ClosedForm)
    };
    let s = statistic_s(&config, &pi)?;
    Ok(ChainSolution {
        p_tilde,
        q_tilde,
        pi,
        s,
        verdict: verdict(s),
        d,
        method,
    })
}

/// Generic-pipeline solution (transition matrix, linear solve, statistic)
/// for an arbitrary ray configuration.
pub fn solve_config(config: &RayConfig) -> Result<ChainSolution> {
    let (p_tilde, q_tilde) = transition_probabilities(config)?;
    let pi = stationary_distribution(&p_tilde, &q_tilde)?;
    let s = statistic_s(config, &pi)?;
    Ok(ChainSolution {
        p_tilde,
        q_tilde,
        pi,
        s,
        verdict: verdict(s),
        d: None,
        method: Method::LinearSolve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_four_ray_config;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn residual_inf(pi: &[f64], p: &[f64], q: &[f64]) -> f64 {
        let m = transition_matrix(p, q);
        let n = pi.len();
        (0..n)
            .map(|j| {
                let flow: f64 = (0..n).map(|k| pi[k] * m[(k, j)]).sum();
                (flow - pi[j]).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn transition_rows_sum_to_one() {
        let cfg = build_four_ray_config(0.5, 0.5, 0.5).unwrap();
        let (p, q) = transition_probabilities(&cfg).unwrap();
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(q[0], 0.4, epsilon = 1e-12);
        for k in 0..4 {
            assert_abs_diff_eq!(p[k] + q[k], 1.0, epsilon = 1e-12);
            assert!(p[k] >= 0.0 && q[k] >= 0.0);
        }
    }

    #[test]
    fn equal_gaps_reduce_to_half_skew() {
        // alpha = 0 gives all gaps pi/2, so p_k = (1+gamma_k)/2.
        let cfg = build_four_ray_config(0.3, -0.8, 0.0).unwrap();
        let (p, q) = transition_probabilities(&cfg).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(p[k], (1.0 + cfg.gamma[k]) / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(q[k], (1.0 - cfg.gamma[k]) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn transparent_membranes_weight_by_gaps() {
        let cfg = build_four_ray_config(0.0, 0.0, 0.5).unwrap();
        let (p, _) = transition_probabilities(&cfg).unwrap();
        for k in 0..4 {
            let xim = cfg.xi[(k + 3) % 4];
            assert_abs_diff_eq!(p[k], xim / (xim + cfg.xi[k]), epsilon = 1e-12);
        }
    }

    #[test]
    fn uniform_chain_has_uniform_stationary() {
        let pi = stationary_distribution(&[0.5; 4], &[0.5; 4]).unwrap();
        for x in pi {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn reducible_chain_errors() {
        // 0 -> 1, 1 -> 0 and 2 -> 3, 3 -> 2: two closed classes.
        let p = [1.0, 0.0, 1.0, 0.0];
        let q = [0.0, 1.0, 0.0, 1.0];
        let err = stationary_distribution(&p, &q).unwrap_err();
        assert!(matches!(
            err,
            Error::NonUniqueStationary { closed_classes: 2 }
        ));
    }

    #[test]
    fn four_ray_interior_example() {
        let xi = membrane_angle(0.5).unwrap();
        let (pi, d) = closed_form_pi_four_ray(0.5, 0.5, xi).unwrap();
        assert_abs_diff_eq!(d, 5.759_586_531_581_287, epsilon = 1e-12);
        let expect = [15.0 / 44.0, 15.0 / 44.0, 7.0 / 44.0, 7.0 / 44.0];
        for (got, want) in pi.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(pi.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn statistic_values_frozen() {
        // S(0.5, 0.5, 0.5) = 2*pi / (33*sqrt(3)), evaluated independently.
        let s = closed_form_s_four_ray(0.5, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(s, 0.109_927_234_196_013_3, epsilon = 1e-12);
        assert_abs_diff_eq!(
            s,
            2.0 * PI / (33.0 * 3.0_f64.sqrt()),
            epsilon = 1e-15
        );
        let s_neg = closed_form_s_four_ray(0.5, 0.5, -0.5).unwrap();
        assert_abs_diff_eq!(s_neg, -0.093_015_352_012_011_2, epsilon = 1e-12);
        assert_eq!(verdict(s), Verdict::HitsAlmostSurely);
        assert_eq!(verdict(s_neg), Verdict::DoesNotHit);
    }

    #[test]
    fn statistic_vanishes_without_permeability() {
        let cfg = build_four_ray_config(0.0, 0.0, 0.7).unwrap();
        let sol = solve_config(&cfg).unwrap();
        assert_eq!(sol.s, 0.0);
        // kappa1 = 0 with arbitrary kappa2 also kills S.
        let sol = solve_four_ray(0.0, 0.7, 0.4).unwrap();
        assert_abs_diff_eq!(sol.s, 0.0, epsilon = 1e-15);
        assert_eq!(sol.verdict, Verdict::DoesNotHit);
    }

    #[test]
    fn verdict_boundary_is_strict() {
        assert_eq!(verdict(0.1099), Verdict::HitsAlmostSurely);
        assert_eq!(verdict(0.0), Verdict::DoesNotHit);
        assert_eq!(verdict(-1e-15), Verdict::DoesNotHit);
    }

    #[test]
    fn special_cases_are_stationary_and_match_solver() {
        let cases = [
            (1.0, 1.0, 0.3),
            (1.0, -1.0, 0.5),
            (-1.0, 1.0, 0.5),
            (-1.0, -1.0, 0.5),
            (1.0, 0.5, 0.5),
            (1.0, -0.5, -0.4),
            (-1.0, 0.5, 0.5),
            (-1.0, -0.8, 0.2),
            (0.5, 1.0, 0.5),
            (-0.3, 1.0, -0.6),
            (0.5, -1.0, 0.5),
            (0.0, 0.7, 0.4),
            (0.7, 0.0, 0.4),
            (0.0, -0.3, -0.6),
            (-0.4, 0.0, 0.7),
            (0.0, 0.0, 0.3),
            (0.0, 1.0, 0.4),
            (1.0, 0.0, 0.4),
        ];
        for &(k1, k2, alpha) in &cases {
            let cfg = build_four_ray_config(k1, k2, alpha).unwrap();
            let (p, q) = transition_probabilities(&cfg).unwrap();
            let special = special_case_pi(k1, k2, alpha).unwrap();
            assert!(
                residual_inf(&special, &p, &q) <= 1e-12,
                "special-case pi not stationary at ({k1},{k2},{alpha})"
            );
            let solved = stationary_distribution(&p, &q).unwrap();
            for (a, b) in special.iter().zip(solved.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-10);
            }
            assert_abs_diff_eq!(special.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn special_case_examples() {
        let pi = special_case_pi(1.0, 1.0, 0.3).unwrap();
        assert_eq!(pi, vec![0.5, 0.5, 0.0, 0.0]);
        // kappa1 = 0: rays of the transparent membrane keep positive mass,
        // the others split proportionally to (1 +- kappa2).
        let pi = special_case_pi(0.0, 0.7, 0.4).unwrap();
        assert_abs_diff_eq!(pi[0], 1.7 / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pi[2], 0.3 / 4.0, epsilon = 1e-12);
        // kappa1 = 1, kappa2 interior: pi2 = 1/2, pi4 = 0, and pi1/pi3
        // balances the flow through ray 2.
        let sol = solve_four_ray(1.0, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(sol.pi[1], 0.5, epsilon = 1e-12);
        assert_eq!(sol.pi[3], 0.0);
        assert_abs_diff_eq!(sol.pi[0] + sol.pi[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            sol.pi[0] / sol.pi[2],
            sol.q_tilde[1] / sol.p_tilde[1],
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(sol.s, 0.241_839_915, epsilon = 1e-6);
        // no special case applies in the interior
        assert!(matches!(
            special_case_pi(0.5, 0.5, 0.5),
            Err(Error::NoSpecialCase { .. })
        ));
    }

    #[test]
    fn theorem_examples() {
        assert_eq!(
            theorem_decision(0.5, 0.5, 0.5).unwrap(),
            Verdict::HitsAlmostSurely
        );
        assert_eq!(
            theorem_decision(0.5, -0.5, 0.5).unwrap(),
            Verdict::DoesNotHit
        );
        assert_eq!(
            theorem_decision(1.0, 1.0, 0.3).unwrap(),
            Verdict::HitsAlmostSurely
        );
        let sol = solve_four_ray(1.0, 1.0, 0.3).unwrap();
        assert_eq!(sol.pi, vec![0.5, 0.5, 0.0, 0.0]);
        assert_eq!(sol.verdict, Verdict::HitsAlmostSurely);
    }

    #[test]
    fn pipeline_agrees_with_theorem_across_full_domain() {
        let kappas = [-1.0, -0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9, 1.0];
        let alphas = [-0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9];
        for &k1 in &kappas {
            for &k2 in &kappas {
                for &alpha in &alphas {
                    let sol = solve_four_ray(k1, k2, alpha).unwrap();
                    let thm = theorem_decision(k1, k2, alpha).unwrap();
                    assert_eq!(
                        sol.verdict, thm,
                        "verdict mismatch at ({k1},{k2},{alpha}): S = {}",
                        sol.s
                    );
                }
            }
        }
    }

    #[test]
    fn negating_any_parameter_flips_the_verdict() {
        let base = (0.5, 0.7, 0.3);
        let s0 = solve_four_ray(base.0, base.1, base.2).unwrap().s;
        assert!(s0 > 0.0);
        for flipped in [
            (-base.0, base.1, base.2),
            (base.0, -base.1, base.2),
            (base.0, base.1, -base.2),
        ] {
            let s1 = solve_four_ray(flipped.0, flipped.1, flipped.2).unwrap().s;
            assert!(s1 < 0.0, "expected sign flip at {flipped:?}, got {s1}");
        }
    }

    proptest! {
        #[test]
        fn closed_form_matches_linear_solve(
            k1 in -0.99f64..0.99,
            k2 in -0.99f64..0.99,
            alpha in -0.99f64..0.99,
        ) {
            prop_assume!(k1 != 0.0 && k2 != 0.0);
            let cfg = build_four_ray_config(k1, k2, alpha).unwrap();
            let (p, q) = transition_probabilities(&cfg).unwrap();
            for k in 0..4 {
                prop_assert!((p[k] + q[k] - 1.0).abs() <= 1e-12);
            }
            let solved = stationary_distribution(&p, &q).unwrap();
            prop_assert!(residual_inf(&solved, &p, &q) <= 1e-10);
            let xi = membrane_angle(alpha).unwrap();
            let (closed, _) = closed_form_pi_four_ray(k1, k2, xi).unwrap();
            for (a, b) in closed.iter().zip(solved.iter()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            let s_generic = statistic_s(&cfg, &solved).unwrap();
            let s_closed = closed_form_s_four_ray(k1, k2, alpha).unwrap();
            prop_assert!((s_generic - s_closed).abs() <= 1e-10);
            let sign_expected = (k1 * k2 * alpha).signum();
            if s_closed != 0.0 {
                prop_assert_eq!(s_closed.signum(), sign_expected);
            }
        }

        #[test]
        fn generic_configs_keep_invariants(
            gaps in proptest::collection::vec(0.05f64..1.0, 3..8),
            seed in 0u64..1_000_000,
        ) {
            // build a config with the sampled relative gaps scaled to 2*pi
            let total: f64 = gaps.iter().sum();
            let mut phi = vec![0.0];
            for g in &gaps[..gaps.len() - 1] {
                phi.push(phi.last().unwrap() + g / total * 2.0 * PI);
            }
            let n = phi.len();
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let gamma: Vec<f64> = (0..n).map(|_| next() * 1.8 - 0.9).collect();
            let theta: Vec<f64> = (0..n).map(|_| (next() - 0.5) * 2.8).collect();
            let cfg = match RayConfig::new(phi, gamma, theta, "prop") {
                Ok(c) => c,
                Err(_) => return Ok(()), // a gap exceeded pi; not a valid chain input
            };
            let (p, q) = transition_probabilities(&cfg).unwrap();
            for k in 0..n {
                prop_assert!((p[k] + q[k] - 1.0).abs() <= 1e-12);
            }
            if let Ok(pi) = stationary_distribution(&p, &q) {
                prop_assert!((pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                prop_assert!(pi.iter().all(|&x| x >= -1e-14));
                prop_assert!(residual_inf(&pi, &p, &q) <= 1e-10);
            }
        }
    }
}
