//! Decay and leakage curve fits by weighted Levenberg-Marquardt.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub r: f64,
    pub p_fail: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(rename = "A")]
    pub a: f64,
    pub epsilon: f64,
    pub tau: f64,
    /// Covariance of (A, epsilon).
    pub cov: [[f64; 2]; 2],
    pub chi2: f64,
}

impl FitResult {
    pub fn sigma_a(&self) -> f64 {
        self.cov[0][0].sqrt()
    }

    pub fn sigma_epsilon(&self) -> f64 {
        self.cov[1][1].sqrt()
    }
}

pub fn tau_of(epsilon: f64) -> f64 {
    -1.0 / (1.0 - 2.0 * epsilon).ln()
}

/// `P(r) = (1 - A exp(-r/tau)) / 2` with `exp(-1/tau) = 1 - 2 epsilon`.
pub fn decay_model(a: f64, epsilon: f64, r: f64) -> f64 {
    0.5 * (1.0 - a * (1.0 - 2.0 * epsilon).powf(r))
}

fn decay_jacobian(a: f64, epsilon: f64, r: f64) -> [f64; 2] {
    let q = 1.0 - 2.0 * epsilon;
    let qr = q.powf(r);
    let d_eps = if r == 0.0 { 0.0 } else { a * r * q.powf(r - 1.0) };
    [-0.5 * qr, d_eps]
}

struct Problem<'a> {
    n: usize,
    /// Weighted residual and its gradient for point `i`.
    eval: &'a dyn Fn(&Vector2<f64>, usize) -> (f64, [f64; 2]),
    project: &'a dyn Fn(Vector2<f64>) -> Vector2<f64>,
}

struct Solution {
    x: Vector2<f64>,
    cost: f64,
    jtj: Matrix2<f64>,
}

fn normal_equations(p: &Problem, x: &Vector2<f64>) -> (f64, Matrix2<f64>, Vector2<f64>) {
    let mut cost = 0.0;
    let mut jtj = Matrix2::zeros();
    let mut jtr = Vector2::zeros();
    for i in 0..p.n {
        let (r, g) = (p.eval)(x, i);
        let g = Vector2::new(g[0], g[1]);
        cost += r * r;
        jtj += g * g.transpose();
        jtr += g * r;
    }
    (cost, jtj, jtr)
}

fn levenberg_marquardt(p: &Problem, start: Vector2<f64>) -> Solution {
    let mut x = (p.project)(start);
    let (mut cost, mut jtj, mut jtr) = normal_equations(p, &x);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        if cost == 0.0 {
            break;
        }
        let mut damped = jtj;
        for k in 0..2 {
            damped[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
        }
        let Some(step) = damped.lu().solve(&(-jtr)) else {
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
            continue;
        };
        let trial = (p.project)(x + step);
        let (c, a, b) = normal_equations(p, &trial);
        if c.is_finite() && c <= cost {
            let moved = (trial - x).abs();
            let small = moved[0] <= 1e-15 * x[0].abs().max(1e-300) && moved[1] <= 1e-15 * x[1].abs().max(1e-300);
            let flat = cost - c <= 1e-30 * cost;
            x = trial;
            cost = c;
            jtj = a;
            jtr = b;
            lambda = (lambda / 3.0).max(1e-12);
            if small || (flat && lambda <= 1e-12) {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e20 {
                break;
            }
        }
    }
    Solution { x, cost, jtj }
}

fn best_of(p: &Problem, starts: &[Vector2<f64>]) -> Result<Solution> {
    starts
        .iter()
        .map(|s| levenberg_marquardt(p, *s))
        .filter(|s| s.cost.is_finite() && s.x.iter().all(|v| v.is_finite()))
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
        .ok_or_else(|| Error::Fit("no start produced a finite fit".into()))
}

/// Fits the per-round decay to `(r, P_fail, stderr)` points.
pub fn fit_error_per_round(points: &[FitPoint]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    let mut rs: Vec<f64> = points.iter().map(|p| p.r).collect();
    rs.sort_by(f64::total_cmp);
    if rs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("round values must be distinct".into()));
    }
    if points.iter().any(|p| !(p.r.is_finite() && p.p_fail.is_finite() && p.std_err.is_finite() && p.r >= 0.0)) {
        return Err(Error::Fit("non-finite or negative input".into()));
    }
    let floor = points
        .iter()
        .map(|p| p.std_err)
        .filter(|&s| s > 0.0)
        .min_by(f64::total_cmp)
        .unwrap_or(1.0);
    let w: Vec<f64> = points.iter().map(|p| 1.0 / if p.std_err > 0.0 { p.std_err } else { floor }).collect();

    let eval = |x: &Vector2<f64>, i: usize| {
        let pt = &points[i];
        let r = (decay_model(x[0], x[1], pt.r) - pt.p_fail) * w[i];
        let g = decay_jacobian(x[0], x[1], pt.r);
        (r, [g[0] * w[i], g[1] * w[i]])
    };
    let project = |x: Vector2<f64>| Vector2::new(x[0].clamp(-2.0, 2.0), x[1].clamp(0.0, 0.5 - 1e-12));
    let problem = Problem { n: points.len(), eval: &eval, project: &project };

    let first = points.iter().min_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
    let a0 = (1.0 - 2.0 * first.p_fail).clamp(0.05, 1.0);
    let starts: Vec<Vector2<f64>> = [0.005, 0.02, 0.06, 0.15, 0.3].iter().map(|&e| Vector2::new(a0, e)).collect();
    let sol = best_of(&problem, &starts)?;

    let cov = sol
        .jtj
        .try_inverse()
        .ok_or_else(|| Error::Fit(format!("singular normal matrix at A={}, epsilon={}", sol.x[0], sol.x[1])))?;
    let (a, epsilon) = (sol.x[0], sol.x[1]);
    Ok(FitResult {
        a,
        epsilon,
        tau: tau_of(epsilon),
        cov: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        chi2: sol.cost,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageFit {
    pub gamma_l: f64,
    pub gamma_s: f64,
}

pub fn leakage_model(gamma_l: f64, gamma_s: f64, m: f64) -> f64 {
    let s = gamma_l + gamma_s;
    if s == 0.0 {
        return 0.0;
    }
    gamma_l / s * -(-s * m).exp_m1()
}

fn leakage_jacobian(gl: f64, gs: f64, m: f64) -> [f64; 2] {
    let s = gl + gs;
    if s == 0.0 {
        return [m, 0.0];
    }
    let g = -(-s * m).exp_m1();
    let e = (-s * m).exp();
    let common = -gl * g / (s * s) + gl / s * m * e;
    [g / s + common, common]
}

/// Fits leakage and seepage rates to `(m, p_leak)` points.
pub fn fit_leakage(points: &[(f64, f64)]) -> Result<LeakageFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Fit("m must be strictly increasing".into()));
    }
    if points.iter().any(|&(m, p)| !(m.is_finite() && p.is_finite())) {
        return Err(Error::Fit("non-finite input".into()));
    }
    let eval = |x: &Vector2<f64>, i: usize| {
        let (m, p) = points[i];
        (leakage_model(x[0], x[1], m) - p, leakage_jacobian(x[0], x[1], m))
    };
    let project = |x: Vector2<f64>| Vector2::new(x[0].max(0.0), x[1].max(0.0));
    let problem = Problem { n: points.len(), eval: &eval, project: &project };

    let m_max = points.last().unwrap().0;
    let plateau = points.last().unwrap().1.clamp(0.0, 1.0);
    let starts: Vec<Vector2<f64>> = [0.3, 1.0, 3.0, 10.0, 30.0]
        .iter()
        .map(|&k| {
            let s = k / m_max;
            Vector2::new(plateau * s, (1.0 - plateau) * s)
        })
        .collect();
    let sol = best_of(&problem, &starts)?;
    Ok(LeakageFit { gamma_l: sol.x[0], gamma_s: sol.x[1] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(a: f64, e: f64) -> Vec<FitPoint> {
        (0..=10)
            .map(|r| {
                let p = decay_model(a, e, r as f64);
                FitPoint { r: r as f64, p_fail: p, std_err: (p * (1.0 - p) / 5e5).sqrt() }
            })
            .collect()
    }

    #[test]
    fn decay_at_zero_rounds() {
        assert!((decay_model(0.9, 0.1, 0.0) - 0.05).abs() < 1e-15);
        assert!((tau_of(0.05) - 1.0 / -(0.9f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        for (a, e, r) in [(0.9, 0.05, 3.0), (0.7, 0.2, 0.0), (1.0, 0.01, 7.0)] {
            let g = decay_jacobian(a, e, r);
            let h = 1e-7;
            let da = (decay_model(a + h, e, r) - decay_model(a - h, e, r)) / (2.0 * h);
            let de = (decay_model(a, e + h, r) - decay_model(a, e - h, r)) / (2.0 * h);
            assert!((g[0] - da).abs() < 1e-7 && (g[1] - de).abs() < 1e-7);
        }
        for (gl, gs, m) in [(6.54e-3, 0.05, 10.0), (0.1, 0.0, 2.0)] {
            let g = leakage_jacobian(gl, gs, m);
            let h = 1e-8;
            let dl = (leakage_model(gl + h, gs, m) - leakage_model(gl - h, gs, m)) / (2.0 * h);
            let ds = (leakage_model(gl, gs + h, m) - leakage_model(gl, gs - h, m)) / (2.0 * h);
            assert!((g[0] - dl).abs() < 1e-6 && (g[1] - ds).abs() < 1e-6);
        }
    }

    #[test]
    fn recovers_noiseless_decay() {
        let f = fit_error_per_round(&exact(0.95, 0.05)).unwrap();
        assert!((f.a - 0.95).abs() < 1e-9 && (f.epsilon - 0.05).abs() < 1e-9, "{f:?}");
        assert!((f.tau - tau_of(0.05)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_error_per_round(&exact(0.9, 0.1)[..2]).is_err());
        let mut p = exact(0.9, 0.1);
        p[1].r = 0.0;
        assert!(fit_error_per_round(&p).is_err());
        assert!(fit_leakage(&[(1.0, 0.0), (1.0, 0.1), (2.0, 0.2)]).is_err());
    }

    #[test]
    fn zero_stderr_is_floored() {
        let mut p = exact(0.95, 0.05);
        p[0].std_err = 0.0;
        let f = fit_error_per_round(&p).unwrap();
        assert!((f.epsilon - 0.05).abs() < 1e-9);
    }

    #[test]
    fn recovers_noiseless_leakage() {
        let pts: Vec<(f64, f64)> = (1..=70).map(|m| (m as f64, leakage_model(6.54e-3, 0.05, m as f64))).collect();
        let f = fit_leakage(&pts).unwrap();
        assert!((f.gamma_l - 6.54e-3).abs() < 1e-6 && (f.gamma_s - 0.05).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn zero_leakage() {
        let pts: Vec<(f64, f64)> = (1..=20).map(|m| (m as f64, 0.0)).collect();
        assert!(fit_leakage(&pts).unwrap().gamma_l.abs() < 1e-9);
    }
}
