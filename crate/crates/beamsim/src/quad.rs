//! Adaptive tensor-product Gauss-Legendre quadrature.
//!
//! Panels are rectangles; callers pre-split their domains so that any
//! integrand discontinuity (flipped-mode sign changes at x = 0 or y = 0)
//! lies on a panel edge, never in a panel interior.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes and weights by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Chebyshev initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // evaluate P_n and P_n' by recurrence
                let mut p0 = 1.0;
                let mut p1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn rule_low() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(16))
}

fn rule_high() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(32))
}

fn fixed_1d(f: &impl Fn(f64) -> f64, a: f64, b: f64, rule: &GaussRule) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        sum += w * f(mid + half * t);
    }
    sum * half
}

/// Adaptive 1D integral of `f` over [a, b] to absolute tolerance `tol`.
/// Returns (value, error estimate).
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    let mut stack = vec![(a, b, tol)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi, t)) = stack.pop() {
        panels += 1;
        if panels > 20_000 {
            return Err(Error::QuadratureNotConverged {
                tol,
                achieved: err_total + t,
            });
        }
        let coarse = fixed_1d(&f, lo, hi, rule_low());
        let fine = fixed_1d(&f, lo, hi, rule_high());
        let err = (fine - coarse).abs();
        if err <= t || (hi - lo) < 1e-13 * (b - a).abs() {
            total += fine;
            err_total += err;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, t / 2.0));
            stack.push((mid, hi, t / 2.0));
        }
    }
    Ok((total, err_total))
}

/// Axis-aligned rectangle panel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        assert!(x0 <= x1 && y0 <= y1, "rect bounds must be ordered");
        Rect { x0, x1, y0, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Split at x = 0 and y = 0 so no piece straddles either axis.
    pub fn split_at_axes(&self) -> Vec<Rect> {
        let xs = split_interval(self.x0, self.x1);
        let ys = split_interval(self.y0, self.y1);
        let mut out = Vec::new();
        for &(x0, x1) in &xs {
            for &(y0, y1) in &ys {
                out.push(Rect::new(x0, x1, y0, y1));
            }
        }
        out
    }
}

fn split_interval(a: f64, b: f64) -> Vec<(f64, f64)> {
    if a < 0.0 && b > 0.0 {
        vec![(a, 0.0), (0.0, b)]
    } else {
        vec![(a, b)]
    }
}

fn fixed_2d(f: &impl Fn(f64, f64) -> f64, r: &Rect, rule: &GaussRule) -> f64 {
    let xm = 0.5 * (r.x0 + r.x1);
    let xh = 0.5 * (r.x1 - r.x0);
    let ym = 0.5 * (r.y0 + r.y1);
    let yh = 0.5 * (r.y1 - r.y0);
    let mut sum = 0.0;
    for (&tx, &wx) in rule.nodes.iter().zip(&rule.weights) {
        let x = xm + xh * tx;
        let mut row = 0.0;
        for (&ty, &wy) in rule.nodes.iter().zip(&rule.weights) {
            row += wy * f(x, ym + yh * ty);
        }
        sum += wx * row;
    }
    sum * xh * yh
}

/// Adaptive 2D integral of `f` over `rect` to absolute tolerance `tol`.
/// Returns (value, error estimate). Panels are subdivided in quads until the
/// embedded 16/32-point estimates agree.
pub fn integrate_2d(f: impl Fn(f64, f64) -> f64, rect: Rect, tol: f64) -> Result<(f64, f64)> {
    let mut stack = vec![(rect, tol)];
    let mut total = 0.0;
    let mut err_total = 0.0;
    let mut panels = 0usize;
    while let Some((r, t)) = stack.pop() {
        panels += 1;
        if panels > 40_000 {
            return Err(Error::QuadratureNotConverged {
                tol,
                achieved: err_total + t,
            });
        }
        let coarse = fixed_2d(&f, &r, rule_low());
        let fine = fixed_2d(&f, &r, rule_high());
        let err = (fine - coarse).abs();
        if err <= t || r.area() < 1e-24 * rect.area() {
            total += fine;
            err_total += err;
        } else {
            let xm = 0.5 * (r.x0 + r.x1);
            let ym = 0.5 * (r.y0 + r.y1);
            stack.push((Rect::new(r.x0, xm, r.y0, ym), t / 4.0));
            stack.push((Rect::new(xm, r.x1, r.y0, ym), t / 4.0));
            stack.push((Rect::new(r.x0, xm, ym, r.y1), t / 4.0));
            stack.push((Rect::new(xm, r.x1, ym, r.y1), t / 4.0));
        }
    }
    Ok((total, err_total))
}
