//! Gauss–Legendre quadrature and exact moments of piecewise polynomials.

use alloc::vec::Vec;

use crate::math::{abs, powi};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`, exact for degree `2n - 1`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on P_n.
            let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if abs(dx) < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Number of points needed to integrate polynomials of degree `deg` exactly.
    pub fn points_for_degree(deg: usize) -> usize {
        deg.div_ceil(2).max(1)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_a^b f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Quadrature nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, w * h))
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A function that is a polynomial of degree at most `degree` between
/// consecutive breakpoints and vanishes outside `[breaks[0], breaks[last]]`.
#[derive(Clone, Debug)]
pub struct PiecewisePoly<F> {
    pub breaks: Vec<f64>,
    pub degree: usize,
    pub f: F,
}

impl<F: Fn(f64) -> f64> PiecewisePoly<F> {
    pub fn new(breaks: Vec<f64>, degree: usize, f: F) -> Self {
        Self { breaks, degree, f }
    }

    /// `∫ x^q f(x) dx`, exact up to rounding.
    pub fn moment(&self, q: u32) -> f64 {
        let deg = self.degree + q as usize;
        let rule = GaussLegendre::new(deg.div_ceil(2) + 1);
        let mut s = 0.0;
        for w in self.breaks.windows(2) {
            if w[1] > w[0] {
                s += rule.integrate(w[0], w[1], |x| powi(x, q) * (self.f)(x));
            }
        }
        s
    }
}

/// Equally spaced breakpoints `a, a + h, …, b`.
pub fn uniform_breaks(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let h = (b - a) / cells as f64;
    (0..=cells).map(|i| a + h * i as f64).collect()
}
