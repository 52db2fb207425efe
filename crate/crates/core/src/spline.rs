//! Cardinal B-splines, Schoenberg B-splines on `[0, 1]` and quarks.
//!
//! Quarks are B-splines multiplied by a monomial anchored inside their
//! support. On the interval the left boundary splines use a monomial anchored
//! at zero and the right ones are mirror images of the left ones.

use alloc::vec::Vec;

use crate::math::{binomial, half_pow2, pow2, powi};
use crate::quadrature::PiecewisePoly;
use crate::{Error, Result};

/// Primal order `m` and dual order `m̃` of a biorthogonal spline system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SplineOrder {
    m: u32,
    m_tilde: u32,
}

impl SplineOrder {
    pub fn new(m: u32, m_tilde: u32) -> Result<Self> {
        if m < 2 || m_tilde < m || !(m + m_tilde).is_multiple_of(2) {
            return Err(Error::InvalidOrder { m, m_tilde });
        }
        Ok(Self { m, m_tilde })
    }

    pub fn m(self) -> u32 {
        self.m
    }

    pub fn m_tilde(self) -> u32 {
        self.m_tilde
    }

    /// `⌊m/2⌋`
    pub fn floor_half(self) -> i64 {
        i64::from(self.m / 2)
    }

    /// `⌈m/2⌉`
    pub fn ceil_half(self) -> i64 {
        i64::from(self.m.div_ceil(2))
    }

    /// Smallest `j` with `2^j >= 2(m + m̃)`.
    pub fn default_j0(self) -> u32 {
        let target = 2 * u64::from(self.m + self.m_tilde);
        let mut j = 0;
        while (1u64 << j) < target {
            j += 1;
        }
        j
    }
}

/// Cardinal B-spline `N_m`, supported on `[0, m]`, right-continuous.
pub fn eval_cardinal_bspline(m: u32, x: f64) -> f64 {
    if m == 0 || !(0.0..f64::from(m)).contains(&x) {
        return 0.0;
    }
    let m = m as usize;
    // v[i] = N_r(x - i)
    let mut v: Vec<f64> = (0..m)
        .map(|i| {
            let y = x - i as f64;
            if (0.0..1.0).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for r in 2..=m {
        let rf = r as f64;
        for i in 0..=(m - r) {
            let y = x - i as f64;
            v[i] = (y * v[i] + (rf - y) * v[i + 1]) / (rf - 1.0);
        }
    }
    v[0]
}

/// Cardinal quark `φ_p(x) = (x/⌈m/2⌉)^p N_m(x + ⌊m/2⌋)`.
pub fn eval_quark(m: u32, p: u32, x: f64) -> f64 {
    let fl = f64::from(m / 2);
    let ce = f64::from(m.div_ceil(2));
    powi(x / ce, p) * eval_cardinal_bspline(m, x + fl)
}

/// Schoenberg knot sequence of order `m` on level `j`.
///
/// `t_k = 0` for `k <= 0`, `t_k = 2^-j k` in between and `t_k = 1` for
/// `k >= 2^j`, with `k` running over `-m+1 ..= 2^j+m-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    m: u32,
    j: u32,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(m: u32, j: u32) -> Self {
        let n = 1i64 << j;
        let lo = -i64::from(m) + 1;
        let hi = n + i64::from(m) - 1;
        let knots = (lo..=hi).map(|k| knot(j, k)).collect();
        Self { m, j, knots }
    }

    pub fn level(&self) -> u32 {
        self.j
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    /// `t_k` for `k` in `-m+1 ..= 2^j+m-1`.
    pub fn get(&self, k: i64) -> f64 {
        self.knots[(k + i64::from(self.m) - 1) as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.knots
    }
}

fn knot(j: u32, k: i64) -> f64 {
    let n = 1i64 << j;
    if k <= 0 {
        0.0
    } else if k >= n {
        1.0
    } else {
        k as f64 / pow2(j)
    }
}

/// Range `Δ_j = {-m+1, …, 2^j-1}` of Schoenberg translations.
pub fn delta_range(m: u32, j: u32) -> core::ops::RangeInclusive<i64> {
    (1 - i64::from(m))..=((1i64 << j) - 1)
}

fn check_schoenberg(m: u32, j: u32, k: i64) -> Result<()> {
    if (1u64 << j) < u64::from(m) {
        return Err(Error::LevelTooCoarse {
            j,
            min: m.next_power_of_two().trailing_zeros(),
        });
    }
    if !delta_range(m, j).contains(&k) {
        return Err(Error::IndexOutOfRange {
            what: "Schoenberg",
            j: i64::from(j),
            k,
        });
    }
    Ok(())
}

/// Schoenberg B-spline `B^m_{j,k}` on `[0, 1]`, via divided differences of
/// the truncated power `(· - x)_+^{m-1}` over `t_k, …, t_{k+m}`.
///
/// At `x = 1` the left limit is returned so the last spline equals one there.
pub fn eval_schoenberg(m: u32, j: u32, k: i64, x: f64) -> Result<f64> {
    check_schoenberg(m, j, k)?;
    Ok(schoenberg_unchecked(m, j, k, x))
}

pub(crate) fn schoenberg_unchecked(m: u32, j: u32, k: i64, x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    if x == 1.0 {
        let mirrored = (1i64 << j) - i64::from(m) - k;
        return schoenberg_unchecked(m, j, mirrored, 0.0);
    }
    let t: Vec<f64> = (0..=i64::from(m)).map(|i| knot(j, k + i)).collect();
    if t[m as usize] <= x || t[0] > x {
        return 0.0;
    }
    let deg = m - 1;
    // truncated power derivative: d^r/dt^r (t - x)_+^deg / r!
    let tp = |tt: f64, r: u32| -> f64 {
        if r > deg {
            return 0.0;
        }
        let e = deg - r;
        let base = tt - x;
        let val = if e == 0 {
            if base > 0.0 {
                1.0
            } else {
                0.0
            }
        } else if base > 0.0 {
            powi(base, e)
        } else {
            0.0
        };
        binomial(deg, r) * val
    };
    let mut dd: Vec<f64> = t.iter().map(|&tt| tp(tt, 0)).collect();
    for ord in 1..=m as usize {
        for i in 0..=(m as usize - ord) {
            let span = t[i + ord] - t[i];
            dd[i] = if span == 0.0 {
                tp(t[i], ord as u32)
            } else {
                (dd[i + 1] - dd[i]) / span
            };
        }
    }
    (t[m as usize] - t[0]) * dd[0]
}

/// Normalized generator `φ_{j,k} = 2^{j/2} B^m_{j,k}`.
pub fn eval_generator(m: u32, j: u32, k: i64, x: f64) -> Result<f64> {
    Ok(half_pow2(j) * eval_schoenberg(m, j, k, x)?)
}

/// Quark `φ_{p,j,k}` on `[0, 1]`.
pub fn eval_schoenberg_quark(m: u32, p: u32, j: u32, k: i64, x: f64) -> Result<f64> {
    check_schoenberg(m, j, k)?;
    Ok(quark_unchecked(m, p, j, k, x))
}

pub(crate) fn quark_unchecked(m: u32, p: u32, j: u32, k: i64, x: f64) -> f64 {
    let n = 1i64 << j;
    let mi = i64::from(m);
    if k > n - mi {
        return quark_unchecked(m, p, j, n - mi - k, 1.0 - x);
    }
    let scale = pow2(j);
    let b = schoenberg_unchecked(m, j, k, x);
    if b == 0.0 {
        return 0.0;
    }
    let mono = if k < 0 {
        scale * x / (k + mi) as f64
    } else {
        let fl = (m / 2) as f64;
        let ce = m.div_ceil(2) as f64;
        (scale * x - k as f64 - fl) / ce
    };
    powi(mono, p) * half_pow2(j) * b
}

/// Support `[t_k, t_{k+m}]` of `φ_{p,j,k}`.
pub fn quark_support(m: u32, j: u32, k: i64) -> (f64, f64) {
    (knot(j, k), knot(j, k + i64::from(m)))
}

/// `φ_{p,j,k}` as a piecewise polynomial on the level-`j` grid.
pub fn quark_piecewise(
    m: u32,
    p: u32,
    j: u32,
    k: i64,
) -> Result<PiecewisePoly<impl Fn(f64) -> f64>> {
    check_schoenberg(m, j, k)?;
    let mut breaks: Vec<f64> = (0..=i64::from(m)).map(|i| knot(j, k + i)).collect();
    breaks.dedup();
    Ok(PiecewisePoly::new(breaks, (m - 1 + p) as usize, move |x| {
        quark_unchecked(m, p, j, k, x)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Cox–de Boor recursion on the same knot sequence, used as an oracle.
    fn cox_de_boor(m: u32, j: u32, k: i64, x: f64) -> f64 {
        fn rec(t: &dyn Fn(i64) -> f64, i: i64, r: u32, x: f64) -> f64 {
            if r == 1 {
                return if t(i) <= x && x < t(i + 1) { 1.0 } else { 0.0 };
            }
            let mut s = 0.0;
            let d1 = t(i + i64::from(r) - 1) - t(i);
            if d1 > 0.0 {
                s += (x - t(i)) / d1 * rec(t, i, r - 1, x);
            }
            let d2 = t(i + i64::from(r)) - t(i + 1);
            if d2 > 0.0 {
                s += (t(i + i64::from(r)) - x) / d2 * rec(t, i + 1, r - 1, x);
            }
            s
        }
        rec(&|i| knot(j, i), k, m, x)
    }

    #[test]
    fn cardinal_examples() {
        assert_abs_diff_eq!(eval_cardinal_bspline(3, 1.5), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_cardinal_bspline(2, 1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_cardinal_bspline(1, 1.0), 0.0);
        assert_abs_diff_eq!(eval_cardinal_bspline(1, 0.0), 1.0);
    }

    #[test]
    fn cardinal_partition_of_unity() {
        for m in 1..6 {
            for s in 0..40 {
                let x = 3.0 + s as f64 * 0.0237;
                let sum: f64 = (-10..10)
                    .map(|i| eval_cardinal_bspline(m, x - f64::from(i)))
                    .sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn cardinal_matches_convolution() {
        // N_m(x) = ∫_0^1 N_{m-1}(x - t) dt
        let g = crate::quadrature::GaussLegendre::new(12);
        for m in 2..5 {
            for s in 0..30 {
                let x = s as f64 * f64::from(m) / 30.0 + 0.013;
                let mut conv = 0.0;
                // split at the breakpoints of t -> N_{m-1}(x - t)
                let frac = x - libm::floor(x);
                for (a, b) in [(0.0, frac), (frac, 1.0)] {
                    if b > a {
                        conv += g.integrate(a, b, |t| eval_cardinal_bspline(m - 1, x - t));
                    }
                }
                assert_abs_diff_eq!(eval_cardinal_bspline(m, x), conv, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn quark_moments() {
        let f = PiecewisePoly::new(alloc::vec![0.0, 1.0, 2.0], 1, |x| {
            eval_cardinal_bspline(2, x)
        });
        assert_abs_diff_eq!(f.moment(0), 1.0, epsilon = 1e-15);
        let q = PiecewisePoly::new(alloc::vec![-1.0, 0.0, 1.0], 2, |x| eval_quark(2, 1, x));
        assert_abs_diff_eq!(q.moment(0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn schoenberg_examples() {
        assert_abs_diff_eq!(
            eval_schoenberg(2, 2, -1, 0.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(eval_schoenberg(2, 2, 1, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_schoenberg(2, 2, 3, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            eval_schoenberg(3, 3, -2, 0.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(eval_schoenberg(2, 2, 4, 0.5).is_err());
        assert!(eval_schoenberg(2, 2, -2, 0.5).is_err());
    }

    #[test]
    fn interior_quark_example() {
        let x = 7.0 / 16.0;
        let got = eval_schoenberg_quark(2, 2, 3, 3, x).unwrap();
        let want = 2f64.powf(1.5) * 0.25 * 0.5;
        assert_abs_diff_eq!(got, want, epsilon = 1e-14);
    }

    #[test]
    fn left_boundary_quark_monomial() {
        // k = -1, m = 2, j = 3: (8x / 1)^p φ_{3,-1}
        let x = 0.05;
        let base = eval_generator(2, 3, -1, x).unwrap();
        let got = eval_schoenberg_quark(2, 2, 3, -1, x).unwrap();
        assert_abs_diff_eq!(got, (8.0 * x) * (8.0 * x) * base, epsilon = 1e-14);
    }

    #[test]
    fn schoenberg_matches_cox_de_boor() {
        for m in 2..=4 {
            for j in 2..=6 {
                if (1 << j) < m {
                    continue;
                }
                for k in delta_range(m, j) {
                    for s in 0..97 {
                        let x = s as f64 / 97.0 + 1e-3;
                        if x >= 1.0 {
                            continue;
                        }
                        let a = eval_schoenberg(m, j, k, x).unwrap();
                        let b = cox_de_boor(m, j, k, x);
                        assert!((a - b).abs() < 1e-10, "m={m} j={j} k={k} x={x}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn schoenberg_partition_of_unity_on_closed_interval() {
        for m in 2..=4 {
            for j in 2..=5 {
                for s in 0..=64 {
                    let x = s as f64 / 64.0;
                    let sum: f64 = delta_range(m, j)
                        .map(|k| eval_schoenberg(m, j, k, x).unwrap())
                        .sum();
                    assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn interior_schoenberg_is_translated_cardinal() {
        for m in 2..=4u32 {
            let j = 4;
            for k in 0..=((1i64 << j) - i64::from(m)) {
                for s in 0..50 {
                    let x = s as f64 / 50.0;
                    let a = eval_schoenberg(m, j, k, x).unwrap();
                    let b = eval_cardinal_bspline(m, 16.0 * x - k as f64);
                    assert_abs_diff_eq!(a, b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn right_quarks_mirror_left_ones() {
        for m in 2..=3u32 {
            let j = 3;
            for k in 1..m as i64 {
                let right = (1i64 << j) - i64::from(m) + k;
                for s in 1..40 {
                    let x = s as f64 / 40.0;
                    let a = eval_schoenberg_quark(m, 2, j, right, x).unwrap();
                    let b = eval_schoenberg_quark(m, 2, j, -k, 1.0 - x).unwrap();
                    assert_abs_diff_eq!(a, b, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn default_j0_policy() {
        assert_eq!(SplineOrder::new(2, 2).unwrap().default_j0(), 3);
        assert_eq!(SplineOrder::new(3, 3).unwrap().default_j0(), 4);
        assert!(SplineOrder::new(2, 3).is_err());
        assert!(SplineOrder::new(3, 1).is_err());
    }
}
