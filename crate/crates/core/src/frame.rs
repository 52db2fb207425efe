//! Quarklets on `[0, 1]` and their tensor products on the unit square.
//!
//! Level `j0 - 1` holds the generator quarks `φ_{p,j0,k}`, `k ∈ Δ_{j0}`.
//! On level `j >= j0` the translations `m-1 ..= 2^j-m` are inner quarklets
//! built from the CDF filter, the first `m-1` are boundary quarklets whose
//! coefficients span the kernel of a moment system, and the last `m-1` are
//! mirror images of those.

use alloc::vec::Vec;

use crate::index::{translation_range, EnhancedIndex};
use crate::math::powi;
use crate::quadrature::PiecewisePoly;
use crate::spline::{quark_piecewise, quark_unchecked, SplineOrder};
use crate::{linalg, Error, Result};

/// Primal CDF wavelet mask: `ψ = Σ_k b_k φ(2· - k)` with the cardinal
/// generator `φ = N_m(· + ⌊m/2⌋)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CdfFilter {
    order: SplineOrder,
    first: i64,
    taps: Vec<f64>,
}

impl CdfFilter {
    pub fn order(&self) -> SplineOrder {
        self.order
    }

    /// `(k, b_k)` pairs.
    pub fn taps(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.taps
            .iter()
            .enumerate()
            .map(move |(i, &b)| (self.first + i as i64, b))
    }

    /// Support of the cardinal wavelet `ψ`.
    pub fn support(&self) -> (f64, f64) {
        let last = self.first + self.taps.len() as i64 - 1;
        (
            (self.first - self.order.floor_half()) as f64 / 2.0,
            (last + self.order.ceil_half()) as f64 / 2.0,
        )
    }

    /// Cardinal quarklet `ψ_p = Σ_k b_k φ_p(2· - k)`.
    pub fn eval_cardinal_quarklet(&self, p: u32, x: f64) -> f64 {
        let m = self.order.m();
        self.taps()
            .map(|(k, b)| b * crate::spline::eval_quark(m, p, 2.0 * x - k as f64))
            .sum()
    }
}

/// Filter table for the supported orders `(2,2)` and `(3,3)`.
pub fn cdf_filter(order: SplineOrder) -> Result<CdfFilter> {
    let (first, taps): (i64, Vec<f64>) = match (order.m(), order.m_tilde()) {
        (2, 2) => (-1, alloc::vec![0.25, 0.5, -1.5, 0.5, 0.25]),
        (3, 3) => (
            -3,
            [-3.0, -9.0, 7.0, 45.0, -45.0, -7.0, 9.0, 3.0]
                .iter()
                .map(|b| b / 32.0)
                .collect(),
        ),
        (m, m_tilde) => return Err(Error::UnsupportedOrder { m, m_tilde }),
    };
    Ok(CdfFilter { order, first, taps })
}

/// Univariate index `(p, j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UniIndex {
    pub p: u32,
    pub j: u32,
    pub k: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Coefficients of a boundary quarklet in terms of level-`j+1` quarks.
///
/// For the right side the coefficients apply to the mirrored left quarklet,
/// i.e. `ψ_{p,j,k}(x) = ψ_{p,j,2^j-1-k}(1-x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryQuarkletCoeffs {
    pub p: u32,
    pub j: u32,
    pub k: i64,
    pub side: Side,
    /// First level-`j+1` translation of the window.
    pub first: i64,
    pub coeffs: Vec<f64>,
}

/// A resolved univariate frame element: a combination of quarks of one
/// degree on one level, possibly mirrored.
#[derive(Clone, Debug, PartialEq)]
pub struct UniFunction {
    m: u32,
    p: u32,
    level: u32,
    mirrored: bool,
    terms: Vec<(i64, f64)>,
}

impl UniFunction {
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..=1.0).contains(&x) {
            return 0.0;
        }
        let y = if self.mirrored { 1.0 - x } else { x };
        self.terms
            .iter()
            .map(|&(l, c)| c * quark_unchecked(self.m, self.p, self.level, l, y))
            .sum()
    }

    /// Polynomial degree on each cell of the level grid.
    pub fn degree(&self) -> usize {
        (self.m - 1 + self.p) as usize
    }

    /// Grid level on which the function is piecewise polynomial.
    pub fn grid_level(&self) -> u32 {
        self.level
    }

    /// Support as a pair of grid indices `[a, b]` on `grid_level`.
    pub fn support_cells(&self) -> (i64, i64) {
        let n = 1i64 << self.level;
        let m = i64::from(self.m);
        let lo = self.terms.iter().map(|t| t.0.max(0)).min().unwrap_or(0);
        let hi = self
            .terms
            .iter()
            .map(|t| (t.0 + m).min(n))
            .max()
            .unwrap_or(0);
        if self.mirrored {
            (n - hi, n - lo)
        } else {
            (lo, hi)
        }
    }

    pub fn terms(&self) -> &[(i64, f64)] {
        &self.terms
    }
}

/// A quarklet system of fixed order with coarsest level `j0`.
#[derive(Clone, Debug)]
pub struct QuarkletSystem {
    order: SplineOrder,
    j0: u32,
    filter: CdfFilter,
}

impl QuarkletSystem {
    /// Requires a shipped filter and `2^j0 >= m + m̃`, so that the boundary
    /// windows of both sides stay apart.
    pub fn new(order: SplineOrder, j0: u32) -> Result<Self> {
        let filter = cdf_filter(order)?;
        let min = (order.m() + order.m_tilde())
            .next_power_of_two()
            .trailing_zeros();
        if j0 < min {
            return Err(Error::LevelTooCoarse { j: j0, min });
        }
        Ok(Self { order, j0, filter })
    }

    pub fn with_default_level(order: SplineOrder) -> Result<Self> {
        Self::new(order, order.default_j0())
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    pub fn filter(&self) -> &CdfFilter {
        &self.filter
    }

    fn check(&self, idx: UniIndex) -> Result<()> {
        match translation_range(self.order.m(), self.j0, idx.j) {
            Some(r) if r.contains(&idx.k) => Ok(()),
            _ => Err(Error::IndexOutOfRange {
                what: "quarklet",
                j: i64::from(idx.j),
                k: idx.k,
            }),
        }
    }

    /// Inner translations `m-1 ..= 2^j-m` on level `j`.
    pub fn is_inner(&self, j: u32, k: i64) -> bool {
        let m = i64::from(self.order.m());
        j >= self.j0 && k >= m - 1 && k <= (1i64 << j) - m
    }

    /// Inner quarklet `Σ_l b_{l-2k+⌊m/2⌋}/√2 · φ_{p,j+1,l}`.
    fn inner_terms(&self, k: i64) -> Vec<(i64, f64)> {
        let fl = self.order.floor_half();
        let s = core::f64::consts::FRAC_1_SQRT_2;
        self.filter
            .taps()
            .map(|(i, b)| (2 * k + i - fl, b * s))
            .collect()
    }

    pub fn eval_inner_quarklet(&self, p: u32, j: u32, k: i64, x: f64) -> Result<f64> {
        if !self.is_inner(j, k) {
            return Err(Error::IndexOutOfRange {
                what: "inner quarklet",
                j: i64::from(j),
                k,
            });
        }
        Ok(self.expand(UniIndex { p, j, k })?.eval(x))
    }

    /// Moment matrix `∫ x^q φ_{p,j+1,l}` for `q < m̃` over the window of the
    /// left boundary quarklet `k`.
    pub fn boundary_moment_matrix(&self, p: u32, j: u32, k: i64) -> Result<(i64, Vec<Vec<f64>>)> {
        let m = self.order.m();
        let mt = self.order.m_tilde();
        let first = -i64::from(m) + 1 + k;
        let mut rows = alloc::vec![alloc::vec![0.0; mt as usize + 1]; mt as usize];
        for (c, l) in (first..=first + i64::from(mt)).enumerate() {
            let f = quark_piecewise(m, p, j + 1, l)?;
            for (q, row) in rows.iter_mut().enumerate() {
                row[c] = f.moment(q as u32);
            }
        }
        Ok((first, rows))
    }

    /// Boundary quarklet coefficients for translations `0 ..= m-2` (left)
    /// and `2^j-m+1 ..= 2^j-1` (right).
    pub fn solve_boundary_quarklet(
        &self,
        p: u32,
        j: u32,
        k: i64,
    ) -> Result<BoundaryQuarkletCoeffs> {
        let m = i64::from(self.order.m());
        let n = 1i64 << j;
        if j < self.j0 || !(0..n).contains(&k) || self.is_inner(j, k) {
            return Err(Error::IndexOutOfRange {
                what: "boundary quarklet",
                j: i64::from(j),
                k,
            });
        }
        let (side, k_left) = if k <= m - 2 {
            (Side::Left, k)
        } else {
            (Side::Right, n - 1 - k)
        };
        let (first, rows) = self.boundary_moment_matrix(p, j, k_left)?;
        let coeffs = linalg::kernel_vector(&rows)?;
        Ok(BoundaryQuarkletCoeffs {
            p,
            j,
            k,
            side,
            first,
            coeffs,
        })
    }

    /// Resolve `(p, j, k)` into quark terms.
    pub fn expand(&self, idx: UniIndex) -> Result<UniFunction> {
        self.check(idx)?;
        let m = self.order.m();
        let UniIndex { p, j, k } = idx;
        if j + 1 == self.j0 {
            return Ok(UniFunction {
                m,
                p,
                level: self.j0,
                mirrored: false,
                terms: alloc::vec![(k, 1.0)],
            });
        }
        if self.is_inner(j, k) {
            return Ok(UniFunction {
                m,
                p,
                level: j + 1,
                mirrored: false,
                terms: self.inner_terms(k),
            });
        }
        let bq = self.solve_boundary_quarklet(p, j, k)?;
        let terms = bq
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (bq.first + i as i64, c))
            .collect();
        Ok(UniFunction {
            m,
            p,
            level: j + 1,
            mirrored: bq.side == Side::Right,
            terms,
        })
    }

    /// `ψ_{p,j,k}(x)`; zero below level `j0 - 1`.
    pub fn eval_uni(&self, idx: UniIndex, x: f64) -> Result<f64> {
        if idx.j + 1 < self.j0 {
            return Ok(0.0);
        }
        Ok(self.expand(idx)?.eval(x))
    }

    /// `ψ_λ(x1, x2) = ψ_{p1,j1,k1}(x1) ψ_{p2,j2,k2}(x2)`.
    pub fn eval_tensor(&self, lambda: &EnhancedIndex, x1: f64, x2: f64) -> Result<f64> {
        let a = self.eval_uni(
            UniIndex {
                p: lambda.p1,
                j: lambda.j1,
                k: lambda.k1,
            },
            x1,
        )?;
        if a == 0.0 {
            return Ok(0.0);
        }
        Ok(a * self.eval_uni(
            UniIndex {
                p: lambda.p2,
                j: lambda.j2,
                k: lambda.k2,
            },
            x2,
        )?)
    }

    /// `ψ_{p,j,k}` as a piecewise polynomial, for moment computations.
    pub fn piecewise(&self, idx: UniIndex) -> Result<PiecewisePoly<impl Fn(f64) -> f64>> {
        let f = self.expand(idx)?;
        let (a, b) = f.support_cells();
        let h = 1.0 / (1u64 << f.level) as f64;
        let breaks = (a..=b).map(|i| i as f64 * h).collect();
        let deg = f.degree();
        Ok(PiecewisePoly::new(breaks, deg, move |x| f.eval(x)))
    }
}

/// `w_λ = (p1+1)^{δ/2} (p2+1)^{δ/2}`, `δ > 1`.
pub fn weight(lambda: &EnhancedIndex, delta: f64) -> Result<f64> {
    if delta.is_nan() || delta <= 1.0 {
        return Err(Error::InvalidDelta(delta));
    }
    let f = |p: u32| libm::pow(f64::from(p + 1), delta / 2.0);
    Ok(f(lambda.p1) * f(lambda.p2))
}

/// `(x/c)^p` helper used by callers that build their own quark tables.
pub fn monomial(x: f64, c: f64, p: u32) -> f64 {
    powi(x / c, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::Alpha;
    use crate::spline::eval_cardinal_bspline;
    use approx::assert_abs_diff_eq;

    fn sys(m: u32, mt: u32) -> QuarkletSystem {
        QuarkletSystem::with_default_level(SplineOrder::new(m, mt).unwrap()).unwrap()
    }

    #[test]
    fn cdf_support_length() {
        for (m, mt) in [(2, 2), (3, 3)] {
            let f = cdf_filter(SplineOrder::new(m, mt).unwrap()).unwrap();
            let (a, b) = f.support();
            assert_abs_diff_eq!(b - a, f64::from(m + mt - 1));
        }
        assert!(cdf_filter(SplineOrder::new(2, 4).unwrap()).is_err());
    }

    #[test]
    fn cardinal_quarklets_have_vanishing_moments() {
        for (m, mt) in [(2, 2), (3, 3)] {
            let f = cdf_filter(SplineOrder::new(m, mt).unwrap()).unwrap();
            let (a, b) = f.support();
            for p in 0..4 {
                let breaks = crate::quadrature::uniform_breaks(a, b, ((b - a) * 2.0) as usize);
                let g = PiecewisePoly::new(breaks, (m - 1 + p) as usize, |x| {
                    f.eval_cardinal_quarklet(p, x)
                });
                for q in 0..mt {
                    assert!(
                        g.moment(q).abs() < 1e-12,
                        "m={m} p={p} q={q}: {}",
                        g.moment(q)
                    );
                }
            }
        }
    }

    #[test]
    fn inner_quarklet_is_dilated_cardinal_quarklet() {
        for (m, mt) in [(2, 2), (3, 3)] {
            let s = sys(m, mt);
            let j = s.j0() + 1;
            let scale = (1u64 << j) as f64;
            for k in (m as i64 - 1)..=((1i64 << j) - m as i64) {
                for p in 0..3 {
                    for i in 0..41 {
                        let x = i as f64 / 41.0 + 0.003;
                        let a = s.eval_inner_quarklet(p, j, k, x).unwrap();
                        let b = scale.sqrt()
                            * s.filter().eval_cardinal_quarklet(p, scale * x - k as f64);
                        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn inner_wavelet_expands_in_generators() {
        // p = 0: Σ_l b_{j,k,l} φ_{j+1,l} with φ_{j+1,l} = 2^{(j+1)/2} N_m(2^{j+1}x - l)
        let s = sys(2, 2);
        let j = 3;
        let k = 3;
        for i in 0..30 {
            let x = i as f64 / 30.0;
            let direct: f64 = s
                .filter()
                .taps()
                .map(|(t, b)| {
                    let l = 2 * k + t - 1;
                    b / 2f64.sqrt() * 4.0 * eval_cardinal_bspline(2, 16.0 * x - l as f64)
                })
                .sum();
            assert_abs_diff_eq!(
                s.eval_inner_quarklet(0, j, k, x).unwrap(),
                direct,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn boundary_coefficients_are_normalized_kernel_vectors() {
        for (m, mt) in [(2, 2), (3, 3)] {
            let s = sys(m, mt);
            for p in 0..4 {
                for k in 0..=(i64::from(m) - 2) {
                    let bq = s.solve_boundary_quarklet(p, s.j0(), k).unwrap();
                    assert_eq!(bq.coeffs.len(), mt as usize + 1);
                    let n: f64 = bq.coeffs.iter().map(|c| c * c).sum();
                    assert_abs_diff_eq!(n, 1.0, epsilon = 1e-13);
                    let first = bq.coeffs.iter().find(|c| c.abs() > 1e-12).unwrap();
                    assert!(*first > 0.0);
                    let (_, rows) = s.boundary_moment_matrix(p, s.j0(), k).unwrap();
                    for row in rows {
                        let r: f64 = row.iter().zip(&bq.coeffs).map(|(a, b)| a * b).sum();
                        assert!(r.abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn right_boundary_mirrors_left() {
        let s = sys(3, 3);
        let j = s.j0();
        let n = 1i64 << j;
        for k in 0..2 {
            for i in 0..50 {
                let x = i as f64 / 50.0;
                let l = s.eval_uni(UniIndex { p: 1, j, k }, x).unwrap();
                let r = s
                    .eval_uni(
                        UniIndex {
                            p: 1,
                            j,
                            k: n - 1 - k,
                        },
                        1.0 - x,
                    )
                    .unwrap();
                assert_abs_diff_eq!(l, r, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn generator_level_and_zero_below() {
        let s = sys(2, 2);
        let g = s.eval_uni(UniIndex { p: 0, j: 2, k: -1 }, 0.0).unwrap();
        assert_abs_diff_eq!(g, 8f64.sqrt(), epsilon = 1e-14);
        assert_eq!(s.eval_uni(UniIndex { p: 0, j: 1, k: 0 }, 0.3).unwrap(), 0.0);
        assert!(s.eval_uni(UniIndex { p: 0, j: 2, k: 8 }, 0.3).is_err());
        assert!(s.eval_uni(UniIndex { p: 0, j: 3, k: -1 }, 0.3).is_err());
    }

    #[test]
    fn tensor_zero_below_coarsest_level() {
        let s = sys(2, 2);
        let l = EnhancedIndex::new(0, 0, 0, 0, 3, 2, Alpha::Both);
        assert_eq!(s.eval_tensor(&l, 0.2, 0.3).unwrap(), 0.0);
        let l = EnhancedIndex::new(1, 3, 2, 0, 3, 3, Alpha::Both);
        let v = s.eval_tensor(&l, 0.3, 0.45).unwrap();
        let a = s.eval_uni(UniIndex { p: 1, j: 3, k: 2 }, 0.3).unwrap();
        let b = s.eval_uni(UniIndex { p: 0, j: 3, k: 3 }, 0.45).unwrap();
        assert_abs_diff_eq!(v, a * b, epsilon = 1e-15);
    }

    #[test]
    fn weights() {
        let l = EnhancedIndex::new(1, 3, 0, 2, 3, 0, Alpha::Both);
        assert_abs_diff_eq!(weight(&l, 2.0).unwrap(), 6.0, epsilon = 1e-14);
        assert!(weight(&l, 1.0).is_err());
    }
}
