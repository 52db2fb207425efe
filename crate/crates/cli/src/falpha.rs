//! The anisotropic test case `f_α(x1, x2) = x1^α`.
//!
//! A hand-built quarklet tree refines the leftmost column with `a1` down to
//! level `L`, adds `C(m, ℓ) = c·ℓ` nodes per level and assigns the degrees
//! `p_max(ℓ) = L - ℓ + m - 3`. Tree level `ℓ` is realised by quarklets on
//! level `j0 - 1 + ℓ` (level `j0 - 1` being the generators) and direction 2
//! by the degree-zero generators. Coefficients come from the regularised
//! Gramian normal equations, solved through the eigendecompositions of the
//! two univariate Gramians.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use quarklet_core::frame::UniFunction;
use quarklet_core::index::{Alpha, Rule};
use quarklet_core::nearbest::GrowthRun;
use quarklet_core::quadrature::GaussLegendre;
use quarklet_core::spline::delta_range;
use quarklet_core::tree::NodeId;
use quarklet_core::{
    CoefficientSequence, EnhancedIndex, L2ErrorModel, ModelParams, QuarkletSystem, QuarkletTree,
    SplineOrder, UniIndex, WaveletTree,
};
use serde::Serialize;

use crate::error::CliError;

/// Condition number above which the Gramian system is regularised.
pub const COND_LIMIT: f64 = 1e12;
pub const REGULARIZATION: f64 = 1e-10;

pub const FALPHA_HEADER: &str = "# quarklet-falpha v1";
pub const FALPHA_COLUMNS: &str = "L,N,N_fifth_root,basis_size,l2_error,condition,regularized,adaptive_steps,adaptive_cardinality,adaptive_global_error,adaptive_captured_fraction";

#[derive(Clone, Debug)]
pub struct FalphaConfig {
    pub alpha: f64,
    pub levels: u32,
    pub order: SplineOrder,
    pub j0: u32,
    pub delta: f64,
    /// `C(m, ℓ) = count_factor · ℓ`.
    pub count_factor: u32,
    /// Growth steps for the adaptive comparison; 0 skips it.
    pub adaptive_steps: usize,
}

impl FalphaConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !self.alpha.is_finite() || self.alpha <= 0.5 {
            return Err(CliError::Input(format!(
                "alpha must be a finite number > 1/2, got {}",
                self.alpha
            )));
        }
        if self.levels == 0 {
            return Err(CliError::Input("levels must be at least 1".into()));
        }
        if self.count_factor == 0 {
            return Err(CliError::Input("count factor must be at least 1".into()));
        }
        ModelParams::new(self.j0, self.order.m(), self.delta)?;
        QuarkletSystem::new(self.order, self.j0)?;
        Ok(())
    }
}

/// `p_max(ℓ) = L - ℓ + m - 3`, clamped at zero.
pub fn degree_schedule(levels: u32, m: u32, ell: u32) -> u32 {
    (i64::from(levels) - i64::from(ell) + i64::from(m) - 3).max(0) as u32
}

fn ensure_node(tree: &mut WaveletTree, j1: u32, k1: i64) -> Result<NodeId, CliError> {
    let idx = EnhancedIndex::node(j1, k1, 0, 0, Alpha::Both);
    if let Some(id) = tree.find(&idx) {
        return Ok(id);
    }
    let parent = ensure_node(tree, j1 - 1, k1 >> 1)?;
    tree.refine(parent, Rule::A1)?;
    Ok(tree.find(&idx).expect("a1 creates both halves"))
}

/// The hand-built quarklet tree for `L` levels.
pub fn literal_tree(levels: u32, m: u32, count_factor: u32) -> Result<QuarkletTree, CliError> {
    let mut tree = WaveletTree::new(EnhancedIndex::ROOT);
    for ell in 1..=levels {
        let count = (i64::from(count_factor) * i64::from(ell))
            .min(1i64 << ell)
            .max(2);
        for k in 0..count {
            ensure_node(&mut tree, ell, k)?;
        }
    }
    let degrees: Vec<u32> = (0..tree.len())
        .map(|id| degree_schedule(levels, m, tree.index(id).j1))
        .collect();
    Ok(QuarkletTree::from_leaf_degrees(tree, |leaf| degrees[leaf]))
}

/// Direction-1 frame elements realising the tree nodes.
pub fn direction1_indices(tree: &QuarkletTree, system: &QuarkletSystem) -> Vec<UniIndex> {
    let j0 = system.j0();
    let m = system.order().m();
    let mut out = BTreeSet::new();
    for (id, n) in tree.tree().nodes().iter().enumerate() {
        let pm = tree.p_max(id);
        let ell = n.index.j1;
        for p in 0..=pm {
            if ell == 0 {
                out.extend(delta_range(m, j0).map(|k| UniIndex { p, j: j0 - 1, k }));
            } else {
                out.insert(UniIndex {
                    p,
                    j: j0 - 1 + ell,
                    k: n.index.k1,
                });
            }
        }
    }
    out.into_iter().collect()
}

pub fn direction2_indices(system: &QuarkletSystem) -> Vec<UniIndex> {
    let j0 = system.j0();
    delta_range(system.order().m(), j0)
        .map(|k| UniIndex { p: 0, j: j0 - 1, k })
        .collect()
}

/// Tensor Gauss rule data for one direction.
struct Rule1d {
    x: Vec<f64>,
    w: Vec<f64>,
}

/// Gauss points on the union of the functions' breakpoints. With `graded`,
/// the first cell is split geometrically towards 0.
fn quadrature(funcs: &[UniFunction], points: usize, graded: bool) -> Rule1d {
    let top = funcs.iter().map(UniFunction::grid_level).max().unwrap_or(0);
    let mut grid = BTreeSet::new();
    for f in funcs {
        let (a, b) = f.support_cells();
        let s = top - f.grid_level();
        for i in a..=b {
            grid.insert(i << s);
        }
    }
    let h = 1.0 / (1u64 << top) as f64;
    let mut breaks: Vec<f64> = grid.into_iter().map(|i| i as f64 * h).collect();
    if graded && breaks.len() > 1 && breaks[0] == 0.0 {
        let first = breaks[1];
        let mut fine: Vec<f64> = (1..60).rev().map(|i| first * 0.5f64.powi(i)).collect();
        fine.insert(0, 0.0);
        breaks.splice(0..1, fine);
    }
    let gl = GaussLegendre::new(points);
    let mut x = Vec::new();
    let mut w = Vec::new();
    for c in breaks.windows(2) {
        for (xi, wi) in gl.mapped(c[0], c[1]) {
            x.push(xi);
            w.push(wi);
        }
    }
    Rule1d { x, w }
}

/// Values `scale_i · f_i(x_q)` as an `n × Q` matrix.
fn design(funcs: &[UniFunction], scale: &[f64], rule: &Rule1d) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(funcs.len(), rule.x.len());
    for (i, f) in funcs.iter().enumerate() {
        let (a, b) = f.support_cells();
        let h = 1.0 / (1u64 << f.grid_level()) as f64;
        let (lo, hi) = (a as f64 * h, b as f64 * h);
        for (q, &x) in rule.x.iter().enumerate() {
            if x >= lo && x <= hi {
                v[(i, q)] = scale[i] * f.eval(x);
            }
        }
    }
    v
}

fn gram(v: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut vw = v.clone();
    for (q, &wq) in w.iter().enumerate() {
        vw.column_mut(q).scale_mut(wq);
    }
    &vw * v.transpose()
}

/// Result of the least-squares fit.
#[derive(Clone, Debug)]
pub struct Fit {
    pub basis: (usize, usize),
    pub condition: f64,
    pub regularized: bool,
    pub l2_error: f64,
    pub coefficients: CoefficientSequence,
}

/// Fit `x1^α` with `(w^{-1} ψ_{i}) ⊗ ψ_{j}` over the two index lists.
pub fn fit(
    system: &QuarkletSystem,
    dir1: &[UniIndex],
    dir2: &[UniIndex],
    alpha: f64,
    delta: f64,
) -> Result<Fit, CliError> {
    let expand = |ix: &[UniIndex]| -> Result<Vec<UniFunction>, CliError> {
        ix.iter()
            .map(|&u| system.expand(u).map_err(CliError::from))
            .collect()
    };
    let f1 = expand(dir1)?;
    let f2 = expand(dir2)?;
    let w1: Vec<f64> = dir1
        .iter()
        .map(|u| f64::from(u.p + 1).powf(-delta / 2.0))
        .collect();
    let w2: Vec<f64> = dir2
        .iter()
        .map(|u| f64::from(u.p + 1).powf(-delta / 2.0))
        .collect();
    let deg1 = f1.iter().map(UniFunction::degree).max().unwrap_or(0);
    let deg2 = f2.iter().map(UniFunction::degree).max().unwrap_or(0);
    let r1 = quadrature(&f1, deg1 + 8, true);
    let r2 = quadrature(&f2, deg2 + 1, false);
    let v1 = design(&f1, &w1, &r1);
    let v2 = design(&f2, &w2, &r2);
    let target1 = DVector::from_iterator(r1.x.len(), r1.x.iter().map(|&x| x.powf(alpha)));
    let target2 = DVector::from_element(r2.x.len(), 1.0);
    let g1 = gram(&v1, &r1.w);
    let g2 = gram(&v2, &r2.w);
    let weighted = |v: &DMatrix<f64>, w: &[f64], t: &DVector<f64>| -> DVector<f64> {
        v * DVector::from_iterator(w.len(), w.iter().zip(t.iter()).map(|(a, b)| a * b))
    };
    let b1 = weighted(&v1, &r1.w, &target1);
    let b2 = weighted(&v2, &r2.w, &target2);

    // Jacobi scaling so that the regularisation acts on a unit diagonal.
    let s1 = DVector::from_iterator(g1.nrows(), g1.diagonal().iter().map(|d| 1.0 / d.sqrt()));
    let s2 = DVector::from_iterator(g2.nrows(), g2.diagonal().iter().map(|d| 1.0 / d.sqrt()));
    let scale = |g: &DMatrix<f64>, s: &DVector<f64>| {
        DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| s[i] * g[(i, j)] * s[j])
    };
    let e1 = SymmetricEigen::new(scale(&g1, &s1));
    let e2 = SymmetricEigen::new(scale(&g2, &s2));
    let (l1, l2) = (&e1.eigenvalues, &e2.eigenvalues);
    let lmax = l1.max() * l2.max();
    let lmin = l1.min() * l2.min();
    let condition = if lmin > 0.0 {
        lmax / lmin
    } else {
        f64::INFINITY
    };
    let regularized = condition > COND_LIMIT;
    let eps = if regularized { REGULARIZATION } else { 0.0 };

    let y1 = e1.eigenvectors.transpose() * b1.component_mul(&s1);
    let y2 = e2.eigenvectors.transpose() * b2.component_mul(&s2);
    let core = DMatrix::from_fn(y1.len(), y2.len(), |i, j| {
        y1[i] * y2[j] / (l1[i] * l2[j] + eps)
    });
    let scaled = &e1.eigenvectors * core * e2.eigenvectors.transpose();
    let c = DMatrix::from_fn(scaled.nrows(), scaled.ncols(), |i, j| {
        s1[i] * scaled[(i, j)] * s2[j]
    });

    // Residual on the tensor grid.
    let approx = v1.transpose() * &c * &v2;
    let mut err2 = 0.0;
    for q1 in 0..r1.x.len() {
        for q2 in 0..r2.x.len() {
            let r = target1[q1] - approx[(q1, q2)];
            err2 += r1.w[q1] * r2.w[q2] * r * r;
        }
    }

    let params = ModelParams::new(system.j0(), system.order().m(), delta)?;
    let mut coefficients = CoefficientSequence::new(params);
    for (i, a) in dir1.iter().enumerate() {
        for (j, b) in dir2.iter().enumerate() {
            if c[(i, j)] != 0.0 {
                coefficients.insert(
                    EnhancedIndex::new(a.p, a.j, a.k, b.p, b.j, b.k, Alpha::Both),
                    c[(i, j)],
                )?;
            }
        }
    }
    Ok(Fit {
        basis: (dir1.len(), dir2.len()),
        condition,
        regularized,
        l2_error: err2.sqrt(),
        coefficients,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FalphaRow {
    pub levels: u32,
    /// `#T` of the hand-built tree.
    pub cardinality: usize,
    pub basis_size: usize,
    pub l2_error: f64,
    pub condition: f64,
    pub regularized: bool,
    pub adaptive_steps: usize,
    pub adaptive_cardinality: usize,
    pub adaptive_global_error: f64,
    pub adaptive_captured_fraction: f64,
}

impl FalphaRow {
    pub fn n_fifth_root(&self) -> f64 {
        (self.cardinality as f64).powf(0.2)
    }
}

/// Least-squares line `y = a + b x`: `(slope, intercept, r²)`.
pub fn regression(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, my - slope * mx, r2)
}

#[derive(Clone, Debug, Serialize)]
pub struct FalphaReport {
    pub alpha: f64,
    pub rows: Vec<FalphaRow>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Grow the adaptive tree on the fitted coefficients until `#T_N` would
/// exceed `budget` or `max_steps` is reached.
fn adaptive(
    c: &CoefficientSequence,
    budget: usize,
    max_steps: usize,
) -> Result<(usize, usize, f64, f64), CliError> {
    let model = L2ErrorModel::new(c);
    let total = model.total_energy();
    let mut run = GrowthRun::new(&model);
    let mut best = run.snapshot();
    while run.steps() < max_steps {
        run.step()?;
        let snap = run.snapshot();
        if snap.cardinality > budget {
            break;
        }
        best = snap;
    }
    let captured = if total > 0.0 {
        1.0 - best.global_error / total
    } else {
        1.0
    };
    Ok((best.n, best.cardinality, best.global_error, captured))
}

pub fn run(config: &FalphaConfig) -> Result<FalphaReport, CliError> {
    config.validate()?;
    let system = QuarkletSystem::new(config.order, config.j0)?;
    let dir2 = direction2_indices(&system);
    let mut rows = Vec::new();
    for levels in 1..=config.levels {
        let tree = literal_tree(levels, config.order.m(), config.count_factor)?;
        let dir1 = direction1_indices(&tree, &system);
        let f = fit(&system, &dir1, &dir2, config.alpha, config.delta)?;
        let (steps, card, err, captured) = if config.adaptive_steps > 0 {
            adaptive(&f.coefficients, tree.cardinality(), config.adaptive_steps)?
        } else {
            (0, 0, f64::NAN, f64::NAN)
        };
        rows.push(FalphaRow {
            levels,
            cardinality: tree.cardinality(),
            basis_size: f.basis.0 * f.basis.1,
            l2_error: f.l2_error,
            condition: f.condition,
            regularized: f.regularized,
            adaptive_steps: steps,
            adaptive_cardinality: card,
            adaptive_global_error: err,
            adaptive_captured_fraction: captured,
        });
    }
    let xs: Vec<f64> = rows.iter().map(FalphaRow::n_fifth_root).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.l2_error.ln()).collect();
    let (slope, intercept, r_squared) = if rows.len() >= 2 {
        regression(&xs, &ys)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(FalphaReport {
        alpha: config.alpha,
        rows,
        slope,
        intercept,
        r_squared,
    })
}

pub fn report_to_csv(r: &FalphaReport) -> String {
    let mut s = format!(
        "{FALPHA_HEADER}\n# alpha={} slope={:e} intercept={:e} r2={:.6}\n{FALPHA_COLUMNS}\n",
        r.alpha, r.slope, r.intercept, r.r_squared
    );
    for row in &r.rows {
        let _ = writeln!(
            s,
            "{},{},{:.6},{},{:e},{:e},{},{},{},{:e},{:.6}",
            row.levels,
            row.cardinality,
            row.n_fifth_root(),
            row.basis_size,
            row.l2_error,
            row.condition,
            row.regularized,
            row.adaptive_steps,
            row.adaptive_cardinality,
            row.adaptive_global_error,
            row.adaptive_captured_fraction
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_tree_children_per_level() {
        let t = literal_tree(3, 2, 2).unwrap();
        let w = t.tree();
        for ell in 1..=3u32 {
            let parent = w
                .find(&EnhancedIndex::node(ell - 1, 0, 0, 0, Alpha::Both))
                .unwrap();
            let kids: Vec<EnhancedIndex> = w
                .node(parent)
                .children
                .iter()
                .map(|&c| w.index(c))
                .collect();
            assert_eq!(
                kids,
                vec![
                    EnhancedIndex::node(ell, 0, 0, 0, Alpha::Both),
                    EnhancedIndex::node(ell, 1, 0, 0, Alpha::Both),
                    EnhancedIndex::node(ell - 1, 0, 0, 0, Alpha::Dir2),
                ]
            );
        }
        assert!(t.is_consistent());
        w.validate().unwrap();
    }

    #[test]
    fn leftmost_rectangles() {
        for ell in 1..=4u32 {
            let r0 = EnhancedIndex::node(ell, 0, 0, 0, Alpha::Both)
                .rectangle()
                .unwrap()
                .bounds();
            let r1 = EnhancedIndex::node(ell, 1, 0, 0, Alpha::Both)
                .rectangle()
                .unwrap()
                .bounds();
            let h = 0.5f64.powi(ell as i32);
            assert_eq!(r0, [0.0, h, 0.0, 1.0]);
            assert_eq!(r1, [h, 2.0 * h, 0.0, 1.0]);
        }
    }

    #[test]
    fn degrees_follow_schedule() {
        let (levels, m) = (4, 3);
        let t = literal_tree(levels, m, 3).unwrap();
        for (leaf, p) in t.leaf_degrees() {
            assert_eq!(p, degree_schedule(levels, m, t.tree().index(leaf).j1));
        }
        assert_eq!(degree_schedule(2, 2, 2), 0);
    }

    #[test]
    fn regression_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (b, a, r2) = regression(&xs, &ys);
        assert!((b + 0.5).abs() < 1e-14 && (a - 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_small_alpha() {
        let cfg = FalphaConfig {
            alpha: 0.5,
            levels: 2,
            order: SplineOrder::new(3, 3).unwrap(),
            j0: 4,
            delta: 2.0,
            count_factor: 3,
            adaptive_steps: 0,
        };
        assert_eq!(run(&cfg).unwrap_err().exit_code(), 2);
    }
}
