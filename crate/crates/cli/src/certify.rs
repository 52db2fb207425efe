//! Near-best certification against the exhaustive oracle.

use quarklet_core::functional::LocalErrorModel;
use quarklet_core::nearbest::{GrowthRun, Snapshot};
use quarklet_core::oracle::sigma_table;
use serde::Serialize;

use crate::error::CliError;

/// Relative slack for floating-point comparisons.
pub const SLACK: f64 = 1e-12;

/// `½N³ + (16/5)N² + (25/6)N + 3`, rounded down.
pub fn cardinality_upper(n: usize) -> usize {
    let n = n as u128;
    // common denominator 30
    ((15 * n * n * n + 96 * n * n + 125 * n + 90) / 30) as usize
}

pub fn cardinality_lower(n: usize) -> usize {
    2 * n + 1
}

/// `(N - 2n/3 + ½)` scaled by 6 so it stays an integer.
fn factor6(big_n: usize, n: usize) -> f64 {
    (6 * big_n + 3) as f64 - (4 * n) as f64
}

/// `ℰ(T_N) / [(3N+1)/(N - 2n/3 + ½) · σ_n]`, with `0/0 = 0`.
pub fn ratio(err: f64, big_n: usize, n: usize, sigma: f64) -> f64 {
    let lhs = err * factor6(big_n, n);
    let rhs = 6.0 * (3 * big_n + 1) as f64 * sigma;
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceReport {
    pub id: u64,
    /// `σ_1 … σ_{N_max}`.
    pub sigma: Vec<f64>,
    pub snapshots: Vec<SnapshotRow>,
    pub max_ratio: f64,
    /// `(n, N)` attaining `max_ratio`.
    pub worst: (usize, usize),
    pub window_violations: Vec<usize>,
    pub step_count_mismatches: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SnapshotRow {
    pub n: usize,
    pub cardinality: usize,
    pub global_error: f64,
    pub step_count: usize,
    pub visit_counter: usize,
}

impl InstanceReport {
    pub fn near_best_ok(&self) -> bool {
        self.max_ratio <= 1.0 + SLACK
    }

    pub fn passed(&self) -> bool {
        self.near_best_ok()
            && self.window_violations.is_empty()
            && self.step_count_mismatches.is_empty()
    }
}

/// Grow `N_max` steps, recording `T_N` after every step.
pub fn grow_snapshots<M: LocalErrorModel>(
    model: M,
    n_max: usize,
) -> Result<(Vec<Snapshot>, Vec<usize>), CliError> {
    let mut run = GrowthRun::new(model);
    let mut snaps = vec![run.snapshot()];
    let mut visits = vec![run.visit_counter()];
    for _ in 0..n_max {
        run.step()?;
        snaps.push(run.snapshot());
        visits.push(run.visit_counter());
    }
    Ok((snaps, visits))
}

/// Check every `n <= N <= n_max` for one model.
pub fn certify_model<M: LocalErrorModel>(
    id: u64,
    model: &M,
    n_max: usize,
) -> Result<InstanceReport, CliError> {
    let sigma = sigma_table(model, n_max)?;
    let (snaps, visits) = grow_snapshots(model, n_max)?;
    let mut max_ratio = 0.0f64;
    let mut worst = (0, 0);
    let mut window_violations = Vec::new();
    let mut step_count_mismatches = Vec::new();
    for (s, &v) in snaps.iter().zip(&visits) {
        let big_n = s.n;
        if s.step_count != v {
            step_count_mismatches.push(big_n);
        }
        if big_n >= 3
            && !(cardinality_lower(big_n)..=cardinality_upper(big_n)).contains(&s.cardinality)
        {
            window_violations.push(big_n);
        }
        for (n, &sg) in sigma.iter().enumerate().take(big_n + 1).skip(1) {
            let r = ratio(s.global_error, big_n, n, sg);
            if r > max_ratio || worst == (0, 0) {
                max_ratio = max_ratio.max(r);
                worst = (n, big_n);
            }
        }
    }
    let snapshots = snaps
        .iter()
        .zip(&visits)
        .map(|(s, &v)| SnapshotRow {
            n: s.n,
            cardinality: s.cardinality,
            global_error: s.global_error,
            step_count: s.step_count,
            visit_counter: v,
        })
        .collect();
    Ok(InstanceReport {
        id,
        sigma: sigma[1..].to_vec(),
        snapshots,
        max_ratio,
        worst,
        window_violations,
        step_count_mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use quarklet_core::EnhancedIndex;

    #[test]
    fn upper_bound_matches_formula() {
        for n in 0..40usize {
            let x = n as f64;
            let exact = 0.5 * x * x * x + 3.2 * x * x + 25.0 / 6.0 * x + 3.0;
            assert_eq!(cardinality_upper(n), exact.floor() as usize, "{n}");
        }
    }

    #[test]
    fn zero_over_zero_passes() {
        assert_eq!(ratio(0.0, 4, 2, 0.0), 0.0);
        assert!(ratio(1e-3, 4, 2, 0.0).is_infinite());
    }

    struct Zero;
    impl LocalErrorModel for Zero {
        fn local_error(&self, _: &[EnhancedIndex], _: u32) -> f64 {
            0.0
        }
    }

    #[test]
    fn zero_model_certifies() {
        let r = certify_model(0, &Zero, 8).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.max_ratio, 0.0);
    }
}
