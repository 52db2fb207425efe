//! Kernel of a short, wide matrix by Householder QR of its transpose.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{abs, sqrt};
use crate::{Error, Result};

/// Unit vector spanning the kernel of the `r × (r+1)` matrix `rows`.
///
/// Rows are rescaled to unit length first, which leaves the kernel unchanged.
/// The sign is fixed so that the first entry of significant size is positive.
/// Returns [`Error::RankDeficient`] if the kernel has dimension above one.
pub fn kernel_vector(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let r = rows.len();
    let c = r + 1;
    debug_assert!(rows.iter().all(|row| row.len() == c));
    // a = Mᵀ, column-major over the r columns: a[col][row]
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            let n = sqrt(row.iter().map(|v| v * v).sum());
            if n == 0.0 {
                row.clone()
            } else {
                row.iter().map(|v| v / n).collect()
            }
        })
        .collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(r);
    let mut diag = Vec::with_capacity(r);
    for col in 0..r {
        let norm = sqrt(a[col][col..].iter().map(|v| v * v).sum());
        let alpha = if a[col][col] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; c];
        v[col..].copy_from_slice(&a[col][col..]);
        v[col] -= alpha;
        let vn = sqrt(v.iter().map(|x| x * x).sum());
        if vn > 0.0 {
            for x in &mut v {
                *x /= vn;
            }
        }
        for other in a.iter_mut().skip(col) {
            let dot: f64 = v.iter().zip(other.iter()).map(|(x, y)| x * y).sum();
            for (y, x) in other.iter_mut().zip(&v) {
                *y -= 2.0 * dot * x;
            }
        }
        diag.push(abs(alpha));
        reflectors.push(v);
    }
    let scale = diag.iter().copied().fold(0.0, f64::max);
    let small = diag
        .iter()
        .filter(|&&d| d <= 1e-10 * scale.max(1e-300))
        .count();
    if small > 0 {
        return Err(Error::RankDeficient { nullity: 1 + small });
    }
    // last column of Q = H_0 H_1 … H_{r-1} e_{c-1}
    let mut q = vec![0.0; c];
    q[c - 1] = 1.0;
    for v in reflectors.iter().rev() {
        let dot: f64 = v.iter().zip(&q).map(|(x, y)| x * y).sum();
        for (y, x) in q.iter_mut().zip(v) {
            *y -= 2.0 * dot * x;
        }
    }
    let n = sqrt(q.iter().map(|v| v * v).sum());
    let big = q.iter().map(|v| abs(*v)).fold(0.0, f64::max);
    let first = q.iter().position(|v| abs(*v) > 1e-12 * big).unwrap_or(0);
    let sign = if q[first] < 0.0 { -1.0 } else { 1.0 };
    Ok(q.into_iter().map(|v| sign * v / n).collect())
}
