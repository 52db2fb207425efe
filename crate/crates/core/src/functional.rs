//! Local error models and the modified error functionals that steer the
//! greedy growth.

use alloc::vec::Vec;

use crate::index::EnhancedIndex;
use crate::tree::{NodeId, QuarkletTree};

/// A family of local errors `e_p(λ)`.
///
/// `chain` is `Υ(λ)` with `λ` first; models that do not depend on the
/// chain may look at `chain[0]` only. Implementations must satisfy
/// `e_0(λ) >= Σ e_0(children)` and `e_p(λ) >= e_{p+1}(λ)`.
pub trait LocalErrorModel {
    fn local_error(&self, chain: &[EnhancedIndex], p: u32) -> f64;
}

impl<M: LocalErrorModel + ?Sized> LocalErrorModel for &M {
    fn local_error(&self, chain: &[EnhancedIndex], p: u32) -> f64 {
        (**self).local_error(chain, p)
    }
}

/// `x y / (x + y)`, zero when both vanish.
pub fn harmonic(x: f64, y: f64) -> f64 {
    if x + y == 0.0 {
        0.0
    } else {
        x * y / (x + y)
    }
}

/// `ẽ(λ) = e(λ) ẽ(parent) / (e(λ) + ẽ(parent))`.
pub fn tilde_e(e: f64, tilde_parent: f64) -> f64 {
    harmonic(e, tilde_parent)
}

/// `E_r(λ) = min(Σ_children E(child), e_r(λ))`.
pub fn update_error(children_sum: f64, e_r: f64) -> f64 {
    if children_sum < e_r {
        children_sum
    } else {
        e_r
    }
}

/// `Ẽ_r(λ) = E_r Ẽ_{r-1} / (E_r + Ẽ_{r-1})`.
pub fn update_tilde_error(big_e: f64, tilde_prev: f64) -> f64 {
    harmonic(big_e, tilde_prev)
}

/// Index of the child with the largest `a`; the first one wins ties.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `ℰ(T) = Σ_{λ leaf} e_{p_max(λ)}(λ)`.
pub fn global_error<M: LocalErrorModel + ?Sized>(model: &M, tree: &QuarkletTree) -> f64 {
    let t = tree.tree();
    t.leaves()
        .into_iter()
        .map(|l| model.local_error(&t.upsilon_indices(l), tree.p_max(l)))
        .sum()
}

/// Per-node bookkeeping of the growth algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeState {
    /// `e(λ) = e_0(λ)` on creation.
    pub e: f64,
    pub tilde_e: f64,
    /// `r(𝒯', λ)`.
    pub r: u32,
    /// `e_r(λ)` for the current `r`.
    pub e_r: f64,
    /// `E_0, …, E_r`.
    pub big_e: Vec<f64>,
    /// `Ẽ_0, …, Ẽ_r`.
    pub tilde_big_e: Vec<f64>,
    pub a: f64,
    pub b: NodeId,
}

impl NodeState {
    pub fn new(id: NodeId, e: f64, tilde_e: f64) -> Self {
        Self {
            e,
            tilde_e,
            r: 0,
            e_r: e,
            big_e: alloc::vec![e],
            tilde_big_e: alloc::vec![tilde_e],
            a: tilde_e,
            b: id,
        }
    }

    pub fn current_e(&self) -> f64 {
        *self.big_e.last().expect("E_0 is always present")
    }

    pub fn current_tilde_e(&self) -> f64 {
        *self.tilde_big_e.last().expect("Ẽ_0 is always present")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_cases() {
        assert_eq!(harmonic(0.0, 0.0), 0.0);
        assert_eq!(harmonic(2.0, 2.0), 1.0);
        assert_eq!(harmonic(0.0, 5.0), 0.0);
        assert!((1.0 / harmonic(3.0, 6.0) - (1.0 / 3.0 + 1.0 / 6.0)).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_first() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_first(&[0.0, 0.0]), 0);
    }

    #[test]
    fn update_error_is_min() {
        assert_eq!(update_error(1.0, 2.0), 1.0);
        assert_eq!(update_error(2.0, 2.0), 2.0);
    }
}
