//! Seeded random instances for certification and property checks.

use quarklet_core::index::{available_rules, translation_range, Alpha};
use quarklet_core::tree::NodeId;
use quarklet_core::{CoefficientSequence, EnhancedIndex, ModelParams, QuarkletTree, WaveletTree};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of random coefficient sequences.
#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub params: ModelParams,
    pub max_support: usize,
    /// Levels range over `j0 - 1 ..= j0 + max_level_offset`.
    pub max_level_offset: u32,
    pub max_degree: u32,
}

impl InstanceShape {
    /// Small instances whose energy is reachable by trees with about a dozen
    /// nodes: `j0 = 1`, `m = 2`, `δ = 2`.
    pub fn certification() -> Self {
        Self {
            params: ModelParams::new(1, 2, 2.0).expect("valid parameters"),
            max_support: 20,
            max_level_offset: 3,
            max_degree: 2,
        }
    }
}

/// Levels are drawn with geometrically decaying weights so that coarse
/// indices, which small trees can reach, carry most entries.
fn level<R: Rng>(rng: &mut R, lo: u32, hi: u32) -> u32 {
    let mut j = lo;
    while j < hi && rng.random_bool(0.5) {
        j += 1;
    }
    j
}

pub fn random_coefficients<R: Rng>(rng: &mut R, shape: &InstanceShape) -> CoefficientSequence {
    let p = shape.params;
    let (lo, hi) = (p.j0 - 1, p.j0 + shape.max_level_offset);
    let support = rng.random_range(1..=shape.max_support);
    let mut c = CoefficientSequence::new(p);
    for _ in 0..support {
        let pick = |rng: &mut R| {
            let j = level(rng, lo, hi);
            let r = translation_range(p.m, p.j0, j).expect("level in range");
            (j, rng.random_range(r))
        };
        let (j1, k1) = pick(rng);
        let (j2, k2) = pick(rng);
        let p1 = rng.random_range(0..=shape.max_degree);
        let p2 = rng.random_range(0..=shape.max_degree - p1);
        let v: f64 = rng.random_range(-1.0..1.0);
        c.insert(EnhancedIndex::new(p1, j1, k1, p2, j2, k2, Alpha::Both), v)
            .expect("valid index");
    }
    c
}

/// Grow a wavelet tree by `refinements` random refinements of random leaves.
pub fn random_wavelet_tree<R: Rng>(rng: &mut R, refinements: usize) -> WaveletTree {
    let mut t = WaveletTree::new(EnhancedIndex::ROOT);
    for _ in 0..refinements {
        let leaves: Vec<NodeId> = t.leaves();
        let leaf = *leaves.choose(rng).expect("a tree has leaves");
        let rules: Vec<_> = available_rules(&t.index(leaf)).collect();
        if let Some(&rule) = rules.choose(rng) {
            t.refine(leaf, rule).expect("available rule");
        }
    }
    t
}

/// A wavelet tree of depth at most `max_depth` with random leaf degrees.
pub fn random_quarklet_tree<R: Rng>(
    rng: &mut R,
    refinements: usize,
    max_depth: usize,
    max_degree: u32,
) -> QuarkletTree {
    let mut t = WaveletTree::new(EnhancedIndex::ROOT);
    for _ in 0..refinements {
        let leaves: Vec<NodeId> = t
            .leaves()
            .into_iter()
            .filter(|&l| t.ancestors(l).len() <= max_depth)
            .collect();
        let Some(&leaf) = leaves.choose(rng) else {
            break;
        };
        let rules: Vec<_> = available_rules(&t.index(leaf)).collect();
        if let Some(&rule) = rules.choose(rng) {
            t.refine(leaf, rule).expect("available rule");
        }
    }
    let degrees: Vec<u32> = (0..t.len())
        .map(|_| rng.random_range(0..=max_degree))
        .collect();
    QuarkletTree::from_leaf_degrees(t, |l| degrees[l])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let shape = InstanceShape::certification();
        let a = random_coefficients(&mut rng(7), &shape);
        let b = random_coefficients(&mut rng(7), &shape);
        assert_eq!(a, b);
        assert!(a.len() <= 20 && !a.is_empty());
    }

    #[test]
    fn random_trees_validate() {
        let mut r = rng(3);
        for n in 0..30 {
            random_wavelet_tree(&mut r, n).validate().unwrap();
            let q = random_quarklet_tree(&mut r, n, 6, 3);
            assert!(q.is_consistent());
            assert!(q.tree().nodes().iter().enumerate().all(|(id, _)| q
                .tree()
                .ancestors(id)
                .len()
                <= 7));
        }
    }
}
