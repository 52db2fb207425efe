//! Exhaustive enumeration of small quarklet trees and the best errors
//! `σ_n = min { ℰ(T) : #T <= n }`.
//!
//! Wavelet trees are enumerated by visiting nodes in creation order and
//! deciding once per node whether, and by which rule, it is refined, so each
//! tree appears exactly once. Degrees are then distributed over the leaves.

use alloc::vec::Vec;

use crate::functional::LocalErrorModel;
use crate::index::{available_rules, children, chosen_child, EnhancedIndex};
use crate::tree::{triangular, QuarkletTree, WaveletTree};
use crate::{Error, Result};

/// Largest `n` the exhaustive oracle accepts.
pub const MAX_EXHAUSTIVE_N: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Upper bound on `#T`.
    pub max_cardinality: usize,
    /// Upper bound on every `p_max`.
    pub max_degree: u32,
    /// Upper bound on the number of refinements of the wavelet tree.
    pub max_refinements: usize,
}

impl Bounds {
    /// Bounds that do not restrict trees with `#T <= n`.
    pub fn cardinality(n: usize) -> Self {
        Self {
            max_cardinality: n,
            max_degree: max_degree_for(n),
            max_refinements: n,
        }
    }
}

/// Largest `p` with `triangular(p) <= n`.
pub fn max_degree_for(n: usize) -> u32 {
    let mut p = 0;
    while triangular(p + 1) <= n {
        p += 1;
    }
    p
}

/// Call `f` on every wavelet tree rooted at `ℛ` with at most `max_nodes`
/// nodes and `max_refinements` refinements.
pub fn for_each_wavelet_tree<F: FnMut(&WaveletTree)>(
    max_nodes: usize,
    max_refinements: usize,
    mut f: F,
) {
    let mut t = WaveletTree::new(EnhancedIndex::ROOT);
    if max_nodes >= 1 {
        rec(&mut t, 0, max_nodes, max_refinements, &mut f);
    }
}

fn rec(
    t: &mut WaveletTree,
    pos: usize,
    max_nodes: usize,
    refinements_left: usize,
    f: &mut dyn FnMut(&WaveletTree),
) {
    if pos == t.len() {
        f(t);
        return;
    }
    rec(t, pos + 1, max_nodes, refinements_left, f);
    if refinements_left == 0 {
        return;
    }
    let idx = t.index(pos);
    let rules: Vec<_> = available_rules(&idx).collect();
    for rule in rules {
        let n = children(&idx, rule).map(|c| c.len()).unwrap_or(0);
        if t.len() + n > max_nodes {
            continue;
        }
        if t.refine(pos, rule).is_ok() {
            rec(t, pos + 1, max_nodes, refinements_left - 1, f);
            t.unrefine_last(pos);
        }
    }
}

/// Call `f` on every quarklet tree within `bounds`.
pub fn for_each_quarklet_tree<F: FnMut(&QuarkletTree)>(bounds: Bounds, mut f: F) {
    for_each_wavelet_tree(bounds.max_cardinality, bounds.max_refinements, |t| {
        let leaves = t.leaves();
        let sizes: Vec<usize> = leaves.iter().map(|&l| t.upsilon(l).len()).collect();
        let mut degrees = alloc::vec![0u32; leaves.len()];
        assign(
            &sizes,
            0,
            bounds.max_cardinality,
            bounds.max_degree,
            &mut degrees,
            &mut |deg| {
                let q = QuarkletTree::from_leaf_degrees(t.clone(), |l| {
                    deg[leaves.iter().position(|&x| x == l).expect("leaf")]
                });
                f(&q);
            },
        );
    });
}

/// Enumerate degree vectors with `Σ sizes[i] · triangular(deg[i]) <= budget`.
fn assign(
    sizes: &[usize],
    i: usize,
    budget: usize,
    max_p: u32,
    deg: &mut [u32],
    f: &mut dyn FnMut(&[u32]),
) {
    if i == sizes.len() {
        f(deg);
        return;
    }
    let rest: usize = sizes[i + 1..].iter().sum();
    for p in 0..=max_p {
        let cost = sizes[i] * triangular(p);
        if cost + rest > budget {
            break;
        }
        deg[i] = p;
        assign(sizes, i + 1, budget - cost, max_p, deg, f);
    }
}

pub fn enumerate_trees(bounds: Bounds) -> Vec<QuarkletTree> {
    let mut out = Vec::new();
    for_each_quarklet_tree(bounds, |t| out.push(t.clone()));
    out
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_N {
        Err(Error::BoundTooLarge {
            n,
            cap: MAX_EXHAUSTIVE_N,
        })
    } else {
        Ok(())
    }
}

/// `σ_1, …, σ_{n_max}` from one exhaustive pass; entry `0` is `σ_0 = +∞`.
pub fn sigma_table<M: LocalErrorModel + ?Sized>(model: &M, n_max: usize) -> Result<Vec<f64>> {
    check_n(n_max)?;
    let max_p = max_degree_for(n_max);
    let mut best = alloc::vec![f64::INFINITY; n_max + 1];
    for_each_wavelet_tree(n_max, n_max, |t| {
        let leaves = t.leaves();
        let sizes: Vec<usize> = leaves.iter().map(|&l| t.upsilon(l).len()).collect();
        let errs: Vec<Vec<f64>> = leaves
            .iter()
            .map(|&l| {
                let chain = t.upsilon_indices(l);
                (0..=max_p).map(|p| model.local_error(&chain, p)).collect()
            })
            .collect();
        let mut degrees = alloc::vec![0u32; leaves.len()];
        assign(&sizes, 0, n_max, max_p, &mut degrees, &mut |deg| {
            let card: usize = sizes
                .iter()
                .zip(deg)
                .map(|(&s, &p)| s * triangular(p))
                .sum();
            let err: f64 = errs.iter().zip(deg).map(|(e, &p)| e[p as usize]).sum();
            if err < best[card] {
                best[card] = err;
            }
        });
    });
    for n in 1..=n_max {
        if best[n - 1] < best[n] {
            best[n] = best[n - 1];
        }
    }
    best[0] = f64::INFINITY;
    Ok(best)
}

/// `σ_n` by exhaustive enumeration.
pub fn sigma_n<M: LocalErrorModel + ?Sized>(model: &M, n: usize) -> Result<f64> {
    Ok(sigma_table(model, n)?[n])
}

/// `σ_n` by recursion over subtrees with a split budget. Independent of the
/// enumeration above; used to cross-check it.
pub fn sigma_n_recursive<M: LocalErrorModel + ?Sized>(model: &M, n: usize) -> Result<f64> {
    check_n(n)?;
    let v = best_by_budget(model, &[EnhancedIndex::ROOT], n);
    Ok(v[n])
}

/// `out[b]` = least error of a subtree at `chain[0]` costing at most `b`,
/// where the cost includes the not yet counted ancestors in `chain`.
fn best_by_budget<M: LocalErrorModel + ?Sized>(
    model: &M,
    chain: &[EnhancedIndex],
    budget: usize,
) -> Vec<f64> {
    let mut out = alloc::vec![f64::INFINITY; budget + 1];
    let s = chain.len();
    let mut p = 0u32;
    while s * triangular(p) <= budget {
        let e = model.local_error(chain, p);
        for slot in out.iter_mut().skip(s * triangular(p)) {
            if e < *slot {
                *slot = e;
            }
        }
        p += 1;
    }
    let lambda = chain[0];
    for rule in available_rules(&lambda) {
        let kids = children(&lambda, rule).expect("available rule");
        if kids.len() + s > budget {
            continue;
        }
        debug_assert!(!kids.is_empty());
        let chosen = chosen_child(&lambda, rule);
        // min-plus convolution over the children
        let mut acc: Vec<f64> = alloc::vec![0.0; budget + 1];
        let min_cost = |c: &EnhancedIndex| if Some(*c) == chosen { s + 1 } else { 1 };
        let floor: usize = kids.iter().map(min_cost).sum();
        for c in &kids {
            // the siblings need at least their own chain length
            let cap = budget - (floor - min_cost(c));
            let sub = if Some(*c) == chosen {
                let mut ch = alloc::vec![*c];
                ch.extend_from_slice(chain);
                best_by_budget(model, &ch, cap)
            } else {
                best_by_budget(model, &[*c], cap)
            };
            let mut next = alloc::vec![f64::INFINITY; budget + 1];
            for (b1, &x) in acc.iter().enumerate() {
                if x.is_infinite() {
                    continue;
                }
                for (b2, &y) in sub.iter().enumerate().take(budget + 1 - b1) {
                    if y.is_infinite() {
                        continue;
                    }
                    let v = x + y;
                    if v < next[b1 + b2] {
                        next[b1 + b2] = v;
                    }
                }
            }
            acc = next;
        }
        for (slot, v) in out.iter_mut().zip(acc) {
            if v < *slot {
                *slot = v;
            }
        }
    }
    out
}

/// Number of wavelet trees with at most `r` refinements, counted by
/// recursion over subtrees rather than by enumeration.
pub fn count_wavelet_trees(r: usize) -> usize {
    let w = count_exact(&EnhancedIndex::ROOT, r);
    w.iter().sum()
}

/// `w[i]` = number of subtrees at `λ` using exactly `i` refinements.
fn count_exact(lambda: &EnhancedIndex, r: usize) -> Vec<usize> {
    let mut w = alloc::vec![0usize; r + 1];
    w[0] = 1;
    if r == 0 {
        return w;
    }
    for rule in available_rules(lambda) {
        let kids = children(lambda, rule).expect("available rule");
        let mut acc = alloc::vec![0usize; r];
        acc[0] = 1;
        for c in &kids {
            let sub = count_exact(c, r - 1);
            let mut next = alloc::vec![0usize; r];
            for (i, &a) in acc.iter().enumerate() {
                for (k, &b) in sub.iter().enumerate() {
                    if i + k < r {
                        next[i + k] += a * b;
                    }
                }
            }
            acc = next;
        }
        for (i, a) in acc.into_iter().enumerate() {
            w[i + 1] += a;
        }
    }
    w
}
