//! Enhanced indices, reference rectangles and the local refinement rules.
//!
//! A node `((j1,k1),(j2,k2),α)` stands for the dyadic rectangle
//! `[2^-j1 k1, 2^-j1 (k1+1)) × [2^-j2 k2, 2^-j2 (k2+1))`. The marker `α`
//! records which directions may still be refined: `0` both, `1` only the
//! first, `2` only the second.
//!
//! Under the unidirectional prolongation constraint (UPC) a node with
//! `j2 >= 1` may only be refined in the second direction.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::spline::delta_range;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Alpha {
    Both,
    Dir1,
    Dir2,
}

impl Alpha {
    pub fn as_u8(self) -> u8 {
        match self {
            Alpha::Both => 0,
            Alpha::Dir1 => 1,
            Alpha::Dir2 => 2,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(Alpha::Both),
            1 => Some(Alpha::Dir1),
            2 => Some(Alpha::Dir2),
            _ => None,
        }
    }

    pub fn sgn(self) -> u8 {
        u8::from(self != Alpha::Both)
    }
}

/// Local refinement rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Split in direction 1, keep an `α = 2` copy of the parent.
    A1,
    /// Split in direction 2, keep an `α = 1` copy of the parent.
    A2,
    /// Split an `α = 1` node in direction 1.
    B,
    /// Split an `α = 2` node in direction 2.
    C,
}

impl Rule {
    pub const ALL: [Rule; 4] = [Rule::A1, Rule::A2, Rule::B, Rule::C];

    pub fn name(self) -> &'static str {
        match self {
            Rule::A1 => "a1",
            Rule::A2 => "a2",
            Rule::B => "b",
            Rule::C => "c",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }

    /// Rules whose `α` requirement matches.
    pub fn for_alpha(alpha: Alpha) -> &'static [Rule] {
        match alpha {
            Alpha::Both => &[Rule::A1, Rule::A2],
            Alpha::Dir1 => &[Rule::B],
            Alpha::Dir2 => &[Rule::C],
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `((p1,j1,k1),(p2,j2,k2),α)`. Tree nodes carry `p1 = p2 = 0`.
///
/// `k` is signed because generator indices on level `j0 - 1` range over
/// `Δ_{j0}`, which starts at `-m+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnhancedIndex {
    pub p1: u32,
    pub j1: u32,
    pub k1: i64,
    pub p2: u32,
    pub j2: u32,
    pub k2: i64,
    pub alpha: Alpha,
}

impl EnhancedIndex {
    pub const ROOT: EnhancedIndex = EnhancedIndex::node(0, 0, 0, 0, Alpha::Both);

    pub const fn new(p1: u32, j1: u32, k1: i64, p2: u32, j2: u32, k2: i64, alpha: Alpha) -> Self {
        Self {
            p1,
            j1,
            k1,
            p2,
            j2,
            k2,
            alpha,
        }
    }

    /// A tree node (all degrees zero).
    pub const fn node(j1: u32, k1: i64, j2: u32, k2: i64, alpha: Alpha) -> Self {
        Self::new(0, j1, k1, 0, j2, k2, alpha)
    }

    /// `|λ| = j1 + j2`
    pub fn level(&self) -> u32 {
        self.j1 + self.j2
    }

    pub fn degree(&self) -> u32 {
        self.p1 + self.p2
    }

    /// The same index with both degrees set to zero.
    pub fn projection(&self) -> Self {
        Self {
            p1: 0,
            p2: 0,
            ..*self
        }
    }

    pub fn with_degrees(&self, p1: u32, p2: u32) -> Self {
        Self { p1, p2, ..*self }
    }

    pub fn with_alpha(&self, alpha: Alpha) -> Self {
        Self { alpha, ..*self }
    }

    /// The reference rectangle; `None` unless `0 <= k_i < 2^{j_i}`.
    pub fn rectangle(&self) -> Option<Rectangle> {
        Some(Rectangle {
            x: DyadicInterval::new(self.j1, self.k1)?,
            y: DyadicInterval::new(self.j2, self.k2)?,
        })
    }

    /// Whether `k_i ∈ {0, …, 2^{j_i}-1}` in both directions.
    pub fn is_tree_node(&self) -> bool {
        self.p1 == 0 && self.p2 == 0 && self.rectangle().is_some()
    }
}

impl fmt::Display for EnhancedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p1 == 0 && self.p2 == 0 {
            write!(
                f,
                "(({},{}),({},{}),{})",
                self.j1,
                self.k1,
                self.j2,
                self.k2,
                self.alpha.as_u8()
            )
        } else {
            write!(
                f,
                "(({},{},{}),({},{},{}),{})",
                self.p1,
                self.j1,
                self.k1,
                self.p2,
                self.j2,
                self.k2,
                self.alpha.as_u8()
            )
        }
    }
}

/// `[2^-j k, 2^-j (k+1))` with exact integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    pub j: u32,
    pub k: i64,
}

impl DyadicInterval {
    pub fn new(j: u32, k: i64) -> Option<Self> {
        (j < 62 && (0..(1i64 << j)).contains(&k)).then_some(Self { j, k })
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.j >= self.j && (other.k >> (other.j - self.j)) == self.k
    }

    pub fn bounds(&self) -> (f64, f64) {
        let h = 1.0 / (1u64 << self.j) as f64;
        (self.k as f64 * h, (self.k + 1) as f64 * h)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rectangle {
    pub x: DyadicInterval,
    pub y: DyadicInterval,
}

impl Rectangle {
    pub fn contains(&self, other: &Rectangle) -> bool {
        self.x.contains(&other.x) && self.y.contains(&other.y)
    }

    pub fn strictly_contains(&self, other: &Rectangle) -> bool {
        self.contains(other) && self != other
    }

    /// Area as a power of two exponent: area = `2^-(j1+j2)`.
    pub fn level(&self) -> u32 {
        self.x.j + self.y.j
    }

    /// `[x0, x1, y0, y1]`
    pub fn bounds(&self) -> [f64; 4] {
        let (x0, x1) = self.x.bounds();
        let (y0, y1) = self.y.bounds();
        [x0, x1, y0, y1]
    }
}

fn rule_alpha(rule: Rule) -> Alpha {
    match rule {
        Rule::A1 | Rule::A2 => Alpha::Both,
        Rule::B => Alpha::Dir1,
        Rule::C => Alpha::Dir2,
    }
}

/// Children of `λ` under `rule`, in canonical order.
///
/// Under the UPC (`j2 >= 1`) rules `a1` and `b` yield nothing and `a2` drops
/// its `α = 1` child.
pub fn children(lambda: &EnhancedIndex, rule: Rule) -> Result<Vec<EnhancedIndex>> {
    let need = rule_alpha(rule);
    if lambda.alpha != need {
        return Err(Error::RuleIncompatible {
            rule,
            alpha: lambda.alpha,
        });
    }
    let EnhancedIndex { j1, k1, j2, k2, .. } = *lambda;
    let upc = j2 >= 1;
    let split1 = || {
        [
            EnhancedIndex::node(j1 + 1, 2 * k1, j2, k2, Alpha::Both),
            EnhancedIndex::node(j1 + 1, 2 * k1 + 1, j2, k2, Alpha::Both),
        ]
    };
    let split2 = || {
        [
            EnhancedIndex::node(j1, k1, j2 + 1, 2 * k2, Alpha::Both),
            EnhancedIndex::node(j1, k1, j2 + 1, 2 * k2 + 1, Alpha::Both),
        ]
    };
    Ok(match rule {
        Rule::A1 if upc => Vec::new(),
        Rule::A1 => {
            let [a, b] = split1();
            vec![a, b, EnhancedIndex::node(j1, k1, j2, k2, Alpha::Dir2)]
        }
        Rule::A2 if upc => split2().to_vec(),
        Rule::A2 => {
            let [a, b] = split2();
            vec![a, b, EnhancedIndex::node(j1, k1, j2, k2, Alpha::Dir1)]
        }
        Rule::B if upc => Vec::new(),
        Rule::B => split1().to_vec(),
        Rule::C => split2().to_vec(),
    })
}

/// Rules applicable at `λ` that produce at least one child.
pub fn available_rules(lambda: &EnhancedIndex) -> impl Iterator<Item = Rule> + '_ {
    Rule::for_alpha(lambda.alpha)
        .iter()
        .copied()
        .filter(move |r| children(lambda, *r).is_ok_and(|c| !c.is_empty()))
}

/// The child that continues the `Υ` chain of `λ` under `rule`.
pub fn chosen_child(lambda: &EnhancedIndex, rule: Rule) -> Option<EnhancedIndex> {
    let ch = children(lambda, rule).ok()?;
    match rule {
        Rule::A1 => ch.get(2).copied(),
        _ => ch.first().copied(),
    }
}

/// All reachable `(μ, rule)` with `λ ∈ children(μ, rule)`, the `α = 0`
/// parent first.
///
/// Nodes `((j1,k1),(0,0),0)` with `j1 >= 1` can come from `a1` or from `b`,
/// and nodes `((j1,k1),(1,k2),0)` from `a2` or from `c`.
pub fn parents(lambda: &EnhancedIndex) -> Vec<(EnhancedIndex, Rule)> {
    let EnhancedIndex {
        j1,
        k1,
        j2,
        k2,
        alpha,
        ..
    } = *lambda;
    let mut cands: Vec<(EnhancedIndex, Rule)> = Vec::new();
    match alpha {
        Alpha::Dir2 => cands.push((lambda.with_alpha(Alpha::Both), Rule::A1)),
        Alpha::Dir1 => cands.push((lambda.with_alpha(Alpha::Both), Rule::A2)),
        Alpha::Both => {
            if j2 >= 1 {
                let up = EnhancedIndex::node(j1, k1, j2 - 1, k2 >> 1, Alpha::Both);
                cands.push((up, Rule::A2));
                cands.push((up.with_alpha(Alpha::Dir2), Rule::C));
            } else if j1 >= 1 {
                let up = EnhancedIndex::node(j1 - 1, k1 >> 1, j2, k2, Alpha::Both);
                cands.push((up, Rule::A1));
                cands.push((up.with_alpha(Alpha::Dir1), Rule::B));
            }
        }
    }
    cands.retain(|(mu, rule)| {
        is_reachable(mu) && children(mu, *rule).is_ok_and(|c| c.contains(lambda))
    });
    cands
}

/// Whether the node can be generated from the root: every `α = 0` node can,
/// nodes with `α != 0` only while `j2 = 0`.
pub fn is_reachable(lambda: &EnhancedIndex) -> bool {
    lambda.rectangle().is_some() && (lambda.alpha == Alpha::Both || lambda.j2 == 0)
}

/// The parent on the shortest generating sequence from the root.
pub fn parent(lambda: &EnhancedIndex) -> Option<EnhancedIndex> {
    parents(lambda).first().map(|(mu, _)| *mu)
}

/// `μ ≻ λ`: strictly smaller rectangle, or equal rectangle and a nonzero `α`
/// where `λ` has none.
pub fn is_descendant(mu: &EnhancedIndex, lambda: &EnhancedIndex) -> bool {
    let (Some(rm), Some(rl)) = (mu.rectangle(), lambda.rectangle()) else {
        return false;
    };
    rl.strictly_contains(&rm) || (rl == rm && mu.alpha.sgn() > lambda.alpha.sgn())
}

/// `μ ∈ J_λ`: `μ` is `λ` or can be generated from `λ` by the refinement
/// rules. Decided by walking parent candidates upward from `μ`.
pub fn in_j(mu: &EnhancedIndex, lambda: &EnhancedIndex) -> bool {
    let mu = mu.projection();
    let lambda = lambda.projection();
    if mu == lambda {
        return true;
    }
    let (Some(rm), Some(rl)) = (mu.rectangle(), lambda.rectangle()) else {
        return false;
    };
    if !rl.contains(&rm) || !is_descendant(&mu, &lambda) {
        return false;
    }
    reach_up(&mu, &lambda, &rl)
}

fn reach_up(mu: &EnhancedIndex, lambda: &EnhancedIndex, rl: &Rectangle) -> bool {
    for (par, _) in parents(mu) {
        if par == *lambda {
            return true;
        }
        let inside = par.rectangle().is_some_and(|r| rl.contains(&r));
        if inside && par.level() >= lambda.level() && reach_up(&par, lambda, rl) {
            return true;
        }
    }
    false
}

/// Valid translations on level `j` for a system with coarsest level `j0`:
/// `Δ_{j0}` on `j0 - 1`, `{0, …, 2^j-1}` above.
pub fn translation_range(m: u32, j0: u32, j: u32) -> Option<core::ops::RangeInclusive<i64>> {
    if j + 1 < j0 {
        None
    } else if j + 1 == j0 {
        Some(delta_range(m, j0))
    } else {
        Some(0..=((1i64 << j) - 1))
    }
}

/// Assignment of level-`j0` generators to wavelet translations:
/// `ℓ_k = round((2^j0 - 1)(k + m - 1) / (2^j0 + m - 2))`, ties rounded up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorAssignment {
    j0: u32,
    m: u32,
    ell: Vec<i64>,
}

impl GeneratorAssignment {
    pub fn new(j0: u32, m: u32) -> Self {
        let n = 1i64 << j0;
        let den = n + i64::from(m) - 2;
        let ell = delta_range(m, j0)
            .map(|k| {
                let num = (n - 1) * (k + i64::from(m) - 1);
                (2 * num + den).div_euclid(2 * den)
            })
            .collect();
        Self { j0, m, ell }
    }

    pub fn j0(&self) -> u32 {
        self.j0
    }

    /// `ℓ_k` for `k ∈ Δ_{j0}`.
    pub fn ell(&self, k: i64) -> Option<i64> {
        let i = k + i64::from(self.m) - 1;
        usize::try_from(i)
            .ok()
            .and_then(|i| self.ell.get(i))
            .copied()
    }

    /// `□_{j0,k̂} = {k ∈ Δ_{j0} : ℓ_k = k̂}`.
    pub fn cell(&self, k_hat: i64) -> Vec<i64> {
        delta_range(self.m, self.j0)
            .filter(|&k| self.ell(k) == Some(k_hat))
            .collect()
    }
}
