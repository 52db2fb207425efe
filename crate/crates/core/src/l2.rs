//! Local errors induced by a quarklet coefficient sequence.
//!
//! Coefficients live on quarklet indices, the tree lives on wavelet
//! indices with levels `>= j0`. Generator indices on level `j0 - 1` are
//! folded onto level `j0` through [`GeneratorAssignment`]; the folded squared
//! coefficients form the sequence `d²`. A node with level `j0` in a direction
//! absorbs its own level-`j0` coefficient and the generators assigned to it,
//! in each direction independently, so `Σ d² = Σ c²` holds exactly.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::frame::{weight, QuarkletSystem, UniFunction, UniIndex};
use crate::functional::LocalErrorModel;
use crate::index::{in_j, translation_range, Alpha, EnhancedIndex, GeneratorAssignment};
use crate::tree::QuarkletTree;
use crate::{Error, Result};

/// Parameters of the coefficient space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub j0: u32,
    pub m: u32,
    pub delta: f64,
}

impl ModelParams {
    pub fn new(j0: u32, m: u32, delta: f64) -> Result<Self> {
        if delta.is_nan() || delta <= 1.0 {
            return Err(Error::InvalidDelta(delta));
        }
        if j0 == 0 {
            return Err(Error::LevelTooCoarse { j: 0, min: 1 });
        }
        if m < 2 {
            return Err(Error::InvalidOrder { m, m_tilde: m });
        }
        Ok(Self { j0, m, delta })
    }

    /// Validate a single quarklet index.
    pub fn check(&self, idx: &EnhancedIndex) -> Result<()> {
        for (j, k) in [(idx.j1, idx.k1), (idx.j2, idx.k2)] {
            match translation_range(self.m, self.j0, j) {
                Some(r) if r.contains(&k) => {}
                _ => {
                    return Err(Error::IndexOutOfRange {
                        what: "coefficient",
                        j: i64::from(j),
                        k,
                    })
                }
            }
        }
        if idx.alpha != Alpha::Both {
            return Err(Error::UnreachableAlpha(*idx));
        }
        Ok(())
    }
}

/// A finitely supported sequence `(c_λ)` on quarklet indices.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSequence {
    params: ModelParams,
    coeffs: BTreeMap<EnhancedIndex, f64>,
}

impl CoefficientSequence {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            coeffs: BTreeMap::new(),
        }
    }

    /// Build from entries, collecting every violation. Repeated indices add up.
    pub fn from_entries<I>(
        params: ModelParams,
        entries: I,
    ) -> core::result::Result<Self, Vec<(usize, Error)>>
    where
        I: IntoIterator<Item = (EnhancedIndex, f64)>,
    {
        let mut out = Self::new(params);
        let mut errors = Vec::new();
        for (i, (idx, c)) in entries.into_iter().enumerate() {
            if let Err(e) = out.insert(idx, c) {
                errors.push((i, e));
            }
        }
        if errors.is_empty() {
            Ok(out)
        } else {
            Err(errors)
        }
    }

    pub fn insert(&mut self, idx: EnhancedIndex, c: f64) -> Result<()> {
        self.params.check(&idx)?;
        *self.coeffs.entry(idx).or_insert(0.0) += c;
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn get(&self, idx: &EnhancedIndex) -> f64 {
        self.coeffs.get(idx).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EnhancedIndex, &f64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ c²`
    pub fn energy(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }
}

/// `d²` grouped by wavelet node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeEnergy {
    /// `(p1, p2, d²)`, sorted by degrees.
    pub terms: Vec<(u32, u32, f64)>,
    pub total: f64,
}

impl NodeEnergy {
    /// `Σ_{p1+p2 > p} d²`
    pub fn above(&self, p: u32) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.0 + t.1 > p)
            .map(|t| t.2)
            .sum()
    }

    /// `Σ_{p1+p2 <= p} d²`
    pub fn up_to(&self, p: u32) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.0 + t.1 <= p)
            .map(|t| t.2)
            .sum()
    }
}

/// The folded sequence `d²`, keyed by wavelet node.
#[derive(Clone, Debug, PartialEq)]
pub struct DSequence {
    nodes: BTreeMap<EnhancedIndex, NodeEnergy>,
}

impl DSequence {
    pub fn node(&self, idx: &EnhancedIndex) -> Option<&NodeEnergy> {
        self.nodes.get(&idx.projection())
    }

    /// `d²_λ` for a quarklet index on the tree side.
    pub fn d2(&self, idx: &EnhancedIndex) -> f64 {
        self.node(idx)
            .and_then(|n| n.terms.iter().find(|t| t.0 == idx.p1 && t.1 == idx.p2))
            .map_or(0.0, |t| t.2)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EnhancedIndex, &NodeEnergy)> {
        self.nodes.iter()
    }

    pub fn total(&self) -> f64 {
        self.nodes.values().map(|n| n.total).sum()
    }
}

/// Map one direction of a quarklet index to the wavelet level it is
/// attached to.
fn fold(ga: &GeneratorAssignment, j: u32, k: i64) -> (u32, i64) {
    if j + 1 == ga.j0() {
        (ga.j0(), ga.ell(k).expect("validated generator translation"))
    } else {
        (j, k)
    }
}

/// Fold `c²` into `d²`.
pub fn d_map(c: &CoefficientSequence) -> DSequence {
    let ModelParams { j0, m, .. } = c.params;
    let ga = GeneratorAssignment::new(j0, m);
    let mut acc: BTreeMap<EnhancedIndex, BTreeMap<(u32, u32), f64>> = BTreeMap::new();
    for (idx, v) in c.iter() {
        let (j1, k1) = fold(&ga, idx.j1, idx.k1);
        let (j2, k2) = fold(&ga, idx.j2, idx.k2);
        let node = EnhancedIndex::node(j1, k1, j2, k2, idx.alpha);
        *acc.entry(node)
            .or_default()
            .entry((idx.p1, idx.p2))
            .or_insert(0.0) += v * v;
    }
    let nodes = acc
        .into_iter()
        .map(|(n, terms)| {
            let terms: Vec<(u32, u32, f64)> =
                terms.into_iter().map(|((a, b), d)| (a, b, d)).collect();
            let total = terms.iter().map(|t| t.2).sum();
            (n, NodeEnergy { terms, total })
        })
        .collect();
    DSequence { nodes }
}

/// `e_p(λ) = Σ_{μ∈Υ(λ)} Σ_{p1+p2>p} d²_μ + Σ_{μ∈J_λ, μ≠λ} Σ_{p1,p2} d²_μ`.
pub fn local_error(d: &DSequence, chain: &[EnhancedIndex], p: u32) -> f64 {
    upsilon_part(d, chain, p) + below(d, &chain[0])
}

fn upsilon_part(d: &DSequence, chain: &[EnhancedIndex], p: u32) -> f64 {
    chain
        .iter()
        .filter_map(|mu| d.node(mu))
        .map(|n| n.above(p))
        .sum()
}

fn below(d: &DSequence, lambda: &EnhancedIndex) -> f64 {
    d.nodes
        .iter()
        .filter(|(mu, _)| **mu != *lambda && in_j(mu, lambda))
        .map(|(_, n)| n.total)
        .sum()
}

/// [`LocalErrorModel`] for a coefficient sequence. The energy strictly
/// below each node is memoized.
#[derive(Clone, Debug)]
pub struct L2ErrorModel {
    d: DSequence,
    total: f64,
    below: RefCell<BTreeMap<EnhancedIndex, f64>>,
}

impl L2ErrorModel {
    pub fn new(c: &CoefficientSequence) -> Self {
        let d = d_map(c);
        let total = d.total();
        Self {
            d,
            total,
            below: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn d(&self) -> &DSequence {
        &self.d
    }

    /// `Σ d²`
    pub fn total_energy(&self) -> f64 {
        self.total
    }

    fn below_cached(&self, lambda: &EnhancedIndex) -> f64 {
        let key = lambda.projection();
        if let Some(v) = self.below.borrow().get(&key) {
            return *v;
        }
        let v = below(&self.d, &key);
        self.below.borrow_mut().insert(key, v);
        v
    }

    /// `Σ_{μ∈T} Σ_{p1+p2 <= p_max(μ)} d²_μ`
    pub fn captured(&self, tree: &QuarkletTree) -> f64 {
        let t = tree.tree();
        (0..t.len())
            .filter_map(|id| self.d.node(&t.index(id)).map(|n| n.up_to(tree.p_max(id))))
            .sum()
    }
}

impl LocalErrorModel for L2ErrorModel {
    fn local_error(&self, chain: &[EnhancedIndex], p: u32) -> f64 {
        upsilon_part(&self.d, chain, p) + self.below_cached(&chain[0])
    }
}

/// Quarklet indices `T̃` represented by a quarklet tree: for each node with
/// both levels `>= j0` and each degree pair with `p1 + p2 <= p_max`, the
/// node's own index plus, in a direction sitting on level `j0`, the
/// generators assigned to it.
pub fn tilde_transform(tree: &QuarkletTree, params: &ModelParams) -> BTreeSet<EnhancedIndex> {
    let ga = GeneratorAssignment::new(params.j0, params.m);
    let unfold = |j: u32, k: i64| -> Vec<(u32, i64)> {
        let mut v = alloc::vec![(j, k)];
        if j == params.j0 {
            v.extend(ga.cell(k).into_iter().map(|l| (params.j0 - 1, l)));
        }
        v
    };
    let mut out = BTreeSet::new();
    let t = tree.tree();
    for id in 0..t.len() {
        let n = t.index(id);
        if n.j1 < params.j0 || n.j2 < params.j0 {
            continue;
        }
        let pm = tree.p_max(id);
        for (j1, k1) in unfold(n.j1, n.k1) {
            for (j2, k2) in unfold(n.j2, n.k2) {
                for p1 in 0..=pm {
                    for p2 in 0..=(pm - p1) {
                        out.insert(EnhancedIndex::new(p1, j1, k1, p2, j2, k2, n.alpha));
                    }
                }
            }
        }
    }
    out
}

/// `Σ_{λ ∈ T̃} c_λ²`
pub fn captured_coefficients(c: &CoefficientSequence, t_tilde: &BTreeSet<EnhancedIndex>) -> f64 {
    t_tilde.iter().map(|i| c.get(i)).map(|v| v * v).sum()
}

/// `f_T = Σ_{λ∈T̃} c_λ w_λ^{-1} ψ_λ`, with the univariate factors resolved
/// once so that repeated evaluation is cheap.
#[derive(Clone, Debug)]
pub struct Reconstruction {
    terms: Vec<(f64, UniFunction, UniFunction)>,
}

impl Reconstruction {
    pub fn new(
        system: &QuarkletSystem,
        c: &CoefficientSequence,
        t_tilde: &BTreeSet<EnhancedIndex>,
    ) -> Result<Self> {
        let mut cache: BTreeMap<UniIndex, UniFunction> = BTreeMap::new();
        let mut get = |u: UniIndex| -> Result<UniFunction> {
            if let Some(f) = cache.get(&u) {
                return Ok(f.clone());
            }
            let f = system.expand(u)?;
            cache.insert(u, f.clone());
            Ok(f)
        };
        let mut terms = Vec::new();
        for idx in t_tilde {
            let v = c.get(idx);
            if v == 0.0 {
                continue;
            }
            let w = weight(idx, c.params.delta)?;
            let f1 = get(UniIndex {
                p: idx.p1,
                j: idx.j1,
                k: idx.k1,
            })?;
            let f2 = get(UniIndex {
                p: idx.p2,
                j: idx.j2,
                k: idx.k2,
            })?;
            terms.push((v / w, f1, f2));
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, f1, f2)| {
                let a = f1.eval(x1);
                if a == 0.0 {
                    0.0
                } else {
                    c * a * f2.eval(x2)
                }
            })
            .sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functional::global_error;
    use crate::nearbest::GrowthRun;
    use crate::tree::WaveletTree;

    fn params() -> ModelParams {
        ModelParams::new(1, 2, 2.0).unwrap()
    }

    #[test]
    fn validation() {
        let p = params();
        let mut c = CoefficientSequence::new(p);
        assert!(c
            .insert(EnhancedIndex::new(0, 0, -1, 0, 1, 1, Alpha::Both), 1.0)
            .is_ok());
        assert!(c
            .insert(EnhancedIndex::new(0, 0, -2, 0, 1, 1, Alpha::Both), 1.0)
            .is_err());
        assert!(c
            .insert(EnhancedIndex::new(0, 1, 2, 0, 1, 1, Alpha::Both), 1.0)
            .is_err());
        assert!(matches!(
            c.insert(EnhancedIndex::new(0, 1, 0, 0, 1, 1, Alpha::Dir1), 1.0),
            Err(Error::UnreachableAlpha(_))
        ));
        let p3 = ModelParams::new(3, 2, 2.0).unwrap();
        let mut c3 = CoefficientSequence::new(p3);
        assert!(c3
            .insert(EnhancedIndex::new(0, 1, 0, 0, 3, 0, Alpha::Both), 1.0)
            .is_err());
    }

    #[test]
    fn generator_folds_onto_assigned_node() {
        let p = ModelParams::new(3, 2, 2.0).unwrap();
        let ga = GeneratorAssignment::new(3, 2);
        let mut c = CoefficientSequence::new(p);
        c.insert(EnhancedIndex::new(2, 2, 4, 0, 4, 3, Alpha::Both), 0.5)
            .unwrap();
        let d = d_map(&c);
        let k1 = ga.ell(4).unwrap();
        assert_eq!(
            d.d2(&EnhancedIndex::new(2, 3, k1, 0, 4, 3, Alpha::Both)),
            0.25
        );
        assert_eq!(d.total(), c.energy());
    }

    #[test]
    fn corner_node_absorbs_both_directions() {
        let p = ModelParams::new(1, 2, 2.0).unwrap();
        let mut c = CoefficientSequence::new(p);
        for (j1, k1, j2, k2) in [(0, -1, 0, -1), (0, -1, 1, 0), (1, 0, 0, 0), (1, 0, 1, 0)] {
            c.insert(EnhancedIndex::new(0, j1, k1, 0, j2, k2, Alpha::Both), 1.0)
                .unwrap();
        }
        let d = d_map(&c);
        let ga = GeneratorAssignment::new(1, 2);
        assert_eq!(ga.ell(-1), Some(0));
        assert_eq!(ga.ell(0), Some(1));
        assert_eq!(
            d.node(&EnhancedIndex::node(1, 0, 1, 0, Alpha::Both))
                .unwrap()
                .total,
            3.0
        );
        assert_eq!(d.total(), 4.0);
    }

    #[test]
    fn energy_identity_on_grown_tree() {
        let p = params();
        let mut c = CoefficientSequence::new(p);
        let mut v = 0.37;
        for j1 in 0..3u32 {
            for j2 in 0..3u32 {
                let r1 = translation_range(2, 1, j1).unwrap();
                let r2 = translation_range(2, 1, j2).unwrap();
                for k1 in r1.clone() {
                    for k2 in r2.clone() {
                        v = (v * 7.13) % 1.0;
                        c.insert(
                            EnhancedIndex::new((k1 as u32) % 2, j1, k1, 0, j2, k2, Alpha::Both),
                            v,
                        )
                        .unwrap();
                    }
                }
            }
        }
        let model = L2ErrorModel::new(&c);
        let run = GrowthRun::grow(&model, 10).unwrap();
        let t = run.trim();
        let g = global_error(&model, &t);
        let tt = tilde_transform(&t, &p);
        let captured = captured_coefficients(&c, &tt);
        assert!((g - (c.energy() - captured)).abs() < 1e-12);
        assert!((model.captured(&t) - captured).abs() < 1e-12);
    }

    #[test]
    fn root_error_is_total_energy() {
        let p = params();
        let mut c = CoefficientSequence::new(p);
        c.insert(EnhancedIndex::new(1, 2, 3, 0, 1, 0, Alpha::Both), 2.0)
            .unwrap();
        let m = L2ErrorModel::new(&c);
        assert_eq!(m.local_error(&[EnhancedIndex::ROOT], 0), 4.0);
        let t = QuarkletTree::from_leaf_degrees(WaveletTree::new(EnhancedIndex::ROOT), |_| 3);
        assert_eq!(global_error(&m, &t), 4.0);
    }
}
