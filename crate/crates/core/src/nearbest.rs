//! Greedy growth of a wavelet tree `𝒯'_N` and trimming into a quarklet tree
//! `T_N`. Each step refines the leaf `b(ℛ)` that the modified errors point
//! at, then updates the functionals on the path back to the root.

use alloc::vec::Vec;

use crate::functional::{
    argmax_first, global_error, tilde_e, update_error, update_tilde_error, LocalErrorModel,
    NodeState,
};
use crate::index::{children, chosen_child, Alpha, EnhancedIndex, Rule};
use crate::tree::{NodeId, QuarkletTree, WaveletTree};
use crate::{Error, Result};

/// What happened in one growth step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// `N` after the step.
    pub n: usize,
    pub node: EnhancedIndex,
    pub rule: Rule,
    /// `A_1`, `A_2` when the node had `α = 0` (infinite if unavailable).
    pub candidates: Option<(f64, f64)>,
    /// `a(ℛ)` after the step.
    pub a_root: f64,
}

/// Summary of `T_N` after trimming.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub grown_nodes: usize,
    pub cardinality: usize,
    pub global_error: f64,
    pub a_root: f64,
    pub step_count: usize,
}

#[derive(Clone, Debug)]
pub struct GrowthRun<M> {
    model: M,
    tree: WaveletTree,
    state: Vec<NodeState>,
    steps: usize,
    visits: usize,
    a_history: Vec<f64>,
    records: Vec<StepRecord>,
}

impl<M: LocalErrorModel> GrowthRun<M> {
    /// Initialise at the unit square.
    pub fn new(model: M) -> Self {
        Self::with_root(model, EnhancedIndex::ROOT)
    }

    pub fn with_root(model: M, root: EnhancedIndex) -> Self {
        let e = model.local_error(&[root], 0);
        let tree = WaveletTree::new(root);
        Self {
            model,
            tree,
            state: alloc::vec![NodeState::new(0, e, e)],
            steps: 0,
            visits: 1,
            a_history: alloc::vec![e],
            records: Vec::new(),
        }
    }

    /// Run until `N = n_max`.
    pub fn grow(model: M, n_max: usize) -> Result<Self> {
        let mut run = Self::new(model);
        while run.steps < n_max {
            run.step()?;
        }
        Ok(run)
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn tree(&self) -> &WaveletTree {
        &self.tree
    }

    pub fn state(&self, id: NodeId) -> &NodeState {
        &self.state[id]
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `a(ℛ)` before the first step and after each one.
    pub fn a_history(&self) -> &[f64] {
        &self.a_history
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    /// Node visits performed so far: one per created node plus one per
    /// node touched while walking back to the root.
    pub fn visit_counter(&self) -> usize {
        self.visits
    }

    /// `Σ_{λ ∈ 𝒯'} (r(𝒯', λ) + 1)`.
    pub fn step_count(&self) -> usize {
        self.state.iter().map(|s| s.r as usize + 1).sum()
    }

    fn child_chain(
        &self,
        parent_chain: &[EnhancedIndex],
        child: EnhancedIndex,
        chosen: Option<EnhancedIndex>,
    ) -> Vec<EnhancedIndex> {
        let mut c = alloc::vec![child];
        if chosen == Some(child) {
            c.extend_from_slice(parent_chain);
        }
        c
    }

    fn child_errors(
        &self,
        lam: &EnhancedIndex,
        chain: &[EnhancedIndex],
        rule: Rule,
    ) -> Result<Option<Vec<f64>>> {
        let kids = children(lam, rule)?;
        if kids.is_empty() {
            return Ok(None);
        }
        let chosen = chosen_child(lam, rule);
        Ok(Some(
            kids.into_iter()
                .map(|c| {
                    self.model
                        .local_error(&self.child_chain(chain, c, chosen), 0)
                })
                .collect(),
        ))
    }

    /// One growth step `N -> N + 1`.
    pub fn step(&mut self) -> Result<&StepRecord> {
        let lam = self.state[0].b;
        let idx = self.tree.index(lam);
        let chain = self.tree.upsilon_indices(lam);
        let (rule, errs, candidates) = if idx.alpha == Alpha::Both {
            let e1 = self.child_errors(&idx, &chain, Rule::A1)?;
            let e2 = self.child_errors(&idx, &chain, Rule::A2)?;
            let s1 = e1.as_ref().map_or(f64::INFINITY, |v| v.iter().sum());
            let s2 = e2.as_ref().map_or(f64::INFINITY, |v| v.iter().sum());
            match (e1, e2) {
                (None, None) => return Err(Error::NoAvailableRefinement(idx)),
                (Some(v), _) if s1 <= s2 => (Rule::A1, v, Some((s1, s2))),
                (_, Some(v)) => (Rule::A2, v, Some((s1, s2))),
                (Some(v), None) => (Rule::A1, v, Some((s1, s2))),
            }
        } else {
            let rule = if idx.alpha == Alpha::Dir1 {
                Rule::B
            } else {
                Rule::C
            };
            match self.child_errors(&idx, &chain, rule)? {
                Some(v) => (rule, v, None),
                None => return Err(Error::NoAvailableRefinement(idx)),
            }
        };
        let ids = self.tree.refine(lam, rule)?;
        let parent_tilde = self.state[lam].tilde_e;
        for (&id, &e) in ids.iter().zip(&errs) {
            debug_assert_eq!(id, self.state.len());
            self.state
                .push(NodeState::new(id, e, tilde_e(e, parent_tilde)));
            self.visits += 1;
        }
        let mut cur = Some(lam);
        while let Some(v) = cur {
            self.visits += 1;
            let r = self.state[v].r + 1;
            let e_r = self.model.local_error(&self.tree.upsilon_indices(v), r);
            let kids = &self.tree.node(v).children;
            let sum: f64 = kids.iter().map(|&c| self.state[c].current_e()).sum();
            let a_vals: Vec<f64> = kids.iter().map(|&c| self.state[c].a).collect();
            let star = kids[argmax_first(&a_vals)];
            let (a_star, b_star) = (self.state[star].a, self.state[star].b);
            let s = &mut self.state[v];
            s.r = r;
            s.e_r = e_r;
            let big_e = update_error(sum, e_r);
            let tilde = update_tilde_error(big_e, s.current_tilde_e());
            s.big_e.push(big_e);
            s.tilde_big_e.push(tilde);
            s.a = if a_star < tilde { a_star } else { tilde };
            s.b = b_star;
            cur = self.tree.node(v).parent;
        }
        self.steps += 1;
        let a_root = self.state[0].a;
        self.a_history.push(a_root);
        self.records.push(StepRecord {
            n: self.steps,
            node: idx,
            rule,
            candidates,
            a_root,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    /// Whether the trimmed tree stops at `id`: `E(λ) = e_{r(𝒯',λ)}(λ)`.
    pub fn is_cut(&self, id: NodeId) -> bool {
        let s = &self.state[id];
        s.current_e() == s.e_r
    }

    /// `T_N`: keep refinements from the root down to the first node on each
    /// path with `E(λ) = e_r(λ)`; that node gets `p_max = r(𝒯', λ)`.
    pub fn trim(&self) -> QuarkletTree {
        let (sub, map) = self.tree.prune(|old| !self.is_cut(old));
        QuarkletTree::from_leaf_degrees(sub, |leaf| self.state[map[leaf]].r)
    }

    pub fn global_error(&self) -> f64 {
        global_error(&self.model, &self.trim())
    }

    pub fn snapshot(&self) -> Snapshot {
        let t = self.trim();
        Snapshot {
            n: self.steps,
            grown_nodes: self.tree.len(),
            cardinality: t.cardinality(),
            global_error: global_error(&self.model, &t),
            a_root: self.state[0].a,
            step_count: self.step_count(),
        }
    }
}
