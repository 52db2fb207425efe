//! Wavelet trees grown by the local refinement rules, and quarklet trees
//! that attach a maximal polynomial degree to every node.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::index::{children, chosen_child, EnhancedIndex, Rule};
use crate::{Error, Result};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeNode {
    pub index: EnhancedIndex,
    pub parent: Option<NodeId>,
    /// Rule that created this node from its parent.
    pub created_by: Option<Rule>,
    /// Whether this node continues the `Υ` chain of its parent.
    pub chosen: bool,
    /// Rule applied to this node, if it was refined.
    pub refined_by: Option<Rule>,
    pub children: Vec<NodeId>,
}

/// A finite tree rooted at a single node. Parents are stored explicitly,
/// since some nodes can be generated from two different parents.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletTree {
    nodes: Vec<TreeNode>,
    lookup: BTreeMap<EnhancedIndex, NodeId>,
}

impl WaveletTree {
    pub fn new(root: EnhancedIndex) -> Self {
        let mut lookup = BTreeMap::new();
        lookup.insert(root, 0);
        let nodes = alloc::vec![TreeNode {
            index: root,
            parent: None,
            created_by: None,
            chosen: false,
            refined_by: None,
            children: Vec::new(),
        }];
        Self { nodes, lookup }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn index(&self, id: NodeId) -> EnhancedIndex {
        self.nodes[id].index
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn find(&self, idx: &EnhancedIndex) -> Option<NodeId> {
        self.lookup.get(idx).copied()
    }

    pub fn contains(&self, idx: &EnhancedIndex) -> bool {
        self.lookup.contains_key(idx)
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes[id].refined_by.is_none()
    }

    /// Nodes that have not been refined, in creation order.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| self.is_leaf(i)).collect()
    }

    /// Apply `rule` at leaf `id`; returns the new node ids.
    pub fn refine(&mut self, id: NodeId, rule: Rule) -> Result<Vec<NodeId>> {
        let idx = self.nodes[id].index;
        if !self.is_leaf(id) {
            return Err(Error::NotALeaf(idx));
        }
        let kids = children(&idx, rule)?;
        if kids.is_empty() {
            return Err(Error::NoAdmissibleChildren { node: idx, rule });
        }
        if let Some(dup) = kids.iter().find(|c| self.lookup.contains_key(c)) {
            return Err(Error::DuplicateNode(*dup));
        }
        let chosen = chosen_child(&idx, rule);
        let mut ids = Vec::with_capacity(kids.len());
        for c in kids {
            let cid = self.nodes.len();
            self.nodes.push(TreeNode {
                index: c,
                parent: Some(id),
                created_by: Some(rule),
                chosen: Some(c) == chosen,
                refined_by: None,
                children: Vec::new(),
            });
            self.lookup.insert(c, cid);
            ids.push(cid);
        }
        self.nodes[id].refined_by = Some(rule);
        self.nodes[id].children = ids.clone();
        Ok(ids)
    }

    /// Undo the most recent refinement, which must be the one at `id`.
    pub fn unrefine_last(&mut self, id: NodeId) {
        let kids = core::mem::take(&mut self.nodes[id].children);
        debug_assert!(kids.last().is_none_or(|&l| l + 1 == self.nodes.len()));
        for c in kids.iter().rev() {
            let n = self.nodes.pop().expect("child present");
            debug_assert_eq!(*c, self.nodes.len());
            self.lookup.remove(&n.index);
        }
        self.nodes[id].refined_by = None;
    }

    /// `Υ(λ)`: `λ` followed by the ancestors reached while the current node is
    /// the chosen child of its parent.
    pub fn upsilon(&self, id: NodeId) -> Vec<NodeId> {
        let mut chain = alloc::vec![id];
        let mut cur = id;
        while self.nodes[cur].chosen {
            cur = self.nodes[cur].parent.expect("chosen node has a parent");
            chain.push(cur);
        }
        chain
    }

    pub fn upsilon_indices(&self, id: NodeId) -> Vec<EnhancedIndex> {
        self.upsilon(id)
            .into_iter()
            .map(|i| self.nodes[i].index)
            .collect()
    }

    /// Ancestors of `id` including itself, from `id` up to the root.
    pub fn ancestors(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = alloc::vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out
    }

    /// All nodes of the subtree rooted at `id`, preorder.
    pub fn subtree(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = alloc::vec![id];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// `r(𝒯, λ)`: number of refinements inside the subtree rooted at `id`.
    pub fn refinement_count(&self, id: NodeId) -> usize {
        self.subtree(id)
            .into_iter()
            .filter(|&n| !self.is_leaf(n))
            .count()
    }

    /// Number of refinements in the whole tree.
    pub fn refinements(&self) -> usize {
        self.nodes.iter().filter(|n| n.refined_by.is_some()).count()
    }

    /// Re-check that every refinement reproduces the stored children.
    pub fn validate(&self) -> Result<()> {
        for (id, n) in self.nodes.iter().enumerate() {
            if let Some(rule) = n.refined_by {
                let want = children(&n.index, rule)?;
                let got: Vec<EnhancedIndex> =
                    n.children.iter().map(|&c| self.nodes[c].index).collect();
                if want != got || n.children.iter().any(|&c| self.nodes[c].parent != Some(id)) {
                    return Err(Error::NotASubtree);
                }
            }
        }
        Ok(())
    }

    /// Copy of the tree keeping the refinements at nodes for which `keep`
    /// returns true, starting from the root.
    pub fn prune<F: Fn(NodeId) -> bool>(&self, keep: F) -> (WaveletTree, Vec<NodeId>) {
        let mut out = WaveletTree::new(self.nodes[0].index);
        // map[new id] = old id
        let mut map = alloc::vec![0usize];
        let mut i = 0;
        while i < out.nodes.len() {
            let old = map[i];
            if let Some(rule) = self.nodes[old].refined_by {
                if keep(old) {
                    out.refine(i, rule).expect("replaying a valid refinement");
                    map.extend(self.nodes[old].children.iter().copied());
                }
            }
            i += 1;
        }
        (out, map)
    }
}

/// `((p+1)^2 + (p+1)) / 2`: number of degree pairs `p1 + p2 <= p`.
pub fn triangular(p: u32) -> usize {
    let q = p as usize + 1;
    q * (q + 1) / 2
}

/// A wavelet tree together with `p_max` per node. `p_max` is constant on
/// every `Υ(leaf)`, and those sets partition the tree.
#[derive(Clone, Debug, PartialEq)]
pub struct QuarkletTree {
    tree: WaveletTree,
    p_max: Vec<u32>,
}

impl QuarkletTree {
    /// Spread leaf degrees over their `Υ` chains.
    pub fn from_leaf_degrees<F: Fn(NodeId) -> u32>(tree: WaveletTree, leaf_degree: F) -> Self {
        let mut p_max = alloc::vec![0; tree.len()];
        for leaf in tree.leaves() {
            let p = leaf_degree(leaf);
            for n in tree.upsilon(leaf) {
                p_max[n] = p;
            }
        }
        Self { tree, p_max }
    }

    pub fn tree(&self) -> &WaveletTree {
        &self.tree
    }

    pub fn p_max(&self, id: NodeId) -> u32 {
        self.p_max[id]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.p_max
    }

    /// `#T = |𝒯| + Σ_λ (triangular(p_max(λ)) - 1)`.
    pub fn cardinality(&self) -> usize {
        self.p_max.iter().map(|&p| triangular(p)).sum()
    }

    /// Leaves with their degrees.
    pub fn leaf_degrees(&self) -> Vec<(NodeId, u32)> {
        self.tree
            .leaves()
            .into_iter()
            .map(|l| (l, self.p_max[l]))
            .collect()
    }

    /// Check that `p_max` is constant on each `Υ(leaf)`.
    pub fn is_consistent(&self) -> bool {
        self.tree.leaves().into_iter().all(|l| {
            let p = self.p_max[l];
            self.tree.upsilon(l).into_iter().all(|n| self.p_max[n] == p)
        })
    }
}

/// Build `T = (𝒯, P_max)` from `𝒯 ⊆ 𝒯'`, with `p_max(λ) = r(𝒯', λ)` for
/// each leaf `λ` of `𝒯`.
pub fn trim_degrees(sub: &WaveletTree, sup: &WaveletTree) -> Result<QuarkletTree> {
    if sub.index(0) != sup.index(0) {
        return Err(Error::NotASubtree);
    }
    let mut map = alloc::vec![0usize; sub.len()];
    for (id, n) in sub.nodes.iter().enumerate() {
        let Some(sid) = sup.find(&n.index) else {
            return Err(Error::NotASubtree);
        };
        map[id] = sid;
        if let Some(rule) = n.refined_by {
            let sn = &sup.nodes[sid];
            if sn.refined_by != Some(rule) {
                return Err(Error::NotASubtree);
            }
        }
        if let Some(p) = n.parent {
            if sup.nodes[sid].parent != Some(map[p]) {
                return Err(Error::NotASubtree);
            }
        }
    }
    let degrees: Vec<u32> = (0..sub.len())
        .map(|id| sup.refinement_count(map[id]) as u32)
        .collect();
    Ok(QuarkletTree::from_leaf_degrees(sub.clone(), |l| degrees[l]))
}
