//! The subcommands as library functions returning their artifacts.

use std::fmt::Write as _;

use quarklet_core::index::{Alpha, Rule};
use quarklet_core::oracle::{sigma_n_recursive, sigma_table, MAX_EXHAUSTIVE_N};
use quarklet_core::tree::NodeId;
use quarklet_core::{
    CoefficientSequence, EnhancedIndex, GrowthRun, L2ErrorModel, ModelParams, QuarkletTree,
    SplineOrder, WaveletTree,
};

use crate::certify::{certify_model, InstanceReport};
use crate::error::CliError;
use crate::instances::{random_coefficients, rng, InstanceShape};
use crate::io::{self, RunJson, StepRow, TreeJson, RUN_SCHEMA, TREE_SCHEMA};

/// Shared model parameters, validated before any run.
#[derive(Clone, Copy, Debug)]
pub struct RunConfig {
    pub m: u32,
    pub m_tilde: u32,
    pub j0: u32,
    pub delta: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(SplineOrder, ModelParams), CliError> {
        let order = SplineOrder::new(self.m, self.m_tilde)?;
        let params = ModelParams::new(self.j0, self.m, self.delta)?;
        Ok((order, params))
    }
}

/// Everything an `approximate` run produces.
#[derive(Clone, Debug)]
pub struct Approximation {
    pub rows: Vec<StepRow>,
    pub tree: QuarkletTree,
    pub run: RunJson,
}

impl Approximation {
    pub fn csv(&self) -> String {
        io::steps_to_csv(&self.rows)
    }

    pub fn json(&self) -> String {
        io::run_to_json(&self.run)
    }

    pub fn tree_json(&self) -> String {
        io::tree_to_json(&self.tree)
    }

    pub fn dot(&self) -> String {
        io::tree_to_dot(&self.tree)
    }
}

pub fn approximate(c: &CoefficientSequence, steps: usize) -> Result<Approximation, CliError> {
    let model = L2ErrorModel::new(c);
    let mut run = GrowthRun::new(&model);
    let mut rows = vec![StepRow::from(&run.snapshot())];
    for _ in 0..steps {
        run.step()?;
        rows.push(StepRow::from(&run.snapshot()));
    }
    let tree = run.trim();
    let last = rows.last().expect("at least the root row");
    let json = RunJson {
        schema: RUN_SCHEMA.to_string(),
        global_error: last.global_error,
        step_count: last.step_count,
        steps: rows.clone(),
        tree: TreeJson::from_tree(&tree),
        a_root_history: run
            .a_history()
            .iter()
            .copied()
            .map(io::unsigned_zero)
            .collect(),
    };
    Ok(Approximation {
        rows,
        tree,
        run: json,
    })
}

pub const SIGMA_HEADER: &str = "# quarklet-sigma v1";

/// `σ_n` for `n = 1..=n_max` from the enumeration and the recursion.
pub fn oracle_table(c: &CoefficientSequence, n_max: usize) -> Result<String, CliError> {
    if n_max > MAX_EXHAUSTIVE_N {
        return Err(CliError::Input(format!(
            "oracle bound {n_max} exceeds cap {MAX_EXHAUSTIVE_N}"
        )));
    }
    let model = L2ErrorModel::new(c);
    let table = sigma_table(&model, n_max)?;
    let mut s = format!("{SIGMA_HEADER}\nn,sigma_n,sigma_n_recursive\n");
    for (n, sigma) in table.iter().enumerate().skip(1) {
        let rec = sigma_n_recursive(&model, n)?;
        let _ = writeln!(s, "{n},{sigma:e},{rec:e}");
    }
    Ok(s)
}

pub const CERTIFY_HEADER: &str = "# quarklet-certify v1";

/// Certification over `instances` seeded random coefficient sequences.
pub fn certify(seed: u64, instances: usize, n_max: usize) -> Result<Vec<InstanceReport>, CliError> {
    if n_max > MAX_EXHAUSTIVE_N {
        return Err(CliError::Input(format!(
            "oracle bound {n_max} exceeds cap {MAX_EXHAUSTIVE_N}"
        )));
    }
    let shape = InstanceShape::certification();
    (0..instances as u64)
        .map(|i| {
            let id = seed.wrapping_add(i);
            let c = random_coefficients(&mut rng(id), &shape);
            certify_model(id, &L2ErrorModel::new(&c), n_max)
        })
        .collect()
}

pub fn certify_csv(reports: &[InstanceReport]) -> String {
    let mut s =
        format!("{CERTIFY_HEADER}\nseed,max_ratio,worst_n,worst_N,window_ok,step_count_ok,pass\n");
    for r in reports {
        let _ = writeln!(
            s,
            "{},{:.12},{},{},{},{},{}",
            r.id,
            r.max_ratio,
            r.worst.0,
            r.worst.1,
            r.window_violations.is_empty(),
            r.step_count_mismatches.is_empty(),
            r.passed()
        );
    }
    s
}

/// Rebuild a quarklet tree from its JSON form by replaying the recorded
/// refinements. All mismatches are reported.
pub fn import_tree(text: &str) -> Result<QuarkletTree, CliError> {
    let json: TreeJson = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if json.schema != TREE_SCHEMA {
        return Err(CliError::Input(format!(
            "unsupported schema {:?}, expected {TREE_SCHEMA:?}",
            json.schema
        )));
    }
    let mut problems = Vec::new();
    let mut indices = Vec::with_capacity(json.nodes.len());
    for (i, n) in json.nodes.iter().enumerate() {
        match Alpha::from_u8(n.alpha) {
            Some(a) if n.p1 == 0 && n.p2 == 0 => {
                indices.push(EnhancedIndex::node(n.j1, n.k1, n.j2, n.k2, a))
            }
            Some(_) => problems.push(format!("node {i}: tree nodes carry p1 = p2 = 0")),
            None => problems.push(format!(
                "node {i}: alpha must be 0, 1 or 2, got {}",
                n.alpha
            )),
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Input(problems.join("\n")));
    }
    let Some(&root) = indices.first() else {
        return Err(CliError::Input("tree has no nodes".into()));
    };
    if root != EnhancedIndex::ROOT || json.nodes[0].parent.is_some() {
        problems.push(format!("node 0: expected the root {}", EnhancedIndex::ROOT));
    }
    let mut tree = WaveletTree::new(EnhancedIndex::ROOT);
    let mut map: Vec<Option<NodeId>> = vec![Some(0); 1];
    for (i, n) in json.nodes.iter().enumerate().skip(1) {
        let placed = (|| -> Result<NodeId, String> {
            let parent = n.parent.ok_or("missing parent")?;
            let pid = map
                .get(parent)
                .copied()
                .flatten()
                .ok_or(format!("parent {parent} not defined earlier"))?;
            let rule_name = n.rule.as_deref().ok_or("missing rule")?;
            let rule = Rule::parse(rule_name).ok_or(format!("unknown rule {rule_name:?}"))?;
            if tree.node(pid).refined_by.is_none() {
                tree.refine(pid, rule).map_err(|e| e.to_string())?;
            } else if tree.node(pid).refined_by != Some(rule) {
                return Err(format!("parent {parent} is refined by two rules"));
            }
            let id = tree
                .find(&indices[i])
                .ok_or(format!("{} is not a child of node {parent}", indices[i]))?;
            if tree.node(id).parent != Some(pid) {
                return Err(format!("{} has a different parent", indices[i]));
            }
            Ok(id)
        })();
        match placed {
            Ok(id) => map.push(Some(id)),
            Err(e) => {
                problems.push(format!("node {i}: {e}"));
                map.push(None);
            }
        }
    }
    if problems.is_empty() && tree.len() != json.nodes.len() {
        problems.push(format!(
            "{} nodes listed but the refinements create {}",
            json.nodes.len(),
            tree.len()
        ));
    }
    if !problems.is_empty() {
        return Err(CliError::Constraint(problems));
    }
    let mut back = vec![0usize; tree.len()];
    for (old, new) in map.iter().enumerate() {
        back[new.expect("all placed")] = old;
    }
    let q = QuarkletTree::from_leaf_degrees(tree, |leaf| json.nodes[back[leaf]].p_max);
    for (new, &old) in back.iter().enumerate() {
        if q.p_max(new) != json.nodes[old].p_max {
            problems.push(format!(
                "node {old}: p_max {} differs from the degree {} of its leaf chain",
                json.nodes[old].p_max,
                q.p_max(new)
            ));
        }
    }
    if problems.is_empty() {
        Ok(q)
    } else {
        Err(CliError::Constraint(problems))
    }
}
