//! File formats: coefficient input, tree JSON, DOT meshes, run summaries and
//! per-step CSV tables.

use std::fmt::Write as _;

use quarklet_core::index::Alpha;
use quarklet_core::nearbest::Snapshot;
use quarklet_core::{CoefficientSequence, EnhancedIndex, ModelParams, QuarkletTree};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TREE_SCHEMA: &str = "quarklet-tree/v1";
pub const RUN_SCHEMA: &str = "quarklet-run/v1";
pub const STEPS_HEADER: &str = "# quarklet-steps v1";
pub const STEPS_COLUMNS: &str = "N,grown_nodes,cardinality,global_error,a_root,step_count";

/// One entry of a coefficient file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub p1: u32,
    pub j1: u32,
    pub k1: i64,
    pub p2: u32,
    pub j2: u32,
    pub k2: i64,
    #[serde(default)]
    pub alpha: u8,
    pub c: f64,
}

impl CoefficientEntry {
    pub fn from_index(idx: &EnhancedIndex, c: f64) -> Self {
        Self {
            p1: idx.p1,
            j1: idx.j1,
            k1: idx.k1,
            p2: idx.p2,
            j2: idx.j2,
            k2: idx.k2,
            alpha: idx.alpha.as_u8(),
            c,
        }
    }
}

/// Parse a coefficient file (a JSON array of entries) and validate every
/// entry against `params`. All violations are reported together.
pub fn parse_coefficients(
    text: &str,
    params: ModelParams,
) -> Result<CoefficientSequence, CliError> {
    if text.trim().is_empty() {
        return Ok(CoefficientSequence::new(params));
    }
    let entries: Vec<CoefficientEntry> = serde_json::from_str(text)
        .map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let mut problems = Vec::new();
    let mut indices = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        if !e.c.is_finite() {
            problems.push(format!("entry {i}: field c is not finite"));
        }
        match Alpha::from_u8(e.alpha) {
            Some(a) => indices.push((
                EnhancedIndex::new(e.p1, e.j1, e.k1, e.p2, e.j2, e.k2, a),
                e.c,
            )),
            None => problems.push(format!(
                "entry {i}: field alpha must be 0, 1 or 2, got {}",
                e.alpha
            )),
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Input(problems.join("\n")));
    }
    CoefficientSequence::from_entries(params, indices).map_err(|errs| {
        CliError::Constraint(
            errs.into_iter()
                .map(|(i, e)| format!("entry {i}: {e}"))
                .collect(),
        )
    })
}

pub fn coefficients_to_json(c: &CoefficientSequence) -> String {
    let entries: Vec<CoefficientEntry> = c
        .iter()
        .map(|(i, &v)| CoefficientEntry::from_index(i, v))
        .collect();
    serde_json::to_string_pretty(&entries).expect("coefficients serialize")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeNodeJson {
    pub p1: u32,
    pub j1: u32,
    pub k1: i64,
    pub p2: u32,
    pub j2: u32,
    pub k2: i64,
    pub alpha: u8,
    pub parent: Option<usize>,
    /// Rule that created the node.
    pub rule: Option<String>,
    pub p_max: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeJson {
    pub schema: String,
    pub nodes: Vec<TreeNodeJson>,
}

impl TreeJson {
    pub fn from_tree(t: &QuarkletTree) -> Self {
        let w = t.tree();
        let nodes = w
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| TreeNodeJson {
                p1: 0,
                j1: n.index.j1,
                k1: n.index.k1,
                p2: 0,
                j2: n.index.j2,
                k2: n.index.k2,
                alpha: n.index.alpha.as_u8(),
                parent: n.parent,
                rule: n.created_by.map(|r| r.name().to_string()),
                p_max: t.p_max(id),
            })
            .collect();
        Self {
            schema: TREE_SCHEMA.to_string(),
            nodes,
        }
    }
}

pub fn tree_to_json(t: &QuarkletTree) -> String {
    serde_json::to_string_pretty(&TreeJson::from_tree(t)).expect("tree serializes")
}

/// The mesh of a quarklet tree as a DOT graph. Leaves carry their reference
/// rectangle and degree.
pub fn tree_to_dot(t: &QuarkletTree) -> String {
    let w = t.tree();
    let mut s =
        String::from("digraph quarklet_tree {\n  node [shape=box, fontname=\"monospace\"];\n");
    for (id, n) in w.nodes().iter().enumerate() {
        let rect = n
            .index
            .rectangle()
            .map(|r| {
                let [x0, x1, y0, y1] = r.bounds();
                format!("\\n[{x0},{x1})x[{y0},{y1})")
            })
            .unwrap_or_default();
        let style = if w.is_leaf(id) {
            ", style=filled, fillcolor=\"#dde8f5\""
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "  n{id} [label=\"{}{rect}\\np_max={}\"{style}];",
            n.index,
            t.p_max(id)
        );
    }
    for (id, n) in w.nodes().iter().enumerate() {
        if let Some(p) = n.parent {
            let rule = n.created_by.map(|r| r.name()).unwrap_or("");
            let _ = writeln!(s, "  n{p} -> n{id} [label=\"{rule}\"];");
        }
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub grown_nodes: usize,
    pub cardinality: usize,
    pub global_error: f64,
    pub a_root: f64,
    pub step_count: usize,
}

/// Empty float sums are `-0.0`; print them as `0`.
pub fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

impl From<&Snapshot> for StepRow {
    fn from(s: &Snapshot) -> Self {
        Self {
            n: s.n,
            grown_nodes: s.grown_nodes,
            cardinality: s.cardinality,
            global_error: unsigned_zero(s.global_error),
            a_root: unsigned_zero(s.a_root),
            step_count: s.step_count,
        }
    }
}

pub fn steps_to_csv(rows: &[StepRow]) -> String {
    let mut s = format!("{STEPS_HEADER}\n{STEPS_COLUMNS}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{}",
            r.n, r.grown_nodes, r.cardinality, r.global_error, r.a_root, r.step_count
        );
    }
    s
}

/// Summary of a growth run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunJson {
    pub schema: String,
    pub steps: Vec<StepRow>,
    pub tree: TreeJson,
    pub global_error: f64,
    #[serde(rename = "a_R_history")]
    pub a_root_history: Vec<f64>,
    pub step_count: usize,
}

pub fn run_to_json(run: &RunJson) -> String {
    serde_json::to_string_pretty(run).expect("run serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(1, 2, 2.0).unwrap()
    }

    #[test]
    fn alpha_defaults_to_zero() {
        let c = parse_coefficients(
            r#"[{"p1":0,"j1":1,"k1":0,"p2":1,"j2":1,"k2":1,"c":0.5}]"#,
            params(),
        )
        .unwrap();
        assert_eq!(
            c.get(&EnhancedIndex::new(0, 1, 0, 1, 1, 1, Alpha::Both)),
            0.5
        );
    }

    #[test]
    fn parse_error_has_position() {
        let err = parse_coefficients("[{\"p1\":0,\n \"j1\":\"x\"}]", params()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn every_violation_listed() {
        let text = r#"[{"p1":0,"j1":1,"k1":7,"p2":0,"j2":1,"k2":0,"c":1},
                       {"p1":0,"j1":1,"k1":0,"p2":0,"j2":1,"k2":0,"c":1},
                       {"p1":0,"j1":1,"k1":0,"p2":0,"j2":1,"k2":0,"alpha":1,"c":1}]"#;
        let err = parse_coefficients(text, params()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        let msg = err.to_string();
        assert!(
            msg.contains("entry 0") && msg.contains("entry 2") && !msg.contains("entry 1"),
            "{msg}"
        );
    }

    #[test]
    fn empty_input_is_empty_sequence() {
        assert!(parse_coefficients("  \n", params()).unwrap().is_empty());
        assert!(parse_coefficients("[]", params()).unwrap().is_empty());
    }

    #[test]
    fn csv_has_versioned_header() {
        let csv = steps_to_csv(&[StepRow {
            n: 0,
            grown_nodes: 1,
            cardinality: 1,
            global_error: 0.0,
            a_root: 0.0,
            step_count: 1,
        }]);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(STEPS_HEADER));
        assert_eq!(lines.next(), Some(STEPS_COLUMNS));
        assert_eq!(lines.next(), Some("0,1,1,0e0,0e0,1"));
    }
}
