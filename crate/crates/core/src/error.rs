use core::fmt;

use crate::index::{Alpha, EnhancedIndex, Rule};

/// Errors raised by the core routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// `m < 2`, `m̃ < m` or `m + m̃` odd.
    InvalidOrder { m: u32, m_tilde: u32 },
    /// A valid order for which no filter table is shipped.
    UnsupportedOrder { m: u32, m_tilde: u32 },
    /// The coarsest level is too small for the boundary construction.
    LevelTooCoarse { j: u32, min: u32 },
    /// A translation or level outside its admissible range.
    IndexOutOfRange { what: &'static str, j: i64, k: i64 },
    /// The weight exponent must exceed one.
    InvalidDelta(f64),
    /// The rule cannot be applied to a node carrying this `α`.
    RuleIncompatible { rule: Rule, alpha: Alpha },
    /// Refinement requested at a node that is not a leaf.
    NotALeaf(EnhancedIndex),
    /// The rule is blocked by the unidirectional-prolongation constraint.
    NoAdmissibleChildren { node: EnhancedIndex, rule: Rule },
    /// A node would appear twice in the same tree.
    DuplicateNode(EnhancedIndex),
    /// The first tree is not a subtree of the second one.
    NotASubtree,
    /// The moment system has more than a one-dimensional kernel.
    RankDeficient { nullity: usize },
    /// Neither direction can be refined at the selected leaf.
    NoAvailableRefinement(EnhancedIndex),
    /// The exhaustive oracle refuses this bound.
    BoundTooLarge { n: usize, cap: usize },
    /// A coefficient attached to an `α` variant that can never be captured.
    UnreachableAlpha(EnhancedIndex),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidOrder { m, m_tilde } => {
                write!(
                    f,
                    "invalid spline order (m={m}, m~={m_tilde}): need m >= 2, m~ >= m, m+m~ even"
                )
            }
            Error::UnsupportedOrder { m, m_tilde } => {
                write!(
                    f,
                    "no CDF filter table for (m={m}, m~={m_tilde}); supported: (2,2), (3,3)"
                )
            }
            Error::LevelTooCoarse { j, min } => write!(f, "level {j} is below the minimum {min}"),
            Error::IndexOutOfRange { what, j, k } => {
                write!(f, "{what} index out of range: j={j}, k={k}")
            }
            Error::InvalidDelta(d) => write!(f, "weight exponent delta={d} must be > 1"),
            Error::RuleIncompatible { rule, alpha } => {
                write!(
                    f,
                    "rule {rule} cannot refine a node with alpha={}",
                    alpha.as_u8()
                )
            }
            Error::NotALeaf(n) => write!(f, "node {n} is not a leaf"),
            Error::NoAdmissibleChildren { node, rule } => {
                write!(f, "rule {rule} has no admissible children at {node}")
            }
            Error::DuplicateNode(n) => write!(f, "node {n} already present"),
            Error::NotASubtree => write!(f, "tree is not a subtree of the reference tree"),
            Error::RankDeficient { nullity } => {
                write!(f, "moment system has a kernel of dimension {nullity}")
            }
            Error::NoAvailableRefinement(n) => write!(f, "no refinement available at {n}"),
            Error::BoundTooLarge { n, cap } => write!(f, "oracle bound n={n} exceeds cap {cap}"),
            Error::UnreachableAlpha(n) => {
                write!(
                    f,
                    "coefficient {n} has alpha != 0, which no tree can capture"
                )
            }
        }
    }
}

impl core::error::Error for Error {}
