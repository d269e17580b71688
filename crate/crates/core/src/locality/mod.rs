//! Syntactic locality, distance patterns and cl-terms.

pub mod clterm;
pub mod compiled;
pub mod decompose;
pub mod engine;
pub mod split;
pub mod syntax;

pub use clterm::{BasicClTerm, ClBuilder, ClKind, ClPoly};
pub use decompose::{
    cl_decompose, cl_decompose_with, dispatch_sentences, eval_decomposition, ClDecomposition, DecompositionStats,
    Definition, Final,
};
pub use engine::{direct_values, eval_basic_cl, eval_in_neighbourhood, ClEngine, DirectEngine};
pub use split::fv_split;
pub use syntax::{local_radius, restrict_to_pattern};

use crate::logic::{Formula, Var};
use crate::structures::PatternGraph;

/// `delta_{G,d}(vars)`: adjacent pattern vertices are within distance `d`,
/// non-adjacent ones are not.
pub fn delta_formula(g: &PatternGraph, d: u32, vars: &[Var]) -> Formula {
    let mut parts = Vec::new();
    for i in 0..g.k() {
        for j in i + 1..g.k() {
            let atom = Formula::dist(vars[i].clone(), vars[j].clone(), d);
            parts.push(if g.has_edge(i, j) { atom } else { Formula::not(atom) });
        }
    }
    Formula::and_all(parts)
}
