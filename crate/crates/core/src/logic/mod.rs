//! Syntax of FOC(P): AST, parser, renderer, numeric predicates and static
//! analysis.

pub mod analysis;
pub mod ast;
pub mod parser;
pub mod predicates;
pub mod render;
pub mod simplify;

pub use analysis::{
    count_depth, count_depth_expr, count_depth_term, f_q, free_vars, free_vars_expr, free_vars_term, q_rank_check,
    quantifier_rank, signature_of, size, validate_fo1c, Fo1cReport,
};
pub use ast::{rename_free, rename_free_term, Conjunct, Expr, Formula, Query, Term, Var};
pub use parser::{parse_expr, parse_formula, parse_query, parse_term, tokenize};
pub use predicates::{is_prime, NumericPredicate, Oracle, Registry};
pub use simplify::{assign_atoms, simplify};
