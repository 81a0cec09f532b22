//! Finite-level constructions around the topological groupoid of a complete
//! first-order theory: formulas, decision procedures for four built-in
//! theories, rich sequences and their Skolem sorts, the clopen algebra of the
//! groupoid, concrete countable models, reconstruction of the theory from the
//! groupoid presentation, and the omega-categorical specials.

pub mod categorical;
pub mod error;
pub mod formula;
pub mod groupoid;
pub mod model;
pub mod pos;
pub mod reconstruction;
pub mod skolem;
pub mod theory;

pub use error::{Result, TgwError};
pub use formula::{parse_formula, render_formula, substitute_vars, Formula, Signature, VarRef};
pub use pos::Pos;
pub use theory::{CompleteType, Theory, TheoryId};
