//! First-order formulas over a relational signature with tape-indexed
//! variables.
//!
//! A variable is a `(tape, position)` pair. Tape 0 is written `x`, tape 1 `y`,
//! tape 2 `z`, tape 3 `w`, and further tapes continue down the alphabet
//! (`v`, `u`, `t`, ...). So `x3` is position 3 of tape 0 and `z0` is position
//! 0 of tape 2.

mod parse;
mod render;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::{parse_formula, ParseError, ParseErrorKind};
pub use subst::VarMap;

use crate::pos::Pos;

/// Largest tape index with a letter name.
pub const MAX_TAPE: u32 = 25;

/// Tape reserved for fresh bound variables introduced by renaming.
pub const SCRATCH_TAPE: u32 = MAX_TAPE;

pub fn tape_letter(tape: u32) -> Option<char> {
    match tape {
        0 => Some('x'),
        1 => Some('y'),
        2 => Some('z'),
        3 => Some('w'),
        4..=MAX_TAPE => Some((b'v' - (tape as u8 - 4)) as char),
        _ => None,
    }
}

pub fn tape_of_letter(c: char) -> Option<u32> {
    match c {
        'x' => Some(0),
        'y' => Some(1),
        'z' => Some(2),
        'w' => Some(3),
        'a'..='v' => Some(4 + (b'v' - c as u8) as u32),
        _ => None,
    }
}

/// A tape-indexed variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef {
    pub tape: u32,
    pub pos: Pos,
}

impl VarRef {
    pub fn new(tape: u32, pos: impl Into<Pos>) -> Self {
        assert!(tape <= MAX_TAPE, "tape {tape} has no variable name");
        VarRef { tape, pos: pos.into() }
    }

    pub fn x(pos: impl Into<Pos>) -> Self {
        VarRef::new(0, pos)
    }

    pub fn y(pos: impl Into<Pos>) -> Self {
        VarRef::new(1, pos)
    }

    pub fn z(pos: impl Into<Pos>) -> Self {
        VarRef::new(2, pos)
    }

    pub fn with_tape(&self, tape: u32) -> Self {
        VarRef { tape, pos: self.pos.clone() }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = tape_letter(self.tape).unwrap_or('?');
        write!(f, "{c}{}", self.pos)
    }
}

impl fmt::Debug for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A relational signature. Equality is always available and never listed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub relations: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(name: &str, relations: &[(&str, usize)]) -> Self {
        let mut seen = BTreeSet::new();
        for (sym, arity) in relations {
            assert!(*arity >= 1, "relation {sym} must have positive arity");
            assert!(seen.insert(*sym), "duplicate relation symbol {sym}");
        }
        Signature {
            name: name.to_owned(),
            relations: relations.iter().map(|(s, a)| ((*s).to_owned(), *a)).collect(),
        }
    }

    pub fn arity(&self, sym: &str) -> Option<usize> {
        self.relations.iter().find(|(s, _)| s == sym).map(|(_, a)| *a)
    }
}

/// Formula syntax tree.
///
/// `And` and `Or` are flattened, sorted and deduplicated by the smart
/// constructors [`Formula::and`] and [`Formula::or`]; code outside this module
/// should build them through those.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<VarRef>),
    Eq(VarRef, VarRef),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(VarRef, Box<Formula>),
    Forall(VarRef, Box<Formula>),
}

impl Formula {
    pub fn atom(sym: &str, args: Vec<VarRef>) -> Formula {
        Formula::Atom(sym.to_owned(), args)
    }

    pub fn atom2(sym: &str, a: VarRef, b: VarRef) -> Formula {
        Formula::Atom(sym.to_owned(), vec![a, b])
    }

    pub fn eq(a: VarRef, b: VarRef) -> Formula {
        Formula::Eq(a, b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: VarRef, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn forall(v: VarRef, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists_many(vars: impl IntoIterator<Item = VarRef>, body: Formula) -> Formula {
        let vars: Vec<VarRef> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::exists(v, acc))
    }

    pub fn forall_many(vars: impl IntoIterator<Item = VarRef>, body: Formula) -> Formula {
        let vars: Vec<VarRef> = vars.into_iter().collect();
        vars.into_iter().rev().fold(body, |acc, v| Formula::forall(v, acc))
    }

    /// Flattened, sorted, deduplicated conjunction. The empty conjunction is
    /// `True` and a singleton collapses to its element.
    pub fn and(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        out.sort();
        out.dedup();
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Flattened, sorted, deduplicated disjunction; dual of [`Formula::and`].
    pub fn or(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        out.sort();
        out.dedup();
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    /// `a ↔ b` as a conjunction of two implications.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and([Formula::implies(a.clone(), b.clone()), Formula::implies(b, a)])
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Maximum nesting of quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 0,
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(Formula::quantifier_depth).max().unwrap_or(0)
            }
            Formula::Implies(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_depth(),
        }
    }

    /// Connective depth: atoms and constants have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 0,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::Implies(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Number of syntax-tree nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 1,
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.size(),
            Formula::And(fs) | Formula::Or(fs) => 1 + fs.iter().map(Formula::size).sum::<usize>(),
            Formula::Implies(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<VarRef>, out: &mut BTreeSet<VarRef>) {
        let mut add = |v: &VarRef, bound: &Vec<VarRef>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|v| add(v, bound)),
            Formula::Eq(a, b) => {
                add(a, bound);
                add(b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<VarRef> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(v.clone());
        });
        out
    }

    fn visit_vars(&self, f: &mut impl FnMut(&VarRef)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(&mut *f),
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            Formula::Not(g) => g.visit_vars(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_vars(f)),
            Formula::Implies(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Formula::Exists(v, g) | Formula::Forall(v, g) => {
                f(v);
                g.visit_vars(f);
            }
        }
    }

    /// Relation symbols used, with the arities they are used at.
    pub fn relations_used(&self) -> BTreeSet<(String, usize)> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |sym, n| {
            out.insert((sym.to_owned(), n));
        });
        out
    }

    fn visit_atoms(&self, f: &mut impl FnMut(&str, usize)) {
        match self {
            Formula::Atom(sym, args) => f(sym, args.len()),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit_atoms(f),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.visit_atoms(f)),
            Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
            _ => {}
        }
    }

    /// Canonical text; see [`render_formula`].
    pub fn render(&self) -> String {
        render::render(self)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Canonical printing. `parse_formula(render_formula(f))` gives back `f`.
pub fn render_formula(f: &Formula) -> String {
    render::render(f)
}

/// Replaces free occurrences of variables according to `map`, renaming bound
/// variables when they would capture a substituted variable.
pub fn substitute_vars(f: &Formula, map: &VarMap) -> Formula {
    subst::substitute(f, map)
}
