//! Complete quantifier-free diagrams and their one-point extensions.

use std::collections::BTreeMap;
use std::fmt;

use super::TheoryId;
use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};

/// Relational structure on the equality classes of a diagram.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ClassStructure {
    None,
    /// Rank of each class in the strict order.
    Order(Vec<u16>),
    /// Adjacency bitmask of each class.
    Graph(Vec<u64>),
    /// Block of each class, numbered by first occurrence.
    Blocks(Vec<u16>),
}

/// A complete diagram over an ordered variable list.
///
/// The representation is canonical for the given variable order: classes are
/// numbered by first occurrence, so two diagrams over the same list are equal
/// exactly when they are the same type.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CompleteType {
    theory: TheoryId,
    vars: Vec<VarRef>,
    class: Vec<u16>,
    structure: ClassStructure,
}

impl CompleteType {
    pub fn empty(theory: TheoryId) -> Self {
        let structure = match theory {
            TheoryId::PureSet => ClassStructure::None,
            TheoryId::Dlo => ClassStructure::Order(Vec::new()),
            TheoryId::RandomGraph => ClassStructure::Graph(Vec::new()),
            TheoryId::EquivInf => ClassStructure::Blocks(Vec::new()),
        };
        CompleteType { theory, vars: Vec::new(), class: Vec::new(), structure }
    }

    /// Reads a diagram off a structure: `eq` and `rel` decide equality and
    /// the theory's relation between the variables at two indices.
    pub fn from_relations(
        theory: TheoryId,
        vars: Vec<VarRef>,
        eq: impl Fn(usize, usize) -> bool,
        rel: impl Fn(usize, usize) -> bool,
    ) -> Self {
        let mut reps: Vec<usize> = Vec::new();
        let mut class = Vec::with_capacity(vars.len());
        for i in 0..vars.len() {
            match reps.iter().position(|&r| eq(r, i)) {
                Some(c) => class.push(c as u16),
                None => {
                    class.push(reps.len() as u16);
                    reps.push(i);
                }
            }
        }
        let nc = reps.len();
        let structure = match theory {
            TheoryId::PureSet => ClassStructure::None,
            TheoryId::Dlo => ClassStructure::Order(
                (0..nc).map(|c| (0..nc).filter(|&d| rel(reps[d], reps[c])).count() as u16).collect(),
            ),
            TheoryId::RandomGraph => {
                assert!(nc <= 64, "graph diagrams are limited to 64 classes");
                ClassStructure::Graph(
                    (0..nc)
                        .map(|a| (0..nc).fold(0u64, |acc, b| acc | u64::from(a != b && rel(reps[a], reps[b])) << b))
                        .collect(),
                )
            }
            TheoryId::EquivInf => {
                let mut blocks: Vec<u16> = Vec::with_capacity(nc);
                let mut block_reps: Vec<usize> = Vec::new();
                for c in 0..nc {
                    match block_reps.iter().position(|&r| rel(reps[r], reps[c])) {
                        Some(b) => blocks.push(b as u16),
                        None => {
                            blocks.push(block_reps.len() as u16);
                            block_reps.push(c);
                        }
                    }
                }
                ClassStructure::Blocks(blocks)
            }
        };
        CompleteType { theory, vars, class, structure }
    }

    pub fn theory(&self) -> TheoryId {
        self.theory
    }

    pub fn vars(&self) -> &[VarRef] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.class.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }

    pub fn index_of(&self, v: &VarRef) -> Option<usize> {
        self.vars.iter().position(|w| w == v)
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class[i] as usize
    }

    pub fn structure(&self) -> &ClassStructure {
        &self.structure
    }

    pub fn eq_at(&self, i: usize, j: usize) -> bool {
        self.class[i] == self.class[j]
    }

    /// Truth of the theory's binary relation on variables `i`, `j`.
    pub fn rel_at(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.class[i] as usize, self.class[j] as usize);
        match &self.structure {
            ClassStructure::None => false,
            ClassStructure::Order(r) => r[a] < r[b],
            ClassStructure::Graph(adj) => adj[a] >> b & 1 == 1,
            ClassStructure::Blocks(bl) => bl[a] == bl[b],
        }
    }

    /// All one-point extensions by the fresh variable `v`, in canonical order:
    /// joining existing classes first, then the new-class options.
    pub fn extensions(&self, v: VarRef) -> Vec<CompleteType> {
        assert!(self.index_of(&v).is_none(), "variable {v} already in diagram");
        let nc = self.num_classes();
        let mut out = Vec::new();
        for c in 0..nc {
            let mut t = self.clone();
            t.vars.push(v.clone());
            t.class.push(c as u16);
            out.push(t);
        }
        let mut fresh = self.clone();
        fresh.vars.push(v);
        fresh.class.push(nc as u16);
        match &self.structure {
            ClassStructure::None => out.push(fresh),
            ClassStructure::Order(ranks) => {
                for r in 0..=nc as u16 {
                    let mut nr: Vec<u16> = ranks.iter().map(|&x| if x >= r { x + 1 } else { x }).collect();
                    nr.push(r);
                    let mut t = fresh.clone();
                    t.structure = ClassStructure::Order(nr);
                    out.push(t);
                }
            }
            ClassStructure::Graph(adj) => {
                assert!(nc < 64, "graph diagrams are limited to 64 classes");
                for mask in 0..(1u64 << nc) {
                    let mut na: Vec<u64> =
                        adj.iter().enumerate().map(|(i, &row)| row | (mask >> i & 1) << nc).collect();
                    na.push(mask);
                    let mut t = fresh.clone();
                    t.structure = ClassStructure::Graph(na);
                    out.push(t);
                }
            }
            ClassStructure::Blocks(bl) => {
                let nb = bl.iter().map(|&b| b + 1).max().unwrap_or(0);
                for b in 0..=nb {
                    let mut nbl = bl.clone();
                    nbl.push(b);
                    let mut t = fresh.clone();
                    t.structure = ClassStructure::Blocks(nbl);
                    out.push(t);
                }
            }
        }
        out
    }

    /// Restriction to `vars` (in that order), renumbered canonically.
    /// Every listed variable must occur in the diagram.
    pub fn restrict(&self, vars: &[VarRef]) -> CompleteType {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.index_of(v).unwrap_or_else(|| panic!("{v} not in diagram")))
            .collect();
        self.restrict_indices(&idx, vars.to_vec())
    }

    /// Restriction to the variables at `idx`, renamed to `names`.
    pub fn restrict_indices(&self, idx: &[usize], names: Vec<VarRef>) -> CompleteType {
        assert_eq!(idx.len(), names.len());
        let mut old_to_new: BTreeMap<u16, u16> = BTreeMap::new();
        let mut order: Vec<usize> = Vec::new();
        let mut class = Vec::with_capacity(idx.len());
        for &i in idx {
            let c = self.class[i];
            let next = old_to_new.len() as u16;
            let n = *old_to_new.entry(c).or_insert_with(|| {
                order.push(c as usize);
                next
            });
            class.push(n);
        }
        let structure = match &self.structure {
            ClassStructure::None => ClassStructure::None,
            ClassStructure::Order(r) => {
                let mut kept: Vec<(u16, usize)> = order.iter().enumerate().map(|(n, &o)| (r[o], n)).collect();
                kept.sort();
                let mut nr = vec![0u16; order.len()];
                for (rank, (_, n)) in kept.into_iter().enumerate() {
                    nr[n] = rank as u16;
                }
                ClassStructure::Order(nr)
            }
            ClassStructure::Graph(adj) => ClassStructure::Graph(
                order
                    .iter()
                    .map(|&o| {
                        order
                            .iter()
                            .enumerate()
                            .fold(0u64, |acc, (m, &p)| acc | (adj[o] >> p & 1) << m)
                    })
                    .collect(),
            ),
            ClassStructure::Blocks(bl) => {
                let mut seen: BTreeMap<u16, u16> = BTreeMap::new();
                ClassStructure::Blocks(
                    order
                        .iter()
                        .map(|&o| {
                            let next = seen.len() as u16;
                            *seen.entry(bl[o]).or_insert(next)
                        })
                        .collect(),
                )
            }
        };
        CompleteType { theory: self.theory, vars: names, class, structure }
    }

    /// Same diagram with every variable renamed through `f`.
    pub fn rename(&self, f: impl Fn(&VarRef) -> VarRef) -> CompleteType {
        let mut t = self.clone();
        t.vars = self.vars.iter().map(f).collect();
        t
    }

    /// Conjunction of the diagram's literals over the basis
    /// (equalities for i < j, the relation for every relevant ordered pair).
    pub fn diagram(&self) -> Formula {
        let sym = self.theory.relation();
        let mut lits = Vec::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let e = Formula::eq(self.vars[i].clone(), self.vars[j].clone());
                lits.push(if self.eq_at(i, j) { e } else { Formula::not(e) });
            }
        }
        if let Some(sym) = sym {
            for i in 0..self.len() {
                for j in 0..self.len() {
                    let both = matches!(self.theory, TheoryId::Dlo) && i != j;
                    if !(both || i < j) {
                        continue;
                    }
                    let a = Formula::atom2(sym, self.vars[i].clone(), self.vars[j].clone());
                    lits.push(if self.rel_at(i, j) { a } else { Formula::not(a) });
                }
            }
        }
        Formula::and(lits)
    }

    /// Compact readable description, e.g. `x0<x1` or `{x0,y0}`.
    pub fn describe(&self) -> String {
        let nc = self.num_classes();
        let mut groups: Vec<Vec<String>> = vec![Vec::new(); nc];
        for (i, v) in self.vars.iter().enumerate() {
            groups[self.class[i] as usize].push(v.to_string());
        }
        let show = |g: &Vec<String>| if g.len() == 1 { g[0].clone() } else { format!("{{{}}}", g.join("=")) };
        match &self.structure {
            ClassStructure::Order(r) => {
                let mut by_rank: Vec<(u16, usize)> = r.iter().enumerate().map(|(c, &x)| (x, c)).collect();
                by_rank.sort();
                by_rank.iter().map(|&(_, c)| show(&groups[c])).collect::<Vec<_>>().join("<")
            }
            ClassStructure::Graph(adj) => {
                let nodes = groups.iter().map(show).collect::<Vec<_>>().join(",");
                let mut edges = Vec::new();
                for a in 0..nc {
                    for b in a + 1..nc {
                        if adj[a] >> b & 1 == 1 {
                            edges.push(format!("{}~{}", show(&groups[a]), show(&groups[b])));
                        }
                    }
                }
                format!("[{nodes}] edges[{}]", edges.join(","))
            }
            ClassStructure::Blocks(bl) => {
                let nb = bl.iter().map(|&b| b as usize + 1).max().unwrap_or(0);
                (0..nb)
                    .map(|b| {
                        let members: Vec<String> =
                            (0..nc).filter(|&c| bl[c] as usize == b).map(|c| show(&groups[c])).collect();
                        format!("<{}>", members.join(","))
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            }
            ClassStructure::None => groups.iter().map(show).collect::<Vec<_>>().join(","),
        }
    }
}

impl fmt::Debug for CompleteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Type({})", self.describe())
    }
}

impl fmt::Display for CompleteType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// A quantifier-free formula compiled against a fixed variable list.
#[derive(Clone, Debug)]
pub enum QfProgram {
    Const(bool),
    Eq(usize, usize),
    Rel(usize, usize),
    Not(Box<QfProgram>),
    And(Vec<QfProgram>),
    Or(Vec<QfProgram>),
}

impl QfProgram {
    pub fn compile(f: &Formula, vars: &[VarRef]) -> Result<QfProgram> {
        let idx = |v: &VarRef| {
            vars.iter()
                .position(|w| w == v)
                .ok_or_else(|| TgwError::precondition(format!("variable {v} outside the grid")))
        };
        Ok(match f {
            Formula::True => QfProgram::Const(true),
            Formula::False => QfProgram::Const(false),
            Formula::Eq(a, b) => QfProgram::Eq(idx(a)?, idx(b)?),
            Formula::Atom(_, args) => {
                if args.len() != 2 {
                    return Err(TgwError::precondition("relation of arity other than 2"));
                }
                QfProgram::Rel(idx(&args[0])?, idx(&args[1])?)
            }
            Formula::Not(g) => QfProgram::Not(Box::new(Self::compile(g, vars)?)),
            Formula::And(gs) => QfProgram::And(gs.iter().map(|g| Self::compile(g, vars)).collect::<Result<_>>()?),
            Formula::Or(gs) => QfProgram::Or(gs.iter().map(|g| Self::compile(g, vars)).collect::<Result<_>>()?),
            Formula::Implies(a, b) => QfProgram::Or(vec![
                QfProgram::Not(Box::new(Self::compile(a, vars)?)),
                Self::compile(b, vars)?,
            ]),
            Formula::Exists(..) | Formula::Forall(..) => {
                return Err(TgwError::precondition("quantifier in a quantifier-free position"))
            }
        })
    }

    /// Largest variable index read, if any.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            QfProgram::Const(_) => None,
            QfProgram::Eq(a, b) | QfProgram::Rel(a, b) => Some(*a.max(b)),
            QfProgram::Not(g) => g.max_index(),
            QfProgram::And(gs) | QfProgram::Or(gs) => gs.iter().filter_map(|g| g.max_index()).max(),
        }
    }

    pub fn eval(&self, t: &CompleteType) -> bool {
        match self {
            QfProgram::Const(b) => *b,
            QfProgram::Eq(a, b) => t.eq_at(*a, *b),
            QfProgram::Rel(a, b) => t.rel_at(*a, *b),
            QfProgram::Not(g) => !g.eval(t),
            QfProgram::And(gs) => gs.iter().all(|g| g.eval(t)),
            QfProgram::Or(gs) => gs.iter().any(|g| g.eval(t)),
        }
    }
}

impl CompleteType {
    /// Truth of a quantifier-free formula on this diagram.
    pub fn eval_qf(&self, f: &Formula) -> Result<bool> {
        Ok(QfProgram::compile(f, &self.vars)?.eval(self))
    }
}

impl QfProgram {
    /// Kleene evaluation on a diagram whose first `d` variables are placed.
    pub fn eval3(&self, t: &CompleteType, d: usize) -> Option<bool> {
        match self {
            QfProgram::Const(b) => Some(*b),
            QfProgram::Eq(a, b) => (*a < d && *b < d).then(|| t.eq_at(*a, *b)),
            QfProgram::Rel(a, b) => (*a < d && *b < d).then(|| t.rel_at(*a, *b)),
            QfProgram::Not(g) => g.eval3(t, d).map(|b| !b),
            QfProgram::And(gs) => {
                let mut all = Some(true);
                for g in gs {
                    match g.eval3(t, d) {
                        Some(false) => return Some(false),
                        None => all = None,
                        Some(true) => {}
                    }
                }
                all
            }
            QfProgram::Or(gs) => {
                let mut any = Some(false);
                for g in gs {
                    match g.eval3(t, d) {
                        Some(true) => return Some(true),
                        None => any = None,
                        Some(false) => {}
                    }
                }
                any
            }
        }
    }
}

struct Search<'a> {
    vars: &'a [VarRef],
    prog: QfProgram,
    cap: usize,
    visited: usize,
    /// Stop after this many results.
    want: usize,
    out: Vec<CompleteType>,
}

impl Search<'_> {
    fn run(&mut self, t: CompleteType) -> Result<()> {
        self.visited += 1;
        if self.visited > self.cap {
            return Err(TgwError::resource(format!(
                "type search over {} variables visits more than {} diagrams",
                self.vars.len(),
                self.cap
            )));
        }
        let d = t.len();
        if d == self.vars.len() {
            self.out.push(t);
            return Ok(());
        }
        for ext in t.extensions(self.vars[d].clone()) {
            if self.out.len() >= self.want {
                break;
            }
            if self.prog.eval3(&ext, d + 1) != Some(false) {
                self.run(ext)?;
            }
        }
        Ok(())
    }
}

/// The first `want` diagrams over `vars` satisfying `constraint`.
pub fn search(
    theory: TheoryId,
    vars: &[VarRef],
    constraint: &Formula,
    cap: usize,
    want: usize,
) -> Result<Vec<CompleteType>> {
    let prog = QfProgram::compile(constraint, vars)?;
    let root = CompleteType::empty(theory);
    if prog.eval3(&root, 0) == Some(false) {
        return Ok(Vec::new());
    }
    let mut s = Search { vars, prog, cap, visited: 0, want, out: Vec::new() };
    s.run(root)?;
    Ok(s.out)
}

/// All diagrams over `vars` satisfying the quantifier-free `constraint`, in
/// canonical order. Branches are cut as soon as the constraint is decided
/// false on the placed prefix.
pub fn enumerate_over(
    theory: TheoryId,
    vars: &[VarRef],
    constraint: &Formula,
    cap: usize,
) -> Result<Vec<CompleteType>> {
    search(theory, vars, constraint, cap, usize::MAX)
}

/// The first diagram over `vars` satisfying `constraint`, if any.
pub fn first_over(
    theory: TheoryId,
    vars: &[VarRef],
    constraint: &Formula,
    cap: usize,
) -> Result<Option<CompleteType>> {
    Ok(search(theory, vars, constraint, cap, 1)?.pop())
}
