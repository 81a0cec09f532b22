//! Concrete countable models, formula evaluation and enumeration tuples.
//!
//! Elements are natural-number ids. What an id denotes depends on the theory:
//!
//! * `pureset`: the natural number itself.
//! * `dlo`: a rational, numbered through the Calkin-Wilf tree.
//! * `equivinf`: the Cantor pair `(class, member)`.
//! * `randomgraph`: a vertex. Vertices below 32 follow the bit rule
//!   (`i < j` adjacent iff bit `i` of `j` is set); every later vertex is
//!   committed on demand, adjacent to exactly the pattern it was created
//!   for.
//!
//! Quantifiers are evaluated over [`Model::realize_one_types`], which returns
//! the least-index realization of every 1-type over the current parameters.
//! Since the truth of a formula in one more variable depends only on that
//! variable's type over the parameters, this candidate set is exact.

mod dtuple;
pub mod rational;

use std::collections::{BTreeMap, BTreeSet};

use parking_lot::RwLock;
use serde::Serialize;

pub use dtuple::{build_dtuple, Cover, DTuple};

use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};
use crate::theory::{CompleteType, TheoryId};

pub type Element = u64;

const BIT_VERTICES: u64 = 32;

#[derive(Default)]
struct GraphState {
    /// Neighbours below `v` of each committed vertex `v >= BIT_VERTICES`.
    lower: Vec<BTreeSet<u64>>,
}

impl GraphState {
    fn committed(&self) -> u64 {
        BIT_VERTICES + self.lower.len() as u64
    }

    fn adj(&self, a: u64, b: u64) -> bool {
        if a == b {
            return false;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if hi < BIT_VERTICES {
            hi >> lo & 1 == 1
        } else {
            self.lower[(hi - BIT_VERTICES) as usize].contains(&lo)
        }
    }

    fn commit_up_to(&mut self, v: u64) {
        while self.committed() <= v {
            self.lower.push(BTreeSet::new());
        }
    }

    fn commit(&mut self, nbrs: BTreeSet<u64>) -> u64 {
        let id = self.committed();
        self.lower.push(nbrs);
        id
    }
}

/// A recursive countable model of one of the built-in theories.
pub struct Model {
    theory: TheoryId,
    graph: RwLock<GraphState>,
    max_depth: usize,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Model({})", self.theory)
    }
}

fn cantor_unpair(e: u64) -> (u64, u64) {
    let w = (((8 * e as u128 + 1) as f64).sqrt() as u64 - 1) / 2;
    // Correct the float estimate.
    let mut w = w;
    while (w + 1) * (w + 2) / 2 <= e {
        w += 1;
    }
    while w * (w + 1) / 2 > e {
        w -= 1;
    }
    let m = e - w * (w + 1) / 2;
    (w - m, m)
}

fn cantor_pair(c: u64, m: u64) -> u64 {
    let w = c + m;
    w * (w + 1) / 2 + m
}

#[derive(Serialize)]
pub struct ModelDump {
    pub theory: TheoryId,
    pub carrier: Vec<String>,
    pub facts: Vec<String>,
}

impl Model {
    pub fn new(theory: TheoryId) -> Self {
        Model { theory, graph: RwLock::new(GraphState::default()), max_depth: 6 }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn theory(&self) -> TheoryId {
        self.theory
    }

    /// Class of an `equivinf` element.
    pub fn class_of(&self, e: Element) -> u64 {
        cantor_unpair(e).0
    }

    /// Whether the theory's relation holds of `(a, b)`.
    pub fn rel(&self, a: Element, b: Element) -> bool {
        match self.theory {
            TheoryId::PureSet => false,
            TheoryId::Dlo => rational::value(a) < rational::value(b),
            TheoryId::EquivInf => cantor_unpair(a).0 == cantor_unpair(b).0,
            TheoryId::RandomGraph => {
                let hi = a.max(b);
                if hi >= self.graph.read().committed() {
                    self.graph.write().commit_up_to(hi);
                }
                self.graph.read().adj(a, b)
            }
        }
    }

    pub fn describe(&self, e: Element) -> String {
        match self.theory {
            TheoryId::Dlo => rational::show(&rational::value(e)),
            TheoryId::EquivInf => {
                let (c, m) = cantor_unpair(e);
                format!("{e}=({c},{m})")
            }
            _ => e.to_string(),
        }
    }

    /// Least-index realization of every 1-type over `params`, ascending.
    pub fn realize_one_types(&self, params: &[Element]) -> Result<Vec<Element>> {
        let distinct: BTreeSet<Element> = params.iter().copied().collect();
        let mut out: BTreeSet<Element> = distinct.clone();
        match self.theory {
            TheoryId::PureSet => {
                out.insert((0..).find(|e| !distinct.contains(e)).expect("infinite"));
            }
            TheoryId::Dlo => {
                let mut vals: Vec<rational::Q> = distinct.iter().map(|&e| rational::value(e)).collect();
                vals.sort();
                let mut bounds: Vec<(Option<&rational::Q>, Option<&rational::Q>)> = Vec::new();
                if vals.is_empty() {
                    bounds.push((None, None));
                } else {
                    bounds.push((None, vals.first()));
                    for w in vals.windows(2) {
                        bounds.push((Some(&w[0]), Some(&w[1])));
                    }
                    bounds.push((vals.last(), None));
                }
                for (lo, hi) in bounds {
                    let q = rational::least_in(lo, hi);
                    let e = rational::index(&q)
                        .ok_or_else(|| TgwError::resource("rational realization beyond the u64 index range"))?;
                    out.insert(e);
                }
            }
            TheoryId::EquivInf => {
                let classes: BTreeSet<u64> = distinct.iter().map(|&e| cantor_unpair(e).0).collect();
                for &c in &classes {
                    let e = (0..).map(|m| cantor_pair(c, m)).find(|e| !distinct.contains(e)).expect("infinite class");
                    out.insert(e);
                }
                out.insert((0..).find(|&e| !classes.contains(&cantor_unpair(e).0)).expect("infinitely many classes"));
            }
            TheoryId::RandomGraph => {
                let ps: Vec<Element> = distinct.iter().copied().collect();
                if ps.len() > 16 {
                    return Err(TgwError::resource("random-graph realization over more than 16 parameters"));
                }
                if let Some(&m) = ps.last() {
                    if m >= self.graph.read().committed() {
                        self.graph.write().commit_up_to(m);
                    }
                }
                let mut g = self.graph.write();
                let patterns = 1usize << ps.len();
                let mut first: Vec<Option<Element>> = vec![None; patterns];
                let mut missing = patterns;
                for v in 0..g.committed() {
                    if missing == 0 {
                        break;
                    }
                    if distinct.contains(&v) {
                        continue;
                    }
                    let mask = ps.iter().enumerate().fold(0usize, |acc, (i, &p)| acc | usize::from(g.adj(v, p)) << i);
                    if first[mask].is_none() {
                        first[mask] = Some(v);
                        missing -= 1;
                    }
                }
                for (mask, slot) in first.iter_mut().enumerate() {
                    if slot.is_none() {
                        let nbrs = ps.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
                        *slot = Some(g.commit(nbrs));
                    }
                }
                out.extend(first.into_iter().flatten());
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Truth of `f` under `assignment`, which must cover its free variables.
    pub fn evaluate(&self, f: &Formula, assignment: &BTreeMap<VarRef, Element>) -> Result<bool> {
        let mut env = assignment.clone();
        self.eval(f, &mut env, 0)
    }

    fn eval(&self, f: &Formula, env: &mut BTreeMap<VarRef, Element>, depth: usize) -> Result<bool> {
        let get = |v: &VarRef, env: &BTreeMap<VarRef, Element>| {
            env.get(v).copied().ok_or_else(|| TgwError::precondition(format!("variable {v} is unassigned")))
        };
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(a, b) => get(a, env)? == get(b, env)?,
            Formula::Atom(_, args) => self.rel(get(&args[0], env)?, get(&args[1], env)?),
            Formula::Not(g) => !self.eval(g, env, depth)?,
            Formula::And(gs) => {
                for g in gs {
                    if !self.eval(g, env, depth)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.eval(g, env, depth)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.eval(a, env, depth)? || self.eval(b, env, depth)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                if depth >= self.max_depth {
                    return Err(TgwError::resource(format!("quantifier depth above {}", self.max_depth)));
                }
                let params: Vec<Element> = f.free_vars().iter().map(|w| get(w, env)).collect::<Result<_>>()?;
                let want = matches!(f, Formula::Exists(..));
                let saved = env.get(v).copied();
                let mut result = !want;
                for c in self.realize_one_types(&params)? {
                    env.insert(v.clone(), c);
                    if self.eval(body, env, depth + 1)? == want {
                        result = want;
                        break;
                    }
                }
                match saved {
                    Some(s) => env.insert(v.clone(), s),
                    None => env.remove(v),
                };
                result
            }
        })
    }

    /// Least element `y` satisfying `phi` with `var` bound to it, if any.
    pub fn least_witness(
        &self,
        phi: &Formula,
        var: &VarRef,
        assignment: &BTreeMap<VarRef, Element>,
    ) -> Result<Option<Element>> {
        let params: Vec<Element> = phi
            .free_vars()
            .iter()
            .filter(|w| *w != var)
            .map(|w| {
                assignment.get(w).copied().ok_or_else(|| TgwError::precondition(format!("variable {w} is unassigned")))
            })
            .collect::<Result<_>>()?;
        let mut env = assignment.clone();
        for c in self.realize_one_types(&params)? {
            env.insert(var.clone(), c);
            if self.eval(phi, &mut env, 0)? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }

    /// Diagram of `values` read off the model, variables named by `vars`.
    pub fn type_of(&self, vars: Vec<VarRef>, values: &[Element]) -> CompleteType {
        assert_eq!(vars.len(), values.len());
        CompleteType::from_relations(self.theory, vars, |i, j| values[i] == values[j], |i, j| {
            self.rel(values[i], values[j])
        })
    }

    /// Diagram of equally long tuples, tuple `t` on tape `t`.
    pub fn tuple_type(&self, tuples: &[Vec<Element>]) -> CompleteType {
        let mut vars = Vec::new();
        let mut values = Vec::new();
        for (t, tuple) in tuples.iter().enumerate() {
            for (p, &e) in tuple.iter().enumerate() {
                vars.push(VarRef::new(t as u32, p as u64));
                values.push(e);
            }
        }
        self.type_of(vars, &values)
    }

    /// The first `size` elements and the atomic facts among them.
    pub fn dump(&self, size: u64) -> ModelDump {
        let carrier: Vec<String> = (0..size).map(|e| self.describe(e)).collect();
        let mut facts = Vec::new();
        if let Some(sym) = self.theory.relation() {
            for a in 0..size {
                for b in 0..size {
                    let relevant = a != b && (self.theory == TheoryId::Dlo || a < b);
                    if relevant && self.rel(a, b) {
                        facts.push(format!("{sym}({},{})", self.describe(a), self.describe(b)));
                    }
                }
            }
        }
        ModelDump { theory: self.theory, carrier, facts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::Theory;

    fn assign(pairs: &[(VarRef, Element)]) -> BTreeMap<VarRef, Element> {
        pairs.iter().cloned().collect()
    }

    #[test]
    fn dlo_atoms() {
        let m = Model::new(TheoryId::Dlo);
        let half = rational::index(&rational::Q::new(1, 2)).unwrap();
        let two = rational::index(&rational::Q::new(2, 1)).unwrap();
        let th = Theory::new(TheoryId::Dlo);
        let f = th.parse("lt(x0,x1)").unwrap();
        assert!(m.evaluate(&f, &assign(&[(VarRef::x(0u64), half), (VarRef::x(1u64), two)])).unwrap());
    }

    #[test]
    fn pureset_exists_other() {
        let m = Model::new(TheoryId::PureSet);
        let th = Theory::new(TheoryId::PureSet);
        let f = th.parse("exists y0. !eq(y0,x0)").unwrap();
        for e in 0..5 {
            assert!(m.evaluate(&f, &assign(&[(VarRef::x(0u64), e)])).unwrap());
        }
    }

    #[test]
    fn graph_extension_demand() {
        let m = Model::new(TheoryId::RandomGraph);
        let th = Theory::new(TheoryId::RandomGraph);
        let f = th
            .parse("forall x0. forall x1. (!eq(x0,x1) -> exists y0.(adj(x0,y0) & (!adj(x1,y0) & (!eq(y0,x0) & !eq(y0,x1)))))")
            .unwrap();
        assert!(m.evaluate(&f, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn cantor_round_trip() {
        for e in 0..500 {
            let (c, k) = cantor_unpair(e);
            assert_eq!(cantor_pair(c, k), e);
        }
    }

    #[test]
    fn tuple_types() {
        let m = Model::new(TheoryId::PureSet);
        let t = m.tuple_type(&[vec![0], vec![0]]);
        assert_eq!(t.describe(), "{x0=y0}");
        let d = Model::new(TheoryId::Dlo);
        let one = rational::index(&rational::Q::new(1, 1)).unwrap();
        assert_eq!(d.tuple_type(&[vec![0, one]]).describe(), "x0<x1");
    }
}
