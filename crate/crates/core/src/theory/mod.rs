//! Decision procedures for the built-in complete theories.
//!
//! Every theory here is complete, has quantifier elimination and at most one
//! binary relation, so a complete type over finitely many variables is just a
//! quantifier-free diagram accepted by the theory's admissibility rule.

mod minimize;
pub(crate) mod qe;
mod types;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use parking_lot::Mutex;

pub use types::{enumerate_over, first_over, search, ClassStructure, CompleteType, QfProgram};

use crate::error::{Result, TgwError};
use crate::formula::{parse_formula, Formula, Signature, VarRef};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TheoryId {
    /// Infinite set, equality only.
    PureSet,
    /// Dense linear order without endpoints.
    Dlo,
    /// The countable random graph.
    RandomGraph,
    /// Equivalence relation with infinitely many classes, all infinite.
    EquivInf,
}

impl TheoryId {
    pub const ALL: [TheoryId; 4] = [TheoryId::PureSet, TheoryId::Dlo, TheoryId::RandomGraph, TheoryId::EquivInf];

    pub fn name(self) -> &'static str {
        match self {
            TheoryId::PureSet => "pureset",
            TheoryId::Dlo => "dlo",
            TheoryId::RandomGraph => "randomgraph",
            TheoryId::EquivInf => "equivinf",
        }
    }

    /// Symbol of the theory's binary relation.
    pub fn relation(self) -> Option<&'static str> {
        match self {
            TheoryId::PureSet => None,
            TheoryId::Dlo => Some("lt"),
            TheoryId::RandomGraph => Some("adj"),
            TheoryId::EquivInf => Some("equiv"),
        }
    }

    pub fn signature(self) -> Signature {
        match self.relation() {
            Some(r) => Signature::new(self.name(), &[(r, 2)]),
            None => Signature::new(self.name(), &[]),
        }
    }
}

impl fmt::Display for TheoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoryId {
    type Err = TgwError;

    fn from_str(s: &str) -> Result<Self> {
        TheoryId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| TgwError::Unsupported(format!("unknown theory {s:?}")))
    }
}

impl serde::Serialize for TheoryId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    /// Largest `k * n` accepted by [`Theory::enumerate_types`].
    pub max_grid: usize,
    /// Largest number of search nodes in any single type search.
    pub max_search: usize,
    /// Formulas whose variables carry at most this many types are simplified
    /// to minimized normal form.
    pub minimize_limit: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_grid: 12, max_search: 2_000_000, minimize_limit: 300 }
    }
}

struct Inner {
    id: TheoryId,
    sig: Signature,
    config: OracleConfig,
    qe_cache: Mutex<HashMap<Formula, Formula>>,
}

/// A built-in theory with its memoizing decision procedures. Cheap to clone;
/// clones share the caches.
#[derive(Clone)]
pub struct Theory {
    inner: Arc<Inner>,
}

impl fmt::Debug for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Theory({})", self.inner.id)
    }
}

/// Variables of a `k`-tape, `n`-position grid, tape-major.
pub fn grid_vars(k: usize, n: usize) -> Vec<VarRef> {
    (0..k as u32).flat_map(|t| (0..n as u64).map(move |p| VarRef::new(t, p))).collect()
}

impl Theory {
    pub fn new(id: TheoryId) -> Self {
        Self::with_config(id, OracleConfig::default())
    }

    pub fn with_config(id: TheoryId, config: OracleConfig) -> Self {
        Theory {
            inner: Arc::new(Inner { id, sig: id.signature(), config, qe_cache: Mutex::new(HashMap::new()) }),
        }
    }

    pub fn id(&self) -> TheoryId {
        self.inner.id
    }

    pub fn signature(&self) -> &Signature {
        &self.inner.sig
    }

    pub fn config(&self) -> &OracleConfig {
        &self.inner.config
    }

    pub fn parse(&self, text: &str) -> Result<Formula> {
        Ok(parse_formula(text, &self.inner.sig)?)
    }

    fn check_signature(&self, f: &Formula) -> Result<()> {
        for (sym, arity) in f.relations_used() {
            if self.inner.sig.arity(&sym) != Some(arity) {
                return Err(TgwError::Unsupported(format!("relation {sym}/{arity} is not in {}", self.id())));
            }
        }
        Ok(())
    }

    /// A quantifier-free formula `T`-equivalent to `f`, free variables among
    /// those of `f`.
    pub fn eliminate_quantifiers(&self, f: &Formula) -> Result<Formula> {
        self.check_signature(f)?;
        Ok(self.qe(f))
    }

    pub(crate) fn qe(&self, f: &Formula) -> Formula {
        let id = self.id();
        match f {
            Formula::True | Formula::False | Formula::Eq(..) | Formula::Atom(..) => qe::fold(id, f),
            Formula::Not(g) => qe::mk_not(self.qe(g)),
            Formula::And(gs) => qe::mk_and(gs.iter().map(|g| self.qe(g))),
            Formula::Or(gs) => qe::mk_or(gs.iter().map(|g| self.qe(g))),
            Formula::Implies(a, b) => qe::mk_or([qe::mk_not(self.qe(a)), self.qe(b)]),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                if let Some(hit) = self.inner.qe_cache.lock().get(f) {
                    return hit.clone();
                }
                let inner = self.qe(body);
                let out = if matches!(f, Formula::Exists(..)) {
                    qe::elim_exists(id, v, &inner)
                } else {
                    qe::mk_not(qe::elim_exists(id, v, &qe::mk_not(inner)))
                };
                self.inner.qe_cache.lock().insert(f.clone(), out.clone());
                out
            }
        }
    }

    /// `∃v f`, already quantifier-free when `f` is.
    pub fn exists_qf(&self, v: &VarRef, f: &Formula) -> Formula {
        qe::elim_exists(self.id(), v, &self.qe(f))
    }

    /// `∃vs f` eliminating the last variable first.
    pub fn exists_many_qf(&self, vs: &[VarRef], f: &Formula) -> Formula {
        vs.iter().rev().fold(self.qe(f), |acc, v| qe::elim_exists(self.id(), v, &acc))
    }

    /// Whether `T ⊨ f` for a sentence `f`.
    pub fn decide_sentence(&self, f: &Formula) -> Result<bool> {
        let free = f.free_vars();
        if !free.is_empty() {
            let names: Vec<String> = free.iter().map(|v| v.to_string()).collect();
            return Err(TgwError::precondition(format!("sentence has free variables {}", names.join(","))));
        }
        self.check_signature(f)?;
        match self.qe(f) {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            // A ground residue can only be built from reflexive atoms, which
            // fold away, so this is unreachable for well-formed input.
            other => self.valid(&other),
        }
    }

    /// Satisfiability of `f`, searching types over its free variables.
    pub fn satisfiable(&self, f: &Formula) -> Result<bool> {
        let g = self.qe(f);
        let vars: Vec<VarRef> = g.free_vars().into_iter().collect();
        Ok(first_over(self.id(), &vars, &g, self.config().max_search)?.is_some())
    }

    /// Validity of `f` in every model of `T` under every assignment.
    pub fn valid(&self, f: &Formula) -> Result<bool> {
        Ok(!self.satisfiable(&Formula::not(f.clone()))?)
    }

    /// Whether `a` and `b` are `T`-equivalent.
    pub fn equivalent(&self, a: &Formula, b: &Formula) -> Result<bool> {
        self.valid(&Formula::iff(a.clone(), b.clone()))
    }

    /// Whether `T ⊨ a → b`.
    pub fn entails(&self, a: &Formula, b: &Formula) -> Result<bool> {
        self.valid(&Formula::implies(a.clone(), b.clone()))
    }

    /// All complete types over the `k × n` grid consistent with `constraint`.
    pub fn enumerate_types(&self, k: usize, n: usize, constraint: &Formula) -> Result<Vec<CompleteType>> {
        if k * n > self.config().max_grid {
            return Err(TgwError::resource(format!(
                "grid {k}x{n} exceeds the cap of {} variables",
                self.config().max_grid
            )));
        }
        self.types_over(&grid_vars(k, n), constraint)
    }

    /// All complete types over `vars` consistent with `constraint`.
    pub fn types_over(&self, vars: &[VarRef], constraint: &Formula) -> Result<Vec<CompleteType>> {
        self.check_signature(constraint)?;
        let g = self.qe(constraint);
        enumerate_over(self.id(), vars, &g, self.config().max_search)
    }

    /// Whether the diagram `t` together with `extra` is satisfiable.
    pub fn is_consistent(&self, t: &CompleteType, extra: &Formula) -> Result<bool> {
        self.check_signature(extra)?;
        t.eval_qf(&self.qe(extra))
    }

    /// Semantic evaluation of an arbitrary formula on a complete type by
    /// one-point extensions. Independent of the syntactic eliminator and much
    /// slower; used to cross-check it.
    pub fn eval_on_type(&self, t: &CompleteType, f: &Formula) -> Result<bool> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Eq(..) | Formula::Atom(..) => t.eval_qf(f)?,
            Formula::Not(g) => !self.eval_on_type(t, g)?,
            Formula::And(gs) => {
                for g in gs {
                    if !self.eval_on_type(t, g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if self.eval_on_type(t, g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !self.eval_on_type(t, a)? || self.eval_on_type(t, b)?,
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let base = match t.index_of(v) {
                    Some(_) => {
                        let keep: Vec<VarRef> = t.vars().iter().filter(|w| *w != v).cloned().collect();
                        t.restrict(&keep)
                    }
                    None => t.clone(),
                };
                let want = matches!(f, Formula::Exists(..));
                for ext in base.extensions(v.clone()) {
                    if self.eval_on_type(&ext, body)? == want {
                        return Ok(want);
                    }
                }
                !want
            }
        })
    }

    /// A readable equivalent of `f`: quantifier elimination, then minimized
    /// normal form when the variables carry few enough types.
    pub fn simplify(&self, f: &Formula) -> Result<Formula> {
        self.check_signature(f)?;
        let g = self.qe(f);
        let vars: Vec<VarRef> = g.free_vars().into_iter().collect();
        minimize::minimize(self, &g, &vars)
    }

    /// Variables of `f` on which its truth actually depends.
    pub fn essential_vars(&self, f: &Formula) -> Result<BTreeSet<VarRef>> {
        let g = self.qe(f);
        let mut out = BTreeSet::new();
        for v in g.free_vars() {
            let without = self.exists_qf(&v, &g);
            if !self.equivalent(&without, &g)? {
                out.insert(v);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th(id: TheoryId) -> Theory {
        Theory::new(id)
    }

    #[test]
    fn type_counts() {
        let count = |id, n| th(id).enumerate_types(1, n, &Formula::True).unwrap().len();
        assert_eq!(count(TheoryId::PureSet, 2), 2);
        assert_eq!(count(TheoryId::PureSet, 3), 5);
        assert_eq!(count(TheoryId::Dlo, 2), 3);
        assert_eq!(count(TheoryId::Dlo, 3), 13);
        assert_eq!(count(TheoryId::RandomGraph, 2), 3);
        assert_eq!(count(TheoryId::RandomGraph, 3), 15);
        assert_eq!(count(TheoryId::EquivInf, 2), 3);
        assert_eq!(th(TheoryId::Dlo).enumerate_types(1, 0, &Formula::True).unwrap().len(), 1);
    }

    #[test]
    fn grid_cap_is_a_resource_error() {
        let e = th(TheoryId::PureSet).enumerate_types(4, 4, &Formula::True).unwrap_err();
        assert!(matches!(e, TgwError::Resource(_)));
    }

    #[test]
    fn qe_examples() {
        let t = th(TheoryId::Dlo);
        let f = t.parse("exists y0.(lt(x0,y0) & lt(y0,x1))").unwrap();
        assert_eq!(t.eliminate_quantifiers(&f).unwrap().render(), "lt(x0,x1)");
        let p = th(TheoryId::PureSet);
        assert_eq!(p.eliminate_quantifiers(&p.parse("exists y0. eq(y0,x0)").unwrap()).unwrap(), Formula::True);
        let g = th(TheoryId::RandomGraph);
        let f = g.parse("exists y0.(adj(x0,y0) & (!adj(x1,y0) & (!eq(y0,x0) & !eq(y0,x1))))").unwrap();
        assert_eq!(g.eliminate_quantifiers(&f).unwrap().render(), "!eq(x0,x1)");
    }

    #[test]
    fn sentences() {
        let d = th(TheoryId::Dlo);
        assert!(d.decide_sentence(&d.parse("forall x0. exists y0. lt(x0,y0)").unwrap()).unwrap());
        let p = th(TheoryId::PureSet);
        assert!(!p.decide_sentence(&p.parse("exists x0. forall y0. eq(x0,y0)").unwrap()).unwrap());
        let g = th(TheoryId::RandomGraph);
        assert!(g.decide_sentence(&g.parse("forall x0. forall x1. (adj(x0,x1) -> adj(x1,x0))").unwrap()).unwrap());
        assert!(p.decide_sentence(&p.parse("eq(x0,x0)").unwrap()).is_err());
    }

    #[test]
    fn consistency() {
        let d = th(TheoryId::Dlo);
        let types = d.enumerate_types(1, 2, &d.parse("lt(x0,x1)").unwrap()).unwrap();
        assert_eq!(types.len(), 1);
        assert!(!d.is_consistent(&types[0], &d.parse("lt(x1,x0)").unwrap()).unwrap());
        let g = th(TheoryId::RandomGraph);
        let t = &g.enumerate_types(1, 2, &g.parse("adj(x0,x1)").unwrap()).unwrap()[0];
        let extra = g.parse("exists y0.(adj(x0,y0) & (!adj(x1,y0) & (!eq(y0,x0) & !eq(y0,x1))))").unwrap();
        assert!(g.is_consistent(t, &extra).unwrap());
        assert!(g.eval_on_type(t, &extra).unwrap());
    }

    #[test]
    fn equivinf_elimination() {
        let e = th(TheoryId::EquivInf);
        let f = e.parse("exists y0.(equiv(x0,y0) & !equiv(x1,y0))").unwrap();
        assert_eq!(e.eliminate_quantifiers(&f).unwrap().render(), "!equiv(x0,x1)");
        let f = e.parse("exists y0.(!equiv(x0,y0) & !equiv(x1,y0))").unwrap();
        assert_eq!(e.eliminate_quantifiers(&f).unwrap(), Formula::True);
    }
}
