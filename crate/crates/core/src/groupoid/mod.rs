//! Clopen sets of the groupoid and its fibred powers, given by formulas on
//! `k` tapes and compared relative to the Skolem sort.

mod table;

use std::fmt;

use serde::Serialize;

pub use table::{
    build_level_table, cantor_check, theta_class, theta_reindex, verify_level_axioms, AxiomReport, CantorPoint,
    LevelTable,
};

use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};
use crate::pos::Pos;
use crate::skolem::RichSequence;
use crate::theory::{first_over, CompleteType, Theory};

/// `[φ]_G` inside the `k`-th fibred power.
#[derive(Clone)]
pub struct ClopenSet {
    arity: usize,
    formula: Formula,
    level: usize,
    seq: RichSequence,
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]^{} @{}", self.formula.render(), self.arity, self.level)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClopenSummary {
    pub arity: usize,
    pub level: usize,
    pub formula: String,
}

fn level_of(f: &Formula) -> usize {
    f.free_vars()
        .iter()
        .map(|v| v.pos.as_usize().map_or(usize::MAX, |p| p + 1))
        .max()
        .unwrap_or(0)
}

impl ClopenSet {
    pub fn new(seq: &RichSequence, arity: usize, formula: Formula) -> Result<Self> {
        if arity == 0 {
            return Err(TgwError::precondition("arity must be at least 1"));
        }
        for v in formula.free_vars() {
            if v.tape as usize >= arity {
                return Err(TgwError::precondition(format!("{v} is outside {arity} tapes")));
            }
        }
        let level = level_of(&formula);
        if level == usize::MAX {
            return Err(TgwError::resource("position too large for a level table"));
        }
        Ok(ClopenSet { arity, formula, level, seq: seq.clone() })
    }

    /// Same set, read at a higher level.
    pub fn at_level(mut self, level: usize) -> Result<Self> {
        if level < self.level {
            return Err(TgwError::precondition(format!("level {level} is below {}", self.level)));
        }
        self.level = level;
        Ok(self)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn seq(&self) -> &RichSequence {
        &self.seq
    }

    pub fn theory(&self) -> &Theory {
        self.seq.theory()
    }

    pub fn summary(&self) -> ClopenSummary {
        ClopenSummary { arity: self.arity, level: self.level, formula: self.formula.render() }
    }

    fn same_space(&self, other: &ClopenSet) -> Result<()> {
        if self.arity != other.arity {
            return Err(TgwError::precondition(format!("arity {} vs {}", self.arity, other.arity)));
        }
        if self.seq.name() != other.seq.name() || self.theory().id() != other.theory().id() {
            return Err(TgwError::precondition("clopen sets over different rich sequences"));
        }
        Ok(())
    }

    fn derived(&self, arity: usize, formula: Formula, level: usize) -> Result<ClopenSet> {
        let formula = self.theory().simplify(&formula)?;
        ClopenSet::new(&self.seq, arity, formula)?.at_level(level)
    }
}

/// `x_{<n} = y_{<n}`.
pub fn en_formula(n: usize) -> Formula {
    Formula::and((0..n as u64).map(|i| Formula::eq(VarRef::x(i), VarRef::y(i))))
}

/// `[E^n]`.
pub fn en_clopen(seq: &RichSequence, n: usize) -> ClopenSet {
    ClopenSet::new(seq, 2, en_formula(n)).expect("two tapes").at_level(n).expect("level n")
}

/// `∀ tapes ∈ D_Φ. f` as a sentence, or the last residue when `f` has free
/// variables outside the tapes.
fn relativized_closure(seq: &RichSequence, arity: usize, f: &Formula) -> Result<Formula> {
    let mut g = f.clone();
    for t in (0..arity as u32).rev() {
        g = seq.relativized_forall(&g, t)?;
    }
    Ok(g)
}

fn relativized_valid(seq: &RichSequence, arity: usize, f: &Formula) -> Result<bool> {
    seq.theory().valid(&relativized_closure(seq, arity, f)?)
}

/// A point of the fibred power where `f` holds, as a diagram over the
/// positions `f` and its constraints mention.
fn witness(seq: &RichSequence, arity: usize, f: &Formula) -> Result<Option<CompleteType>> {
    let th = seq.theory();
    let mut parts = vec![f.clone()];
    for t in 0..arity as u32 {
        parts.push(seq.sparse_d(f, t)?);
    }
    let g = th.eliminate_quantifiers(&Formula::and(parts))?;
    let vars: Vec<VarRef> = g.free_vars().into_iter().collect();
    first_over(th.id(), &vars, &g, th.config().max_search)
}

/// Equality of clopen sets relative to the Skolem sort.
pub fn clopen_equal(u: &ClopenSet, v: &ClopenSet) -> Result<bool> {
    u.same_space(v)?;
    relativized_valid(&u.seq, u.arity, &Formula::iff(u.formula.clone(), v.formula.clone()))
}

/// `u ⊆ v` relative to the Skolem sort.
pub fn clopen_subset(u: &ClopenSet, v: &ClopenSet) -> Result<bool> {
    u.same_space(v)?;
    relativized_valid(&u.seq, u.arity, &Formula::implies(u.formula.clone(), v.formula.clone()))
}

/// `χ(x,z) = (∃y ∈ D) φ(x,y) ∧ ψ(y,z)`.
pub fn compose_clopen(u: &ClopenSet, v: &ClopenSet) -> Result<ClopenSet> {
    u.same_space(v)?;
    if u.arity != 2 {
        return Err(TgwError::precondition("composition needs arity 2"));
    }
    let shifted = v.formula.map_tapes(|t| t + 1);
    let body = Formula::and([u.formula.clone(), shifted]);
    let chi = u.seq.relativized_exists(&body, 1)?;
    let chi = chi.map_tapes(|t| if t == 2 { 1 } else { t });
    u.derived(2, chi, u.level.max(v.level))
}

pub fn invert_clopen(u: &ClopenSet) -> Result<ClopenSet> {
    if u.arity != 2 {
        return Err(TgwError::precondition("inversion needs arity 2"));
    }
    Ok(ClopenSet { formula: u.formula.swap_tapes(0, 1), ..u.clone() })
}

/// `s(U) = (∃x ∈ D) φ(x,y)`, as a one-tape set.
pub fn source_clopen(u: &ClopenSet) -> Result<ClopenSet> {
    if u.arity != 2 {
        return Err(TgwError::precondition("source needs arity 2"));
    }
    let s = u.seq.relativized_exists(&u.formula, 0)?;
    u.derived(1, s.map_tapes(|_| 0), u.level)
}

pub fn target_clopen(u: &ClopenSet) -> Result<ClopenSet> {
    source_clopen(&invert_clopen(u)?)
}

fn diagonal(f: &Formula) -> Formula {
    f.map_tapes(|_| 0)
}

/// `B ⊆ U`: `(∀x ∈ D) φ(x,x)`.
pub fn contains_base(u: &ClopenSet) -> Result<bool> {
    if u.arity != 2 {
        return Err(TgwError::precondition("base containment needs arity 2"));
    }
    relativized_valid(&u.seq, 1, &diagonal(&u.formula))
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, witness: Option<String>) -> Self {
        Check { name: name.into(), pass, witness }
    }
}

/// A clopen sub-groupoid containing the base.
#[derive(Clone, Debug)]
pub struct SubGroupoid {
    clopen: ClopenSet,
    certificate: Vec<Check>,
}

impl SubGroupoid {
    pub fn clopen(&self) -> &ClopenSet {
        &self.clopen
    }

    pub fn certificate(&self) -> &[Check] {
        &self.certificate
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub axiom: &'static str,
    pub witness: Option<String>,
}

/// Every sub-groupoid axiom that fails, each with a witness type.
#[derive(Clone, Debug, Serialize)]
pub struct Refusal {
    pub failures: Vec<Failure>,
}

impl Refusal {
    pub fn fails(&self, axiom: &str) -> bool {
        self.failures.iter().any(|f| f.axiom == axiom)
    }
}

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, fail) in self.failures.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{} fails", fail.axiom)?;
            if let Some(w) = &fail.witness {
                write!(f, " at {w}")?;
            }
        }
        Ok(())
    }
}

/// Certifies `B ⊆ H = H⁻¹ = HH`, or lists the axioms that fail.
pub fn is_subgroupoid(u: &ClopenSet) -> Result<std::result::Result<SubGroupoid, Refusal>> {
    let seq = &u.seq;
    let show = |t: Option<CompleteType>| t.map(|t| t.describe());
    let mut certificate = Vec::new();
    let mut failures = Vec::new();
    if contains_base(u)? {
        certificate.push(Check::new("reflexive on base", true, None));
    } else {
        let w = witness(seq, 1, &Formula::not(diagonal(&u.formula)))?;
        failures.push(Failure { axiom: "reflexivity", witness: show(w) });
    }
    let inv = invert_clopen(u)?;
    if clopen_equal(u, &inv)? {
        certificate.push(Check::new("symmetric", true, None));
    } else {
        let w = witness(seq, 2, &Formula::and([u.formula.clone(), Formula::not(inv.formula.clone())]))?;
        failures.push(Failure { axiom: "symmetry", witness: show(w) });
    }
    let sq = compose_clopen(u, u)?;
    if clopen_equal(u, &sq)? {
        certificate.push(Check::new("multiplicatively closed", true, None));
    } else {
        let w = witness(seq, 2, &Formula::not(Formula::iff(sq.formula.clone(), u.formula.clone())))?;
        failures.push(Failure { axiom: "transitivity", witness: show(w) });
    }
    if failures.is_empty() {
        Ok(Ok(SubGroupoid { clopen: u.clone(), certificate }))
    } else {
        Ok(Err(Refusal { failures }))
    }
}

/// Least `n <= bound` with `[E^n] ⊆ H`.
pub fn minimal_en_index(h: &SubGroupoid, bound: usize) -> Result<usize> {
    for n in 0..=bound {
        if clopen_subset(&en_clopen(&h.clopen.seq, n), &h.clopen)? {
            return Ok(n);
        }
    }
    Err(TgwError::certificate(format!("no E^n with n <= {bound} lies inside {:?}", h.clopen)))
}

/// Image under the projection to level `m`: every position `>= m` of every
/// tape is quantified over the Skolem sort.
pub fn project_clopen(u: &ClopenSet, m: usize) -> Result<ClopenSet> {
    if m > u.level {
        return Err(TgwError::precondition(format!("target level {m} exceeds {}", u.level)));
    }
    if m == u.level {
        return Ok(u.clone());
    }
    let k = u.arity as u32;
    let mut parts = vec![u.formula.map_tapes(|t| t + k)];
    for t in 0..k {
        for p in 0..m as u64 {
            parts.push(Formula::eq(VarRef::new(t, p), VarRef::new(t + k, p)));
        }
    }
    let mut f = Formula::and(parts);
    for t in (k..2 * k).rev() {
        f = u.seq.relativized_exists(&f, t)?;
    }
    let extra = f.free_vars().into_iter().find(|v| v.tape >= k || v.pos >= Pos::from(m));
    if let Some(v) = extra {
        return Err(TgwError::certificate(format!("projection left {v} free")));
    }
    u.derived(u.arity, f, m)
}
