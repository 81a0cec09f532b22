//! Rich sequences, the sets `D_{Φ,n}`, relativized quantifiers over `D_Φ`,
//! witness indices and the back-and-forth between two rich sequences.
//!
//! The canonical sequence reads each index as an Elias-gamma stream (see
//! [`coding`]) naming a set `S` of `x`-positions and a truth table over the
//! types of `(x_S, y0)`. Every formula `ψ(x_{<k}, y0)` is equivalent modulo
//! the theory to exactly one truth table over its essential variables, so
//! [`RichSequence::index_of`] just computes that code. Indices that do not
//! parse denote `true`.

pub mod coding;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use parking_lot::Mutex;
use serde::Serialize;

use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef, VarMap, SCRATCH_TAPE};
use crate::pos::Pos;
use crate::theory::qe::{mk_and, mk_not};
use crate::theory::{search, Theory};

/// How many small indices are tried before falling back to the code of a
/// formula.
pub const SCAN_LIMIT: u64 = 64;

/// One term of a rich sequence with its derived data.
#[derive(Clone, Debug)]
pub struct RichEntry {
    /// `φ_n(x_{<n}, y0)` over its essential variables.
    pub formula: Formula,
    /// Essential `x`-positions of the formula.
    pub support: Vec<Pos>,
    /// `∀w (φ_n(x, w) → φ_n(x, x_n))`, quantifier-free.
    pub constraint: Formula,
    /// Positions below `n` the constraint reads; empty when it is trivial.
    pub mentions: Vec<Pos>,
}

struct SeqInner {
    theory: Theory,
    name: String,
    prefix: Vec<Formula>,
    entries: Mutex<HashMap<Pos, Arc<RichEntry>>>,
}

/// A rich sequence: an explicit prefix followed by the canonical
/// enumeration, shifted past the prefix.
#[derive(Clone)]
pub struct RichSequence {
    inner: Arc<SeqInner>,
}

impl std::fmt::Debug for RichSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RichSequence({}, {})", self.inner.theory.id(), self.inner.name)
    }
}

pub fn y0() -> VarRef {
    VarRef::y(0u64)
}

fn xv(p: &Pos) -> VarRef {
    VarRef { tape: 0, pos: p.clone() }
}

/// `D_{Φ,n}` as produced by [`RichSequence::dphi`].
#[derive(Clone, Debug, Serialize)]
pub struct DPhiLevel {
    pub n: usize,
    pub formula: String,
    pub simplified: String,
    #[serde(skip)]
    pub raw: Formula,
    #[serde(skip)]
    pub qf: Formula,
}

impl RichSequence {
    pub fn canonical(theory: &Theory) -> Self {
        Self::with_prefix(theory, "canonical", Vec::new()).expect("empty prefix is valid")
    }

    /// `prefix[n]` for `n < prefix.len()`, then the canonical sequence.
    pub fn with_prefix(theory: &Theory, name: &str, prefix: Vec<Formula>) -> Result<Self> {
        for (n, f) in prefix.iter().enumerate() {
            for v in f.free_vars() {
                let ok = v == y0() || (v.tape == 0 && v.pos < Pos::from(n));
                if !ok {
                    return Err(TgwError::precondition(format!("prefix formula {n} mentions {v}")));
                }
            }
        }
        Ok(RichSequence {
            inner: Arc::new(SeqInner {
                theory: theory.clone(),
                name: name.to_owned(),
                prefix,
                entries: Mutex::new(HashMap::new()),
            }),
        })
    }

    pub fn theory(&self) -> &Theory {
        &self.inner.theory
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    fn shift(&self) -> Pos {
        Pos::from(self.inner.prefix.len())
    }

    /// `φ_n`.
    pub fn formula(&self, n: &Pos) -> Result<Formula> {
        Ok(self.entry(n)?.formula.clone())
    }

    pub fn entry(&self, n: &Pos) -> Result<Arc<RichEntry>> {
        if let Some(e) = self.inner.entries.lock().get(n) {
            return Ok(e.clone());
        }
        let formula = match n.as_usize().filter(|&i| i < self.inner.prefix.len()) {
            Some(i) => self.inner.prefix[i].clone(),
            None => {
                let k = n.checked_sub(&self.shift()).expect("past the prefix");
                self.decode_canonical(&k)?
            }
        };
        let entry = Arc::new(self.derive_entry(n, formula)?);
        self.inner.entries.lock().insert(n.clone(), entry.clone());
        Ok(entry)
    }

    fn decode_canonical(&self, k: &Pos) -> Result<Formula> {
        let th = &self.inner.theory;
        let Some((support, mask)) = coding::decode(k) else {
            return Ok(Formula::True);
        };
        let mut vars: Vec<VarRef> = support.iter().map(xv).collect();
        vars.push(y0());
        let want = mask.bits() as usize;
        let types = search(th.id(), &vars, &Formula::True, th.config().max_search, want)?;
        if types.len() < want {
            return Ok(Formula::True);
        }
        let on: Vec<Formula> = (0..want).filter(|&i| mask.bit(i as u64)).map(|i| types[i].diagram()).collect();
        Ok(Formula::or(on))
    }

    fn derive_entry(&self, n: &Pos, formula: Formula) -> Result<RichEntry> {
        let th = &self.inner.theory;
        let mut f = th.simplify(&formula)?;
        let essential = th.essential_vars(&f)?;
        let dropped: Vec<VarRef> = f.free_vars().into_iter().filter(|v| v.tape == 0 && !essential.contains(v)).collect();
        if !dropped.is_empty() {
            f = th.simplify(&th.exists_many_qf(&dropped, &f))?;
        }
        let support: Vec<Pos> = essential.iter().filter(|v| v.tape == 0).map(|v| v.pos.clone()).collect();
        let constraint = if matches!(f, Formula::True | Formula::False) {
            Formula::True
        } else {
            let w = VarRef::new(SCRATCH_TAPE, 0u64);
            let rename = |to: VarRef| {
                let mut m = VarMap::new();
                m.insert(y0(), to);
                crate::formula::substitute_vars(&f, &m)
            };
            let c = Formula::forall(w.clone(), Formula::implies(rename(w), rename(xv(n))));
            th.simplify(&c)?
        };
        let mentions = if constraint == Formula::True { Vec::new() } else { support.clone() };
        Ok(RichEntry { formula: f, support, constraint, mentions })
    }

    /// Closure of `positions` under [`RichEntry::mentions`].
    pub fn closure(&self, positions: impl IntoIterator<Item = Pos>) -> Result<BTreeSet<Pos>> {
        let mut out = BTreeSet::new();
        let mut work: Vec<Pos> = positions.into_iter().collect();
        while let Some(p) = work.pop() {
            if out.insert(p.clone()) {
                work.extend(self.entry(&p)?.mentions.iter().cloned());
            }
        }
        Ok(out)
    }

    /// Code of `ψ(x, y0)`: an index `n` with `φ_n` equivalent to `ψ`.
    pub fn index_of(&self, psi: &Formula) -> Result<Pos> {
        self.index_of_at_least(psi, &Pos::ZERO)
    }

    /// Like [`Self::index_of`] but at least `min`, padding the support with
    /// a dummy position when the plain code is too small.
    pub fn index_of_at_least(&self, psi: &Formula, min: &Pos) -> Result<Pos> {
        let th = &self.inner.theory;
        for v in psi.free_vars() {
            if v.tape != 0 && v != y0() {
                return Err(TgwError::precondition(format!("{v} is neither an x-variable nor y0")));
            }
        }
        let g = th.eliminate_quantifiers(psi)?;
        let essential = th.essential_vars(&g)?;
        let dropped: Vec<VarRef> = g.free_vars().into_iter().filter(|v| v.tape == 0 && !essential.contains(v)).collect();
        let g = if dropped.is_empty() { g } else { th.exists_many_qf(&dropped, &g) };
        let mut support: Vec<Pos> = essential.iter().filter(|v| v.tape == 0).map(|v| v.pos.clone()).collect();
        let shift = self.shift();
        let local_min = min.checked_sub(&shift).unwrap_or(Pos::ZERO);
        let code = self.code_of(&g, &support)?;
        if code >= local_min {
            return Ok(code.add(&shift));
        }
        let dummy = local_min.pred();
        if !support.contains(&dummy) {
            support.push(dummy);
            support.sort();
        }
        let code = self.code_of(&g, &support)?;
        debug_assert!(code >= local_min);
        Ok(code.add(&shift))
    }

    fn code_of(&self, g: &Formula, support: &[Pos]) -> Result<Pos> {
        let th = &self.inner.theory;
        let mut vars: Vec<VarRef> = support.iter().map(xv).collect();
        vars.push(y0());
        let types = th.types_over(&vars, &Formula::True)?;
        let mut mask = BigUint::zero();
        for (i, t) in types.iter().enumerate() {
            if t.eval_qf(g)? {
                mask |= BigUint::one() << i;
            }
        }
        Ok(coding::encode(support, &mask))
    }

    /// Least index at least `min` whose formula is equivalent to `psi`,
    /// scanning a short window before using the code.
    pub fn find_index(&self, psi: &Formula, min: &Pos) -> Result<Pos> {
        let th = &self.inner.theory;
        let g = th.eliminate_quantifiers(psi)?;
        let mut i = min.clone();
        for _ in 0..SCAN_LIMIT {
            let e = self.entry(&i)?;
            let fits = g.free_vars().iter().all(|v| v.tape != 0 || v.pos < i);
            if fits && th.equivalent(&e.formula, &g)? {
                return Ok(i);
            }
            i = i.succ();
        }
        self.index_of_at_least(&g, min)
    }

    /// `D_{Φ,n}` literally, and as a simplified quantifier-free formula.
    pub fn dphi(&self, n: usize) -> Result<DPhiLevel> {
        let th = &self.inner.theory;
        let mut raw = Vec::new();
        let mut qf = Vec::new();
        for k in 0..n {
            let k = Pos::from(k);
            let e = self.entry(&k)?;
            let phi = self.formula_raw(&k)?;
            let mut m = VarMap::new();
            m.insert(y0(), xv(&k));
            raw.push(Formula::forall(y0(), Formula::implies(phi.clone(), crate::formula::substitute_vars(&phi, &m))));
            qf.push(e.constraint.clone());
        }
        let raw = Formula::and(raw);
        let qf = th.simplify(&mk_and(qf))?;
        Ok(DPhiLevel { n, formula: raw.render(), simplified: qf.render(), raw, qf })
    }

    /// `φ_k` as the sequence defines it, before essential-variable reduction
    /// (the two are equivalent).
    fn formula_raw(&self, k: &Pos) -> Result<Formula> {
        match k.as_usize().filter(|&i| i < self.inner.prefix.len()) {
            Some(i) => Ok(self.inner.prefix[i].clone()),
            None => self.formula(k),
        }
    }

    /// Conjunction of the constraints at `positions` moved to `tape`.
    fn constraints_on(&self, positions: &BTreeSet<Pos>, tape: u32) -> Result<Formula> {
        let mut parts = Vec::new();
        for p in positions {
            let c = &self.entry(p)?.constraint;
            if *c != Formula::True {
                parts.push(if tape == 0 { c.clone() } else { c.map_tapes(|_| tape) });
            }
        }
        Ok(mk_and(parts))
    }

    /// `(∃ tape ∈ D_Φ) body`, quantifier-free. Only positions in the
    /// mention-closure of the body's positions on `tape` are quantified; the
    /// rest of the tuple can always be filled in greedily.
    pub fn relativized_exists(&self, body: &Formula, tape: u32) -> Result<Formula> {
        let th = &self.inner.theory;
        let positions: Vec<Pos> = body.free_vars().into_iter().filter(|v| v.tape == tape).map(|v| v.pos).collect();
        let closure = self.closure(positions)?;
        let vars: Vec<VarRef> = closure.iter().map(|p| VarRef { tape, pos: p.clone() }).collect();
        let matrix = mk_and([self.constraints_on(&closure, tape)?, th.eliminate_quantifiers(body)?]);
        let out = th.exists_many_qf(&vars, &matrix);
        Ok(out)
    }

    /// `(∀ tape ∈ D_Φ) body`.
    pub fn relativized_forall(&self, body: &Formula, tape: u32) -> Result<Formula> {
        Ok(mk_not(self.relativized_exists(&Formula::not(body.clone()), tape)?))
    }

    /// The constraints of `D_Φ` on the mention-closure of the `tape`
    /// positions of `f`.
    pub fn sparse_d(&self, f: &Formula, tape: u32) -> Result<Formula> {
        let positions = f.free_vars().into_iter().filter(|v| v.tape == tape).map(|v| v.pos);
        let closure = self.closure(positions)?;
        self.constraints_on(&closure, tape)
    }

    /// Whether `∀x∈D (∃y φ) → φ(x, x_i)`.
    pub fn skolem_sentence_holds(&self, phi: &Formula, i: &Pos) -> Result<bool> {
        let th = &self.inner.theory;
        let mut m = VarMap::new();
        m.insert(y0(), xv(i));
        let at_i = crate::formula::substitute_vars(phi, &m);
        let body = Formula::implies(Formula::exists(y0(), phi.clone()), at_i);
        let s = self.relativized_forall(&body, 0)?;
        th.valid(&s)
    }
}

/// Witness indices for `psi(x_{<n}, y_{<m})` whose `y`-projection is
/// `D_{Φ,n}`: `i_j` codes `∃y[ψ ∧ y_j = z ∧ y_{<j} = x_{i_{<j}}]`.
pub fn witness_indices(seq: &RichSequence, psi: &Formula, n: usize, m: usize) -> Result<Vec<Pos>> {
    let th = seq.theory();
    for v in psi.free_vars() {
        let ok = (v.tape == 0 && v.pos < Pos::from(n)) || (v.tape == 1 && v.pos < Pos::from(m));
        if !ok {
            return Err(TgwError::precondition(format!("{v} is outside x_<{n}, y_<{m}")));
        }
    }
    let ys: Vec<VarRef> = (0..m as u64).map(|j| VarRef::new(1, j)).collect();
    let projected = th.exists_many_qf(&ys, psi);
    let d = seq.dphi(n)?.qf;
    if !th.equivalent(&projected, &d)? {
        let sep = separating_type(th, &projected, &d)?;
        return Err(TgwError::precondition(format!("∃y ψ is not equivalent to D_{{Φ,{n}}}; separating type {sep}")));
    }
    // Move ψ's y-variables off tape 1 so that y0 can play z.
    let moved = psi.map_tapes(|t| if t == 1 { 3 } else { t });
    let ws: Vec<VarRef> = (0..m as u64).map(|j| VarRef::new(3, j)).collect();
    let mut indices: Vec<Pos> = Vec::with_capacity(m);
    for j in 0..m {
        let mut parts = vec![moved.clone(), Formula::eq(ws[j].clone(), y0())];
        for (l, i) in indices.iter().enumerate() {
            parts.push(Formula::eq(ws[l].clone(), xv(i)));
        }
        let phi = th.exists_many_qf(&ws, &Formula::and(parts));
        let min = indices.last().map_or(Pos::from(n), |p| p.succ());
        indices.push(seq.find_index(&phi, &min)?);
    }
    // The conclusion: ψ ≡ (∃z ∈ D)(z_{<n} = x_{<n} ∧ z_i = y).
    let mut eqs = Vec::new();
    for k in 0..n as u64 {
        eqs.push(Formula::eq(VarRef::new(2, k), VarRef::x(k)));
    }
    for (j, i) in indices.iter().enumerate() {
        eqs.push(Formula::eq(VarRef { tape: 2, pos: i.clone() }, VarRef::new(1, j as u64)));
    }
    let conclusion = seq.relativized_exists(&Formula::and(eqs), 2)?;
    if !th.equivalent(&conclusion, psi)? {
        return Err(TgwError::certificate("witness-index conclusion is not equivalent to ψ"));
    }
    Ok(indices)
}

fn separating_type(th: &Theory, a: &Formula, b: &Formula) -> Result<String> {
    let diff = Formula::not(Formula::iff(a.clone(), b.clone()));
    let g = th.eliminate_quantifiers(&diff)?;
    let vars: Vec<VarRef> = g.free_vars().into_iter().collect();
    Ok(crate::theory::first_over(th.id(), &vars, &g, th.config().max_search)?
        .map_or_else(|| "none".to_owned(), |t| t.describe()))
}

/// One stage of the back-and-forth between `D_A` (tape x) and `D_B`
/// (tape y).
#[derive(Clone, Debug)]
pub struct BijectionStage {
    pub stage: usize,
    /// `x_n = y_{f[n]}` for each earlier stage `n`.
    pub f: Vec<Pos>,
    /// `y_n = x_{g[n]}` for each earlier stage `n`.
    pub g: Vec<Pos>,
    pub formula: Formula,
}

impl BijectionStage {
    pub fn initial() -> Self {
        BijectionStage { stage: 0, f: Vec::new(), g: Vec::new(), formula: Formula::True }
    }
}

/// Validity of `∀x∈D_A ∃y∈D_B θ` and `∀y∈D_B ∃x∈D_A θ`.
pub fn approximate_bijection(a: &RichSequence, b: &RichSequence, theta: &Formula) -> Result<(bool, bool)> {
    let th = a.theory();
    let forth = a.relativized_forall(&b.relativized_exists(theta, 1)?, 0)?;
    let back = b.relativized_forall(&a.relativized_exists(theta, 0)?, 1)?;
    Ok((th.valid(&forth)?, th.valid(&back)?))
}

/// Index `i` in `src` (on tape 0) such that `θ ∧ tgt_j = x_i` is again an
/// approximate bijection, `tgt` being tape 1 over `dst`.
fn extension_index(src: &RichSequence, dst: &RichSequence, theta: &Formula, j: &Pos) -> Result<Pos> {
    let th = src.theory();
    let z = VarRef::new(2, 0u64);
    let body = Formula::and([theta.clone(), Formula::eq(VarRef { tape: 1, pos: j.clone() }, z.clone())]);
    let projected = dst.relativized_exists(&body, 1)?;
    let psi = mk_and([src.sparse_d(theta, 0)?, projected]);
    let mut m = VarMap::new();
    m.insert(z, y0());
    let psi = crate::formula::substitute_vars(&psi, &m);
    let n = theta
        .free_vars()
        .iter()
        .filter(|v| v.tape == 0)
        .map(|v| v.pos.succ())
        .max()
        .unwrap_or(Pos::ZERO);
    let _ = th;
    src.find_index(&psi, &n)
}

/// Stage `n+1` from stage `n`: `θ ∧ x_n = f_n(y) ∧ y_n = g_n(x)`.
pub fn bijection_stage(a: &RichSequence, b: &RichSequence, prev: &BijectionStage) -> Result<BijectionStage> {
    let (ok_f, ok_b) = approximate_bijection(a, b, &prev.formula)?;
    if !(ok_f && ok_b) {
        return Err(TgwError::precondition(format!("stage {} is not an approximate bijection", prev.stage)));
    }
    let n = Pos::from(prev.stage);
    let ig = extension_index(a, b, &prev.formula, &n)?;
    let with_g = Formula::and([prev.formula.clone(), Formula::eq(VarRef { tape: 1, pos: n.clone() }, xv(&ig))]);
    let swapped = with_g.swap_tapes(0, 1);
    let jf = extension_index(b, a, &swapped, &n)?;
    let formula = Formula::and([with_g, Formula::eq(xv(&n), VarRef { tape: 1, pos: jf.clone() })]);
    let (ok_f, ok_b) = approximate_bijection(a, b, &formula)?;
    if !(ok_f && ok_b) {
        return Err(TgwError::certificate(format!("stage {} fails the approximate-bijection check", prev.stage + 1)));
    }
    let mut f = prev.f.clone();
    f.push(jf);
    let mut g = prev.g.clone();
    g.push(ig);
    Ok(BijectionStage { stage: prev.stage + 1, f, g, formula })
}

/// Position values of a sparse tuple, for reporting.
pub type SparseValues = BTreeMap<Pos, u64>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::TheoryId;

    #[test]
    fn first_terms() {
        let th = Theory::new(TheoryId::PureSet);
        let s = RichSequence::canonical(&th);
        assert_eq!(s.formula(&Pos::ZERO).unwrap(), Formula::True);
        let e = th.parse("eq(x0,y0)").unwrap();
        let i = s.index_of(&e).unwrap();
        assert_eq!(i, Pos::from(170u64));
        assert_eq!(s.formula(&i).unwrap(), e);
    }

    #[test]
    fn dlo_index() {
        let th = Theory::new(TheoryId::Dlo);
        let s = RichSequence::canonical(&th);
        let f = th.parse("lt(x0,y0)").unwrap();
        let i = s.index_of(&f).unwrap();
        assert!(i > Pos::ZERO);
        assert_eq!(s.formula(&i).unwrap(), f);
        assert_eq!(s.index_of(&th.parse("lt(y0,x0)").unwrap()).unwrap(), Pos::from(171u64));
    }

    #[test]
    fn dphi_with_prefix() {
        let th = Theory::new(TheoryId::PureSet);
        let s = RichSequence::with_prefix(&th, "p", vec![Formula::True, th.parse("!eq(x0,y0)").unwrap()]).unwrap();
        assert_eq!(s.dphi(0).unwrap().qf, Formula::True);
        assert_eq!(s.dphi(1).unwrap().formula, "forall y0.(true -> true)");
        assert_eq!(s.dphi(1).unwrap().qf, Formula::True);
        assert_eq!(s.dphi(2).unwrap().simplified, "!eq(x0,x1)");
    }

    #[test]
    fn relativized() {
        let th = Theory::new(TheoryId::PureSet);
        let s = RichSequence::canonical(&th);
        assert_eq!(s.relativized_exists(&th.parse("eq(x0,y0)").unwrap(), 0).unwrap(), Formula::True);
        assert_eq!(s.relativized_exists(&Formula::False, 0).unwrap(), Formula::False);
        let d = Theory::new(TheoryId::Dlo);
        let sd = RichSequence::canonical(&d);
        assert_eq!(sd.relativized_exists(&d.parse("lt(x0,y0)").unwrap(), 0).unwrap(), Formula::True);
        // x170 is forced to equal x0 on D.
        let f = th.parse("!eq(x0,x170)").unwrap();
        assert_eq!(s.relativized_exists(&f, 0).unwrap(), Formula::False);
    }

    #[test]
    fn identical_sequences_link_identically() {
        let th = Theory::new(TheoryId::PureSet);
        let s = RichSequence::canonical(&th);
        let st = bijection_stage(&s, &s, &BijectionStage::initial()).unwrap();
        // g_0 may take x_0 itself; f_0 needs an index past x_0, and the
        // first term equal to y_0 is the code of eq(x0,y0).
        assert_eq!(st.g, vec![Pos::ZERO]);
        assert_eq!(st.f, vec![Pos::from(170u64)]);
    }
}
