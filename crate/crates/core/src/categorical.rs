//! Constructions specific to omega-categorical theories: a trivialising
//! section of the groupoid, and the classical check that the Skolem sort is
//! universal.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};
use crate::groupoid::Check;
use crate::model::{build_dtuple, Cover, DTuple, Element, Model};
use crate::pos::Pos;
use crate::skolem::{y0, RichSequence, SCAN_LIMIT};
use crate::theory::{grid_vars, CompleteType};

/// How far the reference tuple is scanned for a realization before giving
/// up.
pub const REALIZATION_CAP: usize = 50_000;

/// `q`, the bounds `A_n` and `B_k`, and the indices `m(n)`.
#[derive(Clone, Debug)]
pub struct SectionSchedule {
    pub steps: usize,
    /// The canonical tuple whose type is `q`, filled densely.
    pub reference: DTuple,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub m: Vec<Pos>,
    pub formulas: Vec<Formula>,
    /// For each `n`, the least `i` realizing each one-point extension.
    pub realizations: Vec<Vec<(String, usize)>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleSummary {
    pub steps: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub m: Vec<String>,
    pub formulas: Vec<String>,
    pub realizations: Vec<Vec<(String, usize)>>,
}

impl SectionSchedule {
    pub fn summary(&self) -> ScheduleSummary {
        ScheduleSummary {
            steps: self.steps,
            a: self.a.clone(),
            b: self.b.clone(),
            m: self.m.iter().map(|p| p.to_string()).collect(),
            formulas: self.formulas.iter().map(|f| f.render()).collect(),
            realizations: self.realizations.clone(),
        }
    }

    /// `q` restricted to the listed positions, variables renamed by `names`.
    fn q_at(&self, model: &Model, positions: &[usize], names: Vec<VarRef>) -> Result<Formula> {
        let vals = positions.iter().map(|&i| self.value(i)).collect::<Result<Vec<_>>>()?;
        Ok(model.type_of(names, &vals).diagram())
    }

    fn value(&self, i: usize) -> Result<Element> {
        self.reference.get(&Pos::from(i)).ok_or_else(|| TgwError::precondition(format!("reference position {i}")))
    }

    /// `q_n`, the type of `b_{<n}`.
    pub fn q_prefix(&self, model: &Model, n: usize) -> Result<CompleteType> {
        let vals = (0..n).map(|i| self.value(i)).collect::<Result<Vec<_>>>()?;
        Ok(model.type_of(grid_vars(1, n), &vals))
    }
}

fn fill_to(b: &mut DTuple, model: &Model, seq: &RichSequence, len: usize) -> Result<()> {
    if b.len() < len {
        b.extend(model, seq, (b.len()..len).map(Pos::from), &Cover::identity())?;
    }
    Ok(())
}

/// Least `A > n` such that every one-point extension of the type of `b_{<n}`
/// is realized by some `b_i`, `n <= i < A`.
fn realization_bound(
    b: &mut DTuple,
    model: &Model,
    seq: &RichSequence,
    n: usize,
) -> Result<(usize, Vec<(String, usize)>)> {
    let vals: Vec<Element> = b.prefix(n)?;
    let base = model.type_of(grid_vars(1, n), &vals);
    let xn = VarRef::x(n as u64);
    let mut vars = grid_vars(1, n);
    vars.push(xn.clone());
    let mut missing: BTreeSet<CompleteType> = base.extensions(xn).into_iter().collect();
    let mut found = Vec::new();
    let mut i = n;
    while !missing.is_empty() {
        if i >= REALIZATION_CAP {
            let left: Vec<String> = missing.iter().map(|t| t.describe()).collect();
            return Err(TgwError::resource(format!("no realization below {REALIZATION_CAP} of {}", left.join(", "))));
        }
        fill_to(b, model, seq, i + 1)?;
        let mut v = vals.clone();
        v.push(b.get(&Pos::from(i)).expect("filled"));
        let t = model.type_of(vars.clone(), &v);
        if missing.remove(&t) {
            found.push((t.describe(), i));
        }
        i += 1;
    }
    Ok((i, found))
}

fn xs(m: &[Pos]) -> Vec<VarRef> {
    m.iter().map(|p| VarRef { tape: 0, pos: p.clone() }).collect()
}

pub fn section_schedule(seq: &RichSequence, model: &Model, steps: usize) -> Result<SectionSchedule> {
    if seq.theory().id() != model.theory() {
        return Err(TgwError::precondition("model and sequence belong to different theories"));
    }
    let mut reference = build_dtuple(model, seq, steps + 1, &Cover::identity())?;
    let mut a = Vec::new();
    let mut realizations = Vec::new();
    for n in 0..steps {
        let (bound, found) = realization_bound(&mut reference, model, seq, n)?;
        a.push(bound);
        realizations.push(found);
    }
    let mut b = vec![0usize];
    while *b.last().expect("nonempty") < steps {
        let next = a[*b.last().expect("nonempty")];
        b.push(next);
    }
    let mut sched = SectionSchedule { steps, reference, a, b, m: Vec::new(), formulas: Vec::new(), realizations };
    for n in 0..steps {
        let k = sched.b.iter().rposition(|&bk| bk <= n).expect("B_0 = 0");
        let xk = VarRef::x(k as u64);
        let mut x_names = xs(&sched.m);
        let prefix: Vec<usize> = (0..n).collect();
        let with = |extra: &[usize]| prefix.iter().copied().chain(extra.iter().copied()).collect::<Vec<_>>();
        let names = |extra: Vec<VarRef>| x_names.iter().cloned().chain(extra).collect::<Vec<_>>();
        let q_next = sched.q_at(model, &with(&[n]), names(vec![xk.clone()]))?;
        let mut cases = Vec::new();
        let mut earlier: Vec<Formula> = Vec::new();
        for l in n + 1..sched.a[n] {
            let q_nl = sched.q_at(model, &with(&[l]), names(vec![xk.clone()]))?;
            if earlier.contains(&q_nl) {
                continue;
            }
            let q_next_l = sched.q_at(model, &with(&[n, l]), names(vec![y0(), xk.clone()]))?;
            let mut parts = vec![q_nl.clone(), q_next_l];
            parts.extend(earlier.iter().map(|f| Formula::not(f.clone())));
            cases.push(Formula::and(parts));
            earlier.push(q_nl);
        }
        let phi = Formula::and([
            Formula::implies(q_next.clone(), Formula::eq(y0(), xk.clone())),
            Formula::implies(Formula::not(q_next), Formula::or(cases)),
        ]);
        let min = sched.m.last().map_or(Pos::ZERO, Pos::succ);
        let mn = seq.find_index(&phi, &min)?;
        x_names.push(VarRef { tape: 0, pos: mn.clone() });
        sched.m.push(mn);
        sched.formulas.push(phi);
    }
    Ok(sched)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrivialisationCertificate {
    /// `a_i` for `i < steps`.
    pub input: Vec<String>,
    /// `b_i = a_{m(i)}`.
    pub output: Vec<String>,
    pub checks: Vec<Check>,
}

impl TrivialisationCertificate {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// `b = m*(a)`, extending `a` over the positions `m(i)` first, with
/// `q_n(b_{<n})` and the window property checked.
pub fn apply_mstar(
    a: &DTuple,
    sched: &SectionSchedule,
    model: &Model,
    seq: &RichSequence,
    cover: &Cover,
) -> Result<TrivialisationCertificate> {
    let steps = sched.steps;
    let mut a = a.clone();
    a.extend(model, seq, (0..steps).map(Pos::from).chain(sched.m.iter().cloned()), cover)?;
    let mut checks = Vec::new();
    let bad = a.violations(model, seq)?;
    checks.push(Check::new("input lies in D", bad.is_empty(), bad.first().map(|p| format!("position {p}"))));
    let b: Vec<Element> = sched.m.iter().map(|p| a.get(p).expect("filled")).collect();
    for n in 0..=steps {
        let got = model.type_of(grid_vars(1, n), &b[..n]);
        let want = sched.q_prefix(model, n)?;
        let pass = got == want;
        checks.push(Check::new(format!("q_{n}(b<{n})"), pass, (!pass).then(|| got.describe())));
    }
    for k in 0..sched.b.len().saturating_sub(1) {
        let (lo, hi) = (sched.b[k], sched.b[k + 1]);
        if hi > steps {
            break;
        }
        let ak = a.get(&Pos::from(k)).expect("filled");
        let pass = b[lo..hi].contains(&ak);
        checks.push(Check::new(
            format!("a_{k} among b[{lo}..{hi})"),
            pass,
            (!pass).then(|| model.describe(ak)),
        ));
    }
    Ok(TrivialisationCertificate {
        input: (0..steps).map(|i| model.describe(a.get(&Pos::from(i)).expect("filled"))).collect(),
        output: b.iter().map(|&e| model.describe(e)).collect(),
        checks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SkolemChoice {
    pub formula: String,
    pub index: Pos,
    /// Whether `(∃y φ)` is consistent with the Skolem sort at all.
    pub precondition: bool,
    /// Whether the index came from the code rather than the scan.
    pub from_code: bool,
    pub sentence_valid: bool,
}

/// An index `i` with `T ⊨ (∀x ∈ D)((∃y φ) → φ(x, x_i))`.
pub fn skolem_map(seq: &RichSequence, phi: &Formula) -> Result<SkolemChoice> {
    let th = seq.theory();
    for v in phi.free_vars() {
        if v.tape != 0 && v != y0() {
            return Err(TgwError::precondition(format!("{v} is neither an x-variable nor y0")));
        }
    }
    let pre = seq.relativized_exists(&Formula::exists(y0(), phi.clone()), 0)?;
    let precondition = th.satisfiable(&pre)?;
    let mut i = Pos::ZERO;
    for _ in 0..SCAN_LIMIT {
        if seq.skolem_sentence_holds(phi, &i)? {
            return Ok(SkolemChoice { formula: phi.render(), index: i, precondition, from_code: false, sentence_valid: true });
        }
        i = i.succ();
    }
    let index = seq.index_of(phi)?;
    let sentence_valid = seq.skolem_sentence_holds(phi, &index)?;
    if !sentence_valid {
        return Err(TgwError::certificate(format!("the code {index} of {} is not a Skolem index", phi.render())));
    }
    Ok(SkolemChoice { formula: phi.render(), index, precondition, from_code: true, sentence_valid })
}

#[derive(Clone, Debug, Serialize)]
pub struct UniversalitySample {
    pub targets: Vec<String>,
    pub constructed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniversalityReport {
    pub k: usize,
    pub m0: usize,
    pub indices: Vec<Pos>,
    pub samples: Vec<UniversalitySample>,
    pub successes: usize,
    pub checks: Vec<Check>,
}

impl UniversalityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// For each sample `a` and target `t`, builds `a'` in `D` agreeing with `a`
/// below `m0` and with `a'_{m_i} = t_i`, where the `m_i >= m0` are positions
/// whose formula is `true`.
pub fn universality_check(
    seq: &RichSequence,
    model: &Model,
    k: usize,
    m0: usize,
    samples: usize,
) -> Result<UniversalityReport> {
    let mut indices = Vec::new();
    let mut p = Pos::from(m0);
    while indices.len() < k {
        if seq.entry(&p)?.formula == Formula::True {
            indices.push(p.clone());
        }
        p = p.succ();
        if p > Pos::from(m0 + 10_000) {
            return Err(TgwError::resource("no trivial formula positions found"));
        }
    }
    let top = indices.last().map_or(m0, |p| p.as_usize().expect("small") + 1).max(m0);
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for s in 0..samples as u64 {
        let cover = Cover::offset(s);
        let a = build_dtuple(model, seq, top, &cover)?;
        let targets: Vec<Element> = if s == 0 {
            indices.iter().map(|p| a.get(p).expect("filled")).collect()
        } else {
            (0..k as u64).map(|i| (7 * s + 3 * i + 1) % 23).collect()
        };
        let mut cover2 = cover.clone();
        for i in 0..m0 {
            let pos = Pos::from(i);
            cover2.overrides.insert(pos.clone(), a.get(&pos).expect("filled"));
        }
        for (p, &t) in indices.iter().zip(&targets) {
            cover2.overrides.insert(p.clone(), t);
        }
        let a2 = build_dtuple(model, seq, top, &cover2)?;
        let prefix_ok = (0..m0).all(|i| a2.get(&Pos::from(i)) == a.get(&Pos::from(i)));
        let hits = indices.iter().zip(&targets).all(|(p, &t)| a2.get(p) == Some(t));
        let ok = prefix_ok && hits && a2.check(model, seq)?;
        if !ok {
            failures.push(s);
        }
        out.push(UniversalitySample { targets: targets.iter().map(|&t| model.describe(t)).collect(), constructed: ok });
    }
    let successes = out.iter().filter(|s| s.constructed).count();
    let checks = vec![Check::new(
        format!("{successes}/{samples} targets reached"),
        failures.is_empty(),
        failures.first().map(|s| format!("sample {s}")),
    )];
    Ok(UniversalityReport { k, m0, indices, samples: out, successes, checks })
}
