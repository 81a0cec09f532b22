//! Recovering the theory from the groupoid: sorts from sub-groupoids,
//! predicates from invariant clopen sets, and the structure `M_e` read off a
//! model, compared with the structure the model induces directly.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};
use crate::groupoid::{
    build_level_table, clopen_equal, compose_clopen, en_clopen, is_subgroupoid, Check, ClopenSet, LevelTable,
    SubGroupoid,
};
use crate::model::{build_dtuple, Cover, DTuple, Element, Model};
use crate::skolem::RichSequence;

/// The equivalence relation on the Skolem sort whose clopen is `H`,
/// recovered from `H`'s point set and checked to be an equivalence relation
/// relative to the sort.
pub fn subgroupoid_to_equivalence(h: &SubGroupoid) -> Result<Formula> {
    let u = h.clopen();
    let tab = build_level_table(u.seq(), 2, u.level())?;
    let set = tab.point_set(u)?;
    let e = tab.formula_of(&set)?;
    let back = ClopenSet::new(u.seq(), 2, e.clone())?.at_level(u.level())?;
    if !clopen_equal(&back, u)? {
        return Err(TgwError::certificate(format!("{} does not define {:?}", e.render(), u)));
    }
    if let Err(r) = is_subgroupoid(&back)? {
        return Err(TgwError::certificate(format!("{} is not an equivalence relation: {r}", e.render())));
    }
    Ok(e)
}

/// One class of a sort: its members among the generated tuples.
#[derive(Clone, Debug)]
pub struct SortClass {
    pub members: Vec<DTuple>,
}

impl SortClass {
    pub fn representative(&self) -> &DTuple {
        &self.members[0]
    }
}

fn tapes_env(tuples: &[&DTuple]) -> BTreeMap<VarRef, Element> {
    let mut env = BTreeMap::new();
    for (t, d) in tuples.iter().enumerate() {
        env.extend(d.assignment(t as u32));
    }
    env
}

/// `budget` tuples of the sort, the `j`-th built over the cover shifted by
/// `j`, at the level of `H`.
pub fn generate_tuples(model: &Model, seq: &RichSequence, level: usize, budget: usize) -> Result<Vec<DTuple>> {
    (0..budget as u64).map(|j| build_dtuple(model, seq, level, &Cover::offset(j))).collect()
}

/// Classes of `H` among generated tuples: `b ~ b'` iff `(b, b')` lies in `H`.
pub fn sort_elements(e: &DTuple, h: &SubGroupoid, model: &Model, budget: usize) -> Result<Vec<SortClass>> {
    if budget == 0 {
        return Err(TgwError::precondition("budget must be positive"));
    }
    let u = h.clopen();
    if e.len() < u.level() {
        return Err(TgwError::precondition(format!("base tuple has level {} below {}", e.len(), u.level())));
    }
    let tuples = generate_tuples(model, u.seq(), u.level(), budget)?;
    quotient(model, u.formula(), tuples)
}

fn quotient(model: &Model, rel: &Formula, tuples: Vec<DTuple>) -> Result<Vec<SortClass>> {
    let mut classes: Vec<SortClass> = Vec::new();
    for b in tuples {
        let mut home = None;
        for (i, c) in classes.iter().enumerate() {
            if model.evaluate(rel, &tapes_env(&[c.representative(), &b]))? {
                home = Some(i);
                break;
            }
        }
        match home {
            Some(i) => classes[i].members.push(b),
            None => classes.push(SortClass { members: vec![b] }),
        }
    }
    // Classes must be cliques for the relation, or the quotient is not
    // well-defined on the sample.
    for c in &classes {
        for a in &c.members {
            for b in &c.members {
                if !model.evaluate(rel, &tapes_env(&[a, b]))? {
                    return Err(TgwError::certificate("sample is not closed under the equivalence relation"));
                }
            }
        }
    }
    Ok(classes)
}

/// `P_X` on the given classes, checked to be independent of the members
/// chosen.
pub fn predicate_value(x: &ClopenSet, classes: &[&SortClass], _e: &DTuple, model: &Model) -> Result<bool> {
    if classes.len() != x.arity() {
        return Err(TgwError::precondition(format!("{} classes for arity {}", classes.len(), x.arity())));
    }
    let reps: Vec<&DTuple> = classes.iter().map(|c| c.representative()).collect();
    let value = model.evaluate(x.formula(), &tapes_env(&reps))?;
    // Every choice of members.
    let mut choice = vec![0usize; classes.len()];
    loop {
        let pick: Vec<&DTuple> = classes.iter().zip(&choice).map(|(c, &i)| &c.members[i]).collect();
        if model.evaluate(x.formula(), &tapes_env(&pick))? != value {
            return Err(TgwError::certificate(format!("{:?} is not well defined on classes", x)));
        }
        let mut i = 0;
        while i < choice.len() {
            choice[i] += 1;
            if choice[i] < classes[i].members.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == choice.len() {
            return Ok(value);
        }
    }
}

/// Invariance of `X` under `H` on every coordinate: replacing tape `i` by an
/// `H`-related tuple does not change membership.
pub fn invariance_certificate(x: &ClopenSet, h: &SubGroupoid) -> Result<bool> {
    let seq = x.seq();
    let k = x.arity() as u32;
    let hf = h.clopen().formula();
    for i in 0..k {
        let moved = x.formula().map_tapes(|t| if t == i { k } else { t });
        let link = hf.map_tapes(|t| if t == 0 { i } else { k });
        let shifted = seq.relativized_exists(&Formula::and([moved, link]), k)?;
        let y = ClopenSet::new(seq, x.arity(), shifted)?;
        if !clopen_equal(&y, x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct PredicateReport {
    pub arity: usize,
    pub formula: String,
    /// The point set at level 1 defining the predicate.
    pub points: Vec<String>,
    pub invariant: bool,
    pub tuples_checked: usize,
    pub transported: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReconstructionReport {
    pub theory: String,
    pub level: usize,
    pub depth: usize,
    pub budget: usize,
    pub base_tuple: Vec<String>,
    pub sorts: Vec<String>,
    pub classes: usize,
    pub carrier: Vec<String>,
    pub predicates: Vec<PredicateReport>,
    pub checks: Vec<Check>,
}

impl ReconstructionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Candidate predicates: every point set of the one- and two-tape tables at
/// level 1, which are exactly the clopens invariant under `[E^1]` up to
/// equivalence. Quantified forms up to `depth` collapse onto these.
fn candidate_predicates(seq: &RichSequence) -> Result<Vec<(ClopenSet, LevelTable, BTreeSet<usize>)>> {
    let mut out = Vec::new();
    for k in 1..=2 {
        let tab = build_level_table(seq, k, 1)?;
        let n = tab.points().len();
        for mask in 0u32..1 << n {
            let set: BTreeSet<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            out.push((tab.clopen_of(&set)?, tab.clone(), set));
        }
    }
    Ok(out)
}

/// Builds the sort `[E^1]` and its predicates, realizes `M_e` in `model`
/// and checks that sending a class to the first entry of its representative
/// is an isomorphism onto the structure induced on the sampled elements.
pub fn reconstruct_and_compare(
    seq: &RichSequence,
    model: &Model,
    level: usize,
    depth: usize,
    budget: usize,
    base_cover: &Cover,
) -> Result<ReconstructionReport> {
    let th = seq.theory();
    if level == 0 {
        return Err(TgwError::precondition("level must be at least 1"));
    }
    let mut checks = Vec::new();
    let h = match is_subgroupoid(&en_clopen(seq, 1))? {
        Ok(h) => h,
        Err(r) => return Err(TgwError::certificate(format!("[E^1] refused: {r}"))),
    };
    let e = build_dtuple(model, seq, level, base_cover)?;
    checks.push(Check::new("base tuple lies in D", e.check(model, seq)?, None));
    let classes = sort_elements(&e, &h, model, budget)?;

    // The map class -> first entry.
    let first = |c: &SortClass| c.representative().get(&crate::pos::Pos::ZERO).expect("level >= 1");
    let images: Vec<Element> = classes.iter().map(first).collect();
    let distinct: BTreeSet<Element> = images.iter().copied().collect();
    let constant = classes.iter().all(|c| c.members.iter().all(|m| m.get(&crate::pos::Pos::ZERO) == Some(first(c))));
    checks.push(Check::new("class to first entry is well defined", constant, None));
    checks.push(Check::new("class to first entry is injective", distinct.len() == images.len(), None));

    let mut predicates = Vec::new();
    let mut transport_ok = true;
    let mut first_failure = None;
    for (x, tab, set) in candidate_predicates(seq)? {
        let invariant = invariance_certificate(&x, &h)?;
        let k = x.arity();
        let mut idx = vec![0usize; k];
        let mut count = 0;
        let mut transported = true;
        'tuples: loop {
            let picked: Vec<&SortClass> = idx.iter().map(|&i| &classes[i]).collect();
            let reconstructed = predicate_value(&x, &picked, &e, model)?;
            // The relation the point set defines, read off the model's type
            // of the images rather than by evaluating the formula.
            let elems: Vec<Vec<Element>> = idx.iter().map(|&i| vec![images[i]]).collect();
            let point = tab
                .index_of(&model.tuple_type(&elems))
                .ok_or_else(|| TgwError::certificate("model type missing from the level table"))?;
            let induced = set.contains(&point);
            count += 1;
            if reconstructed != induced {
                transported = false;
                if first_failure.is_none() {
                    let shown: Vec<String> = idx.iter().map(|&i| model.describe(images[i])).collect();
                    first_failure = Some(format!("{} at ({})", x.formula().render(), shown.join(", ")));
                }
                break 'tuples;
            }
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < classes.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
        transport_ok &= transported && invariant;
        predicates.push(PredicateReport {
            arity: k,
            formula: x.formula().render(),
            points: set.iter().map(|&i| tab.describe(i)).collect(),
            invariant,
            tuples_checked: count,
            transported,
        });
    }
    checks.push(Check::new("every predicate is invariant and transported", transport_ok, first_failure));

    // Composition of the sort with itself stays inside it.
    let hh = compose_clopen(h.clopen(), h.clopen())?;
    checks.push(Check::new("sort relation is closed under composition", clopen_equal(&hh, h.clopen())?, None));

    let base_tuple = e.prefix(level)?.into_iter().map(|v| model.describe(v)).collect();
    Ok(ReconstructionReport {
        theory: th.id().name().to_owned(),
        level,
        depth,
        budget,
        base_tuple,
        sorts: vec![h.clopen().formula().render()],
        classes: classes.len(),
        carrier: distinct.iter().map(|&v| model.describe(v)).collect(),
        predicates,
        checks,
    })
}
