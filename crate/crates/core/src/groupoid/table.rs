//! Finite-level point tables of the fibred powers.
//!
//! The level-`n` points of the `k`-th power are the complete types over a
//! `k × n` grid satisfying `D_{Φ,n}` on every tape. For `k = 2` the
//! composition relation holds of `(p, q, r)` when `p(x,y) ∧ q(y,z) ∧ r(x,z)`
//! is consistent, read off the three-tape types.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::{source_clopen, Check, ClopenSet};
use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};
use crate::skolem::RichSequence;
use crate::theory::{grid_vars, CompleteType, QfProgram};

#[derive(Clone, Debug)]
pub struct LevelTable {
    seq: RichSequence,
    arity: usize,
    level: usize,
    points: Vec<CompleteType>,
    index: HashMap<CompleteType, usize>,
    base: Vec<usize>,
    /// For `k = 2`: `(p, q) ↦ r`s.
    composition: HashMap<(usize, usize), Vec<usize>>,
}

/// `∧_t D_{Φ,n}` on tapes `0..k`.
fn d_on_tapes(seq: &RichSequence, k: usize, n: usize) -> Result<Formula> {
    let d = seq.dphi(n)?.qf;
    Ok(Formula::and((0..k as u32).map(|t| d.map_tapes(|_| t))))
}

/// Restriction of a grid type to the listed tapes, renamed to tapes
/// `0..tapes.len()`.
fn restrict_tapes(t: &CompleteType, n: usize, tapes: &[usize]) -> CompleteType {
    let idx: Vec<usize> = tapes.iter().flat_map(|&a| (0..n).map(move |p| a * n + p)).collect();
    t.restrict_indices(&idx, grid_vars(tapes.len(), n))
}

pub fn build_level_table(seq: &RichSequence, k: usize, n: usize) -> Result<LevelTable> {
    let th = seq.theory();
    let points = th.enumerate_types(k, n, &d_on_tapes(seq, k, n)?)?;
    let index: HashMap<CompleteType, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let base = (0..points.len())
        .filter(|&i| (1..k).all(|t| (0..n).all(|p| points[i].eq_at(p, t * n + p))))
        .collect();
    let mut composition: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    if k == 2 {
        for t in th.enumerate_types(3, n, &d_on_tapes(seq, 3, n)?)? {
            let p = index[&restrict_tapes(&t, n, &[0, 1])];
            let q = index[&restrict_tapes(&t, n, &[1, 2])];
            let r = index[&restrict_tapes(&t, n, &[0, 2])];
            let rs = composition.entry((p, q)).or_default();
            if !rs.contains(&r) {
                rs.push(r);
            }
        }
        for rs in composition.values_mut() {
            rs.sort_unstable();
        }
    }
    Ok(LevelTable { seq: seq.clone(), arity: k, level: n, points, index, base, composition })
}

impl LevelTable {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn seq(&self) -> &RichSequence {
        &self.seq
    }

    pub fn points(&self) -> &[CompleteType] {
        &self.points
    }

    pub fn base(&self) -> &[usize] {
        &self.base
    }

    pub fn index_of(&self, t: &CompleteType) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// The `r` with `(p, q, r)` in the composition relation.
    pub fn compose_points(&self, p: usize, q: usize) -> &[usize] {
        self.composition.get(&(p, q)).map_or(&[], Vec::as_slice)
    }

    /// All triples of the composition relation, sorted.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out: Vec<(usize, usize, usize)> =
            self.composition.iter().flat_map(|(&(p, q), rs)| rs.iter().map(move |&r| (p, q, r))).collect();
        out.sort_unstable();
        out
    }

    /// Restriction of point `i` to one tape, as a one-tape type.
    pub fn tape_restriction(&self, i: usize, tape: usize) -> CompleteType {
        restrict_tapes(&self.points[i], self.level, &[tape])
    }

    /// The point with tapes 0 and 1 exchanged.
    pub fn inverse(&self, i: usize) -> usize {
        self.index[&restrict_tapes(&self.points[i], self.level, &[1, 0])]
    }

    /// Points of the table where the clopen's formula holds.
    pub fn point_set(&self, u: &ClopenSet) -> Result<BTreeSet<usize>> {
        if u.arity() != self.arity || u.level() > self.level {
            return Err(TgwError::precondition(format!(
                "clopen of arity {} at level {} does not fit a {}-tape table at level {}",
                u.arity(),
                u.level(),
                self.arity,
                self.level
            )));
        }
        let g = self.seq.theory().eliminate_quantifiers(u.formula())?;
        let prog = QfProgram::compile(&g, &grid_vars(self.arity, self.level))?;
        Ok((0..self.points.len()).filter(|&i| prog.eval(&self.points[i])).collect())
    }

    /// The defining formula of a point set: the disjunction of its diagrams,
    /// simplified.
    pub fn formula_of(&self, set: &BTreeSet<usize>) -> Result<Formula> {
        let f = Formula::or(set.iter().map(|&i| self.points[i].diagram()));
        self.seq.theory().simplify(&f)
    }

    pub fn clopen_of(&self, set: &BTreeSet<usize>) -> Result<ClopenSet> {
        ClopenSet::new(&self.seq, self.arity, self.formula_of(set)?)?.at_level(self.level)
    }

    /// Relational composition of point sets.
    pub fn compose_sets(&self, u: &BTreeSet<usize>, v: &BTreeSet<usize>) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for &p in u {
            for &q in v {
                out.extend(self.compose_points(p, q).iter().copied());
            }
        }
        out
    }

    pub fn describe(&self, i: usize) -> String {
        self.points[i].describe()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub level: usize,
    pub points: usize,
    pub base_points: usize,
    pub triples: usize,
    pub four_tape_types: usize,
    pub open_sets_checked: usize,
    pub checks: Vec<Check>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Point subsets used for the openness check: all of them when there are
/// few points, otherwise singletons, their complements and adjacent pairs.
fn sample_subsets(n: usize) -> Vec<BTreeSet<usize>> {
    if n <= 10 {
        return (0u32..1 << n).map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect()).collect();
    }
    let mut out = Vec::new();
    for i in 0..n {
        out.push(BTreeSet::from([i]));
        out.push((0..n).filter(|&j| j != i).collect());
        out.push(BTreeSet::from([i, (i + 1) % n]));
    }
    out
}

/// Associativity, neutrality, inverses and openness on a two-tape table.
/// Returns every check; callers decide whether a failure is fatal.
pub fn verify_level_axioms(tab: &LevelTable) -> Result<AxiomReport> {
    if tab.arity != 2 {
        return Err(TgwError::precondition("axioms are checked on two-tape tables"));
    }
    let n = tab.level;
    let np = tab.points.len();
    let seq = &tab.seq;
    let mut checks = Vec::new();

    // Associativity against the four-tape types.
    let fours = seq.theory().enumerate_types(4, n, &d_on_tapes(seq, 4, n)?)?;
    let mut from_four: HashMap<(usize, usize, usize), BTreeSet<usize>> = HashMap::new();
    let mut sound = None;
    for t in &fours {
        let at = |a: usize, b: usize| tab.index[&restrict_tapes(t, n, &[a, b])];
        let (p, q, w) = (at(0, 1), at(1, 2), at(2, 3));
        let (r, r2, s) = (at(0, 2), at(1, 3), at(0, 3));
        let ok = tab.compose_points(p, q).contains(&r)
            && tab.compose_points(r, w).contains(&s)
            && tab.compose_points(q, w).contains(&r2)
            && tab.compose_points(p, r2).contains(&s);
        if !ok && sound.is_none() {
            sound = Some(t.describe());
        }
        from_four.entry((p, q, w)).or_default().insert(s);
    }
    checks.push(Check::new("four-tape types restrict into the relation", sound.is_none(), sound));
    let mut assoc = None;
    'outer: for p in 0..np {
        for q in 0..np {
            for w in 0..np {
                let single = |i: usize| BTreeSet::from([i]);
                let left = tab.compose_sets(&tab.compose_sets(&single(p), &single(q)), &single(w));
                let right = tab.compose_sets(&single(p), &tab.compose_sets(&single(q), &single(w)));
                let four = from_four.get(&(p, q, w)).cloned().unwrap_or_default();
                if left != right || left != four {
                    assoc = Some(format!("({}, {}, {})", tab.describe(p), tab.describe(q), tab.describe(w)));
                    break 'outer;
                }
            }
        }
    }
    checks.push(Check::new("associativity", assoc.is_none(), assoc));

    let base: BTreeSet<usize> = tab.base.iter().copied().collect();
    let mut neutral = None;
    for p in 0..np {
        let single = BTreeSet::from([p]);
        let left = tab.compose_sets(&base, &single);
        let right = tab.compose_sets(&single, &base);
        if left != single || right != single {
            neutral = Some(tab.describe(p));
            break;
        }
    }
    checks.push(Check::new("base is two-sided neutral", neutral.is_none(), neutral));

    let mut inverse = None;
    for p in 0..np {
        let ip = tab.inverse(p);
        let hits_base = |a: usize, b: usize| tab.compose_points(a, b).iter().any(|r| base.contains(r));
        if tab.inverse(ip) != p || !hits_base(p, ip) || !hits_base(ip, p) {
            inverse = Some(tab.describe(p));
            break;
        }
    }
    checks.push(Check::new("inverses compose into the base", inverse.is_none(), inverse));

    let one = build_level_table(seq, 1, n)?;
    let subsets = sample_subsets(np);
    let mut open = None;
    for u in &subsets {
        let pointwise: BTreeSet<usize> =
            u.iter().map(|&p| one.index[&tab.tape_restriction(p, 1)]).collect();
        let s = source_clopen(&tab.clopen_of(u)?)?;
        if one.point_set(&s)? != pointwise {
            let shown: Vec<String> = u.iter().map(|&p| tab.describe(p)).collect();
            open = Some(format!("{{{}}}", shown.join("; ")));
            break;
        }
    }
    checks.push(Check::new("source image agrees with the source formula", open.is_none(), open));

    Ok(AxiomReport {
        level: n,
        points: np,
        base_points: tab.base.len(),
        triples: tab.triples().len(),
        four_tape_types: fours.len(),
        open_sets_checked: subsets.len(),
        checks,
    })
}

/// `θ`-coordinates of a `(k+1)`-tape point: its first tape, and its
/// restrictions to tapes `(0, i)`.
pub fn theta_reindex(p: &CompleteType) -> Result<(CompleteType, Vec<CompleteType>)> {
    let tapes = p.vars().iter().map(|v| v.tape as usize + 1).max().unwrap_or(0);
    if tapes < 2 || !p.len().is_multiple_of(tapes) {
        return Err(TgwError::precondition("θ needs a point with at least two tapes on a full grid"));
    }
    let n = p.len() / tapes;
    if p.vars() != grid_vars(tapes, n).as_slice() {
        return Err(TgwError::precondition("point is not over a tape-major grid"));
    }
    let base = restrict_tapes(p, n, &[0]);
    let parts = (1..tapes).map(|i| restrict_tapes(p, n, &[0, i])).collect();
    Ok((base, parts))
}

/// Points of a `(k+1)`-tape table with the given `θ`-coordinates.
pub fn theta_class(tab: &LevelTable, base: &CompleteType, parts: &[CompleteType]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, p) in tab.points.iter().enumerate() {
        let (b, ps) = theta_reindex(p)?;
        if &b == base && ps == parts {
            out.push(i);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CantorPoint {
    pub point: String,
    /// Level at which two incompatible extensions first appear.
    pub split_level: Option<usize>,
    pub extensions: usize,
}

/// For each base point at level `n`, the first level `<= n + c` with at
/// least two extensions. Base points are read as one-tape types.
pub fn cantor_check(seq: &RichSequence, n: usize, c: usize) -> Result<Vec<CantorPoint>> {
    let here = build_level_table(seq, 1, n)?;
    let mut out: Vec<CantorPoint> = here
        .points
        .iter()
        .map(|p| CantorPoint { point: p.describe(), split_level: None, extensions: 1 })
        .collect();
    let keep: Vec<VarRef> = grid_vars(1, n);
    for m in n + 1..=n + c {
        let higher = build_level_table(seq, 1, m)?;
        let mut counts = vec![0usize; here.points.len()];
        for q in &higher.points {
            counts[here.index[&q.restrict(&keep)]] += 1;
        }
        for (cp, &cnt) in out.iter_mut().zip(&counts) {
            if cp.split_level.is_none() {
                cp.extensions = cnt;
                if cnt >= 2 {
                    cp.split_level = Some(m);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{Theory, TheoryId};

    #[test]
    fn small_tables() {
        let s = RichSequence::canonical(&Theory::new(TheoryId::PureSet));
        let t = build_level_table(&s, 2, 1).unwrap();
        assert_eq!((t.points().len(), t.base().len()), (2, 1));
        let d = RichSequence::canonical(&Theory::new(TheoryId::Dlo));
        let t = build_level_table(&d, 2, 1).unwrap();
        assert_eq!((t.points().len(), t.base().len()), (3, 1));
        assert_eq!(build_level_table(&d, 1, 0).unwrap().points().len(), 1);
    }

    #[test]
    fn axioms_level_one() {
        for id in TheoryId::ALL {
            let s = RichSequence::canonical(&Theory::new(id));
            let r = verify_level_axioms(&build_level_table(&s, 2, 1).unwrap()).unwrap();
            assert!(r.all_pass(), "{id}: {:?}", r.checks);
        }
    }

    #[test]
    fn theta_of_three_tapes() {
        let s = RichSequence::canonical(&Theory::new(TheoryId::PureSet));
        let t = build_level_table(&s, 3, 1).unwrap();
        for (i, p) in t.points().iter().enumerate() {
            let (b, parts) = theta_reindex(p).unwrap();
            assert_eq!(parts.len(), 2);
            assert!(theta_class(&t, &b, &parts).unwrap().contains(&i));
        }
    }
}
