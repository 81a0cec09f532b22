//! Single-quantifier elimination over literal cubes.

use std::collections::BTreeSet;

use super::TheoryId;
use crate::formula::{Formula, VarRef};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) enum Atom {
    Eq(VarRef, VarRef),
    /// The theory's single binary relation.
    Rel(VarRef, VarRef),
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub(crate) struct Lit {
    pub atom: Atom,
    pub pos: bool,
}

pub(crate) type Cube = BTreeSet<Lit>;

enum Norm {
    Const(bool),
    Lit(Lit),
}

fn normalize(theory: TheoryId, atom: Atom, pos: bool) -> Norm {
    match atom {
        Atom::Eq(a, b) => {
            if a == b {
                Norm::Const(pos)
            } else {
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                Norm::Lit(Lit { atom: Atom::Eq(a, b), pos })
            }
        }
        Atom::Rel(a, b) => {
            if a == b {
                let reflexive = matches!(theory, TheoryId::EquivInf);
                return Norm::Const(reflexive == pos);
            }
            let symmetric = !matches!(theory, TheoryId::Dlo);
            let (a, b) = if symmetric && b < a { (b, a) } else { (a, b) };
            Norm::Lit(Lit { atom: Atom::Rel(a, b), pos })
        }
    }
}

/// Adds a literal; false when the cube becomes contradictory.
fn add_lit(theory: TheoryId, cube: &mut Cube, atom: Atom, pos: bool) -> bool {
    match normalize(theory, atom, pos) {
        Norm::Const(b) => b,
        Norm::Lit(l) => {
            let neg = Lit { atom: l.atom.clone(), pos: !l.pos };
            if cube.contains(&neg) {
                return false;
            }
            cube.insert(l);
            true
        }
    }
}

fn atom_of(f: &Formula) -> Option<Atom> {
    match f {
        Formula::Eq(a, b) => Some(Atom::Eq(a.clone(), b.clone())),
        Formula::Atom(_, args) if args.len() == 2 => Some(Atom::Rel(args[0].clone(), args[1].clone())),
        _ => None,
    }
}

/// Disjunctive normal form of a quantifier-free formula (negated when `neg`).
pub(crate) fn dnf(theory: TheoryId, f: &Formula, neg: bool) -> Vec<Cube> {
    match f {
        Formula::True => if neg { vec![] } else { vec![Cube::new()] },
        Formula::False => if neg { vec![Cube::new()] } else { vec![] },
        Formula::Eq(..) | Formula::Atom(..) => {
            let mut c = Cube::new();
            if add_lit(theory, &mut c, atom_of(f).expect("binary atom"), !neg) {
                vec![c]
            } else {
                vec![]
            }
        }
        Formula::Not(g) => dnf(theory, g, !neg),
        Formula::And(gs) if !neg => product(theory, gs.iter().map(|g| dnf(theory, g, false))),
        Formula::Or(gs) if neg => product(theory, gs.iter().map(|g| dnf(theory, g, true))),
        Formula::And(gs) | Formula::Or(gs) => {
            absorb(gs.iter().flat_map(|g| dnf(theory, g, neg)).collect())
        }
        Formula::Implies(a, b) => {
            if neg {
                product(theory, [dnf(theory, a, false), dnf(theory, b, true)])
            } else {
                absorb(dnf(theory, a, true).into_iter().chain(dnf(theory, b, false)).collect())
            }
        }
        Formula::Exists(..) | Formula::Forall(..) => panic!("dnf of a quantified formula"),
    }
}

fn product(theory: TheoryId, parts: impl IntoIterator<Item = Vec<Cube>>) -> Vec<Cube> {
    let mut acc = vec![Cube::new()];
    for part in parts {
        let mut next = Vec::new();
        for a in &acc {
            for b in &part {
                let mut c = a.clone();
                if b.iter().all(|l| add_lit(theory, &mut c, l.atom.clone(), l.pos)) {
                    next.push(c);
                }
            }
        }
        acc = absorb(next);
        if acc.is_empty() {
            break;
        }
    }
    acc
}

/// Removes duplicate and subsumed cubes.
pub(crate) fn absorb(mut cubes: Vec<Cube>) -> Vec<Cube> {
    cubes.sort_by_key(|c| c.len());
    cubes.dedup();
    let mut kept: Vec<Cube> = Vec::new();
    for c in cubes {
        if !kept.iter().any(|k| k.is_subset(&c)) {
            kept.push(c);
        }
    }
    kept.sort();
    kept
}

pub(crate) fn lit_formula(theory: TheoryId, l: &Lit) -> Formula {
    let a = match &l.atom {
        Atom::Eq(a, b) => Formula::eq(a.clone(), b.clone()),
        Atom::Rel(a, b) => Formula::atom2(theory.relation().expect("relation"), a.clone(), b.clone()),
    };
    if l.pos {
        a
    } else {
        Formula::not(a)
    }
}

pub(crate) fn dnf_formula(theory: TheoryId, cubes: &[Cube]) -> Formula {
    Formula::or(cubes.iter().map(|c| Formula::and(c.iter().map(|l| lit_formula(theory, l)))))
}

fn mentions(l: &Lit, v: &VarRef) -> bool {
    match &l.atom {
        Atom::Eq(a, b) | Atom::Rel(a, b) => a == v || b == v,
    }
}

fn other<'a>(l: &'a Lit, v: &VarRef) -> &'a VarRef {
    match &l.atom {
        Atom::Eq(a, b) | Atom::Rel(a, b) => {
            if a == v {
                b
            } else {
                a
            }
        }
    }
}

fn subst_atom(atom: &Atom, v: &VarRef, t: &VarRef) -> Atom {
    let s = |x: &VarRef| if x == v { t.clone() } else { x.clone() };
    match atom {
        Atom::Eq(a, b) => Atom::Eq(s(a), s(b)),
        Atom::Rel(a, b) => Atom::Rel(s(a), s(b)),
    }
}

/// `∃v cube` as a disjunction of cubes free of `v`.
fn elim_cube(theory: TheoryId, v: &VarRef, cube: &Cube) -> Vec<Cube> {
    let pivot = cube.iter().find(|l| l.pos && matches!(l.atom, Atom::Eq(..)) && mentions(l, v));
    if let Some(p) = pivot {
        let t = other(p, v).clone();
        let mut out = Cube::new();
        for l in cube {
            if !add_lit(theory, &mut out, subst_atom(&l.atom, v, &t), l.pos) {
                return vec![];
            }
        }
        return vec![out];
    }
    let (vl, rest): (Vec<&Lit>, Vec<&Lit>) = cube.iter().partition(|l| mentions(l, v));
    let mut base: Cube = rest.into_iter().cloned().collect();
    match theory {
        TheoryId::PureSet => vec![base],
        TheoryId::Dlo => {
            if vl.iter().any(|l| !l.pos) {
                // Trade negative literals for positive alternatives.
                let mut alts: Vec<Vec<Cube>> = Vec::new();
                let mut positive = Cube::new();
                for l in &vl {
                    if l.pos {
                        positive.insert((*l).clone());
                        continue;
                    }
                    let (a, b) = match &l.atom {
                        Atom::Eq(a, b) | Atom::Rel(a, b) => (a.clone(), b.clone()),
                    };
                    let options = match l.atom {
                        Atom::Rel(..) => vec![(Atom::Rel(b.clone(), a.clone()), true), (Atom::Eq(a, b), true)],
                        Atom::Eq(..) => vec![(Atom::Rel(a.clone(), b.clone()), true), (Atom::Rel(b, a), true)],
                    };
                    alts.push(
                        options
                            .into_iter()
                            .filter_map(|(at, p)| {
                                let mut c = Cube::new();
                                add_lit(theory, &mut c, at, p).then_some(c)
                            })
                            .collect(),
                    );
                }
                let mut seed = base.clone();
                seed.extend(positive);
                let expanded = product(theory, std::iter::once(vec![seed]).chain(alts));
                return absorb(expanded.iter().flat_map(|c| elim_cube(theory, v, c)).collect());
            }
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for l in &vl {
                if let Atom::Rel(a, b) = &l.atom {
                    if a == v {
                        upper.push(b.clone());
                    } else {
                        lower.push(a.clone());
                    }
                }
            }
            for l in &lower {
                for u in &upper {
                    if !add_lit(theory, &mut base, Atom::Rel(l.clone(), u.clone()), true) {
                        return vec![];
                    }
                }
            }
            vec![base]
        }
        TheoryId::RandomGraph => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for l in &vl {
                if let Atom::Rel(..) = l.atom {
                    if l.pos {
                        pos.push(other(l, v).clone());
                    } else {
                        neg.push(other(l, v).clone());
                    }
                }
            }
            for p in &pos {
                for n in &neg {
                    if !add_lit(theory, &mut base, Atom::Eq(p.clone(), n.clone()), false) {
                        return vec![];
                    }
                }
            }
            vec![base]
        }
        TheoryId::EquivInf => {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            for l in &vl {
                if let Atom::Rel(..) = l.atom {
                    if l.pos {
                        pos.push(other(l, v).clone());
                    } else {
                        neg.push(other(l, v).clone());
                    }
                }
            }
            if let Some(t0) = pos.first() {
                for t in &pos[1..] {
                    if !add_lit(theory, &mut base, Atom::Rel(t0.clone(), t.clone()), true) {
                        return vec![];
                    }
                }
                for s in &neg {
                    if !add_lit(theory, &mut base, Atom::Rel(t0.clone(), s.clone()), false) {
                        return vec![];
                    }
                }
            }
            vec![base]
        }
    }
}

fn conjuncts(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::And(gs) => gs.clone(),
        Formula::True => vec![],
        other => vec![other.clone()],
    }
}

/// `∃v f` for quantifier-free `f`, quantifier-free result.
pub(crate) fn elim_exists(theory: TheoryId, v: &VarRef, f: &Formula) -> Formula {
    let (with_v, without): (Vec<Formula>, Vec<Formula>) =
        conjuncts(f).into_iter().partition(|g| g.free_vars().contains(v));
    if with_v.is_empty() {
        return f.clone();
    }
    let cubes = dnf(theory, &Formula::and(with_v), false);
    let eliminated = absorb(cubes.iter().flat_map(|c| elim_cube(theory, v, c)).collect());
    mk_and(without.into_iter().chain([dnf_formula(theory, &eliminated)]))
}

/// Conjunction with constant folding.
pub(crate) fn mk_and(parts: impl IntoIterator<Item = Formula>) -> Formula {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Formula::True => {}
            Formula::False => return Formula::False,
            other => out.push(other),
        }
    }
    Formula::and(out)
}

/// Disjunction with constant folding.
pub(crate) fn mk_or(parts: impl IntoIterator<Item = Formula>) -> Formula {
    let mut out = Vec::new();
    for p in parts {
        match p {
            Formula::False => {}
            Formula::True => return Formula::True,
            other => out.push(other),
        }
    }
    Formula::or(out)
}

pub(crate) fn mk_not(f: Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(g) => *g,
        other => Formula::not(other),
    }
}

/// Constant folding and reflexive-atom evaluation on a quantifier-free formula.
pub(crate) fn fold(theory: TheoryId, f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Eq(..) | Formula::Atom(..) => match normalize(theory, atom_of(f).expect("binary atom"), true) {
            Norm::Const(b) => if b { Formula::True } else { Formula::False },
            Norm::Lit(l) => lit_formula(theory, &l),
        },
        Formula::Not(g) => mk_not(fold(theory, g)),
        Formula::And(gs) => mk_and(gs.iter().map(|g| fold(theory, g))),
        Formula::Or(gs) => mk_or(gs.iter().map(|g| fold(theory, g))),
        Formula::Implies(a, b) => mk_or([mk_not(fold(theory, a)), fold(theory, b)]),
        Formula::Exists(..) | Formula::Forall(..) => panic!("fold of a quantified formula"),
    }
}
