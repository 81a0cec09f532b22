//! Minimized disjunctive normal form over the types of a variable list.
//!
//! Each satisfying type is generalized to a short implicant that excludes
//! every falsifying type (assignments that are not types are don't-cares),
//! and a greedy cover picks among the implicants.

use super::qe::mk_or;
use super::{enumerate_over, QfProgram, Theory, TheoryId};
use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn full(b: &Bits, n: usize) -> bool {
    (0..n).all(|i| get(b, i))
}

fn basis(theory: TheoryId, vars: &[VarRef]) -> Vec<Formula> {
    let mut out = Vec::new();
    if let Some(sym) = theory.relation() {
        for i in 0..vars.len() {
            for j in 0..vars.len() {
                if i < j || (theory == TheoryId::Dlo && i != j) {
                    out.push(Formula::atom2(sym, vars[i].clone(), vars[j].clone()));
                }
            }
        }
    }
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            out.push(Formula::eq(vars[i].clone(), vars[j].clone()));
        }
    }
    out
}

pub(super) fn minimize(th: &Theory, f: &Formula, vars: &[VarRef]) -> Result<Formula> {
    if matches!(f, Formula::True | Formula::False) {
        return Ok(f.clone());
    }
    let limit = th.config().minimize_limit;
    let types = match enumerate_over(th.id(), vars, &Formula::True, limit * 16) {
        Ok(t) if t.len() <= limit => t,
        Ok(_) | Err(TgwError::Resource(_)) => return Ok(f.clone()),
        Err(e) => return Err(e),
    };
    let prog = QfProgram::compile(f, vars)?;
    let atoms = basis(th.id(), vars);
    let progs: Vec<QfProgram> = atoms.iter().map(|a| QfProgram::compile(a, vars)).collect::<Result<_>>()?;
    let table: Vec<Vec<bool>> = types.iter().map(|t| progs.iter().map(|p| p.eval(t)).collect()).collect();
    let (on, off): (Vec<usize>, Vec<usize>) = (0..types.len()).partition(|&i| prog.eval(&types[i]));
    if off.is_empty() {
        return Ok(Formula::True);
    }
    if on.is_empty() {
        return Ok(Formula::False);
    }
    let b = atoms.len();
    // excl[lit][value]: off-types excluded by requiring atom `lit` to be `value`.
    let mut excl: Vec<[Bits; 2]> = vec![[bits_new(off.len()), bits_new(off.len())]; b];
    for (oi, &t) in off.iter().enumerate() {
        for (l, ex) in excl.iter_mut().enumerate() {
            set(&mut ex[usize::from(!table[t][l])], oi);
        }
    }
    let union = |lits: &[usize], row: &[bool]| -> Bits {
        let mut acc = bits_new(off.len());
        for &l in lits {
            for (a, x) in acc.iter_mut().zip(&excl[l][usize::from(row[l])]) {
                *a |= x;
            }
        }
        acc
    };
    let mut implicants: Vec<Vec<(usize, bool)>> = Vec::new();
    for &t in &on {
        let row = &table[t];
        // Every implicant of the least size that works, so the cover can
        // prefer ones shared across types.
        let mut found: Vec<Vec<usize>> = Vec::new();
        for size in 1..=3usize.min(b) {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                if full(&union(&idx, row), off.len()) {
                    found.push(idx.clone());
                }
                let mut k = size;
                while k > 0 && idx[k - 1] == b - size + k - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                for m in k..size {
                    idx[m] = idx[m - 1] + 1;
                }
            }
            if !found.is_empty() {
                break;
            }
        }
        if found.is_empty() {
            let mut keep: Vec<usize> = (0..b).collect();
            let mut i = 0;
            while i < keep.len() {
                let mut trial = keep.clone();
                trial.remove(i);
                if full(&union(&trial, row), off.len()) {
                    keep = trial;
                } else {
                    i += 1;
                }
            }
            found.push(keep);
        }
        for lits in found {
            let imp: Vec<(usize, bool)> = lits.into_iter().map(|l| (l, row[l])).collect();
            if !implicants.contains(&imp) {
                implicants.push(imp);
            }
        }
    }
    let covers = |imp: &[(usize, bool)], t: usize| imp.iter().all(|&(l, v)| table[t][l] == v);
    let mut uncovered: Vec<usize> = on.clone();
    let mut chosen: Vec<&Vec<(usize, bool)>> = Vec::new();
    while !uncovered.is_empty() {
        let best = implicants
            .iter()
            .max_by_key(|imp| {
                let n = uncovered.iter().filter(|&&t| covers(imp, t)).count();
                (n, std::cmp::Reverse(imp.len()))
            })
            .expect("every satisfying type has an implicant");
        uncovered.retain(|&t| !covers(best, t));
        chosen.push(best);
    }
    Ok(mk_or(chosen.into_iter().map(|imp| {
        Formula::and(imp.iter().map(|&(l, v)| if v { atoms[l].clone() } else { Formula::not(atoms[l].clone()) }))
    })))
}

#[cfg(test)]
mod tests {
    use super::super::{Theory, TheoryId};

    #[test]
    fn short_forms() {
        let d = Theory::new(TheoryId::Dlo);
        let f = d.parse("(lt(x0,x1) | lt(x1,x0))").unwrap();
        assert_eq!(d.simplify(&f).unwrap().render(), "!eq(x0,x1)");
        let f = d.parse("!(lt(x1,x0) | eq(x0,x1))").unwrap();
        assert_eq!(d.simplify(&f).unwrap().render(), "lt(x0,x1)");
        let p = Theory::new(TheoryId::PureSet);
        let f = p.parse("(eq(x0,x1) & (eq(x1,x2) -> eq(x0,x2)))").unwrap();
        assert_eq!(p.simplify(&f).unwrap().render(), "eq(x0,x1)");
    }
}
