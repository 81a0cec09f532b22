#![allow(dead_code)]

use tgw_core::{Formula, Theory, TheoryId, VarRef};

/// Counts complete types in `n` variables by filtering every raw diagram
/// (truth values for all `=` and relation atoms) through the axioms.
pub fn brute_force_type_count(theory: TheoryId, n: usize) -> usize {
    let eq_pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let has_rel = theory.relation().is_some();
    let rel_bits = if has_rel { n * n } else { 0 };
    let total = eq_pairs.len() + rel_bits;
    let mut count = 0;
    for mask in 0u64..(1u64 << total) {
        let bit = |k: usize| mask >> k & 1 == 1;
        let eq = |i: usize, j: usize| -> bool {
            if i == j {
                return true;
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            bit(eq_pairs.iter().position(|&p| p == (a, b)).unwrap())
        };
        let rel = |i: usize, j: usize| bit(eq_pairs.len() + i * n + j);
        if !admissible(theory, n, &eq, &rel) {
            continue;
        }
        count += 1;
    }
    count
}

fn admissible(theory: TheoryId, n: usize, eq: &dyn Fn(usize, usize) -> bool, rel: &dyn Fn(usize, usize) -> bool) -> bool {
    let all = |f: &dyn Fn(usize, usize, usize) -> bool| {
        (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| f(i, j, k))))
    };
    if !all(&|i, j, k| !(eq(i, j) && eq(j, k)) || eq(i, k)) {
        return false;
    }
    if theory.relation().is_none() {
        return true;
    }
    // Congruence.
    if !all(&|i, j, k| !eq(i, j) || (rel(i, k) == rel(j, k) && rel(k, i) == rel(k, j))) {
        return false;
    }
    match theory {
        TheoryId::Dlo => {
            all(&|i, j, k| !(rel(i, j) && rel(j, k)) || rel(i, k))
                && (0..n).all(|i| !rel(i, i))
                && (0..n).all(|i| (0..n).all(|j| eq(i, j) || rel(i, j) || rel(j, i)))
        }
        TheoryId::RandomGraph => (0..n).all(|i| !rel(i, i) && (0..n).all(|j| rel(i, j) == rel(j, i))),
        TheoryId::EquivInf => {
            all(&|i, j, k| !(rel(i, j) && rel(j, k)) || rel(i, k))
                && (0..n).all(|i| (0..n).all(|j| rel(i, j) == rel(j, i) && (!eq(i, j) || rel(i, j))))
        }
        TheoryId::PureSet => true,
    }
}

/// Elias-gamma bit string of `v >= 1`.
pub fn gamma(v: u64) -> String {
    let b = format!("{v:b}");
    format!("{}{}", "0".repeat(b.len() - 1), b)
}

/// Atoms over the variables `vars` in the theory's signature.
pub fn atoms(theory: TheoryId, vars: &[VarRef]) -> Vec<Formula> {
    let mut out = Vec::new();
    for (i, a) in vars.iter().enumerate() {
        for b in &vars[i + 1..] {
            out.push(Formula::eq(a.clone(), b.clone()));
        }
    }
    if let Some(r) = theory.relation() {
        for a in vars {
            for b in vars {
                if a != b {
                    out.push(Formula::atom2(r, a.clone(), b.clone()));
                }
            }
        }
    }
    out
}

/// Equivalence relations on D-tuples paired with the number of positions
/// they read.
pub fn equivalence_corpus(th: &Theory) -> Vec<(Formula, usize)> {
    let mut src = vec![
        ("true", 0),
        ("eq(x0,y0)", 1),
        ("(eq(x0,y0) & eq(x1,y1))", 2),
        ("eq(x1,y1)", 2),
        ("((eq(x0,x1) -> eq(y0,y1)) & (eq(y0,y1) -> eq(x0,x1)))", 2),
    ];
    match th.id() {
        TheoryId::Dlo => src.push(("((lt(x0,x1) -> lt(y0,y1)) & (lt(y0,y1) -> lt(x0,x1)))", 2)),
        TheoryId::RandomGraph => src.push(("((adj(x0,x1) -> adj(y0,y1)) & (adj(y0,y1) -> adj(x0,x1)))", 2)),
        TheoryId::EquivInf => {
            src.push(("equiv(x0,y0)", 1));
            src.push(("(equiv(x0,y0) & equiv(x1,y1))", 2));
            src.push(("(eq(x0,y0) & equiv(x1,y1))", 2));
        }
        TheoryId::PureSet => {}
    }
    src.into_iter().map(|(s, l)| (th.parse(s).expect("corpus parses"), l)).collect()
}
