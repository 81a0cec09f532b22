//! Values fixed by oracles that live here rather than in the library:
//! raw-diagram counts, closed-form combinatorics, a hand-rolled gamma coder
//! and direct model lookups.

mod common;

use tgw_core::categorical::section_schedule;
use tgw_core::groupoid::{build_level_table, is_subgroupoid, minimal_en_index, project_clopen, ClopenSet};
use tgw_core::model::{build_dtuple, Cover, Model};
use tgw_core::skolem::coding::decode;
use tgw_core::skolem::{y0, RichSequence};
use tgw_core::{Formula, Pos, Theory, TheoryId, VarRef};

use common::{brute_force_type_count, gamma};

fn stirling2(n: u64, k: u64) -> u64 {
    match (n, k) {
        (0, 0) => 1,
        (0, _) | (_, 0) => 0,
        _ => k * stirling2(n - 1, k) + stirling2(n - 1, k - 1),
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn bell(n: u64) -> u64 {
    (0..=n).map(|k| stirling2(n, k)).sum()
}

/// Closed forms: set partitions, ordered partitions, graphs on the classes,
/// and partitions of the classes.
fn closed_form(id: TheoryId, n: u64) -> u64 {
    (0..=n)
        .map(|k| {
            let s = stirling2(n, k);
            s * match id {
                TheoryId::PureSet => 1,
                TheoryId::Dlo => factorial(k),
                TheoryId::RandomGraph => 1 << (k * k.saturating_sub(1) / 2),
                TheoryId::EquivInf => bell(k),
            }
        })
        .sum()
}

#[test]
fn type_counts_against_two_oracles() {
    for id in TheoryId::ALL {
        let th = Theory::new(id);
        for n in 0..=3 {
            let got = th.enumerate_types(1, n, &Formula::True).unwrap().len() as u64;
            assert_eq!(got, brute_force_type_count(id, n) as u64, "{} n={n}", id.name());
            assert_eq!(got, closed_form(id, n as u64), "{} n={n}", id.name());
        }
        let got = th.enumerate_types(1, 4, &Formula::True).unwrap().len() as u64;
        assert_eq!(got, closed_form(id, 4), "{} n=4", id.name());
    }
    assert_eq!(
        TheoryId::ALL.map(|id| closed_form(id, 4)),
        [15, 75, 127, 60]
    );
}

fn bits(s: &str) -> u64 {
    u64::from_str_radix(s, 2).unwrap()
}

#[test]
fn gamma_codes_of_first_binary_formulas() {
    // Leading 1, then |S|+1, the first position plus one, and mask+1.
    let eq_code = bits(&format!("1{}{}{}", gamma(2), gamma(1), gamma(2)));
    let second_code = bits(&format!("1{}{}{}", gamma(2), gamma(1), gamma(3)));
    assert_eq!((eq_code, second_code), (170, 171));
    let (support, mask) = decode(&Pos::from(170u64)).unwrap();
    assert_eq!((support, mask), (vec![Pos::ZERO], 1u32.into()));
    // With support [0] only the empty mask codes below 170.
    assert_eq!(bits(&format!("1{}{}{}", gamma(2), gamma(1), gamma(1))), 43);
    assert_eq!(decode(&Pos::from(43u64)).map(|d| d.1), Some(0u32.into()));
}

#[test]
fn first_binary_formulas_in_the_canonical_sequence() {
    let th = Theory::new(TheoryId::PureSet);
    let s = RichSequence::canonical(&th);
    let f = s.formula(&Pos::from(170u64)).unwrap();
    assert!(th.equivalent(&f, &th.parse("eq(x0,y0)").unwrap()).unwrap());
    let th = Theory::new(TheoryId::Dlo);
    let s = RichSequence::canonical(&th);
    let f = s.formula(&Pos::from(171u64)).unwrap();
    assert!(th.equivalent(&f, &th.parse("lt(y0,x0)").unwrap()).unwrap());
}

#[test]
fn first_realization_of_equality_is_at_170() {
    // Below 170 no rich formula forces y0 onto x0, so position 0 is first
    // repeated at 170 and A_1 = 171.
    let th = Theory::new(TheoryId::PureSet);
    let s = RichSequence::canonical(&th);
    let eq = Formula::eq(y0(), VarRef::x(0u64));
    for i in 1..170u64 {
        let f = s.formula(&Pos::from(i)).unwrap();
        assert!(!th.satisfiable(&f).unwrap() || !th.entails(&f, &eq).unwrap(), "position {i}");
    }
    let m = Model::new(TheoryId::PureSet);
    let sched = section_schedule(&s, &m, 2).unwrap();
    assert_eq!(sched.a, vec![1, 171]);
    assert_eq!(sched.b, vec![0, 1, 171]);
}

#[test]
fn dtuple_with_disequality_prefix() {
    let th = Theory::new(TheoryId::PureSet);
    let prefix = vec![Formula::True, th.parse("!eq(x0,y0)").unwrap()];
    let s = RichSequence::with_prefix(&th, "prefixed", prefix).unwrap();
    let m = Model::new(TheoryId::PureSet);
    let a = build_dtuple(&m, &s, 2, &Cover::list(vec![0, 1])).unwrap();
    assert_eq!(a.prefix(2).unwrap(), vec![0, 1]);
    // A cover repeating 0 forces the witness.
    let a = build_dtuple(&m, &s, 2, &Cover::list(vec![0, 0])).unwrap();
    assert_ne!(a.prefix(2).unwrap()[1], 0);
}

#[test]
fn dtuple_dlo_least_rational_above() {
    let th = Theory::new(TheoryId::Dlo);
    let prefix = vec![Formula::True, th.parse("lt(x0,y0)").unwrap()];
    let s = RichSequence::with_prefix(&th, "above", prefix).unwrap();
    let m = Model::new(TheoryId::Dlo);
    for start in [0u64, 1, 2, 5] {
        let a = build_dtuple(&m, &s, 2, &Cover::list(vec![start, 0])).unwrap();
        let v = a.prefix(2).unwrap();
        let least = (0u64..).find(|&e| m.rel(v[0], e)).unwrap();
        assert_eq!(v[1], least, "start {start}");
    }
}

#[test]
fn small_level_tables() {
    for (id, points) in [(TheoryId::PureSet, 2), (TheoryId::Dlo, 3)] {
        let s = RichSequence::canonical(&Theory::new(id));
        let t = build_level_table(&s, 2, 1).unwrap();
        assert_eq!((t.points().len(), t.base().len()), (points, 1));
        let t = build_level_table(&s, 1, 0).unwrap();
        assert_eq!(t.points().len(), 1);
    }
}

#[test]
fn quantifier_elimination_examples() {
    let th = Theory::new(TheoryId::Dlo);
    let f = th.eliminate_quantifiers(&th.parse("exists y0.(lt(x0,y0) & lt(y0,x1))").unwrap()).unwrap();
    assert!(th.equivalent(&f, &th.parse("lt(x0,x1)").unwrap()).unwrap());
    let th = Theory::new(TheoryId::PureSet);
    assert!(!th.decide_sentence(&th.parse("exists x0. forall y0. eq(x0,y0)").unwrap()).unwrap());
    let th = Theory::new(TheoryId::RandomGraph);
    let f = th
        .eliminate_quantifiers(
            &th.parse("exists y0.(adj(x0,y0) & !adj(x1,y0) & !eq(y0,x0) & !eq(y0,x1))").unwrap(),
        )
        .unwrap();
    assert!(th.equivalent(&f, &th.parse("!eq(x0,x1)").unwrap()).unwrap());
}

#[test]
fn projection_and_minimal_index() {
    let th = Theory::new(TheoryId::PureSet);
    let s = RichSequence::canonical(&th);
    let u = ClopenSet::new(&s, 2, th.parse("!eq(x1,y1)").unwrap()).unwrap().at_level(2).unwrap();
    let p = project_clopen(&u, 1).unwrap();
    // The formula of the projection holds everywhere on the level-1 grid.
    let t = build_level_table(&s, 2, 1).unwrap();
    assert_eq!(t.point_set(&p).unwrap().len(), t.points().len());

    let th = Theory::new(TheoryId::Dlo);
    let s = RichSequence::canonical(&th);
    let h = is_subgroupoid(&ClopenSet::new(&s, 2, th.parse("eq(x0,y0)").unwrap()).unwrap())
        .unwrap()
        .unwrap();
    assert_eq!(minimal_en_index(&h, 3).unwrap(), 1);
}
