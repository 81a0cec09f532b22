//! Acceptance suite. Each criterion prints one line:
//! `[PASS|FAIL] <id> <summary> (<elapsed> / limit <limit>)`.
//! All comparisons are exact; the only tolerances are the wall-clock limits.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::time::{Duration, Instant};

use tgw_core::categorical::{apply_mstar, section_schedule, skolem_map, universality_check};
use tgw_core::groupoid::{build_level_table, cantor_check, verify_level_axioms, LevelTable};
use tgw_core::groupoid::{
    clopen_equal, compose_clopen, is_subgroupoid, minimal_en_index, ClopenSet,
};
use tgw_core::model::{build_dtuple, Cover};
use tgw_core::model::Model;
use tgw_core::reconstruction::{reconstruct_and_compare, subgroupoid_to_equivalence};
use tgw_core::skolem::{approximate_bijection, bijection_stage, BijectionStage, RichSequence};
use tgw_core::theory::grid_vars;
use tgw_core::{Formula, Result, Theory, TheoryId};

use common::{atoms, brute_force_type_count, equivalence_corpus};

fn line(text: &str) {
    // Bypasses the test harness capture so the lines land in the log.
    let _ = writeln!(std::io::stderr(), "{text}");
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: &str, limit: Duration, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let res = f();
    let elapsed = start.elapsed();
    let (pass, detail) = match res {
        Ok(o) => (o.pass, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= limit;
    let ok = pass && in_time;
    line(&format!(
        "[{}] {id} {detail}{} ({:.2}s / limit {}s)",
        if ok { "PASS" } else { "FAIL" },
        if in_time { "" } else { " [time limit exceeded]" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    ));
    ok
}

fn canonical(id: TheoryId) -> RichSequence {
    RichSequence::canonical(&Theory::new(id))
}

fn type_counts() -> Result<Outcome> {
    let expected = [
        (TheoryId::PureSet, 2, 2),
        (TheoryId::PureSet, 3, 5),
        (TheoryId::Dlo, 2, 3),
        (TheoryId::Dlo, 3, 13),
        (TheoryId::RandomGraph, 2, 3),
        (TheoryId::RandomGraph, 3, 15),
    ];
    let mut bad = Vec::new();
    for (id, n, want) in expected {
        let oracle = brute_force_type_count(id, n);
        let got = Theory::new(id).enumerate_types(1, n, &Formula::True)?.len();
        if oracle != want || got != oracle {
            bad.push(format!("{} n={n}: enumerate {got}, oracle {oracle}, pinned {want}", id.name()));
        }
    }
    Ok(Outcome { pass: bad.is_empty(), detail: format!("type counts vs raw-diagram oracle, 6 cases {}", bad.join("; ")) })
}

fn groupoid_axioms() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let rep = verify_level_axioms(&build_level_table(&canonical(id), 2, 1)?)?;
        pass &= rep.all_pass();
        let failed: Vec<&str> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        parts.push(format!("{}:{}pts/{}checks{}", id.name(), rep.points, rep.checks.len(), if failed.is_empty() { String::new() } else { format!(" failed {failed:?}") }));
    }
    Ok(Outcome { pass, detail: format!("level-1 groupoid axioms {}", parts.join(" ")) })
}

/// Level-2 two-tape formulas: E^1, E^2, and cross-tape literals.
fn level_two_corpus(th: &Theory) -> Vec<Formula> {
    let vars = grid_vars(2, 2);
    let mut out = vec![Formula::True, en_clopen_formula(1), en_clopen_formula(2)];
    for a in atoms(th.id(), &vars) {
        let tapes: BTreeSet<u32> = a.free_vars().iter().map(|v| v.tape).collect();
        if tapes.len() == 2 {
            out.push(Formula::not(a.clone()));
            out.push(a);
        }
    }
    out
}

fn en_clopen_formula(n: usize) -> Formula {
    tgw_core::groupoid::en_formula(n)
}

fn composition() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let seq = canonical(id);
        let tab = build_level_table(&seq, 2, 2)?;
        let corpus = level_two_corpus(seq.theory());
        // Every formula against a spread of partners.
        let mut pairs = 0;
        let mut bad = 0;
        for (i, f) in corpus.iter().enumerate() {
            for g in corpus.iter().skip(i % 3).step_by(3).take(4) {
                let u = ClopenSet::new(&seq, 2, f.clone())?.at_level(2)?;
                let v = ClopenSet::new(&seq, 2, g.clone())?.at_level(2)?;
                let w = compose_clopen(&u, &v)?;
                let relational = tab.compose_sets(&tab.point_set(&u)?, &tab.point_set(&v)?);
                pairs += 1;
                if tab.point_set(&w)? != relational {
                    bad += 1;
                }
            }
        }
        pass &= bad == 0 && pairs >= 20;
        parts.push(format!("{}:{pairs}pairs/{bad}bad", id.name()));
    }
    Ok(Outcome { pass, detail: format!("clopen composition vs point composition {}", parts.join(" ")) })
}

fn round_trip_one(tab: &LevelTable, u: &ClopenSet) -> Result<bool> {
    let set = tab.point_set(u)?;
    let back = tab.clopen_of(&set)?;
    Ok(clopen_equal(u, &back)? && tab.point_set(&back)? == set)
}

fn round_trip() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let seq = canonical(id);
        let th = seq.theory();
        let mut checked = 0;
        let mut bad = 0;
        // Level 1: every point subset.
        let t1 = build_level_table(&seq, 2, 1)?;
        let n1 = t1.points().len();
        for mask in 0u32..(1 << n1) {
            let set: BTreeSet<usize> = (0..n1).filter(|i| mask >> i & 1 == 1).collect();
            let u = t1.clopen_of(&set)?;
            checked += 1;
            if !round_trip_one(&t1, &u)? || t1.point_set(&u)? != set {
                bad += 1;
            }
        }
        // Level 2: depth at most one over the grid.
        let t2 = build_level_table(&seq, 2, 2)?;
        let lits = atoms(id, &grid_vars(2, 2));
        let mut corpus: Vec<Formula> = vec![Formula::True, Formula::False];
        for a in &lits {
            corpus.push(a.clone());
            corpus.push(Formula::not(a.clone()));
        }
        for (i, a) in lits.iter().enumerate() {
            if let Some(b) = lits.get(i + 1) {
                corpus.push(Formula::and([a.clone(), b.clone()]));
                corpus.push(Formula::or([a.clone(), b.clone()]));
            }
        }
        for f in corpus {
            debug_assert!(f.depth() <= 1);
            let u = ClopenSet::new(&seq, 2, th.simplify(&f)?)?.at_level(2)?;
            checked += 1;
            if !round_trip_one(&t2, &u)? {
                bad += 1;
            }
        }
        pass &= bad == 0;
        parts.push(format!("{}:{checked}/{bad}bad", id.name()));
    }
    Ok(Outcome { pass, detail: format!("formula -> points -> formula {}", parts.join(" ")) })
}

fn equivalences() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let seq = canonical(id);
        let mut bad = Vec::new();
        let corpus = equivalence_corpus(seq.theory());
        for (f, level) in &corpus {
            let u = ClopenSet::new(&seq, 2, f.clone())?;
            match is_subgroupoid(&u)? {
                Ok(h) => {
                    let idx = minimal_en_index(&h, *level)?;
                    let e = subgroupoid_to_equivalence(&h)?;
                    let back = ClopenSet::new(&seq, 2, e)?;
                    if idx > *level || !clopen_equal(&u, &back)? {
                        bad.push(format!("{f} (index {idx})"));
                    }
                }
                Err(r) => bad.push(format!("{f} refused: {r}")),
            }
        }
        pass &= bad.is_empty();
        parts.push(format!("{}:{}{}", id.name(), corpus.len(), if bad.is_empty() { String::new() } else { format!(" bad {bad:?}") }));
    }
    Ok(Outcome { pass, detail: format!("equivalence relations certified and round-tripped {}", parts.join(" ")) })
}

fn reconstruction() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let seq = canonical(id);
        let model = Model::new(id);
        let rep = reconstruct_and_compare(&seq, &model, 1, 1, 8, &Cover::identity())?;
        pass &= rep.all_pass();
        parts.push(format!("{}:{}classes/{}preds", id.name(), rep.classes, rep.predicates.len()));
    }
    Ok(Outcome { pass, detail: format!("reconstruction budget 8 depth 1 {}", parts.join(" ")) })
}

fn sections() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for (id, steps) in [(TheoryId::PureSet, 4), (TheoryId::Dlo, 3)] {
        let seq = canonical(id);
        let model = Model::new(id);
        let sched = section_schedule(&seq, &model, steps)?;
        let mut certs = 0;
        let mut failed = Vec::new();
        for off in [0u64, 3, 11] {
            let cover = Cover::offset(off);
            let a = build_dtuple(&model, &seq, steps, &cover)?;
            let cert = apply_mstar(&a, &sched, &model, &seq, &cover)?;
            pass &= cert.all_pass() && cert.checks.iter().any(|c| c.name.contains(" among b["));
            certs += cert.checks.len();
            failed.extend(cert.checks.iter().filter(|c| !c.pass).map(|c| format!("{}@{off}: {}", c.name, c.witness.clone().unwrap_or_default())));
        }
        parts.push(format!("{}:A={:?} B={:?} {certs}checks{}", id.name(), sched.a, sched.b, if failed.is_empty() { String::new() } else { format!(" failed {failed:?}") }));
    }
    Ok(Outcome { pass, detail: format!("trivialising section {}", parts.join(" ")) })
}

fn skolem_corpus(th: &Theory) -> Vec<Formula> {
    let mut src: Vec<String> = vec![
        "true".into(),
        "eq(y0,x0)".into(),
        "!eq(y0,x0)".into(),
        "(!eq(y0,x0) & !eq(y0,x1))".into(),
        "(eq(y0,x0) | eq(y0,x1))".into(),
        "eq(y0,x1)".into(),
    ];
    let extra: Vec<String> = match th.id().relation() {
        Some(r) => vec![
            format!("{r}(x0,y0)"),
            format!("{r}(y0,x0)"),
            format!("({r}(x0,y0) & !eq(y0,x1))"),
            format!("(!{r}(x0,y0) & !eq(y0,x0))"),
        ],
        None => vec![
            "(!eq(y0,x0) & !eq(y0,x1) & !eq(y0,x2))".into(),
            "(eq(y0,x2) | !eq(y0,x2))".into(),
            "eq(y0,x2)".into(),
            "(!eq(y0,x0) | eq(x0,x1))".into(),
        ],
    };
    src.extend(extra);
    src.iter().map(|s| th.parse(s).expect("corpus parses")).collect()
}

fn skolem_and_universality() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let seq = canonical(id);
        let model = Model::new(id);
        let corpus = skolem_corpus(seq.theory());
        let mut valid = 0;
        for phi in &corpus {
            if skolem_map(&seq, phi)?.sentence_valid {
                valid += 1;
            }
        }
        let mut ok = valid == corpus.len() && corpus.len() == 10;
        let mut uni = Vec::new();
        for k in 1..=2 {
            let rep = universality_check(&seq, &model, k, 2, 8)?;
            ok &= rep.all_pass() && rep.successes == 8;
            uni.push(format!("k{k}:{}/8", rep.successes));
        }
        pass &= ok;
        parts.push(format!("{}:skolem {valid}/{} {}", id.name(), corpus.len(), uni.join(",")));
    }
    Ok(Outcome { pass, detail: format!("skolem map and universality {}", parts.join(" ")) })
}

fn composition_relation(t: &LevelTable) -> BTreeSet<(usize, usize, usize)> {
    t.triples().into_iter().collect()
}

/// Searches for a point bijection carrying one composition relation onto the
/// other.
fn isomorphic(a: &LevelTable, b: &LevelTable) -> bool {
    let n = a.points().len();
    if n != b.points().len() {
        return false;
    }
    let ra = composition_relation(a);
    let rb = composition_relation(b);
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        if ra.iter().map(|&(p, q, r)| (perm[p], perm[q], perm[r])).collect::<BTreeSet<_>>() == rb {
            return true;
        }
        // Next permutation in lexicographic order.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return false;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).expect("exists");
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

fn bijection() -> Result<Outcome> {
    let th = Theory::new(TheoryId::PureSet);
    let a = RichSequence::canonical(&th);
    let prefix = ["true", "!eq(x0,y0)", "(!eq(x0,y0) & !eq(x1,y0))"];
    let b = RichSequence::with_prefix(&th, "prefixed", prefix.iter().map(|s| th.parse(s).unwrap()).collect())?;
    let mut stage = BijectionStage::initial();
    let mut stage_ok = Vec::new();
    for _ in 0..3 {
        stage = bijection_stage(&a, &b, &stage)?;
        let (forth, back) = approximate_bijection(&a, &b, &stage.formula)?;
        stage_ok.push(forth && back);
    }
    let ta = build_level_table(&a, 2, 1)?;
    let tb = build_level_table(&b, 2, 1)?;
    let iso = isomorphic(&ta, &tb);
    let pass = stage_ok.iter().all(|&x| x) && iso;
    Ok(Outcome {
        pass,
        detail: format!(
            "bijection stages {stage_ok:?} g={:?} level-1 points {}/{} isomorphic={iso}",
            stage.g.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            ta.points().len(),
            tb.points().len()
        ),
    })
}

fn cantor() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut pass = true;
    for id in TheoryId::ALL {
        let seq = canonical(id);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for n in 0..=2 {
            let pts = cantor_check(&seq, n, 2)?;
            pass &= pts.iter().all(|p| p.split_level.is_some() && p.extensions >= 2);
            counts.insert(n, pts.len());
        }
        parts.push(format!("{}:{counts:?}", id.name()));
    }
    Ok(Outcome { pass, detail: format!("base points split within 2 levels {}", parts.join(" ")) })
}

#[test]
fn acceptance() {
    let secs = Duration::from_secs;
    let results = [
        run("C1", secs(5), type_counts),
        run("C2", secs(30), groupoid_axioms),
        run("C3", secs(60), composition),
        run("C4", secs(60), round_trip),
        run("C5", secs(30), equivalences),
        run("C6", secs(120), reconstruction),
        run("C7", secs(120), sections),
        run("C8", secs(120), skolem_and_universality),
        run("C9", secs(60), bijection),
        run("C10", secs(30), cantor),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    line(&format!("acceptance: {passed}/{} criteria pass", results.len()));
    assert_eq!(passed, results.len());
}
