use std::collections::BTreeMap;

use super::{Formula, VarRef, SCRATCH_TAPE};
use crate::pos::Pos;

/// Variable renaming. Variables not in the map are left alone.
pub type VarMap = BTreeMap<VarRef, VarRef>;

pub(super) fn substitute(f: &Formula, map: &VarMap) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    let mut next_scratch = next_scratch_pos(f, map);
    go(f, map, &mut next_scratch)
}

fn next_scratch_pos(f: &Formula, map: &VarMap) -> Pos {
    f.all_vars()
        .iter()
        .chain(map.keys())
        .chain(map.values())
        .filter(|v| v.tape == SCRATCH_TAPE)
        .map(|v| v.pos.succ())
        .max()
        .unwrap_or(Pos::ZERO)
}

fn map_var(v: &VarRef, map: &VarMap) -> VarRef {
    map.get(v).cloned().unwrap_or_else(|| v.clone())
}

fn go(f: &Formula, map: &VarMap, scratch: &mut Pos) -> Formula {
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Atom(sym, args) => {
            Formula::Atom(sym.clone(), args.iter().map(|v| map_var(v, map)).collect())
        }
        Formula::Eq(a, b) => Formula::Eq(map_var(a, map), map_var(b, map)),
        Formula::Not(g) => Formula::not(go(g, map, scratch)),
        Formula::And(gs) => Formula::and(gs.iter().map(|g| go(g, map, scratch))),
        Formula::Or(gs) => Formula::or(gs.iter().map(|g| go(g, map, scratch))),
        Formula::Implies(a, b) => Formula::implies(go(a, map, scratch), go(b, map, scratch)),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let mut inner = map.clone();
            inner.remove(v);
            let free = body.free_vars();
            let captures = free
                .iter()
                .filter(|w| *w != v)
                .any(|w| inner.get(w) == Some(v));
            let binder = if captures {
                let fresh = VarRef { tape: SCRATCH_TAPE, pos: scratch.clone() };
                *scratch = scratch.succ();
                inner.insert(v.clone(), fresh.clone());
                fresh
            } else {
                v.clone()
            };
            let body = go(body, &inner, scratch);
            if matches!(f, Formula::Exists(..)) {
                Formula::exists(binder, body)
            } else {
                Formula::forall(binder, body)
            }
        }
    }
}

impl Formula {
    /// Renames tapes: every variable on tape `t` moves to `f(t)`.
    pub fn map_tapes(&self, f: impl Fn(u32) -> u32) -> Formula {
        let map: VarMap = self
            .all_vars()
            .into_iter()
            .filter(|v| f(v.tape) != v.tape)
            .map(|v| {
                let w = v.with_tape(f(v.tape));
                (v, w)
            })
            .collect();
        substitute(self, &map)
    }

    /// Exchanges tapes `a` and `b`.
    pub fn swap_tapes(&self, a: u32, b: u32) -> Formula {
        self.map_tapes(|t| {
            if t == a {
                b
            } else if t == b {
                a
            } else {
                t
            }
        })
    }

    /// Shifts every free position on `tape` up by `delta`.
    pub fn shift_positions(&self, tape: u32, delta: &Pos) -> Formula {
        let map: VarMap = self
            .free_vars()
            .into_iter()
            .filter(|v| v.tape == tape)
            .map(|v| {
                let w = VarRef { tape, pos: v.pos.add(delta) };
                (v, w)
            })
            .collect();
        substitute(self, &map)
    }
}
