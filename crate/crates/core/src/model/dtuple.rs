//! Tuples of a model satisfying the constraints of a rich sequence.
//!
//! Position `p` is filled greedily: with the cover element when the
//! constraint at `p` is trivial or `φ_p` holds of everything, otherwise with
//! the least witness of `φ_p` (the cover element again if there is none).
//! Only positions in a mention-closed set are ever filled, so huge indices
//! cost nothing beyond their closure.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Element, Model};
use crate::error::{Result, TgwError};
use crate::formula::{Formula, VarRef};
use crate::pos::Pos;
use crate::skolem::{y0, RichSequence};

/// Positions past this are folded back modulo [`FOLD`] by the identity cover.
const IDENTITY_LIMIT: u64 = 1 << 16;
const FOLD: u64 = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CoverBase {
    /// `p ↦ p + offset`.
    Identity { offset: u64 },
    /// Listed values, identity past the end.
    List(Vec<Element>),
}

/// The element proposed at each position when the constraint leaves a free
/// choice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cover {
    pub base: CoverBase,
    pub overrides: BTreeMap<Pos, Element>,
}

impl Default for Cover {
    fn default() -> Self {
        Cover::identity()
    }
}

impl Cover {
    pub fn identity() -> Self {
        Cover { base: CoverBase::Identity { offset: 0 }, overrides: BTreeMap::new() }
    }

    pub fn offset(offset: u64) -> Self {
        Cover { base: CoverBase::Identity { offset }, overrides: BTreeMap::new() }
    }

    pub fn list(values: Vec<Element>) -> Self {
        Cover { base: CoverBase::List(values), overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, p: Pos, e: Element) -> Self {
        self.overrides.insert(p, e);
        self
    }

    fn fold(p: &Pos) -> u64 {
        match p.as_u64() {
            Some(v) if v < IDENTITY_LIMIT => v,
            Some(v) => v % FOLD,
            None => (p.to_biguint() % FOLD).try_into().expect("below FOLD"),
        }
    }

    pub fn at(&self, p: &Pos) -> Element {
        if let Some(&e) = self.overrides.get(p) {
            return e;
        }
        match &self.base {
            CoverBase::Identity { offset } => Self::fold(p) + offset,
            CoverBase::List(vs) => match p.as_usize() {
                Some(i) if i < vs.len() => vs[i],
                _ => Self::fold(p),
            },
        }
    }
}

/// A partial tuple indexed by positions, always mention-closed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DTuple {
    values: BTreeMap<Pos, Element>,
}

/// The greedy tuple on positions `0..n`.
pub fn build_dtuple(model: &Model, seq: &RichSequence, n: usize, cover: &Cover) -> Result<DTuple> {
    let mut t = DTuple::default();
    t.extend(model, seq, (0..n).map(Pos::from), cover)?;
    Ok(t)
}

fn x(p: &Pos) -> VarRef {
    VarRef { tape: 0, pos: p.clone() }
}

impl DTuple {
    pub fn get(&self, p: &Pos) -> Option<Element> {
        self.values.get(p).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &BTreeMap<Pos, Element> {
        &self.values
    }

    /// Values at `0..n`, which must all be filled.
    pub fn prefix(&self, n: usize) -> Result<Vec<Element>> {
        (0..n)
            .map(|i| {
                self.get(&Pos::from(i)).ok_or_else(|| TgwError::precondition(format!("position {i} is not filled")))
            })
            .collect()
    }

    /// The filled positions as `x`-variables moved to `tape`.
    pub fn assignment(&self, tape: u32) -> BTreeMap<VarRef, Element> {
        self.values.iter().map(|(p, &e)| (VarRef { tape, pos: p.clone() }, e)).collect()
    }

    /// Fill the mention-closure of `positions`, keeping what is already set.
    pub fn extend(
        &mut self,
        model: &Model,
        seq: &RichSequence,
        positions: impl IntoIterator<Item = Pos>,
        cover: &Cover,
    ) -> Result<()> {
        let closure = seq.closure(positions)?;
        for p in closure {
            if self.values.contains_key(&p) {
                continue;
            }
            let e = self.choose(model, seq, &p, cover)?;
            self.values.insert(p, e);
        }
        Ok(())
    }

    fn choose(&self, model: &Model, seq: &RichSequence, p: &Pos, cover: &Cover) -> Result<Element> {
        let entry = seq.entry(p)?;
        if entry.constraint == Formula::True {
            return Ok(cover.at(p));
        }
        let env = self.assignment(0);
        if model.evaluate(&Formula::forall(y0(), entry.formula.clone()), &env)? {
            return Ok(cover.at(p));
        }
        Ok(model.least_witness(&entry.formula, &y0(), &env)?.unwrap_or_else(|| cover.at(p)))
    }

    /// Positions whose constraint fails, in increasing order.
    pub fn violations(&self, model: &Model, seq: &RichSequence) -> Result<Vec<Pos>> {
        let env = self.assignment(0);
        let mut bad = Vec::new();
        for p in self.values.keys() {
            let c = &seq.entry(p)?.constraint;
            if c.free_vars().iter().any(|v| !env.contains_key(v)) {
                return Err(TgwError::certificate(format!("constraint at {p} reads an unfilled position")));
            }
            if !model.evaluate(c, &env)? {
                bad.push(p.clone());
            }
        }
        Ok(bad)
    }

    /// Whether every filled position satisfies its constraint.
    pub fn check(&self, model: &Model, seq: &RichSequence) -> Result<bool> {
        Ok(self.violations(model, seq)?.is_empty())
    }

    /// Types of the filled positions listed, as `x`-variables.
    pub fn type_at(&self, model: &Model, positions: &[Pos]) -> Result<crate::theory::CompleteType> {
        let vals = positions
            .iter()
            .map(|p| self.get(p).ok_or_else(|| TgwError::precondition(format!("position {p} is not filled"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(model.type_of(positions.iter().map(x).collect(), &vals))
    }
}
