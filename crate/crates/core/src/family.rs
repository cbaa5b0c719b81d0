//! Context sets and contextual K-families.
//!
//! A family holds one K-relation per maximal context. Relations of lower
//! contexts are obtained by marginalisation; pairwise consistency of the
//! maximal relations makes the choice of covering context irrelevant.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::fdlogic::Fd;
use crate::lp::{Cmp, LinearSystem};
use crate::monoid::{MonoidKind, MonoidValue};
use crate::relation::{scalar_fill, Assignment, KRelation, VarSet};

/// A downward-closed set of contexts, represented by its maximal elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextSet {
    maximal: Vec<VarSet>,
}

impl ContextSet {
    /// Keeps the maximal contexts among `contexts`, in order of first
    /// occurrence.
    pub fn new<I: IntoIterator<Item = VarSet>>(contexts: I) -> Self {
        let all: Vec<VarSet> = contexts.into_iter().collect();
        let mut maximal: Vec<VarSet> = Vec::new();
        for (i, c) in all.iter().enumerate() {
            let dominated = all.iter().enumerate().any(|(j, d)| {
                (c != d && c.is_subset(d)) || (c == d && j < i)
            });
            if !dominated {
                maximal.push(c.clone());
            }
        }
        ContextSet { maximal }
    }

    pub fn maximal(&self) -> &[VarSet] {
        &self.maximal
    }

    pub fn len(&self) -> usize {
        self.maximal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maximal.is_empty()
    }

    /// Membership in the downward closure.
    pub fn contains(&self, c: &VarSet) -> bool {
        self.covering(c).is_some()
    }

    /// Index of the first maximal context containing `c`.
    pub fn covering(&self, c: &VarSet) -> Option<usize> {
        self.maximal.iter().position(|m| c.is_subset(m))
    }

    pub fn position(&self, c: &VarSet) -> Option<usize> {
        self.maximal.iter().position(|m| m == c)
    }

    pub fn vars(&self) -> VarSet {
        self.maximal
            .iter()
            .fold(VarSet::new(), |acc, c| acc.union(c))
    }
}

/// The first pair of maximal-context relations found to disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub left: VarSet,
    pub right: VarSet,
    /// Row of the marginal on `left ∩ right` where the two sides differ.
    pub row: Assignment,
    pub left_value: MonoidValue,
    pub right_value: MonoidValue,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "contexts {} and {} disagree at {}: {} vs {}",
            self.left, self.right, self.row, self.left_value, self.right_value
        )
    }
}

/// Every disagreement between two of `relations` on their shared
/// variables, by pair and then by row.
pub fn violations(relations: &[KRelation]) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for (i, a) in relations.iter().enumerate() {
        for b in &relations[i + 1..] {
            if a.kind() != b.kind() {
                return Err(Error::KindMismatch(a.kind(), b.kind()));
            }
            let shared = a.vars().intersection(b.vars());
            let (l, r) = (a.marginalise(&shared)?, b.marginalise(&shared)?);
            let rows: std::collections::BTreeSet<&Assignment> =
                l.rows().chain(r.rows()).map(|(s, _)| s).collect();
            for row in rows {
                let (lv, rv) = (l.get(row), r.get(row));
                if lv != rv {
                    out.push(Violation {
                        left: a.vars().clone(),
                        right: b.vars().clone(),
                        row: row.clone(),
                        left_value: lv,
                        right_value: rv,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// A locally consistent family with exactly one relation per maximal context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextualFamily {
    contexts: ContextSet,
    kind: MonoidKind,
    relations: Vec<KRelation>,
}

/// Outcome of [`ContextualFamily::check_global_consistency`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalVerdict {
    Consistent(KRelation),
    Inconsistent,
}

impl ContextualFamily {
    /// Validates `relations` as a family whose context set is given by the
    /// relations' own domains.
    pub fn check_local_consistency(kind: MonoidKind, relations: Vec<KRelation>) -> Result<Self> {
        for (i, r) in relations.iter().enumerate() {
            for (j, other) in relations.iter().enumerate() {
                if i == j {
                    continue;
                }
                if r.vars() == other.vars() {
                    return Err(Error::DuplicateContext(r.vars().clone()));
                }
                if r.vars().is_subset(other.vars()) {
                    return Err(Error::NonMaximalContext(r.vars().clone()));
                }
            }
        }
        let contexts = ContextSet::new(relations.iter().map(|r| r.vars().clone()));
        Self::over(&contexts, kind, relations)
    }

    /// Validates `relations` against a given context set; relations may
    /// come in any order.
    pub fn over(contexts: &ContextSet, kind: MonoidKind, relations: Vec<KRelation>) -> Result<Self> {
        let mut slots: Vec<Option<KRelation>> = vec![None; contexts.len()];
        for r in relations {
            if r.kind() != kind {
                return Err(Error::KindMismatch(kind, r.kind()));
            }
            let Some(i) = contexts.position(r.vars()) else {
                return Err(if contexts.contains(r.vars()) {
                    Error::NonMaximalContext(r.vars().clone())
                } else {
                    Error::NotAContext(r.vars().clone())
                });
            };
            if slots[i].is_some() {
                return Err(Error::DuplicateContext(r.vars().clone()));
            }
            slots[i] = Some(r);
        }
        let relations = slots
            .into_iter()
            .zip(contexts.maximal())
            .map(|(r, c)| r.ok_or_else(|| Error::MissingContext(c.clone())))
            .collect::<Result<Vec<_>>>()?;
        let family = ContextualFamily {
            contexts: contexts.clone(),
            kind,
            relations,
        };
        if let Some(v) = family.first_violation()? {
            return Err(Error::Inconsistent(Box::new(v)));
        }
        Ok(family)
    }

    /// The family of empty relations, the identity for [`add`](Self::add).
    pub fn zero(contexts: &ContextSet, kind: MonoidKind) -> Self {
        ContextualFamily {
            contexts: contexts.clone(),
            kind,
            relations: contexts
                .maximal()
                .iter()
                .map(|c| KRelation::empty(c.clone(), kind))
                .collect(),
        }
    }

    fn first_violation(&self) -> Result<Option<Violation>> {
        for i in 0..self.relations.len() {
            for j in i + 1..self.relations.len() {
                let (a, b) = (&self.relations[i], &self.relations[j]);
                if let Some((row, lv, rv)) = a.first_disagreement(b)? {
                    return Ok(Some(Violation {
                        left: a.vars().clone(),
                        right: b.vars().clone(),
                        row,
                        left_value: lv,
                        right_value: rv,
                    }));
                }
            }
        }
        Ok(None)
    }

    pub fn contexts(&self) -> &ContextSet {
        &self.contexts
    }

    pub fn kind(&self) -> MonoidKind {
        self.kind
    }

    pub fn relations(&self) -> &[KRelation] {
        &self.relations
    }

    /// The relation of the `i`-th maximal context.
    pub fn relation(&self, i: usize) -> &KRelation {
        &self.relations[i]
    }

    /// The relation at any member of the context set, derived from the
    /// first covering maximal context.
    pub fn relation_at(&self, c: &VarSet) -> Result<KRelation> {
        let i = self
            .contexts
            .covering(c)
            .ok_or_else(|| Error::NotAContext(c.clone()))?;
        self.relations[i].marginalise(c)
    }

    /// The subfamily on the listed maximal contexts.
    pub fn restrict_contexts(&self, keep: &[VarSet]) -> Result<ContextualFamily> {
        let relations = keep
            .iter()
            .map(|c| {
                self.contexts
                    .position(c)
                    .map(|i| self.relations[i].clone())
                    .ok_or_else(|| Error::NotAContext(c.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        ContextualFamily::over(&ContextSet::new(keep.iter().cloned()), self.kind, relations)
    }

    /// Number of assignments over all maximal contexts.
    pub fn assignment_count(&self) -> usize {
        self.relations.iter().map(KRelation::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.iter().all(KRelation::is_empty)
    }

    /// The supports, as a Boolean family.
    pub fn support(&self) -> ContextualFamily {
        let support = ContextualFamily {
            contexts: self.contexts.clone(),
            kind: MonoidKind::B,
            relations: self.relations.iter().map(KRelation::support_relation).collect(),
        };
        debug_assert!(support.first_violation().unwrap().is_none());
        support
    }

    /// Contextwise sum of two families over the same context set.
    pub fn add(&self, other: &ContextualFamily) -> Result<ContextualFamily> {
        if self.contexts != other.contexts {
            return Err(Error::ContextSetMismatch);
        }
        if self.kind != other.kind {
            return Err(Error::KindMismatch(self.kind, other.kind));
        }
        let relations = self
            .relations
            .iter()
            .zip(&other.relations)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        let sum = ContextualFamily {
            contexts: self.contexts.clone(),
            kind: self.kind,
            relations,
        };
        debug_assert!(sum.first_violation().unwrap().is_none());
        Ok(sum)
    }

    /// Annotates every assignment of this Boolean family with `c` and
    /// re-validates. The result may legitimately violate local consistency.
    pub fn scaled(&self, c: &MonoidValue) -> Result<ContextualFamily> {
        if self.kind != MonoidKind::B {
            return Err(Error::KindMismatch(MonoidKind::B, self.kind));
        }
        let relations = self
            .relations
            .iter()
            .map(|r| scalar_fill(c, r.vars().clone(), r.support()))
            .collect::<Result<Vec<_>>>()?;
        ContextualFamily::over(&self.contexts, c.kind(), relations)
    }

    /// Satisfaction of `fd`; defined only when `Vars(fd)` is in the context set.
    pub fn satisfies(&self, fd: &Fd) -> Result<bool> {
        self.relation_at(&fd.vars())?.satisfies_fd(fd)
    }

    pub fn satisfies_all<'a, I: IntoIterator<Item = &'a Fd>>(&self, fds: I) -> Result<bool> {
        for fd in fds {
            if !self.satisfies(fd)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Decides whether a single relation over all variables has every
    /// member of the family as its marginal, and returns one if so.
    pub fn check_global_consistency(&self) -> GlobalVerdict {
        let all_vars = self.contexts.vars();
        let join = natural_join(self.relations.iter().map(|r| r.support()));

        // positivity confines any witness to the join of the supports
        for r in &self.relations {
            let covered = join
                .iter()
                .map(|t| t.restrict(r.vars()))
                .collect::<std::collections::BTreeSet<_>>();
            if covered != r.support() {
                return GlobalVerdict::Inconsistent;
            }
        }

        let witness = match self.kind {
            MonoidKind::B => KRelation::from_support(all_vars, join.iter().cloned())
                .expect("join rows range over all variables"),
            MonoidKind::N | MonoidKind::Q => {
                let mut system = LinearSystem::new(join.len());
                for r in &self.relations {
                    let mut groups: BTreeMap<Assignment, Vec<usize>> = BTreeMap::new();
                    for (k, t) in join.iter().enumerate() {
                        groups.entry(t.restrict(r.vars())).or_default().push(k);
                    }
                    for (s, w) in r.rows() {
                        let coeffs = groups[s]
                            .iter()
                            .map(|&k| (k, BigRational::one()))
                            .collect();
                        system.add(coeffs, Cmp::Eq, w.to_rational().expect("numeric kind"));
                    }
                }
                let point = if self.kind == MonoidKind::N {
                    system.integer_point()
                } else {
                    system.feasible_point()
                };
                let Some(point) = point else {
                    return GlobalVerdict::Inconsistent;
                };
                let rows = join.iter().cloned().zip(
                    point
                        .iter()
                        .map(|v| MonoidValue::from_rational(self.kind, v).expect("exact witness")),
                );
                KRelation::from_rows(all_vars, self.kind, rows).expect("witness rows are well formed")
            }
        };
        debug_assert!(self
            .relations
            .iter()
            .all(|r| witness.marginalise(r.vars()).as_ref() == Ok(r)));
        GlobalVerdict::Consistent(witness)
    }
}

/// Natural join of sets of assignments.
pub(crate) fn natural_join<I>(relations: I) -> Vec<Assignment>
where
    I: IntoIterator<Item = std::collections::BTreeSet<Assignment>>,
{
    let mut acc = vec![Assignment::new()];
    for rel in relations {
        let mut next = Vec::new();
        for t in &acc {
            for s in &rel {
                if s.iter().all(|(x, v)| t.get(x).map_or(true, |w| w == v)) {
                    let mut merged = t.clone();
                    for (x, v) in s.iter() {
                        merged.bind(x.clone(), v.clone());
                    }
                    next.push(merged);
                }
            }
        }
        next.sort();
        next.dedup();
        acc = next;
    }
    acc
}

impl fmt::Display for ContextualFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}-family over {} contexts", self.kind, self.contexts.len())?;
        for r in &self.relations {
            writeln!(f, "  {r}")?;
        }
        Ok(())
    }
}
