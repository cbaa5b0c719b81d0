//! Assignments and support-sparse K-relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fdlogic::Fd;
use crate::monoid::{MonoidKind, MonoidValue};

/// A variable (attribute) name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    /// Panics if `name` is empty.
    pub fn new(name: &str) -> Self {
        assert!(!name.is_empty(), "variable names must be nonempty");
        Variable(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Variable {
    fn from(name: &str) -> Self {
        Variable::new(name)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A domain element. Equality is literal equality of the token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(Arc<str>);

impl Value {
    pub fn new(token: &str) -> Self {
        Value(Arc::from(token))
    }

    pub fn token(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Value {
    fn from(token: &str) -> Self {
        Value::new(token)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite set of variables, kept sorted by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarSet(BTreeSet<Variable>);

impl VarSet {
    pub fn new() -> Self {
        VarSet(BTreeSet::new())
    }

    pub fn of<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Self {
        names.into_iter().map(Variable::new).collect()
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        self.0.intersection(&other.0).cloned().collect()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        self.0.union(&other.0).cloned().collect()
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        self.0.difference(&other.0).cloned().collect()
    }

    pub fn insert(&mut self, v: Variable) -> bool {
        self.0.insert(v)
    }
}

impl Deref for VarSet {
    type Target = BTreeSet<Variable>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl FromIterator<Variable> for VarSet {
    fn from_iter<I: IntoIterator<Item = Variable>>(iter: I) -> Self {
        VarSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a VarSet {
    type Item = &'a Variable;
    type IntoIter = std::collections::btree_set::Iter<'a, Variable>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// A finite map from variables to values.
///
/// The derived ordering compares bindings in variable-name order, then by
/// value token, which gives the canonical row order used in all output.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(BTreeMap<Variable, Value>);

impl Assignment {
    pub fn new() -> Self {
        Assignment(BTreeMap::new())
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, &'a str)>>(pairs: I) -> Self {
        Assignment(
            pairs
                .into_iter()
                .map(|(x, a)| (Variable::new(x), Value::new(a)))
                .collect(),
        )
    }

    pub fn bind(&mut self, var: Variable, value: Value) {
        self.0.insert(var, value);
    }

    pub fn domain(&self) -> VarSet {
        self.0.keys().cloned().collect()
    }

    pub fn get(&self, var: &Variable) -> Option<&Value> {
        self.0.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction to `vars ∩ Dom(self)`.
    pub fn restrict(&self, vars: &VarSet) -> Assignment {
        Assignment(
            self.0
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// Values in variable-name order.
    pub fn values(&self) -> impl Iterator<Item = &Value> {
        self.0.values()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("()");
        }
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// A K-relation over a finite variable set, stored sparsely: only rows with
/// a nonzero annotation are kept, so the key set is exactly the support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KRelation {
    vars: VarSet,
    kind: MonoidKind,
    rows: BTreeMap<Assignment, MonoidValue>,
}

impl KRelation {
    pub fn empty(vars: VarSet, kind: MonoidKind) -> Self {
        KRelation {
            vars,
            kind,
            rows: BTreeMap::new(),
        }
    }

    /// Builds a relation from annotated rows. Zero annotations are dropped
    /// and repeated rows are summed.
    pub fn from_rows<I>(vars: VarSet, kind: MonoidKind, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Assignment, MonoidValue)>,
    {
        let mut rel = KRelation::empty(vars, kind);
        for (s, w) in rows {
            rel.accumulate(s, w)?;
        }
        Ok(rel)
    }

    /// The Boolean relation whose support is `rows`.
    pub fn from_support<I>(vars: VarSet, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = Assignment>,
    {
        scalar_fill(&MonoidValue::one(MonoidKind::B), vars, rows)
    }

    pub(crate) fn accumulate(&mut self, s: Assignment, w: MonoidValue) -> Result<()> {
        if w.kind() != self.kind {
            return Err(Error::KindMismatch(self.kind, w.kind()));
        }
        let dom = s.domain();
        if dom != self.vars {
            return Err(Error::AssignmentDomain {
                expected: self.vars.clone(),
                found: dom,
            });
        }
        if w.is_zero() {
            return Ok(());
        }
        match self.rows.get_mut(&s) {
            Some(old) => *old = old.add(&w)?,
            None => {
                self.rows.insert(s, w);
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn kind(&self) -> MonoidKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Assignment, &MonoidValue)> {
        self.rows.iter()
    }

    /// The annotation of `s`; zero when `s` is outside the support.
    pub fn get(&self, s: &Assignment) -> MonoidValue {
        self.rows
            .get(s)
            .cloned()
            .unwrap_or_else(|| MonoidValue::zero(self.kind))
    }

    pub fn support(&self) -> BTreeSet<Assignment> {
        self.rows.keys().cloned().collect()
    }

    /// The support as a Boolean relation.
    pub fn support_relation(&self) -> KRelation {
        KRelation {
            vars: self.vars.clone(),
            kind: MonoidKind::B,
            rows: self
                .rows
                .keys()
                .map(|s| (s.clone(), MonoidValue::one(MonoidKind::B)))
                .collect(),
        }
    }

    pub fn total_mass(&self) -> MonoidValue {
        crate::monoid::sum(self.kind, self.rows.values()).expect("rows share the relation kind")
    }

    /// Sums annotations over all rows with the same restriction to `onto`.
    pub fn marginalise(&self, onto: &VarSet) -> Result<KRelation> {
        if !onto.is_subset(&self.vars) {
            return Err(Error::Domain {
                missing: onto.difference(&self.vars),
                domain: self.vars.clone(),
            });
        }
        let mut out = KRelation::empty(onto.clone(), self.kind);
        for (s, w) in &self.rows {
            // positivity: sums of nonzero values stay nonzero
            out.accumulate(s.restrict(onto), w.clone())?;
        }
        Ok(out)
    }

    /// Pointwise sum; rows missing on one side count as zero.
    pub fn add(&self, other: &KRelation) -> Result<KRelation> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch(self.kind, other.kind));
        }
        if self.vars != other.vars {
            return Err(Error::AssignmentDomain {
                expected: self.vars.clone(),
                found: other.vars.clone(),
            });
        }
        let mut out = self.clone();
        for (s, w) in &other.rows {
            out.accumulate(s.clone(), w.clone())?;
        }
        Ok(out)
    }

    /// Whether both relations have the same marginal on their shared variables.
    pub fn consistent(&self, other: &KRelation) -> Result<bool> {
        Ok(self.first_disagreement(other)?.is_none())
    }

    /// The least row of the shared marginal on which the two relations
    /// disagree, with the annotation on each side.
    pub fn first_disagreement(
        &self,
        other: &KRelation,
    ) -> Result<Option<(Assignment, MonoidValue, MonoidValue)>> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch(self.kind, other.kind));
        }
        let shared = self.vars.intersection(&other.vars);
        let left = self.marginalise(&shared)?;
        let right = other.marginalise(&shared)?;
        let keys: BTreeSet<&Assignment> = left.rows.keys().chain(right.rows.keys()).collect();
        for t in keys {
            let (a, b) = (left.get(t), right.get(t));
            if a != b {
                return Ok(Some((t.clone(), a, b)));
            }
        }
        Ok(None)
    }

    /// Evaluates `fd` on the support.
    pub fn satisfies_fd(&self, fd: &Fd) -> Result<bool> {
        let vars = fd.vars();
        if !vars.is_subset(&self.vars) {
            return Err(Error::Domain {
                missing: vars.difference(&self.vars),
                domain: self.vars.clone(),
            });
        }
        let mut seen: BTreeMap<Assignment, Assignment> = BTreeMap::new();
        for s in self.rows.keys() {
            let key = s.restrict(fd.lhs());
            let image = s.restrict(fd.rhs());
            match seen.get(&key) {
                Some(prev) if *prev != image => return Ok(false),
                Some(_) => {}
                None => {
                    seen.insert(key, image);
                }
            }
        }
        Ok(true)
    }
}

/// The relation annotating every row of `rows` with `c`.
pub fn scalar_fill<I>(c: &MonoidValue, vars: VarSet, rows: I) -> Result<KRelation>
where
    I: IntoIterator<Item = Assignment>,
{
    if c.is_zero() {
        return Err(Error::ZeroAnnotation);
    }
    let mut rel = KRelation::empty(vars, c.kind());
    for s in rows {
        let dom = s.domain();
        if dom != rel.vars {
            return Err(Error::AssignmentDomain {
                expected: rel.vars.clone(),
                found: dom,
            });
        }
        rel.rows.insert(s, c.clone());
    }
    Ok(rel)
}

impl fmt::Display for KRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}:", self.kind, self.vars)?;
        for (s, w) in &self.rows {
            write!(f, " [{s} : {w}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(pairs: &[(&str, &str)]) -> Assignment {
        Assignment::from_pairs(pairs.iter().copied())
    }

    fn course_student(kind: MonoidKind) -> KRelation {
        let rows = [("Math", "Alice"), ("CS", "Alice"), ("CS", "Bob")]
            .into_iter()
            .map(|(c, s)| row(&[("Course", c), ("Student", s)]));
        scalar_fill(&MonoidValue::one(kind), VarSet::of(["Course", "Student"]), rows).unwrap()
    }

    #[test]
    fn marginalise_sums_extensions() {
        let r = course_student(MonoidKind::N);
        let m = r.marginalise(&VarSet::of(["Course"])).unwrap();
        assert_eq!(m.get(&row(&[("Course", "Math")])), MonoidValue::nat(1));
        assert_eq!(m.get(&row(&[("Course", "CS")])), MonoidValue::nat(2));
        assert_eq!(m.len(), 2);
        assert_eq!(r.marginalise(r.vars()).unwrap(), r);
    }

    #[test]
    fn marginalise_to_empty_gives_total_mass() {
        let vars = VarSet::of(["x"]);
        let r = KRelation::from_rows(
            vars,
            MonoidKind::N,
            [("0", 1), ("1", 2), ("2", 3)]
                .map(|(a, w)| (row(&[("x", a)]), MonoidValue::nat(w))),
        )
        .unwrap();
        let m = r.marginalise(&VarSet::new()).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(&Assignment::new()), MonoidValue::nat(6));
    }

    #[test]
    fn marginalise_outside_domain_is_an_error() {
        let r = course_student(MonoidKind::B);
        assert!(matches!(
            r.marginalise(&VarSet::of(["Teacher"])),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn support_examples() {
        let s = row(&[("x", "0")]);
        let t = row(&[("x", "1")]);
        let b = KRelation::from_support(VarSet::of(["x"]), [s.clone()]).unwrap();
        assert_eq!(b.support(), BTreeSet::from([s.clone()]));
        assert!(KRelation::empty(VarSet::of(["x"]), MonoidKind::N).support().is_empty());
        let n = KRelation::from_rows(
            VarSet::of(["x"]),
            MonoidKind::N,
            [(s.clone(), MonoidValue::nat(2)), (t.clone(), MonoidValue::nat(1))],
        )
        .unwrap();
        assert_eq!(n.support(), BTreeSet::from([s, t]));
    }

    #[test]
    fn scalar_fill_examples() {
        let r = course_student(MonoidKind::Q);
        assert_eq!(r.total_mass(), MonoidValue::ratio(3, 1));
        let third = scalar_fill(
            &MonoidValue::ratio(1, 3),
            VarSet::of(["Course", "Student"]),
            r.support(),
        )
        .unwrap();
        assert!(third.rows().all(|(_, w)| *w == MonoidValue::ratio(1, 3)));
        assert_eq!(third.total_mass(), MonoidValue::ratio(1, 1));
        assert_eq!(
            scalar_fill(&MonoidValue::nat(0), VarSet::of(["x"]), []),
            Err(Error::ZeroAnnotation)
        );
    }

    #[test]
    fn add_relations_examples() {
        let vars = VarSet::of(["x"]);
        let s = row(&[("x", "s")]);
        let t = row(&[("x", "t")]);
        let one = |a: &Assignment, w| {
            KRelation::from_rows(vars.clone(), MonoidKind::N, [(a.clone(), MonoidValue::nat(w))])
                .unwrap()
        };
        assert_eq!(one(&s, 1).add(&one(&s, 2)).unwrap(), one(&s, 3));
        let sum = one(&s, 1).add(&one(&t, 1)).unwrap();
        assert_eq!(sum.len(), 2);
        let b = KRelation::from_support(vars.clone(), [s.clone()]).unwrap();
        assert_eq!(b.add(&b).unwrap(), b);
        assert!(b.add(&one(&s, 1)).is_err());
        let other = KRelation::from_support(VarSet::of(["y"]), []).unwrap();
        assert!(b.add(&other).is_err());
    }

    #[test]
    fn consistency_examples() {
        let st = KRelation::from_support(
            VarSet::of(["Student", "Teacher"]),
            [
                row(&[("Student", "Alice"), ("Teacher", "Charlie")]),
                row(&[("Student", "Bob"), ("Teacher", "David")]),
            ],
        )
        .unwrap();
        let tc = KRelation::from_support(
            VarSet::of(["Teacher", "Course"]),
            [
                row(&[("Teacher", "Charlie"), ("Course", "Math")]),
                row(&[("Teacher", "David"), ("Course", "CS")]),
            ],
        )
        .unwrap();
        assert!(st.consistent(&tc).unwrap());

        let n = |vars: &[&str], a: &[(&str, &str)], w| {
            KRelation::from_rows(
                VarSet::of(vars.iter().copied()),
                MonoidKind::N,
                [(row(a), MonoidValue::nat(w))],
            )
            .unwrap()
        };
        // disjoint domains compare total mass
        assert!(n(&["a"], &[("a", "0")], 2).consistent(&n(&["b"], &[("b", "5")], 2)).unwrap());
        assert!(!n(&["a"], &[("a", "0")], 2).consistent(&n(&["b"], &[("b", "5")], 3)).unwrap());

        let xy = n(&["x", "y"], &[("x", "0"), ("y", "0")], 1);
        let yz = n(&["y", "z"], &[("y", "1"), ("z", "1")], 1);
        assert!(!xy.consistent(&yz).unwrap());
        assert!(xy.consistent(&st.clone()).is_err());
    }

    #[test]
    fn fd_satisfaction_examples() {
        let st = KRelation::from_support(
            VarSet::of(["Student", "Teacher"]),
            [
                row(&[("Student", "Alice"), ("Teacher", "Charlie")]),
                row(&[("Student", "Bob"), ("Teacher", "David")]),
            ],
        )
        .unwrap();
        assert!(st.satisfies_fd(&Fd::unary("Student", "Teacher")).unwrap());
        let cs = course_student(MonoidKind::B);
        assert!(!cs.satisfies_fd(&Fd::unary("Course", "Student")).unwrap());
        assert!(cs.satisfies_fd(&Fd::unary("Course", "Course")).unwrap());
        assert!(cs.satisfies_fd(&Fd::unary("Course", "Teacher")).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const VARS: [&str; 3] = ["x", "y", "z"];

        fn weight(kind: MonoidKind) -> BoxedStrategy<MonoidValue> {
            match kind {
                MonoidKind::B => Just(MonoidValue::Bool(true)).boxed(),
                MonoidKind::N => (1u64..20).prop_map(MonoidValue::nat).boxed(),
                MonoidKind::Q => (1u64..20, 1u64..6).prop_map(|(p, q)| MonoidValue::ratio(p, q)).boxed(),
            }
        }

        fn relation(kind: MonoidKind) -> impl Strategy<Value = KRelation> {
            proptest::collection::vec(((0u8..2, 0u8..2, 0u8..2), weight(kind)), 0..8).prop_map(move |rows| {
                let mut r = KRelation::empty(VarSet::of(VARS), kind);
                for ((a, b, c), w) in rows {
                    let s = row(&[("x", &a.to_string()), ("y", &b.to_string()), ("z", &c.to_string())]);
                    let one = KRelation::from_rows(VarSet::of(VARS), kind, [(s, w)]).unwrap();
                    r = r.add(&one).unwrap();
                }
                r
            })
        }

        fn any_relation() -> impl Strategy<Value = KRelation> {
            prop_oneof![relation(MonoidKind::B), relation(MonoidKind::N), relation(MonoidKind::Q)]
        }

        fn subset() -> impl Strategy<Value = VarSet> {
            (0u8..8).prop_map(|m| VARS.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, v)| Variable::new(v)).collect())
        }

        proptest! {
            #[test]
            fn marginals_compose(r in any_relation(), a in subset(), b in subset()) {
                let outer = a.union(&b);
                let inner = a.clone();
                prop_assert_eq!(r.marginalise(&outer)?.marginalise(&inner)?, r.marginalise(&inner)?);
            }

            #[test]
            fn support_commutes_with_marginals(r in any_relation(), a in subset()) {
                prop_assert_eq!(r.marginalise(&a)?.support_relation(), r.support_relation().marginalise(&a)?);
            }

            #[test]
            fn marginals_preserve_mass(r in any_relation(), a in subset()) {
                prop_assert_eq!(r.marginalise(&a)?.total_mass(), r.total_mass());
            }

            #[test]
            fn marginals_are_additive(
                (r, t) in prop_oneof![Just(MonoidKind::N), Just(MonoidKind::Q)].prop_flat_map(|k| (relation(k), relation(k))),
                a in subset(),
            ) {
                let sum = r.add(&t)?.marginalise(&a)?;
                prop_assert_eq!(sum, r.marginalise(&a)?.add(&t.marginalise(&a)?)?);
            }
        }
    }
}
