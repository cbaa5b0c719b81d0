//! Small named families used throughout the tests and documentation.

use crate::error::Result;
use crate::family::ContextualFamily;
use crate::monoid::{MonoidKind, MonoidValue};
use crate::relation::{Assignment, KRelation, VarSet};

fn relation(vars: [&str; 2], rows: &[[&str; 2]]) -> KRelation {
    let rows = rows
        .iter()
        .map(|r| Assignment::from_pairs([(vars[0], r[0]), (vars[1], r[1])]));
    KRelation::from_support(VarSet::of(vars), rows).expect("well-formed sample rows")
}

fn uniform(kind: MonoidKind, w: u64) -> MonoidValue {
    match kind {
        MonoidKind::B => MonoidValue::one(MonoidKind::B),
        MonoidKind::N => MonoidValue::nat(w),
        MonoidKind::Q => MonoidValue::ratio(w, 1),
    }
}

fn teaching_relations(extended: bool) -> Vec<KRelation> {
    let mut cs = vec![["Math", "Alice"], ["CS", "Alice"], ["CS", "Bob"]];
    if extended {
        cs.push(["Math", "Bob"]);
    }
    vec![
        relation(["Student", "Teacher"], &[["Alice", "Charlie"], ["Bob", "David"]]),
        relation(["Teacher", "Course"], &[["Charlie", "Math"], ["David", "CS"]]),
        relation(["Course", "Student"], &cs),
    ]
}

/// Students, teachers and courses: locally but not globally consistent.
/// Every row is annotated with 1 of `kind`, which is only locally
/// consistent over the Booleans.
pub fn teaching(kind: MonoidKind) -> Result<ContextualFamily> {
    ContextualFamily::check_local_consistency(MonoidKind::B, teaching_relations(false))?
        .scaled(&MonoidValue::one(kind))
}

/// [`teaching`] with the extra row `(Course, Student) = (Math, Bob)`.
pub fn teaching_extended(kind: MonoidKind) -> Result<ContextualFamily> {
    ContextualFamily::check_local_consistency(MonoidKind::B, teaching_relations(true))?
        .scaled(&MonoidValue::one(kind))
}

/// One row `(0,0)` in each of `xy`, `yz`, `zx`, annotated `w`.
pub fn triangle(kind: MonoidKind, w: u64) -> Result<ContextualFamily> {
    let rels = [["x", "y"], ["y", "z"], ["z", "x"]]
        .map(|c| relation(c, &[["0", "0"]]))
        .to_vec();
    ContextualFamily::check_local_consistency(MonoidKind::B, rels)?.scaled(&uniform(kind, w))
}

/// Rows `(0,0)` and `(1,1)` in each of `xy`, `yz`, `zx`, annotated `w`.
pub fn two_triangles(kind: MonoidKind, w: u64) -> Result<ContextualFamily> {
    let rels = [["x", "y"], ["y", "z"], ["z", "x"]]
        .map(|c| relation(c, &[["0", "0"], ["1", "1"]]))
        .to_vec();
    ContextualFamily::check_local_consistency(MonoidKind::B, rels)?.scaled(&uniform(kind, w))
}

/// Five binary contexts `ab, bc, ca, ab', b'c`. Both triangles
/// `{ab, bc, ca}` and `{ab', b'c, ca}` are realisable on their own, the
/// whole family is not.
pub fn five_contexts() -> ContextualFamily {
    let rels = vec![
        relation(["a", "b"], &[["0", "0"], ["1", "1"]]),
        relation(["b", "c"], &[["0", "0"], ["0", "1"], ["1", "1"]]),
        relation(["c", "a"], &[["0", "1"], ["1", "0"]]),
        relation(["a", "b'"], &[["0", "0"], ["1", "1"]]),
        relation(["b'", "c"], &[["0", "0"], ["1", "1"]]),
    ];
    ContextualFamily::check_local_consistency(MonoidKind::B, rels).expect("locally consistent")
}
