//! Realisability over N or Q for arbitrary context sets, as exact linear
//! feasibility.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::family::ContextualFamily;
use crate::lp::{Cmp, LinearSystem};
use crate::monoid::{denominator_lcm, MonoidKind, MonoidValue};
use crate::relation::{Assignment, KRelation, VarSet};

/// A contextual `kind`-family whose support is `f`, or `None` if there is
/// none.
///
/// One unknown per assignment, each at least 1, with the marginals of every
/// two maximal contexts equated on their intersection. The system is
/// homogeneous, so `>= 1` loses nothing against `> 0`. Over N the rational
/// witness is multiplied by the least common multiple of its denominators.
pub fn realisable_lp(f: &ContextualFamily, kind: MonoidKind) -> Result<Option<ContextualFamily>> {
    realisable_lp_with_lower_bounds(f, kind, |_, _| BigRational::one())
}

/// [`realisable_lp`] with the lower bound of each assignment given by
/// `lower(context, assignment)`. Bounds must be positive.
pub fn realisable_lp_with_lower_bounds<L>(
    f: &ContextualFamily,
    kind: MonoidKind,
    lower: L,
) -> Result<Option<ContextualFamily>>
where
    L: Fn(&VarSet, &Assignment) -> BigRational,
{
    if !kind.cancellative() {
        return Err(Error::Unsupported(format!(
            "linear realisability is posed over N or Q, not {kind}"
        )));
    }
    let support = f.support();
    let rels = support.relations();
    let mut index: Vec<Vec<Assignment>> = Vec::with_capacity(rels.len());
    let mut offset = Vec::with_capacity(rels.len());
    let mut n = 0;
    for r in rels {
        offset.push(n);
        let rows: Vec<Assignment> = r.support().into_iter().collect();
        n += rows.len();
        index.push(rows);
    }

    let mut system = LinearSystem::new(n);
    for (i, rows) in index.iter().enumerate() {
        for (k, s) in rows.iter().enumerate() {
            let lo = lower(rels[i].vars(), s);
            if lo <= BigRational::from_integer(0.into()) {
                return Err(Error::Unsupported(format!("lower bound {lo} for {s} is not positive")));
            }
            system.set_lower(offset[i] + k, lo);
        }
    }
    for i in 0..rels.len() {
        for j in i + 1..rels.len() {
            let common = rels[i].vars().intersection(rels[j].vars());
            let mut groups: BTreeMap<Assignment, Vec<(usize, BigRational)>> = BTreeMap::new();
            for (side, sign) in [(i, BigRational::one()), (j, -BigRational::one())] {
                for (k, s) in index[side].iter().enumerate() {
                    groups
                        .entry(s.restrict(&common))
                        .or_default()
                        .push((offset[side] + k, sign.clone()));
                }
            }
            for coeffs in groups.into_values() {
                system.add(coeffs, Cmp::Eq, BigRational::from_integer(0.into()));
            }
        }
    }

    let Some(mut x) = system.feasible_point() else {
        return Ok(None);
    };
    if kind == MonoidKind::N {
        let scale = BigRational::from_integer(denominator_lcm(&x));
        for v in &mut x {
            *v *= &scale;
        }
    }
    let relations = index
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            let weighted = rows
                .iter()
                .enumerate()
                .map(|(k, s)| Ok((s.clone(), MonoidValue::from_rational(kind, &x[offset[i] + k])?)))
                .collect::<Result<Vec<_>>>()?;
            KRelation::from_rows(rels[i].vars().clone(), kind, weighted)
        })
        .collect::<Result<Vec<_>>>()?;
    ContextualFamily::over(f.contexts(), kind, relations).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::realisability::realisable_chordless;
    use crate::samples;

    #[test]
    fn five_contexts_are_not_realisable_but_their_triangle_is() {
        let f = samples::five_contexts();
        for kind in [MonoidKind::N, MonoidKind::Q] {
            assert_eq!(realisable_lp(&f, kind).unwrap(), None);
        }
        let tri = f
            .restrict_contexts(&[["a", "b"], ["b", "c"], ["a", "c"]].map(VarSet::of))
            .unwrap();
        let w = realisable_lp(&tri, MonoidKind::N).unwrap().expect("feasible");
        assert_eq!(w.support(), tri);
        assert!(realisable_chordless(&tri, MonoidKind::N).unwrap());
    }

    #[test]
    fn teaching_family_agrees_with_the_cover_test() {
        let f = samples::teaching(MonoidKind::B).unwrap();
        assert_eq!(realisable_lp(&f, MonoidKind::Q).unwrap(), None);
        let ext = samples::teaching_extended(MonoidKind::B).unwrap();
        let w = realisable_lp(&ext, MonoidKind::N).unwrap().expect("feasible");
        assert_eq!(w.kind(), MonoidKind::N);
        assert_eq!(w.support(), ext);
    }

    #[test]
    fn lower_bounds_are_respected() {
        let t = samples::triangle(MonoidKind::B, 1).unwrap();
        let w = realisable_lp_with_lower_bounds(&t, MonoidKind::Q, |_, _| BigRational::new(7.into(), 2.into()))
            .unwrap()
            .unwrap();
        for r in w.relations() {
            for (_, v) in r.rows() {
                assert!(v.to_rational().unwrap() >= BigRational::new(7.into(), 2.into()));
            }
        }
        assert!(realisable_lp(&t, MonoidKind::B).is_err());
    }
}
