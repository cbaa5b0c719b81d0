//! Exact feasibility of linear systems over the rationals.
//!
//! A dense two-phase-style simplex (phase I only) with Bland's rule, so it
//! never cycles. Sizes here are small; exactness matters more than speed.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Cmp {
    Le,
    Eq,
    #[cfg_attr(not(test), allow(dead_code))]
    Ge,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub coeffs: Vec<(usize, BigRational)>,
    pub cmp: Cmp,
    pub rhs: BigRational,
}

/// `constraints` over variables `x_0 .. x_{n-1}` with `lower <= x <= upper`.
/// Lower bounds default to zero.
#[derive(Debug, Clone)]
pub(crate) struct LinearSystem {
    n: usize,
    lower: Vec<BigRational>,
    upper: Vec<Option<BigRational>>,
    constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(n: usize) -> Self {
        LinearSystem {
            n,
            lower: vec![BigRational::zero(); n],
            upper: vec![None; n],
            constraints: Vec::new(),
        }
    }

    pub fn set_lower(&mut self, var: usize, bound: BigRational) {
        self.lower[var] = bound;
    }

    pub fn set_upper(&mut self, var: usize, bound: BigRational) {
        self.upper[var] = Some(bound);
    }

    pub fn add(&mut self, coeffs: Vec<(usize, BigRational)>, cmp: Cmp, rhs: BigRational) {
        self.constraints.push(Constraint { coeffs, cmp, rhs });
    }

    /// Some point satisfying every constraint and bound, if one exists.
    pub fn feasible_point(&self) -> Option<Vec<BigRational>> {
        // shift x = lower + y with y >= 0
        let mut rows: Vec<Constraint> = Vec::with_capacity(self.constraints.len() + self.n);
        for c in &self.constraints {
            let mut rhs = c.rhs.clone();
            for (j, a) in &c.coeffs {
                rhs -= a * &self.lower[*j];
            }
            rows.push(Constraint {
                coeffs: c.coeffs.clone(),
                cmp: c.cmp,
                rhs,
            });
        }
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                let room = u - &self.lower[j];
                if room.is_negative() {
                    return None;
                }
                rows.push(Constraint {
                    coeffs: vec![(j, BigRational::one())],
                    cmp: Cmp::Le,
                    rhs: room,
                });
            }
        }
        let y = phase_one(self.n, &rows)?;
        Some(
            y.into_iter()
                .zip(&self.lower)
                .map(|(v, l)| v + l)
                .collect(),
        )
    }

    /// Some integral point, by depth-first branch and bound on top of
    /// [`feasible_point`](Self::feasible_point). Only terminates when the
    /// feasible region is bounded.
    pub fn integer_point(&self) -> Option<Vec<BigRational>> {
        let x = self.feasible_point()?;
        let Some(j) = x.iter().position(|v| !v.is_integer()) else {
            return Some(x);
        };
        let mut down = self.clone();
        let floor = x[j].floor();
        let capped = match &self.upper[j] {
            Some(u) if *u < floor => u.clone(),
            _ => floor,
        };
        down.set_upper(j, capped);
        if let Some(p) = down.integer_point() {
            return Some(p);
        }
        let mut up = self.clone();
        let ceil = x[j].ceil();
        if ceil > up.lower[j] {
            up.set_lower(j, ceil);
        }
        up.integer_point()
    }
}

fn phase_one(n: usize, rows: &[Constraint]) -> Option<Vec<BigRational>> {
    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
    let art0 = n + slack_count;
    let width = art0 + m; // columns; rhs stored separately
    let mut table: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); width]; m];
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);

    let mut slack = n;
    for (i, r) in rows.iter().enumerate() {
        for (j, a) in &r.coeffs {
            table[i][*j] += a;
        }
        match r.cmp {
            Cmp::Le => {
                table[i][slack] = BigRational::one();
                slack += 1;
            }
            Cmp::Ge => {
                table[i][slack] = -BigRational::one();
                slack += 1;
            }
            Cmp::Eq => {}
        }
        let mut b = r.rhs.clone();
        if b.is_negative() {
            for v in table[i].iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        table[i][art0 + i] = BigRational::one();
        rhs.push(b);
        basis.push(art0 + i);
    }

    // w = sum of artificials = obj_rhs + sum_j obj[j] * x_j
    let mut obj = vec![BigRational::zero(); width];
    let mut obj_rhs = BigRational::zero();
    for i in 0..m {
        for j in 0..art0 {
            obj[j] -= &table[i][j];
        }
        obj_rhs += &rhs[i];
    }

    loop {
        let Some(col) = (0..width).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut pivot: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if table[i][col].is_positive() {
                let ratio = &rhs[i] / &table[i][col];
                let better = match &pivot {
                    None => true,
                    Some((p, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*p]),
                };
                if better {
                    pivot = Some((i, ratio));
                }
            }
        }
        // phase I is bounded below by zero, so a pivot row always exists
        let (row, _) = pivot.expect("phase one objective is bounded");
        let p = table[row][col].clone();
        for v in table[row].iter_mut() {
            *v /= &p;
        }
        rhs[row] /= &p;
        let pivot_row = table[row].clone();
        let pivot_rhs = rhs[row].clone();
        for i in 0..m {
            if i == row || table[i][col].is_zero() {
                continue;
            }
            let f = table[i][col].clone();
            for (v, pv) in table[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            rhs[i] -= &f * &pivot_rhs;
        }
        let f = obj[col].clone();
        for (v, pv) in obj.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
        obj_rhs += &f * &pivot_rhs;
        basis[row] = col;
    }

    if obj_rhs.is_positive() {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i].clone();
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn satisfies(sys: &LinearSystem, x: &[BigRational]) -> bool {
        let bounds = x.iter().enumerate().all(|(j, v)| {
            *v >= sys.lower[j] && sys.upper[j].as_ref().map_or(true, |u| v <= u)
        });
        bounds
            && sys.constraints.iter().all(|c| {
                let lhs: BigRational = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
                match c.cmp {
                    Cmp::Le => lhs <= c.rhs,
                    Cmp::Eq => lhs == c.rhs,
                    Cmp::Ge => lhs >= c.rhs,
                }
            })
    }

    #[test]
    fn simple_feasible_and_infeasible() {
        // x + y = 1, x - y = 0
        let mut s = LinearSystem::new(2);
        s.add(vec![(0, q(1)), (1, q(1))], Cmp::Eq, q(1));
        s.add(vec![(0, q(1)), (1, q(-1))], Cmp::Eq, q(0));
        let x = s.feasible_point().unwrap();
        assert_eq!(x, vec![BigRational::new(1.into(), 2.into()); 2]);
        assert!(s.integer_point().is_none());

        // x >= 1, y >= 1, x - y = 0, x + y = 1
        s.set_lower(0, q(1));
        s.set_lower(1, q(1));
        assert!(s.feasible_point().is_none());
    }

    #[test]
    fn homogeneous_with_unit_lower_bounds() {
        // a = b + c, a = b: forces c = 0, contradicting c >= 1
        let mut s = LinearSystem::new(3);
        s.add(vec![(0, q(1)), (1, q(-1)), (2, q(-1))], Cmp::Eq, q(0));
        s.add(vec![(0, q(1)), (1, q(-1))], Cmp::Eq, q(0));
        for j in 0..3 {
            s.set_lower(j, q(1));
        }
        assert!(s.feasible_point().is_none());
    }

    #[test]
    fn upper_bounds_and_integers() {
        // 2x + 2y = 3 has no integer point; 2x + 2y = 4 with x <= 1 does
        let mut s = LinearSystem::new(2);
        s.add(vec![(0, q(2)), (1, q(2))], Cmp::Eq, q(3));
        assert!(s.feasible_point().is_some());
        assert!(s.integer_point().is_none());
        let mut s = LinearSystem::new(2);
        s.add(vec![(0, q(2)), (1, q(2))], Cmp::Eq, q(4));
        s.set_upper(0, q(1));
        let p = s.integer_point().unwrap();
        assert!(satisfies(&s, &p));
        assert!(p.iter().all(|v| v.is_integer()));
    }

    /// Fourier-Motzkin elimination on `a x <= b` rows, used as an
    /// independent feasibility oracle.
    fn fm_feasible(mut rows: Vec<(Vec<BigRational>, BigRational)>, n: usize) -> bool {
        for k in 0..n {
            let (mut pos, mut neg, mut zero) = (vec![], vec![], vec![]);
            for r in rows.drain(..) {
                if r.0[k].is_positive() {
                    pos.push(r)
                } else if r.0[k].is_negative() {
                    neg.push(r)
                } else {
                    zero.push(r)
                }
            }
            rows = zero;
            for (pa, pb) in &pos {
                for (na, nb) in &neg {
                    let (fp, fneg) = (-na[k].clone(), pa[k].clone());
                    let a: Vec<BigRational> = pa
                        .iter()
                        .zip(na)
                        .map(|(x, y)| x * &fp + y * &fneg)
                        .collect();
                    rows.push((a, pb * &fp + nb * &fneg));
                }
            }
        }
        rows.iter().all(|(_, b)| !b.is_negative())
    }

    fn to_fm(sys: &LinearSystem) -> Vec<(Vec<BigRational>, BigRational)> {
        let mut out = vec![];
        let dense = |c: &Constraint| {
            let mut a = vec![q(0); sys.n];
            for (j, v) in &c.coeffs {
                a[*j] += v;
            }
            a
        };
        for c in &sys.constraints {
            let a = dense(c);
            let neg: Vec<BigRational> = a.iter().map(|v| -v.clone()).collect();
            match c.cmp {
                Cmp::Le => out.push((a, c.rhs.clone())),
                Cmp::Ge => out.push((neg, -c.rhs.clone())),
                Cmp::Eq => {
                    out.push((a, c.rhs.clone()));
                    out.push((neg, -c.rhs.clone()));
                }
            }
        }
        for j in 0..sys.n {
            let mut a = vec![q(0); sys.n];
            a[j] = q(-1);
            out.push((a, -sys.lower[j].clone()));
        }
        out
    }

    fn system() -> impl Strategy<Value = LinearSystem> {
        let row = (
            prop::collection::vec(-3i64..=3, 3),
            0usize..3,
            -4i64..=4,
        );
        (prop::collection::vec(row, 1..5), prop::collection::vec(0i64..2, 3)).prop_map(
            |(rows, lower)| {
                let mut s = LinearSystem::new(3);
                for (j, l) in lower.into_iter().enumerate() {
                    s.set_lower(j, q(l));
                }
                for (a, c, b) in rows {
                    let cmp = [Cmp::Le, Cmp::Eq, Cmp::Ge][c];
                    s.add(
                        a.into_iter().enumerate().map(|(j, v)| (j, q(v))).collect(),
                        cmp,
                        q(b),
                    );
                }
                s
            },
        )
    }

    proptest! {
        #[test]
        fn simplex_agrees_with_fourier_motzkin(sys in system()) {
            let point = sys.feasible_point();
            if let Some(x) = &point {
                prop_assert!(satisfies(&sys, x));
            }
            prop_assert_eq!(point.is_some(), fm_feasible(to_fm(&sys), sys.n));
        }
    }
}
