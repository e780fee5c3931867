//! Exact feasibility for `A x = b, x ≥ 0` over the rationals.
//!
//! Phase one of the simplex method with Bland's rule, which cannot cycle.

use num_traits::{Signed, Zero};

use crate::model::rational::{zero, Rational};

/// Returns a nonnegative solution of `A x = b`, or `None` if there is none.
pub fn feasible(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m == 0 {
        return Some(vec![zero(); n]);
    }
    // Columns: n originals, m artificials, then the right-hand side.
    let width = n + m + 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
    for (i, row) in a.iter().enumerate() {
        debug_assert_eq!(row.len(), n);
        let flip = b[i].is_negative();
        let mut r = Vec::with_capacity(width);
        for v in row {
            r.push(if flip { -v.clone() } else { v.clone() });
        }
        for k in 0..m {
            r.push(if k == i { Rational::from_integer(1.into()) } else { zero() });
        }
        r.push(if flip { -b[i].clone() } else { b[i].clone() });
        t.push(r);
    }
    // Objective: minimise the sum of artificials, expressed in non-basic terms.
    let mut obj = vec![zero(); width];
    for row in &t {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    loop {
        let entering = (0..n + m).find(|&j| t[m][j].is_negative());
        let Some(j) = entering else { break };
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for i in 0..m {
            if t[i][j].is_positive() {
                let ratio = &t[i][width - 1] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        // Phase one is bounded below by zero, so a pivot row always exists.
        let i = leave.expect("phase-one objective is bounded");
        pivot(&mut t, i, j);
        basis[i] = j;
    }
    if !t[m][width - 1].is_zero() {
        return None;
    }
    let mut x = vec![zero(); n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            x[v] = t[i][width - 1].clone();
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<Rational>], row: usize, col: usize) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
}

/// Weights λ ≥ 0 with Σλ = 1 and Σ λₖ·vₖ = target, if any.
pub fn convex_combination(vertices: &[Vec<Rational>], target: &[Rational]) -> Option<Vec<Rational>> {
    if vertices.is_empty() {
        return None;
    }
    let dims = target.len();
    let mut a: Vec<Vec<Rational>> = (0..dims).map(|d| vertices.iter().map(|v| v[d].clone()).collect()).collect();
    a.push(vec![Rational::from_integer(1.into()); vertices.len()]);
    let mut b = target.to_vec();
    b.push(Rational::from_integer(1.into()));
    feasible(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::ratio;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        ratio(n, d)
    }

    #[test]
    fn solves_small_system() {
        // x + y = 1, x - y = 1/2
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)]];
        let x = feasible(&a, &[q(1, 1), q(1, 2)]).unwrap();
        assert_eq!(x, vec![q(3, 4), q(1, 4)]);
    }

    #[test]
    fn detects_infeasible() {
        // x + y = 1, x + y = 2
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(1, 1)]];
        assert!(feasible(&a, &[q(1, 1), q(2, 1)]).is_none());
        // x = -1 with x ≥ 0
        assert!(feasible(&[vec![q(1, 1)]], &[q(-1, 1)]).is_none());
    }

    #[test]
    fn hull_membership() {
        let v = vec![vec![q(3, 10), q(3, 10), q(2, 5)], vec![q(1, 2), q(2, 5), q(1, 10)]];
        // The middle transition of the right automaton is outside the hull.
        assert!(convex_combination(&v, &[q(2, 5), q(3, 10), q(3, 10)]).is_none());
        let w = convex_combination(&v, &[q(2, 5), q(7, 20), q(1, 4)]).unwrap();
        assert_eq!(w, vec![q(1, 2), q(1, 2)]);
    }

    proptest! {
        #[test]
        fn combinations_of_vertices_are_members(
            pts in prop::collection::vec(prop::collection::vec(0i64..5, 3), 1..5),
            ws in prop::collection::vec(1i64..4, 5),
        ) {
            let verts: Vec<Vec<Rational>> = pts.iter().map(|p| p.iter().map(|&x| q(x, 1)).collect()).collect();
            let total: i64 = ws.iter().take(verts.len()).sum();
            let mut target = vec![zero(); 3];
            for (v, &w) in verts.iter().zip(&ws) {
                for d in 0..3 {
                    target[d] += &v[d] * q(w, total);
                }
            }
            let lam = convex_combination(&verts, &target).expect("member");
            let mut back = vec![zero(); 3];
            for (v, l) in verts.iter().zip(&lam) {
                prop_assert!(*l >= zero());
                for d in 0..3 {
                    back[d] += &v[d] * l;
                }
            }
            prop_assert_eq!(back, target);
        }
    }
}
