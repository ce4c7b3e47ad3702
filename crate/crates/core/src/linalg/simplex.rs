use num::{One, Signed, Zero};

use super::RationalMatrix;
use crate::Rational;

/// A point z with z >= 1 componentwise and Mz = 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityWitness {
    pub point: Vec<Rational>,
    /// Set once Mz = 0 and z >= 1 have been re-checked exactly.
    pub slack_ok: bool,
}

/// Decide whether some z > 0 satisfies Mz = 0.
///
/// The solution set of Mz = 0 is a cone, so a strictly positive solution
/// exists iff one exists with every coordinate >= 1: scale any z > 0 by
/// 1 / min_i z_i. The closed system is handled by a phase-1 simplex on
/// u = z - 1 >= 0, M u = -M 1, in exact arithmetic with Bland's rule, so it
/// terminates and never misjudges feasibility. `None` is a proof that no
/// strictly positive solution exists.
pub fn lp_feasible_cone(m: &RationalMatrix) -> Option<FeasibilityWitness> {
    let k = m.cols();
    let rows = m.rows();
    let ones = vec![Rational::one(); k];
    let b: Vec<Rational> = m.mul_vec(&ones).into_iter().map(|v| -v).collect();

    // Tableau: [ M' | I | b' ] with rows sign-flipped so b' >= 0.
    let width = k + rows + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<Rational>> = (0..rows)
        .map(|i| {
            let flip = b[i].is_negative();
            let mut row = vec![Rational::zero(); width];
            for j in 0..k {
                row[j] = if flip {
                    -m[(i, j)].clone()
                } else {
                    m[(i, j)].clone()
                };
            }
            row[k + i] = Rational::one();
            row[rhs] = if flip { -b[i].clone() } else { b[i].clone() };
            row
        })
        .collect();
    let mut basis: Vec<usize> = (k..k + rows).collect();

    // Objective row of the auxiliary problem min sum(a), priced out.
    let mut obj = vec![Rational::zero(); width];
    for row in &t {
        for j in 0..k {
            obj[j] -= &row[j];
        }
        obj[rhs] -= &row[rhs];
    }

    // Bland: lowest-index entering column with negative reduced cost.
    // Artificial columns never re-enter; fixing them at zero keeps every
    // feasible point of the original system.
    while let Some(enter) = (0..k).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, row) in t.iter().enumerate() {
            if !row[enter].is_positive() {
                continue;
            }
            let ratio = &row[rhs] / &row[enter];
            let better = match &leave {
                None => true,
                Some((l, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*l]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // Unbounded direction cannot occur: the objective is bounded below by 0.
        let Some((pr, _)) = leave else { break };
        pivot(&mut t, &mut obj, pr, enter);
        basis[pr] = enter;
    }

    if !obj[rhs].is_zero() {
        return None;
    }
    let mut z = vec![Rational::one(); k];
    for (i, &var) in basis.iter().enumerate() {
        if var < k {
            z[var] += &t[i][rhs];
        }
    }
    let slack_ok =
        z.iter().all(|v| *v >= Rational::one()) && m.mul_vec(&z).iter().all(Zero::is_zero);
    Some(FeasibilityWitness { point: z, slack_ok })
}

fn pivot(t: &mut [Vec<Rational>], obj: &mut [Rational], pr: usize, pc: usize) {
    let inv = t[pr][pc].recip();
    for v in t[pr].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let pivot_row = t[pr].clone();
    let eliminate = |row: &mut [Rational]| {
        let factor = row[pc].clone();
        if factor.is_zero() {
            return;
        }
        for (v, p) in row.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v -= &factor * p;
            }
        }
    };
    for (i, row) in t.iter_mut().enumerate() {
        if i != pr {
            eliminate(row);
        }
    }
    eliminate(obj);
}
