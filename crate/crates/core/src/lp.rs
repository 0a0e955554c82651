//! Exact rational linear feasibility.
//!
//! A dense two-phase simplex (phase one only) over `BigRational` with
//! Bland's rule, sized for the handful of variables that compatibility and
//! belief problems produce. Every variable is implicitly non-negative.

use num::{Signed, Zero};

use crate::rational::{one, zero, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `{ x >= 0 : rows hold }`.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    n_vars: usize,
    rows: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, rows: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.n_vars, "constraint width");
        self.rows.push(Constraint { coeffs, relation, rhs });
    }

    /// Adds `sum_{i in vars} x_i = 1`.
    pub fn add_simplex(&mut self, vars: impl IntoIterator<Item = usize>) {
        let mut c = vec![zero(); self.n_vars];
        for v in vars {
            c[v] = one();
        }
        self.add(c, Relation::Eq, one());
    }

    /// Checks a candidate point exactly.
    pub fn satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.n_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.rows.iter().all(|row| {
            let lhs = row.coeffs.iter().zip(x).fold(zero(), |acc, (c, v)| acc + c * v);
            match row.relation {
                Relation::Le => lhs <= row.rhs,
                Relation::Ge => lhs >= row.rhs,
                Relation::Eq => lhs == row.rhs,
            }
        })
    }

    /// Returns a feasible point, or `None` when the system is infeasible.
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        let m = self.rows.len();
        let n = self.n_vars;
        if m == 0 {
            return Some(vec![zero(); n]);
        }
        // Normalise to rhs >= 0 and count auxiliary columns.
        let mut norm: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(m);
        for row in &self.rows {
            if row.rhs.is_negative() {
                let flipped = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                norm.push((row.coeffs.iter().map(|c| -c).collect(), flipped, -&row.rhs));
            } else {
                norm.push((row.coeffs.clone(), row.relation, row.rhs.clone()));
            }
        }
        let n_slack = norm.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = norm.iter().filter(|r| r.1 != Relation::Le).count();
        let width = n + n_slack + n_art;
        let rhs_col = width;
        let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m + 1);
        let mut basis = Vec::with_capacity(m);
        let (mut next_slack, mut next_art) = (n, n + n_slack);
        for (coeffs, rel, rhs) in &norm {
            let mut t = vec![zero(); width + 1];
            t[..n].clone_from_slice(coeffs);
            t[rhs_col] = rhs.clone();
            match rel {
                Relation::Le => {
                    t[next_slack] = one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    t[next_slack] = -one();
                    next_slack += 1;
                    t[next_art] = one();
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    t[next_art] = one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            tab.push(t);
        }
        // Objective row: minimise sum of artificials, stored as reduced costs.
        let mut obj = vec![zero(); width + 1];
        for j in n + n_slack..width {
            obj[j] = one();
        }
        for (i, &b) in basis.iter().enumerate() {
            if b >= n + n_slack {
                for j in 0..=width {
                    obj[j] = &obj[j] - &tab[i][j];
                }
            }
        }
        tab.push(obj);

        loop {
            // Bland: smallest index with negative reduced cost enters.
            let Some(enter) = (0..width).find(|&j| tab[m][j].is_negative()) else {
                break;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..m {
                if tab[i][enter].is_positive() {
                    let r = &tab[i][rhs_col] / &tab[i][enter];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => r < *lr || (r == *lr && basis[i] < basis[*li]),
                    };
                    if better {
                        leave = Some((i, r));
                    }
                }
            }
            let Some((row, _)) = leave else {
                // Phase-one objective is bounded below by zero.
                unreachable!("unbounded phase-one objective");
            };
            pivot(&mut tab, row, enter);
            basis[row] = enter;
        }
        if !tab[m][rhs_col].is_zero() {
            return None;
        }
        let mut x = vec![zero(); n];
        for (i, &b) in basis.iter().enumerate() {
            if b < n {
                x[b] = tab[i][rhs_col].clone();
            }
        }
        debug_assert!(self.satisfied_by(&x));
        Some(x)
    }
}

fn pivot(tab: &mut [Vec<Rational>], row: usize, col: usize) {
    let p = tab[row][col].clone();
    for v in tab[row].iter_mut() {
        *v = &*v / &p;
    }
    let pivot_row = tab[row].clone();
    for (i, r) in tab.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v = &*v - &f * pv;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn finds_point_in_simplex_with_cut() {
        // x + y = 1, x - 2y >= 0, y >= 1/4
        let mut sys = LinearSystem::new(2);
        sys.add_simplex([0, 1]);
        sys.add(vec![int(1), int(-2)], Relation::Ge, zero());
        sys.add(vec![zero(), int(1)], Relation::Ge, ratio(1, 4));
        let x = sys.feasible_point().expect("feasible");
        assert!(sys.satisfied_by(&x));
    }

    #[test]
    fn detects_infeasibility() {
        let mut sys = LinearSystem::new(2);
        sys.add_simplex([0, 1]);
        sys.add(vec![int(1), int(1)], Relation::Le, ratio(1, 2));
        assert!(sys.feasible_point().is_none());
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // -x <= -2  (x >= 2), x <= 3
        let mut sys = LinearSystem::new(1);
        sys.add(vec![int(-1)], Relation::Le, int(-2));
        sys.add(vec![int(1)], Relation::Le, int(3));
        let x = sys.feasible_point().unwrap();
        assert!(x[0] >= int(2) && x[0] <= int(3));
    }

    #[test]
    fn degenerate_equalities() {
        // x = y, y = z, x + y + z = 1 -> all 1/3
        let mut sys = LinearSystem::new(3);
        sys.add(vec![int(1), int(-1), zero()], Relation::Eq, zero());
        sys.add(vec![zero(), int(1), int(-1)], Relation::Eq, zero());
        sys.add_simplex([0, 1, 2]);
        let x = sys.feasible_point().unwrap();
        assert_eq!(x, vec![ratio(1, 3); 3]);
    }

    #[test]
    fn empty_system_is_feasible() {
        assert_eq!(LinearSystem::new(2).feasible_point(), Some(vec![zero(), zero()]));
    }
}
