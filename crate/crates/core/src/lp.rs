//! Exact rational two-phase simplex with Bland's rule.
//!
//! Problems have the form `minimize c·x` subject to rows `a·x (≤|=|≥) b`
//! and `x ≥ 0`. Infeasibility comes with a Farkas vector that can be
//! re-checked exactly with [`check_farkas`].

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use crate::rational::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, relation: Relation, rhs: Q) -> Self {
        Self { coeffs, relation, rhs }
    }
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    /// Minimized. Empty means a pure feasibility problem.
    pub objective: Vec<Q>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    /// `y` with sign conditions per row (`≤`: y ≥ 0, `≥`: y ≤ 0), `yᵀA ≥ 0` and `yᵀb < 0`.
    Infeasible { farkas: Vec<Q> },
    Unbounded,
}

impl LinearProgram {
    pub fn feasibility(num_vars: usize, constraints: Vec<Constraint>) -> Self {
        Self { num_vars, objective: Vec::new(), constraints }
    }

    fn validate(&self) -> Result<()> {
        if !self.objective.is_empty() && self.objective.len() != self.num_vars {
            return Err(invalid("objective length differs from variable count"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(invalid(format!("constraint {i} has wrong width")));
            }
        }
        Ok(())
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Q {
        &self.rows[i][self.cols]
    }

    fn pivot(&mut self, obj: &mut [Q], r: usize, c: usize) {
        let inv = Q::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..=self.cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for &j in &nz {
                obj[j] -= &f * &pivot_row[j];
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[Q]) -> Vec<Q> {
        let mut obj: Vec<Q> = (0..=self.cols)
            .map(|j| if j < self.cols { cost[j].clone() } else { Q::zero() })
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.cols {
                if !row[j].is_zero() {
                    obj[j] -= cb * &row[j];
                }
            }
        }
        obj
    }

    /// Runs Bland's rule over the allowed columns. Returns false on unboundedness.
    fn optimize(&mut self, obj: &mut [Q], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols).find(|&j| allowed[j] && obj[j].is_negative());
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(obj, r, c),
            }
        }
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let m = lp.constraints.len();
    let n = lp.num_vars;

    // column layout: originals, one slack per inequality row, then artificials
    let mut slack_of = vec![None; m];
    let mut cols = n;
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.relation != Relation::Eq {
            slack_of[i] = Some(cols);
            cols += 1;
        }
    }
    let mut flip = vec![false; m];
    let mut init_col = vec![usize::MAX; m];
    let mut artificial = Vec::new();
    for (i, c) in lp.constraints.iter().enumerate() {
        flip[i] = c.rhs.is_negative();
        let slack_sign_positive = match c.relation {
            Relation::Le => !flip[i],
            Relation::Ge => flip[i],
            Relation::Eq => false,
        };
        if c.relation != Relation::Eq && slack_sign_positive {
            init_col[i] = slack_of[i].unwrap();
        } else {
            init_col[i] = cols + artificial.len();
            artificial.push(i);
        }
    }
    let first_art = cols;
    let total = cols + artificial.len();

    let mut rows = Vec::with_capacity(m);
    for (i, c) in lp.constraints.iter().enumerate() {
        let mut row = vec![Q::zero(); total + 1];
        for (j, a) in c.coeffs.iter().enumerate() {
            row[j] = a.clone();
        }
        if let Some(s) = slack_of[i] {
            row[s] = if c.relation == Relation::Le { Q::one() } else { -Q::one() };
        }
        row[total] = c.rhs.clone();
        if flip[i] {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        if init_col[i] >= first_art {
            row[init_col[i]] = Q::one();
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: init_col.clone(), cols: total };

    // phase one
    let phase1_cost: Vec<Q> =
        (0..total).map(|j| if j >= first_art { Q::one() } else { Q::zero() }).collect();
    let mut obj = t.reduced_costs(&phase1_cost);
    let all = vec![true; total];
    t.optimize(&mut obj, &all);
    let infeasibility: Q = (0..m)
        .filter(|&i| t.basis[i] >= first_art)
        .map(|i| t.rhs(i).clone())
        .fold(Q::zero(), |a, b| a + b);
    if infeasibility.is_positive() {
        // π_i = c_init − d_init, and the Farkas vector is −π mapped back through the flips
        let farkas = (0..m)
            .map(|i| {
                let pi = &phase1_cost[init_col[i]] - &obj[init_col[i]];
                let y = -pi;
                if flip[i] {
                    -y
                } else {
                    y
                }
            })
            .collect();
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // drive remaining artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= first_art {
            let col = (0..first_art).find(|&j| !t.rows[i][j].is_zero());
            match col {
                Some(c) => {
                    t.pivot(&mut obj, i, c);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // phase two
    let mut cost = vec![Q::zero(); total];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[j] = c.clone();
    }
    let allowed: Vec<bool> = (0..total).map(|j| j < first_art).collect();
    let mut obj = t.reduced_costs(&cost);
    if !t.optimize(&mut obj, &allowed) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![Q::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i).clone();
        }
    }
    let value = lp
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .fold(Q::zero(), |a, b| a + b);
    Ok(LpOutcome::Optimal { x, value })
}

/// Exact substitution check of a candidate point.
pub fn check_point(lp: &LinearProgram, x: &[Q]) -> bool {
    if x.len() != lp.num_vars || x.iter().any(|v| v.is_negative()) {
        return false;
    }
    lp.constraints.iter().all(|c| {
        let lhs = c.coeffs.iter().zip(x).map(|(a, v)| a * v).fold(Q::zero(), |a, b| a + b);
        match c.relation {
            Relation::Le => lhs <= c.rhs,
            Relation::Eq => lhs == c.rhs,
            Relation::Ge => lhs >= c.rhs,
        }
    })
}

/// Exact check that `y` proves infeasibility.
pub fn check_farkas(lp: &LinearProgram, y: &[Q]) -> bool {
    if y.len() != lp.constraints.len() {
        return false;
    }
    for (c, yi) in lp.constraints.iter().zip(y) {
        let ok = match c.relation {
            Relation::Le => !yi.is_negative(),
            Relation::Ge => !yi.is_positive(),
            Relation::Eq => true,
        };
        if !ok {
            return false;
        }
    }
    let combined_ok = (0..lp.num_vars).all(|j| {
        let s = lp
            .constraints
            .iter()
            .zip(y)
            .map(|(c, yi)| yi * &c.coeffs[j])
            .fold(Q::zero(), |a, b| a + b);
        !s.is_negative()
    });
    let rhs = lp.constraints.iter().zip(y).map(|(c, yi)| yi * &c.rhs).fold(Q::zero(), |a, b| a + b);
    combined_ok && rhs.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn row(c: &[i64], rel: Relation, b: i64) -> Constraint {
        Constraint::new(c.iter().map(|&v| qi(v)).collect(), rel, qi(b))
    }

    #[test]
    fn small_optimum() {
        // max x + y st x + 2y ≤ 4, 3x + y ≤ 6
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![qi(-1), qi(-1)],
            constraints: vec![row(&[1, 2], Relation::Le, 4), row(&[3, 1], Relation::Le, 6)],
        };
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![q(8, 5), q(6, 5)]);
                assert_eq!(value, q(-14, 5));
                assert!(check_point(&lp, &x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_has_certificate() {
        let lp = LinearProgram::feasibility(
            2,
            vec![row(&[1, 1], Relation::Le, 1), row(&[1, 1], Relation::Ge, 3)],
        );
        match solve(&lp).unwrap() {
            LpOutcome::Infeasible { farkas } => assert!(check_farkas(&lp, &farkas)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_rhs_and_equalities() {
        // x - y = -2, x + y = 4 → (1, 3)
        let lp = LinearProgram::feasibility(
            2,
            vec![row(&[1, -1], Relation::Eq, -2), row(&[1, 1], Relation::Eq, 4)],
        );
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { x, .. } => assert_eq!(x, vec![qi(1), qi(3)]),
            other => panic!("{other:?}"),
        }
        let bad = LinearProgram::feasibility(1, vec![row(&[1], Relation::Eq, -1)]);
        match solve(&bad).unwrap() {
            LpOutcome::Infeasible { farkas } => assert!(check_farkas(&bad, &farkas)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            num_vars: 1,
            objective: vec![qi(-1)],
            constraints: vec![row(&[1], Relation::Ge, 1)],
        };
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![qi(1), qi(0)],
            constraints: vec![row(&[1, 1], Relation::Eq, 2), row(&[2, 2], Relation::Eq, 4)],
        };
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, qi(0));
                assert!(check_point(&lp, &x));
            }
            other => panic!("{other:?}"),
        }
    }
}
