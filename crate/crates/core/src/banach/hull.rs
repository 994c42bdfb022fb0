use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::extraction::Exponent;
use crate::lp::{check_farkas, check_point, solve, Constraint, LinearProgram, LpOutcome, Relation};
use crate::rational::{abs_q, to_f64, Q};

pub(crate) const NORM_TOL: f64 = 1e-12;

/// Finite family of vectors in `ℝ^n` with the exponent of the ambient norm.
///
/// `Exponent::Finite(1)` stands for `ℓ_1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorFamily {
    pub dim: usize,
    #[serde(with = "crate::rational::serde_q_mat")]
    pub vectors: Vec<Vec<Q>>,
    #[serde(rename = "pContext")]
    pub p: Exponent,
}

impl VectorFamily {
    pub fn new(dim: usize, vectors: Vec<Vec<Q>>, p: Exponent) -> Result<Self> {
        for v in &vectors {
            if v.len() != dim {
                return Err(Error::SizeMismatch { expected: dim, found: v.len() });
            }
        }
        if let Exponent::Finite(pp) = &p {
            if *pp < Q::one() {
                return Err(invalid("norm exponent must be at least 1"));
            }
        }
        Ok(Self { dim, vectors, p })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Whether every member lies in the closed unit ball of `ℓ_p^n`.
    pub fn in_unit_ball(&self) -> bool {
        self.vectors.iter().all(|v| norm_at_most(v, &self.p, &Q::one()))
    }
}

/// `‖v‖_p ≤ bound`, exact for `p ∈ {1, ∞}`.
pub fn norm_at_most(v: &[Q], p: &Exponent, bound: &Q) -> bool {
    match p {
        Exponent::Infinity => v.iter().all(|x| abs_q(x) <= *bound),
        Exponent::Finite(pp) if pp.is_one() => v.iter().fold(Q::zero(), |a, x| a + abs_q(x)) <= *bound,
        Exponent::Finite(_) => norm_f64(v, p) <= to_f64(bound) + NORM_TOL,
    }
}

pub fn norm_f64(v: &[Q], p: &Exponent) -> f64 {
    let xs = v.iter().map(|x| to_f64(x).abs());
    match p {
        Exponent::Infinity => xs.fold(0.0, f64::max),
        Exponent::Finite(pp) => {
            let pf = to_f64(pp);
            xs.map(|x| x.powf(pf)).sum::<f64>().powf(1.0 / pf)
        }
    }
}

/// Exact norm when `p ∈ {1, ∞}`.
pub fn norm_exact(v: &[Q], p: &Exponent) -> Option<Q> {
    match p {
        Exponent::Infinity => Some(v.iter().map(abs_q).max().unwrap_or_else(Q::zero)),
        Exponent::Finite(pp) if pp.is_one() => Some(v.iter().fold(Q::zero(), |a, x| a + abs_q(x))),
        Exponent::Finite(_) => None,
    }
}

/// `p/(p−1)`, with `1 ↔ ∞`.
pub fn conjugate(p: &Exponent) -> Exponent {
    match p {
        Exponent::Infinity => Exponent::Finite(Q::one()),
        Exponent::Finite(pp) if pp.is_one() => Exponent::Infinity,
        Exponent::Finite(pp) => Exponent::Finite(pp / (pp - Q::one())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HullMembership {
    Feasible {
        #[serde(with = "crate::rational::serde_q_vec")]
        coefficients: Vec<Q>,
    },
    /// Farkas multipliers for the rows `Σt ≤ 1` then one per coordinate.
    Infeasible {
        #[serde(with = "crate::rational::serde_q_vec")]
        certificate: Vec<Q>,
    },
}

impl HullMembership {
    pub fn coefficients(&self) -> Option<&[Q]> {
        match self {
            HullMembership::Feasible { coefficients } => Some(coefficients),
            HullMembership::Infeasible { .. } => None,
        }
    }
}

fn hull_program(family: &VectorFamily, target: &[Q]) -> LinearProgram {
    let k = family.len();
    let mut rows = vec![Constraint::new(vec![Q::one(); k], Relation::Le, Q::one())];
    for (i, t) in target.iter().enumerate() {
        let coeffs = family.vectors.iter().map(|v| v[i].clone()).collect();
        rows.push(Constraint::new(coeffs, Relation::Eq, t.clone()));
    }
    LinearProgram::feasibility(k, rows)
}

/// Membership of `target` in the convex hull of `E ∪ {0}`.
pub fn hull_member(family: &VectorFamily, target: &[Q]) -> Result<HullMembership> {
    if target.len() != family.dim {
        return Err(Error::SizeMismatch { expected: family.dim, found: target.len() });
    }
    if family.is_empty() {
        return if target.iter().all(Zero::is_zero) {
            Ok(HullMembership::Feasible { coefficients: Vec::new() })
        } else {
            // only 0 is in the hull; a nonzero coordinate separates it
            let mut y = vec![Q::zero(); target.len() + 1];
            let i = target.iter().position(|t| !t.is_zero()).expect("nonzero coordinate");
            y[i + 1] = if target[i].is_positive() { -Q::one() } else { Q::one() };
            Ok(HullMembership::Infeasible { certificate: y })
        };
    }
    let lp = hull_program(family, target);
    match solve(&lp)? {
        LpOutcome::Optimal { x, .. } => {
            if !check_point(&lp, &x) {
                return Err(Error::Corrupt("hull coefficients fail substitution".into()));
            }
            Ok(HullMembership::Feasible { coefficients: x })
        }
        LpOutcome::Infeasible { farkas } => {
            if !check_farkas(&lp, &farkas) {
                return Err(Error::Corrupt("hull infeasibility certificate fails re-check".into()));
            }
            Ok(HullMembership::Infeasible { certificate: farkas })
        }
        LpOutcome::Unbounded => Err(Error::Corrupt("feasibility program reported unbounded".into())),
    }
}
