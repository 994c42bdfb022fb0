use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, precondition, Error, Result};
use crate::lp::{check_farkas, check_point, solve, Constraint, LinearProgram, LpOutcome, Relation};
use crate::rational::{abs_q, binomial, fmt_q, floor_q, q, qi, Q};

pub const MAX_NET: usize = 50_000;

/// Grid net `{a/K : a ∈ ℕ^m, Σa = K}` of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimplexNet {
    pub m: usize,
    #[serde(rename = "C", with = "crate::rational::serde_q")]
    pub c: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub epsilon: Q,
    pub resolution: usize,
    #[serde(rename = "Lambda", with = "crate::rational::serde_q_mat")]
    pub lambda: Vec<Vec<Q>>,
}

/// Largest `ℓ_1` distance from a probability vector to the `K`-grid: `2⌊m/2⌋⌈m/2⌉/(mK)`.
pub fn grid_radius(m: usize, k: usize) -> Q {
    let (lo, hi) = (m / 2, m.div_ceil(2));
    q(2 * (lo * hi) as i64, (m * k) as i64)
}

/// The coarsest grid net whose covering radius is below `1/(4C)`.
pub fn simplex_net(m: usize, c: &Q) -> Result<SimplexNet> {
    if m == 0 {
        return Err(invalid("need m ≥ 1"));
    }
    if !c.is_positive() {
        return Err(invalid("C must be positive"));
    }
    // radius < 1/(4C)  ⟺  K > 8C⌊m/2⌋⌈m/2⌉/m
    let bound = qi(8) * c * qi(((m / 2) * m.div_ceil(2)) as i64) / qi(m as i64);
    let k = (floor_q(&bound) + num_bigint::BigInt::one())
        .to_usize()
        .filter(|&k| k >= 1)
        .ok_or_else(|| Error::TooLarge("net resolution".into()))?;
    let size = binomial((k + m - 1) as u64, (m - 1) as u64);
    if size > MAX_NET.into() {
        return Err(Error::TooLarge(format!("net of {size} points")));
    }
    let mut lambda = Vec::new();
    let mut a = vec![0usize; m];
    compositions(&mut a, 0, k, &mut |a| lambda.push(a.iter().map(|&x| q(x as i64, k as i64)).collect()));
    Ok(SimplexNet { m, c: c.clone(), epsilon: q(1, 4), resolution: k, lambda })
}

fn compositions(a: &mut Vec<usize>, pos: usize, left: usize, emit: &mut impl FnMut(&[usize])) {
    if pos + 1 == a.len() {
        a[pos] = left;
        emit(a);
        return;
    }
    for x in (0..=left).rev() {
        a[pos] = x;
        compositions(a, pos + 1, left - x, emit);
    }
}

impl SimplexNet {
    /// Largest-remainder rounding of `lambda` onto the grid.
    pub fn nearest(&self, lambda: &[Q]) -> Result<Vec<Q>> {
        if lambda.len() != self.m {
            return Err(Error::SizeMismatch { expected: self.m, found: lambda.len() });
        }
        if lambda.iter().any(Signed::is_negative) || lambda.iter().fold(Q::zero(), |a, x| a + x) != Q::one() {
            return Err(invalid("not a probability vector"));
        }
        let k = qi(self.resolution as i64);
        let scaled: Vec<Q> = lambda.iter().map(|x| x * &k).collect();
        let mut floors: Vec<Q> = scaled.iter().map(|x| Q::from_integer(floor_q(x))).collect();
        let spare = (&k - floors.iter().fold(Q::zero(), |a, x| a + x)).to_integer().to_usize().unwrap_or(0);
        let mut order: Vec<usize> = (0..self.m).collect();
        order.sort_by(|&i, &j| (&scaled[j] - &floors[j]).cmp(&(&scaled[i] - &floors[i])).then(i.cmp(&j)));
        for &i in order.iter().take(spare) {
            floors[i] += Q::one();
        }
        Ok(floors.into_iter().map(|x| x / &k).collect())
    }

    /// Checks `‖w‖_∞ ≤ C` and `⟨w, λ⟩ ≥ 1 − ε`.
    pub fn check_hypotheses(&self, lambda: &[Q], w: &[Q]) -> Result<()> {
        if w.len() != self.m {
            return Err(Error::SizeMismatch { expected: self.m, found: w.len() });
        }
        let label = || lambda.iter().map(fmt_q).collect::<Vec<_>>().join(",");
        if w.iter().any(|x| abs_q(x) > self.c) {
            return Err(precondition(format!("‖w‖_∞ exceeds C at λ = ({})", label())));
        }
        let pairing = w.iter().zip(lambda).fold(Q::zero(), |a, (x, l)| a + x * l);
        if pairing < Q::one() - &self.epsilon {
            return Err(precondition(format!("⟨w, λ⟩ below 1 − ε at λ = ({})", label())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NetOutcome {
    Feasible {
        #[serde(with = "crate::rational::serde_q_vec")]
        point: Vec<Q>,
        #[serde(with = "crate::rational::serde_q_vec")]
        coefficients: Vec<Q>,
    },
    Infeasible {
        #[serde(with = "crate::rational::serde_q_vec")]
        certificate: Vec<Q>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NetIntersection {
    pub m: usize,
    pub net_size: usize,
    pub resolution: usize,
    pub outcome: NetOutcome,
}

impl NetIntersection {
    pub fn point(&self) -> Option<&[Q]> {
        match &self.outcome {
            NetOutcome::Feasible { point, .. } => Some(point),
            NetOutcome::Infeasible { .. } => None,
        }
    }
}

/// A point of `conv{w^{(λ)} : λ ∈ Λ}` with every coordinate at least `1/2`.
pub fn simplex_net_intersection(net: &SimplexNet, w: impl Fn(&[Q]) -> Vec<Q>) -> Result<NetIntersection> {
    let ws: Vec<Vec<Q>> = net.lambda.iter().map(|l| w(l)).collect();
    for (l, v) in net.lambda.iter().zip(&ws) {
        net.check_hypotheses(l, v)?;
    }
    let count = ws.len();
    let mut rows = vec![Constraint::new(vec![Q::one(); count], Relation::Eq, Q::one())];
    for i in 0..net.m {
        rows.push(Constraint::new(ws.iter().map(|v| v[i].clone()).collect(), Relation::Ge, q(1, 2)));
    }
    let lp = LinearProgram::feasibility(count, rows);
    let outcome = match solve(&lp)? {
        LpOutcome::Optimal { x, .. } => {
            if !check_point(&lp, &x) {
                return Err(Error::Corrupt("net coefficients fail substitution".into()));
            }
            let point: Vec<Q> = (0..net.m)
                .map(|i| ws.iter().zip(&x).fold(Q::zero(), |a, (v, t)| a + &v[i] * t))
                .collect();
            if point.iter().any(|t| *t < q(1, 2)) {
                return Err(Error::Corrupt("intersection point below 1/2".into()));
            }
            NetOutcome::Feasible { point, coefficients: x }
        }
        LpOutcome::Infeasible { farkas } => {
            if !check_farkas(&lp, &farkas) {
                return Err(Error::Corrupt("net infeasibility certificate fails re-check".into()));
            }
            NetOutcome::Infeasible { certificate: farkas }
        }
        LpOutcome::Unbounded => return Err(Error::Corrupt("feasibility program reported unbounded".into())),
    };
    Ok(NetIntersection { m: net.m, net_size: count, resolution: net.resolution, outcome })
}

/// One hypothesis-satisfying `w^{(λ)}` per net point, with entries in `[−C, C]` on a `1/8` grid.
pub fn random_net_family(net: &SimplexNet, seed: u64) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = floor_q(&(&net.c * qi(8))).to_i64().unwrap_or(8).max(1);
    let floor = Q::one() - &net.epsilon;
    net.lambda
        .iter()
        .map(|l| loop {
            let w: Vec<Q> = (0..net.m).map(|_| q(rng.gen_range(-top..=top), 8)).collect();
            if w.iter().zip(l).fold(Q::zero(), |a, (x, y)| a + x * y) >= floor {
                break w;
            }
        })
        .collect()
}

/// Exact `ℓ_1` distance.
pub fn l1_distance(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |s, (x, y)| s + abs_q(&(x - y)))
}
