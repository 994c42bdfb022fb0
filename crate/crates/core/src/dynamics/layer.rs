use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::measure::FiniteMeasure;
use super::shift::{CylinderSet, PatternPoint};
use crate::error::{invalid, precondition, Error, Result};
use crate::rational::{abs_q, fmt_q, q, qi, Q};

/// Function constant on finitely many cylinder cells; the first listed cell containing a point wins.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepFunction {
    pub cells: Vec<StepCell>,
    #[serde(with = "crate::rational::serde_q")]
    pub default: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCell {
    pub cylinder: CylinderSet,
    #[serde(with = "crate::rational::serde_q")]
    pub value: Q,
}

impl StepFunction {
    pub fn new(cells: impl IntoIterator<Item = (CylinderSet, Q)>, default: Q) -> Self {
        Self { cells: cells.into_iter().map(|(cylinder, value)| StepCell { cylinder, value }).collect(), default }
    }

    pub fn eval(&self, x: &PatternPoint) -> Q {
        self.cells.iter().find(|c| c.cylinder.contains(x)).map_or_else(|| self.default.clone(), |c| c.value.clone())
    }

    pub fn integral(&self, mu: &FiniteMeasure) -> Q {
        mu.atoms().iter().map(|a| &a.weight * self.eval(&a.point)).sum()
    }

    fn values(&self) -> impl Iterator<Item = &Q> {
        self.cells.iter().map(|c| &c.value).chain(std::iter::once(&self.default))
    }

    /// Least listed value above `t`, a lower bound for `f` on the closure of `{f > t}`.
    fn min_above(&self, t: &Q) -> Option<Q> {
        self.values().filter(|v| *v > t).min().cloned()
    }

    /// `μ({f > t})`.
    fn superlevel(&self, mu: &FiniteMeasure, t: &Q) -> Q {
        mu.atoms().iter().filter(|a| &self.eval(&a.point) > t).map(|a| a.weight.clone()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LayerCakeSplit {
    #[serde(with = "crate::rational::serde_q")]
    pub t: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub epsilon: Q,
    /// `U_1 = {f_1 > threshold1}`.
    #[serde(with = "crate::rational::serde_q")]
    pub threshold1: Q,
    /// `U_2 = {f_2 > threshold2}`.
    #[serde(with = "crate::rational::serde_q")]
    pub threshold2: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub mass_sum: Q,
    #[serde(with = "crate::rational::serde_q")]
    pub min_sum: Q,
}

/// Finds `t, ε` with `μ_1(f_1 > t + ε) + μ_2(f_2 > −t + ε) > 1`.
///
/// `g(t) = μ_1(f_1 > t) + μ_2(f_2 > −t)` only changes where `t` equals a value of `f_1` or of `−f_2`
/// on the supports, and is never larger at those breakpoints than just left of them, so the
/// scan over one point per open gap is exhaustive. `ε` is half the distance to the nearest breakpoint.
pub fn layer_cake_split(mu1: &FiniteMeasure, mu2: &FiniteMeasure, f1: &StepFunction, f2: &StepFunction) -> Result<LayerCakeSplit> {
    let total = f1.integral(mu1) + f2.integral(mu2);
    if total <= Q::zero() {
        return Err(precondition(format!("μ_1(f_1) + μ_2(f_2) = {} is not positive", fmt_q(&total))));
    }
    let mut breaks: Vec<Q> = mu1.atoms().iter().map(|a| f1.eval(&a.point)).collect();
    breaks.extend(mu2.atoms().iter().map(|a| -f2.eval(&a.point)));
    breaks.sort();
    breaks.dedup();
    let one = Q::one();
    let mut probes = vec![&breaks[0] - &one];
    probes.extend(breaks.windows(2).map(|w| (&w[0] + &w[1]) / qi(2)));
    probes.push(&breaks[breaks.len() - 1] + &one);
    let mut best: Option<(Q, Q)> = None;
    for t in probes {
        let g = f1.superlevel(mu1, &t) + f2.superlevel(mu2, &-&t);
        if g > one && best.as_ref().map_or(true, |b| g > b.1) {
            best = Some((t, g));
        }
    }
    let (t, mass_sum) = best.ok_or_else(|| Error::Corrupt("no threshold splits the masses".into()))?;
    let gap = breaks.iter().map(|b| abs_q(&(b - &t))).min().expect("nonempty breakpoints");
    let epsilon = gap / qi(2);
    let threshold1 = &t + &epsilon;
    let threshold2 = -&t + &epsilon;
    let check = f1.superlevel(mu1, &threshold1) + f2.superlevel(mu2, &threshold2);
    let min_sum = match (f1.min_above(&threshold1), f2.min_above(&threshold2)) {
        (Some(a), Some(b)) => a + b,
        _ => return Err(Error::Corrupt("empty superlevel set".into())),
    };
    if check != mass_sum || min_sum <= Q::zero() {
        return Err(Error::Corrupt(format!("split at t={} fails re-verification", fmt_q(&t))));
    }
    Ok(LayerCakeSplit { t, epsilon, threshold1, threshold2, mass_sum, min_sum })
}

/// A valid random split instance on `{0,1}`-points: step functions on the cells fixed by `x(0), x(1)`.
pub fn random_layer_cake_instance(seed: u64) -> (FiniteMeasure, FiniteMeasure, StepFunction, StepFunction) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<CylinderSet> =
        (0..4).map(|c| CylinderSet::new([(0, (c & 1) as u8), (1, (c >> 1) as u8)])).collect();
    let measure = |rng: &mut ChaCha8Rng| {
        let atoms = rng.gen_range(1..=3);
        let raw: Vec<i64> = (0..atoms).map(|_| rng.gen_range(1..=8)).collect();
        let total: i64 = raw.iter().sum();
        let pts = raw.iter().map(|&w| {
            let core: Vec<(i64, u8)> = (0..3).map(|p| (p, rng.gen_range(0..=1u8))).collect();
            (PatternPoint::new(core, rng.gen_range(0..=1)), q(w, total))
        });
        FiniteMeasure::new(pts.collect::<Vec<_>>()).expect("positive weights summing to 1")
    };
    loop {
        let mu1 = measure(&mut rng);
        let mu2 = measure(&mut rng);
        let func = |rng: &mut ChaCha8Rng| {
            let vals: Vec<Q> = cells.iter().map(|_| q(rng.gen_range(-16..=16), 8)).collect();
            StepFunction::new(cells.iter().cloned().zip(vals), q(rng.gen_range(-16..=16), 8))
        };
        let f1 = func(&mut rng);
        let f2 = func(&mut rng);
        if f1.integral(&mu1) + f2.integral(&mu2) > Q::zero() {
            return (mu1, mu2, f1, f2);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Sum3Outcome {
    pub no_triple: bool,
    #[serde(with = "crate::rational::serde_q")]
    pub sum_mu_f: Q,
    pub triples_checked: usize,
    /// Per `j`, which of `x_j` (bit 0) and `y_j` (bit 1) the offending set contains.
    pub counterexample: Option<[u8; 3]>,
}

/// Searches for closed `A_1, A_2, A_3` with `Σ min_{A_j} f_j > 0` and `Σ μ_j(A_j) > 2`, where `μ_j = ½(δ_{x_j} + δ_{y_j})`.
///
/// Only `A_j ∩ {x_j, y_j}` affects the masses, and the minimum over `A_j` is at most the least value
/// on that intersection, so all 4³ intersection patterns with the most favourable minimum are tried.
/// `values = [f_1(x_1), f_2(x_2), f_3(x_3), f_3(y_3)]` with `f_j(y_j) = −f_j(x_j)` for `j = 1, 2`.
pub fn sum3_audit(points: &[(PatternPoint, PatternPoint)], values: &[Q]) -> Result<Sum3Outcome> {
    if points.len() != 3 || values.len() != 4 {
        return Err(Error::SizeMismatch { expected: 3, found: points.len() });
    }
    if points.iter().any(|(x, y)| x == y) {
        return Err(invalid("x_j and y_j must differ"));
    }
    let (one, two) = (qi(1), qi(2));
    let open = |v: &Q, lo: &Q, hi: &Q| lo < v && v < hi;
    if !values[..3].iter().all(|v| open(v, &one, &two)) || !open(&values[3], &-&two, &-&one) {
        return Err(precondition("values outside the ranges (1,2) and (−2,−1)"));
    }
    if &values[2] + &values[3] <= Q::zero() {
        return Err(precondition("f_3(x_3) + f_3(y_3) must be positive"));
    }
    let pairs = [
        (values[0].clone(), -&values[0]),
        (values[1].clone(), -&values[1]),
        (values[2].clone(), values[3].clone()),
    ];
    let half = q(1, 2);
    let sum_mu_f: Q = pairs.iter().map(|(a, b)| (a + b) * &half).sum();
    let mut counterexample = None;
    'outer: for code in 0..64u32 {
        let pick = [(code & 3) as u8, ((code >> 2) & 3) as u8, ((code >> 4) & 3) as u8];
        let mut mass = Q::zero();
        let mut mins = Q::zero();
        for (j, &m) in pick.iter().enumerate() {
            let (x, y) = &pairs[j];
            match m {
                0 => continue 'outer,
                1 => mins += x,
                2 => mins += y,
                _ => mins += x.min(y),
            }
            mass += if m == 3 { Q::one() } else { half.clone() };
        }
        if mass > two && mins > Q::zero() {
            counterexample = Some(pick);
            break;
        }
    }
    if sum_mu_f <= Q::zero() {
        return Err(Error::Corrupt("Σ μ_j(f_j) not positive for valid values".into()));
    }
    Ok(Sum3Outcome { no_triple: counterexample.is_none(), sum_mu_f, triples_checked: 64, counterexample })
}

/// Values strictly inside the admissible ranges, on a grid of step 1/64.
pub fn random_sum3_values(seed: u64) -> Vec<Q> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = |rng: &mut ChaCha8Rng| q(rng.gen_range(65..=127), 64);
    let a1 = inside(&mut rng);
    let a2 = inside(&mut rng);
    let n3 = rng.gen_range(66..=127);
    let m3 = rng.gen_range(65..n3);
    vec![a1, a2, q(n3, 64), q(-m3, 64)]
}

/// Six distinct points, `x_j` and `y_j` differing at the origin.
pub fn sum3_points() -> Vec<(PatternPoint, PatternPoint)> {
    (0..3).map(|j| (PatternPoint::new([(j, 0)], 1), PatternPoint::new([(j, 1)], 0))).collect()
}
