use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, precondition, Error, Result};
use crate::extraction::Exponent;
use crate::lp::{solve, Constraint, LinearProgram, LpOutcome, Relation};
use crate::rational::{from_f64, q, qi, to_f64, Q};

use super::hull::{conjugate, hull_member, norm_exact, norm_f64, VectorFamily};

/// Matrix of a linear map `ℓ_q^n → ℓ_∞^m`, stored row-major (`m × n`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearMapData {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "crate::rational::serde_q_mat")]
    pub matrix: Vec<Vec<Q>>,
    /// Domain exponent; `Finite(1)` is `ℓ_1`.
    #[serde(rename = "domainExponent")]
    pub q: Exponent,
}

impl LinearMapData {
    pub fn new(matrix: Vec<Vec<Q>>, q: Exponent) -> Result<Self> {
        let rows = matrix.len();
        if rows == 0 {
            return Err(invalid("matrix has no rows"));
        }
        let cols = matrix[0].len();
        if cols == 0 {
            return Err(invalid("matrix has no columns"));
        }
        for r in &matrix {
            if r.len() != cols {
                return Err(Error::SizeMismatch { expected: cols, found: r.len() });
            }
        }
        if let Exponent::Finite(qq) = &q {
            if *qq < Q::one() {
                return Err(invalid("domain exponent must be at least 1"));
            }
        }
        Ok(Self { rows, cols, matrix, q })
    }

    pub fn identity(n: usize, q: Exponent) -> Result<Self> {
        let m = (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
        Self::new(m, q)
    }

    pub fn apply(&self, x: &[Q]) -> Vec<Q> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).fold(Q::zero(), |s, t| s + t))
            .collect()
    }

    /// `‖Φ‖` from `ℓ_q` to `ℓ_∞`: the largest dual norm of a row.
    pub fn operator_norm(&self) -> NormValue {
        let p = conjugate(&self.q);
        match self.matrix.iter().map(|r| norm_exact(r, &p)).collect::<Option<Vec<_>>>() {
            Some(ns) => NormValue::exact(ns.into_iter().max().unwrap_or_else(Q::zero)),
            None => NormValue::sampled(self.matrix.iter().map(|r| norm_f64(r, &p)).fold(0.0, f64::max)),
        }
    }

    /// `min ‖Φx‖_∞` over the unit sphere of `ℓ_q^n`, i.e. `1/‖Φ^{-1}‖`.
    ///
    /// Exact facet-by-facet programs for `q ∈ {1, ∞}`; seeded direction sample otherwise.
    pub fn lower_bound(&self, samples: usize, seed: u64) -> Result<NormValue> {
        match &self.q {
            Exponent::Finite(qq) if qq.is_one() => {
                let n = self.cols;
                if n > 20 {
                    return Err(Error::TooLarge(format!("2^{} ℓ_1 facets", n - 1)));
                }
                let mut best: Option<Q> = None;
                for code in 0..1u64 << (n - 1) {
                    let signs: Vec<Q> =
                        (0..n).map(|j| if j > 0 && code >> (j - 1) & 1 == 1 { -Q::one() } else { Q::one() }).collect();
                    let v = self.facet_min(&signs, None)?;
                    best = Some(best.map_or(v.clone(), |b| b.min(v)));
                }
                Ok(NormValue::exact(best.expect("at least one facet")))
            }
            Exponent::Infinity => {
                let mut best: Option<Q> = None;
                for k in 0..self.cols {
                    let v = self.facet_min(&[], Some(k))?;
                    best = Some(best.map_or(v.clone(), |b| b.min(v)));
                }
                Ok(NormValue::exact(best.expect("at least one facet")))
            }
            Exponent::Finite(qq) => {
                let qf = to_f64(qq);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut best = f64::INFINITY;
                for _ in 0..samples.max(1) {
                    let x: Vec<f64> = (0..self.cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let nx = x.iter().map(|v: &f64| v.abs().powf(qf)).sum::<f64>().powf(1.0 / qf);
                    if nx == 0.0 {
                        continue;
                    }
                    let img = self
                        .matrix
                        .iter()
                        .map(|r| r.iter().zip(&x).map(|(a, b)| to_f64(a) * b).sum::<f64>().abs())
                        .fold(0.0, f64::max);
                    best = best.min(img / nx);
                }
                Ok(NormValue::sampled(best))
            }
        }
    }

    // ℓ_1 facet: x = signs ⊙ y with y ≥ 0, Σy = 1.
    // ℓ_∞ facet k: x_k = 1, x_j = y_j − 1 with 0 ≤ y_j ≤ 2.
    fn facet_min(&self, signs: &[Q], pinned: Option<usize>) -> Result<Q> {
        let n = self.cols;
        let u = n;
        let mut rows = Vec::new();
        let mut offsets = vec![Q::zero(); self.rows];
        let coeff_of = |row: &[Q], j: usize| -> Q {
            match pinned {
                None => &row[j] * &signs[j],
                Some(k) if j == k => Q::zero(),
                Some(_) => row[j].clone(),
            }
        };
        if let Some(k) = pinned {
            for (i, row) in self.matrix.iter().enumerate() {
                offsets[i] = &row[k] - row.iter().enumerate().filter(|&(j, _)| j != k).fold(Q::zero(), |a, (_, v)| a + v);
            }
            for j in 0..n {
                let mut c = vec![Q::zero(); n + 1];
                c[j] = Q::one();
                rows.push(Constraint::new(c, Relation::Le, if j == k { Q::zero() } else { qi(2) }));
            }
        } else {
            let mut c = vec![Q::one(); n + 1];
            c[u] = Q::zero();
            rows.push(Constraint::new(c, Relation::Eq, Q::one()));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            let base: Vec<Q> = (0..n).map(|j| coeff_of(row, j)).collect();
            // offset + base·y ≤ u and −offset − base·y ≤ u
            let mut up = base.clone();
            up.push(-Q::one());
            rows.push(Constraint::new(up, Relation::Le, -offsets[i].clone()));
            let mut down: Vec<Q> = base.iter().map(|v| -v).collect();
            down.push(-Q::one());
            rows.push(Constraint::new(down, Relation::Le, offsets[i].clone()));
        }
        let mut objective = vec![Q::zero(); n + 1];
        objective[u] = Q::one();
        let lp = LinearProgram { num_vars: n + 1, objective, constraints: rows };
        match solve(&lp)? {
            LpOutcome::Optimal { value, .. } => Ok(value),
            _ => Err(Error::Corrupt("facet program has no optimum".into())),
        }
    }
}

/// A norm value, exact when computed by rational arithmetic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormValue {
    #[serde(with = "crate::rational::serde_q")]
    pub value: Q,
    pub exact: bool,
}

impl NormValue {
    fn exact(value: Q) -> Self {
        Self { value, exact: true }
    }

    fn sampled(v: f64) -> Self {
        Self { value: from_f64(v), exact: false }
    }
}

/// Rows `⟨x, ε⟩` over sign vectors `ε` with `ε_1 = +1`, as an isometry `ℓ_1^n → ℓ_∞^{2^{n−1}}`.
///
/// Row `r` has `ε_i = −1` exactly when bit `n−i` of `r` is set, so the rows run `+` before `−`.
pub fn sign_embedding(n: usize) -> Result<LinearMapData> {
    if n == 0 {
        return Err(invalid("need n ≥ 1"));
    }
    if n > 21 {
        return Err(Error::TooLarge(format!("2^{} rows", n - 1)));
    }
    let m = 1usize << (n - 1);
    let matrix = (0..m)
        .map(|r| {
            (0..n)
                .map(|i| if i > 0 && r >> (n - 1 - i) & 1 == 1 { -Q::one() } else { Q::one() })
                .collect()
        })
        .collect();
    LinearMapData::new(matrix, Exponent::Finite(Q::one()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DualImage {
    /// `Φ*(±e_i)` after dividing `Φ` by `scale`; `+` rows first, then `−` rows.
    pub family: VectorFamily,
    pub scale: NormValue,
    pub duality_checks: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub ball_radius: Q,
    pub ball_directions: usize,
    pub ball_contained: bool,
    /// False when containment was checked on sampled directions only.
    pub ball_exact: bool,
}

/// Vertices of `B_r(ℓ_p^n)` for `p ∈ {1, ∞}`.
fn ball_vertices(n: usize, p: &Exponent, r: &Q) -> Option<Vec<Vec<Q>>> {
    match p {
        Exponent::Infinity => Some(
            (0..1u64 << n)
                .map(|code| (0..n).map(|i| if code >> i & 1 == 1 { -r.clone() } else { r.clone() }).collect())
                .collect(),
        ),
        Exponent::Finite(pp) if pp.is_one() => Some(
            (0..2 * n)
                .map(|k| {
                    let mut v = vec![Q::zero(); n];
                    v[k / 2] = if k % 2 == 0 { r.clone() } else { -r.clone() };
                    v
                })
                .collect(),
        ),
        Exponent::Finite(_) => None,
    }
}

fn sampled_sphere(n: usize, p: &Exponent, r: &Q, count: usize, seed: u64) -> Vec<Vec<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shrink = to_f64(r) * (1.0 - 1e-9);
    (0..count)
        .filter_map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xq: Vec<Q> = x.iter().map(|&v| from_f64(v)).collect();
            let nx = norm_f64(&xq, p);
            (nx > 0.0).then(|| x.iter().map(|v| from_f64(v / nx * shrink)).collect())
        })
        .collect()
}

fn random_rational_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    (0..n).map(|_| q(rng.gen_range(-50..=50), rng.gen_range(1..=12))).collect()
}

/// `E′ = Φ*(±e_i)` for the normalised map, with the duality and `B_{1/C}` containment checks.
pub fn dual_image(phi: &LinearMapData, c: &Q, samples: usize, seed: u64) -> Result<DualImage> {
    if !c.is_positive() {
        return Err(invalid("C must be positive"));
    }
    let scale = phi.operator_norm();
    if !scale.value.is_positive() {
        return Err(precondition("cannot normalise the zero map"));
    }
    let s = if scale.exact { scale.value.clone() } else { from_f64(to_f64(&scale.value) * (1.0 + 1e-12)) };
    let normalised: Vec<Vec<Q>> = phi.matrix.iter().map(|r| r.iter().map(|v| v / &s).collect()).collect();
    let p = conjugate(&phi.q);
    let mut vectors = normalised.clone();
    vectors.extend(normalised.iter().map(|r| r.iter().map(|v| -v).collect::<Vec<_>>()));
    let family = VectorFamily::new(phi.cols, vectors, p.clone())?;
    if !family.in_unit_ball() {
        return Err(precondition("normalised dual rows leave the unit ball"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let duality_checks = samples.max(1);
    let scaled = LinearMapData::new(normalised.clone(), phi.q.clone())?;
    for _ in 0..duality_checks {
        let x = random_rational_vector(&mut rng, phi.cols);
        let img = scaled.apply(&x);
        for (i, row) in normalised.iter().enumerate() {
            let pairing = row.iter().zip(&x).map(|(a, b)| a * b).fold(Q::zero(), |s, t| s + t);
            if pairing != img[i] {
                return Err(Error::Corrupt("duality identity fails".into()));
            }
        }
    }
    let radius = Q::one() / c;
    let (dirs, ball_exact) = match ball_vertices(phi.cols, &p, &radius) {
        Some(v) if phi.cols <= 16 => (v, true),
        _ => (sampled_sphere(phi.cols, &p, &radius, samples.max(1), seed ^ 0x9e37), false),
    };
    let mut ball_contained = true;
    for d in &dirs {
        if hull_member(&family, d)?.coefficients().is_none() {
            ball_contained = false;
            break;
        }
    }
    Ok(DualImage {
        family,
        scale,
        duality_checks,
        ball_radius: radius,
        ball_directions: dirs.len(),
        ball_contained,
        ball_exact,
    })
}
