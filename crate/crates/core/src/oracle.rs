//! Brute-force checks that do not depend on the decision procedure: the
//! set-form inequality in exact integers, the function-form inequality in
//! floating point, explicit counterexample families, and a bounded-height
//! polytope built straight from the enumerator.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datum::{classify, Criticality, ExponentTuple, HblDatum};
use crate::enumerate::subspaces_up_to_height;
use crate::error::{Error, Result};
use crate::linalg::{rref, RationalMatrix, Subspace};
use crate::polytope::{from_rank_constraints, Polytope};
use crate::rational::Rational;

/// A finite nonempty set of integer points, kept sorted and duplicate free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<i64>>,
}

impl PointSet {
    pub fn new(dim: usize, points: impl IntoIterator<Item = Vec<i64>>) -> Result<Self> {
        let set: BTreeSet<Vec<i64>> = points.into_iter().collect();
        if let Some(p) = set.iter().find(|p| p.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: p.len(),
            });
        }
        Ok(PointSet {
            dim,
            points: set.into_iter().collect(),
        })
    }

    pub fn singleton(point: Vec<i64>) -> Self {
        PointSet {
            dim: point.len(),
            points: vec![point],
        }
    }

    /// The box {0, …, n−1}^dim.
    pub fn grid(dim: usize, n: i64) -> Self {
        let mut points = vec![vec![]];
        for _ in 0..dim {
            points = points
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (0..n).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        PointSet { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }
}

impl TryFrom<Vec<Vec<i64>>> for PointSet {
    type Error = Error;

    fn try_from(points: Vec<Vec<i64>>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        PointSet::new(dim, points)
    }
}

impl From<PointSet> for Vec<Vec<i64>> {
    fn from(set: PointSet) -> Self {
        set.points
    }
}

/// A nonnegative function with finite support on ℤ^k. Zero values are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FunctionTable {
    values: BTreeMap<Vec<i64>, Rational>,
}

impl FunctionTable {
    pub fn new(entries: impl IntoIterator<Item = (Vec<i64>, Rational)>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (x, v) in entries {
            if v.is_negative() {
                return Err(Error::Precondition(format!("function value {v} is negative")));
            }
            if !v.is_zero() {
                values.insert(x, v);
            }
        }
        Ok(FunctionTable { values })
    }

    /// The indicator function of a set.
    pub fn indicator<'a>(points: impl IntoIterator<Item = &'a Vec<i64>>) -> Self {
        FunctionTable {
            values: points.into_iter().map(|p| (p.clone(), Rational::one())).collect(),
        }
    }

    pub fn get(&self, x: &[i64]) -> Option<&Rational> {
        self.values.get(x)
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<i64>, &Rational)> {
        self.values.iter()
    }

    /// ‖f‖_{1/s}, with s = 0 read as the supremum norm.
    pub fn norm(&self, s: &Rational) -> f64 {
        if s.is_zero() {
            return self.values.values().map(Rational::to_f64).fold(0.0, f64::max);
        }
        let p = 1.0 / s.to_f64();
        let sum: f64 = self.values.values().map(|v| v.to_f64().powf(p)).sum();
        sum.powf(s.to_f64())
    }
}

#[derive(Serialize, Deserialize)]
struct FunctionEntry {
    point: Vec<i64>,
    value: Rational,
}

impl Serialize for FunctionTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<FunctionEntry> = self
            .values
            .iter()
            .map(|(p, v)| FunctionEntry {
                point: p.clone(),
                value: v.clone(),
            })
            .collect();
        entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FunctionTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<FunctionEntry>::deserialize(deserializer)?;
        FunctionTable::new(entries.into_iter().map(|e| (e.point, e.value)))
            .map_err(serde::de::Error::custom)
    }
}

/// Outcome of one exact set-form comparison |E|^L ≤ ∏ |φ_j(E)|^{s_j L}.
#[derive(Clone, Debug, PartialEq)]
pub struct SetCheck {
    pub holds: bool,
    pub lhs_pow: BigUint,
    pub rhs_pow: BigUint,
    /// ln |E| − Σ s_j ln |φ_j(E)|; positive exactly when the inequality fails.
    pub ratio_log: f64,
}

impl SetCheck {
    pub fn is_equality(&self) -> bool {
        self.lhs_pow == self.rhs_pow
    }
}

fn integer_rows(m: &RationalMatrix) -> Option<Vec<Vec<i64>>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x.to_integer()?.to_i64()).collect())
        .collect()
}

fn apply_big(m: &RationalMatrix, x: &[i64]) -> Vec<Rational> {
    let xr: Vec<Rational> = x.iter().map(|&v| Rational::from(v)).collect();
    m.mul_vec(&xr).expect("dimension checked")
}

fn image_size(m: &RationalMatrix, points: &[Vec<i64>]) -> usize {
    match integer_rows(m) {
        Some(rows) => {
            let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(points.len());
            let mut overflow = false;
            for x in points {
                let img: Option<Vec<i64>> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .zip(x)
                            .try_fold(0i64, |acc, (a, b)| acc.checked_add(a.checked_mul(*b)?))
                    })
                    .collect();
                match img {
                    Some(v) => {
                        seen.insert(v);
                    }
                    None => {
                        overflow = true;
                        break;
                    }
                }
            }
            if !overflow {
                return seen.len();
            }
            points.iter().map(|x| apply_big(m, x)).collect::<HashSet<_>>().len()
        }
        None => points.iter().map(|x| apply_big(m, x)).collect::<HashSet<_>>().len(),
    }
}

/// Exact check of |E| ≤ ∏_j |φ_j(E)|^{s_j}, raised to the power L = lcm of
/// the denominators of s.
pub fn verify_set_inequality(datum: &HblDatum, s: &ExponentTuple, e: &PointSet) -> Result<SetCheck> {
    if e.is_empty() {
        return Err(Error::Precondition("the point set is empty".into()));
    }
    if e.dim() != datum.ambient_dim() {
        return Err(Error::AmbientMismatch {
            expected: datum.ambient_dim(),
            found: e.dim(),
        });
    }
    if s.len() != datum.num_maps() {
        return Err(Error::LengthMismatch {
            expected: datum.num_maps(),
            found: s.len(),
        });
    }
    s.check_unit_box()?;
    let l = Rational::common_denominator(s.values());
    let l_u32 = l
        .to_u32()
        .ok_or_else(|| Error::IntegerOverflow(format!("common denominator {l} is too large")))?;

    let size = e.len();
    let lhs_pow = BigUint::from(size).pow(l_u32);
    let mut rhs_pow = BigUint::one();
    let mut log_rhs = 0.0;
    for (j, sj) in s.values().iter().enumerate() {
        let img = image_size(datum.map(j), e.points());
        let exp = (sj.numer() * (&l / sj.denom()))
            .to_u32()
            .expect("s_j L ≤ L fits");
        rhs_pow *= BigUint::from(img).pow(exp);
        log_rhs += sj.to_f64() * (img as f64).ln();
    }
    Ok(SetCheck {
        holds: lhs_pow <= rhs_pow,
        ratio_log: (size as f64).ln() - log_rhs,
        lhs_pow,
        rhs_pow,
    })
}

/// Outcome of the floating-point function-form comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks Σ_x ∏_j f_j(φ_j x) ≤ ∏_j ‖f_j‖_{1/s_j} up to relative tolerance `tol`.
///
/// The sum runs over the x whose images all land in the supports. Those are
/// found by choosing maps whose stacked matrix is injective and solving for x
/// from each combination of their support points. If all maps share a
/// nonzero kernel and the candidate set is nonempty the sum is infinite and
/// the instance is rejected.
pub fn verify_function_inequality(
    datum: &HblDatum,
    s: &ExponentTuple,
    f: &[FunctionTable],
    tol: f64,
) -> Result<FunctionCheck> {
    let m = datum.num_maps();
    let d = datum.ambient_dim();
    if f.len() != m || s.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            found: if f.len() != m { f.len() } else { s.len() },
        });
    }
    s.check_unit_box()?;
    for (j, table) in f.iter().enumerate() {
        if let Some((p, _)) = table.entries().find(|(p, _)| p.len() != datum.map(j).rows()) {
            return Err(Error::LengthMismatch {
                expected: datum.map(j).rows(),
                found: p.len(),
            });
        }
    }

    let rhs: f64 = f.iter().zip(s.values()).map(|(t, sj)| t.norm(sj)).product();
    if f.iter().any(|t| t.support_len() == 0) {
        return Ok(FunctionCheck {
            holds: true,
            lhs: 0.0,
            rhs,
        });
    }

    // greedily pick maps until the stack is injective
    let mut chosen = Vec::new();
    let mut stack = RationalMatrix::zeros(0, d);
    for j in 0..m {
        if stack.rank() == d {
            break;
        }
        let next = stack.vstack(datum.map(j))?;
        if next.rank() > stack.rank() {
            stack = next;
            chosen.push(j);
        }
    }
    if stack.rank() < d {
        return Err(Error::Unsupported(
            "the maps share a nonzero kernel, so the sum runs over an infinite set".into(),
        ));
    }

    // x = P y where y stacks the chosen images; P inverts d independent rows
    let independent = rref(&stack.transpose()).pivots;
    let square = RationalMatrix::from_rows(
        independent.iter().map(|&r| stack.row(r).to_vec()).collect(),
        d,
    )?;
    let inverse = invert(&square)?;

    let mut lhs = Rational::zero();
    let supports: Vec<Vec<(&Vec<i64>, &Rational)>> =
        chosen.iter().map(|&j| f[j].entries().collect()).collect();
    let mut cursor = vec![0usize; chosen.len()];
    'outer: loop {
        let y: Vec<Rational> = cursor
            .iter()
            .zip(&supports)
            .flat_map(|(&c, sup)| sup[c].0.iter().map(|&v| Rational::from(v)))
            .collect();
        let y_sel: Vec<Rational> = independent.iter().map(|&r| y[r].clone()).collect();
        let x = inverse.mul_vec(&y_sel)?;
        if x.iter().all(Rational::is_integer) && stack.mul_vec(&x)? == y {
            let xi: Option<Vec<i64>> = x.iter().map(|v| v.to_integer()?.to_i64()).collect();
            if let Some(xi) = xi {
                let mut term = Rational::one();
                for (j, table) in f.iter().enumerate() {
                    let img: Option<Vec<i64>> = apply_big(datum.map(j), &xi)
                        .iter()
                        .map(|v| v.to_integer()?.to_i64())
                        .collect();
                    match img.as_deref().and_then(|p| table.get(p)) {
                        Some(v) => term *= v,
                        None => {
                            term = Rational::zero();
                            break;
                        }
                    }
                }
                lhs += &term;
            }
        }
        for k in (0..cursor.len()).rev() {
            cursor[k] += 1;
            if cursor[k] < supports[k].len() {
                continue 'outer;
            }
            cursor[k] = 0;
        }
        break;
    }

    let lhs = lhs.to_f64();
    Ok(FunctionCheck {
        holds: lhs <= rhs * (1.0 + tol),
        lhs,
        rhs,
    })
}

fn invert(a: &RationalMatrix) -> Result<RationalMatrix> {
    let n = a.rows();
    let aug = RationalMatrix::from_rows(
        (0..n)
            .map(|i| {
                let mut row = a.row(i).to_vec();
                row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                row
            })
            .collect(),
        2 * n,
    )?;
    let r = rref(&aug);
    if r.rank < n || r.pivots[n - 1] >= n {
        return Err(Error::Shape("matrix is singular".into()));
    }
    RationalMatrix::from_rows(
        (0..n).map(|i| r.matrix.row(i)[n..].to_vec()).collect(),
        n,
    )
}

/// E_N = {Σ n_i e_i : 1 ≤ n_i ≤ N} for a primitive integer basis e_i of a
/// supercritical subspace H. For large N these sets violate the inequality.
pub fn counterexample_family(
    datum: &HblDatum,
    s: &ExponentTuple,
    h: &Subspace,
    n: usize,
) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::Precondition("N must be at least 1".into()));
    }
    if classify(datum, h, s)? != Criticality::Supercritical {
        return Err(Error::Precondition(format!(
            "the subspace is not supercritical with respect to {s}"
        )));
    }
    let basis: Vec<Vec<i64>> = h
        .integer_basis()
        .into_iter()
        .map(|row| row.iter().map(BigInt::to_i64).collect::<Option<Vec<i64>>>())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::IntegerOverflow("basis entries exceed 64 bits".into()))?;
    let d = h.ambient_dim();
    let mut points = vec![vec![0i64; d]];
    for e in &basis {
        let mut next = Vec::with_capacity(points.len() * n);
        for p in &points {
            for k in 1..=n as i64 {
                let q: Option<Vec<i64>> = p
                    .iter()
                    .zip(e)
                    .map(|(a, b)| a.checked_add(b.checked_mul(k)?))
                    .collect();
                next.push(q.ok_or_else(|| Error::IntegerOverflow("point coordinates exceed 64 bits".into()))?);
            }
        }
        points = next;
    }
    PointSet::new(d, points)
}

/// The outer approximation cut out by every subspace of height ≤ `height`.
pub fn brute_force_constraints(datum: &HblDatum, height: usize) -> Result<Polytope> {
    if height == 0 {
        return Err(Error::Precondition("height must be at least 1".into()));
    }
    from_rank_constraints(datum, &subspaces_up_to_height(datum.ambient_dim(), height))
}

/// Summary of a batch of set-form checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub violations: Vec<PointSet>,
    pub worst_ratio_log: f64,
}

/// A reproducible generator for sample `index` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetShape {
    Uniform,
    Grid,
    Line,
    Cosets,
}

const SHAPES: [SetShape; 4] = [SetShape::Uniform, SetShape::Grid, SetShape::Line, SetShape::Cosets];

/// A random nonempty point set in [−bound, bound]^d with at most `max_size`
/// points. The structured shapes sit close to equality cases.
pub fn random_point_set(
    rng: &mut impl Rng,
    d: usize,
    bound: i64,
    max_size: usize,
    shape: SetShape,
) -> PointSet {
    let max_size = max_size.max(1);
    let in_box = |p: &Vec<i64>| p.iter().all(|x| x.abs() <= bound);
    let random_point = |rng: &mut dyn rand::RngCore| -> Vec<i64> {
        (0..d).map(|_| rng.gen_range(-bound..=bound)).collect()
    };
    let mut points: Vec<Vec<i64>> = match shape {
        SetShape::Uniform => {
            let n = rng.gen_range(1..=max_size);
            (0..n).map(|_| random_point(rng)).collect()
        }
        SetShape::Grid => {
            let mut lens = vec![1usize; d];
            let mut total = 1;
            for len in lens.iter_mut() {
                let cap = (max_size / total).clamp(1, (2 * bound + 1) as usize);
                *len = rng.gen_range(1..=cap);
                total *= *len;
            }
            let corner: Vec<i64> = lens
                .iter()
                .map(|&l| rng.gen_range(-bound..=bound - l as i64 + 1))
                .collect();
            let mut pts = vec![vec![]];
            for (i, &l) in lens.iter().enumerate() {
                pts = pts
                    .into_iter()
                    .flat_map(|p: Vec<i64>| {
                        let c = corner[i];
                        (0..l as i64).map(move |k| {
                            let mut q = p.clone();
                            q.push(c + k);
                            q
                        })
                    })
                    .collect();
            }
            pts
        }
        SetShape::Line => {
            let start = random_point(rng);
            let step: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
            let n = rng.gen_range(1..=max_size);
            (0..n as i64)
                .map(|k| start.iter().zip(&step).map(|(a, b)| a + k * b).collect())
                .take_while(in_box)
                .collect()
        }
        SetShape::Cosets => {
            let copies = rng.gen_range(1..=4usize);
            let per = (max_size / copies).max(1);
            let side = (1..=per).rev().find(|&k| k.pow(d as u32) <= per).unwrap_or(1) as i64;
            let side = rng.gen_range(1..=side.clamp(1, 2 * bound + 1));
            let mut pts = Vec::new();
            for _ in 0..copies {
                let corner: Vec<i64> = (0..d).map(|_| rng.gen_range(-bound..=bound - side + 1)).collect();
                let mut block = vec![vec![]];
                for c in &corner {
                    block = block
                        .into_iter()
                        .flat_map(|p: Vec<i64>| {
                            let c = *c;
                            (0..side).map(move |k| {
                                let mut q = p.clone();
                                q.push(c + k);
                                q
                            })
                        })
                        .collect();
                }
                pts.extend(block);
            }
            pts
        }
    };
    points.retain(in_box);
    points.truncate(max_size);
    if points.is_empty() {
        points.push(vec![0; d]);
    }
    PointSet::new(d, points).expect("all points have length d")
}

/// `samples` seeded random point sets (cycling through the shapes), each
/// checked exactly.
pub fn verify_sets_batch(
    datum: &HblDatum,
    s: &ExponentTuple,
    samples: usize,
    seed: u64,
    bound: i64,
    max_size: usize,
) -> Result<VerifyReport> {
    let mut report = VerifyReport {
        trials: 0,
        violations: Vec::new(),
        worst_ratio_log: f64::NEG_INFINITY,
    };
    for i in 0..samples {
        let mut rng = sample_rng(seed, i as u64);
        let e = random_point_set(&mut rng, datum.ambient_dim(), bound, max_size, SHAPES[i % SHAPES.len()]);
        let check = verify_set_inequality(datum, s, &e)?;
        report.trials += 1;
        report.worst_ratio_log = report.worst_ratio_log.max(check.ratio_log);
        if !check.holds {
            report.violations.push(e);
        }
    }
    Ok(report)
}

/// A random datum with ambient dimension in 1..=max_d, 1..=max_m maps, each
/// map having between 1 and d rows, and entries in [−bound, bound].
pub fn random_datum(rng: &mut impl Rng, max_d: usize, max_m: usize, bound: i64) -> HblDatum {
    let d = rng.gen_range(1..=max_d);
    let m = rng.gen_range(1..=max_m);
    let maps: Vec<Vec<Vec<i64>>> = (0..m)
        .map(|_| {
            let rows = rng.gen_range(1..=d);
            (0..rows)
                .map(|_| (0..d).map(|_| rng.gen_range(-bound..=bound)).collect())
                .collect()
        })
        .collect();
    HblDatum::from_integer_maps(d, &maps).expect("shapes are consistent")
}

/// A random table with support in [−bound, bound]^k and values p/q with
/// 1 ≤ p, q ≤ 10.
pub fn random_function_table(rng: &mut impl Rng, k: usize, bound: i64, max_support: usize) -> FunctionTable {
    let n = rng.gen_range(1..=max_support.max(1));
    let entries: Vec<(Vec<i64>, Rational)> = (0..n)
        .map(|_| {
            let p: Vec<i64> = (0..k).map(|_| rng.gen_range(-bound..=bound)).collect();
            (p, Rational::new(rng.gen_range(1..=10i64), rng.gen_range(1..=10i64)))
        })
        .collect();
    FunctionTable::new(entries).expect("values are positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::named::*;

    fn tuple(text: &str) -> ExponentTuple {
        ExponentTuple::parse(text).unwrap()
    }

    fn line(v: &[i64]) -> Subspace {
        Subspace::span_i64(&[v.to_vec()], v.len()).unwrap()
    }

    #[test]
    fn singletons_are_equalities() {
        for (datum, s) in [
            (matmul(), tuple("1/2,1/2,1/2")),
            (matmul(), tuple("1,1,0")),
            (loomis_whitney_2d(), tuple("1,1")),
            (identity(3), tuple("1")),
        ] {
            let c = verify_set_inequality(&datum, &s, &PointSet::singleton(vec![3; datum.ambient_dim()])).unwrap();
            assert!(c.holds && c.is_equality());
        }
    }

    #[test]
    fn grid_equality_cases() {
        let c = verify_set_inequality(&loomis_whitney_2d(), &tuple("1,1"), &PointSet::grid(2, 5)).unwrap();
        assert!(c.is_equality());
        assert_eq!(c.lhs_pow, BigUint::from(25u32));

        let c = verify_set_inequality(&matmul(), &tuple("1/2,1/2,1/2"), &PointSet::grid(3, 4)).unwrap();
        assert!(c.is_equality());
        // (4^3)^2 = (4^2)^3
        assert_eq!(c.lhs_pow, BigUint::from(4096u32));
    }

    #[test]
    fn empty_set_rejected() {
        let e = PointSet::new(3, Vec::<Vec<i64>>::new()).unwrap();
        assert!(verify_set_inequality(&matmul(), &tuple("1,1,1"), &e).is_err());
    }

    #[test]
    fn matmul_counterexample() {
        let s = tuple("1/2,1/2,1/4");
        let e = counterexample_family(&matmul(), &s, &Subspace::full(3), 2).unwrap();
        assert_eq!(e.len(), 8);
        let c = verify_set_inequality(&matmul(), &s, &e).unwrap();
        assert!(!c.holds);
        assert_eq!(c.lhs_pow, BigUint::from(4096u32));
        assert_eq!(c.rhs_pow, BigUint::from(1024u32));
    }

    #[test]
    fn loomis_whitney_line_counterexample() {
        let s = tuple("0,1");
        let h = line(&[1, 0]);
        let c = verify_set_inequality(&loomis_whitney_2d(), &s, &counterexample_family(&loomis_whitney_2d(), &s, &h, 2).unwrap()).unwrap();
        assert!(!c.holds);
        assert!(counterexample_family(&matmul(), &tuple("1,1,1"), &Subspace::full(3), 2).is_err());
    }

    #[test]
    fn brute_force_examples() {
        let pts = |p: Polytope| -> Vec<Vec<Rational>> { p.extreme_points().into_iter().map(|v| v.point).collect() };
        assert_eq!(pts(brute_force_constraints(&loomis_whitney_2d(), 1).unwrap()), vec![vec![Rational::one(); 2]]);
        assert_eq!(pts(brute_force_constraints(&identity(1), 1).unwrap()), vec![vec![Rational::one()]]);
        assert_eq!(pts(brute_force_constraints(&matmul(), 1).unwrap()).len(), 5);
        assert!(brute_force_constraints(&matmul(), 0).is_err());
    }

    #[test]
    fn indicator_functions_reduce_to_sets() {
        let datum = matmul();
        let s = tuple("1/2,1/2,1/2");
        let e = PointSet::grid(3, 3);
        let f: Vec<FunctionTable> = (0..3)
            .map(|j| {
                let img: BTreeSet<Vec<i64>> = e
                    .points()
                    .iter()
                    .map(|x| apply_big(datum.map(j), x).iter().map(|v| v.to_integer().unwrap().to_i64().unwrap()).collect())
                    .collect();
                FunctionTable::indicator(img.iter())
            })
            .collect();
        let c = verify_function_inequality(&datum, &s, &f, 1e-9).unwrap();
        assert!(c.holds);
        assert!((c.lhs - 27.0).abs() < 1e-9 && (c.rhs - 27.0).abs() < 1e-6);
    }

    #[test]
    fn injective_single_map_is_an_l1_bound() {
        let f = FunctionTable::new([(vec![0, 0], Rational::new(1, 2)), (vec![1, 2], Rational::from(3))]).unwrap();
        let c = verify_function_inequality(&identity(2), &tuple("1"), &[f], 0.0).unwrap();
        assert!(c.holds);
        assert_eq!(c.lhs, 3.5);
        assert!((c.rhs - 3.5).abs() < 1e-12);
    }

    #[test]
    fn shared_kernel_is_unsupported() {
        let d = HblDatum::from_integer_maps(2, &[vec![vec![1, 0]], vec![vec![2, 0]]]).unwrap();
        let f = vec![FunctionTable::indicator([vec![0]].iter()); 2];
        assert!(matches!(verify_function_inequality(&d, &tuple("1,1"), &f, 1e-9), Err(Error::Unsupported(_))));
    }

    #[test]
    fn samplers_are_reproducible_and_in_bounds() {
        for (i, shape) in SHAPES.iter().enumerate() {
            let a = random_point_set(&mut sample_rng(7, i as u64), 3, 10, 100, *shape);
            let b = random_point_set(&mut sample_rng(7, i as u64), 3, 10, 100, *shape);
            assert_eq!(a, b);
            assert!(!a.is_empty() && a.len() <= 100);
            assert!(a.points().iter().flatten().all(|x| x.abs() <= 10));
        }
    }

    #[test]
    fn point_set_json() {
        let e = PointSet::new(2, vec![vec![1, 2], vec![0, 0], vec![1, 2]]).unwrap();
        assert_eq!(serde_json::to_string(&e).unwrap(), "[[0,0],[1,2]]");
        let back: PointSet = serde_json::from_str("[[1,2],[0,0]]").unwrap();
        assert_eq!(back, e);
        let report = VerifyReport { trials: 3, violations: vec![], worst_ratio_log: 0.0 };
        assert_eq!(serde_json::to_string(&report).unwrap(), r#"{"trials":3,"violations":[],"worst_ratio_log":0.0}"#);
    }
}
