use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::BasicSystem;
use crate::datum::{rank_tuple, HblDatum};
use crate::error::{Error, Result};
use crate::linalg::{RationalMatrix, Subspace};
use crate::rational::Rational;

/// Rank data f(a) ∈ (Mat_ν(ℤ))^μ for a basic system with q variables,
/// k products and ℓ affine relations, queried at a ∈ ℚ^t.
///
/// Coordinates on ℚ^ν are (u_0, …, u_q; v_0, …, v_q). Basic variable i sits
/// at u_{i+1} and v_{i+1}; u_0 and v_0 are homogenizing coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiophEncoding {
    pub mu: usize,
    pub nu: usize,
    pub rho: usize,
    pub rho_list: Vec<usize>,
    pub maps: Vec<RationalMatrix>,
    pub a: Vec<Rational>,
    /// Basic variables holding the queried coordinates, one per entry of `a`.
    pub query: Vec<usize>,
    /// Basic variables holding x_1, …, x_q of the original system.
    pub projection: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct EncodingJson {
    mu: usize,
    nu: usize,
    rho: usize,
    rho_list: Vec<usize>,
    maps: Vec<Vec<Vec<i64>>>,
    a: Vec<Rational>,
    query: Vec<usize>,
    projection: Vec<usize>,
}

impl DiophEncoding {
    fn q(&self) -> usize {
        (self.nu - 2) / 2
    }

    /// The maps as an HBL datum on ℚ^ν.
    pub fn to_datum(&self) -> HblDatum {
        HblDatum::new(self.nu, self.maps.clone()).expect("maps are ν × ν")
    }

    pub fn to_json_value(&self) -> Result<serde_json::Value> {
        let maps = self
            .maps
            .iter()
            .map(|m| {
                (0..m.rows())
                    .map(|i| {
                        m.row(i)
                            .iter()
                            .map(|x| x.to_integer().and_then(|n| n.to_i64()))
                            .collect::<Option<Vec<i64>>>()
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::IntegerOverflow("a map entry does not fit in 64 bits".into()))?;
        Ok(serde_json::to_value(EncodingJson {
            mu: self.mu,
            nu: self.nu,
            rho: self.rho,
            rho_list: self.rho_list.clone(),
            maps,
            a: self.a.clone(),
            query: self.query.clone(),
            projection: self.projection.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: EncodingJson = serde_json::from_str(text)?;
        if raw.nu < 2 || raw.nu % 2 != 0 {
            return Err(Error::Shape(format!("ν = {} must be even and at least 2", raw.nu)));
        }
        if raw.maps.len() != raw.mu || raw.rho_list.len() != raw.mu {
            return Err(Error::LengthMismatch {
                expected: raw.mu,
                found: raw.maps.len().min(raw.rho_list.len()),
            });
        }
        if raw.query.len() != raw.a.len() {
            return Err(Error::LengthMismatch {
                expected: raw.a.len(),
                found: raw.query.len(),
            });
        }
        let q = (raw.nu - 2) / 2;
        if let Some(&i) = raw.query.iter().chain(&raw.projection).find(|&&i| i >= q) {
            return Err(Error::IndexOutOfRange { index: i, len: q });
        }
        let maps = raw
            .maps
            .iter()
            .map(|rows| {
                if rows.len() != raw.nu {
                    return Err(Error::Shape(format!("a map has {} rows, expected {}", rows.len(), raw.nu)));
                }
                RationalMatrix::from_i64_rows(rows, raw.nu)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DiophEncoding {
            mu: raw.mu,
            nu: raw.nu,
            rho: raw.rho,
            rho_list: raw.rho_list,
            maps,
            a: raw.a,
            query: raw.query,
            projection: raw.projection,
        })
    }
}

/// Builds the ν × ν integer matrix whose first rows are given as sparse
/// (column, coefficient) lists.
fn sparse_map(nu: usize, rows: &[&[(usize, BigInt)]]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(nu, nu);
    for (i, row) in rows.iter().enumerate() {
        for (j, c) in row.iter() {
            m[(i, *j)] += &Rational::from(c.clone());
        }
    }
    m
}

/// Encodes "a extends to a solution of B" with a queried at the first
/// `a.len()` projection variables.
pub fn encode(basic: &BasicSystem, a: &[Rational]) -> Result<DiophEncoding> {
    let t = a.len();
    if t > basic.projection().len() {
        return Err(Error::Precondition(format!(
            "{t} query coordinates but the system has {} original variables",
            basic.projection().len()
        )));
    }
    let q = basic.num_variables();
    let k = basic.mults().len();
    let l = basic.affine().len();
    let nu = 2 * q + 2;
    let mu = 4 + q + t + k + l;
    let (u, v) = (|i: usize| i, |i: usize| q + 1 + i);
    let one = BigInt::one;

    let mut maps = Vec::with_capacity(mu);
    // A–D: u_0, v_0, the u block, the v block
    maps.push(sparse_map(nu, &[&[(u(0), one())]]));
    maps.push(sparse_map(nu, &[&[(v(0), one())]]));
    let block = |at: &dyn Fn(usize) -> usize| {
        let mut m = RationalMatrix::zeros(nu, nu);
        for i in 0..=q {
            m[(i, at(i))] = Rational::one();
        }
        m
    };
    maps.push(block(&u));
    maps.push(block(&v));
    // E: (u_0 − v_0, u_j − v_j)
    for j in 1..=q {
        maps.push(sparse_map(
            nu,
            &[&[(u(0), one()), (v(0), -one())], &[(u(j), one()), (v(j), -one())]],
        ));
    }
    // F: (u_{i1} + v_0, u_{i3} + v_{i2})
    for m in basic.mults() {
        maps.push(sparse_map(
            nu,
            &[
                &[(u(m.left + 1), one()), (v(0), one())],
                &[(u(m.product + 1), one()), (v(m.right + 1), one())],
            ],
        ));
    }
    // G: (p_j u_0 − q_j u_j)
    let query: Vec<usize> = basic.projection()[..t].to_vec();
    for (aj, &var) in a.iter().zip(&query) {
        maps.push(sparse_map(
            nu,
            &[&[(u(0), aj.numer().clone()), (u(var + 1), -aj.denom().clone())]],
        ));
    }
    // H: (λ_0 u_0 + Σ λ_i u_i)
    for rel in basic.affine() {
        let mut row = vec![(u(0), rel.constant.clone())];
        row.extend(rel.coeffs.iter().map(|(&i, c)| (u(i + 1), c.clone())));
        maps.push(sparse_map(nu, &[&row]));
    }
    debug_assert_eq!(maps.len(), mu);

    let mut rho_list = vec![1; 4 + q + k];
    rho_list.extend(std::iter::repeat(0).take(t + l));
    Ok(DiophEncoding {
        mu,
        nu,
        rho: 2,
        rho_list,
        maps,
        a: a.to_vec(),
        query,
        projection: basic.projection().to_vec(),
    })
}

/// V = ℚ(1, c; 0) + ℚ(0; 1, c) for a full solution c of B.
pub fn witness_from_solution(basic: &BasicSystem, c: &[Rational]) -> Result<Subspace> {
    if !basic.is_solution(c) {
        return Err(Error::Precondition("the point does not solve the basic system".into()));
    }
    let q = c.len();
    let mut first = vec![Rational::one()];
    first.extend(c.iter().cloned());
    first.extend((0..=q).map(|_| Rational::zero()));
    let mut second: Vec<Rational> = (0..=q).map(|_| Rational::zero()).collect();
    second.push(Rational::one());
    second.extend(c.iter().cloned());
    Subspace::span(&[first, second], 2 * q + 2)
}

/// Checks dim V = ρ and dim f_i(V) = ρ_i for every i.
pub fn verify_witness(enc: &DiophEncoding, w: &Subspace) -> Result<bool> {
    if w.ambient_dim() != enc.nu {
        return Err(Error::AmbientMismatch {
            expected: enc.nu,
            found: w.ambient_dim(),
        });
    }
    if w.dim() != enc.rho {
        return Ok(false);
    }
    Ok(rank_tuple(&enc.to_datum(), w)?.r_sub == enc.rho_list)
}

/// A point read off a verified witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extracted {
    /// The queried coordinates.
    pub a: Vec<Rational>,
    /// Values of every basic variable.
    pub full: Vec<Rational>,
    /// The point of the original system.
    pub point: Vec<Rational>,
}

/// Row-reduces a basis of V to g = (0; g) and h = (h; 0) with g_0 = h_0 = 1
/// and reads the solution off h.
pub fn extract_solution(enc: &DiophEncoding, w: &Subspace) -> Result<Extracted> {
    if !verify_witness(enc, w)? {
        return Err(Error::Precondition("the subspace is not a witness for this encoding".into()));
    }
    let q = enc.q();
    let rows = w.basis().row_vecs();
    let (mut d, mut e) = (rows[0].clone(), rows[1].clone());
    if d[0].is_zero() {
        std::mem::swap(&mut d, &mut e);
    }
    let invalid = || Error::Precondition("the witness does not reduce as expected".into());
    if d[0].is_zero() {
        return Err(invalid());
    }
    let scale = d[0].recip();
    let d: Vec<Rational> = d.iter().map(|x| x * &scale).collect();
    let gamma = e[0].clone();
    let g_tilde: Vec<Rational> = e.iter().zip(&d).map(|(x, y)| x - &(&gamma * y)).collect();
    if g_tilde[..=q].iter().any(|x| !x.is_zero()) || g_tilde[q + 1].is_zero() {
        return Err(invalid());
    }
    let delta = &d[q + 1] / &g_tilde[q + 1];
    let h: Vec<Rational> = d.iter().zip(&g_tilde).map(|(x, y)| x - &(&delta * y)).collect();
    let g: Vec<Rational> = g_tilde.iter().map(|x| x / &g_tilde[q + 1]).collect();
    if h[q + 1..].iter().any(|x| !x.is_zero()) || h[..=q] != g[q + 1..] {
        return Err(invalid());
    }
    let full = h[1..=q].to_vec();
    Ok(Extracted {
        a: enc.query.iter().map(|&i| full[i].clone()).collect(),
        point: enc.projection.iter().map(|&i| full[i].clone()).collect(),
        full,
    })
}

/// Looks for a witness spanned by integer vectors with entries in
/// [−height, height]. Finding none proves nothing about larger heights.
///
/// Any witness has the form span{(w; 0), (0; w)} with w_0 ≠ 0, and if it
/// is spanned by integer vectors of height ≤ H then some nonzero one of
/// them projects onto an integer multiple of w of height ≤ H. So it suffices
/// to try primitive integer w with 1 ≤ w_0 ≤ H and |w_i| ≤ H, in
/// lexicographic order.
pub fn bounded_witness_search(enc: &DiophEncoding, height: usize) -> Result<Option<Subspace>> {
    if height == 0 {
        return Err(Error::Precondition("height must be at least 1".into()));
    }
    let h = height as i64;
    let q = enc.q();
    let mut w: Vec<i64> = std::iter::once(1).chain(std::iter::repeat(-h).take(q)).collect();
    loop {
        let g = w.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        if g == 1 {
            let mut first = w.clone();
            first.extend(std::iter::repeat(0).take(q + 1));
            let mut second = vec![0; q + 1];
            second.extend(&w);
            let candidate = Subspace::span_i64(&[first, second], enc.nu)?;
            if verify_witness(enc, &candidate)? {
                return Ok(Some(candidate));
            }
        }
        // odometer over w_q, …, w_1, then w_0
        let mut pos = q;
        loop {
            if w[pos] < h {
                w[pos] += 1;
                break;
            }
            w[pos] = if pos == 0 { 1 } else { -h };
            if pos == 0 {
                return Ok(None);
            }
            pos -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;
    use std::collections::{BTreeMap, HashSet};

    fn x_minus_two() -> BasicSystem {
        let s = PolySystem::new(
            1,
            vec![Polynomial {
                terms: vec![
                    Term { exps: vec![1], coeff: Rational::one() },
                    Term { exps: vec![0], coeff: Rational::from(-2) },
                ],
            }],
        )
        .unwrap();
        to_basic_set(&s).unwrap()
    }

    fn x_squared_minus_x() -> BasicSystem {
        let s = PolySystem::new(
            1,
            vec![Polynomial {
                terms: vec![
                    Term { exps: vec![2], coeff: Rational::one() },
                    Term { exps: vec![1], coeff: Rational::from(-1) },
                ],
            }],
        )
        .unwrap();
        to_basic_set(&s).unwrap()
    }

    fn nonzero_rows(m: &RationalMatrix) -> usize {
        (0..m.rows()).filter(|&i| m.row(i).iter().any(|x| !x.is_zero())).count()
    }

    #[test]
    fn encoding_shape_for_linear_system() {
        let e = encode(&x_minus_two(), &[Rational::from(2)]).unwrap();
        // two basic variables (u_0 and u_1), no products, two affine relations
        assert_eq!((e.mu, e.nu, e.rho), (9, 6, 2));
        assert_eq!(e.rho_list, vec![1, 1, 1, 1, 1, 1, 0, 0, 0]);
        for (i, m) in e.maps.iter().enumerate() {
            assert_eq!((m.rows(), m.cols()), (6, 6));
            assert!(m.is_integral());
            if i != 2 && i != 3 {
                assert!(nonzero_rows(m) <= 2);
            }
        }
    }

    #[test]
    fn encoding_shape_with_a_square() {
        let e = encode(&x_squared_minus_x(), &[Rational::one()]).unwrap();
        assert_eq!(e.nu, 8);
        assert_eq!(e.mu, 4 + 3 + 1 + 1 + 2);
        assert_eq!(e.rho_list.iter().filter(|&&r| r == 1).count(), 4 + 3 + 1);
    }

    #[test]
    fn query_is_normalized() {
        let e = encode(&x_minus_two(), &[Rational::new(-4, 6)]).unwrap();
        let g = &e.maps[4 + 2];
        assert_eq!(g[(0, 0)], Rational::from(-2));
        assert_eq!(g[(0, 2)], Rational::from(-3));
        assert!(encode(&x_minus_two(), &[Rational::one(), Rational::one()]).is_err());
    }

    #[test]
    fn witness_for_linear_system() {
        let b = x_minus_two();
        let c = [Rational::one(), Rational::from(2)];
        let w = witness_from_solution(&b, &c).unwrap();
        assert_eq!(w, Subspace::span_i64(&[vec![1, 1, 2, 0, 0, 0], vec![0, 0, 0, 1, 1, 2]], 6).unwrap());
        assert!(verify_witness(&encode(&b, &[Rational::from(2)]).unwrap(), &w).unwrap());
        assert!(!verify_witness(&encode(&b, &[Rational::from(3)]).unwrap(), &w).unwrap());
        assert!(!verify_witness(&encode(&b, &[Rational::from(2)]).unwrap(), &Subspace::zero(6)).unwrap());
        assert!(verify_witness(&encode(&b, &[Rational::from(2)]).unwrap(), &Subspace::zero(4)).is_err());
        assert!(witness_from_solution(&b, &[Rational::one(), Rational::from(3)]).is_err());
    }

    #[test]
    fn round_trips() {
        let b = x_minus_two();
        let e = encode(&b, &[Rational::from(2)]).unwrap();
        let w = witness_from_solution(&b, &b.lift(&[Rational::from(2)]).unwrap()).unwrap();
        let x = extract_solution(&e, &w).unwrap();
        assert_eq!(x.a, vec![Rational::from(2)]);
        assert_eq!(x.point, vec![Rational::from(2)]);

        let b = x_squared_minus_x();
        for root in [0, 1] {
            let e = encode(&b, &[Rational::from(root)]).unwrap();
            let u = b.lift(&[Rational::from(root)]).unwrap();
            let w = witness_from_solution(&b, &u).unwrap();
            assert_eq!(w.dim(), 2);
            let x = extract_solution(&e, &w).unwrap();
            assert_eq!(x.a, vec![Rational::from(root)]);
            assert_eq!(x.full, u);
        }
        let e = encode(&b, &[Rational::one()]).unwrap();
        assert!(extract_solution(&e, &Subspace::zero(8)).is_err());
    }

    #[test]
    fn any_basis_of_the_witness_extracts() {
        let b = x_squared_minus_x();
        let e = encode(&b, &[Rational::one()]).unwrap();
        // mix the two spanning vectors before reducing
        let u = b.lift(&[Rational::one()]).unwrap();
        let w = witness_from_solution(&b, &u).unwrap();
        let rows = w.basis().row_vecs();
        let mixed: Vec<Vec<Rational>> = vec![
            rows[0].iter().zip(&rows[1]).map(|(x, y)| x * &Rational::from(3) + y.clone()).collect(),
            rows[0].iter().zip(&rows[1]).map(|(x, y)| x.clone() - y * &Rational::new(1, 2)).collect(),
        ];
        let w2 = Subspace::span(&mixed, 8).unwrap();
        assert_eq!(w, w2);
        assert_eq!(extract_solution(&e, &w2).unwrap().full, u);
    }

    #[test]
    fn search_examples() {
        let b = x_minus_two();
        let found = bounded_witness_search(&encode(&b, &[Rational::from(2)]).unwrap(), 2).unwrap();
        assert!(found.is_some());
        assert!(bounded_witness_search(&encode(&b, &[Rational::from(2)]).unwrap(), 1).unwrap().is_none());
        assert!(bounded_witness_search(&encode(&b, &[Rational::from(3)]).unwrap(), 4).unwrap().is_none());
        assert!(bounded_witness_search(&encode(&b, &[Rational::from(2)]).unwrap(), 0).is_err());
    }

    /// Every distinct 2-dimensional subspace spanned by a pair of integer
    /// vectors in [−h, h]^ν.
    fn pair_spans(nu: usize, h: i64) -> Vec<Subspace> {
        let mut vectors = vec![vec![]];
        for _ in 0..nu {
            vectors = vectors
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (-h..=h).map(move |x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        let mut seen = HashSet::new();
        for (i, x) in vectors.iter().enumerate() {
            for y in &vectors[i + 1..] {
                let s = Subspace::span_i64(&[x.clone(), y.clone()], nu).unwrap();
                if s.dim() == 2 {
                    seen.insert(s);
                }
            }
        }
        seen.into_iter().collect()
    }

    #[test]
    fn search_agrees_with_pair_scan() {
        // one variable, x − 2 = 0, so ν = 4
        let b = BasicSystem::new(
            1,
            vec![AffineRelation {
                constant: BigInt::from(-2),
                coeffs: BTreeMap::from([(0, BigInt::one())]),
            }],
            vec![],
            vec![0],
        )
        .unwrap();
        for h in 1..=2 {
            let spans = pair_spans(4, h);
            for a in [1, 2, 3] {
                let e = encode(&b, &[Rational::from(a)]).unwrap();
                assert_eq!((e.nu, e.mu), (4, 7));
                let found: Vec<&Subspace> = spans
                    .iter()
                    .filter(|s| verify_witness(&e, s).unwrap())
                    .collect();
                assert!(found.len() <= 1);
                let searched = bounded_witness_search(&e, h as usize).unwrap();
                assert_eq!(searched.as_ref(), found.first().copied(), "a = {a}, height {h}");
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let e = encode(&x_squared_minus_x(), &[Rational::one()]).unwrap();
        let text = serde_json::to_string(&e.to_json_value().unwrap()).unwrap();
        assert_eq!(DiophEncoding::from_json(&text).unwrap(), e);
    }
}
