//! Rational Diophantine sets as rank-realizability questions.
//!
//! A polynomial system is first rewritten as a basic system (affine
//! relations plus products u_α u_β = u_γ over the monomials u_α = x^α). For
//! a query point a, `encode` produces integer maps f_1, …, f_μ on ℚ^ν such
//! that a extends to a rational solution exactly when some 2-dimensional
//! V ≤ ℚ^ν has dim f_i(V) equal to the prescribed ranks.

mod encoding;

pub use encoding::{
    bounded_witness_search, encode, extract_solution, verify_witness, witness_from_solution,
    DiophEncoding, Extracted,
};

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub exps: Vec<u32>,
    pub coeff: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|t| {
                t.exps
                    .iter()
                    .zip(x)
                    .fold(t.coeff.clone(), |acc, (&e, xi)| acc * pow(xi, e))
            })
            .sum()
    }
}

fn pow(x: &Rational, e: u32) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

/// A finite set of nonzero polynomials in q variables with rational
/// coefficients. Terms are merged, sorted and free of zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem")]
pub struct PolySystem {
    q: usize,
    polys: Vec<Polynomial>,
}

#[derive(Deserialize)]
struct RawSystem {
    q: usize,
    polys: Vec<Polynomial>,
}

impl TryFrom<RawSystem> for PolySystem {
    type Error = Error;

    fn try_from(raw: RawSystem) -> Result<Self> {
        PolySystem::new(raw.q, raw.polys)
    }
}

impl PolySystem {
    pub fn new(q: usize, polys: Vec<Polynomial>) -> Result<Self> {
        let mut out = Vec::with_capacity(polys.len());
        for (i, p) in polys.into_iter().enumerate() {
            let mut merged: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
            for t in p.terms {
                if t.exps.len() != q {
                    return Err(Error::LengthMismatch {
                        expected: q,
                        found: t.exps.len(),
                    });
                }
                *merged.entry(t.exps).or_default() += &t.coeff;
            }
            merged.retain(|_, c| !c.is_zero());
            if merged.is_empty() {
                return Err(Error::Precondition(format!("polynomial {i} is zero")));
            }
            out.push(Polynomial {
                terms: merged
                    .into_iter()
                    .map(|(exps, coeff)| Term { exps, coeff })
                    .collect(),
            });
        }
        Ok(PolySystem { q, polys: out })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn num_variables(&self) -> usize {
        self.q
    }

    pub fn polys(&self) -> &[Polynomial] {
        &self.polys
    }

    /// The largest exponent of any single variable.
    pub fn degree(&self) -> u32 {
        self.polys
            .iter()
            .flat_map(|p| p.terms.iter().flat_map(|t| t.exps.iter().copied()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_solution(&self, x: &[Rational]) -> bool {
        x.len() == self.q && self.polys.iter().all(|p| p.evaluate(x).is_zero())
    }
}

/// constant + Σ coeffs[i]·u_i = 0, integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineRelation {
    pub constant: BigInt,
    pub coeffs: BTreeMap<usize, BigInt>,
}

impl AffineRelation {
    pub fn evaluate(&self, u: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(Rational::from(self.constant.clone()), |acc, (&i, c)| {
                acc + Rational::from(c.clone()) * &u[i]
            })
    }
}

/// u_left · u_right = u_product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MultRelation {
    pub left: usize,
    pub right: usize,
    pub product: usize,
}

/// A system made only of affine relations and products of two variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicSystem {
    variables: usize,
    affine: Vec<AffineRelation>,
    mults: Vec<MultRelation>,
    /// Variables holding x_1, …, x_q of the original system.
    projection: Vec<usize>,
    /// Exponent vector of each variable, when built from a polynomial system.
    monomials: Option<Vec<Vec<u32>>>,
}

impl BasicSystem {
    pub fn new(
        variables: usize,
        affine: Vec<AffineRelation>,
        mults: Vec<MultRelation>,
        projection: Vec<usize>,
    ) -> Result<Self> {
        let check = |i: usize| {
            if i < variables {
                Ok(())
            } else {
                Err(Error::IndexOutOfRange {
                    index: i,
                    len: variables,
                })
            }
        };
        for a in &affine {
            a.coeffs.keys().try_for_each(|&i| check(i))?;
        }
        for m in &mults {
            check(m.left)?;
            check(m.right)?;
            check(m.product)?;
        }
        projection.iter().try_for_each(|&i| check(i))?;
        Ok(BasicSystem {
            variables,
            affine,
            mults,
            projection,
            monomials: None,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.variables
    }

    pub fn affine(&self) -> &[AffineRelation] {
        &self.affine
    }

    pub fn mults(&self) -> &[MultRelation] {
        &self.mults
    }

    pub fn projection(&self) -> &[usize] {
        &self.projection
    }

    pub fn monomials(&self) -> Option<&[Vec<u32>]> {
        self.monomials.as_deref()
    }

    pub fn is_solution(&self, u: &[Rational]) -> bool {
        u.len() == self.variables
            && self.affine.iter().all(|a| a.evaluate(u).is_zero())
            && self
                .mults
                .iter()
                .all(|m| &u[m.left] * &u[m.right] == u[m.product])
    }

    /// The monomial lift (x^α)_α of a point of the original system.
    pub fn lift(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        let monomials = self.monomials.as_ref().ok_or_else(|| {
            Error::Precondition("the system was not built from polynomials".into())
        })?;
        if x.len() != self.projection.len() {
            return Err(Error::LengthMismatch {
                expected: self.projection.len(),
                found: x.len(),
            });
        }
        Ok(monomials
            .iter()
            .map(|alpha| {
                alpha
                    .iter()
                    .zip(x)
                    .fold(Rational::one(), |acc, (&e, xi)| acc * pow(xi, e))
            })
            .collect())
    }

    pub fn project(&self, u: &[Rational]) -> Vec<Rational> {
        self.projection.iter().map(|&i| u[i].clone()).collect()
    }

    /// Integers are written as decimal strings.
    pub fn to_json_value(&self) -> serde_json::Value {
        let affine: Vec<serde_json::Value> = self
            .affine
            .iter()
            .map(|a| {
                let coeffs: serde_json::Map<String, serde_json::Value> = a
                    .coeffs
                    .iter()
                    .map(|(i, c)| (i.to_string(), c.to_string().into()))
                    .collect();
                serde_json::json!({ "constant": a.constant.to_string(), "coeffs": coeffs })
            })
            .collect();
        let mults: Vec<[usize; 3]> = self.mults.iter().map(|m| [m.left, m.right, m.product]).collect();
        serde_json::json!({
            "variables": self.variables,
            "affine": affine,
            "mults": mults,
            "projection": self.projection,
            "monomials": self.monomials,
        })
    }
}

/// Position of α in {0, …, d}^q, read as base-(d+1) digits with α_1 lowest.
fn monomial_index(alpha: &[u32], d: u32) -> usize {
    alpha
        .iter()
        .rev()
        .fold(0usize, |acc, &a| acc * (d as usize + 1) + a as usize)
}

fn monomial_at(index: usize, q: usize, d: u32) -> Vec<u32> {
    let base = d as usize + 1;
    let mut rest = index;
    (0..q)
        .map(|_| {
            let digit = rest % base;
            rest /= base;
            digit as u32
        })
        .collect()
}

/// Rewrites S over the monomials 𝒟 = {0, …, d}^q, d the largest
/// per-variable degree: the pin u_𝟎 = 1, every product u_α u_β = u_{α+β}
/// with α, β ≠ 𝟎 and α+β ∈ 𝒟 (each unordered pair once, squares included),
/// and each f ∈ S as an affine relation scaled to integer coefficients.
pub fn to_basic_set(system: &PolySystem) -> Result<BasicSystem> {
    if system.polys.is_empty() {
        return Err(Error::Precondition("the polynomial system is empty".into()));
    }
    let q = system.q;
    // d = 0 would leave no variable to hold x_i
    let d = system.degree().max(1);
    let count = (d as usize + 1)
        .checked_pow(q as u32)
        .ok_or_else(|| Error::IntegerOverflow("too many monomials".into()))?;
    let monomials: Vec<Vec<u32>> = (0..count).map(|i| monomial_at(i, q, d)).collect();

    let mut affine = vec![AffineRelation {
        constant: -BigInt::one(),
        coeffs: BTreeMap::from([(0, BigInt::one())]),
    }];
    for p in &system.polys {
        let den = Rational::common_denominator(p.terms.iter().map(|t| &t.coeff));
        let coeffs = p
            .terms
            .iter()
            .map(|t| {
                let c = t.coeff.numer() * (&den / t.coeff.denom());
                (monomial_index(&t.exps, d), c)
            })
            .collect();
        affine.push(AffineRelation {
            constant: BigInt::zero(),
            coeffs,
        });
    }

    let mut mults = Vec::new();
    for a in 1..count {
        for b in a..count {
            let (alpha, beta) = (&monomials[a], &monomials[b]);
            if alpha.iter().zip(beta).all(|(x, y)| x + y <= d) {
                let gamma: Vec<u32> = alpha.iter().zip(beta).map(|(x, y)| x + y).collect();
                mults.push(MultRelation {
                    left: a,
                    right: b,
                    product: monomial_index(&gamma, d),
                });
            }
        }
    }

    let projection = (0..q).map(|i| (d as usize + 1).pow(i as u32)).collect();
    Ok(BasicSystem {
        variables: count,
        affine,
        mults,
        projection,
        monomials: Some(monomials),
    })
}

/// A random system in q variables with per-variable degree ≤ d that has the
/// returned rational point as a solution. Every polynomial gets a constant
/// term chosen to vanish at that point; at least one polynomial is affine.
pub fn planted_system(rng: &mut impl Rng, q: usize, d: u32) -> (PolySystem, Vec<Rational>) {
    let small = |rng: &mut dyn rand::RngCore, zero_ok: bool| loop {
        let n = rng.gen_range(-3..=3i64);
        if zero_ok || n != 0 {
            break Rational::new(n, rng.gen_range(1..=3i64));
        }
    };
    let x: Vec<Rational> = (0..q).map(|_| small(rng, true)).collect();
    let count = rng.gen_range(1..=3usize);
    let mut polys = Vec::with_capacity(count);
    while polys.len() < count {
        let max_exp = if polys.is_empty() { 1 } else { d };
        let terms: Vec<Term> = (0..rng.gen_range(1..=3usize))
            .map(|_| Term {
                exps: (0..q).map(|_| rng.gen_range(0..=max_exp)).collect(),
                coeff: small(rng, false),
            })
            .collect();
        let mut p = Polynomial { terms };
        let value = p.evaluate(&x);
        p.terms.push(Term {
            exps: vec![0; q],
            coeff: -value,
        });
        // skip polynomials that cancel to zero
        if let Ok(s) = PolySystem::new(q, vec![p]) {
            polys.extend(s.polys);
        }
    }
    let system = PolySystem::new(q, polys).expect("polynomials are nonzero");
    (system, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(q: usize, polys: &[&[(&[u32], i64)]]) -> PolySystem {
        PolySystem::new(
            q,
            polys
                .iter()
                .map(|terms| Polynomial {
                    terms: terms
                        .iter()
                        .map(|(e, c)| Term {
                            exps: e.to_vec(),
                            coeff: Rational::from(*c),
                        })
                        .collect(),
                })
                .collect(),
        )
        .unwrap()
    }

    fn ints(coeffs: &[(usize, i64)]) -> BTreeMap<usize, BigInt> {
        coeffs.iter().map(|&(i, c)| (i, BigInt::from(c))).collect()
    }

    #[test]
    fn linear_system() {
        let b = to_basic_set(&system(1, &[&[(&[1], 1), (&[0], -2)]])).unwrap();
        assert_eq!(b.num_variables(), 2);
        assert!(b.mults().is_empty());
        assert_eq!(b.affine()[0].coeffs, ints(&[(0, 1)]));
        assert_eq!(b.affine()[0].constant, BigInt::from(-1));
        assert_eq!(b.affine()[1].coeffs, ints(&[(0, -2), (1, 1)]));
        assert_eq!(b.projection(), &[1]);
    }

    #[test]
    fn square_relation() {
        let b = to_basic_set(&system(1, &[&[(&[2], 1), (&[1], -1)]])).unwrap();
        assert_eq!(b.num_variables(), 3);
        assert_eq!(
            b.mults(),
            &[MultRelation {
                left: 1,
                right: 1,
                product: 2
            }]
        );
        assert_eq!(b.affine()[1].coeffs, ints(&[(1, -1), (2, 1)]));
        for x in [0, 1] {
            let u = b.lift(&[Rational::from(x)]).unwrap();
            assert!(b.is_solution(&u));
        }
        assert!(!b.is_solution(&b.lift(&[Rational::from(2)]).unwrap()));
    }

    #[test]
    fn rational_coefficients_are_scaled() {
        let p = Polynomial {
            terms: vec![
                Term { exps: vec![1], coeff: Rational::new(1, 2) },
                Term { exps: vec![0], coeff: Rational::new(-1, 3) },
            ],
        };
        let b = to_basic_set(&PolySystem::new(1, vec![p]).unwrap()).unwrap();
        assert_eq!(b.affine()[1].coeffs, ints(&[(0, -2), (1, 3)]));
    }

    #[test]
    fn two_variable_products() {
        // x y − 1 with d = 1: the only product is u_(1,0) u_(0,1) = u_(1,1)
        let b = to_basic_set(&system(2, &[&[(&[1, 1], 1), (&[0, 0], -1)]])).unwrap();
        assert_eq!(b.num_variables(), 4);
        assert_eq!(b.projection(), &[1, 2]);
        assert_eq!(
            b.mults(),
            &[MultRelation {
                left: 1,
                right: 2,
                product: 3
            }]
        );
    }

    #[test]
    fn empty_and_zero_rejected() {
        assert!(to_basic_set(&PolySystem::new(1, vec![]).unwrap()).is_err());
        assert!(PolySystem::new(1, vec![Polynomial { terms: vec![] }]).is_err());
        let cancels = Polynomial {
            terms: vec![
                Term { exps: vec![1], coeff: Rational::one() },
                Term { exps: vec![1], coeff: -Rational::one() },
            ],
        };
        assert!(PolySystem::new(1, vec![cancels]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"q":1,"polys":[{"terms":[{"exps":[1],"coeff":"1"},{"exps":[0],"coeff":"-2"}]}]}"#;
        let s = PolySystem::from_json(text).unwrap();
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(PolySystem::from_json(&back).unwrap(), s);
        assert!(PolySystem::from_json(r#"{"q":2,"polys":[{"terms":[{"exps":[1],"coeff":"1"}]}]}"#).is_err());
    }

    #[test]
    fn planted_points_solve_their_systems() {
        let mut rng = crate::oracle::sample_rng(11, 0);
        for _ in 0..30 {
            let (s, x) = planted_system(&mut rng, 2, 2);
            assert!(s.is_solution(&x));
            let b = to_basic_set(&s).unwrap();
            let u = b.lift(&x).unwrap();
            assert!(b.is_solution(&u));
            assert_eq!(b.project(&u), x);
        }
    }
}
