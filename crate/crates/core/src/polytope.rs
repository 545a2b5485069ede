//! Polytopes inside [0,1]^m given by inequalities Σ_j v_j s_j ≥ c with
//! nonnegative integer data. The box constraints are implicit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::datum::{rank_tuple, ExponentTuple, HblDatum};
use crate::error::{Error, Result};
use crate::linalg::{solve_square, RationalMatrix, Subspace};
use crate::rational::Rational;

/// Σ_j coeffs[j]·s_j ≥ rhs, optionally witnessed by a subspace whose rank
/// tuple is (rhs; coeffs).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub coeffs: Vec<u64>,
    pub rhs: u64,
    pub witness: Option<Subspace>,
}

impl Inequality {
    pub fn new(coeffs: Vec<u64>, rhs: u64) -> Self {
        Inequality {
            coeffs,
            rhs,
            witness: None,
        }
    }

    pub fn lhs(&self, s: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(s)
            .filter(|(&c, _)| c != 0)
            .map(|(&c, x)| x * &Rational::from_integer(c))
            .sum()
    }

    pub fn holds(&self, s: &[Rational]) -> bool {
        self.lhs(s) >= Rational::from_integer(self.rhs)
    }

    pub fn is_tight(&self, s: &[Rational]) -> bool {
        self.lhs(s) == Rational::from_integer(self.rhs)
    }

    fn is_tautology(&self) -> bool {
        self.rhs == 0
    }

    fn same_constraint(&self, other: &Inequality) -> bool {
        self.coeffs == other.coeffs && self.rhs == other.rhs
    }
}

/// One of the constraints describing a polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// The stored inequality at this position.
    Inequality(usize),
    /// s_j ≥ 0.
    Lower(usize),
    /// s_j ≤ 1.
    Upper(usize),
}

impl Serialize for Constraint {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(&match self {
            Constraint::Inequality(i) => format!("ineq({i})"),
            Constraint::Lower(j) => format!("lower({j})"),
            Constraint::Upper(j) => format!("upper({j})"),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vertex {
    pub point: Vec<Rational>,
    /// Every constraint tight at `point`, sorted.
    pub active: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polytope {
    m: usize,
    inequalities: Vec<Inequality>,
}

impl Polytope {
    /// The whole box [0,1]^m.
    pub fn unit_box(m: usize) -> Self {
        Polytope {
            m,
            inequalities: Vec::new(),
        }
    }

    /// Tautologies (rhs = 0) are dropped; repeated (coeffs, rhs) pairs keep
    /// their first occurrence.
    pub fn new(m: usize, inequalities: Vec<Inequality>) -> Result<Self> {
        let mut p = Polytope::unit_box(m);
        for ineq in inequalities {
            p.push(ineq)?;
        }
        Ok(p)
    }

    /// Adds an inequality, returning whether the constraint was new.
    pub fn push(&mut self, ineq: Inequality) -> Result<bool> {
        if ineq.coeffs.len() != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                found: ineq.coeffs.len(),
            });
        }
        if ineq.is_tautology() || self.inequalities.iter().any(|e| e.same_constraint(&ineq)) {
            return Ok(false);
        }
        self.inequalities.push(ineq);
        Ok(true)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.m {
            return Err(Error::LengthMismatch {
                expected: self.m,
                found: len,
            });
        }
        Ok(())
    }

    /// Membership of an exponent tuple; components must lie in [0, 1].
    pub fn contains(&self, s: &ExponentTuple) -> Result<bool> {
        self.check_len(s.len())?;
        s.check_unit_box()?;
        Ok(self.satisfies_inequalities(s.values()))
    }

    /// Checks the stored inequalities only, ignoring the box.
    pub fn satisfies_inequalities(&self, s: &[Rational]) -> bool {
        self.inequalities.iter().all(|i| i.holds(s))
    }

    fn in_box(s: &[Rational]) -> bool {
        let one = Rational::one();
        s.iter().all(|x| !x.is_negative() && x <= &one)
    }

    /// Stored inequalities followed by the 2m box constraints, as (normal, rhs).
    fn all_constraints(&self) -> Vec<(Constraint, Vec<Rational>, Rational)> {
        let mut out: Vec<_> = self
            .inequalities
            .iter()
            .enumerate()
            .map(|(i, q)| {
                (
                    Constraint::Inequality(i),
                    q.coeffs.iter().map(|&c| Rational::from_integer(c)).collect(),
                    Rational::from_integer(q.rhs),
                )
            })
            .collect();
        for j in 0..self.m {
            let mut e = vec![Rational::zero(); self.m];
            e[j] = Rational::one();
            out.push((Constraint::Lower(j), e.clone(), Rational::zero()));
            e[j] = -Rational::one();
            out.push((Constraint::Upper(j), e, -Rational::one()));
        }
        out
    }

    /// All extreme points, sorted lexicographically.
    ///
    /// Every m-subset of constraints with independent normals is solved as
    /// an equality system; solutions satisfying all constraints are kept.
    pub fn extreme_points(&self) -> Vec<Vertex> {
        let constraints = self.all_constraints();
        let m = self.m;
        let mut found: BTreeMap<Vec<Rational>, ()> = BTreeMap::new();
        if m == 0 {
            return vec![Vertex {
                point: Vec::new(),
                active: Vec::new(),
            }];
        }
        for subset in Combinations::new(constraints.len(), m) {
            let rows: Vec<Vec<Rational>> =
                subset.iter().map(|&k| constraints[k].1.clone()).collect();
            let a = RationalMatrix::from_rows(rows, m).expect("width m");
            let b: Vec<Rational> = subset.iter().map(|&k| constraints[k].2.clone()).collect();
            let Some(point) = solve_square(&a, &b).expect("square system") else {
                continue;
            };
            if found.contains_key(&point) {
                continue;
            }
            if Self::in_box(&point) && self.satisfies_inequalities(&point) {
                found.insert(point, ());
            }
        }
        found
            .into_keys()
            .map(|point| {
                let active = constraints
                    .iter()
                    .filter(|(_, normal, rhs)| {
                        let lhs: Rational = normal.iter().zip(&point).map(|(a, x)| a * x).sum();
                        &lhs == rhs
                    })
                    .map(|(c, _, _)| *c)
                    .collect();
                Vertex { point, active }
            })
            .collect()
    }

    /// Minimum of ⟨w, s⟩ over the polytope, attained at the lexicographically
    /// smallest minimizing vertex.
    pub fn minimize_linear(&self, w: &[Rational]) -> Result<(Rational, Vertex)> {
        self.check_len(w.len())?;
        let mut best: Option<(Rational, Vertex)> = None;
        for v in self.extreme_points() {
            let value: Rational = w.iter().zip(&v.point).map(|(a, x)| a * x).sum();
            // vertices arrive in lexicographic order, so only strict improvements replace
            if best.as_ref().map_or(true, |(b, _)| &value < b) {
                best = Some((value, v));
            }
        }
        best.ok_or(Error::EmptyPolytope)
    }

    /// Set equality, decided by mutual containment of extreme points.
    pub fn equals(&self, other: &Polytope) -> Result<bool> {
        self.check_len(other.m)?;
        let inside = |p: &Polytope, q: &Polytope| {
            p.extreme_points()
                .iter()
                .all(|v| q.satisfies_inequalities(&v.point))
        };
        Ok(inside(self, other) && inside(other, self))
    }

    /// Builds a polytope from rank conditions `dim W ≤ Σ s_j dim φ_j(W)`,
    /// one per subspace, witnessed by that subspace.
    pub fn from_rank_constraints(datum: &HblDatum, subspaces: &[Subspace]) -> Result<Self> {
        let mut p = Polytope::unit_box(datum.num_maps());
        for w in subspaces {
            p.push(rank_inequality(datum, w)?)?;
        }
        Ok(p)
    }
}

/// The inequality contributed by one subspace.
pub fn rank_inequality(datum: &HblDatum, w: &Subspace) -> Result<Inequality> {
    let t = rank_tuple(datum, w)?;
    Ok(Inequality {
        coeffs: t.r_sub.iter().map(|&r| r as u64).collect(),
        rhs: t.r as u64,
        witness: Some(w.clone()),
    })
}

pub fn from_rank_constraints(datum: &HblDatum, subspaces: &[Subspace]) -> Result<Polytope> {
    Polytope::from_rank_constraints(datum, subspaces)
}

pub fn polytopes_equal(p: &Polytope, q: &Polytope) -> Result<bool> {
    p.equals(q)
}

/// k-subsets of {0, …, n−1} in lexicographic order.
pub(crate) struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    m: usize,
    inequalities: Vec<Inequality>,
    #[serde(default)]
    vertices: Vec<Vec<Rational>>,
}

impl Polytope {
    /// The polytope JSON object, with sorted extreme points.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(PolytopeJson {
            m: self.m,
            inequalities: self.inequalities.clone(),
            vertices: self.extreme_points().into_iter().map(|v| v.point).collect(),
        })
        .expect("polytope serializes")
    }

    /// Reads the polytope JSON object; any `vertices` field is ignored.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: PolytopeJson = serde_json::from_str(text)?;
        Polytope::new(raw.m, raw.inequalities)
    }
}
