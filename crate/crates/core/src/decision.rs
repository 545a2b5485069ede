//! Exact computation of the exponent polytope and the recursive membership
//! test it relies on.
//!
//! `compute_polytope` grows an outer approximation 𝒫_N from the first N
//! enumerated subspaces and stops as soon as every extreme point of 𝒫_N is
//! certified to lie in 𝒫. Certification recurses on data with fewer maps
//! (components equal to 0 or 1) or smaller ambient dimension (splitting at a
//! critical subspace), so the two procedures bottom out at m = 1 or d = 0.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::datum::{
    classify, classify_ranks, delete_index, quotient_datum, rank_tuple, restrict_datum,
    restrict_to_kernel_datum, Criticality, ExponentTuple, HblDatum,
};
use crate::enumerate::subspace_at;
use crate::error::{Error, Result};
use crate::linalg::{kernel_subspace, Subspace};
use crate::polytope::{rank_inequality, Inequality, Polytope, Vertex};
use crate::rational::Rational;

/// One reduction step of a membership proof or refutation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceStep {
    /// The ambient space is zero; every tuple belongs.
    BaseAmbientZero,
    /// A single map; decided directly.
    BaseM1,
    /// s_i = 0: map i dropped.
    Zero(usize),
    /// s_i = 1: restricted to Ker φ_i and map i dropped.
    One(usize),
    /// Factorization through a critical proper subspace; children are the
    /// restricted and quotient data, in that order.
    Split(Subspace),
    /// A subspace violating its rank condition.
    Supercritical(Subspace),
    /// Every constraint of the exact polytope holds; `steps` subspaces were scanned.
    Subcritical { steps: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MembershipTrace {
    pub member: bool,
    pub step: TraceStep,
    pub children: Vec<MembershipTrace>,
}

impl MembershipTrace {
    fn leaf(member: bool, step: TraceStep) -> Self {
        MembershipTrace {
            member,
            step,
            children: Vec::new(),
        }
    }

    /// Visits every node, depth first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a MembershipTrace)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(Self::depth).max().unwrap_or(0)
    }
}

impl Serialize for MembershipTrace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        let (kind, witness) = match &self.step {
            TraceStep::BaseAmbientZero => ("base_d0".to_string(), None),
            TraceStep::BaseM1 => ("base_m1".to_string(), None),
            TraceStep::Zero(i) => (format!("zero({i})"), None),
            TraceStep::One(i) => (format!("one({i})"), None),
            TraceStep::Split(w) => ("split".to_string(), Some(w)),
            TraceStep::Supercritical(w) => ("supercritical".to_string(), Some(w)),
            TraceStep::Subcritical { .. } => ("subcritical".to_string(), None),
        };
        map.serialize_entry("kind", &kind)?;
        map.serialize_entry("member", &self.member)?;
        if let Some(w) = witness {
            map.serialize_entry("witness", w)?;
        }
        if let TraceStep::Subcritical { steps } = &self.step {
            map.serialize_entry("steps", steps)?;
        }
        if !self.children.is_empty() {
            map.serialize_entry("children", &self.children)?;
        }
        map.end()
    }
}

/// An outer approximation 𝒫_N recorded while the main loop ran.
#[derive(Clone, Debug)]
pub struct OuterStep {
    pub n: usize,
    pub polytope: Polytope,
}

#[derive(Clone, Debug)]
pub struct PolytopeResult {
    pub polytope: Polytope,
    pub vertices: Vec<Vertex>,
    /// Number of enumerated subspaces consumed (0 for a single map).
    pub steps_used: usize,
    /// One membership certificate per vertex, aligned with `vertices`.
    pub certificates: Vec<MembershipTrace>,
    /// Each distinct 𝒫_N whose extreme points were examined, in order.
    pub history: Vec<OuterStep>,
}

impl PolytopeResult {
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut v = self.polytope.to_json_value();
        let obj = v.as_object_mut().expect("polytope json is an object");
        obj.insert("steps_used".into(), self.steps_used.into());
        let certs: Vec<serde_json::Value> = self
            .vertices
            .iter()
            .zip(&self.certificates)
            .map(|(v, t)| serde_json::json!({ "vertex": v.point, "trace": t }))
            .collect();
        obj.insert("certificates".into(), certs.into());
        v
    }
}

/// Which subspaces the interior case may search.
#[derive(Clone, Copy)]
enum Scan {
    /// The first n enumerated subspaces (an extreme point of 𝒫_n).
    Prefix(usize),
    /// Whatever the exact polytope computation consumed.
    Exact,
}

/// Runs the decision procedures, memoizing exact polytopes per datum.
pub struct Solver {
    budget: Option<usize>,
    memo: Mutex<HashMap<String, Arc<PolytopeResult>>>,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            budget: None,
            memo: Mutex::new(HashMap::new()),
        }
    }

    /// Caps the number of subspaces any single polytope computation may consume.
    pub fn with_budget(budget: Option<usize>) -> Self {
        Solver {
            budget,
            ..Self::new()
        }
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    /// The exact polytope 𝒫(D) with witnesses, extreme points and certificates.
    pub fn compute_polytope(&self, datum: &HblDatum) -> Result<Arc<PolytopeResult>> {
        let key = datum.canonical_key();
        if let Some(hit) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(hit.clone());
        }
        let result = Arc::new(self.compute_uncached(datum)?);
        self.memo
            .lock()
            .expect("memo poisoned")
            .insert(key, result.clone());
        Ok(result)
    }

    fn compute_uncached(&self, datum: &HblDatum) -> Result<PolytopeResult> {
        if datum.num_maps() == 1 {
            let polytope = base_case_rank_one(datum)?;
            let vertices = polytope.extreme_points();
            let certificates = vertices
                .iter()
                .map(|_| MembershipTrace::leaf(true, base_step(datum)))
                .collect();
            return Ok(PolytopeResult {
                history: vec![OuterStep {
                    n: 0,
                    polytope: polytope.clone(),
                }],
                polytope,
                vertices,
                steps_used: 0,
                certificates,
            });
        }

        let d = datum.ambient_dim();
        let mut polytope = Polytope::unit_box(datum.num_maps());
        let mut verdicts: HashMap<Vec<Rational>, MembershipTrace> = HashMap::new();
        let mut history = Vec::new();
        let mut n = 0;
        loop {
            if self.budget.is_some_and(|b| n >= b) {
                return Err(Error::BudgetExhausted {
                    budget: n,
                    outer: Box::new(polytope),
                });
            }
            let w = subspace_at(d, n).ok_or_else(|| {
                Error::Precondition(format!(
                    "all subspaces of a {d}-dimensional space were used without certifying the polytope"
                ))
            })?;
            n += 1;
            let changed = polytope.push(rank_inequality(datum, &w)?)?;
            if !changed && !history.is_empty() {
                // 𝒫_n is the set already examined
                continue;
            }
            history.push(OuterStep {
                n,
                polytope: polytope.clone(),
            });

            let vertices = polytope.extreme_points();
            let mut certificates = Vec::with_capacity(vertices.len());
            for v in &vertices {
                let trace = match verdicts.get(&v.point) {
                    Some(t) => t.clone(),
                    None => {
                        let s = ExponentTuple::new(v.point.clone())?;
                        let t = self.member(datum, &s, Scan::Prefix(n))?;
                        verdicts.insert(v.point.clone(), t.clone());
                        t
                    }
                };
                if !trace.member {
                    break;
                }
                certificates.push(trace);
            }
            if certificates.len() == vertices.len() {
                return Ok(PolytopeResult {
                    polytope,
                    vertices,
                    steps_used: n,
                    certificates,
                    history,
                });
            }
        }
    }

    /// Decides s ∈ 𝒫(D) and returns the reduction trace.
    pub fn is_member(&self, datum: &HblDatum, s: &ExponentTuple) -> Result<MembershipTrace> {
        if s.len() != datum.num_maps() {
            return Err(Error::LengthMismatch {
                expected: datum.num_maps(),
                found: s.len(),
            });
        }
        s.check_unit_box()?;
        self.member(datum, s, Scan::Exact)
    }

    fn member(&self, datum: &HblDatum, s: &ExponentTuple, scan: Scan) -> Result<MembershipTrace> {
        let d = datum.ambient_dim();
        let m = datum.num_maps();
        if d == 0 {
            return Ok(MembershipTrace::leaf(true, TraceStep::BaseAmbientZero));
        }
        if m == 1 {
            let inside = base_case_rank_one(datum)?.contains(s)?;
            return Ok(MembershipTrace::leaf(inside, TraceStep::BaseM1));
        }
        if let Some(i) = s.values().iter().position(Rational::is_one) {
            let child = self.is_member(&restrict_to_kernel_datum(datum, i)?, &s.without(i))?;
            return Ok(MembershipTrace {
                member: child.member,
                step: TraceStep::One(i),
                children: vec![child],
            });
        }
        if let Some(i) = s.values().iter().position(Rational::is_zero) {
            let child = self.is_member(&delete_index(datum, i)?, &s.without(i))?;
            return Ok(MembershipTrace {
                member: child.member,
                step: TraceStep::Zero(i),
                children: vec![child],
            });
        }

        // s ∈ (0,1)^m
        let limit = match scan {
            Scan::Prefix(n) => n,
            Scan::Exact => self.compute_polytope(datum)?.steps_used,
        };
        for k in 0..limit {
            let w = subspace_at(d, k).expect("index below a consumed prefix");
            match classify_ranks(&rank_tuple(datum, &w)?, s) {
                Criticality::Supercritical => {
                    return Ok(MembershipTrace::leaf(false, TraceStep::Supercritical(w)));
                }
                Criticality::Critical if w.dim() > 0 && w.dim() < d => {
                    return self.split(datum, s, w);
                }
                _ => {}
            }
        }
        match scan {
            Scan::Exact => Ok(MembershipTrace::leaf(
                true,
                TraceStep::Subcritical { steps: limit },
            )),
            Scan::Prefix(n) => Err(Error::Precondition(format!(
                "{s} is not an extreme point of the outer approximation from {n} subspaces"
            ))),
        }
    }

    fn split(&self, datum: &HblDatum, s: &ExponentTuple, w: Subspace) -> Result<MembershipTrace> {
        let member = self.member_with_critical(datum, s, &w)?;
        let restricted = self.is_member(&restrict_datum(datum, &w)?, s)?;
        let quotient = self.is_member(&quotient_datum(datum, &w)?, s)?;
        debug_assert_eq!(member, restricted.member && quotient.member);
        Ok(MembershipTrace {
            member,
            step: TraceStep::Split(w),
            children: vec![restricted, quotient],
        })
    }

    /// Decides s ∈ 𝒫(D) through a critical subspace 0 < W < V, as membership
    /// in both the restricted and the quotient polytope.
    pub fn member_with_critical(
        &self,
        datum: &HblDatum,
        s: &ExponentTuple,
        w: &Subspace,
    ) -> Result<bool> {
        if w.dim() == 0 || w.dim() >= datum.ambient_dim() {
            return Err(Error::Precondition(
                "the splitting subspace must be nonzero and proper".into(),
            ));
        }
        if classify(datum, w, s)? != Criticality::Critical {
            return Err(Error::Precondition(format!(
                "subspace is not critical with respect to {s}"
            )));
        }
        let restricted = self.compute_polytope(&restrict_datum(datum, w)?)?;
        if !restricted.polytope.contains(s)? {
            return Ok(false);
        }
        let quotient = self.compute_polytope(&quotient_datum(datum, w)?)?;
        quotient.polytope.contains(s)
    }
}

fn base_step(datum: &HblDatum) -> TraceStep {
    if datum.ambient_dim() == 0 {
        TraceStep::BaseAmbientZero
    } else {
        TraceStep::BaseM1
    }
}

/// 𝒫 for a single map φ on ℚ^d: [0,1] if d = 0, {1} if φ is injective,
/// empty otherwise. The infeasible case is recorded as 0·s ≥ dim Ker φ,
/// witnessed by the kernel.
pub fn base_case_rank_one(datum: &HblDatum) -> Result<Polytope> {
    if datum.num_maps() != 1 {
        return Err(Error::Precondition(format!(
            "base case needs exactly one map, found {}",
            datum.num_maps()
        )));
    }
    let d = datum.ambient_dim();
    if d == 0 {
        return Ok(Polytope::unit_box(1));
    }
    let kernel = kernel_subspace(datum.map(0));
    let ineq = if kernel.dim() == 0 {
        Inequality {
            coeffs: vec![d as u64],
            rhs: d as u64,
            witness: Some(Subspace::full(d)),
        }
    } else {
        Inequality {
            coeffs: vec![0],
            rhs: kernel.dim() as u64,
            witness: Some(kernel),
        }
    };
    Polytope::new(1, vec![ineq])
}

/// Computes 𝒫(D) with an optional subspace budget.
pub fn compute_polytope(datum: &HblDatum, budget: Option<usize>) -> Result<Arc<PolytopeResult>> {
    Solver::with_budget(budget).compute_polytope(datum)
}

pub fn is_member(datum: &HblDatum, s: &ExponentTuple) -> Result<MembershipTrace> {
    Solver::new().is_member(datum, s)
}

pub fn member_with_critical(datum: &HblDatum, s: &ExponentTuple, w: &Subspace) -> Result<bool> {
    Solver::new().member_with_critical(datum, s, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::named::*;
    use crate::linalg::RationalMatrix;

    fn tuple(values: &[(i64, i64)]) -> ExponentTuple {
        ExponentTuple::new(values.iter().map(|&(n, d)| Rational::new(n, d)).collect()).unwrap()
    }

    fn points(r: &PolytopeResult) -> Vec<Vec<Rational>> {
        r.vertices.iter().map(|v| v.point.clone()).collect()
    }

    fn line(v: &[i64]) -> Subspace {
        Subspace::span_i64(&[v.to_vec()], v.len()).unwrap()
    }

    #[test]
    fn base_case_examples() {
        let zero = HblDatum::new(0, vec![RationalMatrix::zeros(2, 0)]).unwrap();
        assert_eq!(base_case_rank_one(&zero).unwrap(), Polytope::unit_box(1));

        let p = base_case_rank_one(&identity(3)).unwrap();
        assert_eq!(p.inequalities()[0].coeffs, vec![3]);
        assert_eq!(p.inequalities()[0].rhs, 3);
        let pts: Vec<_> = p.extreme_points().into_iter().map(|v| v.point).collect();
        assert_eq!(pts, vec![vec![Rational::one()]]);

        let proj = HblDatum::from_integer_maps(2, &[vec![vec![1, 0]]]).unwrap();
        assert!(base_case_rank_one(&proj).unwrap().extreme_points().is_empty());

        assert!(base_case_rank_one(&matmul()).is_err());
    }

    #[test]
    fn single_identity_map() {
        let r = compute_polytope(&identity(2), None).unwrap();
        assert_eq!(points(&r), vec![vec![Rational::one()]]);
        let ineq = &r.polytope.inequalities()[0];
        assert_eq!((ineq.coeffs.clone(), ineq.rhs), (vec![2], 2));
    }

    #[test]
    fn loomis_whitney_plane() {
        let r = compute_polytope(&loomis_whitney_2d(), None).unwrap();
        assert_eq!(points(&r), vec![vec![Rational::one(), Rational::one()]]);
        let pairs: Vec<_> = r
            .polytope
            .inequalities()
            .iter()
            .map(|i| (i.coeffs.clone(), i.rhs))
            .collect();
        assert!(pairs.contains(&(vec![1, 0], 1)));
        assert!(pairs.contains(&(vec![0, 1], 1)));
    }

    #[test]
    fn matmul_polytope() {
        let r = compute_polytope(&matmul(), None).unwrap();
        let half = Rational::new(1, 2);
        let (o, z) = (Rational::one(), Rational::zero());
        assert_eq!(
            points(&r),
            vec![
                vec![z.clone(), o.clone(), o.clone()],
                vec![half.clone(), half.clone(), half.clone()],
                vec![o.clone(), z.clone(), o.clone()],
                vec![o.clone(), o.clone(), z.clone()],
                vec![o.clone(), o.clone(), o.clone()],
            ]
        );
        for ineq in r.polytope.inequalities() {
            let w = ineq.witness.as_ref().unwrap();
            let t = rank_tuple(&matmul(), w).unwrap();
            assert_eq!(t.r as u64, ineq.rhs);
            assert_eq!(t.r_sub.iter().map(|&x| x as u64).collect::<Vec<_>>(), ineq.coeffs);
        }
        assert!(r.certificates.iter().all(|c| c.member));
    }

    #[test]
    fn membership_examples() {
        let d = matmul();
        let t = is_member(&d, &tuple(&[(1, 2), (1, 2), (1, 2)])).unwrap();
        assert!(t.member);
        match &t.step {
            TraceStep::Split(w) => {
                assert_eq!(classify(&d, w, &tuple(&[(1, 2), (1, 2), (1, 2)])).unwrap(), Criticality::Critical);
                assert_eq!(w, &line(&[0, 0, 1]));
            }
            other => panic!("expected a split, got {other:?}"),
        }

        let t = is_member(&d, &tuple(&[(1, 2), (1, 2), (1, 4)])).unwrap();
        assert!(!t.member);
        assert!(matches!(t.step, TraceStep::Supercritical(_)));

        let t = is_member(&d, &tuple(&[(1, 1), (1, 1), (1, 1)])).unwrap();
        assert!(t.member);
        assert_eq!(t.step, TraceStep::One(0));

        let t = is_member(&d, &tuple(&[(1, 1), (1, 1), (0, 1)])).unwrap();
        assert!(t.member);

        assert!(is_member(&d, &tuple(&[(1, 2), (1, 2)])).is_err());
        assert!(is_member(&d, &tuple(&[(1, 2), (1, 2), (3, 2)])).is_err());
    }

    #[test]
    fn all_ones_with_trivial_common_kernel() {
        for datum in [matmul(), loomis_whitney_2d(), loomis_whitney_3d()] {
            let ones = ExponentTuple::new(vec![Rational::one(); datum.num_maps()]).unwrap();
            assert!(is_member(&datum, &ones).unwrap().member);
        }
    }

    #[test]
    fn strictly_interior_point() {
        let t = is_member(&matmul(), &tuple(&[(9, 10), (9, 10), (9, 10)])).unwrap();
        assert!(t.member);
        assert!(matches!(t.step, TraceStep::Subcritical { .. }));
    }

    #[test]
    fn member_with_critical_examples() {
        let d = matmul();
        let half = tuple(&[(1, 2), (1, 2), (1, 2)]);
        assert!(member_with_critical(&d, &half, &line(&[1, 0, 0])).unwrap());
        assert!(member_with_critical(&d, &half, &line(&[0, 1, 0])).unwrap());
        assert!(member_with_critical(&d, &half, &Subspace::full(3)).is_err());
        // (1,1,1) is not critical: 1 < 1/2 + 1/2 + 1/2
        assert!(member_with_critical(&d, &half, &line(&[1, 1, 1])).is_err());
    }

    #[test]
    fn empty_polytope_when_kernels_meet() {
        // both maps kill e_2
        let d = HblDatum::from_integer_maps(2, &[vec![vec![1, 0]], vec![vec![2, 0]]]).unwrap();
        let r = compute_polytope(&d, None).unwrap();
        assert!(r.vertices.is_empty());
    }

    #[test]
    fn budget_exhaustion_returns_outer_approximation() {
        match compute_polytope(&matmul(), Some(3)) {
            Err(Error::BudgetExhausted { outer, .. }) => {
                assert_eq!(outer.m(), 3);
                assert!(!outer.inequalities().is_empty());
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn trace_json_kinds() {
        let t = is_member(&matmul(), &tuple(&[(1, 1), (1, 1), (0, 1)])).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        assert!(text.starts_with(r#"{"kind":"one(0)","member":true"#), "{text}");
    }
}
