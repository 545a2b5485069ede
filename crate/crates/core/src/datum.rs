//! HBL data: an ambient space ℚ^d with linear maps φ_j : ℚ^d → ℚ^{d_j}.
//!
//! Input data carry integer matrices (a lattice ℤ^d with homomorphisms);
//! everything downstream works over ℚ, where ranks of subgroups and
//! dimensions of the subspaces they span coincide. Restricted and quotient
//! data produced during recursion may have rational entries.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    complement_indices, image_subspace, kernel_subspace, RationalMatrix, Subspace,
};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HblDatum {
    ambient_dim: usize,
    maps: Vec<RationalMatrix>,
}

impl HblDatum {
    /// Builds a datum from arbitrary rational matrices.
    pub fn new(ambient_dim: usize, maps: Vec<RationalMatrix>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidDatum("a datum needs at least one map".into()));
        }
        for (j, map) in maps.iter().enumerate() {
            if map.cols() != ambient_dim {
                return Err(Error::InvalidDatum(format!(
                    "map {j} has {} columns, ambient dimension is {ambient_dim}",
                    map.cols()
                )));
            }
        }
        Ok(HblDatum { ambient_dim, maps })
    }

    /// Builds a datum from integer matrices given as rows.
    pub fn from_integer_maps(ambient_dim: usize, maps: &[Vec<Vec<i64>>]) -> Result<Self> {
        let maps = maps
            .iter()
            .map(|rows| RationalMatrix::from_i64_rows(rows, ambient_dim))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient_dim, maps)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[RationalMatrix] {
        &self.maps
    }

    pub fn map(&self, j: usize) -> &RationalMatrix {
        &self.maps[j]
    }

    /// The maps stacked into one matrix Φ = [φ_1; …; φ_m].
    pub fn stacked(&self) -> RationalMatrix {
        self.maps
            .iter()
            .skip(1)
            .fold(self.maps[0].clone(), |acc, m| acc.vstack(m).expect("same width"))
    }

    /// Byte-stable key used to memoize per-datum computations.
    pub fn canonical_key(&self) -> String {
        serde_json::to_string(&DatumJson::from(self)).expect("datum serializes")
    }

    fn check_subspace(&self, w: &Subspace) -> Result<()> {
        if w.ambient_dim() != self.ambient_dim {
            return Err(Error::AmbientMismatch {
                expected: self.ambient_dim,
                found: w.ambient_dim(),
            });
        }
        Ok(())
    }

    fn check_exponents(&self, s: &ExponentTuple) -> Result<()> {
        if s.len() != self.num_maps() {
            return Err(Error::LengthMismatch {
                expected: self.num_maps(),
                found: s.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.num_maps() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.num_maps(),
            });
        }
        if self.num_maps() == 1 {
            return Err(Error::Precondition(
                "cannot remove the only map of a datum".into(),
            ));
        }
        Ok(())
    }
}

/// Exponents (s_1, …, s_m); each s_j ≥ 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentTuple(Vec<Rational>);

impl ExponentTuple {
    pub fn new(s: Vec<Rational>) -> Result<Self> {
        if let Some((index, v)) = s.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(Error::ExponentOutOfRange {
                index,
                value: v.to_string(),
            });
        }
        Ok(ExponentTuple(s))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(crate::rational::parse_rational_list(text)?)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    /// Errors unless every component lies in [0, 1].
    pub fn check_unit_box(&self) -> Result<()> {
        match self.0.iter().enumerate().find(|(_, v)| *v > &Rational::one()) {
            Some((index, v)) => Err(Error::ExponentOutOfRange {
                index,
                value: v.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// The tuple with component `i` removed.
    pub fn without(&self, i: usize) -> ExponentTuple {
        let mut v = self.0.clone();
        v.remove(i);
        ExponentTuple(v)
    }
}

impl std::fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Rational::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// (dim W; dim φ_1(W), …, dim φ_m(W)).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RankTuple {
    pub r: usize,
    pub r_sub: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    StrictlySubcritical,
    Critical,
    Supercritical,
}

pub fn rank_tuple(datum: &HblDatum, w: &Subspace) -> Result<RankTuple> {
    datum.check_subspace(w)?;
    let columns = w.basis().transpose();
    let r_sub = datum
        .maps
        .iter()
        .map(|m| m.mul(&columns).map(|img| img.rank()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RankTuple { r: w.dim(), r_sub })
}

/// Compares dim W with Σ s_j dim φ_j(W).
pub fn classify(datum: &HblDatum, w: &Subspace, s: &ExponentTuple) -> Result<Criticality> {
    datum.check_exponents(s)?;
    let ranks = rank_tuple(datum, w)?;
    Ok(classify_ranks(&ranks, s))
}

pub(crate) fn classify_ranks(ranks: &RankTuple, s: &ExponentTuple) -> Criticality {
    let weighted: Rational = s
        .values()
        .iter()
        .zip(&ranks.r_sub)
        .filter(|(_, &r)| r > 0)
        .map(|(sj, &r)| sj * &Rational::from(r as i64))
        .sum();
    match Rational::from(ranks.r as i64).cmp(&weighted) {
        Ordering::Less => Criticality::StrictlySubcritical,
        Ordering::Equal => Criticality::Critical,
        Ordering::Greater => Criticality::Supercritical,
    }
}

/// The datum restricted to `w`, in the coordinates of w's canonical basis.
/// Codomains stay the original ℚ^{d_j}.
pub fn restrict_datum(datum: &HblDatum, w: &Subspace) -> Result<HblDatum> {
    datum.check_subspace(w)?;
    let columns = w.basis().transpose();
    let maps = datum
        .maps
        .iter()
        .map(|m| m.mul(&columns))
        .collect::<Result<Vec<_>>>()?;
    HblDatum::new(w.dim(), maps)
}

/// Coefficients of `y` on the complement vectors of the basis obtained by
/// extending `image` with standard vectors at its non-pivot columns.
fn complement_coordinates(image: &Subspace, complement: &[usize], y: &[Rational]) -> Vec<Rational> {
    let pivots = image.pivots();
    complement
        .iter()
        .map(|&k| {
            let mut c = y[k].clone();
            for (i, &p) in pivots.iter().enumerate() {
                let b = &image.basis()[(i, k)];
                if !b.is_zero() && !y[p].is_zero() {
                    c -= &(&y[p] * b);
                }
            }
            c
        })
        .collect()
}

/// The quotient datum on V/W with maps [φ_j] : V/W → V_j/φ_j(W).
///
/// Coordinates on V/W are the coefficients of the standard vectors that
/// complete W's canonical basis; likewise for each codomain quotient.
pub fn quotient_datum(datum: &HblDatum, w: &Subspace) -> Result<HblDatum> {
    datum.check_subspace(w)?;
    let domain_complement = complement_indices(w);
    let columns = w.basis().transpose();
    let mut maps = Vec::with_capacity(datum.num_maps());
    for m in &datum.maps {
        let image = image_subspace(&m.mul(&columns)?);
        let codomain_complement = complement_indices(&image);
        let mut q = RationalMatrix::zeros(codomain_complement.len(), domain_complement.len());
        for (c, &k) in domain_complement.iter().enumerate() {
            let y: Vec<Rational> = (0..m.rows()).map(|i| m[(i, k)].clone()).collect();
            for (r, v) in complement_coordinates(&image, &codomain_complement, &y)
                .into_iter()
                .enumerate()
            {
                q[(r, c)] = v;
            }
        }
        maps.push(q);
    }
    HblDatum::new(domain_complement.len(), maps)
}

/// Image in V/W coordinates of a vector of V.
pub fn quotient_coordinates(w: &Subspace, x: &[Rational]) -> Vec<Rational> {
    complement_coordinates(w, &complement_indices(w), x)
}

/// Removes map `i` (0-based).
pub fn delete_index(datum: &HblDatum, i: usize) -> Result<HblDatum> {
    datum.check_index(i)?;
    let mut maps = datum.maps.clone();
    maps.remove(i);
    HblDatum::new(datum.ambient_dim, maps)
}

/// Restricts to Ker φ_i and drops map `i`.
pub fn restrict_to_kernel_datum(datum: &HblDatum, i: usize) -> Result<HblDatum> {
    datum.check_index(i)?;
    let kernel = kernel_subspace(datum.map(i));
    delete_index(&restrict_datum(datum, &kernel)?, i)
}

/// Componentwise min(s_j, 1).
pub fn clamp_exponents(s: &ExponentTuple) -> ExponentTuple {
    let one = Rational::one();
    ExponentTuple(
        s.values()
            .iter()
            .map(|v| if v > &one { one.clone() } else { v.clone() })
            .collect(),
    )
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    rows: Vec<Vec<Rational>>,
}

#[derive(Serialize, Deserialize)]
struct DatumJson {
    ambient_dim: usize,
    maps: Vec<MapJson>,
}

impl From<&HblDatum> for DatumJson {
    fn from(d: &HblDatum) -> Self {
        DatumJson {
            ambient_dim: d.ambient_dim,
            maps: d
                .maps
                .iter()
                .map(|m| MapJson { rows: m.row_vecs() })
                .collect(),
        }
    }
}

impl HblDatum {
    /// Parses the datum JSON schema; entries must be integers.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: DatumJson = serde_json::from_str(text)?;
        let d = raw.ambient_dim;
        let maps = raw
            .maps
            .into_iter()
            .enumerate()
            .map(|(j, m)| {
                let matrix = RationalMatrix::from_rows(m.rows, d)
                    .map_err(|e| Error::InvalidDatum(format!("map {j}: {e}")))?;
                if !matrix.is_integral() {
                    return Err(Error::InvalidDatum(format!(
                        "map {j} has non-integer entries"
                    )));
                }
                Ok(matrix)
            })
            .collect::<Result<Vec<_>>>()?;
        HblDatum::new(d, maps)
    }

    /// Integer entries are written as JSON numbers.
    pub fn to_json_value(&self) -> serde_json::Value {
        let maps: Vec<serde_json::Value> = self
            .maps
            .iter()
            .map(|m| {
                let rows: Vec<serde_json::Value> = (0..m.rows())
                    .map(|i| {
                        m.row(i)
                            .iter()
                            .map(|x| match x.to_integer().and_then(|n| i64::try_from(n).ok()) {
                                Some(n) => serde_json::Value::from(n),
                                None => serde_json::Value::from(x.to_string()),
                            })
                            .collect()
                    })
                    .collect();
                serde_json::json!({ "rows": rows })
            })
            .collect();
        serde_json::json!({ "ambient_dim": self.ambient_dim, "maps": maps })
    }
}

/// A few data used throughout tests, benches and docs.
pub mod named {
    use super::HblDatum;

    /// Matrix multiplication: φ_1(i,j,k) = (i,j), φ_2 = (i,k), φ_3 = (j,k).
    pub fn matmul() -> HblDatum {
        HblDatum::from_integer_maps(
            3,
            &[
                vec![vec![1, 0, 0], vec![0, 1, 0]],
                vec![vec![1, 0, 0], vec![0, 0, 1]],
                vec![vec![0, 1, 0], vec![0, 0, 1]],
            ],
        )
        .expect("valid datum")
    }

    /// Loomis–Whitney in the plane: φ_1(x,y) = x, φ_2(x,y) = y.
    pub fn loomis_whitney_2d() -> HblDatum {
        HblDatum::from_integer_maps(2, &[vec![vec![1, 0]], vec![vec![0, 1]]]).expect("valid datum")
    }

    /// Loomis–Whitney in ℚ³: the three coordinate-plane projections.
    pub fn loomis_whitney_3d() -> HblDatum {
        HblDatum::from_integer_maps(
            3,
            &[
                vec![vec![0, 1, 0], vec![0, 0, 1]],
                vec![vec![1, 0, 0], vec![0, 0, 1]],
                vec![vec![1, 0, 0], vec![0, 1, 0]],
            ],
        )
        .expect("valid datum")
    }

    /// A single identity map on ℚ^d.
    pub fn identity(d: usize) -> HblDatum {
        let rows: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
            .collect();
        HblDatum::from_integer_maps(d, &[rows]).expect("valid datum")
    }
}
