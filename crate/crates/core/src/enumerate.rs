//! A fixed, prefix-stable, duplicate-free listing of all subspaces of ℚ^d.
//!
//! Subspaces are produced in blocks of increasing height h = 0, 1, 2, …:
//! block h holds the subspaces spanned by integer vectors with entries in
//! [−h, h] that did not occur in an earlier block, sorted by dimension and
//! then lexicographically by their flattened canonical basis. Every subspace
//! of ℚ^d has an integer spanning set, so every one appears in some block.
//!
//! Blocks are computed once per ambient dimension and cached process-wide.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use crate::linalg::{RationalMatrix, Subspace};
use crate::rational::Rational;

struct Enumeration {
    d: usize,
    list: Vec<Subspace>,
    /// `block_ends[h]` is the list length once block h is appended.
    block_ends: Vec<usize>,
    seen: HashSet<Subspace>,
}

/// ℚ^0 has one subspace and ℚ^1 has two; higher dimensions have infinitely many.
fn total_count(d: usize) -> Option<usize> {
    match d {
        0 => Some(1),
        1 => Some(2),
        _ => None,
    }
}

impl Enumeration {
    fn new(d: usize) -> Self {
        Enumeration {
            d,
            list: Vec::new(),
            block_ends: Vec::new(),
            seen: HashSet::new(),
        }
    }

    fn is_complete(&self) -> bool {
        total_count(self.d).is_some_and(|n| self.list.len() >= n)
    }

    fn push_next_block(&mut self) {
        let h = self.block_ends.len();
        // the set is already ordered by (dimension, flattened basis)
        let fresh: Vec<Subspace> = spanned_at_height(self.d, h)
            .into_iter()
            .map(|k| k.0)
            .filter(|s| !self.seen.contains(s))
            .collect();
        for s in fresh {
            self.seen.insert(s.clone());
            self.list.push(s);
        }
        self.block_ends.push(self.list.len());
    }

    fn ensure_len(&mut self, n: usize) {
        while self.list.len() < n && !self.is_complete() {
            self.push_next_block();
        }
    }

    fn ensure_height(&mut self, h: usize) {
        while self.block_ends.len() <= h {
            self.push_next_block();
        }
    }
}

/// All integer vectors in [−h, h]^d whose first nonzero entry is positive.
fn box_vectors(d: usize, h: usize) -> Vec<Vec<i64>> {
    let h = h as i64;
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (-h..=h).map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0));
    out
}

/// Every subspace spanned by at most d vectors of height ≤ h.
fn spanned_at_height(d: usize, h: usize) -> BTreeSet<SubspaceKey> {
    let mut all = BTreeSet::new();
    all.insert(SubspaceKey(Subspace::zero(d)));
    if h == 0 || d == 0 {
        return all;
    }
    let vectors: Vec<Vec<Rational>> = box_vectors(d, h)
        .into_iter()
        .map(|v| v.into_iter().map(Rational::from).collect())
        .collect();

    // Each subspace spanned by box vectors has a basis of box vectors, so
    // growing spans one box vector at a time reaches all of them.
    let mut level: HashSet<Subspace> = vectors
        .iter()
        .map(|v| Subspace::span(std::slice::from_ref(v), d).expect("width d"))
        .collect();
    for k in 1..=d {
        all.extend(level.iter().cloned().map(SubspaceKey));
        if k == d {
            break;
        }
        if k + 1 == d {
            all.insert(SubspaceKey(Subspace::full(d)));
            break;
        }
        let mut next = HashSet::new();
        for u in &level {
            for v in &vectors {
                if u.contains_vector(v) {
                    continue;
                }
                let row = RationalMatrix::from_rows(vec![v.clone()], d).expect("width d");
                next.insert(Subspace::row_space(&u.basis().vstack(&row).expect("width d")));
            }
        }
        level = next;
    }
    all
}

/// Orders subspaces only so they can live in a `BTreeSet`.
#[derive(PartialEq, Eq)]
struct SubspaceKey(Subspace);

impl PartialOrd for SubspaceKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubspaceKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .dim()
            .cmp(&other.0.dim())
            .then_with(|| self.0.flat_basis().cmp(other.0.flat_basis()))
    }
}

fn cache(d: usize) -> Arc<Mutex<Enumeration>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Mutex<Enumeration>>>>> = OnceLock::new();
    let mut map = CACHE
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .expect("enumeration cache poisoned");
    map.entry(d)
        .or_insert_with(|| Arc::new(Mutex::new(Enumeration::new(d))))
        .clone()
}

/// The first `n` subspaces of ℚ^d (fewer when d ≤ 1 and n exceeds the
/// number of subspaces that exist).
pub fn enumerate_subspaces(d: usize, n: usize) -> Vec<Subspace> {
    let cell = cache(d);
    let mut e = cell.lock().expect("enumeration poisoned");
    e.ensure_len(n);
    e.list.iter().take(n).cloned().collect()
}

/// The subspace at position `index` of the enumeration, if it exists.
pub fn subspace_at(d: usize, index: usize) -> Option<Subspace> {
    let cell = cache(d);
    let mut e = cell.lock().expect("enumeration poisoned");
    e.ensure_len(index + 1);
    e.list.get(index).cloned()
}

/// All subspaces of height at most `h`, in enumeration order.
pub fn subspaces_up_to_height(d: usize, h: usize) -> Vec<Subspace> {
    let cell = cache(d);
    let mut e = cell.lock().expect("enumeration poisoned");
    e.ensure_height(h);
    e.list[..e.block_ends[h]].to_vec()
}

/// The height block that position `index` falls in.
pub fn height_of_index(d: usize, index: usize) -> Option<usize> {
    let cell = cache(d);
    let mut e = cell.lock().expect("enumeration poisoned");
    e.ensure_len(index + 1);
    if index >= e.list.len() {
        return None;
    }
    e.block_ends.iter().position(|&end| index < end)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: &[i64]) -> Subspace {
        Subspace::span_i64(&[v.to_vec()], v.len()).unwrap()
    }

    #[test]
    fn dimension_one_has_two_subspaces() {
        let list = enumerate_subspaces(1, 2);
        assert_eq!(list, vec![Subspace::zero(1), Subspace::full(1)]);
        assert_eq!(enumerate_subspaces(1, 5).len(), 2);
        assert_eq!(enumerate_subspaces(0, 3), vec![Subspace::zero(0)]);
    }

    #[test]
    fn zero_subspace_first() {
        assert_eq!(enumerate_subspaces(2, 1), vec![Subspace::zero(2)]);
        assert_eq!(height_of_index(2, 0), Some(0));
    }

    #[test]
    fn height_one_block_in_the_plane() {
        let block = subspaces_up_to_height(2, 1);
        for s in [
            line(&[1, 0]),
            line(&[0, 1]),
            line(&[1, 1]),
            line(&[1, -1]),
            Subspace::full(2),
        ] {
            assert!(block.contains(&s), "{s:?} missing");
        }
        // zero, four lines, the plane
        assert_eq!(block.len(), 6);
        let dims: Vec<usize> = block.iter().map(Subspace::dim).collect();
        assert_eq!(dims, vec![0, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn height_one_block_in_space() {
        // 13 lines through {-1,0,1}^3 up to sign
        let block = subspaces_up_to_height(3, 1);
        let count = |k| block.iter().filter(|s| s.dim() == k).count();
        assert_eq!((count(0), count(1), count(3)), (1, 13, 1));
        assert_eq!(block[1], line(&[0, 0, 1]));
        // every plane with a normal in {-1,0,1}^3 has a height-1 basis
        let planes: Vec<&Subspace> = block.iter().filter(|s| s.dim() == 2).collect();
        for n in box_vectors(3, 1) {
            let normal = RationalMatrix::from_i64_rows(&[n.clone()], 3).unwrap();
            let plane = crate::linalg::kernel_subspace(&normal);
            assert!(planes.contains(&&plane), "plane with normal {n:?} missing");
        }
    }

    #[test]
    fn prefix_stable_and_duplicate_free() {
        let short = enumerate_subspaces(2, 10);
        let long = enumerate_subspaces(2, 40);
        assert_eq!(&long[..10], &short[..]);
        let unique: HashSet<&Subspace> = long.iter().collect();
        assert_eq!(unique.len(), long.len());
    }
}
