//! Face lattices built by incidence closure, f-vectors, combinatorial duals
//! and quotient intervals.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::bitset::IndexSet;
use crate::error::{PolyError, Result};
use crate::polytope::Polytope;

/// A face, named by the atoms (vertices) it contains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Face {
    pub vertex_set: IndexSet,
    pub dim: i64,
}

/// All faces from ∅ up to the polytope itself, sorted by `(dim, vertex_set)`.
/// `covers` holds `(lower, upper)` index pairs of the covering relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceLattice {
    pub dim: i64,
    pub atom_count: usize,
    pub faces: Vec<Face>,
    pub covers: Vec<(usize, usize)>,
    index: HashMap<IndexSet, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FVector {
    pub dim: i64,
    /// `f_0 .. f_{dim-1}`
    pub counts: Vec<u64>,
}

impl FVector {
    /// `f_k` with the conventions `f_{-1} = f_dim = 1`.
    pub fn f(&self, k: i64) -> u64 {
        if k == -1 || k == self.dim {
            1
        } else if k < -1 || k > self.dim {
            0
        } else {
            self.counts[k as usize]
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &f)| if k % 2 == 0 { f as i64 } else { -(f as i64) })
            .sum()
    }

    /// `Σ (-1)^k f_k = 1 - (-1)^dim`
    pub fn euler_holds(&self) -> bool {
        let expected = if self.dim % 2 == 0 { 0 } else { 2 };
        self.euler_characteristic() == expected
    }

    pub fn reversed(&self) -> FVector {
        FVector {
            dim: self.dim,
            counts: self.counts.iter().rev().copied().collect(),
        }
    }
}

pub fn face_lattice(p: &Polytope) -> Result<FaceLattice> {
    let coatoms: Vec<IndexSet> = p.facets.iter().map(|f| f.vertex_set.clone()).collect();
    FaceLattice::from_incidence(p.vertex_count(), &coatoms, p.dim as i64)
}

pub fn f_vector(lattice: &FaceLattice) -> Result<FVector> {
    lattice.f_vector()
}

impl FaceLattice {
    /// Lattice generated by all intersections of the coatoms (facets, given
    /// as atom sets). A set is a face iff it equals the meet of the coatoms
    /// containing it, which is exactly what the closure produces.
    pub fn from_incidence(atom_count: usize, coatoms: &[IndexSet], dim: i64) -> Result<FaceLattice> {
        let empty = IndexSet::new();
        let top = IndexSet::full(atom_count);
        if dim <= 0 {
            let mut faces = vec![Face { vertex_set: empty, dim: -1 }];
            let mut covers = Vec::new();
            if dim == 0 {
                if atom_count != 1 {
                    return Err(PolyError::LatticeInconsistent(format!(
                        "a point has one vertex, got {atom_count}"
                    )));
                }
                faces.push(Face { vertex_set: top, dim: 0 });
                covers.push((0, 1));
            }
            return Ok(Self::assemble(dim, atom_count, faces, covers));
        }

        let mut seen: HashSet<IndexSet> = HashSet::new();
        let mut queue = vec![top.clone()];
        seen.insert(top);
        while let Some(face) = queue.pop() {
            for c in coatoms {
                let meet = face.intersection(c);
                if meet != face && seen.insert(meet.clone()) {
                    queue.push(meet);
                }
            }
        }
        seen.insert(empty);

        let mut sets: Vec<IndexSet> = seen.into_iter().collect();
        sets.sort_by_key(|s| s.len());
        let pos: HashMap<&IndexSet, usize> = sets.iter().enumerate().map(|(i, s)| (s, i)).collect();

        let mut below: Vec<Vec<usize>> = vec![Vec::new(); sets.len()];
        for (i, f) in sets.iter().enumerate() {
            if f.is_empty() {
                continue;
            }
            let mut candidates: Vec<&IndexSet> = Vec::new();
            let mut uniq: HashSet<IndexSet> = HashSet::new();
            for c in coatoms {
                if f.is_subset(c) {
                    continue;
                }
                let meet = f.intersection(c);
                if !uniq.contains(&meet) {
                    candidates.push(&sets[pos[&meet]]);
                    uniq.insert(meet);
                }
            }
            for (a, cand) in candidates.iter().enumerate() {
                let dominated = candidates
                    .iter()
                    .enumerate()
                    .any(|(b, other)| a != b && cand.len() < other.len() && cand.is_subset(other));
                if !dominated {
                    below[i].push(pos[cand]);
                }
            }
        }

        let mut dims: Vec<i64> = vec![i64::MIN; sets.len()];
        for i in 0..sets.len() {
            if sets[i].is_empty() {
                dims[i] = -1;
                continue;
            }
            let lower: HashSet<i64> = below[i].iter().map(|&j| dims[j]).collect();
            if lower.len() != 1 {
                return Err(PolyError::LatticeInconsistent(format!(
                    "face {:?} covers faces of dimensions {lower:?}",
                    sets[i]
                )));
            }
            dims[i] = lower.into_iter().next().unwrap() + 1;
        }

        let mut order: Vec<usize> = (0..sets.len()).collect();
        order.sort_by(|&a, &b| (dims[a], &sets[a]).cmp(&(dims[b], &sets[b])));
        let mut rank_of = vec![0; sets.len()];
        for (new, &old) in order.iter().enumerate() {
            rank_of[old] = new;
        }
        let faces: Vec<Face> = order
            .iter()
            .map(|&old| Face { vertex_set: sets[old].clone(), dim: dims[old] })
            .collect();
        let mut covers: Vec<(usize, usize)> = below
            .iter()
            .enumerate()
            .flat_map(|(upper, lows)| lows.iter().map(move |&low| (low, upper)))
            .map(|(low, upper)| (rank_of[low], rank_of[upper]))
            .collect();
        covers.sort_unstable();

        let lattice = Self::assemble(dim, atom_count, faces, covers);
        if lattice.faces.last().map(|f| f.dim) != Some(dim) {
            return Err(PolyError::LatticeInconsistent(format!(
                "top face has dimension {:?}, expected {dim}",
                lattice.faces.last().map(|f| f.dim)
            )));
        }
        Ok(lattice)
    }

    fn assemble(dim: i64, atom_count: usize, faces: Vec<Face>, covers: Vec<(usize, usize)>) -> Self {
        let index = faces
            .iter()
            .enumerate()
            .map(|(i, f)| (f.vertex_set.clone(), i))
            .collect();
        FaceLattice { dim, atom_count, faces, covers, index }
    }

    pub fn index_of(&self, set: &IndexSet) -> Option<usize> {
        self.index.get(set).copied()
    }

    pub fn face(&self, set: &IndexSet) -> Option<&Face> {
        self.index_of(set).map(|i| &self.faces[i])
    }

    pub fn faces_of_dim(&self, k: i64) -> impl Iterator<Item = &Face> + '_ {
        self.faces.iter().filter(move |f| f.dim == k)
    }

    pub fn count(&self, k: i64) -> usize {
        self.faces_of_dim(k).count()
    }

    /// Faces containing `set`, including the top element.
    pub fn faces_containing<'a>(&'a self, set: &'a IndexSet) -> impl Iterator<Item = &'a Face> + 'a {
        self.faces.iter().filter(move |f| set.is_subset(&f.vertex_set))
    }

    /// Counts by dimension; fails if the Euler relation does not hold.
    pub fn f_vector(&self) -> Result<FVector> {
        let dim = self.dim.max(0);
        let counts = (0..dim).map(|k| self.count(k) as u64).collect();
        let fv = FVector { dim: self.dim, counts };
        if self.dim >= 1 && !fv.euler_holds() {
            return Err(PolyError::EulerViolation(fv.counts));
        }
        Ok(fv)
    }

    fn coatom_sets(&self) -> Vec<&IndexSet> {
        self.faces_of_dim(self.dim - 1).map(|f| &f.vertex_set).collect()
    }

    /// Order-reversed lattice. Atoms of the dual are the coatoms (facets) of
    /// `self`, in lattice order.
    pub fn dual(&self) -> Result<FaceLattice> {
        if self.dim <= 0 {
            return Ok(self.clone());
        }
        let facets = self.coatom_sets();
        let new_coatoms: Vec<IndexSet> = (0..self.atom_count)
            .map(|v| {
                facets
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| f.contains(v))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        FaceLattice::from_incidence(facets.len(), &new_coatoms, self.dim)
    }

    /// Face lattice of the quotient `P/G`: the interval `[G, P]`, regraded to
    /// dimension `dim P - dim G - 1`. Its atoms are the `(dim G + 1)`-faces
    /// containing `G`, in lattice order.
    pub fn quotient(&self, g: &IndexSet) -> Result<FaceLattice> {
        let face = self.face(g).ok_or(PolyError::NotAFace)?;
        if face.dim < 0 || face.dim >= self.dim {
            return Err(PolyError::OutOfRange(format!(
                "quotient needs a nonempty proper face, got dimension {}",
                face.dim
            )));
        }
        let atoms: Vec<&IndexSet> = self
            .faces_containing(g)
            .filter(|f| f.dim == face.dim + 1)
            .map(|f| &f.vertex_set)
            .collect();
        let coatoms: Vec<IndexSet> = self
            .faces_containing(g)
            .filter(|f| f.dim == self.dim - 1)
            .map(|f| {
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.is_subset(&f.vertex_set))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        FaceLattice::from_incidence(atoms.len(), &coatoms, self.dim - face.dim - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Vector;
    use crate::polytope::hull_from_points;

    fn cube(d: usize) -> Polytope {
        let pts: Vec<Vector> = (0..1u32 << d)
            .map(|m| Vector::from_ints(&(0..d).map(|i| ((m >> i) & 1) as i64).collect::<Vec<_>>()))
            .collect();
        hull_from_points(&pts).unwrap()
    }

    fn simplex(d: usize) -> Polytope {
        let mut pts: Vec<Vector> = (0..d).map(|i| Vector::unit(d, i)).collect();
        pts.push(Vector::zeros(d));
        hull_from_points(&pts).unwrap()
    }

    /// Independent oracle: every vertex subset that equals its own closure.
    fn closure_oracle_count(p: &Polytope) -> usize {
        let n = p.vertex_count();
        (0u64..1 << n)
            .filter(|mask| {
                let set: IndexSet = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                p.is_face(&set)
            })
            .count()
    }

    #[test]
    fn square_and_simplices() {
        let sq = face_lattice(&cube(2)).unwrap();
        assert_eq!(sq.faces.len(), 10);
        for d in 1..=5 {
            let l = face_lattice(&simplex(d)).unwrap();
            assert_eq!(l.faces.len(), 1 << (d + 1));
        }
    }

    #[test]
    fn cube_lattice() {
        let c = cube(3);
        let l = face_lattice(&c).unwrap();
        assert_eq!(l.faces.len(), 28);
        assert_eq!(closure_oracle_count(&c), 28);
        assert_eq!(l.f_vector().unwrap().counts, vec![8, 12, 6]);
        assert_eq!(l.f_vector().unwrap().f(-1), 1);
        assert_eq!(l.f_vector().unwrap().f(3), 1);
        // every face sits in exactly dim - j facets on a simple polytope's vertex
        let edges_per_vertex = l.covers.iter().filter(|&&(lo, _)| l.faces[lo].dim == 0).count();
        assert_eq!(edges_per_vertex, 24);
    }

    #[test]
    fn dual_of_cube_is_octahedral() {
        let l = face_lattice(&cube(3)).unwrap();
        let d = l.dual().unwrap();
        assert_eq!(d.f_vector().unwrap().counts, vec![6, 12, 8]);
        assert_eq!(d.dual().unwrap(), l);
        let s = face_lattice(&simplex(4)).unwrap();
        let fv = s.dual().unwrap().f_vector().unwrap();
        assert_eq!(fv, fv.reversed());
    }

    #[test]
    fn quotients() {
        let l = face_lattice(&cube(3)).unwrap();
        let q = l.quotient(&IndexSet::singleton(0)).unwrap();
        assert_eq!(q.dim, 2);
        assert_eq!(q.f_vector().unwrap().counts, vec![3, 3]);
        let facet = l.faces_of_dim(2).next().unwrap().vertex_set.clone();
        let pt = l.quotient(&facet).unwrap();
        assert_eq!((pt.dim, pt.faces.len()), (0, 2));
        let s = face_lattice(&simplex(4)).unwrap();
        let link = s.quotient(&IndexSet::singleton(2)).unwrap();
        assert_eq!(link.f_vector().unwrap().counts, vec![4, 6, 4]);
        assert_eq!(l.quotient(&[0, 7].into_iter().collect()).unwrap_err(), PolyError::NotAFace);
        assert!(matches!(l.quotient(&IndexSet::new()), Err(PolyError::OutOfRange(_))));
    }

    #[test]
    fn euler_violation_detected() {
        let fv = FVector { dim: 3, counts: vec![8, 12, 5] };
        assert!(!fv.euler_holds());
    }
}
