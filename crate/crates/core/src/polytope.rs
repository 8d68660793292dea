//! Polytopes from point sets: affine restriction into intrinsic coordinates
//! and exact facet enumeration.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bitset::IndexSet;
use crate::error::{PolyError, Result};
use crate::exact::{affine_basis_indices, centroid, nullspace, orthogonalize, Hyperplane, Scalar, Vector};

/// Input guard on the number of points handed to the hull.
pub const MAX_POINTS: usize = 64;
/// Largest supported intrinsic dimension.
pub const MAX_DIM: usize = 7;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetRecord {
    pub vertex_set: IndexSet,
    pub supporting: Hyperplane,
}

/// Affine map from intrinsic coordinates into the ambient space:
/// `x ↦ origin + Σ x_i basis_i`. The basis vectors are pairwise orthogonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub origin: Vector,
    pub basis: Vec<Vector>,
}

impl Embedding {
    pub fn identity(dim: usize) -> Self {
        Embedding {
            origin: Vector::zeros(dim),
            basis: (0..dim).map(|i| Vector::unit(dim, i)).collect(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        let mut out = self.origin.clone();
        for (c, b) in x.coords().iter().zip(&self.basis) {
            out = out.add_scaled(c, b);
        }
        out
    }

    pub fn apply_linear(&self, x: &Vector) -> Vector {
        let mut out = Vector::zeros(self.origin.dim());
        for (c, b) in x.coords().iter().zip(&self.basis) {
            out = out.add_scaled(c, b);
        }
        out
    }
}

/// A convex polytope with exact vertices in intrinsic coordinates.
///
/// Intrinsic coordinates are taken with respect to an orthogonal (not
/// orthonormal) frame; `metric[i]` is the squared length of the i-th frame
/// vector, so Euclidean angles can be recovered where they are needed.
#[derive(Clone, Debug)]
pub struct Polytope {
    pub ambient_dim: usize,
    pub dim: usize,
    pub vertices: Vec<Vector>,
    pub facets: Vec<FacetRecord>,
    pub embedding: Embedding,
    pub metric: Vec<Scalar>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeFile {
    ambient_dim: usize,
    vertices: Vec<Vector>,
}

impl Polytope {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn ambient_vertices(&self) -> Vec<Vector> {
        self.vertices.iter().map(|v| self.embedding.apply(v)).collect()
    }

    pub fn all_vertices(&self) -> IndexSet {
        IndexSet::full(self.vertices.len())
    }

    pub fn facets_containing(&self, set: &IndexSet) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| set.is_subset(&f.vertex_set))
            .map(|(i, _)| i)
            .collect()
    }

    /// Smallest face containing `set`: the meet of all facets containing it.
    pub fn closure(&self, set: &IndexSet) -> IndexSet {
        self.facets_containing(set)
            .into_iter()
            .fold(self.all_vertices(), |acc, i| {
                acc.intersection(&self.facets[i].vertex_set)
            })
    }

    pub fn is_face(&self, set: &IndexSet) -> bool {
        if set.iter().any(|i| i >= self.vertices.len()) {
            return false;
        }
        &self.closure(set) == set
    }

    /// Every vertex lies in exactly `dim` facets.
    pub fn is_simple(&self) -> bool {
        (0..self.vertices.len())
            .all(|v| self.facets_containing(&IndexSet::singleton(v)).len() == self.dim)
    }

    /// Every facet has exactly `dim` vertices.
    pub fn is_simplicial(&self) -> bool {
        self.facets.iter().all(|f| f.vertex_set.len() == self.dim)
    }

    /// The facet as a polytope in its own `(dim - 1)`-dimensional frame.
    /// Vertex `i` of the result is the i-th smallest vertex index of the facet.
    pub fn facet_as_polytope(&self, facet_index: usize) -> Result<Polytope> {
        let facet = self.facets.get(facet_index).ok_or(PolyError::IndexOutOfRange {
            index: facet_index,
            len: self.facets.len(),
        })?;
        let points: Vec<Vector> = facet
            .vertex_set
            .iter()
            .map(|i| self.vertices[i].clone())
            .collect();
        let (poly, sources) = build_in_frame(&points, &self.metric, &self.embedding, self.ambient_dim)?;
        debug_assert_eq!(sources, (0..points.len()).collect::<Vec<_>>());
        Ok(poly)
    }

    /// Euclidean lengths of the intrinsic frame vectors.
    pub fn frame_scales(&self) -> Vec<f64> {
        self.metric
            .iter()
            .map(|g| crate::exact::scalar_to_f64(g).sqrt())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = PolytopeFile {
            ambient_dim: self.ambient_dim,
            vertices: self.ambient_vertices(),
        };
        serde_json::to_string_pretty(&file).expect("polytope serializes")
    }

    /// Facets and lattice are always recomputed from the vertex list.
    pub fn from_json(text: &str) -> Result<Polytope> {
        let file: PolytopeFile =
            serde_json::from_str(text).map_err(|e| PolyError::Parse(e.to_string()))?;
        if let Some(bad) = file.vertices.iter().find(|v| v.dim() != file.ambient_dim) {
            return Err(PolyError::MixedDimensions(file.ambient_dim, bad.dim()));
        }
        hull_from_points(&file.vertices)
    }
}

/// Convex hull of a finite point set. Non-vertex points are dropped; kept
/// vertices retain their relative input order.
pub fn hull_from_points(points: &[Vector]) -> Result<Polytope> {
    hull_with_sources(points).map(|(p, _)| p)
}

/// Like [`hull_from_points`], also returning for each vertex the index of the
/// input point it came from.
pub fn hull_with_sources(points: &[Vector]) -> Result<(Polytope, Vec<usize>)> {
    let first = points.first().ok_or(PolyError::EmptyInput)?;
    let n = first.dim();
    if n == 0 {
        return Err(PolyError::UnsupportedDimension(0));
    }
    let metric = vec![Scalar::one(); n];
    build_in_frame(points, &metric, &Embedding::identity(n), n)
}

fn build_in_frame(
    points: &[Vector],
    metric: &[Scalar],
    parent: &Embedding,
    ambient_dim: usize,
) -> Result<(Polytope, Vec<usize>)> {
    let first = points.first().ok_or(PolyError::EmptyInput)?;
    if points.len() > MAX_POINTS {
        return Err(PolyError::TooLarge(format!(
            "{} points (limit {MAX_POINTS})",
            points.len()
        )));
    }
    if let Some(bad) = points.iter().find(|p| p.dim() != first.dim()) {
        return Err(PolyError::MixedDimensions(first.dim(), bad.dim()));
    }

    let mut unique: Vec<&Vector> = Vec::new();
    let mut unique_src: Vec<usize> = Vec::new();
    let mut seen: HashMap<&Vector, ()> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        if seen.insert(p, ()).is_none() {
            unique.push(p);
            unique_src.push(i);
        }
    }

    let basis_idx = affine_basis_indices(&unique);
    let dim = basis_idx.len() - 1;
    if dim > MAX_DIM {
        return Err(PolyError::TooLarge(format!("dimension {dim} (limit {MAX_DIM})")));
    }

    let (coords, frame_metric, embedding) = if dim == first.dim() {
        (
            unique.iter().map(|p| (*p).clone()).collect::<Vec<_>>(),
            metric.to_vec(),
            parent.clone(),
        )
    } else {
        let base = unique[basis_idx[0]];
        let diffs: Vec<Vector> = basis_idx[1..].iter().map(|&i| unique[i] - base).collect();
        let frame: Vec<Vector> = orthogonalize(&diffs, metric)
            .iter()
            .map(Vector::primitive)
            .collect();
        let norms: Vec<Scalar> = frame.iter().map(|c| c.dot_metric(c, metric)).collect();
        let coords = unique
            .iter()
            .map(|p| {
                let d = *p - base;
                Vector::new(
                    frame
                        .iter()
                        .zip(&norms)
                        .map(|(c, g)| d.dot_metric(c, metric) / g)
                        .collect(),
                )
            })
            .collect();
        let embedding = Embedding {
            origin: parent.apply(base),
            basis: frame.iter().map(|c| parent.apply_linear(c)).collect(),
        };
        (coords, norms, embedding)
    };

    let (vertex_idx, facet_sets) = hull_core(&coords, dim)?;
    let position: HashMap<usize, usize> = vertex_idx
        .iter()
        .enumerate()
        .map(|(pos, &i)| (i, pos))
        .collect();
    let mut facets: Vec<FacetRecord> = facet_sets
        .into_iter()
        .map(|(set, plane)| FacetRecord {
            vertex_set: set.iter().filter_map(|i| position.get(&i).copied()).collect(),
            supporting: plane.normalized(),
        })
        .collect();
    facets.sort_by(|a, b| a.vertex_set.cmp(&b.vertex_set));

    let poly = Polytope {
        ambient_dim,
        dim,
        vertices: vertex_idx.iter().map(|&i| coords[i].clone()).collect(),
        facets,
        embedding,
        metric: frame_metric,
    };
    let sources = vertex_idx.iter().map(|&i| unique_src[i]).collect();
    Ok((poly, sources))
}

/// Hyperplane through `dim` affinely independent points, oriented so that
/// `inside` is strictly on the negative side.
fn plane_through(points: &[&Vector], inside: &Vector) -> Hyperplane {
    let base = points[0];
    let rows: Vec<Vector> = points[1..].iter().map(|p| *p - base).collect();
    let normal = nullspace(&rows, base.dim())
        .into_iter()
        .next()
        .expect("affinely independent points span a hyperplane");
    let offset = normal.dot(base);
    let plane = Hyperplane { normal, offset };
    if plane.slack(inside) > Scalar::zero() {
        Hyperplane {
            normal: plane.normal.scale(&-Scalar::one()),
            offset: -plane.offset,
        }
    } else {
        plane
    }
}

type FacetSets = Vec<(IndexSet, Hyperplane)>;

/// Beneath–beyond over full-dimensional points. Returns vertex indices (in
/// input order) and facets as sets of input indices.
fn hull_core(points: &[Vector], dim: usize) -> Result<(Vec<usize>, FacetSets)> {
    match dim {
        0 => return Ok((vec![0], Vec::new())),
        1 => {
            let (mut lo, mut hi) = (0, 0);
            for (i, p) in points.iter().enumerate() {
                if p[0] < points[lo][0] {
                    lo = i;
                }
                if p[0] > points[hi][0] {
                    hi = i;
                }
            }
            let one = Vector::from_ints(&[1]);
            let minus = Vector::from_ints(&[-1]);
            let facets = vec![
                (
                    IndexSet::singleton(lo),
                    Hyperplane { normal: minus, offset: -points[lo][0].clone() },
                ),
                (
                    IndexSet::singleton(hi),
                    Hyperplane { normal: one, offset: points[hi][0].clone() },
                ),
            ];
            let mut verts = vec![lo, hi];
            verts.sort_unstable();
            return Ok((verts, facets));
        }
        _ => {}
    }

    let refs: Vec<&Vector> = points.iter().collect();
    let init = affine_basis_indices(&refs);
    debug_assert_eq!(init.len(), dim + 1);
    let inside = centroid(&init.iter().map(|&i| &points[i]).collect::<Vec<_>>());

    let mut facets: FacetSets = (0..=dim)
        .map(|skip| {
            let members: Vec<usize> = init
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != skip)
                .map(|(_, &i)| i)
                .collect();
            let pts: Vec<&Vector> = members.iter().map(|&i| &points[i]).collect();
            (members.into_iter().collect(), plane_through(&pts, &inside))
        })
        .collect();

    let rest = (0..points.len()).filter(|i| !init.contains(i));
    for p in rest {
        let point = &points[p];
        let slacks: Vec<Scalar> = facets.iter().map(|(_, h)| h.slack(point)).collect();
        let zero = Scalar::zero();
        if slacks.iter().all(|s| *s <= zero) {
            // inside the current hull, so never a vertex of the final one
            continue;
        }
        let mut created: Vec<(IndexSet, Hyperplane)> = Vec::new();
        let mut created_key: HashMap<Hyperplane, usize> = HashMap::new();
        for (fi, (fset, _)) in facets.iter().enumerate() {
            if slacks[fi] <= zero {
                continue;
            }
            for (gi, (gset, _)) in facets.iter().enumerate() {
                if slacks[gi] >= zero {
                    continue;
                }
                let ridge = fset.intersection(gset);
                if ridge.len() + 1 < dim {
                    continue;
                }
                let ridge_pts: Vec<&Vector> = ridge.iter().map(|i| &points[i]).collect();
                let span = affine_basis_indices(&ridge_pts);
                if span.len() != dim - 1 {
                    continue;
                }
                let mut through: Vec<&Vector> = span.iter().map(|&j| ridge_pts[j]).collect();
                through.push(point);
                let plane = plane_through(&through, &inside);
                let mut set = ridge.clone();
                set.insert(p);
                match created_key.get(&plane.normalized()) {
                    Some(&k) => created[k].0 = created[k].0.union(&set),
                    None => {
                        created_key.insert(plane.normalized(), created.len());
                        created.push((set, plane));
                    }
                }
            }
        }
        let mut next: FacetSets = Vec::with_capacity(facets.len() + created.len());
        for ((mut set, plane), s) in facets.into_iter().zip(&slacks) {
            if *s > zero {
                continue;
            }
            if s.is_zero() {
                set.insert(p);
            }
            next.push((set, plane));
        }
        next.extend(created);
        facets = next;
    }

    // A point is a vertex iff the facets through it meet only in it.
    let mut vertices = Vec::new();
    for i in 0..points.len() {
        let mut meet: Option<IndexSet> = None;
        for (set, _) in &facets {
            if set.contains(i) {
                meet = Some(match meet {
                    None => set.clone(),
                    Some(m) => m.intersection(set),
                });
            }
        }
        if meet.is_some_and(|m| m.len() == 1) {
            vertices.push(i);
        }
    }
    Ok((vertices, facets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::frac;
    use itertools::Itertools;

    fn pts(rows: &[&[i64]]) -> Vec<Vector> {
        rows.iter().map(|r| Vector::from_ints(r)).collect()
    }

    fn cube_points(d: usize) -> Vec<Vector> {
        (0..1u32 << d)
            .map(|m| Vector::from_ints(&(0..d).map(|i| ((m >> i) & 1) as i64).collect::<Vec<_>>()))
            .collect()
    }

    /// Independent facet oracle: every d-subset spanning a hyperplane that
    /// leaves all points weakly on one side.
    fn brute_force_facets(points: &[Vector]) -> Vec<IndexSet> {
        let d = points[0].dim();
        let mut found: Vec<IndexSet> = Vec::new();
        for combo in (0..points.len()).combinations(d) {
            let base = &points[combo[0]];
            let rows: Vec<Vector> = combo[1..].iter().map(|&i| &points[i] - base).collect();
            let ns = nullspace(&rows, d);
            if ns.len() != 1 {
                continue;
            }
            let n = &ns[0];
            let c = n.dot(base);
            let signs: Vec<Scalar> = points.iter().map(|p| n.dot(p) - &c).collect();
            let zero = Scalar::zero();
            if signs.iter().all(|s| *s <= zero) || signs.iter().all(|s| *s >= zero) {
                let on: IndexSet = (0..points.len()).filter(|&i| signs[i].is_zero()).collect();
                if !found.contains(&on) {
                    found.push(on);
                }
            }
        }
        found.sort();
        found
    }

    #[test]
    fn square_and_interior_point() {
        let sq = hull_from_points(&pts(&[&[0, 0], &[1, 0], &[1, 1], &[0, 1]])).unwrap();
        assert_eq!((sq.vertex_count(), sq.facets.len(), sq.dim), (4, 4, 2));
        let mut with_center = pts(&[&[0, 0], &[2, 0], &[1, 1], &[2, 2], &[0, 2]]);
        with_center.push(Vector::new(vec![frac(1, 2), frac(3, 2)]));
        let (p, src) = hull_with_sources(&with_center).unwrap();
        assert_eq!(p.vertex_count(), 4);
        assert_eq!(src, vec![0, 1, 3, 4]);
        assert_eq!(p.facets.len(), 4);
    }

    #[test]
    fn cube_matches_brute_force() {
        let points = cube_points(3);
        let cube = hull_from_points(&points).unwrap();
        assert_eq!(cube.facets.len(), 6);
        let got: Vec<IndexSet> = cube.facets.iter().map(|f| f.vertex_set.clone()).collect();
        assert_eq!(got, brute_force_facets(&points));
        assert!(cube.is_simple());
        assert!(!cube.is_simplicial());
    }

    #[test]
    fn families_match_brute_force() {
        use crate::generators::{cross_points, cyclic_points, cube_points as cubes, simplex_points};
        let mut clouds = Vec::new();
        for d in 2..=4 {
            clouds.extend([cubes(d), cross_points(d), cyclic_points(d, d + 3), simplex_points(d)]);
        }
        let mut checked = 0;
        for points in clouds {
            if crate::exact::affine_dim(&points).unwrap() != points[0].dim() as i64 {
                continue;
            }
            let (p, src) = hull_with_sources(&points).unwrap();
            let mut got: Vec<IndexSet> =
                p.facets.iter().map(|f| f.vertex_set.iter().map(|i| src[i]).collect()).collect();
            got.sort();
            assert_eq!(got, brute_force_facets(&points));
            checked += 1;
        }
        assert!(checked >= 9, "{checked}");
    }

    #[test]
    fn edge_midpoints_are_dropped() {
        let mut points = cube_points(3);
        points.push(Vector::new(vec![frac(1, 2), Scalar::zero(), Scalar::zero()]));
        points.push(Vector::new(vec![frac(1, 2), frac(1, 2), Scalar::one()]));
        let p = hull_from_points(&points).unwrap();
        assert_eq!(p.vertex_count(), 8);
        assert_eq!(p.facets.len(), 6);
        assert!(p.facets.iter().all(|f| f.vertex_set.len() == 4));
    }

    #[test]
    fn lower_dimensional_input_is_restricted() {
        // a triangle lying in the plane x + y + z = 1 inside R^3
        let points = pts(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let tri = hull_from_points(&points).unwrap();
        assert_eq!((tri.ambient_dim, tri.dim), (3, 2));
        assert_eq!(tri.facets.len(), 3);
        assert_eq!(tri.ambient_vertices(), points);
        let seg = hull_from_points(&pts(&[&[0, 0], &[2, 2], &[1, 1]])).unwrap();
        assert_eq!(seg.dim, 1);
        assert_eq!(seg.vertex_count(), 2);
        let point = hull_from_points(&pts(&[&[5, 5], &[5, 5]])).unwrap();
        assert_eq!((point.dim, point.vertex_count(), point.facets.len()), (0, 1, 0));
    }

    #[test]
    fn guards() {
        assert_eq!(hull_from_points(&[]).unwrap_err(), PolyError::EmptyInput);
        let many: Vec<Vector> = (0..65).map(|i| Vector::from_ints(&[i, i * i])).collect();
        assert!(matches!(hull_from_points(&many), Err(PolyError::TooLarge(_))));
        let simplex8: Vec<Vector> = (0..9).map(|i| Vector::unit(9, i)).collect::<Vec<_>>();
        let mut with_origin = simplex8.clone();
        with_origin.push(Vector::zeros(9));
        assert!(matches!(hull_from_points(&with_origin), Err(PolyError::TooLarge(_))));
        assert!(matches!(
            hull_from_points(&pts(&[&[0, 0], &[1]])),
            Err(PolyError::MixedDimensions(2, 1))
        ));
    }

    #[test]
    fn facet_as_polytope_of_cube_is_square() {
        let cube = hull_from_points(&cube_points(3)).unwrap();
        for i in 0..cube.facets.len() {
            let f = cube.facet_as_polytope(i).unwrap();
            assert_eq!((f.dim, f.vertex_count(), f.facets.len()), (2, 4, 4));
            let amb = f.ambient_vertices();
            let expected: Vec<Vector> = cube.facets[i]
                .vertex_set
                .iter()
                .map(|v| cube.vertices[v].clone())
                .collect();
            assert_eq!(amb, expected);
        }
        assert!(matches!(
            cube.facet_as_polytope(6),
            Err(PolyError::IndexOutOfRange { index: 6, len: 6 })
        ));
    }

    #[test]
    fn json_round_trip() {
        let cube = hull_from_points(&cube_points(3)).unwrap();
        let back = Polytope::from_json(&cube.to_json()).unwrap();
        assert_eq!(back.vertices, cube.vertices);
        assert_eq!(back.facets, cube.facets);
        assert!(Polytope::from_json(r#"{"ambient_dim": 2, "vertices": [["1","2","3"]]}"#).is_err());
        let half = Polytope::from_json(r#"{"ambient_dim": 1, "vertices": [["1/2"], ["3"]]}"#).unwrap();
        assert_eq!(half.vertices[0], Vector::new(vec![frac(1, 2)]));
    }
}
