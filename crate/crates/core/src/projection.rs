//! Projection along a direction in general position: the shadow polytope,
//! the upper/lower facet complexes, and the vertices of the common
//! refinement of their projections.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::angles::derive_seed;
use crate::bitset::IndexSet;
use crate::bounds::{binom, rho_twice};
use crate::error::{PolyError, Result};
use crate::exact::{affine_basis_indices, orthogonal_complement_basis, solve_columns, Scalar, Vector};
use crate::lattice::{face_lattice, FVector, FaceLattice};
use crate::polytope::{hull_with_sources, Embedding, Polytope};

/// Direction coordinates are drawn uniformly from `[-DIRECTION_RANGE, DIRECTION_RANGE]`.
pub const DIRECTION_RANGE: i64 = 10_000;
pub const DEFAULT_RETRIES: usize = 64;
/// Largest number of vertex subsets the general-position test will enumerate.
pub const MAX_GP_SUBSETS: u64 = 2_035_800;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Direction {
    /// In the polytope's intrinsic coordinates.
    pub v: Vector,
    pub verified: bool,
}

/// Hyperplanes spanned by vertices of a polytope, as primitive integer
/// normals. A direction is in general position iff it pairs to nonzero
/// with every one of them.
#[derive(Clone, Debug)]
pub struct GeneralPosition {
    dim: usize,
    normals: Vec<Vec<BigInt>>,
}

impl GeneralPosition {
    pub fn new(q: &Polytope) -> Result<Self> {
        let d = q.dim;
        if d < 1 {
            return Err(PolyError::DimensionTooLow(d as i64));
        }
        let n = q.vertex_count();
        let subsets = binom(n as u64, d as u64);
        if subsets > MAX_GP_SUBSETS {
            return Err(PolyError::TooLarge(format!(
                "general-position test needs {subsets} vertex subsets (limit {MAX_GP_SUBSETS})"
            )));
        }
        let IntegerCoords { points, small } = IntegerCoords::new(&q.vertices);
        let combos: Vec<Vec<usize>> = (0..n).combinations(d).collect();
        let mut normals: Vec<Vec<BigInt>> = combos
            .par_iter()
            .filter_map(|c| {
                let fast = small.as_ref().and_then(|s| {
                    let rows: Vec<Vec<i128>> = c[1..]
                        .iter()
                        .map(|&i| s[i].iter().zip(&s[c[0]]).map(|(a, b)| a - b).collect())
                        .collect();
                    cofactors_i128(&rows, d)
                });
                let normal = match fast {
                    Some(v) => v.into_iter().map(BigInt::from).collect(),
                    None => {
                        let rows: Vec<Vec<BigInt>> = c[1..]
                            .iter()
                            .map(|&i| points[i].iter().zip(&points[c[0]]).map(|(a, b)| a - b).collect())
                            .collect();
                        cofactors_big(&rows, d)
                    }
                };
                primitive_normal(normal)
            })
            .collect();
        normals.sort();
        normals.dedup();
        Ok(GeneralPosition { dim: d, normals })
    }

    pub fn hyperplane_count(&self) -> usize {
        self.normals.len()
    }

    pub fn accepts(&self, v: &Vector) -> bool {
        if v.dim() != self.dim || v.is_zero() {
            return false;
        }
        let denom = v.coords().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let w = v.to_integers(&denom);
        self.normals
            .iter()
            .all(|a| !a.iter().zip(&w).map(|(x, y)| x * y).sum::<BigInt>().is_zero())
    }

    pub fn check(&self, v: Vector) -> Direction {
        let verified = self.accepts(&v);
        Direction { v, verified }
    }

    /// Integer direction with coordinates uniform in `[-DIRECTION_RANGE,
    /// DIRECTION_RANGE]`, redrawn until it is in general position.
    pub fn sample(&self, seed: u64, max_retries: usize) -> Result<Direction> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..max_retries {
            let coords: Vec<i64> = (0..self.dim)
                .map(|_| rng.random_range(-DIRECTION_RANGE..=DIRECTION_RANGE))
                .collect();
            let v = Vector::from_ints(&coords);
            if self.accepts(&v) {
                return Ok(Direction { v, verified: true });
            }
        }
        Err(PolyError::RetriesExhausted(max_retries))
    }
}

/// Vertices scaled by a common denominator, with an `i128` copy when every
/// coordinate fits in an `i64`.
struct IntegerCoords {
    points: Vec<Vec<BigInt>>,
    small: Option<Vec<Vec<i128>>>,
}

impl IntegerCoords {
    fn new(vertices: &[Vector]) -> Self {
        let denom = vertices
            .iter()
            .flat_map(|v| v.coords().iter())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let points: Vec<Vec<BigInt>> = vertices.iter().map(|v| v.to_integers(&denom)).collect();
        let small = points
            .iter()
            .map(|p| p.iter().map(|c| c.to_i64().map(i128::from)).collect())
            .collect();
        IntegerCoords { points, small }
    }
}

fn primitive_normal(mut a: Vec<BigInt>) -> Option<Vec<BigInt>> {
    let g = a.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    let flip = a.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    for x in a.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
    Some(a)
}

/// Signed maximal minors of a `(d-1) x d` matrix: the normal of the
/// hyperplane spanned by its rows. `None` on overflow.
fn cofactors_i128(rows: &[Vec<i128>], d: usize) -> Option<Vec<i128>> {
    (0..d)
        .map(|skip| {
            let mut m: Vec<Vec<i128>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, x)| *x).collect())
                .collect();
            let det = bareiss_i128(&mut m)?;
            Some(if skip % 2 == 0 { det } else { det.checked_neg()? })
        })
        .collect()
}

fn bareiss_i128(m: &mut [Vec<i128>]) -> Option<i128> {
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(p) = (k + 1..n).find(|&r| m[r][k] != 0) else {
                return Some(0);
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let a = m[i][j].checked_mul(m[k][k])?;
                let b = m[i][k].checked_mul(m[k][j])?;
                m[i][j] = a.checked_sub(b)? / prev;
            }
        }
        prev = m[k][k];
    }
    if n == 0 {
        return Some(1);
    }
    m[n - 1][n - 1].checked_mul(sign)
}

fn cofactors_big(rows: &[Vec<BigInt>], d: usize) -> Vec<BigInt> {
    (0..d)
        .map(|skip| {
            let mut m: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, x)| x.clone()).collect())
                .collect();
            let det = bareiss_big(&mut m);
            if skip % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect()
}

fn bareiss_big(m: &mut [Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

pub fn sample_direction(q: &Polytope, seed: u64, max_retries: usize) -> Result<Direction> {
    GeneralPosition::new(q)?.sample(seed, max_retries)
}

/// `count` verified directions; the i-th is drawn from `derive_seed(seed, i)`.
pub fn sample_directions(q: &Polytope, count: usize, seed: u64) -> Result<Vec<Direction>> {
    let gp = GeneralPosition::new(q)?;
    (0..count)
        .map(|i| gp.sample(derive_seed(seed, i as u64), DEFAULT_RETRIES))
        .collect()
}

#[derive(Clone, Debug)]
pub struct ShadowPolytope {
    pub poly: Polytope,
    /// Orthogonal integer basis of the complement of the direction.
    pub basis: Vec<Vector>,
    /// Projected coordinates of every vertex of Q.
    pub projected: Vec<Vector>,
    /// `vertex_map[i]` is the shadow vertex that vertex `i` of Q lands on, if any.
    pub vertex_map: Vec<Option<usize>>,
}

fn point_polytope() -> Polytope {
    Polytope {
        ambient_dim: 0,
        dim: 0,
        vertices: vec![Vector::zeros(0)],
        facets: Vec::new(),
        embedding: Embedding::identity(0),
        metric: Vec::new(),
    }
}

fn require_verified(q: &Polytope, dir: &Direction) -> Result<()> {
    if dir.v.dim() != q.dim {
        return Err(PolyError::MixedDimensions(q.dim, dir.v.dim()));
    }
    if !dir.verified {
        return Err(PolyError::NotGeneralPosition);
    }
    Ok(())
}

/// π_v(Q) in coordinates `x ↦ (x·b_i / b_i·b_i)` over the complement basis.
pub fn shadow(q: &Polytope, dir: &Direction) -> Result<ShadowPolytope> {
    require_verified(q, dir)?;
    let basis = orthogonal_complement_basis(&dir.v)?;
    let norms: Vec<Scalar> = basis.iter().map(|b| b.dot(b)).collect();
    let projected: Vec<Vector> = q
        .vertices
        .iter()
        .map(|x| Vector::new(basis.iter().zip(&norms).map(|(b, g)| x.dot(b) / g).collect()))
        .collect();
    if basis.is_empty() {
        let vertex_map = vec![Some(0); q.vertex_count()];
        return Ok(ShadowPolytope { poly: point_polytope(), basis, projected, vertex_map });
    }
    let (poly, sources) = hull_with_sources(&projected)?;
    let mut vertex_map = vec![None; q.vertex_count()];
    for (j, &src) in sources.iter().enumerate() {
        vertex_map[src] = Some(j);
    }
    // general position makes the projection injective on vertices
    for (i, slot) in vertex_map.iter_mut().enumerate() {
        if slot.is_none() {
            *slot = poly.vertices.iter().position(|w| w == &projected[i]);
        }
    }
    Ok(ShadowPolytope { poly, basis, projected, vertex_map })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShadowComplexes {
    /// Facets with `v · normal > 0`.
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    /// Nonempty faces lying in both an upper and a lower facet.
    pub shadow_boundary: Vec<IndexSet>,
}

impl ShadowComplexes {
    pub fn in_upper(&self, q: &Polytope, face: &IndexSet) -> bool {
        self.upper.iter().any(|&i| face.is_subset(&q.facets[i].vertex_set))
    }

    pub fn in_lower(&self, q: &Polytope, face: &IndexSet) -> bool {
        self.lower.iter().any(|&i| face.is_subset(&q.facets[i].vertex_set))
    }
}

fn complexes_with(q: &Polytope, lattice: &FaceLattice, v: &Vector) -> Result<ShadowComplexes> {
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (i, f) in q.facets.iter().enumerate() {
        let s = f.supporting.normal.dot(v);
        if s.is_zero() {
            return Err(PolyError::ZeroDotProduct(i));
        }
        if s.is_positive() {
            upper.push(i);
        } else {
            lower.push(i);
        }
    }
    let mut cx = ShadowComplexes { upper, lower, shadow_boundary: Vec::new() };
    cx.shadow_boundary = lattice
        .faces
        .iter()
        .filter(|f| f.dim >= 0 && f.dim < lattice.dim)
        .filter(|f| cx.in_upper(q, &f.vertex_set) && cx.in_lower(q, &f.vertex_set))
        .map(|f| f.vertex_set.clone())
        .collect();
    Ok(cx)
}

/// Sign partition of the facets. Does not require `verified`; an unverified
/// direction orthogonal to a facet normal yields `ZeroDotProduct`.
pub fn upper_lower(q: &Polytope, dir: &Direction) -> Result<ShadowComplexes> {
    if dir.v.dim() != q.dim {
        return Err(PolyError::MixedDimensions(q.dim, dir.v.dim()));
    }
    complexes_with(q, &face_lattice(q)?, &dir.v)
}

/// Projected shadow-boundary faces are exactly the proper faces of the
/// shadow, each hit once and with its dimension preserved.
fn boundary_bijective(
    lattice: &FaceLattice,
    cx: &ShadowComplexes,
    sh: &ShadowPolytope,
    sh_lattice: &FaceLattice,
) -> bool {
    let mut seen = HashSet::new();
    for x in &cx.shadow_boundary {
        let image: Option<IndexSet> = x.iter().map(|i| sh.vertex_map[i]).collect();
        let Some(image) = image else {
            return false;
        };
        let (Some(src), Some(dst)) = (lattice.face(x), sh_lattice.face(&image)) else {
            return false;
        };
        if src.dim != dst.dim || dst.dim >= sh_lattice.dim || !seen.insert(image) {
            return false;
        }
    }
    let proper = sh_lattice.faces.iter().filter(|f| f.dim >= 0 && f.dim < sh_lattice.dim).count();
    seen.len() == proper
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagramVertex {
    /// In shadow coordinates.
    pub point: Vector,
    pub x_plus: IndexSet,
    pub x_minus: IndexSet,
    pub l_plus: i64,
    pub l_minus: i64,
    pub interior: bool,
}

struct FaceGeom {
    set: IndexSet,
    dim: i64,
    base: usize,
    /// Vertices completing an affine basis together with `base`.
    others: Vec<usize>,
    /// `others[i] - base` in Q coordinates.
    dirs: Vec<Vector>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn face_geom(q: &Polytope, proj_f: &[Vec<f64>], set: &IndexSet, dim: i64) -> FaceGeom {
    let idx: Vec<usize> = set.to_vec();
    let pts: Vec<&Vector> = idx.iter().map(|&i| &q.vertices[i]).collect();
    let basis = affine_basis_indices(&pts);
    let base = idx[basis[0]];
    let others: Vec<usize> = basis[1..].iter().map(|&b| idx[b]).collect();
    let dirs = others.iter().map(|&o| &q.vertices[o] - &q.vertices[base]).collect();
    let m = proj_f.first().map_or(0, Vec::len);
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for &i in &idx {
        for c in 0..m {
            lo[c] = lo[c].min(proj_f[i][c]);
            hi[c] = hi[c].max(proj_f[i][c]);
        }
    }
    FaceGeom { set: set.clone(), dim, base, others, dirs, lo, hi }
}

/// Partial-pivot solve of a small dense system. Returns the solution and
/// the ratio of largest to smallest pivot, or `None` if numerically singular.
fn solve_f64(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    let (mut pmin, mut pmax) = (f64::INFINITY, 0.0f64);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        let piv = a[p][k].abs();
        if piv <= 1e-12 * scale {
            return None;
        }
        pmin = pmin.min(piv);
        pmax = pmax.max(piv);
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some((x, if n == 0 { 1.0 } else { pmax / pmin }))
}

fn inside_exact(q: &Polytope, x: &Vector) -> bool {
    q.facets.iter().all(|f| !f.supporting.slack(x).is_positive())
}

fn boxes_meet(a: &FaceGeom, b: &FaceGeom) -> bool {
    a.lo.iter().zip(&a.hi).zip(b.lo.iter().zip(&b.hi)).all(|((alo, ahi), (blo, bhi))| {
        let tol = 1e-9 * (1.0 + alo.abs().max(ahi.abs()).max(blo.abs()).max(bhi.abs()));
        *alo <= bhi + tol && *blo <= ahi + tol
    })
}

/// Shared data for testing face pairs. A pair meets in one projected point
/// iff `base+ + D+ s + λ v = base- + D- t` has a unique solution, i.e. the
/// square matrix `[D+ | -D- | v]` is nonsingular.
struct PairTester<'a> {
    q: &'a Polytope,
    sh: &'a ShadowPolytope,
    v: &'a Vector,
    verts_f: Vec<Vec<f64>>,
    v_f: Vec<f64>,
    ints: IntegerCoords,
    v_int: Vec<BigInt>,
    /// Facets as `(normal, offset, magnitude)` in floating point.
    facets_f: Vec<(Vec<f64>, f64, f64)>,
    /// Whether each projected vertex is strictly inside the shadow.
    vertex_interior: Vec<bool>,
}

impl<'a> PairTester<'a> {
    fn new(q: &'a Polytope, sh: &'a ShadowPolytope, v: &'a Vector) -> Self {
        let verts_f: Vec<Vec<f64>> = q.vertices.iter().map(Vector::to_f64).collect();
        let extent = verts_f.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
        let facets_f = q
            .facets
            .iter()
            .map(|f| {
                let n = f.supporting.normal.to_f64();
                let b = crate::exact::scalar_to_f64(&f.supporting.offset);
                let mag = n.iter().map(|x| x.abs()).sum::<f64>() * extent + b.abs();
                (n, b, mag)
            })
            .collect();
        let denom = v.coords().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        PairTester {
            q,
            sh,
            v,
            verts_f,
            v_f: v.to_f64(),
            ints: IntegerCoords::new(&q.vertices),
            v_int: v.to_integers(&denom),
            facets_f,
            vertex_interior: sh.projected.iter().map(|x| strictly_inside(sh, x)).collect(),
        }
    }

    fn singular_exact(&self, xp: &FaceGeom, xm: &FaceGeom) -> bool {
        let mut cols: Vec<(usize, usize, bool)> = xp.others.iter().map(|&o| (o, xp.base, false)).collect();
        cols.extend(xm.others.iter().map(|&o| (o, xm.base, true)));
        if let Some(small) = &self.ints.small {
            let v_small: Option<Vec<i128>> = self.v_int.iter().map(|c| c.to_i64().map(i128::from)).collect();
            if let Some(v_small) = v_small {
                let mut rows: Vec<Vec<i128>> = cols
                    .iter()
                    .map(|&(o, b, neg)| {
                        small[o]
                            .iter()
                            .zip(&small[b])
                            .map(|(x, y)| if neg { y - x } else { x - y })
                            .collect()
                    })
                    .collect();
                rows.push(v_small);
                if let Some(det) = bareiss_i128(&mut rows) {
                    return det == 0;
                }
            }
        }
        let pts = &self.ints.points;
        let mut rows: Vec<Vec<BigInt>> = cols
            .iter()
            .map(|&(o, b, neg)| {
                pts[o]
                    .iter()
                    .zip(&pts[b])
                    .map(|(x, y)| if neg { y - x } else { x - y })
                    .collect()
            })
            .collect();
        rows.push(self.v_int.clone());
        bareiss_big(&mut rows).is_zero()
    }

    /// `false` only when the float solution is clearly outside Q.
    fn float_plausible(&self, xp: &FaceGeom, xm: &FaceGeom) -> bool {
        let d = self.q.dim;
        let col = |o: usize, b: usize| -> Vec<f64> {
            self.verts_f[o].iter().zip(&self.verts_f[b]).map(|(x, y)| x - y).collect()
        };
        let mut cols: Vec<Vec<f64>> = xp.others.iter().map(|&o| col(o, xp.base)).collect();
        cols.extend(xm.others.iter().map(|&o| col(o, xm.base).iter().map(|x| -x).collect::<Vec<_>>()));
        cols.push(self.v_f.clone());
        let a: Vec<Vec<f64>> = (0..d).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
        let rhs: Vec<f64> = (0..d).map(|r| self.verts_f[xm.base][r] - self.verts_f[xp.base][r]).collect();
        let Some((st, kappa)) = solve_f64(a, rhs) else {
            return true;
        };
        if kappa > 1e6 {
            return true;
        }
        let lp = xp.others.len();
        let lift = |g: &FaceGeom, params: &[f64]| -> Vec<f64> {
            let mut x = self.verts_f[g.base].clone();
            for (&o, s) in g.others.iter().zip(params) {
                for (c, xi) in x.iter_mut().enumerate() {
                    *xi += s * (self.verts_f[o][c] - self.verts_f[g.base][c]);
                }
            }
            x
        };
        let param_scale = st.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let tol = 1e-9 * kappa * param_scale;
        let inside = |x: &[f64]| {
            self.facets_f
                .iter()
                .all(|(n, b, mag)| n.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() - b <= tol * mag + 1e-9)
        };
        inside(&lift(xp, &st[..lp])) && inside(&lift(xm, &st[lp..lp + xm.others.len()]))
    }

    fn exact_meet(&self, xp: &FaceGeom, xm: &FaceGeom) -> Option<Vector> {
        let mut cols: Vec<Vector> = xp.dirs.clone();
        cols.extend(xm.dirs.iter().map(|c| c.scale(&-Scalar::one())));
        cols.push(self.v.clone());
        let rhs = &self.q.vertices[xm.base] - &self.q.vertices[xp.base];
        let st = solve_columns(&cols, &rhs)?;
        let lift = |g: &FaceGeom, params: &[Scalar]| {
            g.dirs
                .iter()
                .zip(params)
                .fold(self.q.vertices[g.base].clone(), |x, (d, s)| x.add_scaled(s, d))
        };
        let coords = st.coords();
        let lp = xp.dirs.len();
        let qp = lift(xp, &coords[..lp]);
        if !inside_exact(self.q, &qp) || !inside_exact(self.q, &lift(xm, &coords[lp..lp + xm.dirs.len()])) {
            return None;
        }
        Some(project_point(&self.sh.basis, &qp))
    }

    /// The projected point where π(X+) and π(X-) meet, if they meet in
    /// exactly one point, and whether it is strictly inside the shadow.
    fn meet(&self, xp: &FaceGeom, xm: &FaceGeom) -> Option<(Vector, bool)> {
        if !boxes_meet(xp, xm) {
            return None;
        }
        // sharing an edge makes the projected hulls share a line
        let shared = xp.set.intersection(&xm.set);
        if shared.len() >= 2 {
            return None;
        }
        if let Some(w) = shared.iter().next() {
            // π(w) lies in both, so it is the meeting point whenever it is unique
            return (!self.singular_exact(xp, xm))
                .then(|| (self.sh.projected[w].clone(), self.vertex_interior[w]));
        }
        if !self.float_plausible(xp, xm) || self.singular_exact(xp, xm) {
            return None;
        }
        let point = self.exact_meet(xp, xm)?;
        let interior = strictly_inside(self.sh, &point);
        Some((point, interior))
    }
}

fn project_point(basis: &[Vector], x: &Vector) -> Vector {
    Vector::new(basis.iter().map(|b| x.dot(b) / b.dot(b)).collect())
}

fn strictly_inside(sh: &ShadowPolytope, x: &Vector) -> bool {
    sh.poly.facets.iter().all(|f| f.supporting.slack(x).is_negative())
}

fn diagram_with(
    q: &Polytope,
    lattice: &FaceLattice,
    cx: &ShadowComplexes,
    sh: &ShadowPolytope,
    v: &Vector,
) -> Vec<DiagramVertex> {
    let dq = q.dim as i64;
    let proj_f: Vec<Vec<f64>> = sh.projected.iter().map(Vector::to_f64).collect();
    let tester = PairTester::new(q, sh, v);
    let proper = lattice.faces.iter().filter(|f| f.dim >= 0 && f.dim < dq);
    let mut plus: Vec<FaceGeom> = Vec::new();
    let mut minus: Vec<FaceGeom> = Vec::new();
    for f in proper {
        if cx.in_upper(q, &f.vertex_set) {
            plus.push(face_geom(q, &proj_f, &f.vertex_set, f.dim));
        }
        if cx.in_lower(q, &f.vertex_set) {
            minus.push(face_geom(q, &proj_f, &f.vertex_set, f.dim));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..plus.len())
        .flat_map(|i| (0..minus.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| plus[i].dim + minus[j].dim == dq - 1)
        .collect();
    pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let (xp, xm) = (&plus[i], &minus[j]);
            let (point, interior) = tester.meet(xp, xm)?;
            Some(DiagramVertex {
                interior,
                point,
                x_plus: xp.set.clone(),
                x_minus: xm.set.clone(),
                l_plus: xp.dim,
                l_minus: xm.dim,
            })
        })
        .collect()
}

/// Everything derived from one (Q, v) pair.
#[derive(Clone, Debug)]
pub struct ProjectionAnalysis {
    pub direction: Direction,
    pub shadow: ShadowPolytope,
    pub shadow_lattice: FaceLattice,
    pub shadow_f_vector: FVector,
    pub complexes: ShadowComplexes,
    pub boundary_bijective: bool,
    /// Empty when dim Q < 2.
    pub diagram: Vec<DiagramVertex>,
}

pub fn analyze(q: &Polytope, lattice: &FaceLattice, dir: &Direction) -> Result<ProjectionAnalysis> {
    let sh = shadow(q, dir)?;
    let shadow_lattice = face_lattice(&sh.poly)?;
    let shadow_f_vector = shadow_lattice.f_vector()?;
    let complexes = complexes_with(q, lattice, &dir.v)?;
    let boundary_bijective = boundary_bijective(lattice, &complexes, &sh, &shadow_lattice);
    let diagram = if q.dim >= 2 { diagram_with(q, lattice, &complexes, &sh, &dir.v) } else { Vec::new() };
    Ok(ProjectionAnalysis {
        direction: dir.clone(),
        shadow: sh,
        shadow_lattice,
        shadow_f_vector,
        complexes,
        boundary_bijective,
        diagram,
    })
}

impl ProjectionAnalysis {
    pub fn interior_vertices(&self) -> impl Iterator<Item = &DiagramVertex> {
        self.diagram.iter().filter(|d| d.interior)
    }

    pub fn lemma_holds(&self) -> bool {
        self.interior_vertices().next().is_some()
    }

    pub fn gap(&self, q_f: &FVector, k: i64) -> Result<GapReport> {
        gap_report(q_f, &self.shadow_f_vector, k)
    }

    pub fn report(&self, q_f: &FVector) -> Result<ProjectionReport> {
        let gaps = if q_f.dim >= 2 {
            (0..q_f.dim).map(|k| self.gap(q_f, k)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(ProjectionReport {
            direction: self.direction.v.clone(),
            upper: self.complexes.upper.clone(),
            lower: self.complexes.lower.clone(),
            shadow_f_vector: self.shadow_f_vector.counts.clone(),
            boundary_bijective: self.boundary_bijective,
            interior_count: self.interior_vertices().count(),
            lemma_holds: q_f.dim < 2 || self.lemma_holds(),
            diagram_vertices: self.diagram.clone(),
            gaps,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionReport {
    pub direction: Vector,
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    pub shadow_f_vector: Vec<u64>,
    pub boundary_bijective: bool,
    pub interior_count: usize,
    pub lemma_holds: bool,
    pub diagram_vertices: Vec<DiagramVertex>,
    pub gaps: Vec<GapReport>,
}

impl ProjectionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn holds(&self) -> bool {
        self.boundary_bijective && self.lemma_holds && self.gaps.iter().all(|g| g.holds)
    }
}

/// All pairs (X+, X-) of faces from the upper and lower complexes with
/// dim X+ + dim X- = dim Q - 1 whose projections meet in a single point.
pub fn diagram_vertices(q: &Polytope, dir: &Direction) -> Result<Vec<DiagramVertex>> {
    if q.dim < 2 {
        return Err(PolyError::DimensionTooLow(q.dim as i64));
    }
    let lattice = face_lattice(q)?;
    Ok(analyze(q, &lattice, dir)?.diagram)
}

pub fn diagram_lemma_check(q: &Polytope, dir: &Direction) -> Result<bool> {
    Ok(diagram_vertices(q, dir)?.iter().any(|d| d.interior))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefinementCell {
    pub upper_facet: usize,
    pub lower_facet: usize,
    /// Distinct vertices of π(F+) ∩ π(F-), sorted.
    pub vertices: Vec<Vector>,
}

/// Full-dimensional cells π(F+) ∩ π(F-) of the refinement, for dim Q ≤ 3.
pub fn refinement_cells(q: &Polytope, dir: &Direction) -> Result<Vec<RefinementCell>> {
    if q.dim > 3 {
        return Err(PolyError::UnsupportedDimension(q.dim as i64));
    }
    let diagram = diagram_vertices(q, dir)?;
    let cx = upper_lower(q, dir)?;
    let m = q.dim as i64 - 1;
    let mut cells = Vec::new();
    for &fp in &cx.upper {
        for &fm in &cx.lower {
            let mut vertices: Vec<Vector> = diagram
                .iter()
                .filter(|d| {
                    d.x_plus.is_subset(&q.facets[fp].vertex_set) && d.x_minus.is_subset(&q.facets[fm].vertex_set)
                })
                .map(|d| d.point.clone())
                .collect();
            vertices.sort_by_key(|v| v.coords().to_vec());
            vertices.dedup();
            if crate::exact::affine_dim(&vertices)? == m {
                cells.push(RefinementCell { upper_facet: fp, lower_facet: fm, vertices });
            }
        }
    }
    Ok(cells)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientRow {
    pub k: i64,
    /// Index into the quotient's f-vector, `k - l_plus - 1`.
    pub j: i64,
    pub f_j: u64,
    pub bound: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientWitness {
    pub plus_quotient_dim: i64,
    pub minus_quotient_dim: i64,
    pub dims_hold: bool,
    pub rows: Vec<QuotientRow>,
    pub holds: bool,
}

/// For an interior diagram vertex: dim Q/X+ = l-, dim Q/X- = l+, and
/// f_{k-l+-1}(Q/X+) >= C(l- + 1, d - k - 1) for l+ <= k <= dim Q - 1,
/// where d = dim Q + 1.
pub fn quotient_dim_witness(q: &Polytope, dv: &DiagramVertex) -> Result<QuotientWitness> {
    if !dv.interior {
        return Err(PolyError::NotInterior);
    }
    let lattice = face_lattice(q)?;
    let qp = lattice.quotient(&dv.x_plus)?;
    let qm = lattice.quotient(&dv.x_minus)?;
    let dims_hold = qp.dim == dv.l_minus && qm.dim == dv.l_plus;
    let fp = qp.f_vector()?;
    let d = q.dim as i64 + 1;
    let rows: Vec<QuotientRow> = (dv.l_plus..q.dim as i64)
        .map(|k| {
            let j = k - dv.l_plus - 1;
            let f_j = fp.f(j);
            let bound = binom((dv.l_minus + 1) as u64, (d - k - 1) as u64);
            QuotientRow { k, j, f_j, bound, holds: f_j >= bound }
        })
        .collect();
    let holds = dims_hold && rows.iter().all(|r| r.holds);
    Ok(QuotientWitness {
        plus_quotient_dim: qp.dim,
        minus_quotient_dim: qm.dim,
        dims_hold,
        rows,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub k: i64,
    pub f_k: u64,
    /// With f_dim(shadow) = 1.
    pub shadow_f_k: u64,
    /// Proper faces of the shadow only, i.e. k-faces of the boundary
    /// complex Q+ ∩ Q-. Differs from `shadow_f_k` only when k = dim Q - 1.
    pub boundary_f_k: u64,
    /// 2ρ(dim Q + 1, dim Q - k)
    pub bound: u64,
    /// Counted against `boundary_f_k`.
    pub holds: bool,
    /// The same inequality counted against `shadow_f_k`.
    pub holds_with_shadow: bool,
}

fn gap_report(q_f: &FVector, shadow_f: &FVector, k: i64) -> Result<GapReport> {
    let dq = q_f.dim;
    if dq < 2 {
        return Err(PolyError::DimensionTooLow(dq));
    }
    if k < 0 || k >= dq {
        return Err(PolyError::OutOfRange(format!("gap needs 0 <= k < {dq}, got {k}")));
    }
    let (f_k, shadow_f_k) = (q_f.f(k), shadow_f.f(k));
    let boundary_f_k = if k == dq - 1 { 0 } else { shadow_f_k };
    let bound = rho_twice(dq + 1, dq - k);
    Ok(GapReport {
        k,
        f_k,
        shadow_f_k,
        boundary_f_k,
        bound,
        holds: f_k >= boundary_f_k + bound,
        holds_with_shadow: f_k >= shadow_f_k + bound,
    })
}

/// f_k(Q) - f_k(π_v Q) >= 2ρ(dim Q + 1, dim Q - k), exact. The shadow side
/// counts proper faces only, so at k = dim Q - 1 it is zero.
pub fn gap_check(q: &Polytope, dir: &Direction, k: i64) -> Result<GapReport> {
    let q_f = face_lattice(q)?.f_vector()?;
    let sh = shadow(q, dir)?;
    let shadow_f = face_lattice(&sh.poly)?.f_vector()?;
    gap_report(&q_f, &shadow_f, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rank;
    use crate::generators::{generate, Family, FamilySpec};
    use crate::polytope::hull_from_points;

    fn poly(family: Family, dim: usize) -> Polytope {
        generate(&FamilySpec::new(family, dim)).unwrap()
    }

    fn hexagon() -> Polytope {
        let pts = [[2, 0], [1, 2], [-1, 2], [-2, 0], [-1, -2], [1, -2]];
        hull_from_points(&pts.iter().map(|p| Vector::from_ints(p)).collect::<Vec<_>>()).unwrap()
    }

    fn dir(v: &[i64]) -> Direction {
        Direction { v: Vector::from_ints(v), verified: true }
    }

    /// Exhaustive oracle: v is generic iff no d-subset of vertices spans a
    /// hyperplane containing v's direction.
    fn brute_general_position(q: &Polytope, v: &Vector) -> bool {
        (0..q.vertex_count()).combinations(q.dim).all(|c| {
            let diffs: Vec<Vector> = c[1..].iter().map(|&i| &q.vertices[i] - &q.vertices[c[0]]).collect();
            let r = rank(&diffs).unwrap();
            let mut with_v = diffs.clone();
            with_v.push(v.clone());
            r < q.dim - 1 || rank(&with_v).unwrap() == q.dim
        })
    }

    #[test]
    fn axis_directions_rejected() {
        let sq = poly(Family::Cube, 2);
        let gp = GeneralPosition::new(&sq).unwrap();
        assert!(!gp.accepts(&Vector::from_ints(&[1, 0])));
        assert!(!gp.accepts(&Vector::from_ints(&[1, 1])));
        assert!(gp.accepts(&Vector::from_ints(&[1, 2])));
        let cube = poly(Family::Cube, 3);
        let gp = GeneralPosition::new(&cube).unwrap();
        assert!(!gp.accepts(&Vector::from_ints(&[1, 0, 0])));
        assert!(!gp.accepts(&Vector::from_ints(&[0, 0, 0])));
    }

    #[test]
    fn oracle_matches_rank_enumeration() {
        for q in [poly(Family::Cube, 3), poly(Family::Cross, 3), poly(Family::Prism, 3), hexagon()] {
            let gp = GeneralPosition::new(&q).unwrap();
            for seed in 0..6 {
                let d = gp.sample(seed, DEFAULT_RETRIES).unwrap();
                assert!(brute_general_position(&q, &d.v));
            }
            let bad = Vector::new(q.vertices[1].coords().iter().zip(q.vertices[0].coords()).map(|(a, b)| a - b).collect());
            assert_eq!(gp.accepts(&bad), brute_general_position(&q, &bad));
        }
    }

    #[test]
    fn bareiss_paths_agree() {
        let rows = vec![vec![3i128, 1, 4], vec![1, 5, 9]];
        let big: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let fast: Vec<BigInt> = cofactors_i128(&rows, 3).unwrap().into_iter().map(BigInt::from).collect();
        assert_eq!(fast, cofactors_big(&big, 3));
        // cross product of the two rows
        assert_eq!(fast, vec![BigInt::from(-11), BigInt::from(-23), BigInt::from(14)]);
    }

    #[test]
    fn shadows() {
        let sq = poly(Family::Cube, 2);
        let sh = shadow(&sq, &dir(&[1, 2])).unwrap();
        assert_eq!((sh.poly.dim, sh.poly.vertex_count()), (1, 2));
        let cube = poly(Family::Cube, 3);
        let sh = shadow(&cube, &dir(&[1, 2, 3])).unwrap();
        assert_eq!(face_lattice(&sh.poly).unwrap().f_vector().unwrap().counts, vec![6, 6]);
        // generic shadows of the tetrahedron are triangles or quadrilaterals
        let tet = poly(Family::Simplex, 3);
        let gp = GeneralPosition::new(&tet).unwrap();
        let counts: HashSet<usize> = (0..20)
            .map(|s| shadow(&tet, &gp.sample(s, DEFAULT_RETRIES).unwrap()).unwrap().poly.vertex_count())
            .collect();
        assert!(counts.is_subset(&HashSet::from([3, 4])) && counts.contains(&4), "{counts:?}");
        assert_eq!(
            shadow(&cube, &Direction { v: Vector::from_ints(&[1, 2, 3]), verified: false }).unwrap_err(),
            PolyError::NotGeneralPosition
        );
    }

    #[test]
    fn projection_preserves_basis_pairings() {
        let cube = poly(Family::Cross, 3);
        let d = dir(&[3, -5, 7]);
        let sh = shadow(&cube, &d).unwrap();
        for (x, y) in cube.vertices.iter().zip(&sh.projected) {
            // re-embed y and compare dot products with every basis vector
            let back = sh
                .basis
                .iter()
                .zip(y.coords())
                .fold(Vector::zeros(3), |acc, (b, c)| acc.add_scaled(c, b));
            for b in &sh.basis {
                assert_eq!(back.dot(b), x.dot(b));
            }
        }
    }

    #[test]
    fn partitions() {
        let sq = poly(Family::Cube, 2);
        let cx = upper_lower(&sq, &dir(&[1, 2])).unwrap();
        assert_eq!((cx.upper.len(), cx.lower.len()), (2, 2));
        let cube = poly(Family::Cube, 3);
        let cx = upper_lower(&cube, &dir(&[1, 2, 3])).unwrap();
        assert_eq!((cx.upper.len(), cx.lower.len()), (3, 3));
        assert_eq!(cx.shadow_boundary.len(), 12);
        let err = upper_lower(&cube, &Direction { v: Vector::from_ints(&[1, 0, 0]), verified: false });
        assert!(matches!(err, Err(PolyError::ZeroDotProduct(_))));
        let tet = poly(Family::Simplex, 3);
        let gp = GeneralPosition::new(&tet).unwrap();
        for s in 0..10 {
            let cx = upper_lower(&tet, &gp.sample(s, DEFAULT_RETRIES).unwrap()).unwrap();
            let split = (cx.upper.len().min(cx.lower.len()), cx.upper.len().max(cx.lower.len()));
            assert!(split == (1, 3) || split == (2, 2));
        }
    }

    #[test]
    fn boundary_bijection_on_cube() {
        let cube = poly(Family::Cube, 3);
        let lat = face_lattice(&cube).unwrap();
        let a = analyze(&cube, &lat, &dir(&[1, 2, 3])).unwrap();
        assert!(a.boundary_bijective);
    }

    #[test]
    fn hexagon_diagram() {
        let hex = hexagon();
        let gp = GeneralPosition::new(&hex).unwrap();
        for s in 0..5 {
            let d = gp.sample(s, DEFAULT_RETRIES).unwrap();
            let dv = diagram_vertices(&hex, &d).unwrap();
            assert_eq!(dv.iter().filter(|x| x.interior).count(), 4);
            let points: HashSet<&Vector> = dv.iter().filter(|x| !x.interior).map(|x| &x.point).collect();
            assert_eq!(points.len(), 2);
            assert!(diagram_lemma_check(&hex, &d).unwrap());
            assert_eq!(gap_check(&hex, &d, 0).unwrap().bound, 1);
        }
    }

    #[test]
    fn cube_diagram() {
        let cube = poly(Family::Cube, 3);
        let d = dir(&[1, 2, 3]);
        let dv = diagram_vertices(&cube, &d).unwrap();
        assert!(dv.iter().all(|x| x.l_plus + x.l_minus == 2));
        let kinds: HashSet<(i64, i64)> = dv.iter().filter(|x| x.interior).map(|x| (x.l_plus, x.l_minus)).collect();
        assert!(kinds.is_subset(&HashSet::from([(0, 2), (1, 1), (2, 0)])));
        assert!(kinds.contains(&(0, 2)) && kinds.contains(&(2, 0)));
        let w = dv.iter().find(|x| x.interior && x.l_plus == 0).unwrap();
        let r = quotient_dim_witness(&cube, w).unwrap();
        assert_eq!(r.plus_quotient_dim, 2);
        assert!(r.holds);
        let e = dv.iter().find(|x| x.interior && x.l_plus == 1);
        if let Some(e) = e {
            assert_eq!(quotient_dim_witness(&cube, e).unwrap().plus_quotient_dim, 1);
        }
        let outer = dv.iter().find(|x| !x.interior).unwrap();
        assert_eq!(quotient_dim_witness(&cube, outer).unwrap_err(), PolyError::NotInterior);
        let cells = refinement_cells(&cube, &d).unwrap();
        assert!(!cells.is_empty());
    }

    #[test]
    fn simplex_quotients_meet_bounds() {
        let tet = poly(Family::Simplex, 3);
        let gp = GeneralPosition::new(&tet).unwrap();
        for s in 0..5 {
            let d = gp.sample(s, DEFAULT_RETRIES).unwrap();
            for dv in diagram_vertices(&tet, &d).unwrap().iter().filter(|x| x.interior) {
                let w = quotient_dim_witness(&tet, dv).unwrap();
                assert!(w.rows.iter().all(|r| r.f_j == r.bound), "{w:?}");
            }
        }
    }

    #[test]
    fn gaps_on_cube() {
        let cube = poly(Family::Cube, 3);
        let d = dir(&[1, 2, 3]);
        let g1 = gap_check(&cube, &d, 1).unwrap();
        assert_eq!((g1.f_k, g1.shadow_f_k, g1.bound, g1.holds), (12, 6, 2, true));
        let g2 = gap_check(&cube, &d, 2).unwrap();
        assert_eq!((g2.f_k, g2.shadow_f_k, g2.bound, g2.holds), (6, 1, 4, true));
        assert_eq!(g2.boundary_f_k, 0);
    }

    #[test]
    fn simplex_facets_need_proper_shadow_faces() {
        let tri = poly(Family::Simplex, 2);
        let g = gap_check(&tri, &dir(&[1, 3]), 1).unwrap();
        assert_eq!((g.f_k, g.shadow_f_k, g.boundary_f_k, g.bound), (3, 1, 0, 3));
        assert!(g.holds && !g.holds_with_shadow);
    }

    #[test]
    fn segment_cases() {
        let seg = poly(Family::Simplex, 1);
        let gp = GeneralPosition::new(&seg).unwrap();
        let d = gp.sample(0, 4).unwrap();
        assert_eq!(shadow(&seg, &d).unwrap().poly.dim, 0);
        assert_eq!(diagram_vertices(&seg, &d).unwrap_err(), PolyError::DimensionTooLow(1));
    }
}
