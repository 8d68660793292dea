//! Solid angles of a polytope at its faces, estimated by sampling directions
//! in the tangent cone, plus the angle-sum checks built on top of them.
//!
//! Sampling discipline: the sample range is cut into chunks of [`CHUNK`]
//! samples. Chunk `c` draws from `ChaCha8Rng::seed_from_u64(seed)` with
//! `set_stream(c)`, one `StandardNormal` per coordinate, so the hit count is
//! independent of how chunks are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::IndexSet;
use crate::bounds::rho;
use crate::error::{PolyError, Result};
use crate::exact::{affine_dim, centroid, scalar_to_f64, Vector};
use crate::lattice::face_lattice;
use crate::polytope::Polytope;
use crate::projection::{shadow, Direction};

pub const CHUNK: u64 = 65_536;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_SIGMA: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub samples: u64,
    pub seed: u64,
    /// Statistical verdicts allow this many standard errors.
    pub sigma: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { samples: DEFAULT_SAMPLES, seed: 0, sigma: DEFAULT_SIGMA }
    }
}

impl SamplingConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        SamplingConfig { samples, seed, ..Default::default() }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SamplingConfig { seed, ..self }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `tag`-th sub-computation of a run seeded with `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

impl Verdict {
    pub fn is_hard_failure(self) -> bool {
        self == Verdict::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    /// Known in closed form; `samples` is 0 and `stderr` is 0.
    pub exact: bool,
}

impl AngleEstimate {
    pub fn exact(value: f64) -> Self {
        AngleEstimate { mean: value, stderr: 0.0, samples: 0, seed: 0, exact: true }
    }

    fn from_hits(hits: u64, samples: u64, seed: u64) -> Self {
        let mean = hits as f64 / samples as f64;
        AngleEstimate {
            mean,
            stderr: (mean * (1.0 - mean) / samples as f64).sqrt(),
            samples,
            seed,
            exact: false,
        }
    }

    /// `|mean - target| <= sigma * stderr`; exact values compare to 1e-12.
    pub fn agrees_with(&self, target: f64, sigma: f64) -> bool {
        (self.mean - target).abs() <= sigma * self.stderr + 1e-12
    }
}

/// Cone of directions pointing into `P` from a relative-interior point of a face.
#[derive(Clone, Debug)]
pub struct TangentCone {
    pub face: IndexSet,
    pub apex: Vector,
    /// Indices of the facets containing the face.
    pub facets: Vec<usize>,
    /// Outward facet normals in intrinsic coordinates.
    pub normals: Vec<Vector>,
    unit_normals: Vec<Vec<f64>>,
}

impl TangentCone {
    pub fn dim(&self) -> usize {
        self.apex.dim()
    }

    /// Normals in an orthonormal frame, scaled to unit length.
    pub fn unit_normals(&self) -> &[Vec<f64>] {
        &self.unit_normals
    }

    pub fn contains_direction(&self, u: &[f64]) -> bool {
        self.unit_normals.iter().all(|n| dot(n, u) <= 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The normal `n` of `n·x <= b` expressed in the orthonormal frame
/// `y_j = sqrt(g_j) x_j`, normalized.
fn orthonormal_normal(p: &Polytope, n: &Vector) -> Vec<f64> {
    let raw: Vec<f64> = n
        .coords()
        .iter()
        .zip(&p.metric)
        .map(|(c, g)| scalar_to_f64(c) / scalar_to_f64(g).sqrt())
        .collect();
    let len = dot(&raw, &raw).sqrt();
    raw.into_iter().map(|x| x / len).collect()
}

pub fn tangent_cone(p: &Polytope, g: &IndexSet) -> Result<TangentCone> {
    if g.is_empty() || !p.is_face(g) {
        return Err(PolyError::NotAFace);
    }
    let pts: Vec<&Vector> = g.iter().map(|i| &p.vertices[i]).collect();
    let facets = p.facets_containing(g);
    let normals: Vec<Vector> = facets.iter().map(|&i| p.facets[i].supporting.normal.clone()).collect();
    let unit_normals = normals.iter().map(|n| orthonormal_normal(p, n)).collect();
    Ok(TangentCone { face: g.clone(), apex: centroid(&pts), facets, normals, unit_normals })
}

fn count_hits(cone: &TangentCone, samples: u64, seed: u64) -> u64 {
    let dim = cone.dim();
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(samples - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut u = vec![0.0f64; dim];
            let mut hits = 0u64;
            for _ in 0..n {
                for x in u.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                if cone.contains_direction(&u) {
                    hits += 1;
                }
            }
            hits
        })
        .sum()
}

/// φ(P, G): the fraction of directions at a relative-interior point of `G`
/// that point into `P`.
pub fn solid_angle(p: &Polytope, g: &IndexSet, samples: u64, seed: u64) -> Result<AngleEstimate> {
    if samples == 0 {
        return Err(PolyError::OutOfRange("samples must be at least 1".into()));
    }
    let cone = tangent_cone(p, g)?;
    if cone.normals.is_empty() {
        return Ok(AngleEstimate::exact(1.0));
    }
    if p.dim == 1 {
        return Ok(AngleEstimate::exact(0.5));
    }
    Ok(AngleEstimate::from_hits(count_hits(&cone, samples, seed), samples, seed))
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0).acos()
}

/// Closed-form φ(P, G) for polytopes of dimension at most 3.
pub fn solid_angle_exact_lowdim(p: &Polytope, g: &IndexSet) -> Result<f64> {
    if p.dim > 3 {
        return Err(PolyError::UnsupportedDimension(p.dim as i64));
    }
    let cone = tangent_cone(p, g)?;
    let tau = std::f64::consts::TAU;
    let n = cone.unit_normals();
    match n.len() {
        0 => return Ok(1.0),
        1 => return Ok(0.5),
        _ => {}
    }
    let face_dim = affine_dim(&g.iter().map(|i| p.vertices[i].clone()).collect::<Vec<_>>())?;
    match (p.dim, face_dim) {
        (2, 0) | (3, 1) => Ok((std::f64::consts::PI - angle_between(&n[0], &n[1])) / tau),
        (3, 0) => {
            // area of the spherical polygon cut out by the cone; its interior
            // angles are the dihedral angles π - θ at the edges through the vertex
            let mut turning = 0.0;
            for a in 0..n.len() {
                for b in a + 1..n.len() {
                    let shared = p.facets[cone.facets[a]]
                        .vertex_set
                        .intersection(&p.facets[cone.facets[b]].vertex_set);
                    if shared.len() >= 2 {
                        turning += angle_between(&n[a], &n[b]);
                    }
                }
            }
            Ok((tau - turning) / (2.0 * tau))
        }
        _ => Err(PolyError::UnsupportedDimension(p.dim as i64)),
    }
}

/// φ(F, G) for the `facet_index`-th facet F, measured inside aff(F); exactly
/// 0 when `G` is not contained in F.
pub fn facet_angle(
    p: &Polytope,
    facet_index: usize,
    g: &IndexSet,
    samples: u64,
    seed: u64,
) -> Result<AngleEstimate> {
    let facet = p.facets.get(facet_index).ok_or(PolyError::IndexOutOfRange {
        index: facet_index,
        len: p.facets.len(),
    })?;
    if !g.is_subset(&facet.vertex_set) {
        return Ok(AngleEstimate::exact(0.0));
    }
    let local: Vec<usize> = facet.vertex_set.iter().collect();
    let g_local: IndexSet = g
        .iter()
        .map(|v| local.binary_search(&v).expect("subset of facet"))
        .collect();
    solid_angle(&p.facet_as_polytope(facet_index)?, &g_local, samples, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaceAngle {
    pub face: Vec<usize>,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub verdict: Option<Verdict>,
}

impl FaceAngle {
    pub fn new(face: &IndexSet, est: &AngleEstimate, verdict: Option<Verdict>) -> Self {
        FaceAngle {
            face: face.to_vec(),
            mean: est.mean,
            stderr: est.stderr,
            samples: est.samples,
            seed: est.seed,
            verdict,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleSumReport {
    pub k: i64,
    pub sum: f64,
    pub stderr: f64,
    pub faces: Vec<FaceAngle>,
}

fn quadrature(errs: impl Iterator<Item = f64>) -> f64 {
    errs.map(|e| e * e).sum::<f64>().sqrt()
}

/// φ_k(P): the sum of φ(P, G) over the k-faces G. Face `i` (in lattice
/// order) is sampled with `derive_seed(seed, i)`.
pub fn angle_sum(p: &Polytope, k: i64, cfg: &SamplingConfig) -> Result<AngleSumReport> {
    if k < 0 || k > p.dim as i64 {
        return Err(PolyError::OutOfRange(format!("angle sum needs 0 <= k <= {}, got {k}", p.dim)));
    }
    let lattice = face_lattice(p)?;
    let faces: Vec<&IndexSet> = lattice.faces_of_dim(k).map(|f| &f.vertex_set).collect();
    let estimates = faces
        .par_iter()
        .enumerate()
        .map(|(i, g)| solid_angle(p, g, cfg.samples, derive_seed(cfg.seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleSumReport {
        k,
        sum: estimates.iter().map(|e| e.mean).sum(),
        stderr: quadrature(estimates.iter().map(|e| e.stderr)),
        faces: faces.iter().zip(&estimates).map(|(g, e)| FaceAngle::new(g, e, None)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub face: Vec<usize>,
    pub face_dim: i64,
    pub sum: f64,
    pub stderr: f64,
    pub exact: bool,
    /// `(facet index, φ(F, G))` over the facets containing G.
    pub terms: Vec<(usize, AngleEstimate)>,
    pub within_bound: bool,
    pub flagged_equality: bool,
    pub verdict: Verdict,
}

/// Σ φ(F, G) over facets F ⊇ G, which is at most 1 with equality exactly
/// when dim G = d - 2. That case is returned as exactly 1 without sampling.
pub fn curvature_check(p: &Polytope, g: &IndexSet, cfg: &SamplingConfig) -> Result<CurvatureReport> {
    if g.is_empty() || !p.is_face(g) {
        return Err(PolyError::NotAFace);
    }
    let d = p.dim as i64;
    let face_dim = affine_dim(&g.iter().map(|i| p.vertices[i].clone()).collect::<Vec<_>>())?;
    if face_dim > d - 2 {
        return Err(PolyError::OutOfRange(format!(
            "curvature needs dim G <= {}, got {face_dim}",
            d - 2
        )));
    }
    let facets = p.facets_containing(g);
    let terms: Vec<(usize, AngleEstimate)> = if face_dim == d - 2 {
        facets.iter().map(|&i| (i, AngleEstimate::exact(0.5))).collect()
    } else {
        facets
            .par_iter()
            .map(|&i| {
                facet_angle(p, i, g, cfg.samples, derive_seed(cfg.seed, i as u64)).map(|e| (i, e))
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(curvature_report(g, face_dim, terms, cfg.sigma))
}

fn curvature_report(
    g: &IndexSet,
    face_dim: i64,
    terms: Vec<(usize, AngleEstimate)>,
    sigma: f64,
) -> CurvatureReport {
    let exact = terms.iter().all(|(_, e)| e.exact);
    let sum: f64 = terms.iter().map(|(_, e)| e.mean).sum();
    let stderr = quadrature(terms.iter().map(|(_, e)| e.stderr));
    let slack = sigma * stderr + 1e-12;
    let within_bound = sum <= 1.0 + slack;
    let flagged_equality = (sum - 1.0).abs() <= slack;
    // equality is only informative: near-flat faces cannot be told apart
    // from flat ones at finite sample counts
    let verdict = if within_bound { Verdict::Pass } else { Verdict::Fail };
    CurvatureReport {
        face: g.to_vec(),
        face_dim,
        sum,
        stderr,
        exact,
        terms,
        within_bound,
        flagged_equality,
        verdict,
    }
}

/// [`curvature_check`] at every nonempty face of dimension at most d - 2, in
/// lattice order. Same seeds, so each report equals the single-face call.
pub fn curvature_sweep(p: &Polytope, cfg: &SamplingConfig) -> Result<Vec<CurvatureReport>> {
    let d = p.dim as i64;
    let lattice = face_lattice(p)?;
    let facet_polys = (0..p.facets.len())
        .into_par_iter()
        .map(|i| p.facet_as_polytope(i))
        .collect::<Result<Vec<_>>>()?;
    let locals: Vec<Vec<usize>> = p.facets.iter().map(|f| f.vertex_set.to_vec()).collect();
    lattice
        .faces
        .par_iter()
        .filter(|f| f.dim >= 0 && f.dim <= d - 2)
        .map(|f| {
            let g = &f.vertex_set;
            let terms = p
                .facets_containing(g)
                .into_iter()
                .map(|i| {
                    if f.dim == d - 2 {
                        return Ok((i, AngleEstimate::exact(0.5)));
                    }
                    let g_local: IndexSet = g
                        .iter()
                        .map(|v| locals[i].binary_search(&v).expect("subset of facet"))
                        .collect();
                    let seed = derive_seed(cfg.seed, i as u64);
                    solid_angle(&facet_polys[i], &g_local, cfg.samples, seed).map(|e| (i, e))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(curvature_report(g, f.dim, terms, cfg.sigma))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub k: i64,
    pub bound: f64,
    pub sum: f64,
    pub stderr: f64,
    pub equality: bool,
    pub verdict: Verdict,
}

fn lower_bound_report(k: i64, bound: f64, s: &AngleSumReport, sigma: f64, miss: Verdict) -> LowerBoundReport {
    let slack = sigma * s.stderr + 1e-12;
    LowerBoundReport {
        k,
        bound,
        sum: s.sum,
        stderr: s.stderr,
        equality: (s.sum - bound).abs() <= slack,
        verdict: if s.sum >= bound - slack { Verdict::Pass } else { miss },
    }
}

/// φ_k(Q) >= ρ(dim Q + 1, dim Q - k) for 0 <= k <= dim Q - 1.
pub fn prop_angle_sum_check(q: &Polytope, k: i64, cfg: &SamplingConfig) -> Result<LowerBoundReport> {
    let dq = q.dim as i64;
    if k < 0 || k >= dq {
        return Err(PolyError::OutOfRange(format!("need 0 <= k < {dq}, got {k}")));
    }
    let bound = scalar_to_f64(&rho(dq + 1, dq - k)?);
    let s = angle_sum(q, k, cfg)?;
    Ok(lower_bound_report(k, bound, &s, cfg.sigma, Verdict::Fail))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerlesReport {
    pub f_k: u64,
    /// Largest f_k over the sampled shadows.
    pub shadow_max: u64,
    pub directions: usize,
    #[serde(flatten)]
    pub check: LowerBoundReport,
}

/// φ_k(P) >= ½ (f_k(P) - max_v f_k(π_v P)) with the max over the supplied
/// directions only. A miss is a WARN: the sampled max can undershoot the true
/// one, which makes the tested bound stronger than the real one.
pub fn perles_check(
    p: &Polytope,
    k: i64,
    directions: &[Direction],
    cfg: &SamplingConfig,
) -> Result<PerlesReport> {
    let d = p.dim as i64;
    if k < 0 || k >= d {
        return Err(PolyError::OutOfRange(format!("need 0 <= k < {d}, got {k}")));
    }
    if directions.is_empty() {
        return Err(PolyError::OutOfRange("need at least one direction".into()));
    }
    let f_k = face_lattice(p)?.f_vector()?.f(k);
    let shadow_max = directions
        .iter()
        .map(|v| Ok(face_lattice(&shadow(p, v)?.poly)?.f_vector()?.f(k)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let bound = (f_k as f64 - shadow_max as f64) / 2.0;
    let s = angle_sum(p, k, cfg)?;
    Ok(PerlesReport {
        f_k,
        shadow_max,
        directions: directions.len(),
        check: lower_bound_report(k, bound, &s, cfg.sigma, Verdict::Warn),
    })
}
