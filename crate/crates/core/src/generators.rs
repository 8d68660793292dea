//! Deterministic constructors for the polytope families used by tests and
//! corpus runs.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{PolyError, Result};
use crate::exact::{centroid, frac, int, Scalar, Vector};
use crate::polytope::{hull_from_points, Polytope, MAX_DIM, MAX_POINTS};

/// Denominator used when rounding random sphere points to rationals.
pub const SPHERE_DENOMINATOR: i64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Simplex,
    Cube,
    Cross,
    Cyclic,
    Pyramid,
    Prism,
    RandomSphere,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Simplex,
        Family::Cube,
        Family::Cross,
        Family::Cyclic,
        Family::Pyramid,
        Family::Prism,
        Family::RandomSphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Simplex => "simplex",
            Family::Cube => "cube",
            Family::Cross => "cross",
            Family::Cyclic => "cyclic",
            Family::Pyramid => "pyramid",
            Family::Prism => "prism",
            Family::RandomSphere => "random-sphere",
        }
    }

    /// Families whose vertex count is a free parameter.
    pub fn needs_n(self) -> bool {
        matches!(self, Family::Cyclic | Family::RandomSphere)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| PolyError::BadSpec(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub dim: usize,
    pub n: Option<usize>,
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(family: Family, dim: usize) -> Self {
        FamilySpec { family, dim, n: None, seed: 0 }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(PolyError::BadSpec("dim must be at least 1".into()));
        }
        if self.dim > MAX_DIM {
            return Err(PolyError::TooLarge(format!("dimension {} (limit {MAX_DIM})", self.dim)));
        }
        match (self.family.needs_n(), self.n) {
            (true, None) => Err(PolyError::BadSpec(format!("family {} needs n", self.family))),
            (true, Some(n)) if n <= self.dim => Err(PolyError::BadSpec(format!(
                "family {} needs n > dim (n = {n}, dim = {})",
                self.family, self.dim
            ))),
            _ => Ok(()),
        }
    }
}

pub fn generate(spec: &FamilySpec) -> Result<Polytope> {
    spec.validate()?;
    let d = spec.dim;
    let poly = match spec.family {
        Family::Simplex => hull_from_points(&simplex_points(d))?,
        Family::Cube => {
            if (1usize << d) > MAX_POINTS {
                return Err(PolyError::TooLarge(format!("{d}-cube has {} vertices", 1u64 << d)));
            }
            hull_from_points(&cube_points(d))?
        }
        Family::Cross => hull_from_points(&cross_points(d))?,
        Family::Cyclic => hull_from_points(&cyclic_points(d, spec.n.unwrap()))?,
        Family::Pyramid => pyramid(&base_polytope(Family::Cube, d - 1)?)?,
        Family::Prism => prism(&base_polytope(Family::Simplex, d - 1)?)?,
        Family::RandomSphere => {
            let p = hull_from_points(&sphere_points(d, spec.n.unwrap(), spec.seed))?;
            if p.dim != d {
                return Err(PolyError::BadSpec(format!(
                    "random sample with seed {} is degenerate",
                    spec.seed
                )));
            }
            p
        }
    };
    Ok(poly)
}

fn base_polytope(family: Family, dim: usize) -> Result<Polytope> {
    if dim == 0 {
        return hull_from_points(&[Vector::zeros(1)]);
    }
    generate(&FamilySpec::new(family, dim))
}

/// Regular simplex: the standard basis of `R^{d+1}`.
pub fn simplex_points(d: usize) -> Vec<Vector> {
    (0..=d).map(|i| Vector::unit(d + 1, i)).collect()
}

/// `{0,1}^d`, in binary counting order.
pub fn cube_points(d: usize) -> Vec<Vector> {
    (0..1u64 << d)
        .map(|m| Vector::from_ints(&(0..d).map(|i| ((m >> i) & 1) as i64).collect::<Vec<_>>()))
        .collect()
}

pub fn cross_points(d: usize) -> Vec<Vector> {
    (0..d)
        .flat_map(|i| {
            let e = Vector::unit(d, i);
            let minus = e.scale(&int(-1));
            [e, minus]
        })
        .collect()
}

/// Moment curve `t ↦ (t, t², …, t^d)` at `t = 1..=n`.
pub fn cyclic_points(d: usize, n: usize) -> Vec<Vector> {
    (1..=n as i64)
        .map(|t| Vector::from_ints(&(1..=d as u32).map(|e| t.pow(e)).collect::<Vec<_>>()))
        .collect()
}

/// Seeded Gaussian directions normalized onto the unit sphere and rounded to
/// multiples of `1 / SPHERE_DENOMINATOR`, duplicates removed.
pub fn sphere_points(d: usize, n: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vector> = Vec::with_capacity(n);
    for _ in 0..n {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let coords: Vec<Scalar> = g
            .iter()
            .map(|x| frac((x / norm * SPHERE_DENOMINATOR as f64).round() as i64, SPHERE_DENOMINATOR))
            .collect();
        let v = Vector::new(coords);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Apex one unit above the centroid, in one extra ambient coordinate.
pub fn pyramid(p: &Polytope) -> Result<Polytope> {
    let base = p.ambient_vertices();
    let mut points: Vec<Vector> = base.iter().map(|v| v.extended(int(0))).collect();
    let apex = centroid(&base.iter().collect::<Vec<_>>()).extended(int(1));
    points.push(apex);
    hull_from_points(&points)
}

/// Two copies of `p`, one unit apart in an extra ambient coordinate.
pub fn prism(p: &Polytope) -> Result<Polytope> {
    let base = p.ambient_vertices();
    let points: Vec<Vector> = base
        .iter()
        .map(|v| v.extended(int(0)))
        .chain(base.iter().map(|v| v.extended(int(1))))
        .collect();
    hull_from_points(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::face_lattice;

    fn fv(spec: FamilySpec) -> Vec<u64> {
        let p = generate(&spec).unwrap();
        face_lattice(&p).unwrap().f_vector().unwrap().counts
    }

    #[test]
    fn family_f_vectors() {
        assert_eq!(fv(FamilySpec::new(Family::Simplex, 3)), vec![4, 6, 4]);
        assert_eq!(fv(FamilySpec::new(Family::Cross, 4)), vec![8, 24, 32, 16]);
        assert_eq!(fv(FamilySpec::new(Family::Cyclic, 4).with_n(6)), vec![6, 15, 18, 9]);
        assert_eq!(fv(FamilySpec::new(Family::Pyramid, 3)), vec![5, 8, 5]);
        assert_eq!(fv(FamilySpec::new(Family::Prism, 3)), vec![6, 9, 5]);
        assert_eq!(fv(FamilySpec::new(Family::Pyramid, 1)), vec![2]);
    }

    #[test]
    fn pyramid_of_point_is_segment() {
        let point = hull_from_points(&[Vector::from_ints(&[3])]).unwrap();
        let seg = pyramid(&point).unwrap();
        assert_eq!((seg.dim, seg.vertex_count()), (1, 2));
    }

    #[test]
    fn flags_by_family() {
        let s = generate(&FamilySpec::new(Family::Simplex, 4)).unwrap();
        assert!(s.is_simple() && s.is_simplicial());
        assert!(generate(&FamilySpec::new(Family::Cube, 4)).unwrap().is_simple());
        assert!(generate(&FamilySpec::new(Family::Cross, 4)).unwrap().is_simplicial());
        let pyr = generate(&FamilySpec::new(Family::Pyramid, 3)).unwrap();
        assert!(!pyr.is_simple() && !pyr.is_simplicial());
    }

    #[test]
    fn bad_specs() {
        assert!(matches!(generate(&FamilySpec::new(Family::Cyclic, 4)), Err(PolyError::BadSpec(_))));
        assert!(matches!(
            generate(&FamilySpec::new(Family::Cyclic, 4).with_n(4)),
            Err(PolyError::BadSpec(_))
        ));
        assert!(matches!(generate(&FamilySpec::new(Family::Cube, 0)), Err(PolyError::BadSpec(_))));
        assert!(matches!(generate(&FamilySpec::new(Family::Cube, 7)), Err(PolyError::TooLarge(_))));
        assert!(matches!(generate(&FamilySpec::new(Family::Simplex, 8)), Err(PolyError::TooLarge(_))));
        assert!("hypercube".parse::<Family>().is_err());
        assert_eq!("random-sphere".parse::<Family>().unwrap(), Family::RandomSphere);
    }

    #[test]
    fn random_sphere_is_deterministic() {
        let spec = FamilySpec::new(Family::RandomSphere, 3).with_n(10).with_seed(42);
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = generate(&spec.with_seed(43)).unwrap();
        assert_ne!(a.vertices, c.vertices);
    }
}
