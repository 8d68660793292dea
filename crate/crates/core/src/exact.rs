//! Exact rational linear algebra: scalars, vectors, hyperplanes, ranks and
//! affine hulls. Nothing in here touches floating point.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{PolyError, Result};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator by `num-rational`.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// `p/q`, or `p` when the denominator is one.
pub fn format_scalar(s: &Scalar) -> String {
    s.to_string()
}

/// Accepts `p`, `p/q` and terminating decimals such as `-0.125`.
pub fn parse_scalar(text: &str) -> Result<Scalar> {
    let t = text.trim();
    let bad = || PolyError::Parse(format!("not a rational number: {text:?}"));
    if let Some((whole, fracpart)) = t.split_once('.') {
        if fracpart.is_empty() || !fracpart.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), fracpart);
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), fracpart.len());
        let value = Scalar::new(num, den);
        return Ok(if negative { -value } else { value });
    }
    let value = Scalar::from_str(t).map_err(|_| bad())?;
    Ok(value)
}

pub fn scalar_to_f64(s: &Scalar) -> f64 {
    s.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for direct conversion
        let n = s.numer().to_f64().unwrap_or(f64::NAN);
        let d = s.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// A point or direction with exact rational coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vector(Vec<Scalar>);

impl Vector {
    pub fn new(coords: Vec<Scalar>) -> Self {
        Vector(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Self {
        Vector(coords.iter().map(|&c| int(c)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![Scalar::zero(); dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[axis] = Scalar::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Scalar> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &Vector) -> Scalar {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Scalar::zero(), |acc, (a, b)| acc + a * b)
    }

    /// Inner product under a diagonal metric `diag(metric)`.
    pub fn dot_metric(&self, other: &Vector, metric: &[Scalar]) -> Scalar {
        self.0
            .iter()
            .zip(&other.0)
            .zip(metric)
            .fold(Scalar::zero(), |acc, ((a, b), g)| acc + a * b * g)
    }

    pub fn scale(&self, s: &Scalar) -> Vector {
        Vector(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: &Scalar, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + s * b).collect())
    }

    /// Positive multiple with coprime integer coordinates. Zero stays zero.
    pub fn primitive(&self) -> Vector {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * Scalar::from_integer(lcm.clone())).to_integer())
            .collect();
        let gcd = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        Vector(
            ints.into_iter()
                .map(|c| Scalar::from_integer(c / &gcd))
                .collect(),
        )
    }

    /// Coordinates scaled by a common positive factor into integers.
    pub fn to_integers(&self, factor: &BigInt) -> Vec<BigInt> {
        self.0
            .iter()
            .map(|c| (c * Scalar::from_integer(factor.clone())).to_integer())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(scalar_to_f64).collect()
    }

    pub fn extended(&self, extra: Scalar) -> Vector {
        let mut c = self.0.clone();
        c.push(extra);
        Vector(c)
    }
}

impl Index<usize> for Vector {
    type Output = Scalar;
    fn index(&self, i: usize) -> &Scalar {
        &self.0[i]
    }
}

impl<'a> Sub<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl<'a> Add<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.0.iter().map(format_scalar).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let coords = strings
            .iter()
            .map(|s| parse_scalar(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Vector(coords))
    }
}

pub fn centroid(points: &[&Vector]) -> Vector {
    let dim = points[0].dim();
    let mut sum = Vector::zeros(dim);
    for p in points {
        sum = &sum + p;
    }
    sum.scale(&frac(1, points.len() as i64))
}

/// Closed halfspace `normal · x <= offset`; the normal points outward.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vector,
    #[serde(with = "scalar_string")]
    pub offset: Scalar,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: Scalar) -> Result<Self> {
        if normal.is_zero() {
            return Err(PolyError::ZeroVector);
        }
        Ok(Hyperplane { normal, offset })
    }

    /// `normal · x - offset`: negative inside, zero on the plane.
    pub fn slack(&self, x: &Vector) -> Scalar {
        self.normal.dot(x) - &self.offset
    }

    pub fn side(&self, x: &Vector) -> Ordering {
        let s = self.slack(x);
        if s.is_zero() {
            Ordering::Equal
        } else if s.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    /// Same halfspace with the leading nonzero of (normal, offset) scaled to ±1.
    pub fn normalized(&self) -> Hyperplane {
        let lead = self
            .normal
            .coords()
            .iter()
            .find(|c| !c.is_zero())
            .expect("nonzero normal")
            .abs();
        let inv = lead.recip();
        Hyperplane {
            normal: self.normal.scale(&inv),
            offset: &self.offset * &inv,
        }
    }
}

impl fmt::Debug for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}·x <= {}", self.normal, self.offset)
    }
}

pub(crate) mod scalar_string {
    use super::{format_scalar, parse_scalar, Scalar};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: &Scalar, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_scalar(s))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(de)?;
        parse_scalar(&s).map_err(serde::de::Error::custom)
    }
}

fn check_dims(rows: &[Vector]) -> Result<Option<usize>> {
    let Some(first) = rows.first() else {
        return Ok(None);
    };
    for r in rows {
        if r.dim() != first.dim() {
            return Err(PolyError::MixedDimensions(first.dim(), r.dim()));
        }
    }
    Ok(Some(first.dim()))
}

/// Reduced row echelon form in place, pivoting only within the first `cols`
/// columns (later columns are carried along); returns pivot columns.
fn rref(m: &mut [Vec<Scalar>], cols: usize) -> Vec<usize> {
    let width = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for c in col..width {
            m[row][c] = &m[row][c] * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..width {
                    let delta = &factor * &m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Exact rank over the rationals.
pub fn rank(rows: &[Vector]) -> Result<usize> {
    let Some(cols) = check_dims(rows)? else {
        return Ok(0);
    };
    let mut m: Vec<Vec<Scalar>> = rows.iter().map(|r| r.0.clone()).collect();
    Ok(rref(&mut m, cols).len())
}

/// Dimension of the affine hull; -1 for the empty set.
pub fn affine_dim(points: &[Vector]) -> Result<i64> {
    check_dims(points)?;
    let Some(base) = points.first() else {
        return Ok(-1);
    };
    let diffs: Vec<Vector> = points[1..].iter().map(|p| p - base).collect();
    Ok(rank(&diffs)? as i64)
}

/// Indices of a maximal affinely independent subset, chosen greedily in order.
pub fn affine_basis_indices(points: &[&Vector]) -> Vec<usize> {
    let Some(base) = points.first() else {
        return Vec::new();
    };
    let cols = base.dim();
    let mut chosen = vec![0];
    let mut echelon: Vec<Vec<Scalar>> = Vec::new();
    for (i, p) in points.iter().enumerate().skip(1) {
        if echelon.len() == cols {
            break;
        }
        let mut trial = echelon.clone();
        trial.push((*p - base).0);
        let r = rref(&mut trial, cols).len();
        if r > echelon.len() {
            trial.truncate(r);
            echelon = trial;
            chosen.push(i);
        }
    }
    chosen
}

/// Basis of `{x : row · x = 0 for every row}`.
pub fn nullspace(rows: &[Vector], cols: usize) -> Vec<Vector> {
    let mut m: Vec<Vec<Scalar>> = rows.iter().map(|r| r.0.clone()).collect();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = Vector::zeros(cols);
            x.0[f] = Scalar::one();
            for (r, &pc) in pivots.iter().enumerate() {
                x.0[pc] = -m[r][f].clone();
            }
            x
        })
        .collect()
}

/// Unique solution of the square system `columns · x = rhs`, if any.
pub fn solve_columns(columns: &[Vector], rhs: &Vector) -> Option<Vector> {
    let n = rhs.dim();
    if columns.len() != n {
        return None;
    }
    let mut m: Vec<Vec<Scalar>> = (0..n)
        .map(|r| {
            let mut row: Vec<Scalar> = columns.iter().map(|c| c.0[r].clone()).collect();
            row.push(rhs.0[r].clone());
            row
        })
        .collect();
    let pivots = rref(&mut m, n);
    if pivots.len() < n {
        return None;
    }
    Some(Vector(m.into_iter().map(|mut row| row.pop().unwrap()).collect()))
}

/// Gram–Schmidt without normalization under a diagonal metric; vectors that
/// fall into the span of earlier ones are dropped.
pub fn orthogonalize(vectors: &[Vector], metric: &[Scalar]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &out {
            let coef = w.dot_metric(b, metric) / b.dot_metric(b, metric);
            w = w.add_scaled(&-coef, b);
        }
        if !w.is_zero() {
            out.push(w);
        }
    }
    out
}

/// `dim - 1` pairwise orthogonal integer vectors spanning `v`'s orthogonal
/// complement.
pub fn orthogonal_complement_basis(v: &Vector) -> Result<Vec<Vector>> {
    if v.is_zero() {
        return Err(PolyError::ZeroVector);
    }
    let n = v.dim();
    let ones = vec![Scalar::one(); n];
    let mut seed = vec![v.clone()];
    seed.extend((0..n).map(|i| Vector::unit(n, i)));
    let basis = orthogonalize(&seed, &ones);
    Ok(basis[1..].iter().map(Vector::primitive).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(rows: &[&[i64]]) -> Vec<Vector> {
        rows.iter().map(|r| Vector::from_ints(r)).collect()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&vs(&[&[1, 0], &[0, 1]])).unwrap(), 2);
        assert_eq!(rank(&vs(&[&[1, 2], &[2, 4]])).unwrap(), 1);
        // hand row reduction: R2-4R1 = (0,-3,-6), R3-7R1 = (0,-6,-12) = 2(R2')
        assert_eq!(rank(&vs(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])).unwrap(), 2);
        assert_eq!(rank(&[]).unwrap(), 0);
    }

    #[test]
    fn rank_mixed_dims() {
        let err = rank(&vs(&[&[1, 0], &[0, 1, 2]])).unwrap_err();
        assert_eq!(err, PolyError::MixedDimensions(2, 3));
        assert!(affine_dim(&vs(&[&[1], &[0, 1]])).is_err());
    }

    #[test]
    fn affine_dim_examples() {
        assert_eq!(affine_dim(&[]).unwrap(), -1);
        assert_eq!(affine_dim(&vs(&[&[3, 4]])).unwrap(), 0);
        assert_eq!(affine_dim(&vs(&[&[0, 0], &[1, 0], &[2, 0]])).unwrap(), 1);
        assert_eq!(affine_dim(&vs(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap(), 2);
    }

    #[test]
    fn complement_examples() {
        let b = orthogonal_complement_basis(&Vector::from_ints(&[0, 0, 1])).unwrap();
        assert_eq!(b, vs(&[&[1, 0, 0], &[0, 1, 0]]));
        let b = orthogonal_complement_basis(&Vector::from_ints(&[1, 1])).unwrap();
        assert_eq!(b, vs(&[&[1, -1]]));
        let v = Vector::from_ints(&[1, 2, 3]);
        let b = orthogonal_complement_basis(&v).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|x| x.dot(&v).is_zero()));
        assert!(b[0].dot(&b[1]).is_zero());
        assert_eq!(
            orthogonal_complement_basis(&Vector::zeros(3)).unwrap_err(),
            PolyError::ZeroVector
        );
    }

    #[test]
    fn scalar_text() {
        assert_eq!(format_scalar(&frac(6, 4)), "3/2");
        assert_eq!(format_scalar(&int(-7)), "-7");
        assert_eq!(parse_scalar("3/2").unwrap(), frac(3, 2));
        assert_eq!(parse_scalar("-0.125").unwrap(), frac(-1, 8));
        assert_eq!(parse_scalar(" 4 ").unwrap(), int(4));
        assert!(parse_scalar("1/0").is_err());
        assert!(parse_scalar("abc").is_err());
    }

    #[test]
    fn solve_and_nullspace() {
        let cols = vs(&[&[1, 0], &[1, 1]]);
        let x = solve_columns(&cols, &Vector::from_ints(&[3, 2])).unwrap();
        assert_eq!(x, Vector::from_ints(&[1, 2]));
        assert!(solve_columns(&vs(&[&[1, 2], &[2, 4]]), &Vector::from_ints(&[1, 1])).is_none());
        let ns = nullspace(&vs(&[&[1, 1, 1]]), 3);
        assert_eq!(ns.len(), 2);
        assert!(ns.iter().all(|n| n.dot(&Vector::from_ints(&[1, 1, 1])).is_zero()));
    }

    #[test]
    fn primitive_vectors() {
        let v = Vector::new(vec![frac(1, 2), frac(-1, 3), int(0)]);
        assert_eq!(v.primitive(), Vector::from_ints(&[3, -2, 0]));
    }
}
