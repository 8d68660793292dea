//! Face-number lower bounds: ρ(d, k), the ratio bounds against f_0 and
//! f_{d-1} with their equality cases, min{f_0, f_{d-1}}, the binomial
//! convexity lemma, and the Xue and Björner comparators.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{PolyError, Result};
use crate::exact::{frac, int, scalar_string, Scalar};
use crate::lattice::{face_lattice, FVector};
use crate::polytope::Polytope;

/// Binomial coefficient, zero when `k > n`.
pub fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// ρ(d, k) = ½ [C(⌈d/2⌉, k) + C(⌊d/2⌋, k)] for 0 ≤ k < d.
pub fn rho(d: i64, k: i64) -> Result<Scalar> {
    if k < 0 || k >= d {
        return Err(PolyError::OutOfRange(format!("rho needs 0 <= k < d, got d={d}, k={k}")));
    }
    Ok(frac(rho_twice(d, k) as i64, 2))
}

/// 2ρ(d, k), always an integer.
pub fn rho_twice(d: i64, k: i64) -> u64 {
    let (hi, lo) = (((d + 1) / 2) as u64, (d / 2) as u64);
    binom(hi, k as u64) + binom(lo, k as u64)
}

/// C(a,c) + C(b,c) ≥ C(⌈(a+b)/2⌉, c) + C(⌊(a+b)/2⌋, c)
pub fn convexity_lemma_check(a: u64, b: u64, c: u64) -> bool {
    let s = a + b;
    binom(a, c) + binom(b, c) >= binom(s.div_ceil(2), c) + binom(s / 2, c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub k: i64,
    pub f_k: u64,
    #[serde(with = "scalar_string")]
    pub ratio_vertices: Scalar,
    #[serde(with = "scalar_string")]
    pub rho_vertices: Scalar,
    #[serde(with = "scalar_string")]
    pub ratio_facets: Scalar,
    #[serde(with = "scalar_string")]
    pub rho_facets: Scalar,
    pub satisfied_vertices: bool,
    pub satisfied_facets: bool,
    pub equal_vertices: bool,
    pub equal_facets: bool,
    pub predicted_equal_vertices: bool,
    pub predicted_equal_facets: bool,
}

impl BoundRow {
    pub fn consistent(&self) -> bool {
        self.satisfied_vertices
            && self.satisfied_facets
            && self.equal_vertices == self.predicted_equal_vertices
            && self.equal_facets == self.predicted_equal_facets
    }

    /// `v`/`f` for equality against f_0 / f_{d-1}, `-` for none.
    pub fn equality_flags(&self) -> String {
        let mut s = String::new();
        if self.equal_vertices {
            s.push('v');
        }
        if self.equal_facets {
            s.push('f');
        }
        if s.is_empty() {
            s.push('-');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub dim: i64,
    pub f_vector: Vec<u64>,
    pub simple: bool,
    pub simplicial: bool,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn all_consistent(&self) -> bool {
        self.rows.iter().all(BoundRow::consistent)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub const CSV_HEADER: &'static str = "k,f_k,ratio_vertices,rho_vertices,ratio_facets,rho_facets,equality_flags,verdict";

    pub fn csv_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    r.k,
                    r.f_k,
                    r.ratio_vertices,
                    r.rho_vertices,
                    r.ratio_facets,
                    r.rho_facets,
                    r.equality_flags(),
                    if r.consistent() { "pass" } else { "FAIL" }
                )
            })
            .collect()
    }
}

pub fn verify_main_bounds(p: &Polytope) -> Result<BoundReport> {
    let fv = face_lattice(p)?.f_vector()?;
    verify_bounds_for(&fv, p.is_simple(), p.is_simplicial())
}

/// Checks f_k/f_0 ≥ ρ(d,k) and f_k/f_{d-1} ≥ ρ(d,d-k-1) for every k, with
/// equality expected exactly on {k=0} ∪ {k=1, simple} and
/// {k=d-1} ∪ {k=d-2, simplicial}. Any mismatch is a toolkit bug and comes
/// back as `BoundViolated` carrying the full report.
pub fn verify_bounds_for(fv: &FVector, simple: bool, simplicial: bool) -> Result<BoundReport> {
    let report = bound_report(fv, simple, simplicial)?;
    if !report.all_consistent() {
        return Err(PolyError::BoundViolated(report.to_json()));
    }
    Ok(report)
}

/// The rows of [`verify_bounds_for`] without failing on inconsistent ones.
pub fn bound_report(fv: &FVector, simple: bool, simplicial: bool) -> Result<BoundReport> {
    let d = fv.dim;
    if d < 1 {
        return Err(PolyError::OutOfRange(format!("bounds need dim >= 1, got {d}")));
    }
    let f0 = int(fv.f(0) as i64);
    let ffacets = int(fv.f(d - 1) as i64);
    let mut rows = Vec::with_capacity(d as usize);
    for k in 0..d {
        let fk = int(fv.f(k) as i64);
        let ratio_vertices = &fk / &f0;
        let ratio_facets = &fk / &ffacets;
        let rho_vertices = rho(d, k)?;
        let rho_facets = rho(d, d - k - 1)?;
        rows.push(BoundRow {
            k,
            f_k: fv.f(k),
            satisfied_vertices: ratio_vertices >= rho_vertices,
            satisfied_facets: ratio_facets >= rho_facets,
            equal_vertices: ratio_vertices == rho_vertices,
            equal_facets: ratio_facets == rho_facets,
            predicted_equal_vertices: k == 0 || (k == 1 && simple),
            predicted_equal_facets: k == d - 1 || (k == d - 2 && simplicial),
            ratio_vertices,
            rho_vertices,
            ratio_facets,
            rho_facets,
        });
    }
    Ok(BoundReport {
        dim: d,
        f_vector: fv.counts.clone(),
        simple,
        simplicial,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaranyRow {
    pub k: i64,
    pub f_k: u64,
    pub at_least_min: bool,
    /// f_k ≥ f_0, checked for k ≤ ⌊d/2⌋
    pub at_least_vertices: Option<bool>,
    /// f_k ≥ f_{d-1}, checked for k ≥ ⌈d/2⌉ - 1
    pub at_least_facets: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaranyReport {
    pub min: u64,
    pub rows: Vec<BaranyRow>,
    pub holds: bool,
}

pub fn barany_check(fv: &FVector) -> BaranyReport {
    let d = fv.dim;
    let (f0, ffacets) = (fv.f(0), fv.f(d - 1));
    let min = f0.min(ffacets);
    let rows: Vec<BaranyRow> = (0..d)
        .map(|k| {
            let f = fv.f(k);
            BaranyRow {
                k,
                f_k: f,
                at_least_min: f >= min,
                at_least_vertices: (k <= d / 2).then_some(f >= f0),
                at_least_facets: (k >= (d + 1) / 2 - 1).then_some(f >= ffacets),
            }
        })
        .collect();
    let holds = rows.iter().all(|r| {
        r.at_least_min && r.at_least_vertices.unwrap_or(true) && r.at_least_facets.unwrap_or(true)
    });
    BaranyReport { min, rows, holds }
}

/// C(d+1,k+1) + C(d,k+1) - C(d+1-s,k+1), for a d-polytope with d+s ≤ 2d vertices.
pub fn xue_bound(d: i64, s: i64, k: i64) -> Result<u64> {
    if s < 1 || s > d {
        return Err(PolyError::OutOfRange(format!("xue bound needs 1 <= s <= d, got s={s}, d={d}")));
    }
    if k < 0 || k >= d {
        return Err(PolyError::OutOfRange(format!("xue bound needs 0 <= k < d, got k={k}")));
    }
    let (d, s, k) = (d as u64, s as u64, k as u64);
    Ok(binom(d + 1, k + 1) + binom(d, k + 1) - binom(d + 1 - s, k + 1))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct XueReport {
    pub applicable: bool,
    pub s: i64,
    /// `(k, f_k, bound, f_k >= bound)`
    pub rows: Vec<(i64, u64, u64, bool)>,
    pub holds: bool,
}

pub fn xue_check(fv: &FVector) -> Result<XueReport> {
    let d = fv.dim;
    let s = fv.f(0) as i64 - d;
    if s > d {
        return Ok(XueReport { applicable: false, s, rows: Vec::new(), holds: true });
    }
    let mut rows = Vec::new();
    for k in 0..d {
        let bound = xue_bound(d, s, k)?;
        rows.push((k, fv.f(k), bound, fv.f(k) >= bound));
    }
    let holds = rows.iter().all(|r| r.3);
    Ok(XueReport { applicable: true, s, rows, holds })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    Less,
    LessEq,
    Greater,
    GreaterEq,
}

impl Relation {
    fn holds(self, a: u64, b: u64) -> bool {
        match self {
            Relation::Less => a < b,
            Relation::LessEq => a <= b,
            Relation::Greater => a > b,
            Relation::GreaterEq => a >= b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    pub class: &'static str,
    pub i: i64,
    pub relation: Relation,
    pub j: i64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BjornerReport {
    pub applicable: bool,
    pub links: Vec<ChainLink>,
    pub holds: bool,
}

/// Björner's partial unimodality chains. Simplicial: f_0 < … < f_{⌊d/2⌋-1} ≤
/// f_{⌊d/2⌋} and f_{⌊3(d-1)/4⌋} > … > f_{d-1}. Simple: f_0 < … < f_{⌈(d-1)/4⌉}
/// and f_{⌈d/2⌉-1} ≥ f_{⌈d/2⌉} > … > f_{d-1}. Only meaningful for d ≥ 3;
/// polygons have f_0 = f_1.
pub fn bjorner_check(fv: &FVector, simple: bool, simplicial: bool) -> BjornerReport {
    let d = fv.dim;
    if d < 3 || !(simple || simplicial) {
        return BjornerReport { applicable: false, links: Vec::new(), holds: true };
    }
    let mut links = Vec::new();
    let mut link = |class: &'static str, i: i64, relation: Relation| {
        links.push(ChainLink {
            class,
            i,
            relation,
            j: i + 1,
            holds: relation.holds(fv.f(i), fv.f(i + 1)),
        });
    };
    if simplicial {
        let a = d / 2 - 1;
        for i in 0..a {
            link("simplicial", i, Relation::Less);
        }
        link("simplicial", a, Relation::LessEq);
        for i in (3 * (d - 1)) / 4..d - 1 {
            link("simplicial", i, Relation::Greater);
        }
    }
    if simple {
        let c = (d - 1 + 3) / 4;
        for i in 0..c.min(d - 1) {
            link("simple", i, Relation::Less);
        }
        let e = (d + 1) / 2 - 1;
        if e < d - 1 {
            link("simple", e, Relation::GreaterEq);
        }
        for i in e + 1..d - 1 {
            link("simple", i, Relation::Greater);
        }
    }
    let holds = links.iter().all(|l| l.holds);
    BjornerReport { applicable: true, links, holds }
}

/// `true` when ρ(d,k) is zero, i.e. the bound against f_0 is vacuous.
pub fn rho_vanishes(d: i64, k: i64) -> bool {
    rho(d, k).map(|r| r.is_zero()).unwrap_or(false)
}
