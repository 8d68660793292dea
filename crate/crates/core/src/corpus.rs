//! The reference corpus and the batch runner behind the `corpus` command.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::angles::{angle_sum, derive_seed, SamplingConfig};
use crate::bounds::{barany_check, bjorner_check, bound_report, rho, xue_check};
use crate::error::{PolyError, Result};
use crate::exact::scalar_to_f64;
use crate::generators::{generate, Family, FamilySpec};
use crate::lattice::face_lattice;
use crate::polytope::Polytope;
use crate::projection::{analyze, GeneralPosition, DEFAULT_RETRIES};

pub const RANDOM_ENTRIES: u64 = 20;

/// Seeded random-sphere hulls: dimension 2 + seed mod 3, between d + 2 and
/// 12 points.
pub fn random_corpus() -> Vec<FamilySpec> {
    (0..RANDOM_ENTRIES)
        .map(|seed| {
            let d = 2 + (seed % 3) as usize;
            let n = d + 2 + (seed / 3) as usize % (11 - d);
            FamilySpec::new(Family::RandomSphere, d).with_n(n).with_seed(seed)
        })
        .collect()
}

/// Cyclic polytopes get `n = d + 2` and `n = d + 3`; random-sphere entries
/// come from [`random_corpus`] restricted to `dims`.
pub fn family_corpus(families: &[Family], dims: RangeInclusive<usize>) -> Vec<FamilySpec> {
    let mut out = Vec::new();
    for &family in families {
        match family {
            Family::RandomSphere => {
                out.extend(random_corpus().into_iter().filter(|s| dims.contains(&s.dim)))
            }
            Family::Cyclic => {
                for d in dims.clone() {
                    out.push(FamilySpec::new(family, d).with_n(d + 2));
                    out.push(FamilySpec::new(family, d).with_n(d + 3));
                }
            }
            _ => out.extend(dims.clone().map(|d| FamilySpec::new(family, d))),
        }
    }
    out.sort();
    out
}

/// Every family in dimensions 2..=6 plus the random hulls.
pub fn default_corpus() -> Vec<FamilySpec> {
    family_corpus(&Family::ALL, 2..=6)
}

pub fn label(spec: &FamilySpec) -> String {
    match spec.family {
        Family::RandomSphere => format!("{}:s{}", spec.family, spec.seed),
        f => f.to_string(),
    }
}

pub fn build(specs: &[FamilySpec]) -> Vec<(FamilySpec, Result<Polytope>)> {
    specs.par_iter().map(|s| (*s, generate(s))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorpusOptions {
    /// Sampled projection directions per entry; 0 skips the projection checks.
    pub directions: usize,
    /// Samples per solid angle for the angle-sum check on entries of
    /// dimension at most [`CorpusOptions::max_angle_dim`]; 0 skips it.
    pub samples: u64,
    pub max_angle_dim: usize,
    pub seed: u64,
    pub sigma: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions { directions: 20, samples: 0, max_angle_dim: 3, seed: 0, sigma: 4.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusRow {
    pub family: String,
    pub dim: usize,
    pub n: usize,
    pub k: i64,
    pub f_k: u64,
    pub ratio_vertices: String,
    pub rho_vertices: String,
    pub ratio_facets: String,
    pub rho_facets: String,
    pub equality_flags: String,
    pub verdicts: String,
}

impl CorpusRow {
    pub fn failed(&self) -> bool {
        self.verdicts.contains("=fail")
    }
}

pub const CSV_HEADER: &str =
    "family,dim,n,k,f_k,ratio_vertices,rho_vertices,ratio_facets,rho_facets,equality_flags,verdicts";

pub fn to_csv(rows: &[CorpusRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.dim,
            r.n,
            r.k,
            r.f_k,
            r.ratio_vertices,
            r.rho_vertices,
            r.ratio_facets,
            r.rho_facets,
            r.equality_flags,
            r.verdicts
        ));
    }
    out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusOutcome {
    pub rows: Vec<CorpusRow>,
    /// Entries that could not be built or analysed, with the error text.
    pub errors: Vec<String>,
}

impl CorpusOutcome {
    pub fn ok(&self) -> bool {
        self.errors.is_empty() && !self.rows.iter().any(CorpusRow::failed)
    }
}

fn word(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn entry_seed(base: u64, spec: &FamilySpec) -> u64 {
    let family = Family::ALL.iter().position(|f| *f == spec.family).unwrap_or(0) as u64;
    [family, spec.dim as u64, spec.n.unwrap_or(0) as u64, spec.seed]
        .iter()
        .fold(base, |s, &t| derive_seed(s, t))
}

fn run_entry(spec: &FamilySpec, opts: &CorpusOptions) -> Result<Vec<CorpusRow>> {
    let p = generate(spec)?;
    let lattice = face_lattice(&p)?;
    let fv = lattice.f_vector()?;
    let d = fv.dim;
    let report = bound_report(&fv, p.is_simple(), p.is_simplicial())?;
    let barany = barany_check(&fv);
    let xue = xue_check(&fv)?;
    let bjorner = bjorner_check(&fv, p.is_simple(), p.is_simplicial());
    let seed = entry_seed(opts.seed, spec);

    // per-k gap verdicts and a polytope-wide lemma verdict
    let mut gap: Option<Vec<bool>> = None;
    let mut lemma = "skip";
    if opts.directions > 0 && d >= 2 {
        match GeneralPosition::new(&p) {
            Ok(gp) => {
                let mut gap_ok = vec![true; d as usize];
                let mut lemma_ok = true;
                for i in 0..opts.directions {
                    let dir = gp.sample(derive_seed(seed, i as u64), DEFAULT_RETRIES)?;
                    let a = analyze(&p, &lattice, &dir)?;
                    lemma_ok &= a.lemma_holds() && a.boundary_bijective;
                    for k in 0..d {
                        gap_ok[k as usize] &= a.gap(&fv, k)?.holds;
                    }
                }
                gap = Some(gap_ok);
                lemma = word(lemma_ok);
            }
            Err(PolyError::TooLarge(_)) => {}
            Err(e) => return Err(e),
        }
    }

    let mut prop: Option<Vec<bool>> = None;
    if opts.samples > 0 && p.dim <= opts.max_angle_dim {
        let cfg = SamplingConfig { samples: opts.samples, seed, sigma: opts.sigma };
        prop = Some(
            (0..d)
                .map(|k| {
                    let s = angle_sum(&p, k, &derive_seed_cfg(&cfg, k))?;
                    let bound = scalar_to_f64(&rho(d + 1, d - k)?);
                    Ok(s.sum >= bound - opts.sigma * s.stderr - 1e-12)
                })
                .collect::<Result<Vec<_>>>()?,
        );
    }

    let n = spec.n.unwrap_or(p.vertex_count());
    Ok(report
        .rows
        .iter()
        .map(|r| {
            let b = &barany.rows[r.k as usize];
            let barany_ok = b.at_least_min && b.at_least_vertices.unwrap_or(true) && b.at_least_facets.unwrap_or(true);
            let xue_word = if xue.applicable { word(xue.rows[r.k as usize].3) } else { "na" };
            let bjorner_word = if bjorner.applicable { word(bjorner.holds) } else { "na" };
            let gap_word = gap.as_ref().map_or("skip", |g| word(g[r.k as usize]));
            let prop_word = prop.as_ref().map_or("skip", |g| word(g[r.k as usize]));
            CorpusRow {
                family: label(spec),
                dim: p.dim,
                n,
                k: r.k,
                f_k: r.f_k,
                ratio_vertices: r.ratio_vertices.to_string(),
                rho_vertices: r.rho_vertices.to_string(),
                ratio_facets: r.ratio_facets.to_string(),
                rho_facets: r.rho_facets.to_string(),
                equality_flags: r.equality_flags(),
                verdicts: format!(
                    "bounds={};barany={};xue={xue_word};bjorner={bjorner_word};gap={gap_word};lemma={lemma};prop={prop_word}",
                    word(r.consistent()),
                    word(barany_ok),
                ),
            }
        })
        .collect())
}

fn derive_seed_cfg(cfg: &SamplingConfig, k: i64) -> SamplingConfig {
    cfg.with_seed(derive_seed(cfg.seed, k as u64))
}

/// Runs every entry (in parallel) and returns rows sorted by entry, then k.
pub fn run_corpus(specs: &[FamilySpec], opts: &CorpusOptions) -> CorpusOutcome {
    let mut specs = specs.to_vec();
    specs.sort();
    specs.dedup();
    let results: Vec<(FamilySpec, Result<Vec<CorpusRow>>)> =
        specs.par_iter().map(|s| (*s, run_entry(s, opts))).collect();
    let mut out = CorpusOutcome::default();
    for (spec, r) in results {
        match r {
            Ok(rows) => out.rows.extend(rows),
            Err(e) => out.errors.push(format!("{} dim {}: {e}", label(&spec), spec.dim)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let c = default_corpus();
        assert_eq!(c.len(), 35 + 20);
        let random: Vec<_> = c.iter().filter(|s| s.family == Family::RandomSphere).collect();
        assert!(random.iter().all(|s| s.dim <= 4 && s.n.unwrap() <= 12 && s.n.unwrap() > s.dim + 1));
        assert_eq!(family_corpus(&[Family::Cyclic], 3..=3).len(), 2);
    }

    #[test]
    fn small_run_is_clean_and_sorted() {
        let specs = family_corpus(&[Family::Cube, Family::Simplex], 2..=3);
        let opts = CorpusOptions { directions: 2, samples: 2_000, ..Default::default() };
        let out = run_corpus(&specs, &opts);
        assert!(out.ok(), "{:?}", out);
        assert_eq!(out.rows.len(), 2 + 3 + 2 + 3);
        assert_eq!(out.rows[0].family, "simplex");
        let csv = to_csv(&out.rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.contains("cube,3,8,1,12,3/2,3/2,2,3/2,v,"));
    }
}
