//! Censuses of y² = f(x) with f monic squarefree of degree 2g+1, and the
//! JSON-lines cache.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{monic_count, monic_from_index, FqPoly, GaloisField};
use crate::hyperelliptic::{HyperellipticCurve, LPolynomial};
use crate::prank::{curve_newton_polygon, p_rank, Classification, NewtonPolygon};
use crate::rng;

use super::report::SCHEMA;

/// Largest number of polynomials an exhaustive census will enumerate.
pub const DEFAULT_CENSUS_BUDGET: u64 = 20_000_000;
const BATCH: u64 = 4096;
const SAMPLE_CHUNKS: u64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub p: u32,
    pub n: u32,
    /// Packed coefficients of f, constant term first.
    pub f: Vec<u32>,
    pub genus: usize,
    pub point_counts: Vec<u64>,
    #[serde(with = "crate::serde_util::bigint_vec")]
    pub l_poly: Vec<BigInt>,
    pub p_rank: usize,
    pub newton_polygon: NewtonPolygon,
    pub classification: Classification,
    #[serde(with = "crate::serde_util::bigint")]
    pub picard_order: BigInt,
}

impl CensusRecord {
    /// Computes every invariant of the curve; fails if the Hasse–Witt p-rank
    /// and the slope-0 length of the Newton polygon disagree.
    pub fn from_curve(curve: &HyperellipticCurve) -> Result<Self> {
        let k = curve.field();
        let point_counts = curve.point_counts()?;
        let l = LPolynomial::from_point_counts(curve.q(), curve.genus(), &point_counts)?;
        let np = curve_newton_polygon(curve, &l)?;
        let rank = p_rank(curve);
        if rank != np.slope_zero_length() {
            return Err(Error::Inconsistent(format!(
                "p-rank {rank} but slope-0 length {} for f = {:?}",
                np.slope_zero_length(),
                curve.f().values()
            )));
        }
        Ok(CensusRecord {
            p: k.characteristic(),
            n: k.degree(),
            f: curve.f().values(),
            genus: curve.genus(),
            point_counts,
            picard_order: l.picard_order(),
            l_poly: l.coeffs,
            p_rank: rank,
            classification: np.classify(),
            newton_polygon: np,
        })
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.n)
    }

    pub fn l_polynomial(&self) -> LPolynomial {
        LPolynomial { q: self.q(), genus: self.genus, coeffs: self.l_poly.clone() }
    }

    pub fn curve(&self) -> Result<HyperellipticCurve> {
        let k = GaloisField::new(self.p, self.n)?;
        HyperellipticCurve::new(FqPoly::from_values(&k, &self.f)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CensusMode {
    Exhaustive,
    /// Uniform with replacement over squarefree monic f, by rejection.
    Sample { samples: u64, seed: u64 },
}

/// Census of genus-g curves y² = f(x), deg f = 2g+1, over `field`.
pub fn census(g: usize, field: &GaloisField, mode: CensusMode) -> Result<Vec<CensusRecord>> {
    census_with_budget(g, field, mode, DEFAULT_CENSUS_BUDGET)
}

pub fn census_with_budget(g: usize, field: &GaloisField, mode: CensusMode, budget: u64) -> Result<Vec<CensusRecord>> {
    if g == 0 {
        return Err(Error::InvalidInput("genus must be positive".into()));
    }
    let d = 2 * g + 1;
    let total = monic_count(field, d);
    match mode {
        CensusMode::Exhaustive => {
            let total = match total {
                Some(t) if t <= budget => t,
                _ => {
                    return Err(Error::BudgetExceeded {
                        what: format!("exhaustive census of degree-{d} polynomials over F_{}", field.order()),
                        needed: (field.order() as u128).saturating_pow(d as u32),
                        cap: budget as u128,
                    })
                }
            };
            let batches: Vec<Vec<CensusRecord>> = (0..total.div_ceil(BATCH))
                .into_par_iter()
                .map(|b| {
                    let mut out = Vec::new();
                    for i in b * BATCH..((b + 1) * BATCH).min(total) {
                        let f = monic_from_index(field, d, i);
                        if f.squarefree()? {
                            out.push(CensusRecord::from_curve(&HyperellipticCurve::new(f)?)?);
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            Ok(batches.into_iter().flatten().collect())
        }
        CensusMode::Sample { samples, seed } => {
            let total = total.ok_or_else(|| Error::InvalidInput("field too large to sample".into()))?;
            let chunks: Vec<Vec<CensusRecord>> = rng::chunks(samples, SAMPLE_CHUNKS)
                .into_par_iter()
                .map(|(i, k)| {
                    let mut r = rng::substream(seed, i);
                    let mut out = Vec::with_capacity(k as usize);
                    while (out.len() as u64) < k {
                        let f = monic_from_index(field, d, r.gen_range(0..total));
                        if f.squarefree()? {
                            out.push(CensusRecord::from_curve(&HyperellipticCurve::new(f)?)?);
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            Ok(chunks.into_iter().flatten().collect())
        }
    }
}

pub fn cache_file_name(p: u32, n: u32, g: usize) -> String {
    format!("census_p{p}_n{n}_g{g}.jsonl")
}

#[derive(Serialize)]
struct LineOut<'a> {
    schema: &'static str,
    #[serde(flatten)]
    record: &'a CensusRecord,
}

#[derive(Deserialize)]
struct LineIn {
    schema: String,
    #[serde(flatten)]
    record: CensusRecord,
}

/// One record per line, each tagged with the schema version.
pub fn write_jsonl(path: &Path, records: &[CensusRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut w, &LineOut { schema: SCHEMA, record })?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<CensusRecord>> {
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| !l.as_ref().is_ok_and(|s| s.trim().is_empty()))
        .map(|l| {
            let line: LineIn = serde_json::from_str(&l?)?;
            if line.schema != SCHEMA {
                return Err(Error::InvalidInput(format!(
                    "{}: schema {:?}, expected {SCHEMA:?}",
                    path.display(),
                    line.schema
                )));
            }
            Ok(line.record)
        })
        .collect()
}

/// Exhaustive census, read from `dir` when cached and written there
/// otherwise.
pub fn cached_census(dir: &Path, g: usize, field: &GaloisField) -> Result<Vec<CensusRecord>> {
    let path: PathBuf = dir.join(cache_file_name(field.characteristic(), field.degree(), g));
    if path.exists() {
        return read_jsonl(&path);
    }
    let records = census(g, field, CensusMode::Exhaustive)?;
    std::fs::create_dir_all(dir)?;
    let tmp = path.with_extension("jsonl.tmp");
    write_jsonl(&tmp, &records)?;
    std::fs::rename(&tmp, &path)?;
    Ok(records)
}

/// Counts per p-rank with the codimension diagnostic r_f = count(f−1)/count(f).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PRankDistribution {
    pub genus: usize,
    pub q: u64,
    pub total: u64,
    pub counts: Vec<u64>,
    pub ratios: Vec<RatioCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCheck {
    pub f: usize,
    pub ratio: Option<f64>,
    pub low: f64,
    pub high: f64,
    pub pass: bool,
}

impl PRankDistribution {
    pub fn all_strata_nonempty(&self) -> bool {
        self.counts.iter().all(|&c| c > 0)
    }

    pub fn ratios_pass(&self) -> bool {
        self.ratios.iter().all(|r| r.pass)
    }
}

/// Default slack c in the window [1/(cq), c/q].
pub const DEFAULT_RATIO_SLACK: f64 = 5.0;

pub fn prank_distribution(records: &[CensusRecord], c: f64) -> Result<PRankDistribution> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidInput("empty census".into()))?;
    let (g, q) = (first.genus, first.q());
    let mut counts = vec![0u64; g + 1];
    for r in records {
        if (r.genus, r.q()) != (g, q) {
            return Err(Error::InvalidInput("census mixes genera or fields".into()));
        }
        counts[r.p_rank] += 1;
    }
    let (low, high) = (1.0 / (c * q as f64), c / q as f64);
    let ratios = (1..=g)
        .map(|f| {
            let ratio = (counts[f] > 0).then(|| counts[f - 1] as f64 / counts[f] as f64);
            RatioCheck {
                f,
                ratio,
                low,
                high,
                pass: ratio.is_some_and(|r| (low..=high).contains(&r)),
            }
        })
        .collect();
    Ok(PRankDistribution { genus: g, q, total: records.len() as u64, counts, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_counts() {
        let k3 = GaloisField::prime(3).unwrap();
        assert_eq!(census(1, &k3, CensusMode::Exhaustive).unwrap().len(), 18);
        assert_eq!(census(2, &k3, CensusMode::Exhaustive).unwrap().len(), 162);
        let k9 = GaloisField::new(3, 2).unwrap();
        assert_eq!(census(1, &k9, CensusMode::Exhaustive).unwrap().len(), 729 - 81);
    }

    #[test]
    fn records_match_curve_computations() {
        let k5 = GaloisField::prime(5).unwrap();
        for r in census(2, &k5, CensusMode::Exhaustive).unwrap().iter().step_by(97) {
            let c = r.curve().unwrap();
            assert_eq!(r.point_counts, c.point_counts().unwrap());
            assert_eq!(r.p_rank, p_rank(&c));
            assert_eq!(r.picard_order, r.l_polynomial().picard_order());
            assert_eq!(r.p_rank, r.newton_polygon.slope_zero_length());
        }
    }

    #[test]
    fn sampling_is_deterministic_and_squarefree() {
        let k7 = GaloisField::prime(7).unwrap();
        let mode = CensusMode::Sample { samples: 300, seed: 11 };
        let a = census(2, &k7, mode).unwrap();
        assert_eq!(a.len(), 300);
        assert_eq!(a, census(2, &k7, mode).unwrap());
        let b = census(2, &k7, CensusMode::Sample { samples: 300, seed: 12 }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn budget_is_enforced() {
        let k7 = GaloisField::prime(7).unwrap();
        let r = census_with_budget(3, &k7, CensusMode::Exhaustive, 1000);
        assert!(matches!(r, Err(e) if e.is_budget()));
    }

    #[test]
    fn jsonl_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let k3 = GaloisField::prime(3).unwrap();
        let recs = census(2, &k3, CensusMode::Exhaustive).unwrap();
        let a = dir.path().join("a.jsonl");
        write_jsonl(&a, &recs).unwrap();
        let back = read_jsonl(&a).unwrap();
        assert_eq!(back, recs);
        let b = dir.path().join("b.jsonl");
        write_jsonl(&b, &back).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        let cached = cached_census(dir.path(), 2, &k3).unwrap();
        assert!(dir.path().join("census_p3_n1_g2.jsonl").exists());
        assert_eq!(cached_census(dir.path(), 2, &k3).unwrap(), cached);
    }

    #[test]
    fn distribution_counts_sum() {
        let k5 = GaloisField::prime(5).unwrap();
        let recs = census(1, &k5, CensusMode::Exhaustive).unwrap();
        let d = prank_distribution(&recs, DEFAULT_RATIO_SLACK).unwrap();
        assert_eq!(d.counts.iter().sum::<u64>(), d.total);
        assert!(d.all_strata_nonempty());
        assert!(prank_distribution(&[], 5.0).is_err());
    }
}
