//! Census-driven experiments: stratum statistics, p-rank-0 witnesses,
//! ℓ-divisibility of class numbers, splitting fields, absolute simplicity
//! and Frobenius equidistribution.

mod census;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use serde_json::json;

pub use census::{
    cache_file_name, cached_census, census, census_with_budget, prank_distribution, read_jsonl, write_jsonl,
    CensusMode, CensusRecord, PRankDistribution, RatioCheck, DEFAULT_CENSUS_BUDGET, DEFAULT_RATIO_SLACK,
};
pub use report::{Comparison, ExperimentReport, Relation, SCHEMA};

use crate::error::{Error, Result};
use crate::ff::GaloisField;
use crate::prank::{Classification, Slope};
use crate::symplectic::{
    charpoly_distribution, charpoly_mod, fixed_vector_proportion, sp_order, tv_distance, Mode, Proportion,
};
use crate::weil::{absolute_simplicity, splitting_degree, SplittingDegree};

struct Params {
    g: usize,
    p: u32,
    n: u32,
    q: u64,
}

fn params(records: &[CensusRecord]) -> Result<Params> {
    let r = records
        .first()
        .ok_or_else(|| Error::InvalidInput("empty census".into()))?;
    if records.iter().any(|x| (x.genus, x.p, x.n) != (r.genus, r.p, r.n)) {
        return Err(Error::InvalidInput("census mixes genera or fields".into()));
    }
    Ok(Params { g: r.genus, p: r.p, n: r.n, q: r.q() })
}

fn stratum(records: &[CensusRecord], f: usize) -> Result<Vec<&CensusRecord>> {
    let s: Vec<&CensusRecord> = records.iter().filter(|r| r.p_rank == f).collect();
    if s.is_empty() {
        return Err(Error::EmptyStratum(format!("no records with p-rank {f}")));
    }
    Ok(s)
}

fn check_ell(l: u64, p: u32) -> Result<()> {
    if l % p as u64 == 0 {
        return Err(Error::InvalidInput(format!("ℓ = {l} equals the characteristic")));
    }
    Ok(())
}

fn provenance(g: usize, l: u64, m: u64, mode: Mode, p: &Proportion) -> String {
    match (mode, p) {
        (_, Proportion::Estimate { ci_low, ci_high, samples, .. }) => {
            let seed = match mode {
                Mode::MonteCarlo { seed, .. } => seed,
                Mode::Exact { .. } => 0,
            };
            format!("Monte Carlo over GSp_{}(Z/{l}) multiplier {m}, N = {samples}, seed {seed}, 95% CI [{ci_low:.4}, {ci_high:.4}]", 2 * g)
        }
        (_, Proportion::Exact { .. }) => format!(
            "exact enumeration of Sp_{}(Z/{l})·D_{m} ({} elements)",
            2 * g,
            sp_order(g as u32, l)
        ),
    }
}

fn elapsed(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

/// Counts by p-rank, stratum nonemptiness and codimension ratios.
pub fn distribution_report(records: &[CensusRecord], c: f64) -> Result<ExperimentReport> {
    let t = Instant::now();
    let d = prank_distribution(records, c)?;
    let mut rep = ExperimentReport::new("distribution", json!({"g": d.genus, "q": d.q, "c": c}));
    rep.sample_sizes.insert("census".into(), d.total);
    rep.observed = serde_json::to_value(&d)?;
    let nonempty = d.counts.iter().filter(|&&x| x > 0).count();
    rep.comparisons.push(Comparison::new(
        "nonempty p-rank strata",
        nonempty as f64,
        (d.genus + 1) as f64,
        "every p-rank 0..g",
        Relation::AtLeast,
        0.0,
    ));
    for r in &d.ratios {
        rep.comparisons.push(Comparison::new(
            format!("count(f={})/count(f={})", r.f - 1, r.f),
            r.ratio.unwrap_or(-1.0),
            1.0 / d.q as f64,
            format!("one unit of codimension, window [1/({c}q), {c}/q]"),
            Relation::Between { low: r.low, high: r.high },
            0.0,
        ));
    }
    rep.runtime_ms = elapsed(t);
    Ok(rep)
}

/// Parameters of [`class_group_experiment`].
#[derive(Clone, Copy, Debug)]
pub struct ClassGroupOptions {
    /// Defaults to max(0.08, 3/√(q·stratum size)).
    pub tolerance: Option<f64>,
    pub baseline: Mode,
}

impl Default for ClassGroupOptions {
    fn default() -> Self {
        ClassGroupOptions { tolerance: None, baseline: Mode::exact() }
    }
}

/// Among records of p-rank f, the proportion with ℓ | #Pic⁰, against the
/// fixed-vector proportion of the multiplier-(q mod ℓ) coset.
pub fn class_group_experiment(
    records: &[CensusRecord],
    f: usize,
    l: u64,
    opts: ClassGroupOptions,
) -> Result<ExperimentReport> {
    let t = Instant::now();
    let pr = params(records)?;
    check_ell(l, pr.p)?;
    let s = stratum(records, f)?;
    let lb = BigInt::from(l);
    let hits = s.iter().filter(|r| r.picard_order.is_multiple_of(&lb)).count() as u64;
    let count = s.len() as u64;
    let empirical = hits as f64 / count as f64;
    let m = pr.q % l;
    let base = fixed_vector_proportion(pr.g, l, m, opts.baseline)?;
    let tol = opts
        .tolerance
        .unwrap_or_else(|| 0.08f64.max(3.0 / ((pr.q * count) as f64).sqrt()));
    let mut rep = ExperimentReport::new(
        "class-group",
        json!({"g": pr.g, "f": f, "p": pr.p, "n": pr.n, "q": pr.q, "l": l, "m": m}),
    );
    rep.sample_sizes.insert("census".into(), records.len() as u64);
    rep.sample_sizes.insert("stratum".into(), count);
    rep.observed = json!({
        "divisible": hits,
        "stratum": count,
        "empirical": empirical,
        "empirical_exact": [Ratio::new(hits, count).numer(), Ratio::new(hits, count).denom()],
        "baseline": base,
    });
    rep.comparisons.push(Comparison::new(
        "proportion with l | #Pic0",
        empirical,
        base.value(),
        provenance(pr.g, l, m, opts.baseline, &base),
        Relation::AbsDiffAtMost,
        tol,
    ));
    if let Mode::MonteCarlo { seed, .. } = opts.baseline {
        rep.seed = Some(seed);
    }
    rep.notes.push(
        "counting unit is the monic squarefree equation; convergence of equation-level proportions to moduli-point proportions is assumed, not proved".into(),
    );
    rep.runtime_ms = elapsed(t);
    Ok(rep)
}

/// Splitting-field degrees of L over Q across the p-rank-f stratum.
pub fn splitting_field_experiment(records: &[CensusRecord], f: usize) -> Result<ExperimentReport> {
    let t = Instant::now();
    let pr = params(records)?;
    if pr.g > 3 {
        return Err(Error::InvalidInput(format!("splitting fields unsupported for genus {}", pr.g)));
    }
    let s = stratum(records, f)?;
    let degrees: Vec<SplittingDegree> = s
        .par_iter()
        .map(|r| splitting_degree(&r.l_polynomial()))
        .collect::<Result<_>>()?;
    let maximal = crate::symplectic::weyl_order(pr.g as u32) as u32;
    let mut histogram: BTreeMap<String, u64> = BTreeMap::new();
    for d in &degrees {
        let key = match d {
            SplittingDegree::Exact(k) => k.to_string(),
            SplittingDegree::CertifiedMaximal(k) => format!("{k} (certified)"),
            SplittingDegree::Reducible => "reducible".into(),
            SplittingDegree::Undetermined => "undetermined".into(),
        };
        *histogram.entry(key).or_default() += 1;
        if let Some(k) = d.degree() {
            if maximal % k != 0 {
                return Err(Error::Inconsistent(format!("degree {k} does not divide {maximal}")));
            }
        }
    }
    let is_max: Vec<bool> = degrees.iter().map(|d| d.is_maximal(pr.g as u32) == Some(true)).collect();
    let n_max = is_max.iter().filter(|&&b| b).count() as u64;
    let count = s.len() as u64;
    let frac = n_max as f64 / count as f64;
    let mut rep = ExperimentReport::new(
        "splitting",
        json!({"g": pr.g, "f": f, "p": pr.p, "n": pr.n, "q": pr.q, "maximal_degree": maximal}),
    );
    rep.sample_sizes.insert("stratum".into(), count);
    rep.observed = json!({"histogram": histogram, "maximal": n_max, "fraction_maximal": frac});
    rep.comparisons.push(Comparison::new(
        "fraction with maximal splitting degree",
        frac,
        0.5,
        "majority threshold",
        Relation::GreaterThan,
        0.0,
    ));
    rep.comparisons.push(Comparison::new(
        "maximal witnesses",
        n_max as f64,
        1.0,
        "existence",
        Relation::AtLeast,
        0.0,
    ));
    if let Some(i) = is_max.iter().position(|&b| b) {
        rep.witness = Some(json!({"record": s[i], "splitting_degree": degrees[i]}));
    }
    if pr.g == 3 {
        rep.notes.push(
            "genus 3: maximal only when certified by Frobenius cycle types; uncertified records are undetermined, not counted as maximal".into(),
        );
    }
    rep.runtime_ms = elapsed(t);
    Ok(rep)
}

/// First record of p-rank f whose Jacobian is certified absolutely simple.
pub fn absolutely_simple_search(records: &[CensusRecord], f: usize) -> Result<ExperimentReport> {
    let t = Instant::now();
    let pr = params(records)?;
    if pr.g <= 2 && f == 0 {
        return Err(Error::InvalidInput("p-rank 0 with g ≤ 2 is outside the search hypotheses".into()));
    }
    let s = stratum(records, f)?;
    let mut tried = 0u64;
    let mut found = None;
    for r in &s {
        tried += 1;
        let check = absolute_simplicity(&r.l_polynomial());
        if check.certified() {
            found = Some((r, check));
            break;
        }
    }
    let mut rep = ExperimentReport::new(
        "simple",
        json!({"g": pr.g, "f": f, "p": pr.p, "n": pr.n, "q": pr.q}),
    );
    rep.sample_sizes.insert("stratum".into(), s.len() as u64);
    rep.sample_sizes.insert("tried".into(), tried);
    rep.comparisons.push(Comparison::new(
        "certified witnesses",
        found.is_some() as u8 as f64,
        1.0,
        "existence",
        Relation::AtLeast,
        0.0,
    ));
    if let Some((r, check)) = found {
        rep.witness = Some(json!({"record": r, "check": check}));
    } else {
        rep.notes.push("no certified witness in this stratum; failure does not show absence".into());
    }
    rep.runtime_ms = elapsed(t);
    Ok(rep)
}

/// Parameters of [`chebotarev_experiment`].
#[derive(Clone, Copy, Debug)]
pub struct ChebotarevOptions {
    pub baseline: Mode,
    pub tolerance: f64,
    /// Threshold is enforced only for exhaustive censuses with at least this
    /// many stratum records.
    pub min_stratum: u64,
    pub exhaustive: bool,
}

impl Default for ChebotarevOptions {
    fn default() -> Self {
        ChebotarevOptions { baseline: Mode::exact(), tolerance: 0.10, min_stratum: 500, exhaustive: true }
    }
}

/// Empirical distribution of Frobenius characteristic polynomials mod ℓ
/// over the stratum against the multiplier-(q mod ℓ) coset.
pub fn chebotarev_experiment(
    records: &[CensusRecord],
    f: usize,
    l: u64,
    opts: ChebotarevOptions,
) -> Result<ExperimentReport> {
    let t = Instant::now();
    let pr = params(records)?;
    check_ell(l, pr.p)?;
    let s = stratum(records, f)?;
    let m = pr.q % l;
    let mut empirical: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for r in &s {
        *empirical.entry(charpoly_mod(&r.l_polynomial(), l)?).or_default() += 1;
    }
    let base = charpoly_distribution(pr.g, l, m, opts.baseline)?;
    let tv = tv_distance(&empirical, &base);
    let count = s.len() as u64;
    let eig1 = |p: &[u64]| p.iter().sum::<u64>() % l == 0;
    let empirical_eig1: u64 = empirical.iter().filter(|(p, _)| eig1(p)).map(|(_, c)| c).sum();
    let baseline_eig1: u64 = base.counts.iter().filter(|(p, _)| eig1(p)).map(|(_, c)| c).sum();
    let source = if base.exact {
        format!("exact enumeration of Sp_{}(Z/{l})·D_{m} ({} elements)", 2 * pr.g, base.total)
    } else {
        let seed = match opts.baseline {
            Mode::MonteCarlo { seed, .. } => seed,
            Mode::Exact { .. } => 0,
        };
        format!("Monte Carlo over the multiplier-{m} coset, N = {}, seed {seed}", base.total)
    };
    let mut rep = ExperimentReport::new(
        "chebotarev",
        json!({"g": pr.g, "f": f, "p": pr.p, "n": pr.n, "q": pr.q, "l": l, "m": m}),
    );
    rep.sample_sizes.insert("stratum".into(), count);
    rep.sample_sizes.insert("baseline".into(), base.total);
    let hist: Vec<_> = empirical
        .iter()
        .map(|(p, c)| json!({"charpoly": p, "count": c, "baseline": base.probability(p)}))
        .collect();
    rep.observed = json!({
        "tv_distance": tv,
        "classes_observed": empirical.len(),
        "classes_baseline": base.counts.len(),
        "eigenvalue_one_mass": empirical_eig1 as f64 / count as f64,
        "eigenvalue_one_count": empirical_eig1,
        "baseline_eigenvalue_one_mass": baseline_eig1 as f64 / base.total as f64,
        "histogram": hist,
    });
    let mut cmp = Comparison::new(
        "total variation distance",
        tv,
        0.0,
        source,
        Relation::AbsDiffAtMost,
        opts.tolerance,
    );
    if !(opts.exhaustive && count >= opts.min_stratum) {
        cmp = cmp.unenforced();
        rep.notes.push(format!(
            "threshold not enforced: stratum of {count} records{}",
            if opts.exhaustive { "" } else { " from a sampled census" }
        ));
    }
    rep.comparisons.push(cmp);
    if let Mode::MonteCarlo { seed, .. } = opts.baseline {
        rep.seed = Some(seed);
    }
    rep.runtime_ms = elapsed(t);
    Ok(rep)
}

/// Largest census run exhaustively by the witness search; bigger fields are
/// sampled.
pub const WITNESS_EXHAUSTIVE_LIMIT: u64 = 100_000;

/// First genus-g record over the listed fields with p-rank 0 whose Newton
/// polygon is not supersingular.
pub fn not_supersingular_witness(g: usize, fields: &[GaloisField], samples: u64, seed: u64) -> Result<ExperimentReport> {
    let t = Instant::now();
    let qs: Vec<u64> = fields.iter().map(|k| k.order() as u64).collect();
    let mut rep = ExperimentReport::new("notss", json!({"g": g, "q": qs, "samples": samples}));
    rep.seed = Some(seed);
    let mut found = None;
    for k in fields {
        let q = k.order() as u64;
        let exhaustive = q.checked_pow(2 * g as u32 + 1).is_some_and(|n| n <= WITNESS_EXHAUSTIVE_LIMIT);
        let mode = if exhaustive {
            CensusMode::Exhaustive
        } else {
            CensusMode::Sample { samples, seed }
        };
        let recs = census(g, k, mode)?;
        rep.sample_sizes.insert(format!("census_q{q}"), recs.len() as u64);
        let zero = recs.iter().filter(|r| r.p_rank == 0).count() as u64;
        rep.sample_sizes.insert(format!("prank0_q{q}"), zero);
        if let Some(r) = recs
            .into_iter()
            .find(|r| r.p_rank == 0 && r.classification != Classification::Supersingular)
        {
            found = Some((r, mode));
            break;
        }
    }
    rep.comparisons.push(Comparison::new(
        "non-supersingular p-rank 0 witnesses",
        found.is_some() as u8 as f64,
        1.0,
        "existence",
        Relation::AtLeast,
        0.0,
    ));
    if let Some((r, mode)) = found {
        let slopes: Vec<Slope> = r.newton_polygon.segments().iter().map(|s| s.slope).collect();
        let generic = slopes == [Slope::new(1, 3), Slope::new(2, 3)];
        if generic {
            rep.notes.push("witness polygon has slopes 1/3 and 2/3, the expected generic p-rank-0 polygon in genus 3".into());
        }
        rep.observed = json!({
            "q": r.q(),
            "census_mode": mode,
            "slopes_one_third_two_thirds": generic,
            "symmetric": r.newton_polygon.is_symmetric(),
        });
        rep.witness = Some(serde_json::to_value(&r)?);
    } else {
        rep.notes.push("search exhausted without a witness; this does not show absence".into());
    }
    rep.runtime_ms = elapsed(t);
    Ok(rep)
}

/// ℓ | L(1) ⟺ the reduction of P mod ℓ vanishes at 1.
pub fn divisible_iff_eigenvalue_one(r: &CensusRecord, l: u64) -> Result<bool> {
    let p = charpoly_mod(&r.l_polynomial(), l)?;
    let at_one = p.iter().sum::<u64>() % l == 0;
    let divisible = (&r.picard_order % BigInt::from(l)).is_zero();
    Ok(at_one == divisible)
}
