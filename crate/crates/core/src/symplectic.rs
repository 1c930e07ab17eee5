//! Linear algebra over Z/ℓ for Sp_{2g} and GSp_{2g}: multipliers, group
//! orders, sampling, and the fixed-vector and characteristic-polynomial
//! statistics used as equidistribution baselines.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive};
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::zp::{inv_mod, is_prime, pow_mod};
use crate::hyperelliptic::LPolynomial;
use crate::rng::{self, Rng};

/// Default number of transvections multiplied by [`random_sp`].
pub const DEFAULT_WALK: usize = 50;
/// Largest group enumerated exactly unless the caller says otherwise.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;
const MC_CHUNKS: u64 = 64;

fn check_ell(l: u64) -> Result<()> {
    if l == 2 || !is_prime(l) {
        return Err(Error::InvalidInput(format!("ℓ = {l} is not an odd prime")));
    }
    Ok(())
}

/// Square matrix over Z/ℓ, row-major, entries in [0, ℓ).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModlMatrix {
    l: u64,
    n: usize,
    data: Vec<u64>,
}

impl fmt::Debug for ModlMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[u64]> = self.data.chunks(self.n).collect();
        write!(f, "ModlMatrix(mod {}, {:?})", self.l, rows)
    }
}

impl ModlMatrix {
    pub fn new(l: u64, rows: Vec<Vec<u64>>) -> Result<Self> {
        check_ell(l)?;
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
        }
        let data: Vec<u64> = rows.concat();
        if data.iter().any(|&x| x >= l) {
            return Err(Error::InvalidInput(format!("entries must lie in [0, {l})")));
        }
        Ok(ModlMatrix { l, n, data })
    }

    /// Reduces arbitrary integers mod ℓ.
    pub fn from_ints(l: u64, rows: &[Vec<i64>]) -> Result<Self> {
        let li = l as i64;
        Self::new(
            l,
            rows.iter()
                .map(|r| r.iter().map(|&x| x.rem_euclid(li) as u64).collect())
                .collect(),
        )
    }

    pub fn identity(l: u64, n: usize) -> Self {
        Self::scalar(l, n, 1)
    }

    pub fn scalar(l: u64, n: usize, c: u64) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = c % l;
        }
        ModlMatrix { l, n, data }
    }

    pub fn diagonal(l: u64, diag: &[u64]) -> Self {
        let n = diag.len();
        let mut data = vec![0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d % l;
        }
        ModlMatrix { l, n, data }
    }

    pub fn modulus(&self) -> u64 {
        self.l
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.n).map(<[u64]>::to_vec).collect()
    }

    pub fn mul(&self, other: &ModlMatrix) -> ModlMatrix {
        assert_eq!((self.l, self.n), (other.l, other.n));
        let (n, l) = (self.n, self.l);
        let mut data = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
            for x in &mut data[i * n..(i + 1) * n] {
                *x %= l;
            }
        }
        ModlMatrix { l, n, data }
    }

    pub fn transpose(&self) -> ModlMatrix {
        let n = self.n;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        ModlMatrix { l: self.l, n, data }
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum::<u64>() % self.l)
            .collect()
    }

    pub fn det(&self) -> u64 {
        let (n, l) = (self.n, self.l);
        let mut a = self.data.clone();
        let mut det = 1u64;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| a[r * n + c] != 0) else {
                return 0;
            };
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                det = (l - det) % l;
            }
            let piv = a[c * n + c];
            det = det * piv % l;
            let inv = inv_mod(piv, l);
            for r in c + 1..n {
                let f = a[r * n + c] * inv % l;
                if f == 0 {
                    continue;
                }
                for j in c..n {
                    a[r * n + j] = (a[r * n + j] + (l - f) * a[c * n + j]) % l;
                }
            }
        }
        det
    }

    /// True iff some nonzero vector is fixed, i.e. det(M − I) = 0.
    pub fn has_fixed_vector(&self) -> bool {
        let mut d = self.clone();
        for i in 0..self.n {
            let x = &mut d.data[i * self.n + i];
            *x = (*x + self.l - 1) % self.l;
        }
        d.det() == 0
    }

    /// Characteristic polynomial det(T·I − M), coefficients low to high,
    /// via reduction to Hessenberg form.
    pub fn charpoly(&self) -> Vec<u64> {
        let (n, l) = (self.n, self.l);
        let mut h = self.data.clone();
        let at = |i: usize, j: usize| i * n + j;
        for j in 0..n.saturating_sub(2) {
            let Some(p) = (j + 1..n).find(|&i| h[at(i, j)] != 0) else {
                continue;
            };
            if p != j + 1 {
                for k in 0..n {
                    h.swap(at(p, k), at(j + 1, k));
                }
                for k in 0..n {
                    h.swap(at(k, p), at(k, j + 1));
                }
            }
            let inv = inv_mod(h[at(j + 1, j)], l);
            for i in j + 2..n {
                let u = h[at(i, j)] * inv % l;
                if u == 0 {
                    continue;
                }
                for k in 0..n {
                    h[at(i, k)] = (h[at(i, k)] + (l - u) * h[at(j + 1, k)]) % l;
                }
                for k in 0..n {
                    h[at(k, j + 1)] = (h[at(k, j + 1)] + u * h[at(k, i)]) % l;
                }
            }
        }
        let mut p: Vec<Vec<u64>> = vec![vec![1]];
        for m in 0..n {
            // (T − h_mm) p_m
            let prev = &p[m];
            let mut next = vec![0u64; m + 2];
            for (k, &c) in prev.iter().enumerate() {
                next[k + 1] = (next[k + 1] + c) % l;
                next[k] = (next[k] + (l - h[at(m, m)]) * c) % l;
            }
            let mut t = 1u64;
            for i in (0..m).rev() {
                t = t * h[at(i + 1, i)] % l;
                let coef = h[at(i, m)] * t % l;
                if coef == 0 {
                    continue;
                }
                for (k, &c) in p[i].iter().enumerate() {
                    next[k] = (next[k] + (l - coef) * c) % l;
                }
            }
            p.push(next);
        }
        p.pop().unwrap()
    }

    fn key(&self) -> u128 {
        self.data.iter().rev().fold(0u128, |acc, &x| acc * self.l as u128 + x as u128)
    }

    fn from_key(l: u64, n: usize, mut key: u128) -> Self {
        let data = (0..n * n)
            .map(|_| {
                let d = (key % l as u128) as u64;
                key /= l as u128;
                d
            })
            .collect();
        ModlMatrix { l, n, data }
    }
}

fn packable(l: u64, n: usize) -> bool {
    (n * n) as f64 * (l as f64).log2() < 127.0
}

/// The form J with J[i, 2g−1−i] = +1 for i < g and −1 for i ≥ g (0-based).
pub fn symplectic_form(g: usize, l: u64) -> ModlMatrix {
    let n = 2 * g;
    let mut data = vec![0; n * n];
    for i in 0..n {
        data[i * n + (n - 1 - i)] = if i < g { 1 } else { l - 1 };
    }
    ModlMatrix { l, n, data }
}

/// ⟨x, y⟩ = xᵀ J y.
pub fn pairing(x: &[u64], y: &[u64], l: u64) -> u64 {
    let n = x.len();
    let g = n / 2;
    (0..n)
        .map(|i| {
            let s = x[i] * y[n - 1 - i] % l;
            if i < g {
                s
            } else {
                (l - s) % l
            }
        })
        .sum::<u64>()
        % l
}

/// The m with MᵀJM = mJ.
pub fn multiplier(m: &ModlMatrix) -> Result<u64> {
    if m.n % 2 != 0 {
        return Err(Error::NotSymplectic("odd dimension".into()));
    }
    let (g, l) = (m.n / 2, m.l);
    let j = symplectic_form(g, l);
    let prod = m.transpose().mul(&j).mul(m);
    let mult = prod.get(0, m.n - 1);
    if mult == 0 || prod != ModlMatrix::scalar(l, m.n, mult).mul(&j) {
        return Err(Error::NotSymplectic(format!("{m:?} is not in GSp")));
    }
    Ok(mult)
}

/// |Sp_{2g}(Z/ℓ)| = ℓ^{g²} Π_{i=1..g} (ℓ^{2i} − 1).
pub fn sp_order(g: u32, l: u64) -> BigUint {
    let lb = BigUint::from(l);
    (1..=g).fold(lb.pow(g * g), |acc, i| acc * (lb.pow(2 * i) - 1u32))
}

/// 2^g · g!.
pub fn weyl_order(g: u32) -> u128 {
    (1..=g as u128).product::<u128>() << g
}

/// T_v: x ↦ x + c⟨x, v⟩v, i.e. I + c·v(Jv)ᵀ.
pub fn transvection(v: &[u64], c: u64, l: u64) -> ModlMatrix {
    let n = v.len();
    let g = n / 2;
    let jv: Vec<u64> = (0..n)
        .map(|i| {
            let x = v[n - 1 - i];
            if i < g {
                x
            } else {
                (l - x) % l
            }
        })
        .collect();
    let mut t = ModlMatrix::identity(l, n);
    for i in 0..n {
        for k in 0..n {
            let x = &mut t.data[i * n + k];
            *x = (*x + c * v[i] % l * jv[k]) % l;
        }
    }
    t
}

/// T_v for v ∈ {e_i} ∪ {e_i + e_j : i < j}.
pub fn standard_transvections(g: usize, l: u64) -> Result<Vec<ModlMatrix>> {
    check_ell(l)?;
    let n = 2 * g;
    let mut out = Vec::new();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        out.push(transvection(&v, 1, l));
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0; n];
            v[i] = 1;
            v[j] = 1;
            out.push(transvection(&v, 1, l));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfsOutcome {
    Order(u64),
    Exceeded,
}

/// Closure of `generators` under multiplication, visiting each element once.
fn closure<F: FnMut(&ModlMatrix)>(generators: &[ModlMatrix], cap: u64, mut visit: F) -> Result<BfsOutcome> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let (l, n) = (first.l, first.n);
    for g in generators {
        if (g.l, g.n) != (l, n) {
            return Err(Error::InvalidInput("generators of mixed shape".into()));
        }
        if multiplier(g)? != 1 {
            return Err(Error::NotSymplectic(format!("{g:?} has multiplier ≠ 1")));
        }
    }
    if !packable(l, n) {
        return Err(Error::InvalidInput(format!(
            "{n}×{n} matrices mod {l} are too large to enumerate"
        )));
    }
    let id = ModlMatrix::identity(l, n);
    let mut seen = HashSet::from([id.key()]);
    let mut queue = VecDeque::from([id.key()]);
    while let Some(k) = queue.pop_front() {
        let m = ModlMatrix::from_key(l, n, k);
        visit(&m);
        for g in generators {
            let next = m.mul(g).key();
            if seen.insert(next) {
                if seen.len() as u64 > cap {
                    return Ok(BfsOutcome::Exceeded);
                }
                queue.push_back(next);
            }
        }
    }
    Ok(BfsOutcome::Order(seen.len() as u64))
}

/// Order of the subgroup generated by symplectic `generators`, or
/// `Exceeded` once more than `cap` elements are found.
pub fn group_bfs(generators: &[ModlMatrix], cap: u64) -> Result<BfsOutcome> {
    closure(generators, cap, |_| {})
}

/// D_m = diag(m,…,m,1,…,1), multiplier m.
pub fn coset_representative(g: usize, l: u64, m: u64) -> Result<ModlMatrix> {
    check_ell(l)?;
    if m % l == 0 {
        return Err(Error::InvalidInput(format!("multiplier {m} is not a unit mod {l}")));
    }
    let diag: Vec<u64> = (0..2 * g).map(|i| if i < g { m % l } else { 1 }).collect();
    Ok(ModlMatrix::diagonal(l, &diag))
}

/// Visits every element of Sp_{2g}(Z/ℓ)·D_m.
pub fn for_each_in_coset<F: FnMut(&ModlMatrix)>(g: usize, l: u64, m: u64, cap: u64, mut visit: F) -> Result<u64> {
    let d = coset_representative(g, l, m)?;
    let order = sp_order(g as u32, l);
    if order > BigUint::from(cap) {
        return Err(Error::BudgetExceeded {
            what: format!("enumeration of Sp_{}(Z/{l})", 2 * g),
            needed: order.to_u128().unwrap_or(u128::MAX),
            cap: cap as u128,
        });
    }
    let gens = standard_transvections(g, l)?;
    match closure(&gens, cap, |s| visit(&s.mul(&d)))? {
        BfsOutcome::Order(n) if BigUint::from(n) == order => Ok(n),
        BfsOutcome::Order(n) => Err(Error::Inconsistent(format!(
            "transvections generated {n} elements, expected {order}"
        ))),
        BfsOutcome::Exceeded => unreachable!("order checked against cap"),
    }
}

/// Samples Sp_{2g}(Z/ℓ) by a product of `walk` random transvections
/// x ↦ x + c⟨x, v⟩v, v uniform nonzero and c uniform in (Z/ℓ)^×.
#[derive(Clone, Copy, Debug)]
pub struct SpSampler {
    pub g: usize,
    pub l: u64,
    pub walk: usize,
}

impl SpSampler {
    pub fn new(g: usize, l: u64) -> Result<Self> {
        check_ell(l)?;
        if g == 0 {
            return Err(Error::InvalidInput("g must be positive".into()));
        }
        Ok(SpSampler { g, l, walk: DEFAULT_WALK })
    }

    pub fn with_walk(mut self, walk: usize) -> Self {
        self.walk = walk;
        self
    }

    pub fn sample(&self, rng: &mut Rng) -> ModlMatrix {
        let (n, l, g) = (2 * self.g, self.l, self.g);
        let mut m = ModlMatrix::identity(l, n);
        let mut v = vec![0u64; n];
        for _ in 0..self.walk {
            loop {
                v.iter_mut().for_each(|x| *x = rng.gen_range(0..l));
                if v.iter().any(|&x| x != 0) {
                    break;
                }
            }
            let c = rng.gen_range(1..l);
            // M ← M·T = M + c (Mv)(Jv)ᵀ
            let mv = m.mul_vec(&v);
            for i in 0..n {
                let a = c * mv[i] % l;
                if a == 0 {
                    continue;
                }
                for k in 0..n {
                    let jv = if k < g { v[n - 1 - k] } else { (l - v[n - 1 - k]) % l };
                    let x = &mut m.data[i * n + k];
                    *x = (*x + a * jv) % l;
                }
            }
        }
        m
    }
}

/// One sample from [`SpSampler`] with the default walk, seeded.
pub fn random_sp(g: usize, l: u64, seed: u64) -> Result<ModlMatrix> {
    Ok(SpSampler::new(g, l)?.sample(&mut rng::substream(seed, 0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Exact { cap: u64 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Mode {
    pub fn exact() -> Self {
        Mode::Exact { cap: DEFAULT_ENUMERATION_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Proportion {
    Exact { num: u64, den: u64 },
    Estimate { estimate: f64, ci_low: f64, ci_high: f64, samples: u64 },
}

impl Proportion {
    pub fn value(&self) -> f64 {
        match *self {
            Proportion::Exact { num, den } => num as f64 / den as f64,
            Proportion::Estimate { estimate, .. } => estimate,
        }
    }

    pub fn as_ratio(&self) -> Option<Ratio<u64>> {
        match *self {
            Proportion::Exact { num, den } => Some(Ratio::new(num, den)),
            _ => None,
        }
    }

    fn estimate(hits: u64, n: u64) -> Self {
        let (lo, hi) = wilson_interval(hits, n, 1.96);
        Proportion::Estimate {
            estimate: hits as f64 / n as f64,
            ci_low: lo,
            ci_high: hi,
            samples: n,
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (hits as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Proportion of the multiplier-m coset of GSp_{2g}(Z/ℓ) with a nonzero
/// fixed vector.
pub fn fixed_vector_proportion(g: usize, l: u64, m: u64, mode: Mode) -> Result<Proportion> {
    let d = coset_representative(g, l, m)?;
    match mode {
        Mode::Exact { cap } => {
            let mut hits = 0u64;
            let total = for_each_in_coset(g, l, m, cap, |x| hits += u64::from(x.has_fixed_vector()))?;
            let r = Ratio::new(hits, total);
            Ok(Proportion::Exact { num: *r.numer(), den: *r.denom() })
        }
        Mode::MonteCarlo { samples, seed } => {
            let sampler = SpSampler::new(g, l)?;
            let hits: u64 = rng::chunks(samples, MC_CHUNKS)
                .into_par_iter()
                .map(|(i, k)| {
                    let mut r = rng::substream(seed, i);
                    (0..k)
                        .filter(|_| sampler.sample(&mut r).mul(&d).has_fixed_vector())
                        .count() as u64
                })
                .sum();
            Ok(Proportion::estimate(hits, samples))
        }
    }
}

/// One row of the fixed-vector baseline table.
pub fn baseline_csv_row(g: usize, l: u64, m: u64, p: &Proportion) -> String {
    match p {
        Proportion::Exact { num, den } => format!("{g},{l},{m},{num},{den},,,,"),
        Proportion::Estimate { estimate, ci_low, ci_high, samples } => {
            format!("{g},{l},{m},,,{estimate},{ci_low},{ci_high},{samples}")
        }
    }
}

pub const BASELINE_CSV_HEADER: &str = "g,l,m,proportion_num,proportion_den,estimate,ci_low,ci_high,N";

/// Distribution of characteristic polynomials over a coset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharpolyDistribution {
    pub g: usize,
    pub l: u64,
    pub m: u64,
    pub exact: bool,
    pub total: u64,
    /// (charpoly coefficients low to high, count)
    pub counts: Vec<(Vec<u64>, u64)>,
}

impl CharpolyDistribution {
    pub fn probability(&self, poly: &[u64]) -> f64 {
        self.counts
            .binary_search_by(|(p, _)| p.as_slice().cmp(poly))
            .map(|i| self.counts[i].1 as f64 / self.total as f64)
            .unwrap_or(0.0)
    }
}

pub fn charpoly_distribution(g: usize, l: u64, m: u64, mode: Mode) -> Result<CharpolyDistribution> {
    let d = coset_representative(g, l, m)?;
    let (counts, total, exact) = match mode {
        Mode::Exact { cap } => {
            let mut counts = BTreeMap::new();
            let total = for_each_in_coset(g, l, m, cap, |x| *counts.entry(x.charpoly()).or_insert(0) += 1)?;
            (counts, total, true)
        }
        Mode::MonteCarlo { samples, seed } => {
            let sampler = SpSampler::new(g, l)?;
            let counts = rng::chunks(samples, MC_CHUNKS)
                .into_par_iter()
                .map(|(i, k)| {
                    let mut r = rng::substream(seed, i);
                    let mut c = BTreeMap::new();
                    for _ in 0..k {
                        *c.entry(sampler.sample(&mut r).mul(&d).charpoly()).or_insert(0u64) += 1;
                    }
                    c
                })
                .reduce(BTreeMap::new, |mut a, b| {
                    for (k, v) in b {
                        *a.entry(k).or_insert(0) += v;
                    }
                    a
                });
            (counts, samples, false)
        }
    };
    Ok(CharpolyDistribution { g, l, m: m % l, exact, total, counts: counts.into_iter().collect() })
}

/// Total variation distance between an empirical histogram and a baseline.
pub fn tv_distance(empirical: &BTreeMap<Vec<u64>, u64>, baseline: &CharpolyDistribution) -> f64 {
    let n: u64 = empirical.values().sum();
    if n == 0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for (p, c) in &baseline.counts {
        let e = empirical.get(p).copied().unwrap_or(0) as f64 / n as f64;
        sum += (e - *c as f64 / baseline.total as f64).abs();
    }
    for (p, &c) in empirical {
        if baseline.probability(p) == 0.0 {
            sum += c as f64 / n as f64;
        }
    }
    sum / 2.0
}

/// P(T) = T^{2g}·L(1/T) mod ℓ, coefficients low to high (monic).
pub fn charpoly_mod(lp: &LPolynomial, l: u64) -> Result<Vec<u64>> {
    check_ell(l)?;
    let q = lp.q;
    if q % l == 0 {
        return Err(Error::InvalidInput(format!("ℓ = {l} divides q = {q}")));
    }
    let lb = BigInt::from(l);
    let reduce = |a: &BigInt| a.mod_floor(&lb).to_u64().unwrap();
    let a: Vec<u64> = lp.coeffs.iter().map(reduce).collect();
    let d = a.len() - 1;
    let p: Vec<u64> = (0..=d).map(|j| a[d - j]).collect();
    debug_assert!(p[d].is_one());
    // coefficient j of q^{-g} T^{2g} P(q/T) is P_{2g-j} q^{g-j}
    let g = lp.genus as i64;
    let qm = q % l;
    let qinv = inv_mod(qm, l);
    for j in 0..=d {
        let e = g - j as i64;
        let s = if e >= 0 { pow_mod(qm, e as u64, l) } else { pow_mod(qinv, (-e) as u64, l) };
        if p[d - j] * s % l != p[j] {
            return Err(Error::Inconsistent(format!(
                "reduction of L mod {l} is not self-dual"
            )));
        }
    }
    Ok(p)
}
