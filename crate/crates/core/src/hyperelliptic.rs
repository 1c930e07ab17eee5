//! Hyperelliptic curves y² = f(x) over F_q, point counts over extensions,
//! and the numerator L(T) of the zeta function.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{Fq, FqPoly, GaloisField, MAX_FIELD_ORDER};

/// Default cap on q^k for a single point count.
pub const DEFAULT_POINT_BUDGET: u64 = MAX_FIELD_ORDER;

/// Smooth projective hyperelliptic curve with affine model y² = f(x), f monic
/// and squarefree of degree 2g+1 or 2g+2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HyperellipticCurve {
    f: FqPoly,
    genus: usize,
}

impl HyperellipticCurve {
    pub fn new(f: FqPoly) -> Result<Self> {
        let d = f
            .degree()
            .ok_or_else(|| Error::InvalidCurve("f is the zero polynomial".into()))?;
        if d <= 2 {
            return Err(Error::InvalidCurve(format!("deg f = {d} gives genus 0")));
        }
        if !f.is_monic() {
            return Err(Error::InvalidCurve("f must be monic".into()));
        }
        if !f.squarefree()? {
            return Err(Error::InvalidCurve(format!("{f:?} is not squarefree (singular model)")));
        }
        let genus = d.div_ceil(2) - 1;
        Ok(HyperellipticCurve { f, genus })
    }

    pub fn from_ints(field: &GaloisField, coeffs: &[i64]) -> Result<Self> {
        Self::new(FqPoly::from_ints(field, coeffs))
    }

    pub fn field(&self) -> &GaloisField {
        self.f.field()
    }

    pub fn f(&self) -> &FqPoly {
        &self.f
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn model_degree(&self) -> usize {
        self.f.degree().unwrap()
    }

    pub fn q(&self) -> u64 {
        self.field().order() as u64
    }

    pub fn point_count(&self, k: u32) -> Result<u64> {
        self.point_count_with_budget(k, DEFAULT_POINT_BUDGET)
    }

    /// Number of points on the smooth projective model over F_{q^k}.
    pub fn point_count_with_budget(&self, k: u32, budget: u64) -> Result<u64> {
        if k == 0 {
            return Err(Error::InvalidInput("extension degree must be at least 1".into()));
        }
        let base = self.field();
        let big_q = (base.order() as u128).checked_pow(k).unwrap_or(u128::MAX);
        if big_q > budget as u128 {
            return Err(Error::BudgetExceeded {
                what: format!("point count over F_{}^{}", base.order(), k),
                needed: big_q,
                cap: budget as u128,
            });
        }
        let lead = self.f.leading().unwrap();
        if k == 1 {
            let affine: i64 = base
                .elements()
                .map(|x| 1 + base.chi(self.f.eval(x)))
                .sum();
            return Ok((affine + self.infinity_points(base, lead)) as u64);
        }
        let ext = GaloisField::new(base.characteristic(), base.degree() * k)?;
        let emb = base.embedding(&ext)?;
        let coeffs: Vec<Fq> = self.f.coeffs().iter().map(|c| emb[c.value() as usize]).collect();
        let orbits = frobenius_orbits(&ext, base.order());
        let mut affine: i64 = 0;
        for &(x, weight) in orbits.iter() {
            let v = coeffs
                .iter()
                .rev()
                .fold(Fq::ZERO, |acc, &c| ext.add(ext.mul(acc, x), c));
            affine += weight as i64 * (1 + ext.chi(v));
        }
        let lead_ext = emb[lead.value() as usize];
        Ok((affine + self.infinity_points(&ext, lead_ext)) as u64)
    }

    fn infinity_points(&self, k: &GaloisField, lead: Fq) -> i64 {
        if self.model_degree() % 2 == 1 {
            1
        } else if k.is_square(lead) {
            2
        } else {
            0
        }
    }

    /// Point counts N_1, …, N_g.
    pub fn point_counts(&self) -> Result<Vec<u64>> {
        (1..=self.genus as u32).map(|k| self.point_count(k)).collect()
    }

    pub fn l_polynomial(&self) -> Result<LPolynomial> {
        LPolynomial::from_point_counts(self.q(), self.genus, &self.point_counts()?)
    }

    /// #Pic⁰(F_q) = L(1).
    pub fn picard_order(&self) -> Result<BigInt> {
        Ok(self.l_polynomial()?.picard_order())
    }
}

type OrbitKey = (u32, u32, u32);

fn orbit_cache() -> &'static Mutex<HashMap<OrbitKey, Arc<Vec<(Fq, u32)>>>> {
    static C: OnceLock<Mutex<HashMap<OrbitKey, Arc<Vec<(Fq, u32)>>>>> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// Representatives of the orbits of x ↦ x^q on `ext`, with orbit sizes.
/// Summing a Frobenius-invariant function over representatives weighted by
/// size equals summing it over the whole field.
fn frobenius_orbits(ext: &GaloisField, q: u32) -> Arc<Vec<(Fq, u32)>> {
    let key = (ext.characteristic(), ext.degree(), q);
    if let Some(o) = orbit_cache().lock().unwrap().get(&key) {
        return o.clone();
    }
    let size = ext.order() as usize;
    let mut seen = vec![false; size];
    let mut reps = Vec::new();
    for x in ext.elements() {
        if seen[x.value() as usize] {
            continue;
        }
        let mut len = 0;
        let mut y = x;
        loop {
            seen[y.value() as usize] = true;
            len += 1;
            y = ext.pow(y, q as u64);
            if y == x {
                break;
            }
        }
        reps.push((x, len));
    }
    let reps = Arc::new(reps);
    orbit_cache().lock().unwrap().insert(key, reps.clone());
    reps
}

/// Numerator L(T) = Σ a_i T^i of the zeta function of a genus-g curve over F_q.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPolynomial {
    pub q: u64,
    pub genus: usize,
    #[serde(with = "crate::serde_util::bigint_vec")]
    pub coeffs: Vec<BigInt>,
}

impl LPolynomial {
    /// Validates length, a_0 = 1 and the functional equation.
    pub fn new(q: u64, genus: usize, coeffs: Vec<BigInt>) -> Result<Self> {
        if genus == 0 || coeffs.len() != 2 * genus + 1 {
            return Err(Error::InvalidInput(format!(
                "L-polynomial of genus {genus} needs {} coefficients",
                2 * genus + 1
            )));
        }
        let l = LPolynomial { q, genus, coeffs };
        if !l.coeffs[0].is_one() || !l.satisfies_functional_equation() {
            return Err(Error::InvalidInput(format!(
                "coefficients {:?} violate a_(2g-i) = q^(g-i) a_i",
                l.coeffs
            )));
        }
        Ok(l)
    }

    pub fn from_ints(q: u64, genus: usize, coeffs: &[i64]) -> Result<Self> {
        Self::new(q, genus, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Recovers L(T) from N_1..N_g via Newton's identities and the
    /// functional equation, then cross-checks against the zeta series.
    pub fn from_point_counts(q: u64, genus: usize, counts: &[u64]) -> Result<Self> {
        if counts.len() < genus {
            return Err(Error::InvalidInput(format!(
                "{} point counts given, genus {genus} needs {genus}",
                counts.len()
            )));
        }
        let qb = BigInt::from(q);
        for (i, &n) in counts.iter().take(genus).enumerate() {
            let k = i as u32 + 1;
            let trace = BigInt::from(n) - qb.pow(k) - 1;
            // |N_k - q^k - 1| <= 2g sqrt(q^k)
            if &trace * &trace > BigInt::from(4 * genus * genus) * qb.pow(k) {
                return Err(Error::Inconsistent(format!(
                    "N_{k} = {n} violates the Weil bound for genus {genus} over F_{q}"
                )));
            }
        }
        // power sums of the reciprocal roots: P_k = q^k + 1 - N_k
        let power_sums: Vec<BigInt> = counts
            .iter()
            .take(genus)
            .enumerate()
            .map(|(i, &n)| qb.pow(i as u32 + 1) + 1 - BigInt::from(n))
            .collect();
        let mut a = vec![BigInt::one()];
        for k in 1..=genus {
            let s: BigInt = (1..=k).map(|i| &power_sums[i - 1] * &a[k - i]).sum();
            let (quot, rem) = (-s).div_rem(&BigInt::from(k));
            if !rem.is_zero() {
                return Err(Error::Inconsistent(format!(
                    "Newton identity at k = {k} is not integral; point counts are inconsistent"
                )));
            }
            a.push(quot);
        }
        for i in (0..genus).rev() {
            a.push(qb.pow((genus - i) as u32) * &a[i]);
        }
        let l = LPolynomial { q, genus, coeffs: a };
        l.check_zeta_series(counts)?;
        if !l.picard_order().is_positive() {
            return Err(Error::Inconsistent("L(1) is not positive".into()));
        }
        Ok(l)
    }

    /// Z(T)(1-T)(1-qT) = L(T) to order g, with Z(T) = exp(Σ N_k T^k / k).
    fn check_zeta_series(&self, counts: &[u64]) -> Result<()> {
        let g = self.genus;
        let mut z = vec![BigInt::one()];
        for m in 1..=g {
            let s: BigInt = (1..=m).map(|k| BigInt::from(counts[k - 1]) * &z[m - k]).sum();
            let (quot, rem) = s.div_rem(&BigInt::from(m));
            if !rem.is_zero() {
                return Err(Error::Inconsistent(format!(
                    "zeta series coefficient {m} is not integral"
                )));
            }
            z.push(quot);
        }
        let qb = BigInt::from(self.q);
        for m in 1..=g {
            let mut l = z[m].clone() - (&qb + 1) * &z[m - 1];
            if m >= 2 {
                l += &qb * &z[m - 2];
            }
            if l != self.coeffs[m] {
                return Err(Error::Inconsistent(format!(
                    "zeta series gives a_{m} = {l}, Newton identities gave {}",
                    self.coeffs[m]
                )));
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        2 * self.genus
    }

    pub fn satisfies_functional_equation(&self) -> bool {
        let g = self.genus;
        let qb = BigInt::from(self.q);
        (0..=g).all(|i| self.coeffs[2 * g - i] == qb.pow((g - i) as u32) * &self.coeffs[i])
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    /// L(1), the order of the group of rational points of the Jacobian.
    pub fn picard_order(&self) -> BigInt {
        self.coeffs.iter().sum()
    }

    /// Power sums Σ α_i^k of the reciprocal roots for k = 1..=upto.
    pub fn power_sums(&self, upto: usize) -> Vec<BigInt> {
        let a = |i: usize| -> BigInt {
            self.coeffs.get(i).cloned().unwrap_or_default()
        };
        let mut sums: Vec<BigInt> = Vec::with_capacity(upto);
        for k in 1..=upto {
            let mut s = -BigInt::from(k) * a(k);
            for i in k.saturating_sub(self.degree()).max(1)..k {
                s -= &sums[i - 1] * a(k - i);
            }
            sums.push(s);
        }
        sums
    }

    /// N_k implied by L(T): q^k + 1 - Σ α_i^k.
    pub fn predicted_point_count(&self, k: usize) -> BigInt {
        let s = self.power_sums(k).pop().unwrap_or_default();
        BigInt::from(self.q).pow(k as u32) + 1 - s
    }
}
