use std::fmt;

use super::field::{Fq, GaloisField};
use crate::error::{Error, Result};

/// Univariate polynomial over F_q, coefficients constant term first with
/// trailing zeros trimmed. The zero polynomial has no coefficients and
/// `degree() == None`.
#[derive(Clone, PartialEq, Eq)]
pub struct FqPoly {
    field: GaloisField,
    coeffs: Vec<Fq>,
}

impl fmt::Debug for FqPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{:?}", self.field, self.values())
    }
}

impl FqPoly {
    pub fn new(field: &GaloisField, mut coeffs: Vec<Fq>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        FqPoly { field: field.clone(), coeffs }
    }

    /// Polynomial with integer coefficients reduced into the prime subfield.
    pub fn from_ints(field: &GaloisField, coeffs: &[i64]) -> Self {
        Self::new(field, coeffs.iter().map(|&c| field.from_int(c)).collect())
    }

    /// Polynomial from packed element encodings.
    pub fn from_values(field: &GaloisField, values: &[u32]) -> Result<Self> {
        let coeffs = values
            .iter()
            .map(|&v| field.element(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(field, coeffs))
    }

    pub fn zero(field: &GaloisField) -> Self {
        FqPoly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn one(field: &GaloisField) -> Self {
        Self::new(field, vec![field.one()])
    }

    pub fn x(field: &GaloisField) -> Self {
        Self::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    /// Packed encodings of the coefficients.
    pub fn values(&self) -> Vec<u32> {
        self.coeffs.iter().map(|c| c.value()).collect()
    }

    pub fn coeff(&self, i: usize) -> Fq {
        self.coeffs.get(i).copied().unwrap_or(Fq::ZERO)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<Fq> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == Some(self.field.one())
    }

    pub fn add(&self, other: &FqPoly) -> FqPoly {
        let k = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| k.add(self.coeff(i), other.coeff(i))).collect();
        FqPoly::new(k, c)
    }

    pub fn sub(&self, other: &FqPoly) -> FqPoly {
        let k = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| k.sub(self.coeff(i), other.coeff(i))).collect();
        FqPoly::new(k, c)
    }

    pub fn scale(&self, s: Fq) -> FqPoly {
        let k = &self.field;
        FqPoly::new(k, self.coeffs.iter().map(|&c| k.mul(c, s)).collect())
    }

    pub fn mul(&self, other: &FqPoly) -> FqPoly {
        let k = &self.field;
        if self.is_zero() || other.is_zero() {
            return FqPoly::zero(k);
        }
        let mut out = vec![Fq::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = k.add(out[i + j], k.mul(a, b));
            }
        }
        FqPoly::new(k, out)
    }

    /// Exact power `self^e`; `self^0 = 1`.
    pub fn pow(&self, mut e: u64) -> FqPoly {
        let mut acc = FqPoly::one(&self.field);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn divrem(&self, d: &FqPoly) -> Result<(FqPoly, FqPoly)> {
        let k = &self.field;
        let dd = d
            .degree()
            .ok_or_else(|| Error::InvalidInput("division by the zero polynomial".into()))?;
        let lead_inv = k.inv(d.coeffs[dd]).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((FqPoly::zero(k), self.clone()));
        }
        let mut quot = vec![Fq::ZERO; rem.len() - dd];
        for top in (dd..rem.len()).rev() {
            let c = k.mul(rem[top], lead_inv);
            if c.is_zero() {
                continue;
            }
            quot[top - dd] = c;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                let idx = top - dd + i;
                rem[idx] = k.sub(rem[idx], k.mul(c, dc));
            }
        }
        rem.truncate(dd);
        Ok((FqPoly::new(k, quot), FqPoly::new(k, rem)))
    }

    pub fn rem(&self, d: &FqPoly) -> Result<FqPoly> {
        Ok(self.divrem(d)?.1)
    }

    pub fn make_monic(&self) -> FqPoly {
        match self.leading() {
            None => self.clone(),
            Some(l) => self.scale(self.field.inv(l).unwrap()),
        }
    }

    /// Monic gcd; zero only when both inputs are zero.
    pub fn gcd(&self, other: &FqPoly) -> FqPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// Formal derivative.
    pub fn derivative(&self) -> FqPoly {
        let k = &self.field;
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| k.mul(k.from_int(i as i64), c))
            .collect();
        FqPoly::new(k, c)
    }

    /// Horner evaluation at `x`.
    #[inline]
    pub fn eval(&self, x: Fq) -> Fq {
        let k = &self.field;
        self.coeffs
            .iter()
            .rev()
            .fold(Fq::ZERO, |acc, &c| k.add(k.mul(acc, x), c))
    }

    /// True iff `gcd(f, f')` is a nonzero constant.
    pub fn squarefree(&self) -> Result<bool> {
        if self.is_zero() {
            return Err(Error::InvalidInput("squarefree test on the zero polynomial".into()));
        }
        Ok(self.gcd(&self.derivative()).degree() == Some(0))
    }

    /// Resultant of two polynomials via the Euclidean recurrence.
    pub fn resultant(&self, other: &FqPoly) -> Fq {
        let k = &self.field;
        let (Some(da), Some(db)) = (self.degree(), other.degree()) else {
            return Fq::ZERO;
        };
        if db == 0 {
            return k.pow(other.coeffs[0], da as u64);
        }
        if da == 0 {
            return k.pow(self.coeffs[0], db as u64);
        }
        let r = self.rem(other).expect("nonzero divisor");
        let Some(dr) = r.degree() else {
            return Fq::ZERO;
        };
        let mut res = k.mul(
            k.pow(other.coeffs[db], (da - dr) as u64),
            other.resultant(&r),
        );
        if da * db % 2 == 1 {
            res = k.neg(res);
        }
        res
    }
}

/// Monic polynomial of degree `d` whose lower coefficients are the base-q
/// digits of `index`, constant term least significant.
pub fn monic_from_index(field: &GaloisField, d: usize, mut index: u64) -> FqPoly {
    let q = field.order() as u64;
    let mut coeffs = Vec::with_capacity(d + 1);
    for _ in 0..d {
        coeffs.push(field.element((index % q) as u32).unwrap());
        index /= q;
    }
    coeffs.push(field.one());
    FqPoly::new(field, coeffs)
}

/// Number of monic polynomials of degree `d`, if it fits in a `u64`.
pub fn monic_count(field: &GaloisField, d: usize) -> Option<u64> {
    (field.order() as u64).checked_pow(d as u32)
}

/// Every monic polynomial of degree `d` exactly once, ordered
/// lexicographically on coefficient vectors with the constant term varying
/// fastest; optionally restricted to squarefree ones.
pub fn enumerate_monic(
    field: &GaloisField,
    d: usize,
    squarefree_only: bool,
) -> impl Iterator<Item = FqPoly> + '_ {
    let total = monic_count(field, d).expect("enumeration size overflows u64");
    (0..total)
        .map(move |i| monic_from_index(field, d, i))
        .filter(move |f| !squarefree_only || f.squarefree().unwrap())
}
