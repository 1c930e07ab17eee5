//! Arithmetic of Weil polynomials over Q: exact irreducibility, splitting
//! field degrees for g ≤ 2, Frobenius-pattern certificates of a maximal
//! Galois group for g ≤ 3, and absolute simplicity.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::zp;
use crate::hyperelliptic::LPolynomial;
use crate::symplectic::weyl_order;

/// Largest auxiliary prime tried by the Frobenius certificate.
pub const DEFAULT_PRIME_BOUND: u64 = 2000;

/// P(T) = T^{2g}·L(1/T), coefficients low to high.
pub fn weil_polynomial(l: &LPolynomial) -> Vec<BigInt> {
    l.coeffs.iter().rev().cloned().collect()
}

/// Monic h of degree g with P(T) = T^g·h(T + q/T).
pub fn real_weil_polynomial(l: &LPolynomial) -> Vec<BigInt> {
    let g = l.genus;
    let q = BigInt::from(l.q);
    // D_0 = 2, D_1 = Y, D_{k+1} = Y·D_k − q·D_{k−1}
    let mut d: Vec<Vec<BigInt>> = vec![vec![BigInt::from(2)], vec![BigInt::zero(), BigInt::one()]];
    for k in 1..g {
        let mut next = vec![BigInt::zero(); k + 2];
        for (i, c) in d[k].iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in d[k - 1].iter().enumerate() {
            next[i] -= &q * c;
        }
        d.push(next);
    }
    let mut h = vec![BigInt::zero(); g + 1];
    h[0] += &l.coeffs[g];
    for k in 1..=g {
        for (i, c) in d[k].iter().enumerate() {
            h[i] += &l.coeffs[g - k] * c;
        }
    }
    h
}

fn reduce(p: &[BigInt], r: u64) -> Vec<u64> {
    let rb = BigInt::from(r);
    let mut v: Vec<u64> = p.iter().map(|c| c.mod_floor(&rb).to_u64().unwrap()).collect();
    zp::trim(&mut v);
    v
}

fn eval(p: &[BigInt], x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

/// True iff the monic `d` divides `p` over Z.
fn divides_monic(p: &[BigInt], d: &[BigInt]) -> bool {
    let k = d.len() - 1;
    if p.len() < d.len() {
        return p.iter().all(Zero::is_zero);
    }
    let mut rem = p.to_vec();
    for i in (k..rem.len()).rev() {
        let c = rem[i].clone();
        if c.is_zero() {
            continue;
        }
        for j in 0..=k {
            rem[i - k + j] -= &c * &d[j];
        }
    }
    rem[..k].iter().all(Zero::is_zero)
}

pub fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let s = n.sqrt();
        &s * &s == *n
    }
}

fn is_rational_square(r: &BigRational) -> bool {
    is_square(r.numer()) && is_square(r.denom())
}

fn rat_sqrt(r: &BigRational) -> BigRational {
    BigRational::new(r.numer().sqrt(), r.denom().sqrt())
}

/// Exact irreducibility of P over Q. A monic integer factor of degree
/// k ≤ g has roots of absolute value √q, so its coefficients satisfy
/// |c_i| ≤ C(k, i)·q^{i/2} and |c_k| = q^{k/2}; all candidates are tried.
pub fn is_irreducible(l: &LPolynomial) -> bool {
    let p = weil_polynomial(l);
    let q = l.q;
    // cheap acceptance: irreducible modulo a prime
    for r in (3..200u64).filter(|&r| zp::is_prime(r) && q % r != 0) {
        let pr = reduce(&p, r);
        if zp::is_irreducible(&pr, r) {
            return true;
        }
    }
    let qb = BigInt::from(q);
    for k in 1..=l.genus {
        let qk = qb.pow(k as u32);
        if !is_square(&qk) {
            continue;
        }
        let c0 = qk.sqrt();
        let bounds: Vec<BigInt> = (1..k)
            .map(|i| {
                let b = binomial(k, i);
                (BigInt::from(b * b) * qb.pow(i as u32)).sqrt()
            })
            .collect();
        // factor T^k + x_1 T^{k-1} + … + x_{k-1} T + c with |x_i| ≤ bounds[i-1]
        let mut x: Vec<BigInt> = bounds.iter().map(|b| -b).collect();
        loop {
            for sign in [1, -1] {
                let mut d = vec![&c0 * sign];
                d.extend(x.iter().rev().cloned());
                d.push(BigInt::one());
                if divides_monic(&p, &d) {
                    return false;
                }
            }
            // odometer
            let mut i = 0;
            while i < x.len() {
                if x[i] < bounds[i] {
                    x[i] += 1;
                    break;
                }
                x[i] = -&bounds[i];
                i += 1;
            }
            if i == x.len() {
                break;
            }
        }
    }
    true
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Degree of the splitting field of L over Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "degree", rename_all = "snake_case")]
pub enum SplittingDegree {
    Exact(u32),
    /// Galois group proven to be the full Weyl group.
    CertifiedMaximal(u32),
    /// L reducible; degree strictly below the maximum.
    Reducible,
    Undetermined,
}

impl SplittingDegree {
    pub fn degree(&self) -> Option<u32> {
        match *self {
            SplittingDegree::Exact(d) | SplittingDegree::CertifiedMaximal(d) => Some(d),
            _ => None,
        }
    }

    /// Some(true) iff the degree is known to be 2^g·g!.
    pub fn is_maximal(&self, g: u32) -> Option<bool> {
        match *self {
            SplittingDegree::Exact(d) => Some(d as u128 == weyl_order(g)),
            SplittingDegree::CertifiedMaximal(_) => Some(true),
            SplittingDegree::Reducible => Some(false),
            SplittingDegree::Undetermined => None,
        }
    }
}

/// Exact for g ≤ 2; for g = 3 either a certified maximum, a reducibility
/// verdict, or undetermined.
pub fn splitting_degree(l: &LPolynomial) -> Result<SplittingDegree> {
    let q = BigInt::from(l.q);
    match l.genus {
        1 => {
            let disc = &l.coeffs[1] * &l.coeffs[1] - 4 * &q;
            Ok(SplittingDegree::Exact(if is_square(&disc) { 1 } else { 2 }))
        }
        2 => Ok(SplittingDegree::Exact(genus2_degree(l))),
        3 => {
            if !is_irreducible(l) {
                return Ok(SplittingDegree::Reducible);
            }
            Ok(match certify_maximal(l, DEFAULT_PRIME_BOUND) {
                Some(_) => SplittingDegree::CertifiedMaximal(48),
                None => SplittingDegree::Undetermined,
            })
        }
        g => Err(Error::InvalidInput(format!("splitting degree unsupported for genus {g}"))),
    }
}

fn genus2_degree(l: &LPolynomial) -> u32 {
    let q = BigInt::from(l.q);
    let a1 = l.coeffs[1].clone();
    let c = &l.coeffs[2] - 2 * &q;
    // roots y1, y2 of h = Y² + a1·Y + c; the field is Q(y_i, √(y_i² − 4q))
    let delta1 = &a1 * &a1 - 4 * &c;
    if is_square(&delta1) {
        let s = delta1.sqrt();
        let y1: BigInt = (-&a1 + &s) / 2;
        let y2: BigInt = (-&a1 - &s) / 2;
        let d1 = &y1 * &y1 - 4 * &q;
        let d2 = &y2 * &y2 - 4 * &q;
        return match (is_square(&d1), is_square(&d2), is_square(&(&d1 * &d2))) {
            (true, true, _) => 1,
            (false, false, false) => 4,
            _ => 2,
        };
    }
    // K = Q(√δ1); d1, d2 are K-conjugate with d1·d2 = δ2 ∈ Q
    let delta2 = &c * &c - 4 * &q * (&a1 * &a1 - 2 * &c) + 16 * &q * &q;
    if !is_square(&delta2) && !is_square(&(&delta1 * &delta2)) {
        return 8;
    }
    // d1 = u + v√δ1
    let u = BigRational::new(&a1 * &a1 + &delta1 - 16 * &q, BigInt::from(4));
    let v = BigRational::new(-a1, BigInt::from(2));
    let dr = BigRational::from(delta1);
    if is_square_in_quadratic(&u, &v, &dr) {
        2
    } else {
        4
    }
}

/// Whether u + v√d is a square in Q(√d), d not a rational square.
fn is_square_in_quadratic(u: &BigRational, v: &BigRational, d: &BigRational) -> bool {
    let norm = u * u - d * v * v;
    if !is_rational_square(&norm) {
        return false;
    }
    let n = rat_sqrt(&norm);
    let two = BigRational::from(BigInt::from(2));
    [n.clone(), -n].iter().any(|n| {
        let a2 = (u + n) / &two;
        let b2 = (u - n) / (&two * d);
        is_rational_square(&a2) && is_rational_square(&b2)
    })
}

/// Frobenius cycle types modulo auxiliary primes proving that the Galois
/// group of P is the full Weyl group (g = 2 or 3). Returns the primes used.
///
/// The image in S_g is read from h mod r; elements of the kernel (Z/2)^g are
/// detected from patterns of P mod r. For g = 2 the image must be S_2 and a
/// weight-one kernel element suffices; for g = 3 the image must be S_3 and
/// either a weight-one element, or a weight-two and a weight-three element.
pub fn certify_maximal(l: &LPolynomial, prime_bound: u64) -> Option<Vec<u64>> {
    let g = l.genus;
    if !(2..=3).contains(&g) {
        return None;
    }
    let h = real_weil_polynomial(l);
    if !galois_of_h_is_symmetric(&h, l.q) || !is_irreducible(l) {
        return None;
    }
    let p = weil_polynomial(l);
    let (mut w2, mut w3) = (None, None);
    for r in (3..=prime_bound).filter(|&r| zp::is_prime(r) && l.q % r != 0) {
        let (pr, hr) = (reduce(&p, r), reduce(&h, r));
        if pr.len() != p.len() || !zp::is_squarefree(&pr, r) || !zp::is_squarefree(&hr, r) {
            continue;
        }
        let pat = zp::factor_degrees(&pr, r);
        let img = zp::factor_degrees(&hr, r);
        let identity = img.iter().all(|&d| d == 1);
        let twos = pat.iter().filter(|&&d| d == 2).count();
        if identity && twos == 1 && pat.iter().all(|&d| d <= 2) {
            return Some(vec![r]);
        }
        if g == 3 {
            if img == [1, 2] && pat.contains(&4) {
                w2.get_or_insert(r);
            }
            if (identity && pat == [2, 2, 2]) || (img == [3] && pat == [6]) {
                w3.get_or_insert(r);
            }
            if let (Some(a), Some(b)) = (w2, w3) {
                return Some(vec![a, b]);
            }
        }
    }
    None
}

/// Galois group of the monic integer polynomial h is S_g (g ≤ 3).
fn galois_of_h_is_symmetric(h: &[BigInt], q: u64) -> bool {
    match h.len() - 1 {
        1 => true,
        2 => !is_square(&(&h[1] * &h[1] - 4 * &h[0])),
        3 => {
            // roots lie in [−2√q, 2√q]
            let bound = 2 * (q as f64).sqrt().ceil() as i64 + 1;
            if (-bound..=bound).any(|y| eval(h, &BigInt::from(y)).is_zero()) {
                return false;
            }
            let (b, c, d) = (&h[2], &h[1], &h[0]);
            let disc = b * b * c * c - 4 * c * c * c - 4 * b * b * b * d - 27 * d * d + 18 * b * c * d;
            !is_square(&disc)
        }
        _ => false,
    }
}

pub fn euler_phi(n: u64) -> u64 {
    zp::prime_factors(n)
        .iter()
        .fold(n, |acc, &p| acc / p * (p - 1))
}

/// Every d with φ(d) ≤ 2g or φ(d) dividing 2^g·g!.
pub fn simplicity_exponents(g: u32) -> Vec<u64> {
    let w = weyl_order(g) as u64;
    // φ(d) ≥ √(d/2)
    let top = 2 * w * w;
    (1..=top)
        .filter(|&d| {
            let f = euler_phi(d);
            f <= 2 * g as u64 || w % f == 0
        })
        .collect()
}

/// Outcome of the absolute-simplicity test on one L-polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicityCheck {
    pub irreducible: bool,
    pub exponents: Vec<u64>,
    /// First d for which π^d has degree < 2g.
    pub failing_exponent: Option<u64>,
}

impl SimplicityCheck {
    pub fn certified(&self) -> bool {
        self.irreducible && self.failing_exponent.is_none()
    }
}

/// L irreducible, and for every d in [`simplicity_exponents`] the
/// characteristic polynomial of π^d is squarefree (so π^d still has degree
/// 2g). A root of unity π_i/π_j in the splitting field has order d with
/// φ(d) dividing its degree, so this certifies absolute simplicity.
pub fn absolute_simplicity(l: &LPolynomial) -> SimplicityCheck {
    let g = l.genus;
    let exponents = simplicity_exponents(g as u32);
    if !is_irreducible(l) {
        return SimplicityCheck { irreducible: false, exponents, failing_exponent: None };
    }
    let dmax = *exponents.last().unwrap() as usize;
    let s = l.power_sums(2 * g * dmax);
    let failing_exponent = exponents.iter().copied().find(|&d| {
        let t: Vec<BigInt> = (1..=2 * g).map(|k| s[k * d as usize - 1].clone()).collect();
        !is_squarefree_over_q(&charpoly_from_power_sums(&t))
    });
    SimplicityCheck { irreducible: true, exponents, failing_exponent }
}

/// Monic polynomial (low to high) with the given power sums p_1..p_n.
pub fn charpoly_from_power_sums(p: &[BigInt]) -> Vec<BigInt> {
    let n = p.len();
    let mut e = vec![BigInt::one()];
    for k in 1..=n {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            let term = &e[k - i] * &p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (quot, rem) = acc.div_rem(&BigInt::from(k));
        debug_assert!(rem.is_zero(), "power sums of an algebraic integer");
        e.push(quot);
    }
    (0..=n)
        .map(|j| {
            let k = n - j;
            if k % 2 == 0 {
                e[k].clone()
            } else {
                -e[k].clone()
            }
        })
        .collect()
}

/// Squarefree over Q via gcd(P, P′), with a modular shortcut.
pub fn is_squarefree_over_q(p: &[BigInt]) -> bool {
    let deg = p.len() - 1;
    for r in [101u64, 103, 107, 109, 113] {
        let pr = reduce(p, r);
        if pr.len() == p.len() && zp::is_squarefree(&pr, r) {
            return true;
        }
    }
    let to_rat = |v: &[BigInt]| -> Vec<BigRational> { v.iter().cloned().map(BigRational::from).collect() };
    let dp: Vec<BigInt> = (1..=deg).map(|i| &p[i] * BigInt::from(i)).collect();
    rat_gcd_degree(to_rat(p), to_rat(&dp)) == 0
}

fn rat_gcd_degree(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> usize {
    let trim = |v: &mut Vec<BigRational>| {
        while v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
    };
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a ← a mod b
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() {
            let c = a.last().unwrap() / &lb;
            let shift = a.len() - b.len();
            for (i, x) in b.iter().enumerate() {
                a[shift + i] -= &c * x;
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}
