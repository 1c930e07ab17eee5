use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::zp;
use crate::error::{Error, Result};

/// Largest supported characteristic.
pub const MAX_CHARACTERISTIC: u32 = 97;

/// Largest field order for which log/antilog tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 22;

const NONE: u32 = u32::MAX;

/// Explicit model of F_{p^n}: the characteristic, the degree, and the monic
/// irreducible modulus (coefficients constant term first, length n + 1).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldDescriptor {
    pub p: u32,
    pub n: u32,
    pub modulus: Vec<u32>,
}

impl FieldDescriptor {
    /// Descriptor with the canonical modulus: the monic irreducible of degree
    /// `n` whose coefficient vector `(c_0, …, c_{n-1})` is lexicographically least.
    pub fn canonical(p: u32, n: u32) -> Result<Self> {
        check_params(p, n)?;
        let r = p as u64;
        if n == 1 {
            return Ok(FieldDescriptor { p, n, modulus: vec![0, 1] });
        }
        let count = (r).pow(n);
        for idx in 0..count {
            // c_{n-1} is the least significant digit so that c_0 varies slowest
            let mut coeffs = vec![0u64; n as usize + 1];
            let mut rest = idx;
            for i in (0..n as usize).rev() {
                coeffs[i] = rest % r;
                rest /= r;
            }
            coeffs[n as usize] = 1;
            if coeffs[0] == 0 {
                continue;
            }
            if zp::is_irreducible(&coeffs, r) {
                return Ok(FieldDescriptor {
                    p,
                    n,
                    modulus: coeffs.into_iter().map(|c| c as u32).collect(),
                });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn order(&self) -> u64 {
        (self.p as u64).pow(self.n)
    }

    /// Checks the descriptor invariants, including canonicity of the modulus.
    pub fn validate(&self) -> Result<()> {
        check_params(self.p, self.n)?;
        if self.modulus.len() != self.n as usize + 1 || self.modulus.last() != Some(&1) {
            return Err(Error::InvalidField(format!(
                "modulus {:?} is not monic of degree {}",
                self.modulus, self.n
            )));
        }
        if self.modulus.iter().any(|&c| c >= self.p) {
            return Err(Error::InvalidField("modulus coefficient out of range".into()));
        }
        let m: Vec<u64> = self.modulus.iter().map(|&c| c as u64).collect();
        if !zp::is_irreducible(&m, self.p as u64) {
            return Err(Error::InvalidField(format!("modulus {:?} is reducible", self.modulus)));
        }
        if *self != Self::canonical(self.p, self.n)? {
            return Err(Error::InvalidField(format!(
                "modulus {:?} is not the canonical choice for F_{}^{}",
                self.modulus, self.p, self.n
            )));
        }
        Ok(())
    }
}

fn check_params(p: u32, n: u32) -> Result<()> {
    if p == 2 {
        return Err(Error::InvalidField("characteristic 2 is not supported".into()));
    }
    if !zp::is_prime(p as u64) {
        return Err(Error::InvalidField(format!("{p} is not prime")));
    }
    if p > MAX_CHARACTERISTIC {
        return Err(Error::InvalidField(format!(
            "characteristic {p} exceeds the supported maximum {MAX_CHARACTERISTIC}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidField("extension degree must be at least 1".into()));
    }
    let q = (p as u128).checked_pow(n).unwrap_or(u128::MAX);
    if q > MAX_FIELD_ORDER as u128 {
        return Err(Error::BudgetExceeded {
            what: format!("field F_{p}^{n}"),
            needed: q,
            cap: MAX_FIELD_ORDER as u128,
        });
    }
    Ok(())
}

/// An element of F_q, stored as its coordinate vector `(c_0, …, c_{n-1})` in
/// the power basis of the modulus, packed as the integer `Σ c_i p^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq(u32);

impl Fq {
    pub const ZERO: Fq = Fq(0);

    pub fn value(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    desc: FieldDescriptor,
    q: u32,
    generator: Fq,
    // exp[i] = g^i for 0 <= i < 2(q-1)
    exp: Vec<u32>,
    log: Vec<u32>,
    // zech[d] = log(1 + g^d), NONE when 1 + g^d = 0
    zech: Vec<u32>,
}

/// F_q with precomputed discrete-log tables. Cloning is cheap; all clones
/// (and all fields built with the same `(p, n)`) share one table set.
#[derive(Clone)]
pub struct GaloisField(Arc<Tables>);

impl PartialEq for GaloisField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.desc == other.0.desc
    }
}

impl Eq for GaloisField {}

impl fmt::Debug for GaloisField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.0.desc.p, self.0.desc.n)
    }
}

fn registry() -> &'static Mutex<HashMap<(u32, u32), GaloisField>> {
    static REG: OnceLock<Mutex<HashMap<(u32, u32), GaloisField>>> = OnceLock::new();
    REG.get_or_init(Default::default)
}

type EmbeddingKey = (u32, u32, u32);

fn embeddings() -> &'static Mutex<HashMap<EmbeddingKey, Arc<Vec<Fq>>>> {
    static EMB: OnceLock<Mutex<HashMap<EmbeddingKey, Arc<Vec<Fq>>>>> = OnceLock::new();
    EMB.get_or_init(Default::default)
}

impl GaloisField {
    /// The field F_{p^n} with its canonical modulus.
    pub fn new(p: u32, n: u32) -> Result<Self> {
        check_params(p, n)?;
        let mut reg = registry().lock().unwrap();
        if let Some(f) = reg.get(&(p, n)) {
            return Ok(f.clone());
        }
        let desc = FieldDescriptor::canonical(p, n)?;
        let field = GaloisField(Arc::new(build_tables(desc)));
        reg.insert((p, n), field.clone());
        Ok(field)
    }

    pub fn prime(p: u32) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Self> {
        desc.validate()?;
        Self::new(desc.p, desc.n)
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.0.desc
    }

    pub fn characteristic(&self) -> u32 {
        self.0.desc.p
    }

    pub fn degree(&self) -> u32 {
        self.0.desc.n
    }

    pub fn order(&self) -> u32 {
        self.0.q
    }

    pub fn zero(&self) -> Fq {
        Fq(0)
    }

    pub fn one(&self) -> Fq {
        Fq(1)
    }

    /// A fixed primitive element.
    pub fn generator(&self) -> Fq {
        self.0.generator
    }

    /// Element with the given packed encoding.
    pub fn element(&self, value: u32) -> Result<Fq> {
        if value >= self.0.q {
            return Err(Error::InvalidInput(format!(
                "{value} does not encode an element of {self:?}"
            )));
        }
        Ok(Fq(value))
    }

    /// Image of an integer under Z → F_p ⊂ F_q.
    pub fn from_int(&self, v: i64) -> Fq {
        Fq(v.rem_euclid(self.0.desc.p as i64) as u32)
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fq> {
        let p = self.0.desc.p;
        if coeffs.len() > self.0.desc.n as usize {
            return Err(Error::InvalidInput(format!(
                "{} coordinates given for a degree-{} field",
                coeffs.len(),
                self.0.desc.n
            )));
        }
        let mut v = 0u32;
        for &c in coeffs.iter().rev() {
            if c >= p {
                return Err(Error::InvalidInput(format!("coordinate {c} not reduced mod {p}")));
            }
            v = v * p + c;
        }
        Ok(Fq(v))
    }

    /// Coordinates of `a` in the power basis, length n.
    pub fn coeffs(&self, a: Fq) -> Vec<u32> {
        let p = self.0.desc.p;
        let mut v = a.0;
        (0..self.0.desc.n)
            .map(|_| {
                let c = v % p;
                v /= p;
                c
            })
            .collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.0.q).map(Fq)
    }

    /// Discrete log with respect to `generator()`; `None` for zero.
    #[inline]
    pub fn log(&self, a: Fq) -> Option<u32> {
        if a.0 == 0 {
            None
        } else {
            Some(self.0.log[a.0 as usize])
        }
    }

    #[inline]
    pub fn exp(&self, e: u64) -> Fq {
        let m = (self.0.q - 1) as u64;
        Fq(self.0.exp[(e % m) as usize])
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let t = &*self.0;
        let la = t.log[a.0 as usize];
        let lb = t.log[b.0 as usize];
        let d = if lb >= la { lb - la } else { lb + (t.q - 1) - la };
        let z = t.zech[d as usize];
        if z == NONE {
            Fq(0)
        } else {
            Fq(t.exp[(la + z) as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        if a.0 == 0 {
            return a;
        }
        let t = &*self.0;
        Fq(t.exp[(t.log[a.0 as usize] + (t.q - 1) / 2) as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a.0 == 0 || b.0 == 0 {
            return Fq(0);
        }
        let t = &*self.0;
        Fq(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Fq) -> Option<Fq> {
        let la = self.log(a)?;
        let m = self.0.q - 1;
        Some(Fq(self.0.exp[((m - la) % m) as usize]))
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        Some(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fq, e: u64) -> Fq {
        if e == 0 {
            return Fq(1);
        }
        match self.log(a) {
            None => Fq(0),
            Some(la) => {
                let m = (self.0.q - 1) as u64;
                Fq(self.0.exp[((la as u64 * (e % m)) % m) as usize])
            }
        }
    }

    /// The absolute Frobenius a ↦ a^p.
    pub fn frobenius(&self, a: Fq) -> Fq {
        self.pow(a, self.0.desc.p as u64)
    }

    /// True iff `a` is a square in F_q (zero counts as a square).
    #[inline]
    pub fn is_square(&self, a: Fq) -> bool {
        a.0 == 0 || self.0.log[a.0 as usize] & 1 == 0
    }

    /// Quadratic character with χ(0) = 0.
    #[inline]
    pub fn chi(&self, a: Fq) -> i64 {
        if a.0 == 0 {
            0
        } else if self.0.log[a.0 as usize] & 1 == 0 {
            1
        } else {
            -1
        }
    }

    /// Ring embedding of `self` into `ext`, as a lookup table indexed by the
    /// packed encoding. The image of the modulus root is the least root (in
    /// encoding order) of the modulus inside `ext`.
    pub fn embedding(&self, ext: &GaloisField) -> Result<Arc<Vec<Fq>>> {
        let (p, n, m) = (self.characteristic(), self.degree(), ext.degree());
        if ext.characteristic() != p || m % n != 0 {
            return Err(Error::InvalidInput(format!("{self:?} does not embed in {ext:?}")));
        }
        let key = (p, n, m);
        if let Some(e) = embeddings().lock().unwrap().get(&key) {
            return Ok(e.clone());
        }
        let modulus: Vec<Fq> = self.descriptor().modulus.iter().map(|&c| Fq(c)).collect();
        let root = if n == 1 {
            Fq(0)
        } else {
            ext.elements()
                .find(|&x| {
                    modulus
                        .iter()
                        .rev()
                        .fold(Fq(0), |acc, &c| ext.add(ext.mul(acc, x), c))
                        .is_zero()
                })
                .expect("a degree-n extension contains the roots of every degree-n irreducible")
        };
        let powers: Vec<Fq> = (0..n).map(|i| ext.pow(root, i as u64)).collect();
        let table: Vec<Fq> = self
            .elements()
            .map(|a| {
                self.coeffs(a)
                    .iter()
                    .zip(&powers)
                    .fold(Fq(0), |acc, (&c, &bp)| ext.add(acc, ext.mul(ext.from_int(c as i64), bp)))
            })
            .collect();
        let table = Arc::new(table);
        embeddings().lock().unwrap().insert(key, table.clone());
        Ok(table)
    }
}

// Slow coordinate arithmetic used only while building the tables.
fn slow_mul(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = zp::mul(a, b, p);
    prod = zp::rem(&prod, modulus, p);
    prod.resize(n, 0);
    prod
}

fn slow_pow(a: &[u64], mut e: u64, modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut acc = vec![0u64; n];
    acc[0] = 1;
    let mut b = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = slow_mul(&acc, &b, modulus, p);
        }
        b = slow_mul(&b, &b, modulus, p);
        e >>= 1;
    }
    acc
}

fn unpack(v: u32, p: u32, n: usize) -> Vec<u64> {
    let mut v = v;
    (0..n)
        .map(|_| {
            let c = v % p;
            v /= p;
            c as u64
        })
        .collect()
}

fn pack(c: &[u64], p: u32) -> u32 {
    c.iter().rev().fold(0u32, |acc, &x| acc * p + x as u32)
}

fn build_tables(desc: FieldDescriptor) -> Tables {
    let p = desc.p;
    let n = desc.n as usize;
    let q = desc.order() as u32;
    let modulus: Vec<u64> = desc.modulus.iter().map(|&c| c as u64).collect();
    let order = (q - 1) as u64;
    let factors = zp::prime_factors(order);
    let one = {
        let mut v = vec![0u64; n];
        v[0] = 1;
        v
    };
    let generator = (1..q)
        .find(|&cand| {
            let c = unpack(cand, p, n);
            factors
                .iter()
                .all(|&r| slow_pow(&c, order / r, &modulus, p as u64) != one)
        })
        .expect("the multiplicative group of a finite field is cyclic");
    let g = unpack(generator, p, n);

    let m = (q - 1) as usize;
    let mut exp = vec![0u32; 2 * m];
    let mut log = vec![NONE; q as usize];
    let mut cur = one.clone();
    for i in 0..m {
        let v = pack(&cur, p);
        exp[i] = v;
        exp[i + m] = v;
        log[v as usize] = i as u32;
        cur = slow_mul(&cur, &g, &modulus, p as u64);
    }
    let zech = (0..m)
        .map(|d| {
            let v = exp[d];
            let c0 = v % p;
            let w = v - c0 + (c0 + 1) % p;
            if w == 0 {
                NONE
            } else {
                log[w as usize]
            }
        })
        .collect();
    Tables {
        desc,
        q,
        generator: Fq(generator),
        exp,
        log,
        zech,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_x() {
        let d = FieldDescriptor::canonical(3, 1).unwrap();
        assert_eq!(d.modulus, vec![0, 1]);
    }

    #[test]
    fn f9_modulus_is_least_irreducible_quadratic() {
        // oracle: enumerate the 9 monic quadratics over Z/3 in lexicographic
        // order of (c0, c1) and keep the first one without a root
        let mut expected = None;
        'outer: for c0 in 0..3u32 {
            for c1 in 0..3u32 {
                let has_root = (0..3u32).any(|x| (x * x + c1 * x + c0) % 3 == 0);
                if !has_root {
                    expected = Some(vec![c0, c1, 1]);
                    break 'outer;
                }
            }
        }
        let d = FieldDescriptor::canonical(3, 2).unwrap();
        assert_eq!(Some(d.modulus), expected);
        assert_eq!(FieldDescriptor::canonical(3, 2).unwrap().modulus, vec![1, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(GaloisField::new(2, 1), Err(Error::InvalidField(_))));
        assert!(matches!(GaloisField::new(9, 1), Err(Error::InvalidField(_))));
        assert!(matches!(GaloisField::new(3, 0), Err(Error::InvalidField(_))));
        assert!(matches!(GaloisField::new(101, 1), Err(Error::InvalidField(_))));
        assert!(GaloisField::new(97, 5).unwrap_err().is_budget());
    }

    #[test]
    fn descriptor_validation_detects_noncanonical_modulus() {
        let d = FieldDescriptor { p: 3, n: 2, modulus: vec![2, 1, 1] };
        assert!(d.validate().is_err());
        let d = FieldDescriptor { p: 3, n: 2, modulus: vec![1, 0, 1] };
        assert!(d.validate().is_ok());
        let d = FieldDescriptor { p: 3, n: 2, modulus: vec![2, 0, 1] };
        assert!(d.validate().is_err());
    }

    #[test]
    fn is_square_examples() {
        let f3 = GaloisField::prime(3).unwrap();
        assert!(f3.is_square(f3.zero()));
        assert!(f3.is_square(f3.one()));
        assert!(!f3.is_square(f3.from_int(2)));
    }

    #[test]
    fn is_square_matches_brute_force_and_euler() {
        for (p, n) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3), (7, 2)] {
            let k = GaloisField::new(p, n).unwrap();
            let squares: std::collections::HashSet<Fq> =
                k.elements().map(|b| k.mul(b, b)).collect();
            let half = (k.order() as u64 - 1) / 2;
            for a in k.elements() {
                assert_eq!(k.is_square(a), squares.contains(&a));
                if !a.is_zero() {
                    assert_eq!(k.is_square(a), k.pow(a, half) == k.one());
                }
            }
        }
    }

    #[test]
    fn table_arithmetic_matches_coordinate_arithmetic() {
        for (p, n) in [(3, 2), (5, 2), (3, 3)] {
            let k = GaloisField::new(p, n).unwrap();
            let m: Vec<u64> = k.descriptor().modulus.iter().map(|&c| c as u64).collect();
            for a in k.elements() {
                for b in k.elements() {
                    let ca = unpack(a.value(), p, n as usize);
                    let cb = unpack(b.value(), p, n as usize);
                    let sum: Vec<u64> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p as u64).collect();
                    assert_eq!(k.add(a, b).value(), pack(&sum, p));
                    assert_eq!(k.mul(a, b).value(), pack(&slow_mul(&ca, &cb, &m, p as u64), p));
                }
            }
        }
    }

    #[test]
    fn embedding_is_a_ring_map() {
        let base = GaloisField::new(3, 2).unwrap();
        let ext = GaloisField::new(3, 4).unwrap();
        let e = base.embedding(&ext).unwrap();
        for a in base.elements() {
            for b in base.elements() {
                assert_eq!(e[base.add(a, b).value() as usize], ext.add(e[a.value() as usize], e[b.value() as usize]));
                assert_eq!(e[base.mul(a, b).value() as usize], ext.mul(e[a.value() as usize], e[b.value() as usize]));
            }
        }
        // image is exactly the subfield fixed by x -> x^9
        for a in base.elements() {
            let x = e[a.value() as usize];
            assert_eq!(ext.pow(x, 9), x);
        }
    }
}
