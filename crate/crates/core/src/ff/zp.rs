//! Dense polynomials over a prime field Z/r with `u64` coefficients.
//!
//! These routines back the search for canonical field moduli and the
//! reduction of integer polynomials modulo auxiliary primes. Coefficients are
//! stored constant term first and kept trimmed (no trailing zeros); the zero
//! polynomial is the empty vector.

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Distinct prime factors in increasing order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

pub fn inv_mod(a: u64, r: u64) -> u64 {
    debug_assert!(a % r != 0);
    pow_mod(a, r - 2, r)
}

pub fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub fn degree(a: &[u64]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn sub(a: &[u64], b: &[u64], r: u64) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + r - y) % r;
    }
    trim(&mut out);
    out
}

pub fn mul(a: &[u64], b: &[u64], r: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % r;
        }
    }
    trim(&mut out);
    out
}

/// Remainder of `a` modulo nonzero `m`.
pub fn rem(a: &[u64], m: &[u64], r: u64) -> Vec<u64> {
    let dm = degree(m).expect("division by zero polynomial");
    let mut out = a.to_vec();
    trim(&mut out);
    let lead_inv = inv_mod(m[dm], r);
    while out.len() > dm {
        let top = out.len() - 1;
        let c = out[top] * lead_inv % r;
        if c != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let k = top - dm + i;
                out[k] = (out[k] + r - c * mc % r) % r;
            }
        }
        out.pop();
        trim(&mut out);
    }
    out
}

pub fn make_monic(a: &mut [u64], r: u64) {
    if let Some(&lead) = a.last() {
        let inv = inv_mod(lead, r);
        for c in a.iter_mut() {
            *c = *c * inv % r;
        }
    }
}

/// Monic greatest common divisor (zero if both inputs are zero).
pub fn gcd(a: &[u64], b: &[u64], r: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let t = rem(&x, &y, r);
        x = y;
        y = t;
    }
    make_monic(&mut x, r);
    x
}

pub fn derivative(a: &[u64], r: u64) -> Vec<u64> {
    let mut out: Vec<u64> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| (i as u64 % r) * c % r)
        .collect();
    trim(&mut out);
    out
}

pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], r: u64) -> Vec<u64> {
    rem(&mul(a, b, r), m, r)
}

pub fn powmod(base: &[u64], mut e: u64, m: &[u64], r: u64) -> Vec<u64> {
    let mut acc = rem(&[1], m, r);
    let mut b = rem(base, m, r);
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &b, m, r);
        }
        b = mulmod(&b, &b, m, r);
        e >>= 1;
    }
    acc
}

/// True iff `a` (nonzero) has no repeated factor over the algebraic closure.
pub fn is_squarefree(a: &[u64], r: u64) -> bool {
    let g = gcd(a, &derivative(a, r), r);
    g.len() == 1
}

/// Rabin's irreducibility test for a polynomial of degree `n ≥ 1`.
pub fn is_irreducible(f: &[u64], r: u64) -> bool {
    let n = match degree(f) {
        Some(0) | None => return false,
        Some(n) => n,
    };
    if n == 1 {
        return true;
    }
    let x = [0, 1];
    // frob[k] = x^{r^k} mod f
    let mut frob = vec![rem(&x, f, r)];
    for _ in 0..n {
        let last = frob.last().unwrap();
        frob.push(powmod(last, r, f, r));
    }
    if !sub(&frob[n], &x, r).is_empty() {
        return false;
    }
    for q in prime_factors(n as u64) {
        let k = n / q as usize;
        let h = sub(&frob[k], &x, r);
        if gcd(f, &h, r).len() != 1 {
            return false;
        }
    }
    true
}

/// Degrees of the irreducible factors of a squarefree polynomial, sorted.
///
/// Distinct-degree factorization followed by an equal-degree count: each
/// distinct-degree block of degree `k·d` contributes `k` factors of degree `d`.
pub fn factor_degrees(f: &[u64], r: u64) -> Vec<usize> {
    let mut rest = f.to_vec();
    trim(&mut rest);
    make_monic(&mut rest, r);
    let mut out = Vec::new();
    let x = vec![0, 1];
    let mut h = x.clone();
    let mut d = 1;
    while degree(&rest).unwrap_or(0) >= 2 * d {
        h = powmod(&h, r, &rest, r);
        let g = gcd(&rest, &sub(&h, &x, r), r);
        let dg = degree(&g).unwrap_or(0);
        if dg > 0 {
            for _ in 0..dg / d {
                out.push(d);
            }
            rest = divide_exact(&rest, &g, r);
            h = rem(&h, &rest, r);
        }
        d += 1;
    }
    if let Some(dr) = degree(&rest) {
        if dr > 0 {
            out.push(dr);
        }
    }
    out.sort_unstable();
    out
}

/// Quotient of `a` by a divisor `b`.
pub fn divide_exact(a: &[u64], b: &[u64], r: u64) -> Vec<u64> {
    let db = degree(b).expect("division by zero polynomial");
    let mut work = a.to_vec();
    trim(&mut work);
    if work.len() <= db {
        return Vec::new();
    }
    let mut q = vec![0; work.len() - db];
    let lead_inv = inv_mod(b[db], r);
    while work.len() > db {
        let top = work.len() - 1;
        let c = work[top] * lead_inv % r;
        q[top - db] = c;
        for (i, &bc) in b.iter().enumerate() {
            let k = top - db + i;
            work[k] = (work[k] + r - c * bc % r) % r;
        }
        work.pop();
    }
    trim(&mut q);
    q
}

/// Roots of `f` in Z/r by exhaustive search, ascending.
pub fn roots(f: &[u64], r: u64) -> Vec<u64> {
    (0..r)
        .filter(|&x| f.iter().rev().fold(0, |acc, &c| (acc * x + c) % r) == 0)
        .collect()
}
