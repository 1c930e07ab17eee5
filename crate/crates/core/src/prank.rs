//! p-rank through the Hasse–Witt matrix and Newton polygons of L-polynomials.
//!
//! The two routes are independent: one works with f^((p-1)/2) over F_q, the
//! other with p-adic valuations of the integer coefficients of L(T). Their
//! agreement on every census record is the main correctness check.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::{Fq, GaloisField};
use crate::hyperelliptic::{HyperellipticCurve, LPolynomial};

/// g×g matrix with entries A_ij = c_{ip-j} (1 ≤ i, j ≤ g), where
/// f^((p-1)/2) = Σ c_m x^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HasseWittMatrix {
    field: GaloisField,
    rows: Vec<Vec<Fq>>,
}

impl HasseWittMatrix {
    pub fn new(curve: &HyperellipticCurve) -> Self {
        let field = curve.field().clone();
        let p = field.characteristic() as usize;
        let g = curve.genus();
        let h = curve.f().pow(((p - 1) / 2) as u64);
        let rows = (1..=g)
            .map(|i| {
                (1..=g)
                    .map(|j| if i * p >= j { h.coeff(i * p - j) } else { Fq::ZERO })
                    .collect()
            })
            .collect();
        HasseWittMatrix { field, rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Fq {
        self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<Fq>] {
        &self.rows
    }

    /// A · A^(p) · A^(p²) ⋯ A^(p^(g-1)), where A^(p^k) raises each entry to
    /// the p^k-th power.
    pub fn frobenius_product(&self) -> Vec<Vec<Fq>> {
        let k = &self.field;
        let g = self.dim();
        let p = k.characteristic() as u64;
        let mut acc = self.rows.clone();
        let mut twist = 1u64;
        for _ in 1..g {
            twist *= p;
            let twisted: Vec<Vec<Fq>> = self
                .rows
                .iter()
                .map(|r| r.iter().map(|&a| k.pow(a, twist)).collect())
                .collect();
            acc = mat_mul(k, &acc, &twisted);
        }
        acc
    }
}

fn mat_mul(k: &GaloisField, a: &[Vec<Fq>], b: &[Vec<Fq>]) -> Vec<Vec<Fq>> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    (0..b.len()).fold(Fq::ZERO, |acc, t| k.add(acc, k.mul(a[i][t], b[t][j])))
                })
                .collect()
        })
        .collect()
}

/// Rank over F_q by Gaussian elimination.
pub fn rank(k: &GaloisField, m: &[Vec<Fq>]) -> usize {
    let mut rows: Vec<Vec<Fq>> = m.to_vec();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = k.inv(rows[rank][col]).unwrap();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = k.mul(rows[r][col], inv);
                for c in col..ncols {
                    let sub = k.mul(factor, rows[rank][c]);
                    rows[r][c] = k.sub(rows[r][c], sub);
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn hasse_witt(curve: &HyperellipticCurve) -> HasseWittMatrix {
    HasseWittMatrix::new(curve)
}

/// Stable rank of the Hasse–Witt matrix; lies in [0, g].
pub fn p_rank(curve: &HyperellipticCurve) -> usize {
    let a = HasseWittMatrix::new(curve);
    rank(curve.field(), &a.frobenius_product())
}

pub type Slope = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub slope: Slope,
    pub length: u32,
}

/// Lower convex polygon from (0, 0) to (2g, g) with slopes in [0, 1],
/// strictly increasing, and integral breakpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    segments: Vec<Segment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Ordinary,
    Supersingular,
    Other,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Classification::Ordinary => "ordinary",
            Classification::Supersingular => "supersingular",
            Classification::Other => "other",
        };
        f.write_str(s)
    }
}

impl NewtonPolygon {
    /// Builds a polygon from `(slope, length)` pairs, checking every invariant.
    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("Newton polygon has no segments".into()));
        }
        let mut rise = Slope::zero();
        let mut width = 0u32;
        for (i, s) in segments.iter().enumerate() {
            if s.length == 0 {
                return Err(Error::InvalidInput("segment of length zero".into()));
            }
            if s.slope < Slope::zero() || s.slope > Slope::from_integer(1) {
                return Err(Error::InvalidInput(format!("slope {} outside [0, 1]", s.slope)));
            }
            if i > 0 && s.slope <= segments[i - 1].slope {
                return Err(Error::InvalidInput("slopes must strictly increase".into()));
            }
            rise += s.slope * Slope::from_integer(s.length as i64);
            width += s.length;
            if !rise.is_integer() {
                return Err(Error::InvalidInput(format!(
                    "breakpoint ({width}, {rise}) is not integral"
                )));
            }
        }
        if width % 2 != 0 || rise != Slope::from_integer(width as i64 / 2) {
            return Err(Error::InvalidInput(format!(
                "polygon ends at ({width}, {rise}), expected (2g, g)"
            )));
        }
        Ok(NewtonPolygon { segments })
    }

    /// Convenience: `(num, den, length)` triples.
    pub fn from_triples(triples: &[(i64, i64, u32)]) -> Result<Self> {
        let mut segs = Vec::with_capacity(triples.len());
        for &(num, den, length) in triples {
            if den <= 0 {
                return Err(Error::InvalidInput("slope denominator must be positive".into()));
            }
            segs.push(Segment { slope: Ratio::new(num, den), length });
        }
        Self::from_segments(segs)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn genus(&self) -> usize {
        self.segments.iter().map(|s| s.length as usize).sum::<usize>() / 2
    }

    pub fn triples(&self) -> Vec<(i64, i64, u32)> {
        self.segments
            .iter()
            .map(|s| (*s.slope.numer(), *s.slope.denom(), s.length))
            .collect()
    }

    /// Horizontal length of the slope-0 segment.
    pub fn slope_zero_length(&self) -> usize {
        self.segments
            .iter()
            .find(|s| s.slope.is_zero())
            .map_or(0, |s| s.length as usize)
    }

    pub fn classify(&self) -> Classification {
        let half = Slope::new(1, 2);
        if self
            .segments
            .iter()
            .all(|s| s.slope.is_zero() || s.slope == Slope::from_integer(1))
        {
            Classification::Ordinary
        } else if self.segments.iter().all(|s| s.slope == half) {
            Classification::Supersingular
        } else {
            Classification::Other
        }
    }

    /// Slope multiset is invariant under λ ↦ 1 − λ.
    pub fn is_symmetric(&self) -> bool {
        let one = Slope::from_integer(1);
        self.segments.iter().all(|s| {
            self.segments
                .iter()
                .any(|t| t.slope == one - s.slope && t.length == s.length)
        })
    }
}

impl Serialize for NewtonPolygon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.triples().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NewtonPolygon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(i64, i64, u32)>::deserialize(d)?;
        NewtonPolygon::from_triples(&triples).map_err(serde::de::Error::custom)
    }
}

/// p-adic valuation; `None` for zero.
pub fn valuation(a: &BigInt, p: u32) -> Option<u32> {
    if a.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut x = a.abs();
    loop {
        let (quot, rem) = x.div_rem(&pb);
        if !rem.is_zero() {
            return Some(v);
        }
        x = quot;
        v += 1;
    }
}

/// Lower convex hull of the points (i, v_p(a_i)/n), zero coefficients omitted.
pub fn newton_polygon(l: &LPolynomial, p: u32, n: u32) -> Result<NewtonPolygon> {
    if (p as u64).checked_pow(n) != Some(l.q) {
        return Err(Error::InvalidInput(format!("q = {} is not {p}^{n}", l.q)));
    }
    // hull in the integer coordinates (i, v_p(a_i)); slopes are divided by n
    let points: Vec<(i64, i64)> = l
        .coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, a)| valuation(a, p).map(|v| (i as i64, v as i64)))
        .collect();
    let mut hull: Vec<(i64, i64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point unless it lies strictly below the chord
            let cross = (x2 - x1) * (pt.1 - y1) - (y2 - y1) * (pt.0 - x1);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let segments = hull
        .windows(2)
        .map(|w| {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            Segment {
                slope: Ratio::new(dy, dx * n as i64),
                length: dx as u32,
            }
        })
        .collect();
    let np = NewtonPolygon::from_segments(segments)?;
    if np.genus() != l.genus {
        return Err(Error::InvalidInput("Newton polygon does not span [0, 2g]".into()));
    }
    Ok(np)
}

/// Convenience for records: polygon of the curve's own L-polynomial.
pub fn curve_newton_polygon(curve: &HyperellipticCurve, l: &LPolynomial) -> Result<NewtonPolygon> {
    let k = curve.field();
    newton_polygon(l, k.characteristic(), k.degree())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn np(triples: &[(i64, i64, u32)]) -> NewtonPolygon {
        NewtonPolygon::from_triples(triples).unwrap()
    }

    #[test]
    fn hasse_witt_examples() {
        let k3 = GaloisField::prime(3).unwrap();
        let c = HyperellipticCurve::from_ints(&k3, &[0, 1, 0, 1]).unwrap();
        assert_eq!(hasse_witt(&c).rows(), &[vec![Fq::ZERO]]);
        assert_eq!(p_rank(&c), 0);
        let c = HyperellipticCurve::from_ints(&k3, &[1, 0, 1, 1]).unwrap();
        assert_eq!(hasse_witt(&c).rows(), &[vec![k3.one()]]);
        assert_eq!(p_rank(&c), 1);
    }

    #[test]
    fn monomial_model_is_strictly_lower_triangular() {
        // f = x^(2g+1): f^((p-1)/2) is the single monomial x^((2g+1)(p-1)/2)
        for (p, g) in [(3u32, 2usize), (5, 2), (7, 3), (5, 3)] {
            let k = GaloisField::prime(p).unwrap();
            let mut coeffs = vec![0i64; 2 * g + 1];
            coeffs.push(1);
            let f = crate::ff::FqPoly::from_ints(&k, &coeffs);
            let h = f.pow(((p - 1) / 2) as u64);
            let e = (2 * g + 1) * (p as usize - 1) / 2;
            assert_eq!(h.degree(), Some(e));
            // build the matrix directly from the index formula
            let rows: Vec<Vec<Fq>> = (1..=g)
                .map(|i| (1..=g).map(|j| if i * p as usize == j + e { k.one() } else { Fq::ZERO }).collect())
                .collect();
            let a: Vec<Vec<Fq>> = (1..=g)
                .map(|i| (1..=g).map(|j| h.coeff(i * p as usize - j)).collect())
                .collect();
            assert_eq!(rows, a);
            // at most one nonzero entry per row, and it sits left of column i + 1
            for (i, row) in a.iter().enumerate() {
                assert!(row.iter().filter(|x| !x.is_zero()).count() <= 1);
                for (j, x) in row.iter().enumerate() {
                    if !x.is_zero() {
                        assert!(j < i, "entry ({i},{j}) not strictly lower");
                    }
                }
            }
        }
    }

    #[test]
    fn newton_polygon_examples() {
        let l = LPolynomial::from_ints(3, 1, &[1, 0, 3]).unwrap();
        let p = newton_polygon(&l, 3, 1).unwrap();
        assert_eq!(p.triples(), vec![(1, 2, 2)]);
        assert_eq!(p.classify(), Classification::Supersingular);
        let l = LPolynomial::from_ints(3, 1, &[1, 2, 3]).unwrap();
        let p = newton_polygon(&l, 3, 1).unwrap();
        assert_eq!(p.triples(), vec![(0, 1, 1), (1, 1, 1)]);
        assert_eq!(p.classify(), Classification::Ordinary);
        assert!(newton_polygon(&l, 3, 2).is_err());
        assert!(newton_polygon(&l, 5, 1).is_err());
    }

    #[test]
    fn slopes_over_nonprime_field_are_normalized() {
        // q = 9, L = 1 + 3T + 9T^2: v_3 = (0, 1, 2), normalized slopes 1/2
        let l = LPolynomial::from_ints(9, 1, &[1, 3, 9]).unwrap();
        assert_eq!(newton_polygon(&l, 3, 2).unwrap().triples(), vec![(1, 2, 2)]);
        // L = 1 + T + 9T^2 is ordinary
        let l = LPolynomial::from_ints(9, 1, &[1, 1, 9]).unwrap();
        assert_eq!(newton_polygon(&l, 3, 2).unwrap().classify(), Classification::Ordinary);
    }

    #[test]
    fn slope_zero_length_and_classify() {
        assert_eq!(np(&[(0, 1, 1), (1, 1, 1)]).slope_zero_length(), 1);
        assert_eq!(np(&[(1, 2, 2)]).slope_zero_length(), 0);
        let mixed = np(&[(1, 3, 3), (2, 3, 3)]);
        assert_eq!(mixed.slope_zero_length(), 0);
        assert_eq!(mixed.classify(), Classification::Other);
        assert!(mixed.is_symmetric());
        assert_eq!(np(&[(0, 1, 2), (1, 1, 2)]).classify(), Classification::Ordinary);
        assert_eq!(np(&[(1, 2, 4)]).classify(), Classification::Supersingular);
    }

    #[test]
    fn polygon_invariants_are_validated() {
        assert!(NewtonPolygon::from_triples(&[(1, 3, 2), (2, 3, 2)]).is_err());
        assert!(NewtonPolygon::from_triples(&[(1, 2, 2), (1, 2, 2)]).is_err());
        assert!(NewtonPolygon::from_triples(&[(0, 1, 1), (1, 1, 2)]).is_err());
        assert!(NewtonPolygon::from_triples(&[(3, 2, 2)]).is_err());
    }

    #[test]
    fn serde_as_triples() {
        let p = np(&[(1, 3, 3), (2, 3, 3)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1,3,3],[2,3,3]]");
        assert_eq!(serde_json::from_str::<NewtonPolygon>(&s).unwrap(), p);
        assert!(serde_json::from_str::<NewtonPolygon>("[[1,3,3]]").is_err());
    }
}
