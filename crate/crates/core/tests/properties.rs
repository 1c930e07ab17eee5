use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use strata_forge::clutching::ClutchingTree;
use strata_forge::ff::{FqPoly, GaloisField};
use strata_forge::hyperelliptic::{HyperellipticCurve, LPolynomial};
use strata_forge::prank::{curve_newton_polygon, p_rank};
use strata_forge::symplectic::{
    charpoly_mod, coset_representative, multiplier, random_sp, symplectic_form, transvection, weyl_order,
    ModlMatrix,
};
use strata_forge::weil::{splitting_degree, SplittingDegree};

const FIELDS: [(u32, u32); 6] = [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (3, 3)];

fn field() -> impl Strategy<Value = GaloisField> {
    prop::sample::select(FIELDS.to_vec()).prop_map(|(p, n)| GaloisField::new(p, n).unwrap())
}

fn field_with_elems(k: usize) -> impl Strategy<Value = (GaloisField, Vec<u32>)> {
    field().prop_flat_map(move |f| {
        let q = f.order();
        (Just(f), prop::collection::vec(0..q, k))
    })
}

/// Curves of genus 1 or 2 over small fields; degree 3 to 6 models.
fn curve(max_q: u32) -> impl Strategy<Value = HyperellipticCurve> {
    prop::sample::select(FIELDS.to_vec())
        .prop_filter("small field", move |(p, n)| p.pow(*n) <= max_q)
        .prop_flat_map(|(p, n)| {
            let f = GaloisField::new(p, n).unwrap();
            let q = f.order();
            (Just(f), 3usize..=6).prop_flat_map(move |(f, d)| (Just(f), prop::collection::vec(0..q, d)))
        })
        .prop_filter_map("squarefree", |(f, mut c)| {
            c.push(1);
            HyperellipticCurve::new(FqPoly::from_values(&f, &c).ok()?).ok()
        })
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms((k, v) in field_with_elems(3)) {
        let e: Vec<_> = v.iter().map(|&x| k.element(x).unwrap()).collect();
        let (a, b, c) = (e[0], e[1], e[2]);
        prop_assert_eq!(k.add(k.add(a, b), c), k.add(a, k.add(b, c)));
        prop_assert_eq!(k.mul(k.mul(a, b), c), k.mul(a, k.mul(b, c)));
        prop_assert_eq!(k.mul(a, k.add(b, c)), k.add(k.mul(a, b), k.mul(a, c)));
        prop_assert_eq!(k.add(a, k.neg(a)), k.zero());
        if let Some(inv) = k.inv(a) {
            prop_assert_eq!(k.mul(a, inv), k.one());
        } else {
            prop_assert!(a.is_zero());
        }
        prop_assert_eq!(k.frobenius(k.add(a, b)), k.add(k.frobenius(a), k.frobenius(b)));
        prop_assert_eq!(k.pow(a, k.order() as u64), a);
        // quadratic character is multiplicative
        prop_assert_eq!(k.chi(k.mul(a, b)), k.chi(a) * k.chi(b));
    }

    #[test]
    fn l_polynomial_shape(c in curve(27)) {
        let l = c.l_polynomial().unwrap();
        let g = c.genus();
        let q = c.q();
        prop_assert_eq!(l.coeffs.len(), 2 * g + 1);
        prop_assert!(l.coeffs[0].is_one());
        prop_assert!(l.satisfies_functional_equation());
        for (i, a) in l.coeffs.iter().enumerate() {
            let bound = binomial(2 * g as u64, i as u64) * (q as f64).powf(i as f64 / 2.0);
            prop_assert!(a.abs().to_f64().unwrap() <= bound + 1e-9, "a_{} = {} exceeds {}", i, a, bound);
        }
        let h = l.picard_order();
        prop_assert!(h > BigInt::zero());
        prop_assert_eq!(&h, &l.eval(&BigInt::one()));
        // Hasse–Weil interval for #Pic⁰
        let s = (q as f64).sqrt();
        let h = h.to_f64().unwrap();
        prop_assert!(h >= (s - 1.0).powi(2 * g as i32) - 1e-6 && h <= (s + 1.0).powi(2 * g as i32) + 1e-6);
        // point counts round-trip through the power sums
        let counts = c.point_counts().unwrap();
        for (k, n) in counts.iter().enumerate() {
            prop_assert_eq!(l.predicted_point_count(k + 1), BigInt::from(*n));
        }
    }

    #[test]
    fn newton_polygon_and_p_rank(c in curve(27)) {
        let l = c.l_polynomial().unwrap();
        let np = curve_newton_polygon(&c, &l).unwrap();
        prop_assert!(np.is_symmetric());
        prop_assert_eq!(np.genus(), c.genus());
        prop_assert_eq!(np.slope_zero_length(), p_rank(&c));
        prop_assert!(p_rank(&c) <= c.genus());
    }

    #[test]
    fn frobenius_charpoly_mod_l(c in curve(25), l in prop::sample::select(vec![3u64, 5, 7, 11])) {
        let lp = c.l_polynomial().unwrap();
        prop_assume!(c.q() % l != 0);
        let p = charpoly_mod(&lp, l).unwrap();
        let g = c.genus();
        let q = c.q() % l;
        prop_assert_eq!(p.len(), 2 * g + 1);
        prop_assert_eq!(p[2 * g], 1);
        // self-duality: a_i = q^{g-i} a_{2g-i}
        for i in 0..g {
            let qi = (0..g - i).fold(1, |acc, _| acc * q % l);
            prop_assert_eq!(p[i], qi * p[2 * g - i] % l);
        }
        // P(1) ≡ #Pic⁰ (mod l), so l | #Pic⁰ exactly when 1 is an eigenvalue
        let at_one = p.iter().sum::<u64>() % l;
        let h = lp.picard_order() % BigInt::from(l);
        prop_assert_eq!(BigInt::from(at_one), h);
    }

    #[test]
    fn splitting_degree_divides_weyl_order(c in curve(9)) {
        prop_assume!(c.genus() == 2);
        let lp = c.l_polynomial().unwrap();
        match splitting_degree(&lp).unwrap() {
            SplittingDegree::Exact(d) | SplittingDegree::CertifiedMaximal(d) => {
                prop_assert_eq!(weyl_order(2) % d as u128, 0);
            }
            SplittingDegree::Reducible => prop_assert!(!strata_forge::weil::is_irreducible(&lp)),
            SplittingDegree::Undetermined => {}
        }
    }

    #[test]
    fn tree_labelings_and_coalescing(genera in prop::collection::vec(1u32..=3, 1..=5), parents in prop::collection::vec(any::<prop::sample::Index>(), 4), f in 0u32..=8) {
        let n = genera.len();
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (parents[v - 1].index(v), v)).collect();
        let t = ClutchingTree::new(genera.clone(), edges).unwrap();
        let g = t.genus();
        prop_assume!(f <= g);

        let ls = t.labelings(f).unwrap();
        // independent count: tuples 0 ≤ f_v ≤ g_v with sum f
        let mut ways = vec![0u64; g as usize + 1];
        ways[0] = 1;
        for &gv in &genera {
            let mut next = vec![0u64; g as usize + 1];
            for (s, w) in ways.iter().enumerate() {
                for x in 0..=gv as usize {
                    if s + x <= g as usize {
                        next[s + x] += w;
                    }
                }
            }
            ways = next;
        }
        prop_assert_eq!(ls.len() as u64, ways[f as usize]);
        for w in ls.windows(2) {
            prop_assert!(w[0] > w[1]);
        }
        for l in &ls {
            prop_assert_eq!(t.prank_compact(l).unwrap(), f);
        }
        prop_assert_eq!(t.stratum_dim(f).unwrap(), g as i64 + f as i64 - n as i64);

        for e in 0..t.edges().len() {
            let c = t.coalesce(e).unwrap();
            prop_assert_eq!(c.genus(), g);
            prop_assert_eq!(c.size(), n - 1);
            prop_assert!(t.refines(&c));
        }
        prop_assert!(t.refines(&ClutchingTree::single(g).unwrap()));

        let again = ClutchingTree::parse(&t.to_string()).unwrap();
        prop_assert!(again.is_isomorphic(&t));
        let rec = t.to_record(ls.first().map(|l| l.as_slice()));
        let (back, lab) = ClutchingTree::from_record(&rec).unwrap();
        prop_assert_eq!(back, t);
        prop_assert_eq!(lab.as_ref(), ls.first());
    }

    #[test]
    fn multiplier_is_multiplicative(
        g in 1usize..=3,
        l in prop::sample::select(vec![3u64, 5, 7]),
        s1 in any::<u64>(),
        s2 in any::<u64>(),
        m1 in 1u64..7,
        m2 in 1u64..7,
    ) {
        let (m1, m2) = (m1 % l, m2 % l);
        prop_assume!(m1 != 0 && m2 != 0);
        let a = random_sp(g, l, s1).unwrap().mul(&coset_representative(g, l, m1).unwrap());
        let b = random_sp(g, l, s2).unwrap().mul(&coset_representative(g, l, m2).unwrap());
        prop_assert_eq!(multiplier(&a).unwrap(), m1);
        prop_assert_eq!(multiplier(&b).unwrap(), m2);
        prop_assert_eq!(multiplier(&a.mul(&b)).unwrap(), m1 * m2 % l);

        // characteristic polynomial of a symplectic similitude is self-dual
        let cp = a.charpoly();
        let n = 2 * g;
        for i in 0..g {
            let mi = (0..g - i).fold(1, |acc, _| acc * m1 % l);
            prop_assert_eq!(cp[i], mi * cp[n - i] % l);
        }
    }

    #[test]
    fn transvections_are_symplectic(g in 1usize..=3, l in prop::sample::select(vec![3u64, 5, 7]), v in prop::collection::vec(0u64..7, 6), c in 1u64..7) {
        let v: Vec<u64> = v[..2 * g].iter().map(|x| x % l).collect();
        let t = transvection(&v, c % l, l);
        let j = symplectic_form(g, l);
        prop_assert_eq!(t.transpose().mul(&j).mul(&t), j);
        prop_assert_eq!(t.det(), 1);
    }
}

#[test]
fn sampled_census_is_deterministic() {
    use strata_forge::experiments::{census, CensusMode};
    let k = GaloisField::prime(11).unwrap();
    let mode = CensusMode::Sample { samples: 300, seed: 42 };
    let a = census(2, &k, mode.clone()).unwrap();
    let b = census(2, &k, mode).unwrap();
    assert_eq!(a, b);
    let c = census(2, &k, CensusMode::Sample { samples: 300, seed: 43 }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn lpoly_from_ints_matches_curve() {
    // y² = x³ + x + 1 over F_5 has 9 projective points
    let k = GaloisField::prime(5).unwrap();
    let c = HyperellipticCurve::from_ints(&k, &[1, 1, 0, 1]).unwrap();
    assert_eq!(c.l_polynomial().unwrap(), LPolynomial::from_ints(5, 1, &[1, 3, 5]).unwrap());
    assert_eq!(ModlMatrix::identity(3, 2).charpoly(), vec![1, 1, 1]);
}
