//! Randomized invariants shared by the property tests and the acceptance suite.
#![allow(dead_code)]

use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use expsum::cyclo::CycloElem;
use expsum::deform;
use expsum::dwork::{apply_da, dual_basis, reduce_at, reduce_lists};
use expsum::ff::build_field;
use expsum::newton::newton_polygon;
use expsum::padic::{self, PadicElem};
use expsum::series::{ceil_q, PadicSeriesA};
use expsum::sympow::{reduce_even, reduce_odd, SymVector};

const PRIMES: [u64; 4] = [5, 7, 11, 13];
const PREC: i64 = 40;

pub const CASES: u32 = 100;

fn elem(ring: &'static padic::PadicRing, coords: &[i64], shift: i64) -> PadicElem {
    let c: Vec<i128> = coords.iter().take(ring.s).map(|&x| x as i128).collect();
    PadicElem::from_coords(ring, &c).shift_pi(shift).with_prec(PREC)
}

fn a_poly(ring: &'static padic::PadicRing, c: &[i64], alen: usize) -> Vec<PadicElem> {
    let mut v: Vec<PadicElem> = c.iter().map(|&x| PadicElem::from_i64(ring, x).with_prec(PREC)).collect();
    v.resize(alen, PadicElem::exact_zero(ring));
    v
}

/// Everything in the image of D_a reduces to zero.
pub fn image_of_d_reduces_to_zero_input() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
    (0usize..4, prop::collection::vec(prop::collection::vec(-20i64..20, 1..3), 1..6))
}

pub fn image_of_d_reduces_to_zero((pi, f): (usize, Vec<Vec<i64>>)) -> Result<(), TestCaseError> {
    let p = PRIMES[pi];
    let ring = padic::ring(p, 1).unwrap();
    let alen = f.len() + 4;
    let fl: Vec<Vec<PadicElem>> = f.iter().map(|c| a_poly(ring, c, alen)).collect();
    let mut g = apply_da(&fl, 3, alen);
    reduce_lists(&mut g, 3, 1, alen);
    for row in &g {
        for c in row {
            prop_assert!(c.is_zero(), "p={} residue {:?}", p, c);
        }
    }
    Ok(())
}

/// Coordinates of reduce(x^m) are the coefficients of the dual basis.
pub fn reduction_matches_dual_basis_input() -> impl Strategy<Value = (usize, usize)> {
    (0usize..4, 0usize..14)
}

pub fn reduction_matches_dual_basis((pi, m): (usize, usize)) -> Result<(), TestCaseError> {
    let p = PRIMES[pi];
    let ring = padic::ring(p, 1).unwrap();
    let alen = 8;
    let mut t = vec![vec![PadicElem::exact_zero(ring); alen]; (m + 1).max(3)];
    t[m][0] = PadicElem::one(ring);
    reduce_lists(&mut t, 3, 1, alen);
    for (i, row) in t.iter().enumerate() {
        let b = dual_basis(p, 3, i, m.max(2), alen, 1).unwrap();
        for n in 0..alen {
            prop_assert!((&row[n] - &b[m][n]).with_prec(PREC).is_zero(), "m={} i={} n={}", m, i, n);
        }
    }
    Ok(())
}

/// Specializing a = b commutes with the reduction.
pub fn reduction_commutes_with_specialization_input() -> impl Strategy<Value = (usize, Vec<Vec<i64>>, i64)> {
    (0usize..4, prop::collection::vec(prop::collection::vec(-9i64..9, 1..3), 1..9), -6i64..6)
}

pub fn reduction_commutes_with_specialization((pi, f, b): (usize, Vec<Vec<i64>>, i64)) -> Result<(), TestCaseError> {
    let p = PRIMES[pi];
    let ring = padic::ring(p, 1).unwrap();
    let alen = f.len() + 4;
    let bb = PadicElem::from_i64(ring, b);
    let eval = |c: &[PadicElem]| c.iter().rev().fold(PadicElem::exact_zero(ring), |acc, x| &(&acc * &bb) + x);
    let mut lists: Vec<Vec<PadicElem>> = f.iter().map(|c| a_poly(ring, c, alen)).collect();
    lists.resize(lists.len().max(3), vec![PadicElem::exact_zero(ring); alen]);
    let mut at: Vec<PadicElem> = lists.iter().map(|c| eval(c)).collect();
    reduce_lists(&mut lists, 3, 1, alen);
    reduce_at(&mut at, 3, &bb);
    for (row, x) in lists.iter().zip(&at) {
        prop_assert!(eval(row).eq_mod(x));
    }
    Ok(())
}

/// Series whose coefficients respect the growth line keep doing so under
/// the ring operations, and evaluation error stays within the claimed precision.
pub fn growth_is_preserved_input() -> impl Strategy<Value = (usize, i64, Vec<i64>, Vec<i64>, usize, i64)> {
    (0usize..4, 1i64..4, prop::collection::vec(1i64..1000, 4..20), prop::collection::vec(1i64..1000, 4..20), 1usize..4, -10i64..10)
}

pub fn growth_is_preserved((pi, slope_num, units, units2, cut, z): (usize, i64, Vec<i64>, Vec<i64>, usize, i64)) -> Result<(), TestCaseError> {
    let p = PRIMES[pi];
    let ring = padic::ring(p, 1).unwrap();
    let slope = Ratio::new(slope_num, p as i64 - 1);
    let floor = Ratio::from_integer(0);
    let make = |u: &[i64]| -> PadicSeriesA {
        let c = u.iter().enumerate().map(|(i, &x)| {
            let v = ceil_q(slope * Ratio::from_integer(i as i64) * Ratio::from_integer(p as i64 - 1));
            PadicElem::from_i64(ring, x).shift_pi(v).with_prec(PREC + 80)
        }).collect();
        PadicSeriesA::new(c, slope, floor).unwrap()
    };
    let s = make(&units);
    let t = make(&units2);
    prop_assert!(s.add(&t).unwrap().check().is_ok());
    prop_assert!(s.mul(&t).unwrap().check().is_ok());
    prop_assert!(s.shift(2).check().is_ok());
    prop_assert!(s.psi(p).check().is_ok());
    let short = PadicSeriesA { coeffs: s.coeffs[..s.len() - cut].to_vec(), slope, floor };
    let zz = PadicElem::from_i64(ring, z);
    let approx = short.eval(&zz);
    let full = s.eval(&zz);
    prop_assert!(approx.eq_mod(&full.with_prec(approx.prec())));
    Ok(())
}

/// det C(t) = 1 for the local solution of the deformation equation.
pub fn wronskian_is_one_input() -> impl Strategy<Value = (usize, i64, usize)> {
    (0usize..4, 0i64..13, 4usize..12)
}

pub fn wronskian_is_one((pi, z, nterms): (usize, i64, usize)) -> Result<(), TestCaseError> {
    let p = PRIMES[pi];
    let ring = padic::ring(p, 1).unwrap();
    let center = PadicElem::from_i64(ring, z);
    let sol = deform::solve_deformation(&center, nterms, 30).unwrap();
    prop_assert!(sol.wronskian_vanishes());
    Ok(())
}

pub fn padic_ring_axioms_input() -> impl Strategy<Value = (usize, usize, Vec<i64>, Vec<i64>, Vec<i64>, Vec<i64>)> {
    (0usize..4, 1usize..3, prop::collection::vec(-500i64..500, 2), prop::collection::vec(-500i64..500, 2), prop::collection::vec(-500i64..500, 2), prop::collection::vec(-2i64..4, 3))
}

pub fn padic_ring_axioms((pi, s, a, b, c, sh): (usize, usize, Vec<i64>, Vec<i64>, Vec<i64>, Vec<i64>)) -> Result<(), TestCaseError> {
    let ring = padic::ring(PRIMES[pi], s).unwrap();
    let (x, y, z) = (elem(ring, &a, sh[0]), elem(ring, &b, sh[1]), elem(ring, &c, sh[2]));
    prop_assert!((&(&x * &y) * &z).eq_mod(&(&x * &(&y * &z))));
    prop_assert!((&x * &(&y + &z)).eq_mod(&(&(&x * &y) + &(&x * &z))));
    prop_assert!((&x * &y).eq_mod(&(&y * &x)));
    prop_assert!((&(&x + &y) - &y).eq_mod(&x));
    if x.val().is_some() {
        let xi = x.inv().unwrap();
        let one = PadicElem::one(ring);
        prop_assert!((&x * &xi).eq_mod(&one));
    }
    Ok(())
}

pub fn cyclotomic_ring_axioms_input() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>, Vec<i64>, i64)> {
    (0usize..4, prop::collection::vec(-50i64..50, 13), prop::collection::vec(-50i64..50, 13), prop::collection::vec(-50i64..50, 13), 1i64..12)
}

pub fn cyclotomic_ring_axioms((pi, a, b, c, lam): (usize, Vec<i64>, Vec<i64>, Vec<i64>, i64)) -> Result<(), TestCaseError> {
    let p = PRIMES[pi];
    let mk = |v: &[i64]| CycloElem::from_small_counts(p, &v[..p as usize]);
    let (x, y, z) = (mk(&a), mk(&b), mk(&c));
    prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
    prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
    let l = lam % p as i64;
    if l != 0 {
        let g = |e: &CycloElem| e.galois_apply(l).unwrap();
        prop_assert_eq!(g(&x.mul(&y)), g(&x).mul(&g(&y)));
        prop_assert_eq!(g(&x.add(&y)), g(&x).add(&g(&y)));
    }
    Ok(())
}

pub fn finite_field_axioms_input() -> impl Strategy<Value = (usize, usize, u64, u64)> {
    (0usize..4, 1usize..4, any::<u64>(), any::<u64>())
}

pub fn finite_field_axioms((pi, s, i, j): (usize, usize, u64, u64)) -> Result<(), TestCaseError> {
    let fld = build_field(PRIMES[pi], s).unwrap();
    let q = fld.order();
    let (x, y) = (fld.from_index(i % q), fld.from_index(j % q));
    prop_assert_eq!(fld.frobenius(&fld.mul(&x, &y)), fld.mul(&fld.frobenius(&x), &fld.frobenius(&y)));
    prop_assert_eq!(fld.frobenius(&fld.add(&x, &y)), fld.add(&fld.frobenius(&x), &fld.frobenius(&y)));
    if let Some(xi) = fld.inv(&x) {
        prop_assert_eq!(fld.mul(&x, &xi), fld.one());
    } else {
        prop_assert!(fld.is_zero(&x));
    }
    Ok(())
}

/// ∂_a η reduces to zero in the symmetric-power complex. For even k, η is
/// taken in the submodule with no e_k component.
pub fn sympow_image_reduces_to_zero_input() -> impl Strategy<Value = (usize, Vec<i64>)> {
    (0usize..5, prop::collection::vec(-9i64..9, 42))
}

pub fn sympow_image_reduces_to_zero((kidx, vals): (usize, Vec<i64>)) -> Result<(), TestCaseError> {
    let (p, k) = [(7u64, 1u32), (7, 3), (7, 5), (7, 2), (11, 4)][kidx];
    let ring = padic::ring(p, 1).unwrap();
    let alen = 5;
    let mut eta = SymVector::zero(p, k, alen).unwrap();
    let mut it = vals.iter();
    let filled = if k % 2 == 0 { k as usize } else { k as usize + 1 };
    for slot in eta.slots.iter_mut().take(filled) {
        // the top two a-degrees stay empty so ∂_a is not truncated
        for c in slot.iter_mut().take(alen - 2) {
            *c = PadicElem::from_i64(ring, *it.next().unwrap()).with_prec(PREC);
        }
    }
    let xi = eta.partial();
    let r = if k % 2 == 1 { reduce_odd(&xi, p) } else { reduce_even(&xi, p) }.unwrap();
    for c in r.constants.iter().chain(&r.primitive).chain(&r.kernel) {
        prop_assert!(c.is_zero(), "k={} residue {:?}", k, c);
    }
    Ok(())
}

/// The hull of the hull vertices is the same polygon, lies below every
/// input point, and has increasing slopes.
pub fn hull_idempotent_input() -> impl Strategy<Value = Vec<Option<(i64, i64)>>> {
    prop::collection::vec(prop::option::weighted(0.8, (-20i64..20, 1i64..7)), 1..12)
}

pub fn hull_idempotent(vals: Vec<Option<(i64, i64)>>) -> Result<(), TestCaseError> {
    let mut pts: Vec<(usize, Option<Ratio<i64>>)> =
        vals.iter().enumerate().map(|(i, v)| (i, v.map(|(n, d)| Ratio::new(n, d)))).collect();
    pts[0].1.get_or_insert(Ratio::from_integer(0));
    let poly = newton_polygon(&pts).unwrap();
    let again = newton_polygon(&poly.vertices.iter().map(|&(i, v)| (i, Some(v))).collect::<Vec<_>>()).unwrap();
    prop_assert_eq!(&again, &poly);
    prop_assert!(poly.slopes.windows(2).all(|w| w[0].0 < w[1].0));
    for &(i, v) in &pts {
        if let Some(v) = v {
            let seg = poly.vertices.windows(2).find(|w| w[0].0 <= i && i <= w[1].0);
            if let Some(w) = seg {
                let t = Ratio::new((i - w[0].0) as i64, (w[1].0 - w[0].0) as i64);
                prop_assert!(v >= w[0].1 + (w[1].1 - w[0].1) * t);
            }
        }
    }
    Ok(())
}

fn run<S: Strategy>(strategy: S, check: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let mut runner = TestRunner::new(Config::with_cases(CASES));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

/// Every suite with CASES random cases each.
pub fn all_suites() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        ("image of D_a reduces to zero", run(image_of_d_reduces_to_zero_input(), image_of_d_reduces_to_zero)),
        ("reduction matches dual basis", run(reduction_matches_dual_basis_input(), reduction_matches_dual_basis)),
        ("reduction commutes with a = b", run(reduction_commutes_with_specialization_input(), reduction_commutes_with_specialization)),
        ("growth certification", run(growth_is_preserved_input(), growth_is_preserved)),
        ("Wronskian = 1", run(wronskian_is_one_input(), wronskian_is_one)),
        ("p-adic ring axioms", run(padic_ring_axioms_input(), padic_ring_axioms)),
        ("cyclotomic ring axioms", run(cyclotomic_ring_axioms_input(), cyclotomic_ring_axioms)),
        ("finite field axioms", run(finite_field_axioms_input(), finite_field_axioms)),
        ("image of ∂_a reduces to zero", run(sympow_image_reduces_to_zero_input(), sympow_image_reduces_to_zero)),
        ("hull idempotence", run(hull_idempotent_input(), hull_idempotent)),
    ]
}
