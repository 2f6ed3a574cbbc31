//! L-polynomials with exact cyclotomic or p-adic coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::cyclo::CycloElem;
use crate::padic::{PadicElem, PadicRing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LKind {
    /// Fibre over λ ∈ F_{p^s}, λ as coordinates in the ff_core basis.
    Fibre { lambda: Vec<u64>, s: usize },
    Sympow { k: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LMeta {
    pub p: u64,
    pub d: u32,
    pub kind: LKind,
}

#[derive(Debug, Clone)]
pub enum Coeffs {
    Exact(Vec<CycloElem>),
    Padic(Vec<PadicElem>),
}

#[derive(Debug, Clone)]
pub struct LPoly {
    pub coeffs: Coeffs,
    pub meta: LMeta,
}

impl LPoly {
    pub fn exact(coeffs: Vec<CycloElem>, meta: LMeta) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        LPoly {
            coeffs: Coeffs::Exact(coeffs),
            meta,
        }
    }

    pub fn padic(coeffs: Vec<PadicElem>, meta: LMeta) -> Self {
        LPoly {
            coeffs: Coeffs::Padic(coeffs),
            meta,
        }
    }

    /// Number of stored coefficients minus one.
    pub fn degree(&self) -> usize {
        match &self.coeffs {
            Coeffs::Exact(c) => c.len() - 1,
            Coeffs::Padic(c) => c.len() - 1,
        }
    }

    pub fn exact_coeffs(&self) -> Option<&[CycloElem]> {
        match &self.coeffs {
            Coeffs::Exact(c) => Some(c),
            Coeffs::Padic(_) => None,
        }
    }

    pub fn padic_coeffs(&self) -> Option<&[PadicElem]> {
        match &self.coeffs {
            Coeffs::Padic(c) => Some(c),
            Coeffs::Exact(_) => None,
        }
    }

    /// ord_p of each coefficient; `None` means zero (exact) or below precision (p-adic).
    pub fn valuations(&self) -> Vec<Option<Ratio<i64>>> {
        match &self.coeffs {
            Coeffs::Exact(c) => c.iter().map(exact_ord).collect(),
            Coeffs::Padic(c) => c.iter().map(|x| x.ord_p()).collect(),
        }
    }

    /// Coefficients under ζ ↦ θ(1).
    pub fn embedded(&self, ring: &'static PadicRing, prec: i64) -> crate::cyclo::Result<Vec<PadicElem>> {
        match &self.coeffs {
            Coeffs::Exact(c) => {
                let z = crate::padic::theta_one(ring, prec)?;
                Ok(c.iter().map(|x| x.embed_with(&z).with_prec(prec)).collect())
            }
            Coeffs::Padic(c) => Ok(c.iter().map(|x| x.lift_to(ring).with_prec(prec)).collect()),
        }
    }
}

/// Exact ord_p of a cyclotomic integer, by dividing out the content and
/// then (1 - ζ) as long as the coefficient sum is divisible by p.
pub fn exact_ord(x: &CycloElem) -> Option<Ratio<i64>> {
    if x.is_zero() {
        return None;
    }
    let p = x.p as i64;
    let pb = BigInt::from(p);
    let mut content = BigInt::zero();
    for c in &x.coeffs {
        content = content.gcd(c);
    }
    let mut vp = 0i64;
    while content.is_multiple_of(&pb) {
        content /= &pb;
        vp += 1;
    }
    let mut y = x.div_exact_int(&pb.pow(vp as u32)).unwrap();
    let mut k = 0i64;
    loop {
        let total: BigInt = y.coeffs.iter().sum();
        if !total.is_multiple_of(&pb) {
            break;
        }
        y = div_one_minus_zeta(&y, &total / &pb);
        k += 1;
    }
    Some(Ratio::new(vp * (p - 1) + k, p - 1))
}

fn div_one_minus_zeta(x: &CycloElem, top: BigInt) -> CycloElem {
    let n = x.coeffs.len();
    let mut y = vec![BigInt::zero(); n];
    y[n - 1] = top.clone();
    y[0] = &x.coeffs[0] - &top;
    for j in 1..n - 1 {
        y[j] = &x.coeffs[j] + &y[j - 1] - &top;
    }
    CycloElem {
        p: x.p,
        coeffs: y,
    }
}

/// Coefficients c_0..c_n of exp(Σ_{m≥1} sums[m-1] T^m/m), via m c_m = Σ sums[i-1] c_{m-i}.
pub fn exp_of_power_sums(sums: &[CycloElem]) -> Vec<CycloElem> {
    let p = sums[0].p;
    let mut c = vec![CycloElem::one(p)];
    for m in 1..=sums.len() {
        let mut acc = CycloElem::zero(p);
        for i in 1..=m {
            acc = acc.add(&sums[i - 1].mul(&c[m - i]));
        }
        let cm = acc
            .div_exact_int(&BigInt::from(m))
            .expect("power sums of algebraic integers give integral coefficients");
        c.push(cm);
    }
    c
}

/// Inverse of [`exp_of_power_sums`]: power sums from coefficients.
pub fn power_sums_of(coeffs: &[CycloElem], n: usize) -> Vec<CycloElem> {
    let p = coeffs[0].p;
    let get = |i: usize| coeffs.get(i).cloned().unwrap_or_else(|| CycloElem::zero(p));
    let mut s: Vec<CycloElem> = Vec::new();
    for m in 1..=n {
        let mut acc = get(m).scale(&BigInt::from(m));
        for i in 1..m {
            acc = acc.sub(&s[i - 1].mul(&get(m - i)));
        }
        s.push(acc);
    }
    s
}

/// True if every coefficient is a rational integer.
pub fn all_integers(c: &[CycloElem]) -> bool {
    c.iter().all(|x| x.as_integer().is_some())
}

pub fn ratio_to_string(r: &Ratio<i64>) -> String {
    if r.denom().is_zero() || *r.denom() == 1 {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom().abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ord_of_simple_elements() {
        let p = 7;
        assert_eq!(exact_ord(&CycloElem::from_int(p, 49)), Some(Ratio::from_integer(2)));
        let one_minus = CycloElem::one(p).sub(&CycloElem::zeta_pow(p, 1));
        assert_eq!(exact_ord(&one_minus), Some(Ratio::new(1, 6)));
        assert_eq!(exact_ord(&one_minus.pow(5).scale(&BigInt::from(14))), Some(Ratio::new(11, 6)));
        assert_eq!(exact_ord(&CycloElem::zero(p)), None);
    }

    #[test]
    fn power_sum_round_trip() {
        let p = 5;
        let c = vec![
            CycloElem::one(p),
            CycloElem::from_small_counts(p, &[1, 2, 0, 3, 0]),
            CycloElem::from_int(p, 25),
        ];
        let s = power_sums_of(&c, 4);
        let back = exp_of_power_sums(&s);
        assert_eq!(&back[..3], &c[..]);
        assert!(back[3].is_zero() && back[4].is_zero());
    }
}
