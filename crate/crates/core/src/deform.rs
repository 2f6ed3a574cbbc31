//! The deformation system dC/da = B(a)C, B = [[0, π], [−πa/3, 0]], for the
//! cubic family: local solution matrices, their Wronskian, the Airy equation,
//! and the Frobenius checks that tie the solutions to 𝔄(a).
//!
//! Series are in t = a − z and always handled coefficient-wise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::dwork::{self, DworkError};
use crate::ff::{self, FqElem};
use crate::linalg::{self, Mat};
use crate::padic::{self, PadicElem, PadicError, INF_PREC};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeformError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Dwork(#[from] DworkError),
    #[error(transparent)]
    Field(#[from] ff::FfError),
    #[error("precision exhausted: coefficient {index} carries {have} of {needed} π-digits")]
    PrecisionExhausted { index: usize, have: i64, needed: i64 },
    #[error("determinant at point {index} differs from the expected value")]
    ConstancyViolation { index: usize },
    #[error("intertwining residual has π-valuation {have}, needed {needed}")]
    IntertwineViolation { have: i64, needed: i64 },
    #[error("invalid input: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, DeformError>;

/// Matrix-valued series in t, truncated below t^len.
pub type TSeries = Vec<Mat>;

#[derive(Debug, Clone)]
pub struct LocalSolution {
    pub center: PadicElem,
    /// coeffs[n] is the 2×2 coefficient of (a − z)^n.
    pub coeffs: TSeries,
    /// Lowest absolute precision over all retained coefficients.
    pub certified_prec: i64,
}

fn zero_mat(ring: &'static padic::PadicRing) -> Mat {
    vec![vec![PadicElem::exact_zero(ring); 2]; 2]
}

fn inv_int(ring: &'static padic::PadicRing, n: i64) -> PadicElem {
    PadicElem::from_rational(ring, &BigRational::new(BigInt::one(), BigInt::from(n)))
}

/// Power-series solution of dC/da = B(a)C with C(z, z) = I, to t^{nterms-1}.
///
/// (n+1)C_{n+1} = B_0 C_n + B_1 C_{n−1} with B_0 = B(z) and B_1 = dB/da.
pub fn solve_deformation(z: &PadicElem, nterms: usize, prec: i64) -> Result<LocalSolution> {
    if nterms < 2 {
        return Err(DeformError::BadInput(format!("nterms = {nterms} must be at least 2")));
    }
    let ring = z.ring();
    let pi = PadicElem::pi(ring);
    let third = inv_int(ring, 3);
    let c_low = (&pi * &third).neg();
    let mut coeffs: TSeries = vec![linalg::identity(ring, 2)];
    for n in 0..nterms - 1 {
        let cn = &coeffs[n];
        let prev = if n > 0 { Some(&coeffs[n - 1]) } else { None };
        let scale = inv_int(ring, n as i64 + 1);
        let mut next = zero_mat(ring);
        for col in 0..2 {
            // row 0: π·C[1]; row 1: −(π/3)(z·C[0] + C_{n−1}[0])
            next[0][col] = &(&pi * &cn[1][col]) * &scale;
            let mut r1 = z * &cn[0][col];
            if let Some(pv) = prev {
                r1 = &r1 + &pv[0][col];
            }
            next[1][col] = &(&c_low * &r1) * &scale;
        }
        coeffs.push(next);
    }
    let mut certified = INF_PREC;
    for (i, c) in coeffs.iter().enumerate() {
        for x in c.iter().flatten() {
            if x.prec() < prec {
                return Err(DeformError::PrecisionExhausted { index: i, have: x.prec(), needed: prec });
            }
            certified = certified.min(x.prec());
        }
    }
    for c in coeffs.iter_mut() {
        for x in c.iter_mut().flatten() {
            x.set_prec(prec);
        }
    }
    Ok(LocalSolution {
        center: z.clone(),
        coeffs,
        certified_prec: certified.min(prec),
    })
}

fn ser_mul(a: &[PadicElem], b: &[PadicElem], n: usize) -> Vec<PadicElem> {
    crate::series::mul_trunc(a, b, n)
}

fn entry(s: &TSeries, i: usize, j: usize) -> Vec<PadicElem> {
    s.iter().map(|m| m[i][j].clone()).collect()
}

/// Product of matrix series mod t^n.
pub fn tmul(a: &TSeries, b: &TSeries, n: usize) -> TSeries {
    let ring = a[0][0][0].ring();
    let mut out: TSeries = vec![zero_mat(ring); n];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let prod = ser_mul(&entry(a, i, k), &entry(b, k, j), n);
                for (m, x) in prod.into_iter().enumerate() {
                    out[m][i][j] = &out[m][i][j] + &x;
                }
            }
        }
    }
    out
}

impl LocalSolution {
    pub fn nterms(&self) -> usize {
        self.coeffs.len()
    }

    /// det C as a series in t.
    pub fn wronskian(&self) -> Vec<PadicElem> {
        let n = self.nterms();
        let ad = ser_mul(&entry(&self.coeffs, 0, 0), &entry(&self.coeffs, 1, 1), n);
        let bc = ser_mul(&entry(&self.coeffs, 0, 1), &entry(&self.coeffs, 1, 0), n);
        ad.iter().zip(&bc).map(|(x, y)| x - y).collect()
    }

    /// Lowest π-valuation of det C − 1 over the retained terms (prec if it vanishes).
    pub fn wronskian_residual(&self) -> i64 {
        let ring = self.center.ring();
        let mut w = self.wronskian();
        w[0] = &w[0] - &PadicElem::one(ring);
        min_val(&w, self.certified_prec)
    }

    /// det C − 1 vanishes to the precision of each coefficient.
    pub fn wronskian_vanishes(&self) -> bool {
        let ring = self.center.ring();
        let mut w = self.wronskian();
        w[0] = &w[0] - &PadicElem::one(ring);
        w.iter().all(|x| x.is_zero())
    }

    /// y'' + (π²a/3)y for y = C[0][0], through t^{nterms−3}.
    pub fn airy_residual(&self) -> Vec<PadicElem> {
        let ring = self.center.ring();
        let y = entry(&self.coeffs, 0, 0);
        let n = y.len();
        let pi2_3 = &PadicElem::pi(ring).pow(2) * &inv_int(ring, 3);
        (0..n.saturating_sub(2))
            .map(|m| {
                let ypp = y[m + 2].scale_int(((m + 2) * (m + 1)) as i64);
                // (z + t)·y at t^m
                let mut ay = &self.center * &y[m];
                if m > 0 {
                    ay = &ay + &y[m - 1];
                }
                &ypp + &(&pi2_3 * &ay)
            })
            .collect()
    }

    /// Inverse matrix series, using det C = 1: the adjugate.
    pub fn inverse(&self) -> TSeries {
        self.coeffs
            .iter()
            .map(|m| vec![vec![m[1][1].clone(), m[0][1].neg()], vec![m[1][0].neg(), m[0][0].clone()]])
            .collect()
    }
}

/// Lowest π-valuation, with entries that vanish counting at their own precision.
fn min_val(xs: &[PadicElem], cap: i64) -> i64 {
    xs.iter().map(|x| x.val().unwrap_or(x.prec())).min().unwrap_or(cap).min(cap)
}

/// Series (z + t)^p − z^p in t, mod t^n.
fn frobenius_shift(z: &PadicElem, p: u64, n: usize) -> Vec<PadicElem> {
    let ring = z.ring();
    let mut out = vec![PadicElem::exact_zero(ring); n];
    let mut binom = BigInt::one();
    for (m, slot) in out.iter_mut().enumerate().take((p as usize + 1).min(n)) {
        if m > 0 {
            binom = binom * BigInt::from(p as usize - m + 1) / BigInt::from(m);
            *slot = &PadicElem::from_bigint(ring, &binom) * &z.pow(p - m as u64);
        }
    }
    out
}

/// C(z^p, a^p) as a series in t = a − z.
pub fn pulled_back(sol: &LocalSolution, z: &PadicElem, p: u64) -> TSeries {
    let n = sol.nterms();
    let ring = z.ring();
    let u = frobenius_shift(z, p, n);
    let mut out: TSeries = vec![zero_mat(ring); n];
    let mut upow: Vec<PadicElem> = vec![PadicElem::exact_zero(ring); n];
    upow[0] = PadicElem::one(ring);
    for c in sol.coeffs.iter() {
        for (m, w) in upow.iter().enumerate() {
            if w.is_zero() && w.prec() >= INF_PREC {
                continue;
            }
            for i in 0..2 {
                for j in 0..2 {
                    out[m][i][j] = &out[m][i][j] + &(&c[i][j] * w);
                }
            }
        }
        upow = ser_mul(&upow, &u, n);
    }
    out
}

/// 𝔄(a) re-expanded around a = z, mod t^n, from the a-series of the cubic family.
pub fn frob_series_at(fa: &dwork::FrobMatrixA, z: &PadicElem, n: usize) -> TSeries {
    let ring = z.ring();
    let len = fa.entries[0][0].len();
    let zpow: Vec<PadicElem> = {
        let mut v = vec![PadicElem::one(ring)];
        for i in 1..len {
            let next = &v[i - 1] * z;
            v.push(next);
        }
        v
    };
    let mut out: TSeries = vec![zero_mat(ring); n];
    for (i, row) in fa.entries.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let tail = crate::series::ceil_q(e.bound(e.len()) * crate::series::Q::from_integer(ring.p as i64 - 1));
            for (m, slot) in out.iter_mut().enumerate() {
                let mut acc = PadicElem::exact_zero(ring);
                let mut binom = BigInt::one();
                for k in m..len {
                    if k > m {
                        binom = binom * BigInt::from(k) / BigInt::from(k - m);
                    }
                    let term = &e.coeffs[k].lift_to(ring) * &zpow[k - m];
                    acc = &acc + &(&term * &PadicElem::from_bigint(ring, &binom));
                }
                slot[i][j] = acc.with_prec(tail);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct IntertwineReport {
    /// Lowest valuation of the t^m coefficients, m ≥ 1, of C(z,a)^{-1}𝔄(a)C(z^p,a^p).
    pub residual_val: i64,
    /// Lowest valuation of the t^0 coefficient minus 𝔄(z).
    pub constant_val: i64,
    pub prec: i64,
}

/// Checks C(z,a)^{-1}·𝔄(a)·C(z^p,a^p) = 𝔄(z) through t^{nterms−1}, z the
/// Teichmüller lift of z̄ ∈ F_p (z̄ = 0 allowed).
pub fn check_frob_intertwine(p: u64, zbar: u64, nterms: usize, prec: i64) -> Result<IntertwineReport> {
    let ring = padic::ring(p, 1)?;
    let z = if zbar % p == 0 {
        PadicElem::exact_zero(ring)
    } else {
        dwork::teich_point(ring, &ring.fld.from_int(zbar as i64))?
    };
    let b = crate::series::bprime_param(p) * crate::series::Q::from_integer(p as i64 - 1);
    // a-tail beyond atrunc must sit past prec + 2
    let atrunc = crate::series::ceil_q(crate::series::Q::from_integer(prec + 2) / b) as usize + nterms;
    let fa = dwork::frob_matrix(p, 3, atrunc, prec + 4)?;
    let a_t = frob_series_at(&fa, &z, nterms);
    let sol = solve_deformation(&z, nterms, prec + 4)?;
    let zp = z.pow(p);
    let sol_p = solve_deformation(&zp, nterms, prec + 4)?;
    let cp = pulled_back(&sol_p, &z, p);
    let x = tmul(&tmul(&sol.inverse(), &a_t, nterms), &cp, nterms);
    let mut residual = Vec::new();
    for m in x.iter().skip(1) {
        residual.extend(m.iter().flatten().cloned());
    }
    let a_z = fa.eval(&z);
    let diff: Vec<PadicElem> = x[0].iter().flatten().zip(a_z.iter().flatten()).map(|(u, v)| u - v).collect();
    let report = IntertwineReport {
        residual_val: min_val(&residual, prec),
        constant_val: min_val(&diff, prec),
        prec,
    };
    Ok(report)
}

/// Same as `check_frob_intertwine` but fails when the residual is below prec − slack.
pub fn require_frob_intertwine(p: u64, zbar: u64, nterms: usize, prec: i64, slack: i64) -> Result<IntertwineReport> {
    let r = check_frob_intertwine(p, zbar, nterms, prec)?;
    let have = r.residual_val.min(r.constant_val);
    if have < prec - slack {
        return Err(DeformError::IntertwineViolation { have, needed: prec - slack });
    }
    Ok(r)
}

/// q when q ≡ 1 mod 3, else −g_{2s}((q²−1)/3); the value lives in W(F_{p^{2s}}) in the second case.
pub fn expected_frobenius_det(p: u64, s: usize, prec: i64) -> Result<PadicElem> {
    let q = p.pow(s as u32);
    if q % 3 == 1 {
        Ok(PadicElem::from_i64(padic::ring(p, s)?, q as i64))
    } else {
        let j = ((q * q - 1) / 3) as i64;
        Ok(padic::gauss_sum(p, 2 * s, j, prec)?.neg())
    }
}

/// det of the s-fold Frobenius on the cubic fibre at up to `npoints` distinct
/// Teichmüller units of F_{p^s}; all must agree with `expected_frobenius_det`.
pub fn check_det_frobenius(p: u64, s: usize, npoints: usize, prec: i64) -> Result<(PadicElem, Vec<PadicElem>)> {
    let q = p.pow(s as u32);
    if q % 3 != 1 && s != 1 {
        return Err(DeformError::BadInput("q ≡ 2 mod 3 is supported for s = 1 only".into()));
    }
    let ring = padic::ring(p, s)?;
    let expected = expected_frobenius_det(p, s, prec)?;
    let pts: Vec<FqElem> = ring.fld.elements().filter(|x| !ring.fld.is_zero(x)).take(npoints).collect();
    let dets: Vec<PadicElem> = pts
        .par_iter()
        .map(|zb| -> Result<PadicElem> {
            let z = dwork::teich_point(ring, zb)?;
            let a = dwork::frob_product_at(&z, 3, prec)?;
            Ok((&(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0])).with_prec(prec))
        })
        .collect::<Result<_>>()?;
    for (i, d) in dets.iter().enumerate() {
        let d_up = d.lift_to(expected.ring());
        if !d_up.eq_mod(&expected) {
            return Err(DeformError::ConstancyViolation { index: i });
        }
    }
    Ok((expected, dets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_center_and_wronskian() {
        let r = padic::ring(7, 1).unwrap();
        let z = dwork::teich_point(r, &r.fld.from_int(3)).unwrap();
        let sol = solve_deformation(&z, 12, 60).unwrap();
        let id = linalg::identity(r, 2);
        for i in 0..2 {
            for j in 0..2 {
                assert!(sol.coeffs[0][i][j].eq_mod(&id[i][j]));
            }
        }
        // one division by 7 costs p - 1 digits of absolute precision
        assert!(sol.wronskian_vanishes());
        assert!(sol.wronskian_residual() >= 60 - 6);
        assert!(min_val(&sol.airy_residual(), 60) >= 60);
    }

    #[test]
    fn prefixes_agree() {
        let r = padic::ring(5, 1).unwrap();
        let z = PadicElem::exact_zero(r);
        let a = solve_deformation(&z, 8, 40).unwrap();
        let b = solve_deformation(&z, 14, 40).unwrap();
        for (x, y) in a.coeffs.iter().zip(&b.coeffs) {
            for (u, v) in x.iter().flatten().zip(y.iter().flatten()) {
                assert!(u.eq_mod(v));
            }
        }
    }
}
