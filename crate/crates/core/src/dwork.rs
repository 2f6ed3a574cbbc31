//! Dwork cohomology of the fibres x^d + a·x: the series F(a, x), reduction
//! modulo D_a, the Frobenius matrix 𝔄(a) and fibre L-polynomials from it.
//!
//! Matrices use the row convention α(x^i) = Σ_j 𝔄_ij x^j on the basis
//! x^1..x^{d-1}, so composites multiply left to right.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::ff::{FieldDescriptor, FqElem};
use crate::linalg::{self, Mat};
use crate::lpoly::{LKind, LMeta, LPoly};
use crate::padic::{self, PadicElem, PadicError, PadicRing, INF_PREC};
use crate::series::{self, PadicSeriesA, SeriesError, XSeries, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DworkError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("reduction does not converge: b - 1/(p-1) = {0} is not positive")]
    NonConvergent(String),
    #[error("truncation to {basis} monomials certifies only {certified} of {needed} π-digits")]
    TruncationUncertified { basis: usize, certified: String, needed: i64 },
    #[error("hypothesis p >= d + 6 fails for p = {p}, d = {d}")]
    HypothesisFailed { p: u64, d: u32 },
    #[error("invalid parameters: {0}")]
    BadInput(String),
}

pub type Result<T> = std::result::Result<T, DworkError>;

pub(crate) fn check_params(p: u64, d: u32) -> Result<()> {
    if p < 3 || !crate::ff::is_prime(p) {
        return Err(DworkError::BadInput(format!("p = {p} must be an odd prime")));
    }
    if d < 2 || (d as u64) % p == 0 {
        return Err(DworkError::BadInput(format!("d = {d} must be at least 2 and prime to p")));
    }
    Ok(())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// θ_0..θ_{n-1} in W(F_p)[π] at full mantissa precision.
pub(crate) fn thetas(p: u64, n: usize) -> Result<Vec<PadicElem>> {
    Ok(padic::splitting_coeffs(p, n.max(1) - 1, INF_PREC)?.theta)
}

/// ord_p lower bound for the coefficient of a^n in H_r: b'(r/d + (1 - 1/d)n).
fn h_floor(p: u64, d: u32, r: usize) -> Q {
    series::bprime_param(p) * series::q(r as i64, d as i64)
}

fn a_slope(p: u64, d: u32) -> Q {
    series::bprime_param(p) * series::q(d as i64 - 1, d as i64)
}

/// H_0..H_rmax as series in a, each truncated below a^atrunc.
///
/// H_r(a) = Σ_{k ≤ r/d} θ_k θ_{r-dk} a^{r-dk}, so that θ(x^d)θ(ax) = Σ H_r(a) x^r.
pub fn f_series(p: u64, d: u32, rmax: usize, atrunc: usize, prec: i64) -> Result<Vec<PadicSeriesA>> {
    check_params(p, d)?;
    let th = thetas(p, rmax + 1)?;
    let r1 = padic::ring(p, 1)?;
    let du = d as usize;
    let slope = a_slope(p, d);
    (0..=rmax)
        .map(|r| {
            let len = (r + 1).min(atrunc.max(1));
            let mut coeffs = vec![PadicElem::exact_zero(r1); len];
            for k in 0..=r / du {
                let n = r - du * k;
                if n < len {
                    coeffs[n] = (&th[k] * &th[n]).with_prec(prec);
                }
            }
            Ok(PadicSeriesA::new(coeffs, slope, h_floor(p, d, r))?)
        })
        .collect()
}

/// F(a, x) as an element of 𝒦(b', b/p; 0), x-powers up to rmax.
pub fn f_xseries(p: u64, d: u32, rmax: usize, atrunc: usize, prec: i64) -> Result<XSeries> {
    let terms = f_series(p, d, rmax, atrunc, prec)?;
    let b = series::b_param(p) / Q::from_integer(p as i64);
    Ok(XSeries::new(terms, b, d, Q::zero())?)
}

/// (m - d)/(dπ) and 1/d as ring elements.
struct ReduceConsts {
    down: Vec<PadicElem>,
    inv_d: PadicElem,
}

impl ReduceConsts {
    fn new(ring: &'static PadicRing, d: u32, top: usize) -> Self {
        let di = d as i64;
        let down = (0..=top)
            .map(|m| {
                if m < d as usize {
                    PadicElem::exact_zero(ring)
                } else {
                    PadicElem::from_pi_rational(ring, &rat(m as i64 - di, di), -1)
                }
            })
            .collect();
        ReduceConsts {
            down,
            inv_d: PadicElem::from_rational(ring, &rat(1, di)),
        }
    }
}

/// In-place reduction of Σ c_m x^m (c_m ∈ a-series mod a^alen) to degrees < d,
/// using x^m ≡ -((m-d)/(dπ)) x^{m-d} - (a^apow/d) x^{m-d+1} modulo D_{a^apow}.
pub fn reduce_lists(terms: &mut Vec<Vec<PadicElem>>, d: u32, apow: usize, alen: usize) {
    let du = d as usize;
    if terms.len() <= du {
        return;
    }
    let ring = terms[0][0].ring();
    let rc = ReduceConsts::new(ring, d, terms.len());
    for t in terms.iter_mut() {
        t.resize(alen, PadicElem::exact_zero(ring));
    }
    for m in (du..terms.len()).rev() {
        let c = std::mem::take(&mut terms[m]);
        if c.iter().all(|x| x.is_zero() && x.prec() >= INF_PREC) {
            continue;
        }
        let lo = &mut terms[m - du];
        for (x, y) in lo.iter_mut().zip(&c) {
            *x = &*x - &(y * &rc.down[m]);
        }
        let hi = &mut terms[m - du + 1];
        for n in 0..alen.saturating_sub(apow) {
            hi[n + apow] = &hi[n + apow] - &(&c[n] * &rc.inv_d);
        }
    }
    terms.truncate(du);
}

/// Same reduction with a specialized to a number b.
pub fn reduce_at(terms: &mut Vec<PadicElem>, d: u32, b: &PadicElem) {
    let du = d as usize;
    if terms.len() <= du {
        return;
    }
    let ring = b.ring();
    let rc = ReduceConsts::new(ring, d, terms.len());
    let b_over_d = b * &rc.inv_d.lift_to(ring);
    for m in (du..terms.len()).rev() {
        let c = std::mem::replace(&mut terms[m], PadicElem::exact_zero(ring));
        if c.is_zero() && c.prec() >= INF_PREC {
            continue;
        }
        terms[m - du] = &terms[m - du] - &(&c * &rc.down[m]);
        terms[m - du + 1] = &terms[m - du + 1] - &(&c * &b_over_d);
    }
    terms.truncate(du);
}

/// D_a(Σ f_n x^n) = Σ f_n (n x^n + dπ x^{n+d} + πa x^{n+1}), a-series mod a^alen.
pub fn apply_da(f: &[Vec<PadicElem>], d: u32, alen: usize) -> Vec<Vec<PadicElem>> {
    let ring = f[0][0].ring();
    let du = d as usize;
    let mut out = vec![vec![PadicElem::exact_zero(ring); alen]; f.len() + du];
    let pi = PadicElem::pi(ring);
    let dpi = pi.scale_int(d as i64);
    for (n, fnn) in f.iter().enumerate() {
        for (i, c) in fnn.iter().enumerate().take(alen) {
            out[n][i] = &out[n][i] + &c.scale_int(n as i64);
            out[n + du][i] = &out[n + du][i] + &(c * &dpi);
            if i + 1 < alen {
                out[n + 1][i + 1] = &out[n + 1][i + 1] + &(c * &pi);
            }
        }
    }
    out
}

/// The 𝒱-component of u ∈ 𝒦(b', b; ρ): coordinates on x^0..x^{d-1}.
///
/// Each output coordinate j is certified in L(b'; bj/d + ρ).
pub fn reduce_mod_da(u: &XSeries, p: u64, prec: i64) -> Result<Vec<PadicSeriesA>> {
    check_params(p, u.d)?;
    let e = u.b - series::q(1, p as i64 - 1);
    if e <= Q::zero() {
        return Err(DworkError::NonConvergent(e.to_string()));
    }
    let ring = padic::ring(p, 1)?;
    let alen = u.terms.iter().map(|t| t.len()).max().unwrap_or(1).max(1);
    let slope = u.terms.first().map(|t| t.slope).unwrap_or_else(|| a_slope(p, u.d));
    let mut lists: Vec<Vec<PadicElem>> = u.terms.iter().map(|t| t.coeffs.clone()).collect();
    if lists.len() < u.d as usize {
        lists.resize(u.d as usize, vec![PadicElem::exact_zero(ring); alen]);
    }
    for l in lists.iter_mut() {
        if l.is_empty() {
            l.push(PadicElem::exact_zero(ring));
        }
    }
    reduce_lists(&mut lists, u.d, 1, alen);
    lists
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let c = c.into_iter().map(|x| x.with_prec(prec)).collect();
            Ok(PadicSeriesA::new(c, slope, u.x_floor(j))?)
        })
        .collect()
}

/// 𝔄(a) with entries in L(b'; b'(pj - i)/d), truncated below a^atrunc.
#[derive(Debug, Clone)]
pub struct FrobMatrixA {
    pub p: u64,
    pub d: u32,
    /// entries[i-1][j-1] = 𝔄_ij for 1 ≤ i, j ≤ d-1.
    pub entries: Vec<Vec<PadicSeriesA>>,
}

impl FrobMatrixA {
    /// Specialization at a = z (|z| ≤ 1).
    pub fn eval(&self, z: &PadicElem) -> Mat {
        self.entries
            .iter()
            .map(|row| row.iter().map(|e| e.eval(z)).collect())
            .collect()
    }
}

/// Smallest x-degree cutoff M so that every dropped monomial x^m, m > M,
/// changes the retained coefficients of 𝔄 below a^atrunc only beyond π^prec.
fn x_cutoff_series(p: u64, d: u32, atrunc: usize, prec: i64) -> usize {
    // Each π-step of the reduction gains e = b - 1/(p-1) over the floor line,
    // a-steps gain nothing but there are fewer than atrunc/p of them.
    let pi = p as i64;
    let e = series::b_param(p) - series::q(1, pi - 1);
    let du = d as i64;
    let mut m = du;
    loop {
        let steps = Q::from_integer(m + 1 - (du - 1) - (du - 1) * (atrunc as i64) / pi) / Q::from_integer(du);
        if steps >= Q::zero() && steps * e * Q::from_integer(pi - 1) >= Q::from_integer(prec) {
            return m as usize;
        }
        m += 1;
    }
}

/// 𝔄(a) as series in a: reduction of ψ_x(F(a, x) x^i) = Σ_j H_{pj-i}(a) x^j modulo D_{a^p}.
pub fn frob_matrix(p: u64, d: u32, atrunc: usize, prec: i64) -> Result<FrobMatrixA> {
    check_params(p, d)?;
    let ring = padic::ring(p, 1)?;
    let du = d as usize;
    let pu = p as usize;
    let m_top = x_cutoff_series(p, d, atrunc, prec);
    let th = thetas(p, pu * m_top + 1)?;
    let slope = a_slope(p, d);
    let bp = series::bprime_param(p);
    let mut entries = Vec::with_capacity(du - 1);
    for i in 1..du {
        let mut lists: Vec<Vec<PadicElem>> = (0..=m_top)
            .map(|m| {
                let mut c = vec![PadicElem::exact_zero(ring); atrunc];
                if p as usize * m >= i {
                    let r = pu * m - i;
                    for k in 0..=r / du {
                        let n = r - du * k;
                        if n < atrunc {
                            c[n] = &th[k] * &th[n];
                        }
                    }
                }
                c
            })
            .collect();
        reduce_lists(&mut lists, d, pu, atrunc);
        let mut row = Vec::with_capacity(du - 1);
        for j in 1..du {
            let coeffs: Vec<PadicElem> = lists[j].iter().map(|x| x.clone().with_prec(prec)).collect();
            for x in &coeffs {
                padic::require_prec(x, prec)?;
            }
            let floor = bp * series::q(pu as i64 * j as i64 - i as i64, d as i64);
            row.push(PadicSeriesA::new(coeffs, slope, floor)?);
        }
        entries.push(row);
    }
    Ok(FrobMatrixA { p, d, entries })
}

/// π-adic lower bound for the contribution of a dropped x^m to 𝔄_ij(z), |z| = 1.
fn specialized_drop_bound(p: u64, d: u32, i: usize, m: usize) -> Q {
    let pi = p as i64;
    let di = d as i64;
    series::q((pi - 1) * (pi - 1) * (pi * m as i64 - i as i64), pi * pi * di) - series::q(m as i64 - 1, di)
}

fn specialized_cutoff(p: u64, d: u32, prec: i64) -> usize {
    let mut m = d as usize;
    while specialized_drop_bound(p, d, d as usize - 1, m + 1) < Q::from_integer(prec) {
        m += 1;
    }
    m
}

/// Powers z^0..z^{q-2} of a Teichmüller point (z^{q-1} = 1), or [1, z, z^2, ...] up to `upto` if z = 0.
fn teich_powers(z: &PadicElem, q: u64, upto: usize) -> Vec<PadicElem> {
    let n = if z.is_zero() { upto + 1 } else { (q - 1) as usize };
    let mut out = Vec::with_capacity(n);
    let mut cur = PadicElem::one(z.ring());
    for _ in 0..n {
        out.push(cur.clone());
        cur = &cur * z;
    }
    out
}

fn zpow<'a>(pows: &'a [PadicElem], n: usize, zero: &'a PadicElem, z_is_zero: bool) -> &'a PadicElem {
    if z_is_zero {
        if n == 0 {
            &pows[0]
        } else {
            zero
        }
    } else {
        &pows[n % pows.len()]
    }
}

/// H_r(z) for r = 0..=rmax at a Teichmüller point z.
fn h_values(th: &[PadicElem], d: u32, z: &PadicElem, q: u64, rmax: usize) -> Vec<PadicElem> {
    let ring = z.ring();
    let du = d as usize;
    let pows = teich_powers(z, q, rmax);
    let zero = PadicElem::exact_zero(ring);
    let zz = z.is_zero();
    (0..=rmax)
        .map(|r| {
            let mut acc = PadicElem::exact_zero(ring);
            for k in 0..=r / du {
                let n = r - du * k;
                let zp = zpow(&pows, n, &zero, zz);
                if zp.is_zero() {
                    continue;
                }
                acc = &acc + &(&(&th[k] * &th[n]).lift_to(ring) * zp);
            }
            acc
        })
        .collect()
}

/// Teichmüller lift at the widest precision the ring carries.
pub fn teich_point(ring: &'static PadicRing, zbar: &FqElem) -> Result<PadicElem> {
    let full = (ring.p as i64 - 1) * ring.kmax;
    Ok(padic::teichmuller(ring, zbar, full)?)
}

/// 𝔄(z) at a Teichmüller point z, reduced modulo D_{z^p}, to absolute precision prec.
pub fn frob_matrix_at(z: &PadicElem, d: u32, prec: i64) -> Result<Mat> {
    let ring = z.ring();
    let p = ring.p;
    check_params(p, d)?;
    let du = d as usize;
    let pu = p as usize;
    let m_top = specialized_cutoff(p, d, prec);
    let th = thetas(p, pu * m_top + 1)?;
    let q = ring.fld.order();
    let h = h_values(&th, d, z, q, pu * m_top);
    let zp = z.pow(p);
    let mut mat = Vec::with_capacity(du - 1);
    for i in 1..du {
        let mut terms: Vec<PadicElem> = (0..=m_top)
            .map(|m| {
                if pu * m >= i {
                    h[pu * m - i].clone()
                } else {
                    PadicElem::exact_zero(ring)
                }
            })
            .collect();
        reduce_at(&mut terms, d, &zp);
        let mut row = Vec::with_capacity(du - 1);
        for t in terms.into_iter().skip(1) {
            let t = t.with_prec(prec);
            padic::require_prec(&t, prec)?;
            row.push(t);
        }
        mat.push(row);
    }
    Ok(mat)
}

/// 𝔄(z)·𝔄(z^p)···𝔄(z^{p^{s-1}}), the matrix of ᾱ_{z^{p^{s-1}}} ∘ … ∘ ᾱ_z.
pub fn frob_product_at(z: &PadicElem, d: u32, prec: i64) -> Result<Mat> {
    let ring = z.ring();
    let mut acc = frob_matrix_at(z, d, prec)?;
    let mut w = z.pow(ring.p);
    for _ in 1..ring.s {
        acc = linalg::mat_mul(&acc, &frob_matrix_at(&w, d, prec)?);
        w = w.pow(ring.p);
    }
    Ok(acc)
}

/// L(f_z̄, T) = det(I - T·ᾱ_{z,s}) with s the degree of `fld` over F_p.
pub fn fibre_l_padic(fld: &FieldDescriptor, zbar: &FqElem, d: u32, prec: i64) -> Result<LPoly> {
    let ring = padic::ring(fld.p, fld.s)?;
    if ring.fld != *fld {
        return Err(DworkError::BadInput("field descriptor is not the canonical one".into()));
    }
    let z = teich_point(ring, zbar)?;
    let a = frob_product_at(&z, d, prec)?;
    let coeffs = linalg::char_poly_reversed(&a)
        .into_iter()
        .map(|c| c.with_prec(prec))
        .collect();
    Ok(LPoly::padic(
        coeffs,
        LMeta {
            p: fld.p,
            d,
            kind: LKind::Fibre {
                lambda: zbar.coeffs.clone(),
                s: fld.s,
            },
        },
    ))
}

/// Main term of 𝔄_ij(a) for p ≥ d + 6.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeadingTerm {
    pub r: i64,
    pub a_degree: i64,
    pub pi_power: i64,
    /// 1/(r!(pj - i - dr)!)
    pub coeff: BigRational,
    /// ord_p of the term on |a| = 1.
    pub valuation: Ratio<i64>,
}

fn factorial(n: i64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

pub fn frob_leading_term(d: u32, p: u64, i: usize, j: usize) -> Result<LeadingTerm> {
    if p < d as u64 + 6 {
        return Err(DworkError::HypothesisFailed { p, d });
    }
    check_params(p, d)?;
    let di = d as i64;
    let n = p as i64 * j as i64 - i as i64;
    let r = n.div_euclid(di);
    let a_degree = n - di * r;
    let pi_power = n - (di - 1) * r;
    Ok(LeadingTerm {
        r,
        a_degree,
        pi_power,
        coeff: BigRational::new(BigInt::one(), factorial(r) * factorial(a_degree)),
        valuation: Ratio::new(pi_power, p as i64 - 1),
    })
}

/// Coefficients B_l (as polynomials in a, below a^atrunc) of the dual vector
/// g_i* = x^{-i} + Σ_{l ≥ d} B_l x^{-l}, from
/// B_{l+d} = -(l/(dγ)) B_l - (a/d) B_{l+1}, B_l = δ_il for l < d, γ = ±π.
pub fn dual_basis(p: u64, d: u32, i: usize, lmax: usize, atrunc: usize, gamma_sign: i64) -> Result<Vec<Vec<PadicElem>>> {
    check_params(p, d)?;
    if i >= d as usize {
        return Err(DworkError::BadInput(format!("index {i} is not below d = {d}")));
    }
    let ring = padic::ring(p, 1)?;
    let du = d as usize;
    let di = d as i64;
    let zero = || vec![PadicElem::exact_zero(ring); atrunc];
    let mut b: Vec<Vec<PadicElem>> = (0..du.min(lmax + 1))
        .map(|l| {
            let mut v = zero();
            if l == i {
                v[0] = PadicElem::one(ring);
            }
            v
        })
        .collect();
    let inv_d = PadicElem::from_rational(ring, &rat(1, di));
    for l in 0..=lmax.saturating_sub(du) {
        if l + du > lmax {
            break;
        }
        let c = PadicElem::from_pi_rational(ring, &rat(l as i64 * gamma_sign, di), -1);
        let mut v = zero();
        for n in 0..atrunc {
            v[n] = &v[n] - &(&b[l][n] * &c);
            if n >= 1 {
                v[n] = &v[n] - &(&b[l + 1][n - 1] * &inv_d);
            }
        }
        b.push(v);
    }
    Ok(b)
}

/// Θ_γ = -x d/dx + γ(d x^d + a x) applied to Σ_l B_l x^{-l}.
/// Returns (coefficients of x^{-l}, l ≥ 0; coefficients of x^k, k = 1..d).
pub fn theta_op(b: &[Vec<PadicElem>], d: u32, gamma_sign: i64) -> (Vec<Vec<PadicElem>>, Vec<Vec<PadicElem>>) {
    let ring = b[0][0].ring();
    let alen = b[0].len();
    let du = d as usize;
    let gamma = PadicElem::pi(ring).scale_int(gamma_sign);
    let gd = gamma.scale_int(d as i64);
    let zero = || vec![PadicElem::exact_zero(ring); alen];
    let mut neg = vec![zero(); b.len()];
    let mut pos = vec![zero(); du + 1];
    for (l, bl) in b.iter().enumerate() {
        for n in 0..alen {
            neg[l][n] = &neg[l][n] + &bl[n].scale_int(l as i64);
            let t = &bl[n] * &gd;
            if l >= du {
                neg[l - du][n] = &neg[l - du][n] + &t;
            } else {
                pos[du - l][n] = &pos[du - l][n] + &t;
            }
            if n + 1 < alen {
                let t = &bl[n] * &gamma;
                if l >= 1 {
                    neg[l - 1][n + 1] = &neg[l - 1][n + 1] + &t;
                } else {
                    pos[1][n + 1] = &pos[1][n + 1] + &t;
                }
            }
        }
    }
    (neg, pos)
}

/// Truncated characteristic series det(1 - α_s T) of the Dwork operator on
/// the monomials x^0..x^nbasis, modulo T^{tdeg+1}.
pub fn fredholm_truncated(fld: &FieldDescriptor, zbar: &FqElem, d: u32, tdeg: usize, nbasis: usize, prec: i64) -> Result<Vec<PadicElem>> {
    let p = fld.p;
    check_params(p, d)?;
    let ring = padic::ring(p, fld.s)?;
    let pi = p as i64;
    let certified = series::q((pi - 1).pow(3) * (nbasis as i64 + 1), pi * pi * d as i64);
    if certified < Q::from_integer(prec) {
        return Err(DworkError::TruncationUncertified {
            basis: nbasis + 1,
            certified: certified.to_string(),
            needed: prec,
        });
    }
    let z = teich_point(ring, zbar)?;
    let pu = p as usize;
    let th = thetas(p, pu * nbasis + 1)?;
    let q = ring.fld.order();
    let block = |w: &PadicElem| -> Mat {
        let h = h_values(&th, d, w, q, pu * nbasis);
        (0..=nbasis)
            .map(|i| {
                (0..=nbasis)
                    .map(|j| {
                        if pu * j >= i {
                            h[pu * j - i].clone()
                        } else {
                            PadicElem::exact_zero(ring)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let mut acc = block(&z);
    let mut w = z.pow(p);
    for _ in 1..fld.s {
        acc = linalg::mat_mul(&acc, &block(&w));
        w = w.pow(p);
    }
    Ok(linalg::det_one_minus_t(&acc, tdeg)
        .into_iter()
        .map(|c| c.with_prec(prec))
        .collect())
}

/// Π_{i ≥ 0} P(q^i T) mod (T^{tdeg+1}, π^prec) for P with constant term 1.
pub fn elementary_product(pcoeffs: &[PadicElem], q: u64, tdeg: usize, prec: i64) -> Vec<PadicElem> {
    let ring = pcoeffs[0].ring();
    let p = ring.p as i64;
    let mut acc = vec![PadicElem::exact_zero(ring); tdeg + 1];
    acc[0] = PadicElem::one(ring);
    let qe = PadicElem::from_i64(ring, q as i64);
    let mut qi = PadicElem::one(ring);
    let mut i = 0i64;
    // factors with ord(q^i) ≥ prec are 1 modulo π^prec
    while i * (p - 1) < prec {
        let mut f = vec![PadicElem::exact_zero(ring); tdeg + 1];
        let mut sc = PadicElem::one(ring);
        for (k, c) in pcoeffs.iter().enumerate().take(tdeg + 1) {
            f[k] = &c.lift_to(ring) * &sc;
            sc = &sc * &qi;
        }
        acc = series::mul_trunc(&acc, &f, tdeg + 1);
        qi = &qi * &qe;
        i += 1;
    }
    acc.into_iter().map(|c| c.with_prec(prec)).collect()
}
