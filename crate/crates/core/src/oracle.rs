//! Exact character sums and L-polynomials in Z[ζ_p].
//!
//! Fibre L-functions come from enumerating S_1..S_{d-1}. The power sums N_s
//! of M_k use one transform per level: S_1(λ) for every λ ∈ F_{p^s} at once,
//! from the joint distribution of (Tr(Y^u x))_u and Tr(x^3).

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::cyclo::CycloElem;
use crate::ff::{self, FfError, FieldDescriptor, FqElem};
use crate::lpoly::{exp_of_power_sums, LKind, LMeta, LPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration of {0} elements exceeds the cap")]
    TooLarge(u128),
    #[error(transparent)]
    Field(#[from] FfError),
    #[error("exp of power sums does not truncate at degree {0}")]
    DegreeMismatch(usize),
    #[error("arithmetic overflow in fast cyclotomic accumulation")]
    Overflow,
    #[error("k must be odd, got {0}")]
    EvenK(u32),
}

pub type Result<T> = std::result::Result<T, OracleError>;

fn check_cap(q: u128) -> Result<()> {
    if q > ff::ENUM_CAP as u128 {
        return Err(OracleError::TooLarge(q));
    }
    Ok(())
}

fn pow_elem(fld: &FieldDescriptor, x: &FqElem, d: u32) -> FqElem {
    fld.pow(x, d as u128)
}

/// S_m(λ) = Σ_{x ∈ F_{q^m}} ζ^{Tr(x^d + λx)} for λ ∈ fld = F_q.
pub fn char_sum(fld: &FieldDescriptor, lambda: &FqElem, m: usize, d: u32) -> Result<CycloElem> {
    fld.check(lambda)?;
    let p = fld.p;
    let q = (fld.order() as u128).pow(m as u32);
    check_cap(q)?;
    let big = ff::build_field(p, fld.s * m)?;
    let lam = fld.embedding(&big)?.apply(lambda);
    let counts = (0..big.order())
        .into_par_iter()
        .fold(
            || vec![0i64; p as usize],
            |mut acc, n| {
                let x = big.from_index(n);
                let y = big.add(&pow_elem(&big, &x, d), &big.mul(&lam, &x));
                acc[big.trace(&y) as usize] += 1;
                acc
            },
        )
        .reduce(
            || vec![0i64; p as usize],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(CycloElem::from_small_counts(p, &counts))
}

/// L(f_λ, T) of degree d-1 from S_1..S_{d-1}.
pub fn fibre_l_exact(fld: &FieldDescriptor, lambda: &FqElem, d: u32) -> Result<LPoly> {
    let sums: Vec<CycloElem> = (1..d as usize)
        .map(|m| char_sum(fld, lambda, m, d))
        .collect::<Result<_>>()?;
    let coeffs = exp_of_power_sums(&sums);
    Ok(LPoly::exact(
        coeffs,
        LMeta {
            p: fld.p,
            d,
            kind: LKind::Fibre {
                lambda: lambda.coeffs.clone(),
                s: fld.s,
            },
        },
    ))
}

/// Traces Tr(Y^u x), u < s, packed as a base-p index.
fn trace_key(fld: &FieldDescriptor, tr: &[u64], x: &[u64]) -> u32 {
    let s = fld.s;
    let mut w = 0u64;
    for u in (0..s).rev() {
        let t = (0..s).fold(0u64, |a, v| (a + x[v] * tr[u + v]) % fld.p);
        w = w * fld.p + t;
    }
    w as u32
}

/// Tr(Y^j) for j < 2s.
fn monomial_traces(fld: &FieldDescriptor) -> Vec<u64> {
    let y = fld.gen_y();
    let mut cur = fld.one();
    let mut out = Vec::with_capacity(2 * fld.s);
    for _ in 0..2 * fld.s {
        out.push(fld.trace(&cur));
        cur = fld.mul(&cur, &y);
    }
    out
}

fn power_into(fld: &FieldDescriptor, x: &[u64], d: u32, out: &mut [u64], tmp: &mut [u64]) {
    out.copy_from_slice(x);
    for _ in 1..d {
        fld.mul_into(out, x, tmp);
        out.copy_from_slice(tmp);
    }
}

/// Σ_{keys (w, t)} ζ^{t + λ·w} for every λ ∈ F_p^s, by a transform along each coordinate.
fn transform(p: usize, s: usize, keys: &[(u32, u8)]) -> Vec<Vec<i32>> {
    let q = p.pow(s as u32);
    let mut a = vec![0i32; q * p];
    for &(w, t) in keys {
        a[w as usize * p + t as usize] += 1;
    }
    // out[.., λ_u, ..] = Σ_{w_u} ζ^{λ_u w_u} in[.., w_u, ..]
    let mut stride = 1usize;
    let mut tmp = vec![0i32; p * p];
    for _ in 0..s {
        for chunk in a.chunks_mut(stride * p * p) {
            for low in 0..stride {
                tmp.iter_mut().for_each(|x| *x = 0);
                for w in 0..p {
                    let src = &chunk[(w * stride + low) * p..(w * stride + low + 1) * p];
                    for lam in 0..p {
                        let sh = lam * w % p;
                        let dst = &mut tmp[lam * p..(lam + 1) * p];
                        for j in 0..p - sh {
                            dst[j + sh] += src[j];
                        }
                        for j in p - sh..p {
                            dst[j + sh - p] += src[j];
                        }
                    }
                }
                for lam in 0..p {
                    chunk[(lam * stride + low) * p..(lam * stride + low + 1) * p]
                        .copy_from_slice(&tmp[lam * p..(lam + 1) * p]);
                }
            }
        }
        stride *= p;
    }
    a.chunks(p).map(|c| c.to_vec()).collect()
}

/// S_1(λ) for every λ ∈ F_q (indexed by enumeration index), as count vectors
/// c with S_1(λ) = Σ_j c[j] ζ^j.
pub fn all_first_sums(fld: &FieldDescriptor, d: u32) -> Result<Vec<Vec<i32>>> {
    let q = fld.order();
    check_cap(q as u128)?;
    let tr = monomial_traces(fld);
    let s = fld.s;
    let keys: Vec<(u32, u8)> = (0..q)
        .into_par_iter()
        .map_init(
            || (vec![0u64; s], vec![0u64; s]),
            |(xd, tmp), n| {
                let x = fld.from_index(n);
                power_into(fld, &x.coeffs, d, xd, tmp);
                let t = fld.trace(&FqElem { coeffs: xd.clone() });
                (trace_key(fld, &tr, &x.coeffs), t as u8)
            },
        )
        .collect();
    Ok(transform(fld.p as usize, s, &keys))
}

/// S_2(λ) for every λ ∈ F_q, from x ∈ F_{q^2} grouped by y = Tr_{q^2/q}(x):
/// Tr(λx) = Tr_q(λ y).
pub fn all_second_sums(fld: &FieldDescriptor, d: u32) -> Result<Vec<Vec<i32>>> {
    let p = fld.p;
    let s = fld.s;
    let q2 = (fld.order() as u128).pow(2);
    check_cap(q2)?;
    let big = ff::build_field(p, 2 * s)?;
    let emb = fld.embedding(&big)?;
    // coordinates of y in F_q from its image in F_{q^2}: solve on the embedded basis
    let images: Vec<FqElem> = (0..s)
        .map(|u| {
            let mut e = fld.zero();
            e.coeffs[u] = 1;
            emb.apply(&e)
        })
        .collect();
    let mut back = std::collections::HashMap::new();
    for n in 0..fld.order() {
        let y = fld.from_index(n);
        let mut img = big.zero();
        for (c, b) in y.coeffs.iter().zip(&images) {
            img = big.add(&img, &big.scale(*c, b));
        }
        back.insert(img.coeffs, y.coeffs);
    }
    // relative trace is F_p-linear: images of the basis of F_{q^2}
    let qq = fld.order() as u128;
    let rel: Vec<Vec<u64>> = (0..2 * s)
        .map(|u| {
            let mut e = big.zero();
            e.coeffs[u] = 1;
            big.add(&e, &big.pow(&e, qq)).coeffs
        })
        .collect();
    let tr = monomial_traces(fld);
    let keys: Vec<(u32, u8)> = (0..big.order())
        .into_par_iter()
        .map_init(
            || (vec![0u64; 2 * s], vec![0u64; 2 * s]),
            |(xd, tmp), n| {
                let x = big.from_index(n);
                power_into(&big, &x.coeffs, d, xd, tmp);
                let t = big.trace(&FqElem { coeffs: xd.clone() });
                let mut y = vec![0u64; 2 * s];
                for (c, img) in x.coeffs.iter().zip(&rel) {
                    for (a, b) in y.iter_mut().zip(img) {
                        *a = (*a + c * b) % p;
                    }
                }
                let yq = &back[&y];
                (trace_key(fld, &tr, yq), t as u8)
            },
        )
        .collect();
    Ok(transform(p as usize, s, &keys))
}

/// Z[ζ_p] arithmetic on i128 coordinates with overflow detection.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Small(Vec<i128>);

impl Small {
    fn from_counts(c: &[i64]) -> Self {
        let n = c.len() - 1;
        Small((0..n).map(|i| (c[i] - c[n]) as i128).collect())
    }
    fn int(n: usize, v: i128) -> Self {
        let mut x = vec![0; n];
        x[0] = v;
        Small(x)
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
    fn mul(&self, o: &Small) -> Option<Small> {
        let n = self.0.len();
        let p = n + 1;
        let mut full = vec![0i128; p];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                let t = a.checked_mul(b)?;
                let k = (i + j) % p;
                full[k] = full[k].checked_add(t)?;
            }
        }
        let top = full[n];
        let mut out = Vec::with_capacity(n);
        for x in &full[..n] {
            out.push(x.checked_sub(top)?);
        }
        Some(Small(out))
    }
    fn sub(&self, o: &Small) -> Option<Small> {
        let mut out = Vec::with_capacity(self.0.len());
        for (a, b) in self.0.iter().zip(&o.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Small(out))
    }
    fn scale(&self, k: i128) -> Option<Small> {
        let mut out = Vec::with_capacity(self.0.len());
        for a in &self.0 {
            out.push(a.checked_mul(k)?);
        }
        Some(Small(out))
    }
}

/// h_k(A, B) = Σ_j A^{k-j} B^j for the roots of T^2 - e1 T + e2.
fn complete_homogeneous(e1: &Small, e2: &Small, k: u32) -> Option<Small> {
    let n = e1.0.len();
    let mut prev = Small::int(n, 1);
    if k == 0 {
        return Some(prev);
    }
    let mut cur = e1.clone();
    for _ in 1..k {
        let next = e1.mul(&cur)?.sub(&e2.mul(&prev)?)?;
        prev = cur;
        cur = next;
    }
    Some(cur)
}

/// Power sums N_1..N_smax of M_k, with bookkeeping of how each fibre's
/// determinant was obtained.
#[derive(Debug, Clone)]
pub struct PowerSums {
    pub n: Vec<CycloElem>,
    /// Contribution of λ = 0 to each N_s.
    pub zero_part: Vec<CycloElem>,
    /// Fibres with S_1 = 0 whose e_2 was taken to be q without a direct check.
    pub assumed_e2: usize,
}

fn small_of(c: &CycloElem) -> Small {
    Small(c.coeffs.iter().map(|x| i128::try_from(x).expect("fits i128")).collect())
}

/// e_2 = π_1 π_2 for the fibres over `special` ⊂ F_q (indices), all with S_1 = 0.
///
/// With e_1 = 0, S_2 = -(A^2 + B^2) = 2 e_2. S_2 is read off the transform over
/// F_{q^2} when that is enumerable; λ = 0 with q ≡ 2 mod 3 uses Hasse-Davenport
/// from F_{p^2}; any remaining fibre gets e_2 = q and is counted as assumed.
fn e2_when_trace_vanishes(
    fld: &FieldDescriptor,
    special: &[usize],
    assumed: &mut usize,
) -> Result<Vec<Small>> {
    let p = fld.p;
    let n = p as usize - 1;
    let q = fld.order() as i128;
    let enumerable = (fld.order() as u128).pow(2) <= ff::ENUM_CAP as u128;
    let second = if enumerable && !special.is_empty() {
        Some(all_second_sums(fld, 3)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for &idx in special {
        if let Some(all) = &second {
            let c: Vec<i64> = all[idx].iter().map(|&x| x as i64).collect();
            let s2 = CycloElem::from_small_counts(p, &c);
            let half = s2.div_exact_int(&BigInt::from(2)).expect("S_2 = 2 e_2");
            out.push(small_of(&half));
        } else if idx == 0 && fld.order() % 3 == 2 {
            // e_2 = -(-A/2)^s, A = Σ_{F_{p^2}} ψ(Tr x^3), using G(χ) = G(χ̄)
            let f2 = ff::build_field(p, 2)?;
            let a = char_sum(&f2, &f2.zero(), 1, 3)?;
            let g = a.div_exact_int(&BigInt::from(-2)).expect("G(χ) = G(χ̄)");
            out.push(small_of(&g.pow(fld.s as u64).neg()));
        } else {
            *assumed += 1;
            out.push(Small::int(n, q));
        }
    }
    Ok(out)
}

/// N_s = Σ_{ā ∈ F_{p^s}} h_k(roots of L(ā/F_{p^s})), s = 1..smax, for d = 3.
pub fn mk_power_sums(p: u64, k: u32, smax: usize) -> Result<PowerSums> {
    let mut out = PowerSums {
        n: Vec::new(),
        zero_part: Vec::new(),
        assumed_e2: 0,
    };
    for s in 1..=smax {
        let fld = ff::build_field(p, s)?;
        let sums = all_first_sums(&fld, 3)?;
        let n = p as usize - 1;
        let q = fld.order() as i128;
        let e2q = Small::int(n, q);
        let mut special = Vec::new();
        let e1s: Vec<Small> = sums
            .iter()
            .map(|c| {
                let c64: Vec<i64> = c.iter().map(|&x| x as i64).collect();
                Small::from_counts(&c64).scale(-1).unwrap()
            })
            .collect();
        for (idx, e1) in e1s.iter().enumerate() {
            if e1.is_zero() {
                special.push(idx);
            }
        }
        let e2_special: Vec<(usize, Small)> = special
            .iter()
            .copied()
            .zip(e2_when_trace_vanishes(&fld, &special, &mut out.assumed_e2)?)
            .collect();
        let terms: Vec<Option<Small>> = e1s
            .par_iter()
            .enumerate()
            .map(|(idx, e1)| {
                let e2 = e2_special
                    .iter()
                    .find(|(i, _)| *i == idx)
                    .map(|(_, v)| v)
                    .unwrap_or(&e2q);
                complete_homogeneous(e1, e2, k)
            })
            .collect();
        let mut acc = vec![BigInt::zero(); n];
        for t in &terms {
            let t = t.as_ref().ok_or(OracleError::Overflow)?;
            for (a, x) in acc.iter_mut().zip(&t.0) {
                *a += BigInt::from(*x);
            }
        }
        let zero = terms[0].as_ref().unwrap();
        out.zero_part.push(CycloElem {
            p,
            coeffs: zero.0.iter().map(|&x| BigInt::from(x)).collect(),
        });
        out.n.push(CycloElem { p, coeffs: acc });
    }
    Ok(out)
}

fn sympow_meta(p: u64, k: u32) -> LMeta {
    LMeta {
        p,
        d: 3,
        kind: LKind::Sympow { k },
    }
}

/// c_0..c_n of M_k from N_1..N_n.
pub fn mk_exact_series(p: u64, k: u32, n: usize) -> Result<Vec<CycloElem>> {
    let ps = mk_power_sums(p, k, n)?;
    Ok(exp_of_power_sums(&ps.n))
}

/// M_k for odd k: the degree-(k+1)/2 polynomial with the given log-expansion.
/// With `check_extra`, one more level is computed and must give c_{δ+1} = 0.
pub fn mk_exact_poly(p: u64, k: u32, check_extra: bool) -> Result<LPoly> {
    if k % 2 == 0 {
        return Err(OracleError::EvenK(k));
    }
    let delta = (k as usize + 1) / 2;
    let n = if check_extra { delta + 1 } else { delta };
    let c = mk_exact_series(p, k, n)?;
    if check_extra && !c[delta + 1].is_zero() {
        return Err(OracleError::DegreeMismatch(delta));
    }
    Ok(LPoly::exact(c[..=delta].to_vec(), sympow_meta(p, k)))
}

/// M_k for even k, reconstructed from N_1..N_bound where bound is a degree
/// bound supplied by the caller (k + m_k for k < 2p).
pub fn mk_exact_even(p: u64, k: u32, bound: usize, check_extra: bool) -> Result<LPoly> {
    let n = if check_extra { bound + 1 } else { bound };
    let c = mk_exact_series(p, k, n)?;
    if check_extra && !c[bound + 1].is_zero() {
        return Err(OracleError::DegreeMismatch(bound));
    }
    Ok(LPoly::exact(c[..=bound].to_vec(), sympow_meta(p, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclo::zeta_accumulate;

    #[test]
    fn char_sum_examples() {
        let f5 = ff::build_field(5, 1).unwrap();
        assert!(char_sum(&f5, &f5.zero(), 1, 3).unwrap().is_zero());
        let f7 = ff::build_field(7, 1).unwrap();
        assert_eq!(
            char_sum(&f7, &f7.zero(), 1, 3).unwrap(),
            zeta_accumulate(7, &[0, 1, 1, 1, 6, 6, 6])
        );
        for x in f7.elements() {
            let s = char_sum(&f7, &x, 1, 3).unwrap();
            assert_eq!(s.conj(), s);
        }
    }

    #[test]
    fn transform_matches_enumeration() {
        for (p, s) in [(5u64, 2usize), (7, 1), (7, 2), (5, 3)] {
            let fld = ff::build_field(p, s).unwrap();
            let all = all_first_sums(&fld, 3).unwrap();
            for (i, c) in all.iter().enumerate().step_by(3) {
                let c64: Vec<i64> = c.iter().map(|&x| x as i64).collect();
                let direct = char_sum(&fld, &fld.from_index(i as u64), 1, 3).unwrap();
                assert_eq!(CycloElem::from_small_counts(p, &c64), direct);
            }
        }
    }

    #[test]
    fn second_sums_match_enumeration() {
        for (p, s) in [(5u64, 1usize), (5, 2), (11, 1)] {
            let fld = ff::build_field(p, s).unwrap();
            let all = all_second_sums(&fld, 3).unwrap();
            for (i, c) in all.iter().enumerate() {
                let c64: Vec<i64> = c.iter().map(|&x| x as i64).collect();
                let direct = char_sum(&fld, &fld.from_index(i as u64), 2, 3).unwrap();
                assert_eq!(CycloElem::from_small_counts(p, &c64), direct);
            }
        }
    }

    #[test]
    fn fibre_degree_and_weil() {
        let f7 = ff::build_field(7, 1).unwrap();
        for x in f7.elements() {
            let l = fibre_l_exact(&f7, &x, 3).unwrap();
            let c = l.exact_coeffs().unwrap();
            assert_eq!(c.len(), 3);
            assert_eq!(c[0], CycloElem::one(7));
            assert_eq!(c[2], CycloElem::from_int(7, 7));
        }
    }

    #[test]
    fn mk_small_cases() {
        for p in [5u64, 7] {
            let m1 = mk_exact_poly(p, 1, true).unwrap();
            let c = m1.exact_coeffs().unwrap();
            assert_eq!(c.len(), 2);
            assert_eq!(c[1], CycloElem::from_int(p, -(p as i64)));
            let ps = mk_power_sums(p, 0, 2).unwrap();
            assert_eq!(ps.n[0], CycloElem::from_int(p, p as i64));
            assert_eq!(ps.n[1], CycloElem::from_int(p, (p * p) as i64));
        }
    }
}
