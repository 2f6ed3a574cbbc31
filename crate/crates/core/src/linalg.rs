//! Small dense matrices over the p-adic ring and det(1 - T·A) without
//! p-adic division.

use crate::padic::{PadicElem, PadicRing};

pub type Mat = Vec<Vec<PadicElem>>;

pub fn identity(ring: &'static PadicRing, n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        PadicElem::one(ring)
                    } else {
                        PadicElem::exact_zero(ring)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let ring = a[0][0].ring();
    let n = a.len();
    let m = b[0].len();
    let inner = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = PadicElem::exact_zero(ring);
                    for k in 0..inner {
                        acc = &acc + &(&a[i][k] * &b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_lift(a: &Mat, ring: &'static PadicRing) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x.lift_to(ring)).collect()).collect()
}

/// Truncated power series in T.
fn ser_mul(a: &[PadicElem], b: &[PadicElem], n: usize) -> Vec<PadicElem> {
    crate::series::mul_trunc(a, b, n)
}

/// 1/a for a series with constant term 1.
fn ser_inv_unit(a: &[PadicElem], n: usize) -> Vec<PadicElem> {
    let ring = a[0].ring();
    let mut out = vec![PadicElem::one(ring)];
    for m in 1..n {
        let mut acc = PadicElem::exact_zero(ring);
        for i in 1..=m.min(a.len() - 1) {
            acc = &acc - &(&a[i] * &out[m - i]);
        }
        out.push(acc);
    }
    out
}

/// Coefficients c_0..c_tdeg of det(1 - T·A) mod T^{tdeg+1}.
///
/// Gaussian elimination over the power series ring in T: every pivot keeps
/// constant term 1, so only units are inverted.
pub fn det_one_minus_t(a: &Mat, tdeg: usize) -> Vec<PadicElem> {
    let n = a.len();
    let len = tdeg + 1;
    let ring = a[0][0].ring();
    if n == 0 {
        let mut out = vec![PadicElem::exact_zero(ring); len];
        out[0] = PadicElem::one(ring);
        return out;
    }
    let mut e: Vec<Vec<Vec<PadicElem>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = vec![PadicElem::exact_zero(ring); len];
                    if i == j {
                        s[0] = PadicElem::one(ring);
                    }
                    if len > 1 {
                        s[1] = a[i][j].neg();
                    }
                    s
                })
                .collect()
        })
        .collect();
    let mut det = vec![PadicElem::exact_zero(ring); len];
    det[0] = PadicElem::one(ring);
    for c in 0..n {
        let piv_inv = ser_inv_unit(&e[c][c], len);
        det = ser_mul(&det, &e[c][c], len);
        for r in c + 1..n {
            if e[r][c].iter().all(|x| x.is_zero() && x.prec() >= crate::padic::INF_PREC) {
                continue;
            }
            let f = ser_mul(&e[r][c], &piv_inv, len);
            for j in c..n {
                let t = ser_mul(&f, &e[c][j], len);
                for (x, y) in e[r][j].iter_mut().zip(&t) {
                    *x = &*x - y;
                }
            }
        }
    }
    det
}

/// det(1 - T·A) in full (degree n).
pub fn char_poly_reversed(a: &Mat) -> Vec<PadicElem> {
    det_one_minus_t(a, a.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::ring;

    #[test]
    fn two_by_two() {
        let r = ring(7, 1).unwrap();
        let f = |n: i64| PadicElem::from_i64(r, n);
        let a = vec![vec![f(1), f(2)], vec![f(3), f(4)]];
        let c = char_poly_reversed(&a);
        // 1 - tr T + det T^2
        assert!(c[0].eq_mod(&f(1)));
        assert!(c[1].eq_mod(&f(-5)));
        assert!(c[2].eq_mod(&f(-2)));
    }

    #[test]
    fn zero_pivot_column() {
        let r = ring(5, 1).unwrap();
        let f = |n: i64| PadicElem::from_i64(r, n);
        let a = vec![
            vec![f(0), f(1), f(0)],
            vec![f(0), f(0), f(1)],
            vec![f(6), f(-11), f(6)],
        ];
        let c = char_poly_reversed(&a);
        // companion of (x-1)(x-2)(x-3)
        let want = [1, -6, 11, -6];
        for (x, w) in c.iter().zip(want) {
            assert!(x.eq_mod(&f(w)));
        }
    }
}
