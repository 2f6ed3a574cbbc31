//! Finite fields F_{p^s} as F_p[Y]/(f) with f the smallest monic irreducible.
//!
//! Elements are dense coefficient vectors (low degree first). The absolute
//! trace to F_p is linear, so it is evaluated through the traces of the
//! basis monomials computed once at construction.

use thiserror::Error;

/// Largest field that [`enumerate_field`] will materialise.
pub const ENUM_CAP: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("{0} is not prime")]
    CompositeP(u64),
    #[error("extension degree must be at least 1")]
    DegreeZero,
    #[error("element does not belong to F_{p}^{s}")]
    FieldMismatch { p: u64, s: usize },
    #[error("field with {0} elements exceeds the enumeration cap")]
    TooLarge(u128),
}

pub type Result<T> = std::result::Result<T, FfError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FqElem {
    pub coeffs: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct FieldDescriptor {
    pub p: u64,
    pub s: usize,
    /// Monic modulus, low degree first, length s + 1.
    pub modulus: Vec<u64>,
    trace_basis: Vec<u64>,
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.s == other.s && self.modulus == other.modulus
    }
}
impl Eq for FieldDescriptor {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
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

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_mod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    r
}

fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

/// Remainder of `a` modulo the nonzero polynomial `b` over F_p.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], p);
    while r.len() > db {
        let top = r.len() - 1;
        let c = mulmod(r[top], lead_inv, p);
        for i in 0..=db {
            let t = mulmod(c, b[i], p);
            r[top - db + i] = (r[top - db + i] + p - t) % p;
        }
        trim(&mut r);
    }
    r
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = poly_rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

fn poly_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mulmod(x, y, p)) % p;
        }
    }
    poly_rem(&prod, f, p)
}

fn poly_powmod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
    let mut r = vec![1u64];
    let mut b = poly_rem(base, f, p);
    while e > 0 {
        if e & 1 == 1 {
            r = poly_mulmod(&r, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
        e >>= 1;
    }
    r
}

/// Rabin's test for a monic polynomial of degree s over F_p.
pub fn is_irreducible(f: &[u64], p: u64) -> bool {
    let s = f.len() - 1;
    if s == 1 {
        return true;
    }
    let x = vec![0u64, 1];
    // xp[i] = X^{p^i} mod f
    let mut xp = vec![poly_rem(&x, f, p)];
    for i in 1..=s {
        let next = poly_powmod(&xp[i - 1], p as u128, f, p);
        xp.push(next);
    }
    let sub_x = |h: &[u64]| {
        let mut h = h.to_vec();
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        trim(&mut h);
        h
    };
    if !sub_x(&xp[s]).is_empty() {
        return false;
    }
    for r in prime_factors(s as u64) {
        let g = poly_gcd(&sub_x(&xp[s / r as usize]), f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// Builds F_{p^s} with the smallest monic irreducible modulus, where
/// candidates X^s + c_{s-1}X^{s-1} + ... + c_0 are ordered by the integer
/// sum c_i p^i (so c_{s-1} is the most significant digit).
pub fn build_field(p: u64, s: usize) -> Result<FieldDescriptor> {
    if !is_prime(p) {
        return Err(FfError::CompositeP(p));
    }
    if s < 1 {
        return Err(FfError::DegreeZero);
    }
    let q = (p as u128).checked_pow(s as u32);
    if q.map_or(true, |q| q >= 1u128 << 63) {
        return Err(FfError::TooLarge(q.unwrap_or(u128::MAX)));
    }
    let q = q.unwrap() as u64;
    let mut modulus = None;
    for n in 0..q {
        let mut f = digits(n, p, s);
        f.push(1);
        if is_irreducible(&f, p) {
            modulus = Some(f);
            break;
        }
    }
    let modulus = modulus.expect("irreducible polynomials exist in every degree");
    let mut fld = FieldDescriptor {
        p,
        s,
        modulus,
        trace_basis: Vec::new(),
    };
    fld.trace_basis = (0..s)
        .map(|u| {
            let mut y = vec![0u64; s];
            y[u] = 1;
            let y = FqElem { coeffs: y };
            let mut acc = fld.zero();
            let mut cur = y;
            for _ in 0..s {
                acc = fld.add(&acc, &cur);
                cur = fld.frobenius(&cur);
            }
            debug_assert!(acc.coeffs[1..].iter().all(|&c| c == 0));
            acc.coeffs[0]
        })
        .collect();
    Ok(fld)
}

fn digits(mut n: u64, p: u64, s: usize) -> Vec<u64> {
    let mut v = Vec::with_capacity(s);
    for _ in 0..s {
        v.push(n % p);
        n /= p;
    }
    v
}

impl FieldDescriptor {
    pub fn order(&self) -> u64 {
        self.p.pow(self.s as u32)
    }

    pub fn check(&self, x: &FqElem) -> Result<()> {
        if x.coeffs.len() != self.s || x.coeffs.iter().any(|&c| c >= self.p) {
            return Err(FfError::FieldMismatch {
                p: self.p,
                s: self.s,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> FqElem {
        FqElem {
            coeffs: vec![0; self.s],
        }
    }

    pub fn one(&self) -> FqElem {
        self.from_int(1)
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, n: i64) -> FqElem {
        let mut z = self.zero();
        z.coeffs[0] = n.rem_euclid(self.p as i64) as u64;
        z
    }

    /// The class of Y.
    pub fn gen_y(&self) -> FqElem {
        let y = vec![0u64, 1];
        let r = poly_rem(&y, &self.modulus, self.p);
        self.from_poly(&r)
    }

    fn from_poly(&self, v: &[u64]) -> FqElem {
        let mut c = vec![0u64; self.s];
        c[..v.len()].copy_from_slice(v);
        FqElem { coeffs: c }
    }

    /// Element with base-p digits of `n` as coefficients, coeffs[0] least significant.
    pub fn from_index(&self, n: u64) -> FqElem {
        FqElem {
            coeffs: digits(n, self.p, self.s),
        }
    }

    pub fn index(&self, x: &FqElem) -> u64 {
        x.coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn is_zero(&self, x: &FqElem) -> bool {
        x.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, x: &FqElem, y: &FqElem) -> FqElem {
        FqElem {
            coeffs: x
                .coeffs
                .iter()
                .zip(&y.coeffs)
                .map(|(a, b)| (a + b) % self.p)
                .collect(),
        }
    }

    pub fn neg(&self, x: &FqElem) -> FqElem {
        FqElem {
            coeffs: x.coeffs.iter().map(|&a| (self.p - a) % self.p).collect(),
        }
    }

    pub fn sub(&self, x: &FqElem, y: &FqElem) -> FqElem {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, c: u64, x: &FqElem) -> FqElem {
        FqElem {
            coeffs: x.coeffs.iter().map(|&a| mulmod(a, c, self.p)).collect(),
        }
    }

    /// Allocation-free product on coordinate slices; falls back to the generic
    /// path for large p or s.
    pub fn mul_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let s = self.s;
        let p = self.p;
        if p >= 1 << 16 || s > 32 {
            let r = self.mul(&FqElem { coeffs: a.to_vec() }, &FqElem { coeffs: b.to_vec() });
            out.copy_from_slice(&r.coeffs);
            return;
        }
        let mut prod = [0u64; 64];
        for i in 0..s {
            if a[i] == 0 {
                continue;
            }
            for j in 0..s {
                prod[i + j] += a[i] * b[j];
            }
        }
        for k in (s..2 * s - 1).rev() {
            let c = prod[k] % p;
            if c == 0 {
                continue;
            }
            for i in 0..s {
                prod[k - s + i] += (p - self.modulus[i]) * c;
            }
        }
        for i in 0..s {
            out[i] = prod[i] % p;
        }
    }

    pub fn mul(&self, x: &FqElem, y: &FqElem) -> FqElem {
        let r = poly_mulmod(&x.coeffs, &y.coeffs, &self.modulus, self.p);
        self.from_poly(&r)
    }

    pub fn pow(&self, x: &FqElem, e: u128) -> FqElem {
        let r = poly_powmod(&x.coeffs, e, &self.modulus, self.p);
        self.from_poly(&r)
    }

    pub fn frobenius(&self, x: &FqElem) -> FqElem {
        self.pow(x, self.p as u128)
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, x: &FqElem) -> Option<FqElem> {
        if self.is_zero(x) {
            return None;
        }
        Some(self.pow(x, self.order() as u128 - 2))
    }

    /// Absolute trace Tr_{F_{p^s}/F_p}(x) as a residue in [0, p).
    pub fn trace(&self, x: &FqElem) -> u64 {
        x.coeffs
            .iter()
            .zip(&self.trace_basis)
            .fold(0, |acc, (&c, &t)| (acc + mulmod(c, t, self.p)) % self.p)
    }

    /// Traces of the basis monomials 1, Y, ..., Y^{s-1}.
    pub fn trace_basis(&self) -> &[u64] {
        &self.trace_basis
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, x: &FqElem) -> Option<u64> {
        if self.is_zero(x) {
            return None;
        }
        let mut n = self.order() - 1;
        for r in prime_factors(n) {
            while n % r == 0 && self.pow(x, (n / r) as u128) == self.one() {
                n /= r;
            }
        }
        Some(n)
    }

    /// Smallest element (in enumeration order) generating the unit group.
    pub fn generator(&self) -> FqElem {
        let qm1 = self.order() - 1;
        (1..self.order())
            .map(|n| self.from_index(n))
            .find(|x| self.mult_order(x) == Some(qm1))
            .expect("unit group is cyclic")
    }

    /// Smallest k with x in F_{p^k}.
    pub fn degree_over_prime(&self, x: &FqElem) -> usize {
        let mut y = self.frobenius(x);
        let mut k = 1;
        while &y != x {
            y = self.frobenius(&y);
            k += 1;
        }
        k
    }

    /// Streaming enumeration in index order, no size cap.
    pub fn elements(&self) -> impl Iterator<Item = FqElem> + '_ {
        (0..self.order()).map(move |n| self.from_index(n))
    }

    /// Embedding of this field into `big`, sending Y to the smallest root of
    /// the modulus in `big`.
    pub fn embedding(&self, big: &FieldDescriptor) -> Result<Embedding> {
        if big.p != self.p || big.s % self.s != 0 {
            return Err(FfError::FieldMismatch {
                p: big.p,
                s: big.s,
            });
        }
        let root = big
            .elements()
            .find(|x| {
                let mut acc = big.zero();
                for c in self.modulus.iter().rev() {
                    acc = big.add(&big.mul(&acc, x), &big.from_int(*c as i64));
                }
                big.is_zero(&acc)
            })
            .expect("irreducible polynomial of degree dividing s splits");
        let mut powers = Vec::with_capacity(self.s);
        let mut cur = big.one();
        for _ in 0..self.s {
            powers.push(cur.clone());
            cur = big.mul(&cur, &root);
        }
        Ok(Embedding {
            big: big.clone(),
            powers,
        })
    }
}

/// Field embedding F_{p^s} into F_{p^{sm}}.
#[derive(Debug, Clone)]
pub struct Embedding {
    big: FieldDescriptor,
    powers: Vec<FqElem>,
}

impl Embedding {
    pub fn apply(&self, x: &FqElem) -> FqElem {
        let mut acc = self.big.zero();
        for (c, y) in x.coeffs.iter().zip(&self.powers) {
            acc = self.big.add(&acc, &self.big.scale(*c, y));
        }
        acc
    }
}

pub fn trace_to_prime(x: &FqElem, fld: &FieldDescriptor) -> Result<u64> {
    fld.check(x)?;
    Ok(fld.trace(x))
}

pub fn enumerate_field(fld: &FieldDescriptor) -> Result<Vec<FqElem>> {
    let q = fld.order();
    if q > ENUM_CAP {
        return Err(FfError::TooLarge(q as u128));
    }
    Ok(fld.elements().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_modulus_is_x() {
        let f = build_field(7, 1).unwrap();
        assert_eq!(f.modulus, vec![0, 1]);
        assert_eq!(f.order(), 7);
        assert_eq!(f.mul(&f.from_int(3), &f.from_int(5)), f.from_int(1));
    }

    #[test]
    fn f49_unit_group() {
        let f = build_field(7, 2).unwrap();
        assert_eq!(f.order(), 49);
        assert_eq!(f.mult_order(&f.generator()), Some(48));
    }

    #[test]
    fn errors() {
        assert_eq!(build_field(9, 1).unwrap_err(), FfError::CompositeP(9));
        assert_eq!(build_field(5, 0).unwrap_err(), FfError::DegreeZero);
        let f = build_field(5, 2).unwrap();
        assert!(trace_to_prime(&FqElem { coeffs: vec![1] }, &f).is_err());
        assert!(trace_to_prime(&FqElem { coeffs: vec![5, 0] }, &f).is_err());
        let big = build_field(2, 25).unwrap();
        assert!(matches!(enumerate_field(&big), Err(FfError::TooLarge(_))));
    }

    #[test]
    fn trace_examples() {
        let f = build_field(7, 2).unwrap();
        assert_eq!(trace_to_prime(&f.one(), &f).unwrap(), 2);
        let g = build_field(7, 1).unwrap();
        for x in g.elements() {
            assert_eq!(g.trace(&x), x.coeffs[0]);
        }
    }

    #[test]
    fn fast_mul_agrees() {
        let f = build_field(7, 3).unwrap();
        let mut out = vec![0; 3];
        for x in f.elements().step_by(5) {
            for y in f.elements().step_by(7) {
                f.mul_into(&x.coeffs, &y.coeffs, &mut out);
                assert_eq!(out, f.mul(&x, &y).coeffs);
            }
        }
    }

    #[test]
    fn inverse_and_embedding() {
        let f = build_field(5, 2).unwrap();
        for x in f.elements().skip(1) {
            assert_eq!(f.mul(&x, &f.inv(&x).unwrap()), f.one());
        }
        let big = build_field(5, 4).unwrap();
        let e = f.embedding(&big).unwrap();
        for x in f.elements() {
            for y in f.elements().step_by(3) {
                assert_eq!(e.apply(&f.mul(&x, &y)), big.mul(&e.apply(&x), &e.apply(&y)));
                assert_eq!(e.apply(&f.add(&x, &y)), big.add(&e.apply(&x), &e.apply(&y)));
            }
        }
    }
}
