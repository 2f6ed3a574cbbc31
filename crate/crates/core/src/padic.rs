//! Truncated arithmetic in W(F_{p^s})[π] with π^{p-1} = -p.
//!
//! An element is stored as `p^e * Σ c[v*s + u] Y^u π^v` with `0 <= v < p-1`,
//! `0 <= u < s`, mantissa entries reduced mod p^K (K = [`PadicRing::kmax`]),
//! together with an absolute precision in π-units: the represented value is
//! correct modulo π^prec. Every operation propagates this bound, so results
//! never claim more than their inputs support.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::ff::{self, FfError, FieldDescriptor, FqElem};

/// Precision of exact zeros.
pub const INF_PREC: i64 = i64::MAX / 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("precision exhausted: need {needed} π-digits, have {have}")]
    PrecisionExhausted { needed: i64, have: i64 },
    #[error("division by an element indistinguishable from zero")]
    DivisionByZero,
    #[error("field with {0} elements is too large to enumerate")]
    TooLarge(u128),
    #[error(transparent)]
    Field(#[from] FfError),
}

pub type Result<T> = std::result::Result<T, PadicError>;

/// Shared data for W(F_{p^s})[π].
#[derive(Debug)]
pub struct PadicRing {
    pub p: u64,
    pub s: usize,
    pub fld: FieldDescriptor,
    /// Mantissa width in p-adic digits.
    pub kmax: i64,
    pmod: i128,
    modulus: Vec<i128>,
}

static RINGS: OnceLock<Mutex<HashMap<(u64, usize), &'static PadicRing>>> = OnceLock::new();

/// Interned ring for (p, s); p must be an odd prime.
pub fn ring(p: u64, s: usize) -> Result<&'static PadicRing> {
    let map = RINGS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = map.lock().unwrap().get(&(p, s)) {
        return Ok(r);
    }
    let fld = ff::build_field(p, s)?;
    let mut kmax = 0i64;
    let mut pmod: i128 = 1;
    while pmod * (p as i128) < (1i128 << 56) {
        pmod *= p as i128;
        kmax += 1;
    }
    let modulus = fld.modulus.iter().map(|&c| c as i128).collect();
    let r: &'static PadicRing = Box::leak(Box::new(PadicRing {
        p,
        s,
        fld,
        kmax,
        pmod,
        modulus,
    }));
    Ok(*map.lock().unwrap().entry((p, s)).or_insert(r))
}

impl PadicRing {
    fn n(&self) -> usize {
        self.p as usize - 1
    }
    fn dim(&self) -> usize {
        self.s * self.n()
    }
    /// Largest precision a mantissa with exponent e can carry.
    fn cap(&self, e: i64) -> i64 {
        (self.p as i64 - 1).saturating_mul(e.saturating_add(self.kmax))
    }
    fn md(&self, x: i128) -> i128 {
        x.rem_euclid(self.pmod)
    }
    fn mul_md(&self, a: i128, b: i128) -> i128 {
        (a * b).rem_euclid(self.pmod)
    }
    fn same(&self, other: &PadicRing) -> bool {
        self.p == other.p && self.s == other.s
    }
}

#[derive(Clone)]
pub struct PadicElem {
    ring: &'static PadicRing,
    e: i64,
    prec: i64,
    c: Vec<i128>,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + if a.rem_euclid(b) == 0 { 0 } else { 1 }
}

fn inv_mod_i128(a: i128, m: i128) -> i128 {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m)
}

/// p-adic valuation and unit part of a nonzero integer.
fn split_p(n: &BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut n = n.clone();
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return (v, n);
        }
        n = q;
        v += 1;
    }
}

impl PadicElem {
    fn raw(ring: &'static PadicRing, e: i64, prec: i64, c: Vec<i128>) -> Self {
        let mut x = PadicElem { ring, e, prec, c };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        let r = self.ring;
        if self.c.iter().all(|&x| x == 0) {
            self.prec = self.prec.min(INF_PREC);
            self.e = self.e.max(ceil_div(self.prec, r.p as i64 - 1) - r.kmax);
            return;
        }
        let p = r.p as i128;
        let e0 = self.e;
        while self.c.iter().all(|&x| x % p == 0) {
            for x in self.c.iter_mut() {
                *x /= p;
            }
            self.e += 1;
        }
        self.prec = self.prec.min(r.cap(e0)).min(INF_PREC);
        if self.val().is_none() {
            let prec = self.prec;
            self.c.iter_mut().for_each(|x| *x = 0);
            self.prec = prec;
            self.e = self.e.max(ceil_div(prec, r.p as i64 - 1) - r.kmax);
        }
    }

    pub fn ring(&self) -> &'static PadicRing {
        self.ring
    }

    /// Zero known modulo π^prec.
    pub fn zero(ring: &'static PadicRing, prec: i64) -> Self {
        Self::raw(ring, 0, prec, vec![0; ring.dim()])
    }

    pub fn exact_zero(ring: &'static PadicRing) -> Self {
        Self::zero(ring, INF_PREC)
    }

    pub fn one(ring: &'static PadicRing) -> Self {
        Self::from_i64(ring, 1)
    }

    pub fn from_i64(ring: &'static PadicRing, n: i64) -> Self {
        Self::from_bigint(ring, &BigInt::from(n))
    }

    pub fn from_bigint(ring: &'static PadicRing, n: &BigInt) -> Self {
        Self::from_rational(ring, &BigRational::from_integer(n.clone()))
    }

    /// Exact rational, carried to full mantissa width.
    pub fn from_rational(ring: &'static PadicRing, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::exact_zero(ring);
        }
        let (vn, un) = split_p(q.numer(), ring.p);
        let (vd, ud) = split_p(q.denom(), ring.p);
        let m = BigInt::from(ring.pmod);
        let un = un.mod_floor(&m).to_i128().unwrap();
        let ud = ud.mod_floor(&m).to_i128().unwrap();
        let mut c = vec![0; ring.dim()];
        c[0] = ring.mul_md(un, inv_mod_i128(ud, ring.pmod));
        let e = vn - vd;
        Self::raw(ring, e, ring.cap(e), c)
    }

    /// Exact value q·π^k.
    pub fn from_pi_rational(ring: &'static PadicRing, q: &BigRational, k: i64) -> Self {
        Self::from_rational(ring, q).shift_pi(k)
    }

    /// Element with the given Y-coordinates at π^0, exact integers.
    pub fn from_coords(ring: &'static PadicRing, coords: &[i128]) -> Self {
        let mut c = vec![0; ring.dim()];
        for (u, &x) in coords.iter().enumerate() {
            c[u] = ring.md(x);
        }
        Self::raw(ring, 0, ring.cap(0), c)
    }

    /// Naive lift of a residue (coordinates in [0, p)).
    pub fn lift_residue(ring: &'static PadicRing, x: &FqElem) -> Self {
        let coords: Vec<i128> = x.coeffs.iter().map(|&c| c as i128).collect();
        Self::from_coords(ring, &coords)
    }

    pub fn pi(ring: &'static PadicRing) -> Self {
        Self::one(ring).shift_pi(1)
    }

    /// Absolute precision in π-units.
    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn with_prec(mut self, n: i64) -> Self {
        self.prec = self.prec.min(n);
        self.normalize();
        self
    }

    pub fn set_prec(&mut self, n: i64) {
        self.prec = self.prec.min(n);
        self.normalize();
    }

    /// π-adic valuation, `None` if the element vanishes to its precision.
    pub fn val(&self) -> Option<i64> {
        let r = self.ring;
        let s = r.s;
        let p = r.p as i128;
        let mut best: Option<i64> = None;
        for v in 0..r.n() {
            let mut k: Option<i64> = None;
            for u in 0..s {
                let mut x = self.c[v * s + u];
                if x == 0 {
                    continue;
                }
                let mut t = 0;
                while x % p == 0 {
                    x /= p;
                    t += 1;
                }
                k = Some(k.map_or(t, |k: i64| k.min(t)));
            }
            if let Some(k) = k {
                let w = (r.p as i64 - 1) * (self.e + k) + v as i64;
                best = Some(best.map_or(w, |b| b.min(w)));
            }
        }
        best.filter(|&w| w < self.prec)
    }

    /// Valuation, or the precision when the element vanishes to precision.
    pub fn val_floor(&self) -> i64 {
        self.val().unwrap_or(self.prec)
    }

    /// ord_p as an exact rational.
    pub fn ord_p(&self) -> Option<Ratio<i64>> {
        self.val().map(|v| Ratio::new(v, self.ring.p as i64 - 1))
    }

    pub fn is_zero(&self) -> bool {
        self.val().is_none()
    }

    /// Equality modulo the joint precision.
    pub fn eq_mod(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    fn aligned(&self, e: i64) -> Vec<i128> {
        let r = self.ring;
        let d = self.e - e;
        if d >= r.kmax {
            return vec![0; r.dim()];
        }
        let f = (r.p as i128).pow(d as u32);
        self.c.iter().map(|&x| r.mul_md(x, f)).collect()
    }

    fn check_ring(&self, other: &Self) {
        assert!(
            self.ring.same(other.ring),
            "mixing W(F_{}^{}) and W(F_{}^{})",
            self.ring.p,
            self.ring.s,
            other.ring.p,
            other.ring.s
        );
    }

    fn add_impl(&self, other: &Self, sign: i128) -> Self {
        self.check_ring(other);
        let r = self.ring;
        let e = self.e.min(other.e);
        let a = self.aligned(e);
        let b = other.aligned(e);
        let c = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| r.md(x + sign * y))
            .collect();
        Self::raw(r, e, self.prec.min(other.prec), c)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.check_ring(other);
        let r = self.ring;
        let prec = self
            .prec
            .saturating_add(other.val_floor())
            .min(other.prec.saturating_add(self.val_floor()));
        if self.c.iter().all(|&x| x == 0) || other.c.iter().all(|&x| x == 0) {
            return Self::zero(r, prec);
        }
        let c = mul_mantissa(r, &self.c, &other.c);
        Self::raw(r, self.e + other.e, prec, c)
    }

    pub fn neg(&self) -> Self {
        let r = self.ring;
        let c = self.c.iter().map(|&x| r.md(-x)).collect();
        Self::raw(r, self.e, self.prec, c)
    }

    /// Exact multiplication by an integer.
    pub fn scale_int(&self, n: i64) -> Self {
        self * &Self::from_i64(self.ring, n)
    }

    /// Exact multiplication by π^k.
    pub fn shift_pi(&self, k: i64) -> Self {
        let r = self.ring;
        let n = r.n() as i64;
        let a = k.div_euclid(n);
        let b = k.rem_euclid(n) as usize;
        let s = r.s;
        let mut c = vec![0; r.dim()];
        let p = r.p as i128;
        for v in 0..r.n() {
            for u in 0..s {
                let x = self.c[v * s + u];
                if v + b < r.n() {
                    c[(v + b) * s + u] = x;
                } else {
                    c[(v + b - r.n()) * s + u] = r.md(-p * x);
                }
            }
        }
        let sign = if a.rem_euclid(2) == 1 { -1 } else { 1 };
        if sign < 0 {
            c.iter_mut().for_each(|x| *x = r.md(-*x));
        }
        let prec = if self.prec >= INF_PREC {
            INF_PREC
        } else {
            self.prec + k
        };
        Self::raw(r, self.e + a, prec, c)
    }

    /// Reduction mod π, if the element is integral.
    pub fn residue(&self) -> Option<FqElem> {
        let r = self.ring;
        if self.prec < 1 {
            return None;
        }
        if self.is_zero() || self.e > 0 {
            return Some(r.fld.zero());
        }
        if self.e < 0 {
            return if self.val_floor() >= 1 {
                Some(r.fld.zero())
            } else {
                None
            };
        }
        let p = r.p as i128;
        Some(FqElem {
            coeffs: (0..r.s).map(|u| (self.c[u] % p) as u64).collect(),
        })
    }

    pub fn inv(&self) -> Result<Self> {
        let r = self.ring;
        let v = self.val().ok_or(PadicError::DivisionByZero)?;
        let w = self.shift_pi(-v);
        let wbar = w.residue().expect("unit has a residue");
        let rbar = r.fld.inv(&wbar).expect("unit residue is nonzero");
        let mut y = Self::lift_residue(r, &rbar);
        let two = Self::from_i64(r, 2);
        let mut steps = 1;
        while (1i64 << steps) <= r.kmax + 1 {
            steps += 1;
        }
        for _ in 0..=steps {
            y = &y * &(&two - &(&w * &y));
        }
        Ok(y.shift_pi(-v))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut acc = Self::one(self.ring);
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            n >>= 1;
        }
        acc
    }

    /// Image under W(F_p)[π] ⊂ W(F_{p^s})[π]; requires this element to live in s = 1.
    pub fn lift_to(&self, target: &'static PadicRing) -> Self {
        if self.ring.same(target) {
            return self.clone();
        }
        assert!(self.ring.s == 1 && self.ring.p == target.p);
        let mut c = vec![0; target.dim()];
        for v in 0..target.n() {
            c[v * target.s] = self.c[v];
        }
        Self::raw(target, self.e, self.prec, c)
    }

    /// Expansion Σ_j d_j π^j, j from the valuation up to prec - 1, with
    /// digit vectors d_j in [0, p)^s.
    pub fn pi_digits(&self) -> (i64, Vec<Vec<u64>>) {
        let r = self.ring;
        let n = r.n() as i64;
        let p = r.p as i128;
        let start = (self.e * n).min(self.prec);
        let len = (self.prec - start).max(0) as usize;
        let mut out = vec![vec![0u64; r.s]; len];
        for v in 0..r.n() {
            for u in 0..r.s {
                let mut rest = self.c[v * r.s + u];
                let mut carry: i128 = 0;
                let mut k = 0i64;
                loop {
                    let pos = n * (self.e + k) + v as i64;
                    if pos >= self.prec {
                        break;
                    }
                    let sign = if (self.e + k).rem_euclid(2) == 1 { -1 } else { 1 };
                    let digit = sign * (rest % p) + carry;
                    rest /= p;
                    let d = digit.rem_euclid(p);
                    let t = (digit - d) / p;
                    carry = -t;
                    out[(pos - start) as usize][u] = d as u64;
                    k += 1;
                }
            }
        }
        (start, out)
    }

    /// Inverse of [`pi_digits`].
    pub fn from_pi_digits(ring: &'static PadicRing, start: i64, digits: &[Vec<u64>]) -> Self {
        let mut acc = Self::exact_zero(ring);
        for (j, d) in digits.iter().enumerate() {
            let coords: Vec<i128> = d.iter().map(|&x| x as i128).collect();
            acc = &acc + &Self::from_coords(ring, &coords).shift_pi(start + j as i64);
        }
        acc.with_prec(start + digits.len() as i64)
    }

    /// exp(x) for val(x) ≥ 2 (ord_p > 1/(p-1)).
    pub fn exp(&self) -> Option<Self> {
        let r = self.ring;
        let v = self.val_floor();
        if v < 2 {
            return None;
        }
        let target = self.prec;
        let mut acc = Self::one(r);
        let mut term = Self::one(r);
        let mut i = 1i64;
        loop {
            term = &term * self;
            term = term.div(&Self::from_i64(r, i)).unwrap();
            // ord_π(x^i/i!) ≥ i(v - 1) + 1 bounds every later term too
            acc = &acc + &term;
            if (i + 1) * (v - 1) >= target {
                break;
            }
            i += 1;
        }
        Some(acc.with_prec(target))
    }

    /// log(x) for val(x - 1) ≥ 1.
    pub fn log(&self) -> Option<Self> {
        let r = self.ring;
        let y = self - &Self::one(r);
        let v = y.val_floor();
        if v < 1 {
            return None;
        }
        let target = y.prec;
        let mut acc = Self::zero(r, INF_PREC);
        let mut pw = Self::one(r);
        let n = r.n() as i64;
        let mut i = 1i64;
        loop {
            pw = &pw * &y;
            let t = pw.div(&Self::from_i64(r, i)).unwrap();
            acc = if i % 2 == 1 { &acc + &t } else { &acc - &t };
            let next = i + 1;
            // ord_π(y^m/m) ≥ m v - (p-1) log_p m
            let logp = (next as f64).ln() / (r.p as f64).ln();
            if (next * v) as f64 - n as f64 * logp.ceil() >= target as f64 + n as f64 {
                break;
            }
            i += 1;
        }
        Some(acc.with_prec(target))
    }
}

fn mul_mantissa(r: &PadicRing, a: &[i128], b: &[i128]) -> Vec<i128> {
    let s = r.s;
    let n = r.n();
    let su = 2 * s - 1;
    let sv = 2 * n - 1;
    let mut tmp = vec![0i128; su * sv];
    for va in 0..n {
        for ua in 0..s {
            let x = a[va * s + ua];
            if x == 0 {
                continue;
            }
            for vb in 0..n {
                let row = (va + vb) * su + ua;
                for ub in 0..s {
                    tmp[row + ub] += x * b[vb * s + ub];
                }
            }
        }
    }
    for t in tmp.iter_mut() {
        *t = r.md(*t);
    }
    let p = r.p as i128;
    for v in (n..sv).rev() {
        for u in 0..su {
            let t = tmp[v * su + u];
            if t != 0 {
                let dst = (v - n) * su + u;
                tmp[dst] = r.md(tmp[dst] - p * t);
            }
        }
    }
    for v in 0..n {
        for u in (s..su).rev() {
            let t = tmp[v * su + u];
            if t != 0 {
                for i in 0..s {
                    let dst = v * su + u - s + i;
                    tmp[dst] = r.md(tmp[dst] - r.modulus[i] * t);
                }
            }
        }
    }
    let mut c = vec![0; r.dim()];
    for v in 0..n {
        c[v * s..(v + 1) * s].copy_from_slice(&tmp[v * su..v * su + s]);
    }
    c
}

impl fmt::Debug for PadicElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ord_p() {
            Some(o) => write!(f, "PadicElem(p={}, s={}, ord={}, prec={})", self.ring.p, self.ring.s, o, self.prec),
            None => write!(f, "PadicElem(p={}, s={}, O(π^{}))", self.ring.p, self.ring.s, self.prec),
        }
    }
}

impl<'a> Add<&'a PadicElem> for &'a PadicElem {
    type Output = PadicElem;
    fn add(self, o: &PadicElem) -> PadicElem {
        self.add_impl(o, 1)
    }
}
impl<'a> Sub<&'a PadicElem> for &'a PadicElem {
    type Output = PadicElem;
    fn sub(self, o: &PadicElem) -> PadicElem {
        self.add_impl(o, -1)
    }
}
impl<'a> Mul<&'a PadicElem> for &'a PadicElem {
    type Output = PadicElem;
    fn mul(self, o: &PadicElem) -> PadicElem {
        self.mul_impl(o)
    }
}
impl Neg for &PadicElem {
    type Output = PadicElem;
    fn neg(self) -> PadicElem {
        PadicElem::neg(self)
    }
}
impl Add for PadicElem {
    type Output = PadicElem;
    fn add(self, o: PadicElem) -> PadicElem {
        self.add_impl(&o, 1)
    }
}
impl Sub for PadicElem {
    type Output = PadicElem;
    fn sub(self, o: PadicElem) -> PadicElem {
        self.add_impl(&o, -1)
    }
}
impl Mul for PadicElem {
    type Output = PadicElem;
    fn mul(self, o: PadicElem) -> PadicElem {
        self.mul_impl(&o)
    }
}

/// Default working precision 10(p-1).
pub fn default_prec(p: u64) -> i64 {
    10 * (p as i64 - 1)
}

pub fn require_prec(x: &PadicElem, needed: i64) -> Result<()> {
    if x.prec() < needed {
        return Err(PadicError::PrecisionExhausted {
            needed,
            have: x.prec(),
        });
    }
    Ok(())
}

/// Teichmüller representative of a residue, correct mod π^prec.
pub fn teichmuller(ring: &'static PadicRing, x: &FqElem, prec: i64) -> Result<PadicElem> {
    ring.fld.check(x)?;
    if ring.fld.is_zero(x) {
        return Ok(PadicElem::exact_zero(ring));
    }
    let have = ring.cap(0);
    if prec > have {
        return Err(PadicError::PrecisionExhausted { needed: prec, have });
    }
    let q = ring.fld.order();
    let mut y = PadicElem::lift_residue(ring, x);
    for _ in 0..=ring.kmax {
        let next = y.pow(q);
        if next.c == y.c && next.e == y.e {
            break;
        }
        y = next;
    }
    Ok(y.with_prec(prec))
}

/// Teichmüller lifts of every element of F_q, indexed by enumeration index.
pub fn teichmuller_table(ring: &'static PadicRing, prec: i64) -> Result<Vec<PadicElem>> {
    let fld = &ring.fld;
    let q = fld.order();
    if q > ff::ENUM_CAP {
        return Err(PadicError::TooLarge(q as u128));
    }
    let mut out = vec![PadicElem::exact_zero(ring); q as usize];
    let g = fld.generator();
    let tg = teichmuller(ring, &g, prec)?;
    let mut cur = fld.one();
    let mut lift = PadicElem::one(ring);
    for _ in 0..q - 1 {
        out[fld.index(&cur) as usize] = lift.clone().with_prec(prec);
        cur = fld.mul(&cur, &g);
        lift = &lift * &tg;
    }
    Ok(out)
}

static THETA: OnceLock<Mutex<HashMap<u64, Vec<BigRational>>>> = OnceLock::new();

/// Exact ρ_0..ρ_{n-1} with θ_i = ρ_i π^{i mod (p-1)}, where
/// θ(t) = exp(π(t - t^p)) = Σ θ_i t^i.
///
/// From θ' = π(1 - p t^{p-1}) θ: i θ_i = π(θ_{i-1} - p θ_{i-p}).
pub fn theta_rationals(p: u64, n: usize) -> Vec<BigRational> {
    let map = THETA.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    let v = guard
        .entry(p)
        .or_insert_with(|| vec![BigRational::one()]);
    let pm1 = p as usize - 1;
    let pb = BigRational::from_integer(BigInt::from(p));
    while v.len() < n {
        let i = v.len();
        let mut t = v[i - 1].clone();
        if i >= p as usize {
            t -= &pb * &v[i - p as usize];
        }
        if i % pm1 == 0 {
            t = -(&pb * t);
        }
        t /= BigRational::from_integer(BigInt::from(i));
        v.push(t);
    }
    v[..n].to_vec()
}

#[derive(Debug, Clone)]
pub struct SplittingCoeffs {
    pub theta: Vec<PadicElem>,
}

/// θ_0..θ_n of exp(π(t - t^p)) in W(F_p)[π] at precision prec.
pub fn splitting_coeffs(p: u64, n: usize, prec: i64) -> Result<SplittingCoeffs> {
    let r = ring(p, 1)?;
    let rho = theta_rationals(p, n + 1);
    let pm1 = p as i64 - 1;
    let theta = rho
        .iter()
        .enumerate()
        .map(|(i, q)| PadicElem::from_pi_rational(r, q, i as i64 % pm1).with_prec(prec))
        .collect();
    Ok(SplittingCoeffs { theta })
}

/// Number of θ terms whose tail is below π^prec: ord_π θ_i ≥ (p-1)^2 i / p^2.
pub fn theta_terms_for(p: u64, prec: i64) -> usize {
    let p = p as i64;
    let mut i = 0i64;
    while (p - 1) * (p - 1) * i < prec.max(0) * p * p {
        i += 1;
    }
    i as usize + 1
}

/// θ(1) = Σ θ_i, a primitive p-th root of unity.
pub fn theta_one(ring: &'static PadicRing, prec: i64) -> Result<PadicElem> {
    let n = theta_terms_for(ring.p, prec);
    let sc = splitting_coeffs(ring.p, n, prec)?;
    let mut acc = PadicElem::exact_zero(ring);
    for t in &sc.theta {
        acc = &acc + &t.lift_to(ring);
    }
    Ok(acc.with_prec(prec))
}

/// θ(t) = Σ θ_i t^i at precision prec, for t integral.
pub fn theta_eval(t: &PadicElem, prec: i64) -> Result<PadicElem> {
    let r = t.ring();
    let n = theta_terms_for(r.p, prec);
    let sc = splitting_coeffs(r.p, n, prec)?;
    let mut acc = PadicElem::exact_zero(r);
    for th in sc.theta.iter().rev() {
        acc = &(&acc * t) + &th.lift_to(r);
    }
    Ok(acc.with_prec(prec))
}

/// g_s(j) = -Σ_{t^{q-1}=1} t^{-j} θ(t)θ(t^p)···θ(t^{p^{s-1}}), q = p^s.
pub fn gauss_sum(p: u64, s: usize, j: i64, prec: i64) -> Result<PadicElem> {
    let r = ring(p, s)?;
    let q = r.fld.order();
    if q > 1 << 16 {
        return Err(PadicError::TooLarge(q as u128));
    }
    let work = prec + 2 * (p as i64 - 1);
    let table = teichmuller_table(r, work)?;
    let qm1 = q as i64 - 1;
    let jj = j.rem_euclid(qm1) as u64;
    let terms: Vec<PadicElem> = (1..q as usize)
        .into_par_iter()
        .map(|idx| {
            let t = &table[idx];
            let mut prod = PadicElem::one(r);
            let mut tp = t.clone();
            for _ in 0..s {
                prod = &prod * &theta_eval(&tp, work).unwrap();
                tp = tp.pow(p);
            }
            // t^{-j} = t^{q-1-j}
            &prod * &t.pow((qm1 as u64 - jj) % qm1 as u64)
        })
        .collect();
    let mut acc = PadicElem::exact_zero(r);
    for t in &terms {
        acc = &acc + t;
    }
    Ok(acc.neg().with_prec(prec))
}

/// Sum of base-p digits of j mod (p^s - 1), divided by p-1: ord_p g_s(j).
pub fn stickelberger_ord(p: u64, s: usize, j: i64) -> Ratio<i64> {
    let q = (p as i64).pow(s as u32);
    let mut n = j.rem_euclid(q - 1);
    let mut sum = 0;
    for _ in 0..s {
        sum += n % p as i64;
        n /= p as i64;
    }
    Ratio::new(sum, p as i64 - 1)
}

/// Square root by Hensel lifting from the smallest residue root (enumeration order).
pub fn sqrt_hensel(x: &PadicElem) -> Option<PadicElem> {
    let r = x.ring();
    let xbar = x.residue()?;
    if r.fld.is_zero(&xbar) {
        return None;
    }
    let root = r
        .fld
        .elements()
        .find(|y| r.fld.mul(y, y) == xbar)?;
    let mut y = PadicElem::lift_residue(r, &root);
    let half = PadicElem::from_i64(r, 2).inv().unwrap();
    for _ in 0..=r.kmax.ilog2() + 2 {
        y = &(&y + &x.div(&y).unwrap()) * &half;
    }
    Some(y.with_prec(x.prec()))
}

/// κ = 2i/(3√3): in W(F_p) when p ≡ 1 mod 12, otherwise in W(F_{p^2}).
pub fn kappa(p: u64, prec: i64) -> Result<PadicElem> {
    let s = if p % 12 == 1 { 1 } else { 2 };
    let r = ring(p, s)?;
    let i = sqrt_hensel(&PadicElem::from_i64(r, -1).with_prec(prec)).expect("-1 is a square in F_{p^2}");
    let rt3 = sqrt_hensel(&PadicElem::from_i64(r, 3).with_prec(prec)).expect("3 is a square in F_{p^2}");
    let num = i.scale_int(2);
    let den = rt3.scale_int(3);
    Ok(num.div(&den)?.with_prec(prec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_relation_exact() {
        for p in [5u64, 7, 11, 13] {
            let r = ring(p, 1).unwrap();
            let pi = PadicElem::pi(r);
            let lhs = pi.pow(p - 1);
            let rhs = PadicElem::from_i64(r, -(p as i64)).with_prec(lhs.prec());
            assert!(lhs.prec() >= (p as i64 - 1) * r.kmax);
            assert_eq!(lhs.pi_digits(), rhs.pi_digits());
        }
    }

    #[test]
    fn teichmuller_examples() {
        let r = ring(7, 1).unwrap();
        let fld = &r.fld;
        assert!(teichmuller(r, &fld.one(), 60).unwrap().eq_mod(&PadicElem::one(r)));
        assert!(teichmuller(r, &fld.zero(), 60).unwrap().is_zero());
        let t3 = teichmuller(r, &fld.from_int(3), 60).unwrap();
        let diff = &t3 - &PadicElem::from_i64(r, 31);
        assert!(diff.val_floor() >= 12);
        assert!(t3.pow(7).eq_mod(&t3));
    }

    #[test]
    fn theta_small_indices() {
        for p in [5u64, 7, 11] {
            let rho = theta_rationals(p, p as usize);
            let mut fact = BigInt::one();
            for (i, r) in rho.iter().enumerate().take(p as usize - 1) {
                if i > 0 {
                    fact *= BigInt::from(i);
                }
                assert_eq!(*r, BigRational::new(BigInt::one(), fact.clone()));
            }
        }
    }

    #[test]
    fn theta_one_is_root_of_unity() {
        for p in [5u64, 7, 13] {
            let r = ring(p, 1).unwrap();
            let z = theta_one(r, default_prec(p)).unwrap();
            let one = PadicElem::one(r);
            assert!(!z.eq_mod(&one));
            assert!(z.pow(p).eq_mod(&one));
            assert_eq!((&z - &one).val(), Some(1));
        }
    }

    #[test]
    fn gauss_sum_examples() {
        let g = gauss_sum(5, 2, 0, 40).unwrap();
        assert!(g.eq_mod(&PadicElem::one(g.ring())));
        let g = gauss_sum(5, 2, 8, 40).unwrap();
        assert_eq!(g.ord_p(), Some(Ratio::from_integer(1)));
        let g = gauss_sum(11, 2, 40, 40).unwrap();
        assert_eq!(g.ord_p(), Some(Ratio::from_integer(1)));
    }

    #[test]
    fn kappa_classes() {
        for p in [13u64, 17, 5, 7, 11, 23] {
            let k = kappa(p, 4 * (p as i64 - 1)).unwrap();
            let kp = k.pow(p);
            let minus = (&kp - &k).val_floor() > 0;
            let plus = (&kp + &k).val_floor() > 0;
            if p % 12 == 1 || p % 12 == 7 {
                assert!(minus && !plus, "p={p}");
            } else {
                assert!(plus && !minus, "p={p}");
            }
        }
    }

    #[test]
    fn digits_round_trip() {
        let r = ring(7, 2).unwrap();
        let x = PadicElem::from_coords(r, &[12345, -77]).shift_pi(-3).with_prec(40);
        let (start, d) = x.pi_digits();
        let y = PadicElem::from_pi_digits(r, start, &d);
        assert!(x.eq_mod(&y));
        assert_eq!(y.prec(), 40);
    }
}
