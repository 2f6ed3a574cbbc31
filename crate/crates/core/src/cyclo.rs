//! Exact arithmetic in Z[ζ_p] on the power basis 1, ζ, ..., ζ^{p-2}.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::padic::{self, PadicElem, PadicRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("{0} is not a unit mod {1}")]
    NotAUnit(i64, u64),
    #[error("{0} does not divide p - 1 = {1}")]
    BadIndex(u64, u64),
    #[error(transparent)]
    Padic(#[from] padic::PadicError),
}

pub type Result<T> = std::result::Result<T, CycloError>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloElem {
    pub p: u64,
    pub coeffs: Vec<BigInt>,
}

impl CycloElem {
    pub fn zero(p: u64) -> Self {
        CycloElem {
            p,
            coeffs: vec![BigInt::zero(); p as usize - 1],
        }
    }

    pub fn one(p: u64) -> Self {
        Self::from_int(p, 1)
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::from_bigint(p, BigInt::from(n))
    }

    pub fn from_bigint(p: u64, n: BigInt) -> Self {
        let mut x = Self::zero(p);
        x.coeffs[0] = n;
        x
    }

    /// ζ^k for any integer k.
    pub fn zeta_pow(p: u64, k: i64) -> Self {
        let mut counts = vec![BigInt::zero(); p as usize];
        counts[k.rem_euclid(p as i64) as usize] = BigInt::one();
        Self::from_counts(p, &counts)
    }

    /// Σ counts[j] ζ^j over the full set of exponents 0..p.
    pub fn from_counts(p: u64, counts: &[BigInt]) -> Self {
        let n = p as usize - 1;
        let top = &counts[n];
        CycloElem {
            p,
            coeffs: (0..n).map(|i| &counts[i] - top).collect(),
        }
    }

    pub fn from_small_counts(p: u64, counts: &[i64]) -> Self {
        let big: Vec<BigInt> = counts.iter().map(|&c| BigInt::from(c)).collect();
        Self::from_counts(p, &big)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        CycloElem {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        CycloElem {
            p: self.p,
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        CycloElem {
            p: self.p,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CycloElem {
            p: self.p,
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.p as usize;
        let mut full = vec![BigInt::zero(); p];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % p] += a * b;
                }
            }
        }
        Self::from_counts(self.p, &full)
    }

    pub fn pow(&self, mut n: u64) -> Self {
        let mut acc = Self::one(self.p);
        let mut b = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            n >>= 1;
        }
        acc
    }

    /// Division by a rational integer, if exact.
    pub fn div_exact_int(&self, k: &BigInt) -> Option<Self> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(CycloElem {
            p: self.p,
            coeffs: out,
        })
    }

    /// σ_λ: ζ ↦ ζ^λ.
    pub fn galois_apply(&self, lambda: i64) -> Result<Self> {
        let p = self.p as i64;
        let l = lambda.rem_euclid(p);
        if l == 0 {
            return Err(CycloError::NotAUnit(lambda, self.p));
        }
        let mut full = vec![BigInt::zero(); p as usize];
        for (j, c) in self.coeffs.iter().enumerate() {
            full[((j as i64 * l) % p) as usize] = c.clone();
        }
        Ok(Self::from_counts(self.p, &full))
    }

    /// Complex conjugation σ_{-1}.
    pub fn conj(&self) -> Self {
        self.galois_apply(-1).unwrap()
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Fixed by the subgroup {σ_{λ^r}} of index r in Gal(Q(ζ_p)/Q).
    pub fn in_index_r_subfield(&self, r: u64) -> Result<bool> {
        let pm1 = self.p - 1;
        if r == 0 || pm1 % r != 0 {
            return Err(CycloError::BadIndex(r, pm1));
        }
        let g = primitive_root(self.p);
        let h = pow_mod(g, r, self.p);
        Ok(self.galois_apply(h as i64)? == *self)
    }

    /// Value at ζ ↦ e^{2πik/p}.
    pub fn complex_embedding(&self, k: u64) -> (f64, f64) {
        let p = self.p as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.coeffs.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * ((k * j as u64) % self.p) as f64 / p;
            let c = c.to_f64().unwrap_or(f64::NAN);
            re += c * t.cos();
            im += c * t.sin();
        }
        (re, im)
    }

    /// Absolute values under all p-1 complex embeddings, k = 1..p-1.
    pub fn complex_abs_all(&self) -> Vec<f64> {
        (1..self.p)
            .map(|k| {
                let (re, im) = self.complex_embedding(k);
                re.hypot(im)
            })
            .collect()
    }

    /// Image under ζ ↦ θ(1) in the given ring.
    pub fn embed_padic(&self, ring: &'static PadicRing, prec: i64) -> Result<PadicElem> {
        let z = padic::theta_one(ring, prec)?;
        Ok(self.embed_with(&z).with_prec(prec))
    }

    /// Image under ζ ↦ z.
    pub fn embed_with(&self, z: &PadicElem) -> PadicElem {
        let r = z.ring();
        let mut acc = PadicElem::exact_zero(r);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + &PadicElem::from_bigint(r, c);
        }
        acc
    }

    /// (n, m) with 1/self = n/m, m a positive integer.
    pub fn inverse_parts(&self) -> Option<(CycloElem, BigInt)> {
        if self.is_zero() {
            return None;
        }
        let mut others = Self::one(self.p);
        for l in 2..self.p as i64 {
            others = others.mul(&self.galois_apply(l).unwrap());
        }
        let norm = self.mul(&others).as_integer()?;
        let mut g = norm.clone();
        for c in &others.coeffs {
            g = g.gcd(c);
        }
        if norm.is_negative() {
            g = -g;
        }
        Some((others.div_exact_int(&g)?, norm / g))
    }
}

impl fmt::Debug for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycloElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}ζ")?,
                _ => write!(f, "{c}ζ^{i}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

/// Smallest primitive root mod p.
pub fn primitive_root(p: u64) -> u64 {
    let fs = crate::ff::prime_factors(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .unwrap_or(1)
}

/// Σ ζ^e over a multiset of exponents.
pub fn zeta_accumulate(p: u64, exponents: &[u64]) -> CycloElem {
    let mut counts = vec![0i64; p as usize];
    for &e in exponents {
        counts[(e % p) as usize] += 1;
    }
    CycloElem::from_small_counts(p, &counts)
}
