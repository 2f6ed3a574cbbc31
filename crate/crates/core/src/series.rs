//! Truncated power series in the parameter a with certified growth floors.
//!
//! A series Σ B_i a^i is kept together with a line ord_p(B_i) ≥ slope·i + floor.
//! Constructors re-check every retained coefficient against that line.

use num_rational::Ratio;
use thiserror::Error;

use crate::padic::{PadicElem, PadicRing};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("coefficient {index} has ord {have}, below the certified floor {need}")]
    GrowthViolation { index: usize, have: String, need: String },
    #[error("coefficient of a^{index} x^{x_power} has ord {have}, below the certified floor {need}")]
    XGrowthViolation { x_power: usize, index: usize, have: String, need: String },
    #[error("growth slopes differ: {0} vs {1}")]
    SlopeMismatch(String, String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// b = (p-1)/p.
pub fn b_param(p: u64) -> Q {
    q(p as i64 - 1, p as i64)
}

/// b' = (p-1)/p^2.
pub fn bprime_param(p: u64) -> Q {
    q(p as i64 - 1, (p * p) as i64)
}

/// Smallest integer ≥ x.
pub fn ceil_q(x: Q) -> i64 {
    x.ceil().to_integer()
}

/// Σ B_i a^i, i < len, in L(slope; floor).
#[derive(Debug, Clone)]
pub struct PadicSeriesA {
    pub coeffs: Vec<PadicElem>,
    pub slope: Q,
    pub floor: Q,
}

fn check_line(coeffs: &[PadicElem], slope: Q, floor: Q, offset: usize) -> Result<()> {
    for (i, c) in coeffs.iter().enumerate() {
        if let Some(o) = c.ord_p() {
            let need = slope * Q::from_integer((i + offset) as i64) + floor;
            if o < need {
                return Err(SeriesError::GrowthViolation {
                    index: i + offset,
                    have: o.to_string(),
                    need: need.to_string(),
                });
            }
        }
    }
    Ok(())
}

impl PadicSeriesA {
    pub fn new(coeffs: Vec<PadicElem>, slope: Q, floor: Q) -> Result<Self> {
        check_line(&coeffs, slope, floor, 0)?;
        Ok(PadicSeriesA { coeffs, slope, floor })
    }

    pub fn zero(ring: &'static PadicRing, len: usize, slope: Q, floor: Q) -> Self {
        PadicSeriesA {
            coeffs: vec![PadicElem::exact_zero(ring); len],
            slope,
            floor,
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Certified lower bound for ord_p of the coefficient of a^i.
    pub fn bound(&self, i: usize) -> Q {
        self.slope * Q::from_integer(i as i64) + self.floor
    }

    pub fn check(&self) -> Result<()> {
        check_line(&self.coeffs, self.slope, self.floor, 0)
    }

    fn same_slope(&self, o: &Self) -> Result<()> {
        if self.slope != o.slope {
            return Err(SeriesError::SlopeMismatch(self.slope.to_string(), o.slope.to_string()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_slope(o)?;
        let n = self.len().min(o.len());
        let coeffs = (0..n).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect();
        Ok(PadicSeriesA {
            coeffs,
            slope: self.slope,
            floor: self.floor.min(o.floor),
        })
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        PadicSeriesA {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            slope: self.slope,
            floor: self.floor,
        }
    }

    /// Product truncated to the shorter length.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.same_slope(o)?;
        let n = self.len().min(o.len());
        Ok(PadicSeriesA {
            coeffs: mul_trunc(&self.coeffs, &o.coeffs, n),
            slope: self.slope,
            floor: self.floor + o.floor,
        })
    }

    /// Multiplication by a constant c with ord_p(c) ≥ c_floor.
    pub fn scale(&self, c: &PadicElem, c_floor: Q) -> Self {
        PadicSeriesA {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
            slope: self.slope,
            floor: self.floor + c_floor,
        }
    }

    /// Multiplication by a^k (length grows by k).
    pub fn shift(&self, k: usize) -> Self {
        let ring = self.coeffs[0].ring();
        let mut coeffs = vec![PadicElem::exact_zero(ring); k];
        coeffs.extend(self.coeffs.iter().cloned());
        PadicSeriesA {
            coeffs,
            slope: self.slope,
            floor: self.floor - self.slope * Q::from_integer(k as i64),
        }
    }

    /// ψ_a: Σ B_i a^i ↦ Σ B_{pi} a^i. Growth slope is multiplied by p.
    pub fn psi(&self, p: u64) -> Self {
        let coeffs = self.coeffs.iter().step_by(p as usize).cloned().collect();
        PadicSeriesA {
            coeffs,
            slope: self.slope * Q::from_integer(p as i64),
            floor: self.floor,
        }
    }

    /// Σ B_i z^i for integral z; the dropped tail is accounted for in the precision.
    pub fn eval(&self, z: &PadicElem) -> PadicElem {
        let ring = z.ring();
        let mut acc = PadicElem::exact_zero(ring);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + &c.lift_to(ring);
        }
        let tail = self.bound(self.len()) * Q::from_integer(ring.p as i64 - 1);
        acc.with_prec(ceil_q(tail))
    }

    /// Lowest precision among the coefficients.
    pub fn prec(&self) -> i64 {
        self.coeffs.iter().map(|c| c.prec()).min().unwrap_or(crate::padic::INF_PREC)
    }
}

/// First n coefficients of the product of two coefficient vectors.
pub fn mul_trunc(a: &[PadicElem], b: &[PadicElem], n: usize) -> Vec<PadicElem> {
    let ring = a.first().or(b.first()).expect("nonempty operand").ring();
    let mut out = vec![PadicElem::exact_zero(ring); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if x.is_zero() && x.prec() >= crate::padic::INF_PREC {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

/// Σ_j T_j x^j with each T_j ∈ L(slope; (b/d)·j + rho): membership in 𝒦(b', b; rho).
#[derive(Debug, Clone)]
pub struct XSeries {
    pub terms: Vec<PadicSeriesA>,
    pub b: Q,
    pub d: u32,
    pub rho: Q,
}

impl XSeries {
    pub fn new(terms: Vec<PadicSeriesA>, b: Q, d: u32, rho: Q) -> Result<Self> {
        let x = XSeries { terms, b, d, rho };
        x.check()?;
        Ok(x)
    }

    pub fn x_floor(&self, j: usize) -> Q {
        self.b * q(j as i64, self.d as i64) + self.rho
    }

    pub fn check(&self) -> Result<()> {
        for (j, t) in self.terms.iter().enumerate() {
            let need = self.x_floor(j);
            check_line(&t.coeffs, t.slope, need, 0).map_err(|e| match e {
                SeriesError::GrowthViolation { index, have, need } => SeriesError::XGrowthViolation {
                    x_power: j,
                    index,
                    have,
                    need,
                },
                other => other,
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::ring;

    #[test]
    fn growth_is_checked() {
        let r = ring(7, 1).unwrap();
        let pi = PadicElem::pi(r);
        let good = vec![PadicElem::one(r), pi.clone(), pi.pow(2)];
        assert!(PadicSeriesA::new(good.clone(), q(1, 6), Q::from_integer(0)).is_ok());
        assert!(PadicSeriesA::new(good, q(1, 3), Q::from_integer(0)).is_err());
    }

    #[test]
    fn psi_and_shift() {
        let r = ring(5, 1).unwrap();
        let c: Vec<PadicElem> = (0..11).map(|i| PadicElem::from_i64(r, i + 1)).collect();
        let s = PadicSeriesA::new(c, Q::from_integer(0), Q::from_integer(0)).unwrap();
        let ps = s.psi(5);
        assert_eq!(ps.len(), 3);
        assert!(ps.coeffs[2].eq_mod(&PadicElem::from_i64(r, 11)));
        let sh = s.shift(2);
        assert!(sh.coeffs[0].is_zero() && sh.coeffs[2].eq_mod(&PadicElem::one(r)));
    }
}
