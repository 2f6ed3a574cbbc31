//! Newton polygons over exact rationals, predicted fibre slopes and the
//! quadratic lower bound for odd symmetric powers.

use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

use crate::lpoly::{Coeffs, LPoly};

pub type Q = Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewtonError {
    #[error("empty input or infinite constant term")]
    EmptyInput,
    #[error("slope formula needs p >= d+6 and p not dividing d (p={p}, d={d})")]
    HypothesisFailed { p: u64, d: u32 },
}

pub type Result<T> = std::result::Result<T, NewtonError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NPolygon {
    pub vertices: Vec<(usize, Q)>,
    /// (slope, horizontal length), nondecreasing.
    pub slopes: Vec<(Q, usize)>,
}

impl NPolygon {
    pub fn degree(&self) -> usize {
        self.vertices.last().map(|v| v.0).unwrap_or(0)
    }

    /// Slopes repeated by multiplicity.
    pub fn slope_list(&self) -> Vec<Q> {
        self.slopes.iter().flat_map(|&(s, m)| std::iter::repeat_n(s, m)).collect()
    }

    /// Invariance of the slope multiset under s ↦ w − s.
    pub fn symmetric_about(&self, w: Q) -> bool {
        let a = self.slope_list();
        let mut b: Vec<Q> = a.iter().map(|s| w - s).collect();
        b.reverse();
        a == b
    }
}

/// Lower convex hull of the finite points; `None` entries are skipped.
pub fn newton_polygon(vals: &[(usize, Option<Q>)]) -> Result<NPolygon> {
    let mut pts: Vec<(usize, Q)> = vals.iter().filter_map(|&(i, v)| v.map(|v| (i, v))).collect();
    pts.sort_by_key(|x| x.0);
    pts.dedup_by_key(|x| x.0);
    match (vals.first(), pts.first()) {
        (Some((i0, Some(_))), Some(first)) if first.0 == *i0 => {}
        _ => return Err(NewtonError::EmptyInput),
    }
    let mut hull: Vec<(usize, Q)> = Vec::new();
    for pt in pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop the middle point unless it lies strictly below the chord
            let lhs = (y2 - y1) * Q::from_integer((pt.0 - x1) as i64);
            let rhs = (pt.1 - y1) * Q::from_integer((x2 - x1) as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut slopes: Vec<(Q, usize)> = Vec::new();
    for w in hull.windows(2) {
        let len = w[1].0 - w[0].0;
        let s = (w[1].1 - w[0].1) / Q::from_integer(len as i64);
        match slopes.last_mut() {
            Some(last) if last.0 == s => last.1 += len,
            _ => slopes.push((s, len)),
        }
    }
    Ok(NPolygon { vertices: hull, slopes })
}

/// Polygon of an L-polynomial. p-adic coefficients that vanish to working
/// precision are skipped.
pub fn polygon_of(l: &LPoly) -> Result<NPolygon> {
    let vals: Vec<(usize, Option<Q>)> = l.valuations().into_iter().enumerate().collect();
    newton_polygon(&vals)
}

/// Multiplication by p modulo d on {1, .., d-1}.
pub fn tau(p: u64, d: u32, j: u32) -> u32 {
    ((p % d as u64) * j as u64 % d as u64) as u32
}

/// Slopes j − ((d−1)/(p−1))·(pj − τ_p(j))/d, j = 1..d−1, sorted.
///
/// For d = 3 the same values hold for every p ≥ 5, so the hypothesis is
/// relaxed there.
pub fn predicted_fibre_slopes(d: u32, p: u64) -> Result<Vec<Q>> {
    let ok = d >= 2 && p % d as u64 != 0 && (p >= d as u64 + 6 || (d == 3 && p >= 5));
    if !ok {
        return Err(NewtonError::HypothesisFailed { p, d });
    }
    let dm = d as i64;
    let pm = p as i64;
    let mut out: Vec<Q> = (1..d)
        .map(|j| {
            let j64 = j as i64;
            let r = Q::new(pm * j64 - tau(p, d, j) as i64, dm);
            Q::from_integer(j64) - Q::new(dm - 1, pm - 1) * r
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Sum of the predicted slopes.
pub fn predicted_slope_sum(d: u32, p: u64) -> Result<Q> {
    Ok(predicted_fibre_slopes(d, p)?.into_iter().fold(Q::zero(), |a, b| a + b))
}

/// The d = 3 case: {1/3, 2/3} for p ≡ 1 mod 3, else {(p+1)/(3(p−1)), 2(p−2)/(3(p−1))}.
pub fn cubic_fibre_slopes(p: u64) -> Vec<Q> {
    let pm = p as i64;
    if p % 3 == 1 {
        vec![Q::new(1, 3), Q::new(2, 3)]
    } else {
        let mut v = vec![Q::new(pm + 1, 3 * (pm - 1)), Q::new(2 * (pm - 2), 3 * (pm - 1))];
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundRow {
    pub m: usize,
    /// Valuation, or the certified floor when `is_floor`; `None` for an exact zero.
    pub ord: Option<Q>,
    pub is_floor: bool,
    pub bound: Q,
    pub bound_alt: Q,
    pub conjectural: Q,
    pub margin: Option<Q>,
    pub conj_margin: Option<Q>,
}

#[derive(Debug, Clone)]
pub struct BoundReport {
    pub ok: bool,
    pub rows: Vec<BoundRow>,
}

/// ((p−1)²/3p²)(m² + m + mk).
pub fn odd_bound(m: usize, k: u32, p: u64) -> Q {
    let (m, k, p) = (m as i64, k as i64, p as i64);
    Q::new((p - 1) * (p - 1) * (m * m + m + m * k), 3 * p * p)
}

/// The same bound written as ((p−1)²/3p²)(m² + (k+1)m).
pub fn odd_bound_alt(m: usize, k: u32, p: u64) -> Q {
    let (m, k, p) = (m as i64, k as i64, p as i64);
    Q::new((p - 1) * (p - 1) * (m * m + (k + 1) * m), 3 * p * p)
}

pub fn conjectural_bound(m: usize, k: u32) -> Q {
    let (m, k) = (m as i64, k as i64);
    Q::new(m * m + m + m * k, 3)
}

/// Checks ord(c_m) ≥ odd_bound(m) for every coefficient.
pub fn check_lower_bound(l: &LPoly, k: u32, p: u64) -> BoundReport {
    let vals = l.valuations();
    let floors: Vec<Option<Q>> = match &l.coeffs {
        Coeffs::Padic(c) => c.iter().map(|x| Some(Q::new(x.prec(), p as i64 - 1))).collect(),
        Coeffs::Exact(_) => vec![None; vals.len()],
    };
    let mut ok = true;
    let rows = vals
        .iter()
        .enumerate()
        .map(|(m, v)| {
            let (ord, is_floor) = match v {
                Some(o) => (Some(*o), false),
                None => (floors[m], floors[m].is_some()),
            };
            let bound = odd_bound(m, k, p);
            let conjectural = conjectural_bound(m, k);
            if ord.is_some_and(|o| o < bound) {
                ok = false;
            }
            BoundRow {
                m,
                ord,
                is_floor,
                bound,
                bound_alt: odd_bound_alt(m, k, p),
                conjectural,
                margin: ord.map(|o| o - bound),
                conj_margin: ord.map(|o| o - conjectural),
            }
        })
        .collect();
    BoundReport { ok, rows }
}

/// CSV rows index,valuation_num,valuation_den for the hull vertices.
pub fn polygon_csv(poly: &NPolygon) -> String {
    let mut s = String::from("index,valuation_num,valuation_den\n");
    for (i, v) in &poly.vertices {
        s.push_str(&format!("{},{},{}\n", i, v.numer(), v.denom()));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn z(n: i64) -> Option<Q> {
        Some(Q::from_integer(n))
    }

    #[test]
    fn two_segments() {
        let p = newton_polygon(&[(0, z(0)), (1, z(1)), (2, z(3))]).unwrap();
        assert_eq!(p.vertices.len(), 3);
        assert_eq!(p.slope_list(), vec![Q::from_integer(1), Q::from_integer(2)]);
    }

    #[test]
    fn degree_zero_and_empty() {
        let p = newton_polygon(&[(0, z(0))]).unwrap();
        assert!(p.slopes.is_empty());
        assert_eq!(newton_polygon(&[]), Err(NewtonError::EmptyInput));
        assert_eq!(newton_polygon(&[(0, None), (1, z(1))]), Err(NewtonError::EmptyInput));
    }

    #[test]
    fn first_slope_five_thirds() {
        let p = newton_polygon(&[(0, z(0)), (1, Some(Q::new(5, 3))), (2, z(4))]).unwrap();
        assert_eq!(p.vertices[1], (1, Q::new(5, 3)));
        assert_eq!(p.slope_list()[0], Q::new(5, 3));
        assert!(p.symmetric_about(Q::from_integer(4)));
    }

    #[test]
    fn predicted() {
        assert_eq!(predicted_fibre_slopes(3, 7).unwrap(), vec![Q::new(1, 3), Q::new(2, 3)]);
        assert_eq!(predicted_fibre_slopes(3, 11).unwrap(), vec![Q::new(2, 5), Q::new(3, 5)]);
        assert_eq!(predicted_fibre_slopes(3, 5).unwrap(), vec![Q::new(1, 2), Q::new(1, 2)]);
        assert_eq!(
            predicted_fibre_slopes(5, 11).unwrap(),
            (1..5).map(|j| Q::new(j, 5)).collect::<Vec<_>>()
        );
        assert!(predicted_fibre_slopes(5, 7).is_err());
        for p in [5, 7, 11, 13, 17, 19] {
            assert_eq!(predicted_fibre_slopes(3, p).unwrap(), cubic_fibre_slopes(p));
        }
    }

    #[test]
    fn bounds() {
        assert_eq!(odd_bound(0, 3, 7), Q::zero());
        assert_eq!(odd_bound(1, 3, 7), Q::new(180, 147));
        assert!(odd_bound(1, 1, 7) < Q::one());
        assert_eq!(odd_bound(3, 5, 11), odd_bound_alt(3, 5, 11));
    }
}
