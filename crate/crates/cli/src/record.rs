//! Census records and their canonical JSON form.
//!
//! Every integer is a decimal string, keys appear in declaration order and
//! the text ends with a newline, so a parse/serialize round trip is
//! byte-identical.

use expsum::cyclo::CycloElem;
use expsum::lpoly::{Coeffs, LKind, LPoly};
use expsum::padic::{self, PadicElem};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("malformed record: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordKey {
    pub p: String,
    pub d: String,
    /// "fibre" or "sympow".
    pub kind: String,
    /// k for sympow; coefficients of the minimal polynomial of λ over F_p
    /// (low degree first, joined by '_') for fibres.
    pub param: String,
    pub s: String,
}

impl RecordKey {
    pub fn fibre(p: u64, d: u32, minpoly: &[u64], s: usize) -> Self {
        RecordKey {
            p: p.to_string(),
            d: d.to_string(),
            kind: "fibre".into(),
            param: minpoly.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("_"),
            s: s.to_string(),
        }
    }

    pub fn sympow(p: u64, k: u32) -> Self {
        RecordKey {
            p: p.to_string(),
            d: "3".into(),
            kind: "sympow".into(),
            param: k.to_string(),
            s: "1".into(),
        }
    }

    /// File stem inside <root>/p<p>/d<d>/<kind>/.
    pub fn file_stem(&self) -> String {
        match self.kind.as_str() {
            "sympow" => format!("k{}", self.param),
            _ => format!("s{}_m{}", self.s, self.param),
        }
    }
}

/// Base-π expansion Σ digits[j] π^{start+j}, known modulo π^prec.
/// Each digit is a vector of s residues in [0, p).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicNumber {
    pub p: String,
    pub s: String,
    pub prec: String,
    pub start: String,
    pub digits: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    /// Cyclotomic coefficients in the basis 1, ζ, .., ζ^{p-2}.
    pub exact: Option<Vec<Vec<String>>>,
    pub padic: Option<Vec<PadicNumber>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// "oracle", "cohomology" or "both".
    pub method: String,
    pub precision: String,
    pub version: String,
    pub timestamp: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRecord {
    pub key: RecordKey,
    pub payload: Payload,
    pub provenance: Provenance,
}

pub fn canonical_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}

pub fn parse_record(text: &str) -> Result<CensusRecord, RecordError> {
    Ok(serde_json::from_str(text)?)
}

pub fn padic_to_json(x: &PadicElem) -> PadicNumber {
    let r = x.ring();
    let (start, digits) = x.pi_digits();
    PadicNumber {
        p: r.p.to_string(),
        s: r.s.to_string(),
        prec: x.prec().to_string(),
        start: start.to_string(),
        digits: digits.iter().map(|d| d.iter().map(|c| c.to_string()).collect()).collect(),
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, RecordError> {
    s.parse().map_err(|_| RecordError::Malformed(format!("{what} = {s:?}")))
}

pub fn padic_from_json(n: &PadicNumber) -> Result<PadicElem, RecordError> {
    let p: u64 = parse_num(&n.p, "p")?;
    let s: usize = parse_num(&n.s, "s")?;
    let start: i64 = parse_num(&n.start, "start")?;
    let prec: i64 = parse_num(&n.prec, "prec")?;
    let ring = padic::ring(p, s).map_err(|e| RecordError::Malformed(e.to_string()))?;
    let digits = n
        .digits
        .iter()
        .map(|d| d.iter().map(|c| parse_num::<u64>(c, "digit")).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    if start + digits.len() as i64 != prec {
        return Err(RecordError::Malformed("digit count disagrees with prec".into()));
    }
    Ok(PadicElem::from_pi_digits(ring, start, &digits))
}

pub fn cyclo_to_json(c: &CycloElem) -> Vec<String> {
    c.coeffs.iter().map(|x| x.to_string()).collect()
}

pub fn cyclo_from_json(p: u64, v: &[String]) -> Result<CycloElem, RecordError> {
    let coeffs = v
        .iter()
        .map(|x| x.parse::<BigInt>().map_err(|_| RecordError::Malformed(format!("integer {x:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if coeffs.len() != p as usize - 1 {
        return Err(RecordError::Malformed("wrong number of cyclotomic coordinates".into()));
    }
    Ok(CycloElem { p, coeffs })
}

/// Payload holding whichever coefficient domains are available.
pub fn payload_of(exact: Option<&LPoly>, padic: Option<&LPoly>) -> Payload {
    let ex = exact.and_then(|l| match &l.coeffs {
        Coeffs::Exact(c) => Some(c.iter().map(cyclo_to_json).collect()),
        Coeffs::Padic(_) => None,
    });
    let pa = padic.and_then(|l| match &l.coeffs {
        Coeffs::Padic(c) => Some(c.iter().map(padic_to_json).collect()),
        Coeffs::Exact(_) => None,
    });
    Payload { exact: ex, padic: pa }
}

pub fn kind_name(k: &LKind) -> &'static str {
    match k {
        LKind::Fibre { .. } => "fibre",
        LKind::Sympow { .. } => "sympow",
    }
}
