//! Polynomials in the working format, Horner evaluation, and the
//! extended-precision reference and error normaliser.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::fpbits::{FloatSpec, OverflowExt};
use crate::hexfloat;

/// Coefficients `P_0..P_n`, lowest degree first, trailing zeros trimmed.
/// The zero polynomial is `[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Build from working-format coefficients. Values that are not finite or
    /// not representable in `spec` are rejected.
    pub fn new(coeffs: Vec<f64>, spec: &FloatSpec) -> Result<Self> {
        if let Some((i, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !spec.is_representable(**c))
        {
            return Err(Error::InvalidInput(format!(
                "coefficient {i} ({c:e}) is not a finite working-format value"
            )));
        }
        Ok(Self::from_trusted(coeffs))
    }

    /// Build from arbitrary `f64` values, rounding each to the working format.
    pub fn from_rounded(coeffs: &[f64], spec: &FloatSpec) -> Result<Self> {
        let rounded = coeffs
            .iter()
            .map(|&c| spec.to_working(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_trusted(rounded))
    }

    pub(crate) fn from_trusted(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0.0]
    }

    /// Parse `{"coeffs": [...]}` with entries as decimal or hex strings, or
    /// bare JSON numbers.
    pub fn from_json(text: &str, spec: &FloatSpec) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc<'a> {
            #[serde(borrow)]
            coeffs: Vec<&'a RawValue>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.coeffs.is_empty() {
            return Err(Error::Parse("\"coeffs\" must not be empty".into()));
        }
        let coeffs = doc
            .coeffs
            .iter()
            .map(|raw| {
                let lit = raw.get().trim();
                let lit = lit
                    .strip_prefix('"')
                    .and_then(|s| s.strip_suffix('"'))
                    .unwrap_or(lit);
                hexfloat::parse_value(lit, spec)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_trusted(coeffs))
    }

    /// `{"coeffs": ["0x...", ...]}` with exact hex literals.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            #[serde(with = "hexfloat::serde_hex::vec")]
            coeffs: &'a [f64],
        }
        serde_json::to_string(&Doc { coeffs: &self.coeffs }).expect("plain strings serialize")
    }
}

/// Horner's method, every operation rounded to the working format:
/// `H = 0; for i = n..0 { H = H*x + P_i }`.
pub fn horner_eval(p: &Polynomial, x: f64, spec: &FloatSpec) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite evaluation point {x}")));
    }
    let mut h = 0.0;
    for (i, &c) in p.coeffs.iter().enumerate().rev() {
        let hx = spec.mul(h, x).at("horner_eval", i)?;
        h = spec.add(hx, c).at("horner_eval", i)?;
    }
    Ok(h)
}

/// Coefficient `i` of the result is `(i+1) P_{i+1}`, rounded.
pub fn derivative(p: &Polynomial, spec: &FloatSpec) -> Result<Polynomial> {
    if p.degree() == 0 {
        return Ok(Polynomial::zero());
    }
    let coeffs = p.coeffs[1..]
        .iter()
        .enumerate()
        .map(|(i, &c)| spec.round((i + 1) as f64 * c).at("derivative", i + 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(Polynomial::from_trusted(coeffs))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated Horner over `f64` coefficients in `f64`, accurate as if
/// computed with twice the `f64` precision and rounded once.
pub(crate) fn compensated_horner(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len() - 1;
    let mut s = coeffs[n];
    let mut c = 0.0f64;
    for &a in coeffs[..n].iter().rev() {
        let (p, pi) = two_prod(s, x);
        let (sum, sigma) = two_sum(p, a);
        s = sum;
        c = c.mul_add(x, pi + sigma);
    }
    s + c
}

/// Ground-truth value of `P(x)` in extended precision (compensated Horner
/// with error-free transformations over `f64`).
pub fn reference_eval(p: &Polynomial, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite evaluation point {x}")));
    }
    let v = compensated_horner(&p.coeffs, x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            context: "reference_eval",
            step: 0,
        })
    }
}

/// Worst-case expected error of evaluating `P` near `x` as if its
/// coefficients had been rounded to the working format:
/// `|P'(x)| eps/2 + sum |n P_n x^(n-1)| eps/2`, all in `f64`.
pub fn e_max(p: &Polynomial, x: f64, spec: &FloatSpec) -> f64 {
    let n = p.degree();
    if n == 0 {
        return 0.0;
    }
    // i * P_i is exact in f64 for working-format coefficients
    let dcoeffs: Vec<f64> = (1..=n).map(|i| i as f64 * p.coeffs[i]).collect();
    let slope = compensated_horner(&dcoeffs, x).abs();
    let ax = x.abs();
    let spread = dcoeffs
        .iter()
        .rev()
        .fold(0.0f64, |acc, &d| acc.mul_add(ax, d.abs()));
    let half_eps = spec.eps() / 2.0;
    slope * half_eps + spread * half_eps
}
