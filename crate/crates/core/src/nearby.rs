//! Construction of a nearby polynomial `P̂` and point `x̂` whose Horner
//! evaluation is exact, and of the shifted-form coefficients `C_j` with
//!
//! ```text
//! P(x) = C_{-1} + (x - x̂) * sum_{j=0}^{n-1} C_j x^j
//! C_j  = sum_{i=0}^{n-1-j} P_{j+1+i} x̂^i
//! ```
//!
//! Each `C_j` is accumulated as an exact head (the Horner partial sums of
//! `P̂` at `x̂`) plus a small tail (Horner over `P - P̂`), then rounded once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpbits::{self, bit_count_unchecked, exponent_unchecked, truncate_bits, FloatSpec, OverflowExt};
use crate::hexfloat;
use crate::poly::Polynomial;

/// How the exponent gaps are reduced to a single number when choosing the
/// reduced mantissa budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaReduction {
    /// Largest signed gap.
    #[default]
    Signed,
    /// Largest absolute gap (diagnostic).
    Absolute,
}

/// Which width the trailing-zero search tests truncations of `x` at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SerendipityMode {
    /// `T_{m_hat - R}`: the search stays inside the reduced budget.
    #[default]
    BudgetRelative,
    /// `T_{M - R}` with the full mantissa width (diagnostic). Plans built this
    /// way may exceed the exact-product budget.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PlanOptions {
    pub delta: DeltaReduction,
    pub serendipity: SerendipityMode,
}

/// Output of the easy-polynomial pass.
#[derive(Debug, Clone, PartialEq)]
pub struct EasyBuild {
    pub x_hat: f64,
    /// `P̂_0..P̂_n`.
    pub p_hat: Vec<f64>,
    /// `partials[i] = H_i`, the Horner partial sum of `P̂` at `x̂` after
    /// adding `P̂_i`. `partials[0]` is `P̂(x̂)`.
    pub partials: Vec<f64>,
}

/// Everything needed to evaluate `P` accurately near `x̂` at Horner cost.
#[derive(Debug, Clone, PartialEq)]
pub struct NearbyPlan {
    pub x_hat: f64,
    pub p_hat: Vec<f64>,
    /// `c[k]` holds `C_{k-1}`: `c[0] = C_{-1} ≈ P(x̂)`, `c[n] = C_{n-1} = P_n`.
    pub c: Vec<f64>,
    /// Horner partial sums `H_i` of `P̂` at `x̂` (heads of the `C_j`).
    pub partials: Vec<f64>,
    pub m_hat: u32,
    /// Bits given to the partial-sum side; `x̂` keeps `m_hat - r`.
    pub r: u32,
    pub source_degree: usize,
}

impl NearbyPlan {
    pub fn degree(&self) -> usize {
        self.source_degree
    }

    /// `C_j` for `j` in `-1..n`.
    pub fn c_at(&self, j: isize) -> f64 {
        self.c[(j + 1) as usize]
    }

    /// Distance from `x̂` beyond which the plan is considered stale:
    /// `2^(E(x̂) - floor((m_hat - r) / 2))`.
    pub fn stale_radius(&self) -> f64 {
        let e = exponent_unchecked(self.x_hat) - ((self.m_hat - self.r) / 2) as i32;
        fpbits::pow2(e.clamp(-1022, 1023))
    }
}

/// Per-step outcome of the exactness conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepCondition {
    pub step: usize,
    pub delta: i32,
    pub input_ok: bool,
    pub output_ok: bool,
}

impl StepCondition {
    pub fn ok(&self) -> bool {
        self.input_ok && self.output_ok
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConditionReport {
    pub steps: Vec<StepCondition>,
}

impl ConditionReport {
    pub fn all_ok(&self) -> bool {
        self.steps.iter().all(StepCondition::ok)
    }

    pub fn failures(&self) -> impl Iterator<Item = &StepCondition> {
        self.steps.iter().filter(|s| !s.ok())
    }
}

/// Lower clamp for the reduced budget, `ceil((M+1)/3)`.
pub fn min_budget(spec: &FloatSpec) -> u32 {
    (spec.mantissa_bits() + 1).div_ceil(3)
}

fn check_point(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite evaluation point {x}")));
    }
    if x == 0.0 {
        return Err(Error::DegeneratePoint);
    }
    Ok(())
}

/// Easy-polynomial pass with an explicit split: `x̂ = T_{x_bits}(x)`, then
///
/// ```text
/// H = 0
/// for i = n..0:
///     S   = H * x̂            (exact: H and x̂ fit the product budget)
///     H   = T_{h_bits}(S + P_i)
///     P̂_i = H - S
/// ```
///
/// `P̂_i` absorbs the low bits of the product so that every `H` keeps at
/// most `h_bits` fraction bits.
pub fn build_easy(
    p: &Polynomial,
    x: f64,
    spec: &FloatSpec,
    x_bits: u32,
    h_bits: u32,
) -> Result<EasyBuild> {
    check_point(x)?;
    if x_bits + h_bits > spec.mantissa_bits() {
        return Err(Error::Domain(format!(
            "split {x_bits}+{h_bits} exceeds mantissa bits {}",
            spec.mantissa_bits()
        )));
    }
    let coeffs = p.coeffs();
    let n = p.degree();
    let x_hat = truncate_bits(x, x_bits);
    let mut p_hat = vec![0.0; n + 1];
    let mut partials = vec![0.0; n + 1];
    let mut h = 0.0;
    for i in (0..=n).rev() {
        let s = spec.mul(h, x_hat).at("build_easy", i)?;
        let v = spec.add(s, coeffs[i]).at("build_easy", i)?;
        h = truncate_bits(v, h_bits);
        p_hat[i] = spec.sub(h, s).at("build_easy", i)?;
        partials[i] = h;
    }
    Ok(EasyBuild {
        x_hat,
        p_hat,
        partials,
    })
}

fn gap(p_n: f64, h_in: f64, x_hat: f64) -> i32 {
    if p_n == 0.0 || h_in == 0.0 || x_hat == 0.0 {
        0
    } else {
        exponent_unchecked(p_n) - exponent_unchecked(h_in) - exponent_unchecked(x_hat)
    }
}

/// Exponent gap `Δ_i = E(P_i) - E(H_{i+1}) - E(x̂)` for each addition step
/// `i = 0..n-1`, where `partials[i+1]` is the partial sum entering step `i`.
/// Steps with a zero operand get `Δ_i = 0`. Constant polynomials have no steps.
pub fn compute_delta(p: &Polynomial, x_hat: f64, partials: &[f64]) -> Vec<i32> {
    let n = p.degree();
    debug_assert!(partials.len() > n);
    (0..n)
        .map(|i| gap(p.coeffs()[i], partials[i + 1], x_hat))
        .collect()
}

/// Reduced mantissa budget `M̂ = max(M - 1 - max Δ, ceil((M+1)/3))`, kept at
/// most `M - 1` so that every split of it still multiplies exactly.
pub fn reduced_bits(p: &Polynomial, x: f64, spec: &FloatSpec) -> Result<u32> {
    reduced_bits_with(p, x, spec, DeltaReduction::Signed)
}

pub fn reduced_bits_with(
    p: &Polynomial,
    x: f64,
    spec: &FloatSpec,
    reduction: DeltaReduction,
) -> Result<u32> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite evaluation point {x}")));
    }
    let m = spec.mantissa_bits();
    let x_hat = truncate_bits(x, m / 2);
    let coeffs = p.coeffs();
    let mut partials = vec![0.0; coeffs.len()];
    let mut h = 0.0;
    for (i, &c) in coeffs.iter().enumerate().rev() {
        let hx = spec.mul(h, x_hat).at("reduced_bits", i)?;
        h = spec.add(hx, c).at("reduced_bits", i)?;
        partials[i] = h;
    }
    let deltas = compute_delta(p, x_hat, &partials);
    let worst = deltas
        .iter()
        .map(|&d| match reduction {
            DeltaReduction::Signed => d as i64,
            DeltaReduction::Absolute => (d as i64).abs(),
        })
        .max()
        .unwrap_or(0);
    let floor = min_budget(spec) as i64;
    let budget = (m as i64 - 1 - worst).max(floor);
    Ok(budget.clamp(floor, m as i64 - 1) as u32)
}

/// Number of bits `R` given to the partial-sum side. Starts at `m_hat / 2`
/// and takes one more bit from `x̂` for each zero bit of `x` at the
/// truncation boundary.
pub fn serendipity_shift(x: f64, m_hat: u32, spec: &FloatSpec) -> Result<u32> {
    serendipity_shift_with(x, m_hat, spec, SerendipityMode::BudgetRelative)
}

pub fn serendipity_shift_with(
    x: f64,
    m_hat: u32,
    spec: &FloatSpec,
    mode: SerendipityMode,
) -> Result<u32> {
    check_point(x)?;
    if m_hat < min_budget(spec) || m_hat > spec.mantissa_bits() {
        return Err(Error::Domain(format!(
            "reduced budget {m_hat} outside {}..={}",
            min_budget(spec),
            spec.mantissa_bits()
        )));
    }
    let width = serendipity_width(m_hat, spec, mode);
    let mut r = m_hat / 2;
    while r + 1 < width && truncate_bits(x, width - r) == truncate_bits(x, width - r - 1) {
        r += 1;
    }
    Ok(r)
}

fn serendipity_width(m_hat: u32, spec: &FloatSpec, mode: SerendipityMode) -> u32 {
    match mode {
        SerendipityMode::BudgetRelative => m_hat,
        SerendipityMode::Literal => spec.mantissa_bits(),
    }
}

/// `C_{-1}..C_{n-1}` from `P`, `P̂` and `x̂`. The head sums are recomputed by
/// a working-precision Horner pass over `P̂`, which is exact whenever `P̂` is.
pub fn compute_c(p: &Polynomial, p_hat: &[f64], x_hat: f64, spec: &FloatSpec) -> Result<Vec<f64>> {
    if p_hat.len() != p.coeffs().len() {
        return Err(Error::InvalidInput(format!(
            "p_hat has {} coefficients, polynomial has {}",
            p_hat.len(),
            p.coeffs().len()
        )));
    }
    let mut partials = vec![0.0; p_hat.len()];
    let mut h = 0.0;
    for i in (0..p_hat.len()).rev() {
        let hx = spec.mul(h, x_hat).at("compute_c", i)?;
        h = spec.add(hx, p_hat[i]).at("compute_c", i)?;
        partials[i] = h;
    }
    c_from_partials(p, p_hat, &partials, x_hat, spec)
}

/// `C_{i-1} = H_i + tail_i` with `tail_i = tail_{i+1} x̂ + (P_i - P̂_i)`.
fn c_from_partials(
    p: &Polynomial,
    p_hat: &[f64],
    partials: &[f64],
    x_hat: f64,
    spec: &FloatSpec,
) -> Result<Vec<f64>> {
    let coeffs = p.coeffs();
    let mut c = vec![0.0; coeffs.len()];
    let mut tail = 0.0;
    for i in (0..coeffs.len()).rev() {
        let d = spec.sub(coeffs[i], p_hat[i]).at("compute_c", i)?;
        let tx = spec.mul(tail, x_hat).at("compute_c", i)?;
        tail = spec.add(tx, d).at("compute_c", i)?;
        c[i] = spec.add(partials[i], tail).at("compute_c", i)?;
    }
    Ok(c)
}

/// Full plan with the reduced budget and the trailing-zero shift applied.
pub fn build_plan(p: &Polynomial, x: f64, spec: &FloatSpec) -> Result<NearbyPlan> {
    build_plan_with(p, x, spec, &PlanOptions::default())
}

pub fn build_plan_with(
    p: &Polynomial,
    x: f64,
    spec: &FloatSpec,
    options: &PlanOptions,
) -> Result<NearbyPlan> {
    if p.degree() == 0 {
        return Err(Error::Domain("a plan needs degree >= 1".into()));
    }
    check_point(x)?;
    let m_hat = reduced_bits_with(p, x, spec, options.delta)?;
    let r = serendipity_shift_with(x, m_hat, spec, options.serendipity)?;
    let x_bits = serendipity_width(m_hat, spec, options.serendipity) - r;
    plan_from_split(p, x, spec, x_bits, r, m_hat)
}

/// Plan for a fixed split, without the budget heuristics. `m_hat` is
/// reported as `x_bits + h_bits`.
pub fn build_plan_with_split(
    p: &Polynomial,
    x: f64,
    spec: &FloatSpec,
    x_bits: u32,
    h_bits: u32,
) -> Result<NearbyPlan> {
    if p.degree() == 0 {
        return Err(Error::Domain("a plan needs degree >= 1".into()));
    }
    plan_from_split(p, x, spec, x_bits, h_bits, x_bits + h_bits)
}

fn plan_from_split(
    p: &Polynomial,
    x: f64,
    spec: &FloatSpec,
    x_bits: u32,
    h_bits: u32,
    m_hat: u32,
) -> Result<NearbyPlan> {
    let easy = build_easy(p, x, spec, x_bits, h_bits)?;
    let c = c_from_partials(p, &easy.p_hat, &easy.partials, easy.x_hat, spec)?;
    Ok(NearbyPlan {
        x_hat: easy.x_hat,
        p_hat: easy.p_hat,
        c,
        partials: easy.partials,
        m_hat,
        r: h_bits,
        source_degree: p.degree(),
    })
}

/// Evaluate the per-step exactness conditions on the exponent gap:
///
/// | | `Δ > 0` | `Δ < 0` |
/// |---|---|---|
/// | input | `B(H_{n+1}) <= M - B(x̂) - Δ` | `B(H_{n+1}) <= M - B(x̂)` |
/// | output | `B(H_n) >= Δ` | `B(H_n) >= -Δ` |
///
/// Steps with `Δ = 0` pass. Records run from step `n-1` down to `0`.
///
/// `M` here is the usable product budget `mantissa_bits - 1`: two
/// significands with `b1` and `b2` fraction bits multiply to as many as
/// `b1 + b2 + 2` significant bits, which only fit when `b1 + b2 <= mantissa_bits - 1`.
/// With the full `mantissa_bits` the table accepts steps whose `P̂_i` is rounded.
pub fn check_conditions(plan: &NearbyPlan, p: &Polynomial, spec: &FloatSpec) -> ConditionReport {
    let m = spec.mantissa_bits() as i64 - 1;
    let bx = bit_count_unchecked(plan.x_hat) as i64;
    let steps = (0..p.degree())
        .rev()
        .map(|i| {
            let h_in = plan.partials[i + 1];
            let h_out = plan.partials[i];
            let delta = gap(p.coeffs()[i], h_in, plan.x_hat);
            let b_in = bit_count_unchecked(h_in) as i64;
            let b_out = bit_count_unchecked(h_out) as i64;
            let d = delta as i64;
            let (input_ok, output_ok) = match delta.signum() {
                1 => (b_in <= m - bx - d, b_out >= d),
                -1 => (b_in <= m - bx, b_out >= -d),
                _ => (true, true),
            };
            StepCondition {
                step: i,
                delta,
                input_ok,
                output_ok,
            }
        })
        .collect();
    ConditionReport { steps }
}

#[derive(Serialize, Deserialize)]
struct PlanDump {
    #[serde(with = "hexfloat::serde_hex")]
    x_hat: f64,
    #[serde(with = "hexfloat::serde_hex::vec")]
    p_hat: Vec<f64>,
    #[serde(with = "hexfloat::serde_hex::vec")]
    c: Vec<f64>,
    #[serde(with = "hexfloat::serde_hex::vec")]
    partials: Vec<f64>,
    m_hat: u32,
    r: u32,
    source_degree: usize,
    conditions: ConditionReport,
}

/// JSON dump of a plan and its condition report; floats as hex literals.
pub fn plan_to_json(plan: &NearbyPlan, report: &ConditionReport) -> String {
    let dump = PlanDump {
        x_hat: plan.x_hat,
        p_hat: plan.p_hat.clone(),
        c: plan.c.clone(),
        partials: plan.partials.clone(),
        m_hat: plan.m_hat,
        r: plan.r,
        source_degree: plan.source_degree,
        conditions: report.clone(),
    };
    serde_json::to_string_pretty(&dump).expect("plan dump serializes")
}

pub fn plan_from_json(text: &str) -> Result<(NearbyPlan, ConditionReport)> {
    let d: PlanDump = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = d.source_degree;
    if d.p_hat.len() != n + 1 || d.c.len() != n + 1 || d.partials.len() != n + 1 {
        return Err(Error::Parse(format!(
            "plan vectors must have {} entries for degree {n}",
            n + 1
        )));
    }
    Ok((
        NearbyPlan {
            x_hat: d.x_hat,
            p_hat: d.p_hat,
            c: d.c,
            partials: d.partials,
            m_hat: d.m_hat,
            r: d.r,
            source_degree: n,
        },
        d.conditions,
    ))
}
