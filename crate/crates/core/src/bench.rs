//! Random polynomials with roots drawn as `±m * 2^e` (independent uniform
//! mantissa and exponent), and the accuracy experiment comparing Horner with
//! plan-based evaluation at those roots.
//!
//! Polynomial `i` of an experiment draws from ChaCha8 stream `i` of the
//! experiment seed, so rows do not depend on processing order.

use std::io::Write;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accurate::eval_plan;
use crate::error::{Error, Result};
use crate::fpbits::{FloatSpec, OverflowExt};
use crate::hexfloat::format_hex;
use crate::nearby::{build_plan_with, PlanOptions};
use crate::poly::{e_max, horner_eval, reference_eval, Polynomial};

/// Rows per order in the order sweep.
pub const SWEEP_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    /// N, the degree of each polynomial.
    pub order: usize,
    /// D >= 1; larger is tamer.
    pub difficulty: f64,
    /// F, the exponent bound.
    pub max_exponent: i32,
    pub seed: u64,
    /// Number of polynomials.
    pub count: usize,
}

impl RandomSpec {
    pub fn new(order: usize, difficulty: f64, seed: u64, count: usize, spec: &FloatSpec) -> Result<Self> {
        let s = RandomSpec {
            order,
            difficulty,
            max_exponent: spec.max_exponent(),
            seed,
            count,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Domain("order must be >= 1".into()));
        }
        if !self.difficulty.is_finite() || self.difficulty < 1.0 {
            return Err(Error::Domain(format!(
                "difficulty must be finite and >= 1, got {}",
                self.difficulty
            )));
        }
        if self.max_exponent < 1 {
            return Err(Error::Domain("max_exponent must be positive".into()));
        }
        Ok(())
    }

    /// Half-width of the exponent distribution, `F / (N D)`.
    pub fn exponent_bound(&self) -> f64 {
        self.max_exponent as f64 / (self.order as f64 * self.difficulty)
    }

    /// RNG for polynomial `index`.
    pub fn rng_for(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedPoly {
    pub poly: Polynomial,
    /// Construction roots, in multiplication order.
    pub roots: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub poly_id: usize,
    pub root_index: usize,
    pub root: f64,
    pub err_horner: f64,
    pub err_accurate: f64,
    pub e_max: f64,
}

/// Uniform on the open interval `(lo, hi)`.
fn open_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

/// One root draw before rounding: `sign * mantissa * 2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootDraw {
    pub sign: f64,
    /// Uniform in (0.5, 1).
    pub mantissa: f64,
    /// Uniform in (-F/(ND), F/(ND)); a continuous real.
    pub exponent: f64,
}

impl RootDraw {
    pub fn value(&self) -> f64 {
        self.sign * self.mantissa * self.exponent.exp2()
    }
}

pub fn draw_root<R: Rng>(spec: &RandomSpec, rng: &mut R) -> RootDraw {
    let bound = spec.exponent_bound();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mantissa = open_uniform(rng, 0.5, 1.0);
    let exponent = if bound > 0.0 { open_uniform(rng, -bound, bound) } else { 0.0 };
    RootDraw {
        sign,
        mantissa,
        exponent,
    }
}

/// N roots `s * m * 2^e`: `s` in {+1, -1}, `m` uniform in (0.5, 1), `e`
/// uniform in (-F/(ND), F/(ND)). Computed in `f64`, rounded once.
pub fn gen_roots<R: Rng>(spec: &RandomSpec, rng: &mut R, fspec: &FloatSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    (0..spec.order)
        .map(|i| fspec.round(draw_root(spec, rng).value()).at("gen_roots", i))
        .collect()
}

/// Monic `prod (x - r_k)`, multiplied in the given order with every
/// coefficient operation rounded.
pub fn poly_from_roots(roots: &[f64], fspec: &FloatSpec) -> Result<GeneratedPoly> {
    let (first, rest) = roots
        .split_first()
        .ok_or(Error::Empty("poly_from_roots needs at least one root"))?;
    let mut coeffs = vec![-first, 1.0];
    for (k, &r) in rest.iter().enumerate() {
        let mut next = vec![0.0; coeffs.len() + 1];
        next[coeffs.len()] = 1.0;
        for i in 0..coeffs.len() {
            let t = fspec.mul(r, coeffs[i]).at("poly_from_roots", k + 1)?;
            next[i] = if i == 0 {
                -t
            } else {
                fspec.sub(coeffs[i - 1], t).at("poly_from_roots", k + 1)?
            };
        }
        coeffs = next;
    }
    Ok(GeneratedPoly {
        poly: Polynomial::from_trusted(coeffs),
        roots: roots.to_vec(),
    })
}

/// The `index`-th polynomial of an experiment.
pub fn generate(spec: &RandomSpec, index: usize, fspec: &FloatSpec) -> Result<GeneratedPoly> {
    let mut rng = spec.rng_for(index);
    let roots = gen_roots(spec, &mut rng, fspec)?;
    poly_from_roots(&roots, fspec)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Experiment {
    pub rows: Vec<ErrorRow>,
    /// Polynomials whose construction overflowed.
    pub skipped_polys: usize,
    /// Roots skipped for `e_max = 0` or an overflowing evaluation.
    pub skipped_roots: usize,
}

/// One row for `root` of `poly`, or `None` when it has to be skipped.
pub fn measure_root(
    poly: &Polynomial,
    poly_id: usize,
    root_index: usize,
    root: f64,
    fspec: &FloatSpec,
    options: &PlanOptions,
) -> Option<ErrorRow> {
    let norm = e_max(poly, root, fspec);
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    let truth = reference_eval(poly, root).ok()?;
    let h = horner_eval(poly, root, fspec).ok()?;
    let plan = build_plan_with(poly, root, fspec, options).ok()?;
    let a = eval_plan(&plan, root, fspec).ok()?;
    Some(ErrorRow {
        poly_id,
        root_index,
        root,
        err_horner: (h - truth).abs() / norm,
        err_accurate: (a - truth).abs() / norm,
        e_max: norm,
    })
}

pub fn run_experiment(spec: &RandomSpec, fspec: &FloatSpec) -> Result<Experiment> {
    run_experiment_with(spec, fspec, &PlanOptions::default())
}

/// Evaluate every construction root of `spec.count` random polynomials.
pub fn run_experiment_with(
    spec: &RandomSpec,
    fspec: &FloatSpec,
    options: &PlanOptions,
) -> Result<Experiment> {
    spec.validate()?;
    let mut out = Experiment::default();
    for id in 0..spec.count {
        let generated = match generate(spec, id, fspec) {
            Ok(g) => g,
            Err(e) if e.is_overflow() => {
                info!("polynomial {id}: construction overflowed, skipped");
                out.skipped_polys += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        for (k, &r) in generated.roots.iter().enumerate() {
            match measure_root(&generated.poly, id, k, r, fspec, options) {
                Some(row) => out.rows.push(row),
                None => {
                    info!("polynomial {id} root {k} ({r:e}): skipped");
                    out.skipped_roots += 1;
                }
            }
        }
    }
    if out.skipped_polys + out.skipped_roots > 0 {
        info!(
            "skipped {} polynomials and {} roots",
            out.skipped_polys, out.skipped_roots
        );
    }
    Ok(out)
}

/// Order-sweep configuration: `SWEEP_POINTS / order` polynomials (at least one).
pub fn sweep_spec(order: usize, difficulty: f64, seed: u64, fspec: &FloatSpec) -> Result<RandomSpec> {
    RandomSpec::new(order, difficulty, seed, (SWEEP_POINTS / order.max(1)).max(1), fspec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub median: f64,
    pub p10: f64,
    pub p90: f64,
    pub geometric_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub horner: Stats,
    pub accurate: Stats,
    /// `median(err_horner) / median(err_accurate)`.
    pub improvement_factor: f64,
}

/// Linear interpolation between closest ranks of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

fn stats(mut values: Vec<f64>) -> Stats {
    values.sort_by(f64::total_cmp);
    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    Stats {
        median: quantile(&values, 0.5),
        p10: quantile(&values, 0.1),
        p90: quantile(&values, 0.9),
        geometric_mean: mean_log.exp(),
    }
}

pub fn summarize(rows: &[ErrorRow]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(Error::Empty("summarize needs at least one row"));
    }
    let horner = stats(rows.iter().map(|r| r.err_horner).collect());
    let accurate = stats(rows.iter().map(|r| r.err_accurate).collect());
    let improvement_factor = if horner.median == accurate.median {
        1.0
    } else {
        horner.median / accurate.median
    };
    Ok(Summary {
        rows: rows.len(),
        horner,
        accurate,
        improvement_factor,
    })
}

pub const CSV_HEADER: [&str; 5] = ["poly_id", "root_hex", "err_horner", "err_accurate", "e_max"];

/// Decimal scientific notation with 9 significant digits.
pub fn format_sci(v: f64) -> String {
    format!("{v:.8e}")
}

/// Rows in `(poly_id, root_index)` order, then the summary as `#` lines.
pub fn write_csv<W: Write>(out: W, rows: &[ErrorRow], summary: Option<&Summary>) -> std::io::Result<()> {
    let mut sorted: Vec<&ErrorRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.poly_id, r.root_index));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in sorted {
        w.write_record([
            r.poly_id.to_string(),
            format_hex(r.root),
            format_sci(r.err_horner),
            format_sci(r.err_accurate),
            format_sci(r.e_max),
        ])?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    if let Some(s) = summary {
        for line in summary_lines(s) {
            writeln!(out, "# {line}")?;
        }
    }
    out.flush()
}

pub fn summary_lines(s: &Summary) -> Vec<String> {
    let method = |name: &str, st: &Stats| {
        format!(
            "{name}: median={} p10={} p90={} geomean={}",
            format_sci(st.median),
            format_sci(st.p10),
            format_sci(st.p90),
            format_sci(st.geometric_mean)
        )
    };
    vec![
        format!("rows={}", s.rows),
        method("horner", &s.horner),
        method("accurate", &s.accurate),
        format!("improvement_factor={}", format_sci(s.improvement_factor)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: FloatSpec = FloatSpec::SINGLE;

    fn row(h: f64, a: f64) -> ErrorRow {
        ErrorRow {
            poly_id: 0,
            root_index: 0,
            root: 1.0,
            err_horner: h,
            err_accurate: a,
            e_max: 1.0,
        }
    }

    #[test]
    fn spec_validation() {
        assert!(RandomSpec::new(0, 1.0, 1, 1, &S).is_err());
        assert!(RandomSpec::new(8, 0.5, 1, 1, &S).is_err());
        assert!(RandomSpec::new(8, f64::NAN, 1, 1, &S).is_err());
        let s = RandomSpec::new(8, 1.0, 1, 1, &S).unwrap();
        assert_eq!(s.exponent_bound(), 127.0 / 8.0);
    }

    #[test]
    fn small_products() {
        assert_eq!(poly_from_roots(&[0.5], &S).unwrap().poly.coeffs(), &[-0.5, 1.0]);
        assert_eq!(
            poly_from_roots(&[0.5, -0.5], &S).unwrap().poly.coeffs(),
            &[-0.25, 0.0, 1.0]
        );
        assert_eq!(
            poly_from_roots(&[1.0, 2.0, 3.0], &S).unwrap().poly.coeffs(),
            &[-6.0, 11.0, -6.0, 1.0]
        );
        assert!(matches!(poly_from_roots(&[], &S), Err(Error::Empty(_))));
    }

    #[test]
    fn product_overflow_is_reported() {
        let big = 1e30f32 as f64;
        assert!(poly_from_roots(&[big, big], &S).unwrap_err().is_overflow());
    }

    #[test]
    fn generation_is_deterministic_per_stream() {
        let spec = RandomSpec::new(8, 1.0, 7, 4, &S).unwrap();
        assert_eq!(generate(&spec, 2, &S).unwrap(), generate(&spec, 2, &S).unwrap());
        assert_ne!(generate(&spec, 1, &S).unwrap(), generate(&spec, 2, &S).unwrap());
    }

    #[test]
    fn huge_difficulty_keeps_roots_near_unit_mantissa() {
        let spec = RandomSpec::new(8, 1e9, 3, 1, &S).unwrap();
        let mut rng = spec.rng_for(0);
        for _ in 0..1000 {
            for r in gen_roots(&spec, &mut rng, &S).unwrap() {
                assert!((0.5..=1.0).contains(&r.abs()), "{r}");
            }
        }
    }

    #[test]
    fn summary_examples() {
        let rows = vec![row(2.0, 2.0), row(5.0, 5.0), row(1.0, 1.0)];
        let s = summarize(&rows).unwrap();
        assert_eq!(s.improvement_factor, 1.0);
        assert_eq!(s.horner.median, 2.0);

        let s = summarize(&[row(3.0, 0.25)]).unwrap();
        assert_eq!(s.horner.median, 3.0);
        assert_eq!(s.accurate.median, 0.25);
        assert_eq!(s.accurate.p10, 0.25);
        assert_eq!(s.improvement_factor, 12.0);

        assert!(matches!(summarize(&[]), Err(Error::Empty(_))));
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        let s = stats(vec![1.0, 100.0]);
        assert!((s.geometric_mean - 10.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let mut rows = vec![row(1.5, 0.001), row(2.0, 3.0)];
        rows[0].poly_id = 1;
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows, Some(&summarize(&rows).unwrap())).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "poly_id,root_hex,err_horner,err_accurate,e_max");
        assert_eq!(lines[1], "0,0x1p+0,2.00000000e0,3.00000000e0,1.00000000e0");
        assert_eq!(lines[2], "1,0x1p+0,1.50000000e0,1.00000000e-3,1.00000000e0");
        assert!(lines[3].starts_with("# rows=2"));
    }
}
