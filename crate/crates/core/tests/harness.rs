mod common;

use common::*;
use nearpoly::bench::{
    draw_root, gen_roots, generate, measure_root, poly_from_roots, run_experiment, summarize,
    write_csv, ErrorRow, RandomSpec, CSV_HEADER,
};
use nearpoly::hexfloat::parse_hex_exact;
use nearpoly::{e_max, eval_plan, horner_eval, reference_eval, build_plan, FloatSpec, PlanOptions, Polynomial};
use rand::Rng;

const S: FloatSpec = FloatSpec::SINGLE;

/// Product of `(x - r_k)` over the rationals, lowest degree first.
fn expand(roots: &[f64]) -> Vec<Q> {
    let mut c = vec![q(1.0)];
    for &r in roots {
        let r = q(r);
        let mut next = vec![q(0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * &r;
        }
        c = next;
    }
    c
}

#[test]
fn small_dyadic_roots_replay_exactly() {
    let mut rng = rng(41);
    for _ in 0..500 {
        let (n, k) = if rng.random_bool(0.5) {
            (rng.random_range(1..=3), 63)
        } else {
            (4, 15)
        };
        let roots: Vec<f64> = (0..n)
            .map(|_| rng.random_range(-k..=k) as f64 / 64.0)
            .collect();
        let g = poly_from_roots(&roots, &S).unwrap();
        let expected = expand(&roots);
        let got = qs(g.poly.coeffs());
        // trailing zeros are trimmed only for the zero polynomial, which a
        // monic product never is
        assert_eq!(got, expected, "roots {roots:?}");
        assert_eq!(g.roots, roots);
    }
}

/// Kolmogorov-Smirnov statistic of `samples` against the uniform CDF on `(lo, hi)`.
fn ks_uniform(mut samples: Vec<f64>, lo: f64, hi: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = (v - lo) / (hi - lo);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn generator_marginals_are_uniform() {
    let spec = RandomSpec::new(8, 1.0, 42, 1, &S).unwrap();
    let mut rng = spec.rng_for(0);
    let draws: Vec<_> = (0..100_000).map(|_| draw_root(&spec, &mut rng)).collect();
    let critical = 1.628 / (draws.len() as f64).sqrt();
    let b = spec.exponent_bound();
    assert!(draws.iter().all(|d| d.mantissa > 0.5 && d.mantissa < 1.0));
    assert!(draws.iter().all(|d| d.exponent > -b && d.exponent < b));
    let dm = ks_uniform(draws.iter().map(|d| d.mantissa).collect(), 0.5, 1.0);
    let de = ks_uniform(draws.iter().map(|d| d.exponent).collect(), -b, b);
    assert!(dm < critical, "mantissa KS {dm} >= {critical}");
    assert!(de < critical, "exponent KS {de} >= {critical}");
    let positive = draws.iter().filter(|d| d.sign > 0.0).count() as f64 / draws.len() as f64;
    assert!((positive - 0.5).abs() < 0.01, "sign balance {positive}");
}

#[test]
fn order_eight_roots_respect_the_exponent_bound() {
    let spec = RandomSpec::new(8, 1.0, 43, 1, &S).unwrap();
    let mut rng = spec.rng_for(0);
    let (lo, hi) = (2f64.powf(-15.875 - 1.0), 2f64.powf(15.875));
    for _ in 0..100_000 / 8 {
        for r in gen_roots(&spec, &mut rng, &S).unwrap() {
            assert!(r.abs() > lo && r.abs() < hi, "{r:e}");
        }
    }
}

#[test]
fn huge_difficulty_collapses_to_unit_interval() {
    // rounding to the working format can land exactly on 1
    let spec = RandomSpec::new(8, 1e9, 44, 1, &S).unwrap();
    let mut rng = spec.rng_for(0);
    for _ in 0..10_000 {
        for r in gen_roots(&spec, &mut rng, &S).unwrap() {
            assert!((0.5..=1.0).contains(&r.abs()), "{r:e}");
        }
    }
}

#[test]
fn normalized_errors_are_invariant_under_power_of_two_scaling() {
    let spec = RandomSpec::new(8, 4.0, 45, 30, &S).unwrap();
    let opts = PlanOptions::default();
    for id in 0..spec.count {
        let g = generate(&spec, id, &S).unwrap();
        for k in [-20, -3, 5, 24] {
            let scale = (k as f64).exp2();
            let scaled =
                Polynomial::new(g.poly.coeffs().iter().map(|c| c * scale).collect(), &S).unwrap();
            for (i, &r) in g.roots.iter().enumerate() {
                let a = measure_root(&g.poly, id, i, r, &S, &opts).unwrap();
                let b = measure_root(&scaled, id, i, r, &S, &opts).unwrap();
                assert_eq!(b.e_max, a.e_max * scale);
                assert_eq!(b.err_horner.to_bits(), a.err_horner.to_bits());
                assert_eq!(b.err_accurate.to_bits(), a.err_accurate.to_bits());
            }
        }
    }
}

#[test]
fn harness_rows_survive_an_independent_audit() {
    let spec = RandomSpec::new(8, 1.0, 46, 64, &S).unwrap();
    let ex = run_experiment(&spec, &S).unwrap();
    let mut rng = rng(46);
    for _ in 0..100 {
        let row = ex.rows[rng.random_range(0..ex.rows.len())];
        let g = generate(&spec, row.poly_id, &S).unwrap();
        assert_eq!(g.roots[row.root_index], row.root);
        let truth = reference_eval(&g.poly, row.root).unwrap();
        let norm = e_max(&g.poly, row.root, &S);
        let h = horner_eval(&g.poly, row.root, &S).unwrap();
        let plan = build_plan(&g.poly, row.root, &S).unwrap();
        let a = eval_plan(&plan, row.root, &S).unwrap();
        assert_eq!(row.e_max, norm);
        assert_eq!(row.err_horner, (h - truth).abs() / norm);
        assert_eq!(row.err_accurate, (a - truth).abs() / norm);
    }
}

fn csv_bytes(spec: &RandomSpec) -> Vec<u8> {
    let ex = run_experiment(spec, &S).unwrap();
    let summary = summarize(&ex.rows).unwrap();
    let mut out = Vec::new();
    write_csv(&mut out, &ex.rows, Some(&summary)).unwrap();
    out
}

#[test]
fn experiments_are_deterministic() {
    let spec = RandomSpec::new(8, 1.0, 47, 32, &S).unwrap();
    let a = csv_bytes(&spec);
    assert_eq!(a, csv_bytes(&spec));
    let other = RandomSpec { seed: 48, ..spec };
    assert_ne!(a, csv_bytes(&other));
}

#[test]
fn csv_layout() {
    let spec = RandomSpec::new(4, 2.0, 49, 8, &S).unwrap();
    let text = String::from_utf8(csv_bytes(&spec)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    let body: Vec<&str> = lines.clone().take_while(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 32);
    for line in &body {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        fields[0].parse::<usize>().unwrap();
        assert!(fields[1].contains("0x"), "{}", fields[1]);
        let root = parse_hex_exact(fields[1]).unwrap();
        assert!(S.is_representable(root));
        for f in &fields[2..] {
            let (mant, exp) = f.split_once('e').unwrap();
            let digits: String = mant.chars().filter(char::is_ascii_digit).collect();
            assert_eq!(digits.len(), 9, "{f}");
            exp.parse::<i32>().unwrap();
            f.parse::<f64>().unwrap();
        }
    }
    let trailer: Vec<&str> = lines.skip(body.len()).collect();
    assert!(trailer.iter().all(|l| l.starts_with("# ")));
    assert!(trailer.iter().any(|l| l.starts_with("# improvement_factor=")));
}

#[test]
fn summary_edge_cases() {
    let row = |h: f64, a: f64| ErrorRow {
        poly_id: 0,
        root_index: 0,
        root: 1.0,
        err_horner: h,
        err_accurate: a,
        e_max: 1.0,
    };
    let one = summarize(&[row(0.25, 0.125)]).unwrap();
    assert_eq!((one.horner.median, one.accurate.median), (0.25, 0.125));
    assert_eq!(one.improvement_factor, 2.0);
    let same = summarize(&[row(0.5, 0.5), row(0.0, 0.0), row(3.0, 3.0)]).unwrap();
    assert_eq!(same.improvement_factor, 1.0);
    assert!(summarize(&[]).is_err());
}
