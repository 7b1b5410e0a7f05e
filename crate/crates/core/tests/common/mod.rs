//! Exact rational oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Q = BigRational;

pub fn q(v: f64) -> Q {
    Q::from_float(v).expect("finite value")
}

pub fn qs(vs: &[f64]) -> Vec<Q> {
    vs.iter().map(|&v| q(v)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `sum c_i x^i` by Horner, exactly.
pub fn eval(coeffs: &[Q], x: &Q) -> Q {
    coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

/// `C_{-1}..C_{n-1}` straight from the double sum
/// `C_j = sum_{i=j+1}^n P_i x̂^(i-1-j)`; entry `k` holds `C_{k-1}`.
pub fn c_brute(p: &[Q], x_hat: &Q) -> Vec<Q> {
    let n = p.len() - 1;
    (0..=n)
        .map(|k| {
            let j = k as isize - 1;
            let mut sum = Q::zero();
            for (i, pi) in p.iter().enumerate().skip((j + 1) as usize) {
                let mut term = pi.clone();
                for _ in 0..(i as isize - 1 - j) {
                    term *= x_hat;
                }
                sum += term;
            }
            sum
        })
        .collect()
}

/// Head/tail recurrence for the same `C`, exactly: heads are the Horner
/// partial sums of `P̂`, tails accumulate `P - P̂`.
pub fn c_recurrence(p: &[Q], p_hat: &[Q], x_hat: &Q) -> Vec<Q> {
    let mut c = vec![Q::zero(); p.len()];
    let mut head = Q::zero();
    let mut tail = Q::zero();
    for i in (0..p.len()).rev() {
        head = head * x_hat + &p_hat[i];
        tail = tail * x_hat + (&p[i] - &p_hat[i]);
        c[i] = &head + &tail;
    }
    c
}

/// `C_{-1} + (x - x̂) sum_{j<n} C_j x^j` with `c[k] = C_{k-1}`.
pub fn eval_through_c(c: &[Q], x_hat: &Q, x: &Q) -> Q {
    &c[0] + (x - x_hat) * eval(&c[1..], x)
}

/// Deflated coefficients `S_0..S_{n-1}`:
/// `S_{n-1} = C_{n-1}`, `S_j = C_j + (r - x̂) sum_{k>j} C_k r^(k-1-j)`.
pub fn deflate_q(c: &[Q], x_hat: &Q, r: &Q) -> Vec<Q> {
    let n = c.len() - 1;
    let cj = |j: usize| &c[j + 1];
    (0..n)
        .map(|j| {
            let mut acc = Q::zero();
            for k in j + 1..n {
                let mut term = cj(k).clone();
                for _ in 0..(k - 1 - j) {
                    term *= r;
                }
                acc += term;
            }
            cj(j) + (r - x_hat) * acc
        })
        .collect()
}

/// `v` as an `f64` if it is exactly one.
pub fn exact_f64(v: &Q) -> Option<f64> {
    let f = v.to_f64()?;
    (f.is_finite() && q(f) == *v).then_some(f)
}

/// `|a - b| / |b|` as an `f64`; zero when both vanish.
pub fn rel_err(a: &Q, b: &Q) -> f64 {
    if b.is_zero() {
        return if a.is_zero() { 0.0 } else { f64::INFINITY };
    }
    ((a - b).abs() / b.abs()).to_f64().unwrap()
}

/// A nonzero integer of at most `bits` bits times `2^e`, `e` in `[-emax, emax]`.
pub fn dyadic<R: Rng>(rng: &mut R, bits: u32, emax: i32) -> f64 {
    let hi = (1i64 << bits) - 1;
    let m = loop {
        let m = rng.random_range(-hi..=hi);
        if m != 0 {
            break m;
        }
    };
    m as f64 * (rng.random_range(-emax..=emax) as f64).exp2()
}

pub fn dyadic_vec<R: Rng>(rng: &mut R, len: usize, bits: u32, emax: i32) -> Vec<f64> {
    (0..len).map(|_| dyadic(rng, bits, emax)).collect()
}

/// A rational with a small numerator and power-of-two denominator, possibly zero.
pub fn small_q<R: Rng>(rng: &mut R) -> Q {
    let num = BigInt::from(rng.random_range(-255i64..=255));
    let den = BigInt::one() << rng.random_range(0u32..=8);
    Q::new(num, den)
}
