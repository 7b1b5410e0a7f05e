//! Evaluation through a [`NearbyPlan`], deflation in terms of the plan's
//! `C_j`, and Newton polishing that reuses one plan for every iterate.

use log::warn;

use crate::error::{Error, Result};
use crate::fpbits::{FloatSpec, OverflowExt};
use crate::nearby::{build_plan, NearbyPlan};
use crate::poly::{derivative, horner_eval, reference_eval, Polynomial};

/// Iteration cap for [`polish_root`].
pub const MAX_NEWTON_ITERATIONS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    /// `P(root)` from the extended-precision reference.
    pub residual: f64,
    pub iterations: u32,
    pub converged: bool,
}

/// `C_{-1} + (x - x̂) * sum_{j<n} C_j x^j`, the sum by Horner from `H = 0`.
/// Costs `n + 1` multiplications and `n + 2` additions.
pub fn eval_plan(plan: &NearbyPlan, x: f64, spec: &FloatSpec) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite evaluation point {x}")));
    }
    let n = plan.degree();
    let dx = spec.sub(x, plan.x_hat).at("eval_plan", n)?;
    let mut h = 0.0;
    for j in (0..n).rev() {
        let hx = spec.mul(h, x).at("eval_plan", j)?;
        h = spec.add(hx, plan.c[j + 1]).at("eval_plan", j)?;
    }
    let shift = spec.mul(dx, h).at("eval_plan", 0)?;
    spec.add(plan.c[0], shift).at("eval_plan", 0)
}

/// Divide the root `r` out of the planned polynomial:
/// `P(x) = P(r) + (x - r) S(x)` with
/// `S_{n-1} = C_{n-1}` and `S_j = C_j + (r - x̂) sum_{k>j} C_k r^{k-1-j}`.
pub fn deflate(plan: &NearbyPlan, r: f64, spec: &FloatSpec) -> Result<Polynomial> {
    if !r.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite root {r}")));
    }
    let n = plan.degree();
    if n == 0 {
        return Err(Error::Domain("cannot deflate a constant".into()));
    }
    let dr = spec.sub(r, plan.x_hat).at("deflate", n - 1)?;
    let mut s = vec![0.0; n];
    s[n - 1] = plan.c_at(n as isize - 1);
    let mut acc = 0.0;
    for j in (0..n - 1).rev() {
        let ar = spec.mul(acc, r).at("deflate", j)?;
        acc = spec.add(ar, plan.c_at(j as isize + 1)).at("deflate", j)?;
        let corr = spec.mul(dr, acc).at("deflate", j)?;
        s[j] = spec.add(plan.c_at(j as isize), corr).at("deflate", j)?;
    }
    Ok(Polynomial::from_trusted(s))
}

/// Newton iteration from `x0` with a single plan built at `x0`.
///
/// Stops when `|step| <= 4 eps |x|`, when the planned residual stops
/// decreasing, or after [`MAX_NEWTON_ITERATIONS`]. Returns the iterate with
/// the smallest planned residual.
pub fn polish_root(
    p: &Polynomial,
    x0: f64,
    spec: &FloatSpec,
) -> Result<(RootResult, NearbyPlan)> {
    let plan = build_plan(p, x0, spec)?;
    let dp = derivative(p, spec)?;
    let stale = plan.stale_radius();

    let mut x = x0;
    let mut fx = eval_plan(&plan, x, spec)?;
    let mut iterations = 0;
    let mut converged = fx == 0.0;
    while !converged && iterations < MAX_NEWTON_ITERATIONS {
        let slope = horner_eval(&dp, x, spec)?;
        if slope == 0.0 {
            return Err(Error::Stalled {
                best: x,
                iterations,
            });
        }
        iterations += 1;
        let step = spec.div(fx, slope).at("polish_root", iterations as usize)?;
        let next = spec.sub(x, step).at("polish_root", iterations as usize)?;
        let small_step = step.abs() <= 4.0 * spec.eps() * x.abs();
        let f_next = eval_plan(&plan, next, spec)?;
        if f_next.abs() >= fx.abs() {
            converged = small_step;
            break;
        }
        x = next;
        fx = f_next;
        converged = small_step || fx == 0.0;
    }
    if (x - plan.x_hat).abs() >= stale {
        warn!(
            "iterate {x:e} drifted {:e} from plan centre {:e}; plan is stale",
            (x - plan.x_hat).abs(),
            plan.x_hat
        );
    }
    let residual = reference_eval(p, x)?;
    Ok((
        RootResult {
            root: x,
            residual,
            iterations,
            converged,
        },
        plan,
    ))
}
