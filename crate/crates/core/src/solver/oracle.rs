//! Independent reference solver: fractional Adams-Bashforth-Moulton on the
//! transformed time τ = ψ(t) − ψ(a).
//!
//! In τ the ψ-Caputo system becomes an ordinary Caputo system, equivalent to
//! the Volterra equation
//!
//!   y(τ) = y0 + g(τ) + 1/Γ(α) ∫_0^τ (τ − σ)^{α−1} A y(σ) dσ,
//!
//! where g is the fractional integral of the piecewise-constant forcing,
//! available exactly. The predictor-corrector only discretises the A·y part,
//! so the switch instants do not cost an order of accuracy.

use crate::error::{FracError, Result};
use crate::psi::TimeScale;
use crate::special::recip_gamma;

use super::system::{InfusionSchedule, LinearFracSystem};
use super::trajectory::{Trajectory, TrajectoryMeta};

pub const DEFAULT_ORACLE_STEPS: usize = 4000;

/// Solves on `steps` uniform τ-steps over [a, schedule end] and maps the nodes
/// back to t = ψ⁻¹(ψ(a) + τ).
pub fn oracle_substitution_solve(
    sys: &LinearFracSystem,
    sched: &InfusionSchedule,
    steps: usize,
) -> Result<Trajectory> {
    if steps < 100 {
        return Err(FracError::validation(
            "steps",
            "the oracle needs at least 100 steps",
        ));
    }
    if sched.start() > sys.start || sched.end() <= sys.start {
        return Err(FracError::domain("schedule must cover the initial time"));
    }
    let n = sys.dim();
    let alpha = sys.alpha.value();
    let horizon = sys.elapsed(sched.end());
    let h = horizon / steps as f64;
    let tau: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();

    // Forcing segments in τ.
    let segments: Vec<(f64, f64, f64)> = sched
        .segments()
        .filter(|&(_, s1, r)| r != 0.0 && s1 > sys.start)
        .map(|(s0, s1, r)| (sys.elapsed(s0.max(sys.start)), sys.elapsed(s1), r))
        .collect();
    let inv_gamma_a1 = recip_gamma(alpha + 1.0)?;
    let forcing = |t: f64| -> f64 {
        segments
            .iter()
            .map(|&(s0, s1, r)| {
                let p = |x: f64| if x > 0.0 { x.powf(alpha) } else { 0.0 };
                r * (p(t - s0) - p(t - s1))
            })
            .sum::<f64>()
            * inv_gamma_a1
    };

    // Predictor weights b_k = (k+1)^α − k^α and corrector weights
    // c_k = (k+1)^{α+1} − 2k^{α+1} + (k−1)^{α+1}, k ≥ 1.
    let pow_a: Vec<f64> = (0..=steps + 1).map(|k| (k as f64).powf(alpha)).collect();
    let pow_a1: Vec<f64> = (0..=steps + 1)
        .map(|k| (k as f64).powf(alpha + 1.0))
        .collect();
    let b: Vec<f64> = (0..=steps).map(|k| pow_a[k + 1] - pow_a[k]).collect();
    let c: Vec<f64> = (0..=steps)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                pow_a1[k + 1] - 2.0 * pow_a1[k] + pow_a1[k - 1]
            }
        })
        .collect();
    let pred_scale = h.powf(alpha) * inv_gamma_a1;
    let corr_scale = h.powf(alpha) * recip_gamma(alpha + 2.0)?;

    let mut y: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    let mut f: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    y.push(sys.y0.clone());
    f.push(sys.a.matvec(&sys.y0));

    let mut pred_sum = vec![0.0; n];
    let mut corr_sum = vec![0.0; n];
    for step in 0..steps {
        // Advancing from node `step` to node m = step + 1.
        let m = step + 1;
        let nn = step as f64;
        pred_sum.iter_mut().for_each(|v| *v = 0.0);
        corr_sum.iter_mut().for_each(|v| *v = 0.0);
        let a0 = nn.powf(alpha + 1.0) - (nn - alpha) * (nn + 1.0).powf(alpha);
        for (d, v) in corr_sum.iter_mut().enumerate() {
            *v = a0 * f[0][d];
        }
        for (j, fj) in f.iter().enumerate() {
            let bw = b[step - j];
            let cw = if j == 0 { 0.0 } else { c[step - j + 1] };
            for d in 0..n {
                pred_sum[d] += bw * fj[d];
                corr_sum[d] += cw * fj[d];
            }
        }
        let g = forcing(tau[m]);
        let base: Vec<f64> = (0..n).map(|d| sys.y0[d] + g * sys.b[d]).collect();
        let predicted: Vec<f64> = (0..n).map(|d| base[d] + pred_scale * pred_sum[d]).collect();
        let fp = sys.a.matvec(&predicted);
        let corrected: Vec<f64> = (0..n)
            .map(|d| base[d] + corr_scale * (fp[d] + corr_sum[d]))
            .collect();
        f.push(sys.a.matvec(&corrected));
        y.push(corrected);
    }

    let psi_a = sys.psi.value(sys.start);
    let mut times: Vec<f64> = tau
        .iter()
        .map(|&x| {
            if x == 0.0 {
                sys.start
            } else {
                sys.psi.inverse(psi_a + x)
            }
        })
        .collect();
    times[steps] = sched.end();
    Ok(Trajectory {
        times,
        states: y,
        meta: TrajectoryMeta {
            alpha,
            psi: sys.psi.descriptor(),
            schedule_hash: sched.hash_hex(),
        },
    })
}

/// Runs the oracle at `steps` and `2·steps` and returns the largest relative
/// disagreement at the coarse nodes (relative to the max-norm of the fine
/// state there). Fails with an accuracy error when it exceeds `tol`.
pub fn oracle_self_check(
    sys: &LinearFracSystem,
    sched: &InfusionSchedule,
    steps: usize,
    tol: f64,
) -> Result<f64> {
    let coarse = oracle_substitution_solve(sys, sched, steps)?;
    let fine = oracle_substitution_solve(sys, sched, 2 * steps)?;
    let mut worst = 0.0f64;
    for (k, yc) in coarse.states.iter().enumerate() {
        let yf = &fine.states[2 * k];
        let scale = yf.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        let diff = yc
            .iter()
            .zip(yf)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(diff / scale);
    }
    if worst > tol {
        return Err(FracError::Accuracy {
            message: format!(
                "oracle step too coarse: {steps} vs {} steps disagree",
                2 * steps
            ),
            estimate: worst,
        });
    }
    Ok(worst)
}
