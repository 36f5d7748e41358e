//! Quadrature rules for the fractional operators: a globally adaptive
//! Gauss-Kronrod (7/15) rule for bounded integrands and a tanh-sinh rule for
//! integrands with algebraic endpoint singularities.

use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{FracError, Result};

// 30-digit tables as published; the extra digits round away.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn gk15<F>(f: &mut F, lo: f64, hi: f64, dim: usize) -> (Vec<f64>, f64)
where
    F: FnMut(f64) -> Vec<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];

    let fc = f(center);
    for d in 0..dim {
        kronrod[d] = WGK[7] * fc[d];
        gauss[d] = WG[3] * fc[d];
    }
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(center - half * x);
        let f2 = f(center + half * x);
        for d in 0..dim {
            let s = f1[d] + f2[d];
            kronrod[d] += w * s;
            if j % 2 == 1 {
                gauss[d] += WG[j / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for d in 0..dim {
        kronrod[d] *= half;
        gauss[d] *= half;
        err = err.max((kronrod[d] - gauss[d]).abs());
    }
    (kronrod, err)
}

/// Globally adaptive G7/K15 integration of a vector-valued integrand on [lo, hi].
///
/// The error estimate is the raw Kronrod-Gauss difference (max-norm), which is
/// pessimistic for smooth integrands.
pub fn integrate_vec<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    dim: usize,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Vec<f64>,
{
    if lo == hi {
        return Ok(QuadratureResult {
            value: vec![0.0; dim],
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut evaluations = 15;
    let (value, error) = gk15(&mut f, lo, hi, dim);
    let mut total = value.clone();
    let mut total_err = error;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
    });

    let mut subdivisions = 1;
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * max_norm(&total));
        if !total.iter().all(|v| v.is_finite()) {
            return Err(FracError::Accuracy {
                message: "integrand produced non-finite values".into(),
                estimate: f64::INFINITY,
            });
        }
        if total_err <= tol {
            break;
        }
        if subdivisions >= opts.max_subdivisions {
            return Err(FracError::Accuracy {
                message: format!("adaptive quadrature exhausted {subdivisions} subdivisions"),
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(FracError::Accuracy {
                message: "interval too small to subdivide".into(),
                estimate: total_err,
            });
        }
        let (v1, e1) = gk15(&mut f, worst.lo, mid, dim);
        let (v2, e2) = gk15(&mut f, mid, worst.hi, dim);
        evaluations += 30;
        for d in 0..dim {
            total[d] += v1[d] + v2[d] - worst.value[d];
        }
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            lo: worst.lo,
            hi: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            lo: mid,
            hi: worst.hi,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }

    // Re-sum to drop the drift from incremental updates.
    let mut value = vec![0.0; dim];
    let mut error = 0.0;
    for s in heap.iter() {
        for (v, part) in value.iter_mut().zip(&s.value) {
            *v += part;
        }
        error += s.error;
    }
    Ok(QuadratureResult {
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, opts: &QuadratureOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x| vec![f(x)], lo, hi, 1, opts)?;
    Ok((r.value[0], r.error))
}

/// Tanh-sinh (double exponential) integration on [lo, hi].
///
/// The integrand receives `(x, x - lo, hi - x)` with both distances computed
/// without cancellation, so kernels like `(hi - x)^(α-1)` stay accurate right
/// up to the endpoint.
pub fn tanh_sinh<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64, f64, f64) -> f64,
{
    if lo == hi {
        return Ok((0.0, 0.0));
    }
    let width = hi - lo;
    let half = 0.5 * width;
    let center = lo + half;
    const T_MAX: f64 = 6.0;
    const MAX_LEVELS: usize = 12;

    // Contribution of the symmetric pair at +t and -t (or the center when t = 0).
    let mut eval = |t: f64| -> Result<f64> {
        let u = FRAC_PI_2 * t.abs().sinh();
        let q = (-2.0 * u).exp();
        let dist = half * 2.0 * q / (1.0 + q);
        let w = FRAC_PI_2 * t.cosh() * 4.0 * q / ((1.0 + q) * (1.0 + q)) * half;
        if w == 0.0 || dist == 0.0 {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        let mut point = |x: f64, from_lo: f64, from_hi: f64| -> Result<f64> {
            let v = f(x, from_lo, from_hi);
            if v.is_finite() {
                Ok(w * v)
            } else if from_lo.min(from_hi) < 1e-12 * width {
                // Underflowed kernel right at a singular endpoint: negligible weight.
                Ok(0.0)
            } else {
                Err(FracError::Accuracy {
                    message: format!("integrand not finite at interior point {x}"),
                    estimate: f64::INFINITY,
                })
            }
        };
        if t == 0.0 {
            sum += point(center, half, half)?;
        } else {
            sum += point(hi - dist, width - dist, dist)?;
            sum += point(lo + dist, dist, width - dist)?;
        }
        Ok(sum)
    };

    let mut h = 1.0;
    let mut sum = eval(0.0)?;
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        sum += eval(k as f64 * h)?;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for _ in 0..MAX_LEVELS {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= T_MAX {
            sum += eval(k as f64 * h)?;
            k += 2;
        }
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if error <= rel_tol * estimate.abs() || error < 1e-300 {
            return Ok((estimate, error));
        }
    }
    Err(FracError::Accuracy {
        message: "tanh-sinh quadrature did not converge".into(),
        estimate: error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_are_consistent() {
        let total: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        assert!((total - 2.0).abs() < 1e-15);
        let gauss: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((gauss - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let opts = QuadratureOptions::default();
        // K15 integrates degree 22 exactly in a single panel.
        let (v, _) = integrate(|x| x.powi(22), 0.0, 1.0, &opts).unwrap();
        assert!((v - 1.0 / 23.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let opts = QuadratureOptions::default();
        let (v, _) = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &opts).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // ∫_0^1 x^{-1/2} (1-x)^{-1/2} dx = π
        let (v, _) = tanh_sinh(|_, l, r| l.powf(-0.5) * r.powf(-0.5), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-11, "{v}");
        let (v, _) = tanh_sinh(|x, _, _| x.exp(), -1.0, 2.0, 1e-13).unwrap();
        assert!((v - (2f64.exp() - (-1f64).exp())).abs() < 1e-12);
    }
}
