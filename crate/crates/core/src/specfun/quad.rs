//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Maximum number of subintervals before giving up.
pub const MAX_INTERVALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

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
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::domain("integrate", format!("integrand not finite at {center}")));
    }
    let mut kronrod_sum = WGK[7] * fc;
    let mut gauss_sum = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (center - dx, center + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() || !f2.is_finite() {
            let at = if f1.is_finite() { x2 } else { x1 };
            return Err(Error::domain("integrate", format!("integrand not finite at {at}")));
        }
        kronrod_sum += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss_sum += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod_sum * half,
        error: ((kronrod_sum - gauss_sum) * half).abs(),
    })
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    heap.push(kronrod(f, lo, hi)?);
    let mut error = heap.peek().map_or(0.0, |s| s.error);
    while error > tol {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                iterations: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            return Err(Error::NonConvergence {
                what: "adaptive quadrature (interval underflow)",
                iterations: heap.len(),
            });
        }
        let left = kronrod(f, worst.lo, mid)?;
        let right = kronrod(f, mid, worst.hi)?;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Re-sum occasionally so running updates do not drift.
        if heap.len() % 256 == 0 {
            error = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(QuadratureResult {
        value,
        abs_error_estimate: error,
    })
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Either bound may be infinite; semi-infinite ranges are mapped onto a finite
/// one with `x = lo + t / (1 - t)`, and a doubly infinite range is split at 0.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult> {
    integrate_scaled(f, lo, hi, 1.0, tol)
}

/// Like [`integrate`], with the semi-infinite map stretched to
/// `x = lo + scale * t / (1 - t)`. `scale` should be comparable to the width
/// of the integrand's bulk; it is ignored on finite ranges.
pub fn integrate_scaled<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, scale: f64, tol: f64) -> Result<QuadratureResult> {
    integrate_dyn(&f, lo, hi, scale, tol)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, scale: f64, tol: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("integrate", format!("tol must be > 0, got {tol}")));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::domain(
            "integrate",
            format!("scale must be finite and > 0, got {scale}"),
        ));
    }
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::domain("integrate", "NaN bound"));
    }
    if lo == hi {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
        });
    }
    if lo > hi {
        let r = integrate_dyn(f, hi, lo, scale, tol)?;
        return Ok(QuadratureResult { value: -r.value, ..r });
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&f, lo, hi, tol),
        (true, false) => adaptive(
            &|t: f64| {
                let d = 1.0 - t;
                if d <= 0.0 {
                    return 0.0;
                }
                f(lo + scale * t / d) * scale / (d * d)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, true) => adaptive(
            &|t: f64| {
                let d = 1.0 - t;
                if d <= 0.0 {
                    return 0.0;
                }
                f(hi - scale * t / d) * scale / (d * d)
            },
            0.0,
            1.0,
            tol,
        ),
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, scale, 0.5 * tol)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, scale, 0.5 * tol)?;
            Ok(QuadratureResult {
                value: left.value + right.value,
                abs_error_estimate: left.abs_error_estimate + right.abs_error_estimate,
            })
        }
    }
}
