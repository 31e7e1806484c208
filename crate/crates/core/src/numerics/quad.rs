//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evaluations: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_evaluations: 2_000_000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let value = k * half;
    let error = ((k - g) * half).norm();
    Segment { a, b, value, error }
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn quad_adaptive<F: FnMut(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    let opts = QuadOptions {
        abs_tol: tol,
        rel_tol: 0.0,
        ..QuadOptions::default()
    };
    integrate(f, &[a, b], &opts)
}

/// Integrate over consecutive panels `points[0]..points[1]..points[n]`.
///
/// Interior points are where the integrand has kinks or peaks; they are never
/// sampled directly. Converges when the summed error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "quadrature breakpoints must be strictly increasing: {points:?}"
        )));
    }
    let mut segments: Vec<Segment> = points.windows(2).map(|w| kronrod(&mut f, w[0], w[1])).collect();
    let mut evaluations = 15 * segments.len();

    loop {
        let value: Complex64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target {
            return Ok(QuadratureResult {
                value,
                abs_error_estimate: error,
                evaluations,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let seg = segments[worst];
        let mid = 0.5 * (seg.a + seg.b);
        let too_narrow = mid <= seg.a || mid >= seg.b || (seg.b - seg.a) < 1e-14 * seg.a.abs().max(seg.b.abs());
        if evaluations + 30 > opts.max_evaluations || too_narrow {
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
                evaluations,
            });
        }
        let left = kronrod(&mut f, seg.a, mid);
        let right = kronrod(&mut f, mid, seg.b);
        evaluations += 30;
        segments[worst] = left;
        segments.push(right);
    }
}

/// Convenience wrapper for real integrands.
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: &QuadOptions) -> Result<(f64, f64)> {
    let r = integrate(|x| Complex64::new(f(x), 0.0), points, opts)?;
    Ok((r.value.re, r.abs_error_estimate))
}
