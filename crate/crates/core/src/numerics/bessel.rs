//! Bessel functions of the first and second kind, orders 0 and 1.
//!
//! Power series below [`SERIES_LIMIT`], Hankel asymptotic expansion above it.
//! The asymptotic series is summed until its terms stop shrinking, so the
//! switch point is where the smallest Hankel term drops below ~1e-12 while the
//! power series still has enough headroom against cancellation.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the power series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 12.0;

const SERIES_MAX_TERMS: usize = 200;

/// J₀(x) for any finite x.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        j0_series(ax)
    } else {
        let (p, q) = hankel_pq(0.0, ax);
        let chi = ax - FRAC_PI_4;
        (FRAC_2_PI / ax).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// J₁(x) for any finite x (odd in x).
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        j1_series(ax)
    } else {
        let (p, q) = hankel_pq(1.0, ax);
        let chi = ax - 3.0 * FRAC_PI_4;
        (FRAC_2_PI / ax).sqrt() * (p * chi.cos() - q * chi.sin())
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Y₀(x), defined for x > 0.
pub fn bessel_y0(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x < SERIES_LIMIT {
        Ok(y0_series(x))
    } else {
        let (p, q) = hankel_pq(0.0, x);
        let chi = x - FRAC_PI_4;
        Ok((FRAC_2_PI / x).sqrt() * (p * chi.sin() + q * chi.cos()))
    }
}

/// Y₁(x), defined for x > 0.
pub fn bessel_y1(x: f64) -> Result<f64> {
    check_positive(x)?;
    if x < SERIES_LIMIT {
        Ok(y1_series(x))
    } else {
        let (p, q) = hankel_pq(1.0, x);
        let chi = x - 3.0 * FRAC_PI_4;
        Ok((FRAC_2_PI / x).sqrt() * (p * chi.sin() + q * chi.cos()))
    }
}

fn check_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "second-kind Bessel function requires x > 0, got {x}"
        )))
    }
}

fn j0_series(x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z / (kf * kf);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn j1_series(x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

// Y₀(x) = (2/π)[ln(x/2) + γ] J₀(x) + (2/π) Σ_{k≥1} (-1)^{k+1} H_k (x²/4)^k / (k!)²
fn y0_series(x: f64) -> f64 {
    let z = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= -z / (kf * kf);
        harmonic += 1.0 / kf;
        let contrib = -term * harmonic;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + sum)
}

// Y₁(x) = (2/π) J₁(x) ln(x/2) - 2/(πx)
//         - (1/π) Σ_{k≥0} (-1)^k [ψ(k+1) + ψ(k+2)] (x/2)^{2k+1} / (k!(k+1)!)
fn y1_series(x: f64) -> f64 {
    let half = 0.5 * x;
    let z = -half * half;
    let mut term = half;
    // ψ(1) = -γ, ψ(2) = 1 - γ
    let mut psi_a = -EULER_GAMMA;
    let mut psi_b = 1.0 - EULER_GAMMA;
    let mut sum = term * (psi_a + psi_b);
    for k in 1..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= z / (kf * (kf + 1.0));
        psi_a += 1.0 / kf;
        psi_b += 1.0 / (kf + 1.0);
        let contrib = term * (psi_a + psi_b);
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    FRAC_2_PI * j1_series(x) * half.ln() - 2.0 / (PI * x) - sum / PI
}

/// Hankel P and Q series for order `nu`, summed until the terms stop decreasing.
fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    // a_k / x^k with a_k = Π_{j=1..k} (μ - (2j-1)²) / (k! 8^k)
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        term *= (mu - odd * odd) / (kf * eight_x);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // k odd feeds Q, k even feeds P; the sign alternates every two orders.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (x, J0, Y0, J1, Y1) at 20 digits, mpmath.
    const REFERENCE: &[(f64, f64, f64, f64, f64)] = &[
        (1e-4, 0.99999999750000000156, -5.9372890697093369862, 0.000049999999937500002422, -6366.1980364557613213),
        (0.05, 0.99937509764946858081, -1.9793110008172096366, 0.024992188313759700519, -12.789855171174969704),
        (0.5, 0.93846980724081290423, -0.44451873350670655715, 0.24226845767487388638, -1.4714723926702430692),
        (1.0, 0.76519768655796655145, 0.088256964215676957983, 0.44005058574493351596, -0.78121282130028871655),
        (2.5, -0.048383776468197996327, 0.49807035961523188783, 0.49709410246427403801, 0.14591813796678579888),
        (5.0, -0.17759677131433830435, -0.30851762524903378007, -0.32757913759146522204, 0.1478631433912268448),
        (7.9, 0.19436184484127823969, 0.20652094814437576859, 0.21917939992175120327, -0.18172107728057312765),
        (8.0, 0.17165080713755390609, 0.22352148938756622053, 0.23463634685391462438, -0.15806046173124749426),
        (8.1, 0.1475174540443776703, 0.23809132870223480863, 0.24760776698159287663, -0.13314879595249592615),
        (10.0, -0.2459357644513483352, 0.055671167283599391424, 0.04347274616886143667, 0.24901542420695388392),
        (12.0, 0.047689310796833536624, -0.22523731263436143369, -0.22344710449062761237, -0.05709921826089652105),
        (15.0, -0.014224472826780773234, 0.20546429603891826479, 0.20510403861352276115, 0.02107362803687351194),
        (25.0, 0.096266783275958116174, -0.12724943226800613783, -0.12535024958028990465, -0.098829964783237410053),
        (50.0, 0.055812327669251815005, -0.098064995470077079029, -0.097511828125175137661, -0.056795668562014767942),
        (100.0, 0.019985850304223122424, -0.077244313365083152254, -0.077145352014112158033, -0.020372312002759793305),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for &(x, j0, y0, j1, y1) in REFERENCE {
            assert!((bessel_j0(x) - j0).abs() < 1e-10, "J0({x})");
            assert!((bessel_j1(x) - j1).abs() < 1e-10, "J1({x})");
            let y0_err = (bessel_y0(x).unwrap() - y0).abs();
            assert!(y0_err < 1e-10, "Y0({x}) err {y0_err}");
            let y1_err = (bessel_y1(x).unwrap() - y1).abs();
            // Y1 ~ -2/(πx) near zero; compare relatively there.
            assert!(y1_err < 1e-10 * y1.abs().max(1.0), "Y1({x}) err {y1_err}");
        }
    }

    #[test]
    fn j0_at_origin_and_first_zero() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert!(bessel_j0(2.404825557695773).abs() < 1e-10);
        // bisection on the implemented series lands on the published zero
        let (mut lo, mut hi) = (2.0, 3.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if bessel_j0(lo) * bessel_j0(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((0.5 * (lo + hi) - 2.404825557695773).abs() < 1e-12);
    }

    #[test]
    fn y0_small_argument_limit() {
        let x: f64 = 1e-4;
        let expected = FRAC_2_PI * ((0.5 * x).ln() + EULER_GAMMA);
        let rel = (bessel_y0(x).unwrap() - expected).abs() / expected.abs();
        assert!(rel < 1e-6, "rel {rel}");
    }

    #[test]
    fn second_kind_rejects_nonpositive() {
        assert!(bessel_y0(0.0).is_err());
        assert!(bessel_y0(-1.0).is_err());
        assert!(bessel_y1(0.0).is_err());
    }

    #[test]
    fn wronskian_identity() {
        // J0 Y0' - J0' Y0 = 2/(πx), with J0' = -J1 and Y0' = -Y1
        let mut x = 0.1;
        while x <= 50.0 {
            let w = -bessel_j0(x) * bessel_y1(x).unwrap() + bessel_j1(x) * bessel_y0(x).unwrap();
            let expected = 2.0 / (PI * x);
            assert!((w - expected).abs() < 1e-8, "x={x}: {w} vs {expected}");
            x += 0.37;
        }
    }

    #[test]
    fn continuous_across_crossover() {
        let eps = 1e-12;
        let a = SERIES_LIMIT - eps;
        let b = SERIES_LIMIT + eps;
        assert!((bessel_j0(a) - bessel_j0(b)).abs() < 1e-10, "{:e}", bessel_j0(a) - bessel_j0(b));
        assert!((bessel_y0(a).unwrap() - bessel_y0(b).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn j0_matches_integral_representation() {
        // J0(x) = (1/π) ∫_0^π cos(x sin θ) dθ, trapezoid is spectrally accurate here
        for &x in &[0.3, 3.7, 9.9, 13.2, 31.0] {
            let n = 400;
            let h = PI / n as f64;
            let mut s = 0.5 * (1.0 + (x * PI.sin()).cos());
            for i in 1..n {
                s += (x * (i as f64 * h).sin()).cos();
            }
            let oracle = s * h / PI;
            assert!((bessel_j0(x) - oracle).abs() < 1e-12, "x={x}");
        }
    }
}
