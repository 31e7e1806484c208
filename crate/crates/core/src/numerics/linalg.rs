//! Dense complex linear algebra: smallest-modulus eigenpairs of general
//! matrices, the action of a matrix exponential, and a full `expm` reference.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type CMat = DMatrix<Complex64>;
type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Maximum absolute column sum.
pub fn norm1(a: &CMat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct SmallestEigen {
    pub value: Complex64,
    /// Unit-norm eigenvector.
    pub vector: CVec,
    /// Second-smallest eigenvalue by modulus, when the matrix is at least 2×2.
    pub next_value: Option<Complex64>,
    /// ‖A v − λ v‖₂.
    pub residual: f64,
}

/// Eigenvalue of smallest modulus and its eigenvector.
///
/// Small matrices go through a complex Schur decomposition directly. Larger
/// ones use shift-and-invert block iteration around a tiny positive shift
/// followed by Rayleigh–Ritz on the iterated block.
pub fn eig_smallest(a: &CMat) -> Result<SmallestEigen> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::Domain(format!("eig_smallest needs a square matrix, got {}x{}", a.nrows(), a.ncols())));
    }
    let scale = norm1(a);
    if scale == 0.0 {
        let mut v = CVec::zeros(n);
        v[0] = ONE;
        return Ok(SmallestEigen {
            value: ZERO,
            vector: v,
            next_value: (n > 1).then_some(ZERO),
            residual: 0.0,
        });
    }

    let block = n.min(8);
    let (value, vector, next_value) = if block == n {
        let (q, t) = schur(a.clone())?;
        let order = sorted_by_modulus(&t);
        let y = triangular_eigenvector(&t, order[0]);
        let v = (&q * y).normalize();
        (t[(order[0], order[0])], v, order.get(1).map(|&i| t[(i, i)]))
    } else {
        shift_invert_block(a, block, scale)?
    };

    let residual = (a * &vector - &vector * value).norm();
    if residual > 1e-8 * scale {
        return Err(Error::NonConvergence(format!(
            "eigenpair residual {residual:.3e} exceeds 1e-8·‖A‖₁ = {:.3e}",
            1e-8 * scale
        )));
    }
    Ok(SmallestEigen {
        value,
        vector,
        next_value,
        residual,
    })
}

fn schur(a: CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    let decomposition = nalgebra::linalg::Schur::try_new(a, 1e-15, 10_000 * n.max(1))
        .ok_or_else(|| Error::NonConvergence("Schur decomposition failed".into()))?;
    Ok(decomposition.unpack())
}

fn sorted_by_modulus(t: &CMat) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..t.nrows()).collect();
    idx.sort_by(|&i, &j| t[(i, i)].norm().total_cmp(&t[(j, j)].norm()));
    idx
}

// Eigenvector of an upper-triangular matrix for its k-th diagonal entry.
fn triangular_eigenvector(t: &CMat, k: usize) -> CVec {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let tiny = 1e-14 * (1.0 + lambda.norm());
    let mut y = CVec::zeros(n);
    y[k] = ONE;
    for j in (0..k).rev() {
        let mut s = ZERO;
        for m in (j + 1)..=k {
            s += t[(j, m)] * y[m];
        }
        let mut d = t[(j, j)] - lambda;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        y[j] = -s / d;
    }
    y
}

// Deterministic, well-spread starting block.
fn starting_block(n: usize, b: usize) -> CMat {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    CMat::from_fn(n, b, |_, _| Complex64::new(next(), next()))
}

fn orthonormalize(z: CMat) -> CMat {
    z.qr().q()
}

fn shift_invert_block(a: &CMat, block: usize, scale: f64) -> Result<(Complex64, CVec, Option<Complex64>)> {
    let n = a.nrows();
    let mut shift = 1e-7 * scale;
    let mut lu = None;
    for _ in 0..4 {
        let shifted = a - CMat::identity(n, n) * Complex64::new(shift, 0.0);
        let candidate = shifted.lu();
        if candidate.is_invertible() {
            lu = Some(candidate);
            break;
        }
        shift *= 3.7;
    }
    let lu = lu.ok_or_else(|| Error::NonConvergence("shifted matrix is singular for every trial shift".into()))?;

    let mut q = orthonormalize(starting_block(n, block));
    let mut previous: Option<(Complex64, Complex64)> = None;
    let max_iter = 500;
    for iter in 0..max_iter {
        let z = lu
            .solve(&q)
            .ok_or_else(|| Error::NonConvergence("LU solve failed during inverse iteration".into()))?;
        q = orthonormalize(z);
        let h = q.adjoint() * a * &q;
        let (zq, t) = schur(h)?;
        let order = sorted_by_modulus(&t);
        let first = t[(order[0], order[0])];
        let second = t[(order[1], order[1])];
        if let Some((p1, p2)) = previous {
            let tol = 1e-13 * scale;
            if (first - p1).norm() < tol && (second - p2).norm() < tol.max(1e-10 * second.norm()) {
                let y = triangular_eigenvector(&t, order[0]);
                let v = (&q * (&zq * y)).normalize();
                return Ok((first, v, Some(second)));
            }
        }
        previous = Some((first, second));
        if iter + 1 == max_iter {
            break;
        }
    }
    Err(Error::NonConvergence(format!(
        "shift-invert iteration did not settle within {max_iter} iterations (last Ritz values {previous:?})"
    )))
}

/// exp(t·A)·v by Taylor series on sub-steps of norm at most one.
pub fn matrix_exp_apply(a: &CMat, v: &CVec, t: f64) -> CVec {
    let norm = norm1(a) * t.abs();
    if norm == 0.0 {
        return v.clone();
    }
    let steps = norm.ceil().max(1.0) as usize;
    let h = Complex64::new(t / steps as f64, 0.0);
    let mut w = v.clone();
    for _ in 0..steps {
        let mut term = w.clone();
        let mut acc = w.clone();
        for k in 1..200 {
            term = (a * &term) * (h / k as f64);
            acc += &term;
            if term.norm() <= 1e-17 * acc.norm() {
                break;
            }
        }
        w = acc;
    }
    w
}

/// exp(A) by scaling and squaring with a [6/6] Padé approximant.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * Complex64::new(0.5f64.powi(squarings), 0.0);

    // c_k = (2q-k)! q! / ((2q)! k! (q-k)!), q = 6
    let c = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let eye = CMat::identity(n, n);
    let mut power = eye.clone();
    let mut num = eye.clone();
    let mut den = eye;
    for (k, &ck) in c.iter().enumerate().skip(1) {
        power = &power * &scaled;
        let term = &power * Complex64::new(ck, 0.0);
        num += &term;
        if k % 2 == 0 {
            den += &term;
        } else {
            den -= &term;
        }
    }
    let mut r = den
        .lu()
        .solve(&num)
        .ok_or_else(|| Error::NonConvergence("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_smallest() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0), c(-1.0), c(-2.0)]));
        let e = eig_smallest(&a).unwrap();
        assert!(e.value.norm() < 1e-14);
        assert!((e.vector[0].norm() - 1.0).abs() < 1e-12);
        assert!(e.vector[1].norm() < 1e-12 && e.vector[2].norm() < 1e-12);
        assert!((e.next_value.unwrap() - c(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn block_path_matches_schur_path() {
        // random non-normal matrix with a known eigenvalue at zero: A = S D S^-1
        let n = 30;
        let s = starting_block(n, n) + CMat::identity(n, n) * c(3.0);
        let mut d = CVec::zeros(n);
        for i in 0..n {
            d[i] = Complex64::new(-(i as f64) * 0.37, 0.2 * (i as f64).sin());
        }
        let a = &s * CMat::from_diagonal(&d) * s.clone().try_inverse().unwrap();
        let e = eig_smallest(&a).unwrap();
        assert!(e.value.norm() < 1e-9, "{}", e.value);
        assert!((e.next_value.unwrap() - d[1]).norm() < 1e-8);
        assert!(e.residual <= 1e-8 * norm1(&a));
    }

    #[test]
    fn expm_action_of_zero_is_identity() {
        let a = CMat::zeros(4, 4);
        let v = CVec::from_fn(4, |i, _| Complex64::new(i as f64, -1.0));
        assert_eq!(matrix_exp_apply(&a, &v, 3.0), v);
    }

    #[test]
    fn expm_action_matches_pade_reference() {
        let n = 16;
        let a = starting_block(n, n) * c(2.0) - CMat::identity(n, n) * c(1.5);
        let v = starting_block(n, 1).column(0).into_owned();
        for &t in &[0.1, 1.0, 4.0] {
            let reference = expm(&(&a * c(t))).unwrap() * &v;
            let action = matrix_exp_apply(&a, &v, t);
            let err = (&reference - &action).camax();
            assert!(err < 1e-9 * reference.camax().max(1.0), "t={t}: {err}");
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp([[0, -θ],[θ, 0]]) is a rotation
        let th = 2.3;
        let a = CMat::from_row_slice(2, 2, &[c(0.0), c(-th), c(th), c(0.0)]);
        let r = expm(&a).unwrap();
        assert!((r[(0, 0)] - c(th.cos())).norm() < 1e-13);
        assert!((r[(1, 0)] - c(th.sin())).norm() < 1e-13);
    }
}
