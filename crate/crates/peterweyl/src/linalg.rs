//! Small dense-matrix utilities used throughout the crate.
//!
//! Matrices here are tiny (irrep dimensions, at most a few hundred), so the
//! implementations favor determinism and zero external solver dependencies:
//! a cyclic Jacobi eigensolver for real symmetric matrices and a fixed-start
//! power iteration for operator norms.

use ndarray::Array2;
use num_complex::Complex64;

pub type CMat = Array2<Complex64>;

pub fn czero(d: usize) -> CMat {
    Array2::from_elem((d, d), Complex64::new(0.0, 0.0))
}

pub fn cidentity(d: usize) -> CMat {
    let mut m = czero(d);
    for i in 0..d {
        m[(i, i)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// Frobenius (Hilbert–Schmidt) norm.
pub fn hs_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_entry(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value via power iteration on `m* m`.
///
/// Deterministic: fixed start vector, at most 300 iterations, converges when
/// the Rayleigh quotient is stable to 1e-13 relative. Exact enough for the
/// seminorm and operator-norm tolerances used by the checks (<=1e-9 here,
/// since singular-value power iteration converges geometrically and the
/// matrices are tiny).
pub fn op_norm(m: &CMat) -> f64 {
    let (r, c) = m.dim();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let scale = max_abs_entry(m);
    if scale == 0.0 {
        return 0.0;
    }
    // Start vector with unequal entries so it is never orthogonal to the top
    // singular space of these structured (often diagonal) matrices.
    let mut v: Vec<Complex64> = (0..c)
        .map(|j| Complex64::new(1.0 + (j as f64) * 1e-3, 0.37 + (j as f64) * 1e-4))
        .collect();
    normalize(&mut v);
    let mut prev = 0.0f64;
    for _ in 0..300 {
        let w = matvec(m, &v);
        let u = matvec_adj(m, &w);
        let lam = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if lam == 0.0 {
            return 0.0;
        }
        let sigma2 = w.iter().map(|z| z.norm_sqr()).sum::<f64>();
        v = u;
        normalize(&mut v);
        if (sigma2.sqrt() - prev).abs() <= 1e-13 * sigma2.sqrt().max(1e-300) {
            return sigma2.sqrt();
        }
        prev = sigma2.sqrt();
    }
    prev
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

fn matvec(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    let (r, c) = m.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); r];
    for i in 0..r {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..c {
            acc += m[(i, j)] * v[j];
        }
        out[i] = acc;
    }
    out
}

fn matvec_adj(m: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    let (r, c) = m.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); c];
    for i in 0..r {
        for j in 0..c {
            out[j] += m[(i, j)].conj() * v[i];
        }
    }
    out
}

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with `a = V diag(values) V^T`; `vectors` is
/// row-major with column `k` the eigenvector of `values[k]`. Eigenvalues are
/// not sorted. Accuracy is machine precision for the sizes used here.
pub fn jacobi_sym_eigen(a_in: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a_in.len(), d * d, "matrix size mismatch");
    let mut a = a_in.to_vec();
    let mut v = vec![0.0f64; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    if d <= 1 {
        return (a, v);
    }
    let norm0: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return (vec![0.0; d], v);
    }
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                off += a[p * d + q] * a[p * d + q];
            }
        }
        if off.sqrt() <= 1e-15 * norm0 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J on rows/cols p,q
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..d).map(|i| a[i * d + i]).collect();
    (vals, v)
}

/// Gauss–Legendre nodes (ascending in (-1,1)) and weights on [-1,1].
///
/// Newton iteration on the Legendre recurrence; nodes are accurate to machine
/// precision, weights sum to 2.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n and P_n' at x via the three-term recurrence.
            let mut p0 = 1.0f64;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x; // store ascending
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Midpoint node is exactly 0; recompute its weight cleanly.
        let mut p0 = 1.0f64;
        let mut p1 = 0.0f64;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = (-(kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = (n as f64) * (-p0) / (-1.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}
