//! SU(2) backend: unit quaternions, Wigner D-matrices, Euler-angle
//! Gauss-Legendre quadrature, and separable fast Fourier transforms.
//!
//! Conventions (these pin every sign downstream):
//! - A quaternion q = (w, x, y, z) is the matrix [[w+xi, y+zi], [-y+zi, w-xi]],
//!   and `evaluate` at twice-spin 1 reproduces exactly that matrix.
//! - ZYZ Euler factorization g = q_z(alpha) q_y(beta) q_z(gamma) with
//!   q_z(t) = (cos t/2, -sin t/2, 0, 0), q_y(b) = (cos b/2, 0, sin b/2, 0),
//!   giving D^l = diag(e^{-i m alpha}) d^l(beta) diag(e^{-i m gamma}) in the
//!   basis ordered by decreasing weight m = l..-l.
//! - The little-d matrix is evaluated through the eigendecomposition of the
//!   real symmetric tridiagonal conjugate of the Y generator, which is
//!   numerically stable at every beta and makes diagonal entries a cheap
//!   dot product (the kernel-evaluation fast path).
//! - The metric is the unit round 3-sphere: diameter pi, |exp_map(v)| = |v|.
//!   Frame fields are half the unit-speed geodesic fields, so the frame
//!   Laplacian has eigenvalue exactly l(l+1) at spin l.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, Mutex};

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use super::{CompactGroup, DifferenceFunction, EulerLayout, Grid, Irrep};
use crate::error::{Error, Result};
use crate::fourier::{naive_forward, FourierCoefficients, GridFunction};
use crate::linalg::{gauss_legendre, jacobi_sym_eigen, CMat};

/// Unit quaternion; the group product is the Hamilton product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn mul(&self, o: &Quaternion) -> Quaternion {
        Quaternion {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    pub fn conj(&self) -> Quaternion {
        Quaternion {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn dot(&self, o: &Quaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(&self) -> Quaternion {
        let n = self.norm();
        Quaternion {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// ZYZ Euler angles (alpha, beta, gamma) with beta in [0, pi]. The
    /// alpha/gamma branch is only fixed modulo simultaneous 2 pi shifts,
    /// which leaves every D-matrix entry unchanged (half-integer weights
    /// included, since the shifts cancel between the two phase factors).
    pub fn euler_angles(&self) -> (f64, f64, f64) {
        let cb = self.w.hypot(self.x); // |cos(beta/2)|
        let sb = self.y.hypot(self.z); // |sin(beta/2)|
        let beta = 2.0 * sb.atan2(cb);
        let sum = -2.0 * self.x.atan2(self.w); // alpha + gamma
        let diff = -2.0 * self.z.atan2(self.y); // alpha - gamma
        (0.5 * (sum + diff), beta, 0.5 * (sum - diff))
    }

    /// Quaternion with the given Euler angles.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> Quaternion {
        let (cb, sb) = ((0.5 * beta).cos(), (0.5 * beta).sin());
        let (sum, diff) = (0.5 * (alpha + gamma), 0.5 * (alpha - gamma));
        Quaternion {
            w: cb * sum.cos(),
            x: -cb * sum.sin(),
            y: sb * diff.cos(),
            z: -sb * diff.sin(),
        }
    }
}

/// Irrep label: twice the spin, so half-integers stay exact integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Spin(pub u32);

impl Spin {
    pub fn dim(&self) -> usize {
        self.0 as usize + 1
    }

    pub fn text(&self) -> String {
        if self.0.is_multiple_of(2) {
            format!("{}", self.0 / 2)
        } else {
            format!("{}/2", self.0)
        }
    }
}

/// Per-spin eigendata of the Y generator, powering both the full little-d
/// matrix and the diagonal fast path.
pub struct SpinData {
    pub twice_spin: u32,
    pub dim: usize,
    /// Row-major orthogonal matrix; column mu is the eigenvector with
    /// eigenvalue m2_col[mu] / 2.
    pub v: Vec<f64>,
    /// Elementwise square of `v` (diagonal fast path).
    pub v2: Vec<f64>,
    /// Twice the eigenvalue of each column, snapped to exact integers.
    pub m2_col: Vec<i64>,
}

impl SpinData {
    fn build(twice_spin: u32) -> SpinData {
        let d = twice_spin as usize + 1;
        let l = twice_spin as f64 / 2.0;
        let mut a = vec![0.0f64; d * d];
        for k in 1..d {
            let m = l - k as f64;
            let c = (l * (l + 1.0) - m * (m + 1.0)).sqrt();
            a[(k - 1) * d + k] = -0.5 * c;
            a[k * d + (k - 1)] = -0.5 * c;
        }
        let (vals, v) = jacobi_sym_eigen(&a, d);
        let m2_col: Vec<i64> = vals.iter().map(|&x| (2.0 * x).round() as i64).collect();
        for (mu, &x) in vals.iter().enumerate() {
            debug_assert!(
                (2.0 * x - m2_col[mu] as f64).abs() < 1e-8,
                "weight eigenvalue failed to snap"
            );
        }
        let v2 = v.iter().map(|x| x * x).collect();
        SpinData {
            twice_spin,
            dim: d,
            v,
            v2,
            m2_col,
        }
    }

    /// Full little-d matrix d^l(beta), row/column order by decreasing m.
    pub fn little_d(&self, beta: f64) -> Array2<f64> {
        let d = self.dim;
        let mut cb = vec![0.0f64; d];
        let mut sb = vec![0.0f64; d];
        for mu in 0..d {
            let ang = beta * self.m2_col[mu] as f64 / 2.0;
            cb[mu] = ang.cos();
            sb[mu] = ang.sin();
        }
        let mut out = Array2::zeros((d, d));
        for j in 0..d {
            for k in 0..d {
                // cos(beta m + (k-j) pi/2) cycles through cos, -sin, -cos, sin.
                let r = (k as i64 - j as i64).rem_euclid(4);
                let mut acc = 0.0;
                let vj = &self.v[j * d..(j + 1) * d];
                let vk = &self.v[k * d..(k + 1) * d];
                match r {
                    0 => {
                        for mu in 0..d {
                            acc += vj[mu] * vk[mu] * cb[mu];
                        }
                    }
                    1 => {
                        for mu in 0..d {
                            acc -= vj[mu] * vk[mu] * sb[mu];
                        }
                    }
                    2 => {
                        for mu in 0..d {
                            acc -= vj[mu] * vk[mu] * cb[mu];
                        }
                    }
                    _ => {
                        for mu in 0..d {
                            acc += vj[mu] * vk[mu] * sb[mu];
                        }
                    }
                }
                out[(j, k)] = acc;
            }
        }
        out
    }

    /// Diagonal of d^l(beta) only: d_{jj} = sum_mu V_{j mu}^2 cos(beta m_mu).
    pub fn little_d_diag(&self, beta: f64, out: &mut [f64]) {
        let d = self.dim;
        debug_assert_eq!(out.len(), d);
        let cb: Vec<f64> = self
            .m2_col
            .iter()
            .map(|&m2| (beta * m2 as f64 / 2.0).cos())
            .collect();
        for (j, slot) in out.iter_mut().enumerate() {
            let vj = &self.v2[j * d..(j + 1) * d];
            let mut acc = 0.0;
            for mu in 0..d {
                acc += vj[mu] * cb[mu];
            }
            *slot = acc;
        }
    }
}

/// The SU(2) backend. Holds lazily built per-spin eigendata and per-grid
/// little-d tables; both caches are value-level only (pure functions of
/// their keys), so results never depend on cache state.
/// Key (n_beta, twice_spin) -> flattened [b][j][k] little-d tables on the
/// Gauss-Legendre beta nodes of resolution n_beta.
type BetaTableCache = Mutex<BTreeMap<(u32, u32), Arc<Vec<f64>>>>;

#[derive(Default)]
pub struct Su2 {
    spin_cache: Mutex<BTreeMap<u32, Arc<SpinData>>>,
    beta_table_cache: BetaTableCache,
}

impl Su2 {
    pub fn new() -> Self {
        Su2::default()
    }

    pub fn spin_data(&self, twice_spin: u32) -> Arc<SpinData> {
        let mut cache = self.spin_cache.lock().unwrap();
        cache
            .entry(twice_spin)
            .or_insert_with(|| Arc::new(SpinData::build(twice_spin)))
            .clone()
    }

    fn beta_nodes(resolution: usize) -> (Vec<f64>, Vec<f64>) {
        let (u, glw) = gauss_legendre(resolution);
        let beta: Vec<f64> = u.iter().map(|&c| c.clamp(-1.0, 1.0).acos()).collect();
        let bw: Vec<f64> = glw.iter().map(|&w| 0.5 * w).collect();
        (beta, bw)
    }

    fn beta_tables(&self, resolution: usize, twice_spin: u32) -> Arc<Vec<f64>> {
        let key = (resolution as u32, twice_spin);
        if let Some(t) = self.beta_table_cache.lock().unwrap().get(&key) {
            return t.clone();
        }
        let (beta, _) = Su2::beta_nodes(resolution);
        let sd = self.spin_data(twice_spin);
        let d = sd.dim;
        let mut table = vec![0.0f64; beta.len() * d * d];
        for (b, &bb) in beta.iter().enumerate() {
            let dm = sd.little_d(bb);
            let dst = &mut table[b * d * d..(b + 1) * d * d];
            for j in 0..d {
                for k in 0..d {
                    dst[j * d + k] = dm[(j, k)];
                }
            }
        }
        let arc = Arc::new(table);
        self.beta_table_cache
            .lock()
            .unwrap()
            .insert(key, arc.clone());
        arc
    }
}

impl CompactGroup for Su2 {
    type Point = Quaternion;
    type Label = Spin;

    fn name(&self) -> &'static str {
        "su2"
    }

    fn dim(&self) -> usize {
        3
    }

    fn identity(&self) -> Quaternion {
        Quaternion::IDENTITY
    }

    fn compose(&self, a: &Quaternion, b: &Quaternion) -> Quaternion {
        a.mul(b).normalized()
    }

    fn inverse(&self, a: &Quaternion) -> Quaternion {
        a.conj()
    }

    fn distance(&self, a: &Quaternion, b: &Quaternion) -> f64 {
        a.dot(b).clamp(-1.0, 1.0).acos()
    }

    fn diameter(&self) -> f64 {
        PI
    }

    fn exp_map(&self, v: &[f64]) -> Quaternion {
        assert_eq!(v.len(), 3, "tangent vector dimension");
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-300 {
            return Quaternion::IDENTITY;
        }
        let s = n.sin() / n;
        Quaternion {
            w: n.cos(),
            x: s * v[0],
            y: s * v[1],
            z: s * v[2],
        }
    }

    fn log_map(&self, a: &Quaternion) -> Result<Vec<f64>> {
        let n = (a.x * a.x + a.y * a.y + a.z * a.z).sqrt();
        let psi = n.atan2(a.w);
        if psi >= PI - 1e-9 {
            return Err(Error::domain("log_map at the antipode"));
        }
        if n < 1e-300 {
            return Ok(vec![0.0, 0.0, 0.0]);
        }
        let s = psi / n;
        Ok(vec![s * a.x, s * a.y, s * a.z])
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Quaternion {
        // Four standard normals via Box-Muller, normalized: Haar-uniform.
        loop {
            let mut g = [0.0f64; 4];
            for pair in g.chunks_mut(2) {
                let u1: f64 = rand::Rng::random::<f64>(&mut *rng).max(1e-300);
                let u2: f64 = rand::Rng::random::<f64>(&mut *rng);
                let r = (-2.0 * u1.ln()).sqrt();
                pair[0] = r * (TAU * u2).cos();
                if pair.len() > 1 {
                    pair[1] = r * (TAU * u2).sin();
                }
            }
            let q = Quaternion::new(g[0], g[1], g[2], g[3]);
            if q.norm() > 1e-6 {
                return q.normalized();
            }
        }
    }

    fn point_coords(&self, p: &Quaternion) -> Vec<f64> {
        vec![p.w, p.x, p.y, p.z]
    }

    fn irrep(&self, label: Spin) -> Irrep<Spin> {
        let t = label.0 as f64;
        let lambda = t * (t + 2.0) / 4.0; // l(l+1) with l = t/2
        Irrep {
            label,
            dim: label.dim(),
            eigenvalue: lambda,
            weight: (1.0 + lambda).sqrt(),
        }
    }

    fn enumerate_dual(&self, cutoff: f64) -> Vec<Irrep<Spin>> {
        let mut out = Vec::new();
        let mut t = 0u32;
        loop {
            let irrep = self.irrep(Spin(t));
            if irrep.weight > cutoff + 1e-12 {
                break;
            }
            out.push(irrep);
            t += 1;
        }
        out
    }

    fn evaluate(&self, label: Spin, x: &Quaternion) -> CMat {
        let t = label.0;
        let d = label.dim();
        if t == 0 {
            let mut m = CMat::zeros((1, 1));
            m[(0, 0)] = Complex64::new(1.0, 0.0);
            return m;
        }
        let (alpha, beta, gamma) = x.euler_angles();
        let sd = self.spin_data(t);
        let dm = sd.little_d(beta);
        let mut out = CMat::zeros((d, d));
        // Phase ladders e^{-i m alpha}, e^{-i m gamma} with m = l - row.
        let l = t as f64 / 2.0;
        let pa: Vec<Complex64> = (0..d)
            .map(|j| Complex64::from_polar(1.0, -(l - j as f64) * alpha))
            .collect();
        let pg: Vec<Complex64> = (0..d)
            .map(|k| Complex64::from_polar(1.0, -(l - k as f64) * gamma))
            .collect();
        for j in 0..d {
            for k in 0..d {
                out[(j, k)] = pa[j] * dm[(j, k)] * pg[k];
            }
        }
        out
    }

    fn character(&self, label: Spin, x: &Quaternion) -> Complex64 {
        // chi_l(x) = U_{2l}(cos psi) (Chebyshev, second kind), psi = d(e, x),
        // cos psi = w. Polynomial recurrence: stable at every point.
        let c = x.w.clamp(-1.0, 1.0);
        let (mut u0, mut u1) = (1.0f64, 2.0 * c);
        let t = label.0;
        if t == 0 {
            return Complex64::new(1.0, 0.0);
        }
        for _ in 1..t {
            (u0, u1) = (u1, 2.0 * c * u1 - u0);
        }
        Complex64::new(u1, 0.0)
    }

    fn label_text(&self, label: Spin) -> String {
        label.text()
    }

    fn haar_grid(&self, resolution: usize) -> Result<Grid<Quaternion>> {
        if resolution < 2 {
            return Err(Error::argument("grid resolution must be at least 2"));
        }
        let (n_alpha, n_beta, n_gamma) = (2 * resolution, resolution, 4 * resolution);
        let (beta, beta_weight) = Su2::beta_nodes(resolution);
        let alpha: Vec<f64> = (0..n_alpha)
            .map(|a| TAU * a as f64 / n_alpha as f64)
            .collect();
        let gamma: Vec<f64> = (0..n_gamma)
            .map(|c| 2.0 * TAU * c as f64 / n_gamma as f64)
            .collect();
        let mut nodes = Vec::with_capacity(n_alpha * n_beta * n_gamma);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let wnorm = 1.0 / (n_alpha * n_gamma) as f64;
        for &aa in &alpha {
            for (b, &bb) in beta.iter().enumerate() {
                let w = beta_weight[b] * wnorm;
                for &cc in &gamma {
                    nodes.push(Quaternion::from_euler(aa, bb, cc));
                    weights.push(w);
                }
            }
        }
        Ok(Grid {
            nodes,
            weights,
            resolution,
            exactness: 2 * resolution - 1,
            lattice: vec![n_alpha, n_beta, n_gamma],
            euler: Some(EulerLayout {
                n_alpha,
                n_beta,
                n_gamma,
                alpha,
                beta,
                gamma,
                beta_weight,
            }),
        })
    }

    fn flow(&self, x: &Quaternion, direction: usize, t: f64) -> Quaternion {
        // Frame order (X, Y, Z) maps to quaternion axes (y, z, x): with the
        // half-speed frame fields this gives [X,Y] = Z and Z acting on
        // weight vectors as i m.
        let v = match direction {
            0 => [0.0, t, 0.0],
            1 => [0.0, 0.0, t],
            2 => [t, 0.0, 0.0],
            _ => panic!("direction out of range"),
        };
        self.compose(x, &self.exp_map(&v))
    }

    fn flow_speed(&self) -> f64 {
        0.5
    }

    fn difference_family(&self) -> Vec<DifferenceFunction<Quaternion>> {
        // Fundamental-representation coefficients minus the identity:
        // q11 = (w-1) + xi, q12 = y + zi, q21 = -y + zi, q22 = (w-1) - xi.
        type Entry = (&'static str, fn(&Quaternion) -> Complex64);
        let defs: [Entry; 4] = [
            ("q11", |p| Complex64::new(p.w - 1.0, p.x)),
            ("q12", |p| Complex64::new(p.y, p.z)),
            ("q21", |p| Complex64::new(-p.y, p.z)),
            ("q22", |p| Complex64::new(p.w - 1.0, -p.x)),
        ];
        defs.iter()
            .map(|(name, f)| DifferenceFunction {
                name: (*name).to_string(),
                eval: Box::new(*f),
            })
            .collect()
    }

    fn forward(
        &self,
        f: &GridFunction<Quaternion>,
        duals: &[Irrep<Spin>],
    ) -> FourierCoefficients<Spin> {
        let Some(layout) = f.grid.euler.clone() else {
            return naive_forward(self, f, duals);
        };
        let cutoff = duals.iter().map(|i| i.weight).fold(0.0, f64::max);
        let mut out = FourierCoefficients::new(cutoff);
        if duals.is_empty() {
            return out;
        }
        let t_max = duals.iter().map(|i| i.label.0).max().unwrap() as i64;
        let (na, nb, ng) = (layout.n_alpha, layout.n_beta, layout.n_gamma);
        let k = (2 * t_max + 1) as usize; // twice-frequency index range

        // Stage 1: gamma sums. phi[(a*nb+b)*k + mi] = sum_c f e^{+i m gamma_c},
        // with 2m = mi - t_max and e^{i m gamma_c} = e^{2 pi i (2m) c / ng}.
        let zero = Complex64::new(0.0, 0.0);
        let pow_g: Vec<Complex64> = (0..ng)
            .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / ng as f64))
            .collect();
        let mut phi = vec![zero; na * nb * k];
        for ab in 0..na * nb {
            let row = &f.values[ab * ng..(ab + 1) * ng];
            let dst = &mut phi[ab * k..(ab + 1) * k];
            for (mi, slot) in dst.iter_mut().enumerate() {
                let step = (mi as i64 - t_max).rem_euclid(ng as i64) as usize;
                let mut r = 0usize;
                let mut acc = zero;
                for &fv in row {
                    acc += fv * pow_g[r];
                    r += step;
                    if r >= ng {
                        r -= ng;
                    }
                }
                *slot = acc;
            }
        }

        // Stage 2: alpha sums. psi[(b*k + mi)*k + ni] = sum_a phi e^{+i m' alpha_a},
        // with 2m' = ni - t_max and e^{i m' alpha_a} = e^{i pi (2m') a / na}.
        let pow_a: Vec<Complex64> = (0..2 * na)
            .map(|r| Complex64::from_polar(1.0, PI * r as f64 / na as f64))
            .collect();
        let mut psi = vec![zero; nb * k * k];
        for b in 0..nb {
            for ni in 0..k {
                let step = (ni as i64 - t_max).rem_euclid(2 * na as i64) as usize;
                let mut r = 0usize;
                let mut col = vec![zero; k];
                for a in 0..na {
                    let src = &phi[(a * nb + b) * k..(a * nb + b + 1) * k];
                    let p = pow_a[r];
                    for (mi, slot) in col.iter_mut().enumerate() {
                        *slot += src[mi] * p;
                    }
                    r += step;
                    if r >= 2 * na {
                        r -= 2 * na;
                    }
                }
                for mi in 0..k {
                    psi[(b * k + mi) * k + ni] = col[mi];
                }
            }
        }

        // Stage 3: beta contraction against cached little-d tables.
        // fhat_{ij} = norm * sum_b w_b d^l_{ji}(beta_b) psi[b][2m_i][2m_j].
        let norm = 1.0 / (na * ng) as f64;
        for irrep in duals {
            let t = irrep.label.0 as i64;
            let d = irrep.dim;
            let table = self.beta_tables(f.grid.resolution, irrep.label.0);
            let mut m = Array2::from_elem((d, d), zero);
            for b in 0..nb {
                let w = layout.beta_weight[b] * norm;
                let dm = &table[b * d * d..(b + 1) * d * d];
                for i in 0..d {
                    // 2m_i = t - 2i; index into psi is 2m_i + t_max.
                    let mi = (t - 2 * i as i64 + t_max) as usize;
                    for j in 0..d {
                        let nj = (t - 2 * j as i64 + t_max) as usize;
                        m[(i, j)] += w * dm[j * d + i] * psi[(b * k + mi) * k + nj];
                    }
                }
            }
            out.matrices.insert(irrep.label, m);
        }
        out
    }

    fn inverse_on_grid(
        &self,
        coeffs: &FourierCoefficients<Spin>,
        grid: &Arc<Grid<Quaternion>>,
    ) -> GridFunction<Quaternion> {
        let Some(layout) = grid.euler.clone() else {
            let values = grid
                .nodes
                .iter()
                .map(|x| self.inverse_at(coeffs, x))
                .collect();
            return GridFunction::new(Arc::clone(grid), values);
        };
        let zero = Complex64::new(0.0, 0.0);
        let (na, nb, ng) = (layout.n_alpha, layout.n_beta, layout.n_gamma);
        if coeffs.matrices.is_empty() {
            return GridFunction::new(Arc::clone(grid), vec![zero; grid.len()]);
        }
        let t_max = coeffs.matrices.keys().map(|s| s.0).max().unwrap() as i64;
        let k = (2 * t_max + 1) as usize;

        // Stage A: g[(b*k + ni)*k + mi] = sum_l d_l sum_{ij} d^l_{ij}(beta_b)
        // fhat_{ji}, where ni indexes the alpha frequency 2m_i and mi the
        // gamma frequency 2m_j.
        let mut gmat = vec![zero; nb * k * k];
        for (label, mhat) in &coeffs.matrices {
            let t = label.0 as i64;
            let d = label.dim();
            let dl = d as f64;
            let table = self.beta_tables(grid.resolution, label.0);
            for b in 0..nb {
                let dm = &table[b * d * d..(b + 1) * d * d];
                for i in 0..d {
                    let ni = (t - 2 * i as i64 + t_max) as usize;
                    for j in 0..d {
                        let mi = (t - 2 * j as i64 + t_max) as usize;
                        gmat[(b * k + ni) * k + mi] += dl * dm[i * d + j] * mhat[(j, i)];
                    }
                }
            }
        }

        // Stage B: alpha synthesis. h[(a*nb + b)*k + mi] =
        // sum_ni g[b][ni][mi] e^{-i pi ni' a / na}.
        let pow_a: Vec<Complex64> = (0..2 * na)
            .map(|r| Complex64::from_polar(1.0, -PI * r as f64 / na as f64))
            .collect();
        let mut h = vec![zero; na * nb * k];
        for b in 0..nb {
            for ni in 0..k {
                let src = &gmat[(b * k + ni) * k..(b * k + ni + 1) * k];
                let step = (ni as i64 - t_max).rem_euclid(2 * na as i64) as usize;
                let mut r = 0usize;
                for a in 0..na {
                    let dst = &mut h[(a * nb + b) * k..(a * nb + b + 1) * k];
                    let p = pow_a[r];
                    for (mi, slot) in dst.iter_mut().enumerate() {
                        *slot += src[mi] * p;
                    }
                    r += step;
                    if r >= 2 * na {
                        r -= 2 * na;
                    }
                }
            }
        }

        // Stage C: gamma synthesis. f_{abc} = sum_mi h[a][b][mi] e^{-2 pi i mi' c / ng}.
        let pow_g: Vec<Complex64> = (0..ng)
            .map(|r| Complex64::from_polar(1.0, -TAU * r as f64 / ng as f64))
            .collect();
        let mut values = vec![zero; grid.len()];
        for ab in 0..na * nb {
            let src = &h[ab * k..(ab + 1) * k];
            let dst = &mut values[ab * ng..(ab + 1) * ng];
            for (mi, &coeff) in src.iter().enumerate() {
                if coeff == zero {
                    continue;
                }
                let step = (mi as i64 - t_max).rem_euclid(ng as i64) as usize;
                let mut r = 0usize;
                for slot in dst.iter_mut() {
                    *slot += coeff * pow_g[r];
                    r += step;
                    if r >= ng {
                        r -= ng;
                    }
                }
            }
        }
        GridFunction::new(Arc::clone(grid), values)
    }

    fn diag_peter_weyl_sum(
        &self,
        diag: &BTreeMap<Spin, Vec<Complex64>>,
        u: &Quaternion,
    ) -> Complex64 {
        let (alpha, beta, gamma) = u.euler_angles();
        let s = alpha + gamma;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut dd: Vec<f64> = Vec::new();
        for (label, entries) in diag {
            let t = label.0;
            let d = label.dim();
            debug_assert_eq!(entries.len(), d);
            let sd = self.spin_data(t);
            dd.resize(d, 0.0);
            sd.little_d_diag(beta, &mut dd);
            // Phase ladder e^{-i m s}, m = l down to -l.
            let l = t as f64 / 2.0;
            let mut phase = Complex64::from_polar(1.0, -l * s);
            let step = Complex64::from_polar(1.0, s);
            let mut tr = Complex64::new(0.0, 0.0);
            for j in 0..d {
                tr += entries[j] * dd[j] * phase;
                phase *= step;
            }
            acc += d as f64 * tr;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    /// Coordinate-wise deviation; the geodesic distance amplifies rounding
    /// near coincident points (arccos slope), so equality checks use this.
    fn coord_dev(a: &Quaternion, b: &Quaternion) -> f64 {
        (a.w - b.w)
            .abs()
            .max((a.x - b.x).abs())
            .max((a.y - b.y).abs())
            .max((a.z - b.z).abs())
    }

    /// Independent quaternion product oracle: multiply as 2x2 complex
    /// matrices [[w+xi, y+zi], [-y+zi, w-xi]] and read the result back.
    fn mat_mul_oracle(a: &Quaternion, b: &Quaternion) -> Quaternion {
        let am = [
            [Complex64::new(a.w, a.x), Complex64::new(a.y, a.z)],
            [Complex64::new(-a.y, a.z), Complex64::new(a.w, -a.x)],
        ];
        let bm = [
            [Complex64::new(b.w, b.x), Complex64::new(b.y, b.z)],
            [Complex64::new(-b.y, b.z), Complex64::new(b.w, -b.x)],
        ];
        let mut cm = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for t in 0..2 {
                    cm[i][j] += am[i][t] * bm[t][j];
                }
            }
        }
        Quaternion::new(cm[0][0].re, cm[0][0].im, cm[0][1].re, cm[0][1].im)
    }

    #[test]
    fn quaternion_product_matches_matrix_oracle() {
        let g = Su2::new();
        let mut r = rng(2);
        for _ in 0..100 {
            let a = g.random_point(&mut r);
            let b = g.random_point(&mut r);
            let got = a.mul(&b);
            let want = mat_mul_oracle(&a, &b);
            assert_abs_diff_eq!(got.w, want.w, epsilon = 1e-12);
            assert_abs_diff_eq!(got.x, want.x, epsilon = 1e-12);
            assert_abs_diff_eq!(got.y, want.y, epsilon = 1e-12);
            assert_abs_diff_eq!(got.z, want.z, epsilon = 1e-12);
        }
    }

    #[test]
    fn group_laws() {
        let g = Su2::new();
        let mut r = rng(3);
        for _ in 0..100 {
            let a = g.random_point(&mut r);
            let b = g.random_point(&mut r);
            let c = g.random_point(&mut r);
            let ab_c = g.compose(&g.compose(&a, &b), &c);
            let a_bc = g.compose(&a, &g.compose(&b, &c));
            assert!(coord_dev(&ab_c, &a_bc) < 1e-12);
            assert!(coord_dev(&g.compose(&a, &g.inverse(&a)), &g.identity()) < 1e-12);
            assert!(coord_dev(&g.compose(&g.identity(), &a), &a) < 1e-12);
        }
    }

    #[test]
    fn distance_and_exp_log() {
        let g = Su2::new();
        assert_abs_diff_eq!(
            g.distance(&g.identity(), &Quaternion::new(-1.0, 0.0, 0.0, 0.0)),
            PI,
            epsilon = 1e-15
        );
        let mut r = rng(4);
        for _ in 0..20 {
            let mut v = [0.0f64; 3];
            let p = g.random_point(&mut r);
            let n = (p.x * p.x + p.y * p.y + p.z * p.z).sqrt();
            v[0] = p.x / n;
            v[1] = p.y / n;
            v[2] = p.z / n;
            for t in [0.01, 0.1] {
                let scaled = [v[0] * t, v[1] * t, v[2] * t];
                let q = g.exp_map(&scaled);
                assert_abs_diff_eq!(g.distance(&g.identity(), &q), t, epsilon = 1e-8);
            }
            let half = [v[0] * 0.5, v[1] * 0.5, v[2] * 0.5];
            let back = g.log_map(&g.exp_map(&half)).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(back[i], half[i], epsilon = 1e-10);
            }
        }
        assert!(g.log_map(&Quaternion::new(-1.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn distance_is_bi_invariant() {
        let g = Su2::new();
        let mut r = rng(5);
        for _ in 0..50 {
            let x = g.random_point(&mut r);
            let y = g.random_point(&mut r);
            let z = g.random_point(&mut r);
            let d = g.distance(&x, &y);
            assert_abs_diff_eq!(
                g.distance(&g.compose(&z, &x), &g.compose(&z, &y)),
                d,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                g.distance(&g.compose(&x, &z), &g.compose(&y, &z)),
                d,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn euler_round_trip() {
        let g = Su2::new();
        let mut r = rng(6);
        for _ in 0..50 {
            let q = g.random_point(&mut r);
            let (a, b, c) = q.euler_angles();
            let back = Quaternion::from_euler(a, b, c);
            // Angle extraction is branch-dependent; the reconstructed point
            // is not.
            assert!(coord_dev(&q, &back) < 1e-12, "euler round trip failed");
        }
    }

    #[test]
    fn fundamental_rep_is_the_quaternion_matrix() {
        let g = Su2::new();
        let mut r = rng(7);
        for _ in 0..50 {
            let q = g.random_point(&mut r);
            let m = g.evaluate(Spin(1), &q);
            assert_abs_diff_eq!(
                (m[(0, 0)] - Complex64::new(q.w, q.x)).norm(),
                0.0,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                (m[(0, 1)] - Complex64::new(q.y, q.z)).norm(),
                0.0,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                (m[(1, 0)] - Complex64::new(-q.y, q.z)).norm(),
                0.0,
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                (m[(1, 1)] - Complex64::new(q.w, -q.x)).norm(),
                0.0,
                epsilon = 1e-10
            );
        }
    }

    /// Matrix-exponential oracle for the little-d matrix: d^l(beta) =
    /// exp(i beta J_y) computed by a plain scaled Taylor series.
    fn little_d_exp_oracle(twice_spin: u32, beta: f64) -> Array2<Complex64> {
        let d = twice_spin as usize + 1;
        let l = twice_spin as f64 / 2.0;
        let mut jy = Array2::from_elem((d, d), Complex64::new(0.0, 0.0));
        for kk in 1..d {
            let m = l - kk as f64;
            let c = (l * (l + 1.0) - m * (m + 1.0)).sqrt();
            jy[(kk - 1, kk)] = Complex64::new(0.0, -0.5 * c);
            jy[(kk, kk - 1)] = Complex64::new(0.0, 0.5 * c);
        }
        let a = jy.mapv(|v| Complex64::new(0.0, beta) * v);
        // Scale down so the series converges fast, then square back up.
        let s = 8u32;
        let scaled = a.mapv(|v| v / 2f64.powi(s as i32));
        let mut term = Array2::from_elem((d, d), Complex64::new(0.0, 0.0));
        for i in 0..d {
            term[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let mut sum = term.clone();
        for k in 1..30 {
            term = term.dot(&scaled).mapv(|v| v / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..s {
            sum = sum.dot(&sum);
        }
        sum
    }

    #[test]
    fn little_d_matches_matrix_exponential() {
        let g = Su2::new();
        for t in [1u32, 2, 3, 5, 6] {
            let sd = g.spin_data(t);
            for &beta in &[0.0, 0.3, 1.0, 2.2, PI] {
                let got = sd.little_d(beta);
                let want = little_d_exp_oracle(t, beta);
                for j in 0..sd.dim {
                    for kk in 0..sd.dim {
                        assert_abs_diff_eq!(
                            (Complex64::new(got[(j, kk)], 0.0) - want[(j, kk)]).norm(),
                            0.0,
                            epsilon = 1e-10
                        );
                    }
                }
                // Diagonal fast path agrees with the full matrix.
                let mut diag = vec![0.0; sd.dim];
                sd.little_d_diag(beta, &mut diag);
                for j in 0..sd.dim {
                    assert_abs_diff_eq!(diag[j], got[(j, j)], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn homomorphism_and_unitarity() {
        let g = Su2::new();
        let mut r = rng(8);
        for _ in 0..50 {
            let a = g.random_point(&mut r);
            let b = g.random_point(&mut r);
            let da = g.evaluate(Spin(2), &a);
            let db = g.evaluate(Spin(2), &b);
            let dab = g.evaluate(Spin(2), &g.compose(&a, &b));
            let prod = da.dot(&db);
            for i in 0..3 {
                for j in 0..3 {
                    assert_abs_diff_eq!((dab[(i, j)] - prod[(i, j)]).norm(), 0.0, epsilon = 1e-9);
                }
            }
        }
        for t in [1u32, 3, 7, 12] {
            let x = g.random_point(&mut r);
            let m = g.evaluate(Spin(t), &x);
            let mh = m.t().mapv(|v| v.conj());
            let prod = m.dot(&mh);
            let d = t as usize + 1;
            for i in 0..d {
                for j in 0..d {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(
                        (prod[(i, j)] - Complex64::new(want, 0.0)).norm(),
                        0.0,
                        epsilon = 1e-9
                    );
                }
            }
        }
    }

    #[test]
    fn identity_evaluates_to_identity_matrix() {
        let g = Su2::new();
        for t in 0..6u32 {
            let m = g.evaluate(Spin(t), &g.identity());
            for i in 0..=t as usize {
                for j in 0..=t as usize {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(
                        (m[(i, j)] - Complex64::new(want, 0.0)).norm(),
                        0.0,
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn character_matches_trace() {
        let g = Su2::new();
        let mut r = rng(9);
        for t in 0..=8u32 {
            for _ in 0..10 {
                let x = g.random_point(&mut r);
                let m = g.evaluate(Spin(t), &x);
                let tr: Complex64 = (0..=t as usize).map(|i| m[(i, i)]).sum();
                let chi = g.character(Spin(t), &x);
                assert_abs_diff_eq!((chi - tr).norm(), 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn dual_enumeration_cutoff_two() {
        let g = Su2::new();
        let duals = g.enumerate_dual(2.0);
        let labels: Vec<u32> = duals.iter().map(|i| i.label.0).collect();
        assert_eq!(labels, vec![0, 1, 2]);
        assert_abs_diff_eq!(duals[0].weight, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(duals[1].weight, 1.75f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(duals[2].weight, 3.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn haar_grid_integrates_matrix_coefficients() {
        let g = Su2::new();
        let grid = g.haar_grid(8).unwrap();
        assert_abs_diff_eq!(grid.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        // integral of t^{1/2}_{00} vanishes; integral of |chi_{1/2}|^2 is 1.
        let mut coeff = Complex64::new(0.0, 0.0);
        let mut chi2 = 0.0;
        for (k, q) in grid.nodes.iter().enumerate() {
            let m = g.evaluate(Spin(1), q);
            coeff += grid.weights[k] * m[(0, 0)];
            let chi = m[(0, 0)] + m[(1, 1)];
            chi2 += grid.weights[k] * chi.norm_sqr();
        }
        assert_abs_diff_eq!(coeff.norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(chi2, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn quadrature_is_left_invariant_on_band_limited_functions() {
        let g = Su2::new();
        let grid = g.haar_grid(6).unwrap();
        let mut r = rng(10);
        let shift = g.random_point(&mut r);
        // f = real part of a spin-3/2 coefficient: band-limited well within
        // the exactness degree at resolution 6.
        let f = |q: &Quaternion| {
            let m = g.evaluate(Spin(3), q);
            m[(0, 2)]
        };
        let direct: Complex64 = grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(q, &w)| w * f(q))
            .sum();
        let shifted: Complex64 = grid
            .nodes
            .iter()
            .zip(&grid.weights)
            .map(|(q, &w)| w * f(&g.compose(&shift, q)))
            .sum();
        assert_abs_diff_eq!((direct - shifted).norm(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn separable_forward_matches_naive() {
        let g = Su2::new();
        let grid = Arc::new(g.haar_grid(5).unwrap());
        let duals = g.enumerate_dual(4.0);
        let f = GridFunction::from_fn(&grid, |q| {
            // Random-ish smooth function: mix of low-spin coefficients.
            let m1 = g.evaluate(Spin(1), q);
            let m2 = g.evaluate(Spin(2), q);
            m1[(0, 1)] * Complex64::new(0.7, -0.2)
                + m2[(2, 0)] * Complex64::new(-0.3, 0.4)
                + Complex64::new(0.1, 0.0)
        });
        let fast = g.forward(&f, &duals);
        let naive = naive_forward(&g, &f, &duals);
        for irrep in &duals {
            let a = fast.get(&irrep.label).unwrap();
            let b = naive.get(&irrep.label).unwrap();
            for i in 0..irrep.dim {
                for j in 0..irrep.dim {
                    assert_abs_diff_eq!((a[(i, j)] - b[(i, j)]).norm(), 0.0, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn separable_inverse_matches_pointwise() {
        let g = Su2::new();
        let grid = Arc::new(g.haar_grid(4).unwrap());
        let duals = g.enumerate_dual(3.0);
        let mut coeffs = FourierCoefficients::new(3.0);
        let mut r = rng(12);
        for irrep in &duals {
            let d = irrep.dim;
            let mut m = CMat::zeros((d, d));
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] = Complex64::new(
                        rand::Rng::random::<f64>(&mut r) - 0.5,
                        rand::Rng::random::<f64>(&mut r) - 0.5,
                    );
                }
            }
            coeffs.matrices.insert(irrep.label, m);
        }
        let fast = g.inverse_on_grid(&coeffs, &grid);
        for (k, q) in grid.nodes.iter().enumerate().step_by(17) {
            let want = g.inverse_at(&coeffs, q);
            assert_abs_diff_eq!((fast.values[k] - want).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn forward_known_coefficients() {
        let g = Su2::new();
        let grid = Arc::new(g.haar_grid(6).unwrap());
        let duals = g.enumerate_dual(4.0);

        // f = 1: only the trivial coefficient survives.
        let ones = GridFunction::from_fn(&grid, |_| Complex64::new(1.0, 0.0));
        let c1 = g.forward(&ones, &duals);
        for irrep in &duals {
            let m = c1.get(&irrep.label).unwrap();
            for i in 0..irrep.dim {
                for j in 0..irrep.dim {
                    let want = if irrep.label.0 == 0 { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(
                        (m[(i, j)] - Complex64::new(want, 0.0)).norm(),
                        0.0,
                        epsilon = 1e-10
                    );
                }
            }
        }

        // f = chi_{1/2}: coefficient I/2 at spin 1/2, zero elsewhere.
        let chi = GridFunction::from_fn(&grid, |q| g.character(Spin(1), q));
        let c2 = g.forward(&chi, &duals);
        for irrep in &duals {
            let m = c2.get(&irrep.label).unwrap();
            for i in 0..irrep.dim {
                for j in 0..irrep.dim {
                    let want = if irrep.label.0 == 1 && i == j {
                        0.5
                    } else {
                        0.0
                    };
                    assert_abs_diff_eq!(
                        (m[(i, j)] - Complex64::new(want, 0.0)).norm(),
                        0.0,
                        epsilon = 1e-10
                    );
                }
            }
        }

        // f = t^1_{02}: single entry 1/3 at transposed position (2, 0).
        let t102 = GridFunction::from_fn(&grid, |q| g.evaluate(Spin(2), q)[(0, 2)]);
        let c3 = g.forward(&t102, &duals);
        let m = c3.get(&Spin(2)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if (i, j) == (2, 0) { 1.0 / 3.0 } else { 0.0 };
                assert_abs_diff_eq!(
                    (m[(i, j)] - Complex64::new(want, 0.0)).norm(),
                    0.0,
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn diag_sum_matches_generic_path() {
        let g = Su2::new();
        let mut r = rng(13);
        let mut diag: BTreeMap<Spin, Vec<Complex64>> = BTreeMap::new();
        for t in 0..=5u32 {
            let d = t as usize + 1;
            diag.insert(
                Spin(t),
                (0..d)
                    .map(|_| {
                        Complex64::new(
                            rand::Rng::random::<f64>(&mut r) - 0.5,
                            rand::Rng::random::<f64>(&mut r) - 0.5,
                        )
                    })
                    .collect(),
            );
        }
        for _ in 0..10 {
            let u = g.random_point(&mut r);
            let fast = g.diag_peter_weyl_sum(&diag, &u);
            // Generic path: full evaluate, then the same weighted trace.
            let mut want = Complex64::new(0.0, 0.0);
            for (label, entries) in &diag {
                let m = g.evaluate(*label, &u);
                let d = label.dim();
                let mut tr = Complex64::new(0.0, 0.0);
                for j in 0..d {
                    tr += entries[j] * m[(j, j)];
                }
                want += d as f64 * tr;
            }
            assert_abs_diff_eq!((fast - want).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn flow_directions_give_weight_action_and_bracket() {
        let g = Su2::new();
        // Z flow: D^l(flow(e, Z, t)) should equal diag(e^{+2 i m (t/2) ...});
        // concretely the derivative of the (j,j) entry at spin 1/2 is +i m.
        let h = 1e-6;
        let plus = g.evaluate(Spin(1), &g.flow(&g.identity(), 2, h));
        let minus = g.evaluate(Spin(1), &g.flow(&g.identity(), 2, -h));
        let deriv00 = (plus[(0, 0)] - minus[(0, 0)]) / Complex64::new(2.0 * h, 0.0)
            * Complex64::new(g.flow_speed(), 0.0);
        // m = +1/2 at index 0.
        assert_abs_diff_eq!(
            (deriv00 - Complex64::new(0.0, 0.5)).norm(),
            0.0,
            epsilon = 1e-6
        );
    }
}
