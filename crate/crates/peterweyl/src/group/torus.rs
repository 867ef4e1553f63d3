//! Flat n-torus backend: scalar characters `e^{-i k.x}`, uniform tensor
//! grids, and per-coordinate wraparound distance.
//!
//! Everything is one-dimensional on the dual side, which makes this backend
//! the independent oracle for the matrix-valued SU(2) machinery: the generic
//! trait paths run here with no Wigner-matrix code involved.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use super::{CompactGroup, DifferenceFunction, Grid, Irrep};
use crate::error::{Error, Result};
use crate::linalg::CMat;

#[derive(Clone, Copy, Debug, Default)]
pub struct Torus<const N: usize>;

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed representative of `a` in (-pi, pi].
fn wrap_signed(a: f64) -> f64 {
    let r = wrap(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

impl<const N: usize> CompactGroup for Torus<N> {
    type Point = [f64; N];
    type Label = [i64; N];

    fn name(&self) -> &'static str {
        "torus"
    }

    fn dim(&self) -> usize {
        N
    }

    fn identity(&self) -> Self::Point {
        [0.0; N]
    }

    fn compose(&self, a: &Self::Point, b: &Self::Point) -> Self::Point {
        std::array::from_fn(|i| wrap(a[i] + b[i]))
    }

    fn inverse(&self, a: &Self::Point) -> Self::Point {
        std::array::from_fn(|i| wrap(-a[i]))
    }

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64 {
        (0..N)
            .map(|i| {
                let d = wrap_signed(a[i] - b[i]);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    fn diameter(&self) -> f64 {
        PI * (N as f64).sqrt()
    }

    fn exp_map(&self, v: &[f64]) -> Self::Point {
        assert_eq!(v.len(), N, "tangent vector dimension");
        std::array::from_fn(|i| wrap(v[i]))
    }

    fn log_map(&self, a: &Self::Point) -> Result<Vec<f64>> {
        let v: Vec<f64> = a.iter().map(|&x| wrap_signed(x)).collect();
        if v.iter().any(|&x| x >= PI - 1e-12) {
            return Err(Error::domain(
                "log_map at the cut locus (coordinate distance pi)",
            ));
        }
        Ok(v)
    }

    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Self::Point {
        std::array::from_fn(|_| rng.random::<f64>() * TAU)
    }

    fn point_coords(&self, p: &Self::Point) -> Vec<f64> {
        p.to_vec()
    }

    fn irrep(&self, label: Self::Label) -> Irrep<Self::Label> {
        let lambda: f64 = label.iter().map(|&k| (k * k) as f64).sum();
        Irrep {
            label,
            dim: 1,
            eigenvalue: lambda,
            weight: (1.0 + lambda).sqrt(),
        }
    }

    fn enumerate_dual(&self, cutoff: f64) -> Vec<Irrep<Self::Label>> {
        let mut out = Vec::new();
        if cutoff < 1.0 {
            return out;
        }
        let max_sq = cutoff * cutoff - 1.0;
        let bound = max_sq.max(0.0).sqrt().floor() as i64;
        let width = (2 * bound + 1) as usize;
        let total = width.pow(N as u32);
        for flat in 0..total {
            let mut rem = flat;
            let mut label = [0i64; N];
            for slot in label.iter_mut() {
                *slot = (rem % width) as i64 - bound;
                rem /= width;
            }
            let norm_sq: i64 = label.iter().map(|&k| k * k).sum();
            if norm_sq as f64 <= max_sq + 1e-12 {
                out.push(self.irrep(label));
            }
        }
        out.sort_by(|a, b| {
            a.weight
                .partial_cmp(&b.weight)
                .unwrap()
                .then_with(|| a.label.cmp(&b.label))
        });
        out
    }

    fn evaluate(&self, label: Self::Label, x: &Self::Point) -> CMat {
        let phase: f64 = label
            .iter()
            .zip(x.iter())
            .map(|(&k, &xi)| k as f64 * xi)
            .sum();
        let mut m = CMat::zeros((1, 1));
        m[(0, 0)] = Complex64::from_polar(1.0, -phase);
        m
    }

    fn label_text(&self, label: Self::Label) -> String {
        if N == 1 {
            format!("{}", label[0])
        } else {
            let parts: Vec<String> = label.iter().map(|k| k.to_string()).collect();
            format!("({})", parts.join(","))
        }
    }

    fn haar_grid(&self, resolution: usize) -> Result<Grid<Self::Point>> {
        if resolution < 2 {
            return Err(Error::argument("grid resolution must be at least 2"));
        }
        let per_dim = 2 * resolution;
        let total = per_dim.pow(N as u32);
        let step = TAU / per_dim as f64;
        let mut nodes = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut p = [0.0f64; N];
            for slot in p.iter_mut() {
                *slot = (rem % per_dim) as f64 * step;
                rem /= per_dim;
            }
            nodes.push(p);
        }
        let w = 1.0 / total as f64;
        Ok(Grid {
            nodes,
            weights: vec![w; total],
            resolution,
            exactness: per_dim - 1,
            lattice: vec![per_dim; N],
            euler: None,
        })
    }

    fn flow(&self, x: &Self::Point, direction: usize, t: f64) -> Self::Point {
        assert!(direction < N, "direction out of range");
        let mut p = *x;
        p[direction] = wrap(p[direction] + t);
        p
    }

    fn flow_speed(&self) -> f64 {
        1.0
    }

    fn difference_family(&self) -> Vec<DifferenceFunction<Self::Point>> {
        (0..N)
            .map(|j| DifferenceFunction {
                name: format!("e^(ix_{})-1", j),
                eval: Box::new(move |p: &Self::Point| {
                    Complex64::from_polar(1.0, p[j]) - Complex64::new(1.0, 0.0)
                }),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::GridFunction;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use std::sync::Arc;

    #[test]
    fn group_laws() {
        let g = Torus::<1>;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = g.random_point(&mut rng);
            let b = g.random_point(&mut rng);
            let c = g.random_point(&mut rng);
            let ab_c = g.compose(&g.compose(&a, &b), &c);
            let a_bc = g.compose(&a, &g.compose(&b, &c));
            assert_abs_diff_eq!(g.distance(&ab_c, &a_bc), 0.0, epsilon = 1e-12);
            let e = g.compose(&a, &g.inverse(&a));
            assert_abs_diff_eq!(g.distance(&e, &g.identity()), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dual_enumeration_cutoff_two() {
        let g = Torus::<1>;
        let duals = g.enumerate_dual(2.0);
        let labels: Vec<i64> = duals.iter().map(|i| i.label[0]).collect();
        assert_eq!(labels, vec![0, -1, 1]);
        assert_abs_diff_eq!(duals[1].weight, 2.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn round_trip_band_limited() {
        let g = Torus::<1>;
        let grid = Arc::new(g.haar_grid(8).unwrap());
        let duals = g.enumerate_dual(6.0);
        let f = GridFunction::from_fn(&grid, |p| {
            Complex64::from_polar(1.0, 3.0 * p[0]) + Complex64::from_polar(2.0, -2.0 * p[0])
        });
        let coeffs = g.forward(&f, &duals);
        for (k, x) in grid.nodes.iter().enumerate() {
            let v = g.inverse_at(&coeffs, x);
            assert_abs_diff_eq!((v - f.values[k]).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn forward_picks_out_frequencies() {
        // f(x) = e^{3ix} has zeta_k coefficient 1 at k = -3 under
        // zeta_k(x) = e^{-ikx}.
        let g = Torus::<1>;
        let grid = Arc::new(g.haar_grid(8).unwrap());
        let duals = g.enumerate_dual(8.0);
        let f = GridFunction::from_fn(&grid, |p| Complex64::from_polar(1.0, 3.0 * p[0]));
        let coeffs = g.forward(&f, &duals);
        for irrep in &duals {
            let got = coeffs.get(&irrep.label).unwrap()[(0, 0)];
            let want = if irrep.label[0] == -3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(
                (got - Complex64::new(want, 0.0)).norm(),
                0.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn two_dimensional_distance_and_grid() {
        let g = Torus::<2>;
        let a = [0.1, TAU - 0.1];
        let b = [TAU - 0.1, 0.1];
        // Each coordinate is 0.2 apart across the wrap.
        assert_abs_diff_eq!(g.distance(&a, &b), (2.0f64 * 0.04).sqrt(), epsilon = 1e-12);
        let grid = g.haar_grid(2).unwrap();
        assert_eq!(grid.len(), 16);
        assert_abs_diff_eq!(grid.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }
}
