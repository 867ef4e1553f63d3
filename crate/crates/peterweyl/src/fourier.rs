//! Group Fourier transform, Peter-Weyl inversion, and Parseval accounting on
//! a truncated dual.
//!
//! The generic quadrature paths ([`naive_forward`], [`naive_inverse_at`]) are
//! deliberately direct: one `evaluate` per (node, irrep). Backends override
//! the trait entry points with fast paths; these functions remain the oracle
//! they are tested against.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;

use crate::group::{CompactGroup, Grid, Irrep};
use crate::linalg::CMat;

/// A complex-valued function sampled on a quadrature grid.
#[derive(Clone, Debug)]
pub struct GridFunction<P> {
    pub grid: Arc<Grid<P>>,
    pub values: Vec<Complex64>,
}

impl<P> GridFunction<P> {
    pub fn new(grid: Arc<Grid<P>>, values: Vec<Complex64>) -> Self {
        assert_eq!(grid.len(), values.len(), "value count must match grid");
        GridFunction { grid, values }
    }

    pub fn from_fn(grid: &Arc<Grid<P>>, mut f: impl FnMut(&P) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(&mut f).collect();
        GridFunction::new(Arc::clone(grid), values)
    }

    pub fn zero(grid: &Arc<Grid<P>>) -> Self {
        GridFunction::new(Arc::clone(grid), vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Quadrature integral (sum of weight * value).
    pub fn integral(&self) -> Complex64 {
        self.values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| v * w)
            .sum()
    }

    /// Pointwise product with another function on the same grid.
    pub fn mul_pointwise(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        GridFunction::new(Arc::clone(&self.grid), values)
    }

    /// self + c * other.
    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        GridFunction::new(Arc::clone(&self.grid), values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let values = self.values.iter().map(|v| c * v).collect();
        GridFunction::new(Arc::clone(&self.grid), values)
    }
}

/// Truncated family of Fourier coefficient matrices, keyed by irrep label.
#[derive(Clone, Debug)]
pub struct FourierCoefficients<L: Ord> {
    pub matrices: BTreeMap<L, CMat>,
    /// Weight cutoff the family was computed with (reporting metadata).
    pub cutoff: f64,
}

impl<L: Ord + Copy> FourierCoefficients<L> {
    pub fn new(cutoff: f64) -> Self {
        FourierCoefficients {
            matrices: BTreeMap::new(),
            cutoff,
        }
    }

    pub fn get(&self, label: &L) -> Option<&CMat> {
        self.matrices.get(label)
    }

    /// Parseval norm: `(sum_zeta d_zeta ||fhat(zeta)||_HS^2)^(1/2)`.
    pub fn spectral_l2_norm(&self) -> f64 {
        self.matrices
            .values()
            .map(|m| m.nrows() as f64 * m.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Apply a matrix map entrywise over labels.
    pub fn map_matrices(&self, mut f: impl FnMut(&L, &CMat) -> CMat) -> Self {
        let matrices = self.matrices.iter().map(|(l, m)| (*l, f(l, m))).collect();
        FourierCoefficients {
            matrices,
            cutoff: self.cutoff,
        }
    }

    pub fn add_scaled(&self, c: Complex64, other: &Self) -> Self {
        let mut matrices = self.matrices.clone();
        for (l, m) in &other.matrices {
            match matrices.get_mut(l) {
                Some(existing) => *existing = &*existing + &m.mapv(|z| c * z),
                None => {
                    matrices.insert(*l, m.mapv(|z| c * z));
                }
            }
        }
        FourierCoefficients {
            matrices,
            cutoff: self.cutoff.max(other.cutoff),
        }
    }
}

/// Serialization form: text label plus flattened real/imag parts, row-major.
#[derive(Serialize)]
pub struct CoefficientsJson {
    pub cutoff: f64,
    pub entries: Vec<CoefficientEntryJson>,
}

#[derive(Serialize)]
pub struct CoefficientEntryJson {
    pub label: String,
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl<L: Ord + Copy> FourierCoefficients<L> {
    /// Serialize with a caller-supplied label renderer (labels are
    /// group-specific; their text form is the portable representation).
    pub fn to_json(&self, label_text: impl Fn(L) -> String) -> CoefficientsJson {
        let entries = self
            .matrices
            .iter()
            .map(|(l, m)| CoefficientEntryJson {
                label: label_text(*l),
                dim: m.nrows(),
                re: m.iter().map(|z| z.re).collect(),
                im: m.iter().map(|z| z.im).collect(),
            })
            .collect();
        CoefficientsJson {
            cutoff: self.cutoff,
            entries,
        }
    }
}

/// Direct quadrature of `fhat(zeta)_{ij} = sum_k w_k f_k conj(zeta(x_k)_{ji})`.
pub fn naive_forward<G: CompactGroup>(
    group: &G,
    f: &GridFunction<G::Point>,
    duals: &[Irrep<G::Label>],
) -> FourierCoefficients<G::Label> {
    let cutoff = duals.iter().map(|i| i.weight).fold(0.0, f64::max);
    let mut out = FourierCoefficients::new(cutoff);
    for irrep in duals {
        let d = irrep.dim;
        let mut m = Array2::from_elem((d, d), Complex64::new(0.0, 0.0));
        for (k, x) in f.grid.nodes.iter().enumerate() {
            let wf = f.values[k] * f.grid.weights[k];
            if wf == Complex64::new(0.0, 0.0) {
                continue;
            }
            let rep = group.evaluate(irrep.label, x);
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += wf * rep[(j, i)].conj();
                }
            }
        }
        out.matrices.insert(irrep.label, m);
    }
    out
}

/// Direct Peter-Weyl sum `sum_zeta d_zeta Tr(zeta(x) fhat(zeta))`.
pub fn naive_inverse_at<G: CompactGroup>(
    group: &G,
    coeffs: &FourierCoefficients<G::Label>,
    x: &G::Point,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (label, m) in &coeffs.matrices {
        let d = m.nrows();
        let rep = group.evaluate(*label, x);
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                tr += rep[(i, j)] * m[(j, i)];
            }
        }
        acc += d as f64 * tr;
    }
    acc
}
