//! Group abstraction: points, irreducible representations, Haar quadrature,
//! geodesic geometry, and the transform entry points shared by all backends.
//!
//! The two shipped backends are [`su2::Su2`] and [`torus::Torus`]. Everything
//! downstream (symbols, quantization, function spaces, verification) is
//! generic over [`CompactGroup`], so the scalar torus backend doubles as an
//! independent oracle for the matrix-valued SU(2) paths.

pub mod su2;
pub mod torus;

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::fourier::{naive_forward, naive_inverse_at, FourierCoefficients, GridFunction};
use crate::linalg::CMat;

/// One irreducible unitary representation: label, dimension, Laplace
/// eigenvalue, and weight `(1 + eigenvalue)^(1/2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Irrep<L> {
    pub label: L,
    pub dim: usize,
    pub eigenvalue: f64,
    pub weight: f64,
}

/// Euler-angle product structure of an SU(2) grid, kept alongside the flat
/// node list so the separable fast transforms can exploit it.
///
/// Node index layout: `idx = (a * n_beta + b) * n_gamma + c` with
/// `alpha_a = 2 pi a / n_alpha`, `gamma_c = 4 pi c / n_gamma`, and `beta_b`
/// the Gauss-Legendre nodes in `cos beta`.
#[derive(Clone, Debug)]
pub struct EulerLayout {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub n_gamma: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Normalized beta weights (Gauss-Legendre weight / 2); the full node
    /// weight is `beta_weight[b] / (n_alpha * n_gamma)`.
    pub beta_weight: Vec<f64>,
}

/// Quadrature rule for the normalized Haar integral: weights sum to 1.
#[derive(Clone, Debug)]
pub struct Grid<P> {
    pub nodes: Vec<P>,
    pub weights: Vec<f64>,
    pub resolution: usize,
    /// Largest "twice frequency" integrated alias-free: products of two
    /// matrix coefficients t^l, t^l' are integrated exactly whenever
    /// 2l + 2l' <= exactness (SU(2)), |k - k'| <= exactness per axis (torus).
    pub exactness: usize,
    /// Shape of the row-major index lattice: node index decomposes
    /// mixed-radix over these axis lengths. Drives the nested cell tree.
    pub lattice: Vec<usize>,
    pub euler: Option<EulerLayout>,
}

impl<P> Grid<P> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Geodesic ball `B(center, radius) = { x : d(center, x) < radius }`.
#[derive(Clone, Debug)]
pub struct Ball<P> {
    pub center: P,
    pub radius: f64,
}

impl<P> Ball<P> {
    pub fn contains<G: CompactGroup<Point = P>>(&self, group: &G, x: &P) -> bool {
        group.distance(&self.center, x) < self.radius
    }
}

/// One member of a strongly admissible difference family: a smooth function
/// on the group vanishing at the identity, applied to symbols by
/// multiply-then-retransform on the kernel side.
pub struct DifferenceFunction<P> {
    pub name: String,
    pub eval: Box<dyn Fn(&P) -> Complex64 + Send + Sync>,
}

impl<P> DifferenceFunction<P> {
    pub fn at(&self, x: &P) -> Complex64 {
        (self.eval)(x)
    }
}

impl<P> Debug for DifferenceFunction<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DifferenceFunction({})", self.name)
    }
}

/// A compact group backend: group operations, bi-invariant geometry, the
/// unitary dual, Haar quadrature, and Fourier transforms.
///
/// The transform methods have generic quadrature implementations here;
/// backends may override them with structure-exploiting fast paths (SU(2)
/// does, via the Euler-angle factorization). The generic bodies stay
/// available as [`naive_forward`] / [`naive_inverse_at`] so tests can pit the
/// fast paths against them.
pub trait CompactGroup: Sized + Send + Sync + 'static {
    type Point: Clone + PartialEq + Debug + Send + Sync;
    type Label: Copy + Ord + Eq + Debug + Send + Sync;

    fn name(&self) -> &'static str;
    /// Manifold dimension n (3 for SU(2), n for the n-torus).
    fn dim(&self) -> usize;
    fn identity(&self) -> Self::Point;
    fn compose(&self, a: &Self::Point, b: &Self::Point) -> Self::Point;
    fn inverse(&self, a: &Self::Point) -> Self::Point;
    /// Bi-invariant geodesic distance.
    fn distance(&self, a: &Self::Point, b: &Self::Point) -> f64;
    fn diameter(&self) -> f64;
    /// Geodesic exponential at the identity; `|exp_map(v)|_geod = |v|` for
    /// `|v| < diameter`, so the tangent norm and the metric agree exactly.
    fn exp_map(&self, v: &[f64]) -> Self::Point;
    /// Inverse of `exp_map`; errors at the cut locus.
    fn log_map(&self, a: &Self::Point) -> Result<Vec<f64>>;
    /// Haar-uniform random point.
    fn random_point(&self, rng: &mut dyn rand::RngCore) -> Self::Point;
    /// Flat coordinate list for serialization (quaternion / angle vector).
    fn point_coords(&self, p: &Self::Point) -> Vec<f64>;

    fn irrep(&self, label: Self::Label) -> Irrep<Self::Label>;
    /// All irreps with weight <= cutoff, sorted by (weight, label); complete.
    fn enumerate_dual(&self, cutoff: f64) -> Vec<Irrep<Self::Label>>;
    /// Unitary matrix of the representation at a point.
    fn evaluate(&self, label: Self::Label, x: &Self::Point) -> CMat;
    /// Character (trace of `evaluate`); overridable with closed forms.
    fn character(&self, label: Self::Label, x: &Self::Point) -> Complex64 {
        let m = self.evaluate(label, x);
        (0..m.nrows()).map(|i| m[(i, i)]).sum()
    }
    /// Human-readable label ("3/2", "( -1, 2 )") for reports.
    fn label_text(&self, label: Self::Label) -> String;

    /// Quadrature rule integrating the Haar measure; weights sum to 1.
    fn haar_grid(&self, resolution: usize) -> Result<Grid<Self::Point>>;

    /// Unit-speed geodesic flow from `x` along the `direction`-th frame
    /// field: `x * exp_map(t * e_direction)`.
    fn flow(&self, x: &Self::Point, direction: usize, t: f64) -> Self::Point;
    /// Factor converting the unit-speed parameter derivative into the frame
    /// derivative operator (chosen so the frame Laplacian has the backend's
    /// stated eigenvalues: 1/2 for SU(2), 1 for the torus).
    fn flow_speed(&self) -> f64;
    /// Strongly admissible difference family (common zero set = identity).
    fn difference_family(&self) -> Vec<DifferenceFunction<Self::Point>>;

    /// Fourier coefficients `fhat(zeta) = sum_i w_i f_i zeta(x_i)^*` over the
    /// given dual list.
    fn forward(
        &self,
        f: &GridFunction<Self::Point>,
        duals: &[Irrep<Self::Label>],
    ) -> FourierCoefficients<Self::Label> {
        naive_forward(self, f, duals)
    }

    /// Peter-Weyl sum `f(x) = sum_zeta d_zeta Tr(zeta(x) fhat(zeta))`.
    fn inverse_at(&self, coeffs: &FourierCoefficients<Self::Label>, x: &Self::Point) -> Complex64 {
        naive_inverse_at(self, coeffs, x)
    }

    /// Inverse transform evaluated on a whole grid.
    fn inverse_on_grid(
        &self,
        coeffs: &FourierCoefficients<Self::Label>,
        grid: &Arc<Grid<Self::Point>>,
    ) -> GridFunction<Self::Point> {
        let values = grid
            .nodes
            .iter()
            .map(|x| self.inverse_at(coeffs, x))
            .collect();
        GridFunction::new(Arc::clone(grid), values)
    }

    /// Peter-Weyl sum `sum_l d_l sum_m diag[l][m] zeta_l(u)_{mm}` for
    /// diagonal coefficient families: the workhorse of kernel evaluation for
    /// diagonal multiplier symbols.
    fn diag_peter_weyl_sum(
        &self,
        diag: &BTreeMap<Self::Label, Vec<Complex64>>,
        u: &Self::Point,
    ) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&label, entries) in diag {
            let rep = self.evaluate(label, u);
            let d = rep.nrows() as f64;
            let mut tr = Complex64::new(0.0, 0.0);
            for (m, c) in entries.iter().enumerate() {
                tr += rep[(m, m)] * c;
            }
            acc += d * tr;
        }
        acc
    }
}
