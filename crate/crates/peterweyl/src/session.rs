//! Backend selection and the reportable operations shared by the CLI and
//! the C API: grid inspection, transform round trips, kernel decay slices,
//! and model-operator solves.
//!
//! Everything here funnels into [`CheckReport`] so the output plumbing
//! (JSON/CSV/text, config echo, determinism) is identical for exploratory
//! subcommands and named verification checks.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::group::su2::Su2;
use crate::group::torus::Torus;
use crate::group::CompactGroup;
use crate::quantize::{kernel_eval, random_band_limited};
use crate::spaces::lp_norm;
use crate::symbol::{DiagonalMultiplier, Symbol};
use crate::verify::solve::{solve_subelliptic, SolveReport, SubellipticOperator};
use crate::verify::{CheckConfig, CheckReport};

/// A concrete group the CLI can run on. Torus is the one-dimensional
/// cross-check backend; the named verification checks are SU(2)-specific.
pub enum Backend {
    Su2(Arc<Su2>),
    Torus(Arc<Torus<1>>),
}

impl Backend {
    /// Parses a backend tag. Unknown tags are usage errors (exit code 2).
    pub fn parse(tag: &str) -> Result<Backend> {
        match tag {
            "su2" => Ok(Backend::Su2(Arc::new(Su2::new()))),
            "torus" => Ok(Backend::Torus(Arc::new(Torus::<1>))),
            other => Err(Error::usage(format!(
                "unknown group '{other}'; expected su2 or torus"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Backend::Su2(_) => "su2",
            Backend::Torus(_) => "torus",
        }
    }

    /// Quadrature-grid summary: node count, lattice shape, exactness degree,
    /// and the total weight (which must be 1 for a probability Haar measure).
    pub fn grid_info(&self, config: &CheckConfig) -> Result<CheckReport> {
        match self {
            Backend::Su2(g) => grid_info(g.as_ref(), config),
            Backend::Torus(g) => grid_info(g.as_ref(), config),
        }
    }

    /// Forward-then-inverse round trip of a seeded band-limited function,
    /// reporting the Parseval residual and the max pointwise error.
    pub fn transform_report(&self, config: &CheckConfig) -> Result<CheckReport> {
        match self {
            Backend::Su2(g) => transform_report(g.as_ref(), config),
            Backend::Torus(g) => transform_report(g.as_ref(), config),
        }
    }

    /// |K(x, e)| of the order -2 diagonal multiplier along a one-parameter
    /// ray, tabulated on log-spaced distances for CSV export.
    pub fn kernel_report(&self, config: &CheckConfig) -> Result<CheckReport> {
        match self {
            Backend::Su2(g) => kernel_report(g.as_ref(), config),
            Backend::Torus(g) => kernel_report(g.as_ref(), config),
        }
    }
}

fn grid_info<G: CompactGroup>(group: &G, config: &CheckConfig) -> Result<CheckReport> {
    let grid = group.haar_grid(config.resolution)?;
    let duals = group.enumerate_dual(config.cutoff);
    let weight_sum: f64 = grid.weights.iter().sum();
    let dim_sq: usize = duals.iter().map(|irrep| irrep.dim * irrep.dim).sum();

    let mut report = CheckReport::new("grid-info", config, serde_json::Value::Null);
    report
        .scalar("nodes", grid.len() as f64)
        .series("lattice", grid.lattice.iter().map(|&n| n as f64).collect())
        .scalar("exactness_degree", grid.exactness as f64)
        .scalar("weight_sum", weight_sum)
        .scalar("dual_count", duals.len() as f64)
        .scalar("dual_dim_sq_sum", dim_sq as f64)
        .tolerance("weight_sum_error_max", 1e-12);
    report.pass = (weight_sum - 1.0).abs() <= 1e-12;
    Ok(report)
}

fn transform_report<G: CompactGroup>(group: &G, config: &CheckConfig) -> Result<CheckReport> {
    let grid = Arc::new(group.haar_grid(config.resolution)?);
    let duals = group.enumerate_dual(config.cutoff);
    if duals.is_empty() {
        return Err(Error::usage("cutoff admits no representations"));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let f = random_band_limited(group, &duals, &grid, &mut rng);

    let coeffs = group.forward(&f, &duals);
    let grid_l2 = lp_norm(&f, 2.0);
    let spectral_l2 = coeffs.spectral_l2_norm();
    let parseval_residual = (grid_l2 - spectral_l2).abs();

    let back = group.inverse_on_grid(&coeffs, &grid);
    let round_trip_max = f
        .values
        .iter()
        .zip(&back.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0_f64, f64::max);

    // A grid too coarse for the band aliases; the report shows the damage
    // honestly instead of erroring, since this is an exploratory command.
    let mut report = CheckReport::new("transform", config, serde_json::Value::Null);
    report
        .scalar("dual_count", duals.len() as f64)
        .scalar("grid_l2", grid_l2)
        .scalar("spectral_l2", spectral_l2)
        .scalar("parseval_residual", parseval_residual)
        .scalar("round_trip_max_error", round_trip_max)
        .tolerance("parseval_residual_max", 1e-9)
        .tolerance("round_trip_max", 1e-9);
    report.pass = parseval_residual <= 1e-9 && round_trip_max <= 1e-9;
    Ok(report)
}

fn kernel_report<G: CompactGroup>(group: &G, config: &CheckConfig) -> Result<CheckReport> {
    let duals = group.enumerate_dual(config.cutoff);
    if duals.is_empty() {
        return Err(Error::usage("cutoff admits no representations"));
    }
    let sigma = DiagonalMultiplier::<G>::bessel(-2.0);
    let identity = group.identity();

    let lo: f64 = 0.02;
    let hi = 0.95 * group.diameter();
    let n = 40usize;
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    let mut distances = Vec::with_capacity(n);
    let mut magnitudes = Vec::with_capacity(n);
    let mut all_finite = true;
    for k in 0..n {
        let d = lo * ratio.powi(k as i32);
        let mut v = vec![0.0; group.dim()];
        v[0] = d;
        let x = group.exp_map(&v);
        let value = kernel_eval(group, &sigma, &x, &identity, &duals, None).norm();
        all_finite &= value.is_finite();
        distances.push(group.distance(&x, &identity));
        magnitudes.push(value);
    }

    let mut report = CheckReport::new("kernel", config, sigma.descriptor());
    report
        .series("distance", distances)
        .series("kernel_abs", magnitudes);
    report.pass = all_finite;
    Ok(report)
}

/// Runs the model-operator solve on a seeded band-limited source (band
/// cutoff/2, so the quadrature stays exact for the inversion integrals).
/// SU(2)-only: the parametrix calculus behind it is.
pub fn solve_with_synthetic_source(
    operator: SubellipticOperator,
    config: &CheckConfig,
) -> Result<SolveReport> {
    let group = Su2::new();
    let grid = Arc::new(group.haar_grid(config.resolution)?);
    let duals = group.enumerate_dual(config.cutoff);
    if duals.is_empty() {
        return Err(Error::usage("cutoff admits no representations"));
    }
    let source_duals = group.enumerate_dual((config.cutoff / 2.0).max(1.0));
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let f = random_band_limited(&group, &source_duals, &grid, &mut rng);
    let (_u, report) = solve_subelliptic(&group, operator, &f, &duals)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_are_exact_on_honest_grids_for_both_backends() {
        for tag in ["su2", "torus"] {
            let backend = Backend::parse(tag).unwrap();
            let config = CheckConfig {
                cutoff: 6.0,
                resolution: 16,
                seed: 11,
            };
            let report = backend.transform_report(&config).unwrap();
            assert!(report.pass, "{tag} transform round trip failed");
            assert!(report.get_scalar("parseval_residual").unwrap() <= 1e-9);
        }
    }

    #[test]
    fn grid_info_reports_unit_mass_and_lattice_shape() {
        let backend = Backend::parse("su2").unwrap();
        let config = CheckConfig {
            cutoff: 4.0,
            resolution: 6,
            seed: 0,
        };
        let report = backend.grid_info(&config).unwrap();
        assert!(report.pass);
        let lattice = report.get_series("lattice").unwrap();
        assert_eq!(lattice, &[12.0, 6.0, 24.0]);
        assert_eq!(report.get_scalar("nodes").unwrap(), (12 * 6 * 24) as f64);
    }

    #[test]
    fn unknown_backend_is_a_usage_error() {
        assert!(matches!(Backend::parse("so3"), Err(Error::Usage(_))));
    }

    #[test]
    fn kernel_slice_is_finite_and_monotone_in_distance_labels() {
        let backend = Backend::parse("torus").unwrap();
        let config = CheckConfig {
            cutoff: 12.0,
            resolution: 32,
            seed: 0,
        };
        let report = backend.kernel_report(&config).unwrap();
        assert!(report.pass);
        let d = report.get_series("distance").unwrap();
        assert!(d.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn synthetic_solve_is_reproducible_for_a_fixed_seed() {
        let config = CheckConfig {
            cutoff: 8.0,
            resolution: 12,
            seed: 7,
        };
        let a = solve_with_synthetic_source(SubellipticOperator::SubLaplacian, &config).unwrap();
        let b = solve_with_synthetic_source(SubellipticOperator::SubLaplacian, &config).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.ratio.is_some());
    }
}
