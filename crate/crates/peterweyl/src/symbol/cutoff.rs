//! Smooth dyadic cutoff: a C^infinity bump supported in [1/2, 1],
//! normalized so that the multiplicative average over one octave is 1
//! (the partition-of-unity weight in the dyadic decomposition).

use crate::linalg::gauss_legendre;

/// phi(s) = c * exp(-p / (1 - u^2)) with u = 4s - 3, supported in [1/2, 1].
#[derive(Clone, Debug)]
pub struct CutoffProfile {
    pub sharpness: f64,
    norm: f64,
}

fn raw_bump(p: f64, s: f64) -> f64 {
    if s <= 0.5 || s >= 1.0 {
        return 0.0;
    }
    let u = 4.0 * s - 3.0;
    (-p / (1.0 - u * u)).exp()
}

/// Build the profile for a given sharpness parameter p > 0 (larger p =
/// flatter, more concentrated bump). The normalization constant is fixed
/// numerically so that integral over [1/2,1] of phi(s)/s ds = 1,
/// equivalently integral over [1,2] of phi(1/t) dt/t = 1.
pub fn build_cutoff(sharpness: f64) -> CutoffProfile {
    assert!(sharpness > 0.0, "cutoff sharpness must be positive");
    let (nodes, weights) = gauss_legendre(200);
    let mut total = 0.0;
    for (&x, &w) in nodes.iter().zip(&weights) {
        // map [-1, 1] -> [1/2, 1]
        let s = 0.75 + 0.25 * x;
        total += w * 0.25 * raw_bump(sharpness, s) / s;
    }
    CutoffProfile {
        sharpness,
        norm: 1.0 / total,
    }
}

impl CutoffProfile {
    pub fn eval(&self, s: f64) -> f64 {
        self.norm * raw_bump(self.sharpness, s)
    }

    /// Reconstruction weight: integral over t in [1, t_cap] of phi(w/t) dt/t.
    /// Substituting s = w/t turns it into the normalization integral
    /// clipped to [w/t_cap, w], so it equals 1 whenever the whole octave
    /// [w, 2w] lies inside [1, t_cap].
    pub fn dyadic_weight(&self, weight: f64, t_cap: f64) -> f64 {
        if t_cap <= 1.0 {
            return 0.0;
        }
        let lo = (weight / t_cap).max(0.5);
        let hi = weight.min(1.0);
        if hi <= lo {
            return 0.0;
        }
        let (nodes, wts) = gauss_legendre(200);
        let mid = 0.5 * (hi + lo);
        let half = 0.5 * (hi - lo);
        nodes
            .iter()
            .zip(&wts)
            .map(|(&x, &w)| {
                let s = mid + half * x;
                w * half * self.eval(s) / s
            })
            .sum()
    }
}
