//! Symbols for the SU(2) subelliptic application: the Laplacian, the
//! vertical field Z, the sub-Laplacian -(X^2+Y^2), the heat-type operator
//! Z - X^2 - Y^2, and their parametrices.
//!
//! All act diagonally in the weight basis at spin l, where column j
//! carries weight m = l - j (decreasing). Signs follow the positive
//! (nonnegative-spectrum) convention for both Laplacians; the constant in
//! the Z action is pinned by the finite-difference oracles below and in
//! the group tests.

use std::sync::Arc;

use num_complex::Complex64;

use super::{DiagonalMultiplier, Symbol, SymbolClass};
use crate::group::su2::Su2;

fn su2_diag(
    name: &str,
    class: SymbolClass,
    f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
) -> Arc<dyn Symbol<Su2>> {
    Arc::new(DiagonalMultiplier::<Su2>::new(name, class, move |irrep| {
        let t = irrep.label.0;
        let l = t as f64 / 2.0;
        (0..=t).map(|j| f(l, l - j as f64)).collect()
    }))
}

/// Full Laplacian: l(l+1) I.
pub fn laplacian() -> Arc<dyn Symbol<Su2>> {
    su2_diag("laplacian", SymbolClass::new(2.0, 1.0, 0.0), |l, _m| {
        Complex64::new(l * (l + 1.0), 0.0)
    })
}

/// Vertical field Z (the circle direction): diag(i m).
pub fn vertical() -> Arc<dyn Symbol<Su2>> {
    su2_diag("vertical", SymbolClass::new(1.0, 1.0, 0.0), |_l, m| {
        Complex64::new(0.0, m)
    })
}

/// Positive sub-Laplacian -(X^2 + Y^2): diag(l(l+1) - m^2).
pub fn sub_laplacian() -> Arc<dyn Symbol<Su2>> {
    su2_diag("sub_laplacian", SymbolClass::new(2.0, 0.5, 0.0), |l, m| {
        Complex64::new(l * (l + 1.0) - m * m, 0.0)
    })
}

/// Heat-type operator Z - X^2 - Y^2: diag(i m + l(l+1) - m^2).
pub fn heat_operator() -> Arc<dyn Symbol<Su2>> {
    su2_diag("heat_operator", SymbolClass::new(2.0, 0.5, 0.0), |l, m| {
        Complex64::new(l * (l + 1.0) - m * m, m)
    })
}

/// Entrywise inverse of the sub-Laplacian, zero on the constants
/// (spin 0). Every entry is bounded by 1/l since l(l+1) - m^2 >= l.
pub fn sub_laplacian_parametrix() -> Arc<dyn Symbol<Su2>> {
    su2_diag(
        "sub_laplacian_parametrix",
        SymbolClass::new(-1.0, 0.5, 0.0),
        |l, m| {
            if l == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0 / (l * (l + 1.0) - m * m), 0.0)
            }
        },
    )
}

/// Entrywise inverse of the heat-type operator, zero on the constants.
pub fn heat_parametrix() -> Arc<dyn Symbol<Su2>> {
    su2_diag(
        "heat_parametrix",
        SymbolClass::new(-1.0, 0.5, 0.0),
        |l, m| {
            if l == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0) / Complex64::new(l * (l + 1.0) - m * m, m)
            }
        },
    )
}

/// The order -3/4 probe: <zeta>^{1/4} times the sub-Laplacian parametrix.
/// Its declared class has rho = 1/2; seminorm stability of this symbol is
/// the quantitative content of the subelliptic regularity estimate.
pub fn bessel_scaled_parametrix() -> Arc<dyn Symbol<Su2>> {
    su2_diag(
        "bessel_scaled_parametrix",
        SymbolClass::new(-0.75, 0.5, 0.0),
        |l, m| {
            if l == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let lambda = l * (l + 1.0);
                Complex64::new((1.0 + lambda).powf(0.125) / (lambda - m * m), 0.0)
            }
        },
    )
}
