//! Spectral solver for the two subelliptic model problems on SU(2): the
//! sub-Laplacian and the heat-type operator. Solutions are produced by the
//! parametrix symbols on the truncated dual, together with the endpoint
//! estimate data (weak-L1 of the solution against the L1 Bessel norm of the
//! source).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::GridFunction;
use crate::group::su2::{Quaternion, Spin, Su2};
use crate::group::Irrep;
use crate::quantize::quantize_apply;
use crate::spaces::{lp_norm, weak_l1_quasinorm};
use crate::symbol::subelliptic;
use crate::symbol::{DiagonalMultiplier, Symbol};

/// The model operator being inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubellipticOperator {
    /// X^2 + Y^2: hypoelliptic, kernel spanned by the constants.
    SubLaplacian,
    /// Z - X^2 - Y^2: heat-type, same kernel.
    Heat,
}

impl SubellipticOperator {
    pub fn parse(tag: &str) -> Result<Self> {
        match tag {
            "sub_laplacian" => Ok(SubellipticOperator::SubLaplacian),
            "heat" => Ok(SubellipticOperator::Heat),
            other => Err(Error::usage(format!(
                "unknown operator '{other}'; expected sub_laplacian or heat"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SubellipticOperator::SubLaplacian => "sub_laplacian",
            SubellipticOperator::Heat => "heat",
        }
    }

    /// Symbol of the operator itself.
    pub fn operator_symbol(self) -> std::sync::Arc<dyn Symbol<Su2>> {
        match self {
            SubellipticOperator::SubLaplacian => subelliptic::sub_laplacian(),
            SubellipticOperator::Heat => subelliptic::heat_operator(),
        }
    }

    /// Symbol of its parametrix (exact inverse off the constants).
    pub fn parametrix_symbol(self) -> std::sync::Arc<dyn Symbol<Su2>> {
        match self {
            SubellipticOperator::SubLaplacian => subelliptic::sub_laplacian_parametrix(),
            SubellipticOperator::Heat => subelliptic::heat_parametrix(),
        }
    }
}

/// Result record for one solve: the endpoint estimate ingredients and any
/// adjustments made to the source.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub operator: String,
    pub cutoff: f64,
    /// Magnitude of the mean removed from the source (the constants are the
    /// kernel of both operators, so the solvable part is mean-zero).
    pub mean_removed: f64,
    /// Weak-L1 quasinorm of the solution u.
    pub weak_l1_u: f64,
    /// Bessel-potential source norm: L1 norm of the order -1/4 smoothing of
    /// the (mean-corrected) source.
    pub source_bessel_l1: f64,
    /// weak_l1_u / source_bessel_l1; None encodes the 0/0 case of a zero
    /// source.
    pub ratio: Option<f64>,
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("solve {}\n", self.operator));
        out.push_str(&format!("  cutoff            = {}\n", self.cutoff));
        out.push_str(&format!("  mean_removed      = {}\n", self.mean_removed));
        out.push_str(&format!("  weak_l1_u         = {}\n", self.weak_l1_u));
        out.push_str(&format!(
            "  source_bessel_l1  = {}\n",
            self.source_bessel_l1
        ));
        match self.ratio {
            Some(r) => out.push_str(&format!("  ratio             = {r}\n")),
            None => out.push_str("  ratio             = n/a (zero source)\n"),
        }
        for note in &self.notes {
            out.push_str(&format!("  note: {note}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("operator,key,value\n");
        let mut row = |key: &str, value: String| {
            out.push_str(&format!("{},{},{}\n", self.operator, key, value));
        };
        row("cutoff", self.cutoff.to_string());
        row("mean_removed", self.mean_removed.to_string());
        row("weak_l1_u", self.weak_l1_u.to_string());
        row("source_bessel_l1", self.source_bessel_l1.to_string());
        row(
            "ratio",
            self.ratio.map(|r| r.to_string()).unwrap_or_default(),
        );
        out
    }
}

/// Solves `T u = f` on the truncated dual by applying the parametrix symbol.
/// The mean of `f` is removed first (and noted): constants are annihilated
/// by both operators, so only the mean-zero part is solvable.
pub fn solve_subelliptic(
    group: &Su2,
    operator: SubellipticOperator,
    f: &GridFunction<Quaternion>,
    duals: &[Irrep<Spin>],
) -> Result<(GridFunction<Quaternion>, SolveReport)> {
    if duals.is_empty() {
        return Err(Error::argument("empty dual truncation"));
    }
    let cutoff = duals.iter().map(|i| i.weight).fold(0.0, f64::max);

    let total_mass: f64 = f.grid.weights.iter().sum();
    let mean = f.integral() / total_mass;
    let f0 = GridFunction::new(
        std::sync::Arc::clone(&f.grid),
        f.values.iter().map(|v| v - mean).collect(),
    );
    let mut notes = Vec::new();
    if mean.norm() > 1e-13 {
        notes.push(format!(
            "removed source mean of magnitude {:.6e} (constants are in the operator kernel)",
            mean.norm()
        ));
    }

    let u = quantize_apply(group, operator.parametrix_symbol().as_ref(), &f0, duals);
    let weak_l1_u = weak_l1_quasinorm(&u);

    let bessel = DiagonalMultiplier::<Su2>::bessel(-0.25);
    let smoothed = quantize_apply(group, &bessel, &f0, duals);
    let source_bessel_l1 = lp_norm(&smoothed, 1.0);

    let ratio = if weak_l1_u <= 1e-14 && source_bessel_l1 <= 1e-14 {
        notes.push("zero source: estimate ratio is 0/0".to_string());
        None
    } else {
        Some(weak_l1_u / source_bessel_l1)
    };

    let report = SolveReport {
        operator: operator.name().to_string(),
        cutoff,
        mean_removed: mean.norm(),
        weak_l1_u,
        source_bessel_l1,
        ratio,
        notes,
    };
    Ok((u, report))
}
