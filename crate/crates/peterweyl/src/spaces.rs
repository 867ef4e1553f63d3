//! Function-space diagnostics on quadrature grids: Lebesgue and weak-L1
//! norms, the Hardy–Littlewood maximal function over sampled balls, a BMO
//! seminorm, normalized atoms, and a Calderón–Zygmund decomposition built on
//! the grid's nested cell tree.
//!
//! Everything here is measure-theoretic with respect to the grid's Haar
//! weights; no Fourier structure is used. Balls are geodesic:
//! `B(c, r) = { x : d(c, x) < r }`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::fourier::GridFunction;
use crate::group::{Ball, CompactGroup, Grid};

/// `L^p` norm `(sum_i w_i |f_i|^p)^(1/p)`; `p = f64::INFINITY` gives the grid
/// sup norm. Requires `p >= 1`.
pub fn lp_norm<P>(f: &GridFunction<P>, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm requires p >= 1, got {p}");
    if p.is_infinite() {
        return f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    }
    let sum: f64 = f
        .values
        .iter()
        .zip(&f.grid.weights)
        .map(|(v, w)| w * v.norm().powf(p))
        .sum();
    sum.powf(1.0 / p)
}

/// Weak-L1 quasinorm `sup_a a * |{ |f| > a }|`, computed exactly.
///
/// The distribution function of a grid function is a right-continuous step
/// function, so the supremum is attained in the limit at one of the jumps:
/// sort the moduli, accumulate weight from above, and take the best
/// `value * (mass at or above value)` over distinct values.
pub fn weak_l1_quasinorm<P>(f: &GridFunction<P>) -> f64 {
    let mut pairs: Vec<(f64, f64)> = f
        .values
        .iter()
        .zip(&f.grid.weights)
        .map(|(v, w)| (v.norm(), *w))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0f64;
    let mut mass = 0.0f64;
    let mut i = 0;
    while i < pairs.len() {
        let value = pairs[i].0;
        // Fold in the whole tie class before evaluating at this jump.
        while i < pairs.len() && pairs[i].0 == value {
            mass += pairs[i].1;
            i += 1;
        }
        best = best.max(value * mass);
    }
    best
}

/// Indices and total quadrature mass of the grid nodes inside a geodesic
/// ball.
pub fn ball_members<G: CompactGroup>(
    group: &G,
    grid: &Grid<G::Point>,
    ball: &Ball<G::Point>,
) -> (Vec<usize>, f64) {
    let mut idx = Vec::new();
    let mut mass = 0.0;
    for (i, x) in grid.nodes.iter().enumerate() {
        if ball.contains(group, x) {
            idx.push(i);
            mass += grid.weights[i];
        }
    }
    (idx, mass)
}

/// Hardy–Littlewood maximal function restricted to a sampled family of
/// balls: for each grid node, the largest average of `|f|` over a sampled
/// ball containing that node. Balls are centered at the given node indices
/// with each of the given radii; balls with no quadrature mass are skipped,
/// and nodes covered by no sampled ball get 0. The radii list must be
/// nonempty.
pub fn maximal_function<G: CompactGroup>(
    group: &G,
    f: &GridFunction<G::Point>,
    radii: &[f64],
    centers: &[usize],
) -> Result<GridFunction<G::Point>> {
    if radii.is_empty() {
        return Err(Error::argument(
            "maximal function needs at least one ball radius",
        ));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= f.grid.len()) {
        return Err(Error::argument(format!(
            "ball center index {c} out of range for a grid of {} nodes",
            f.grid.len()
        )));
    }
    let grid = &f.grid;
    let mut out = vec![0.0f64; grid.len()];
    for &c in centers {
        for &r in radii {
            let ball = Ball {
                center: grid.nodes[c].clone(),
                radius: r,
            };
            let (members, mass) = ball_members(group, grid, &ball);
            if mass <= 0.0 {
                continue;
            }
            let avg = members
                .iter()
                .map(|&i| grid.weights[i] * f.values[i].norm())
                .sum::<f64>()
                / mass;
            for &i in &members {
                if avg > out[i] {
                    out[i] = avg;
                }
            }
        }
    }
    Ok(GridFunction::new(
        Arc::clone(grid),
        out.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    ))
}

/// BMO seminorm lower bound over a sampled family of balls: the largest mean
/// oscillation `(1/|B|) * integral over B of |f - f_B|` with `f_B` the ball
/// average. Empty balls are skipped.
pub fn bmo_seminorm<G: CompactGroup>(
    group: &G,
    f: &GridFunction<G::Point>,
    radii: &[f64],
    centers: &[usize],
) -> f64 {
    let grid = &f.grid;
    let mut best = 0.0f64;
    for &c in centers {
        for &r in radii {
            let ball = Ball {
                center: grid.nodes[c].clone(),
                radius: r,
            };
            let (members, mass) = ball_members(group, grid, &ball);
            if mass <= 0.0 {
                continue;
            }
            let avg = members
                .iter()
                .map(|&i| f.values[i] * grid.weights[i])
                .sum::<Complex64>()
                / mass;
            let osc = members
                .iter()
                .map(|&i| grid.weights[i] * (f.values[i] - avg).norm())
                .sum::<f64>()
                / mass;
            best = best.max(osc);
        }
    }
    best
}

/// Shape of the random profile carried by an atom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AtomProfile {
    /// A radial bump on the ball.
    Smooth,
    /// A radial bump modulated by a random plane wave in the embedding
    /// coordinates; avoids the accidental near-symmetry of the pure bump.
    Oscillatory,
}

/// A mean-zero function supported on a geodesic ball, normalized so its sup
/// norm is exactly the reciprocal of the ball's quadrature mass (hence its
/// L1 norm is at most 1).
#[derive(Clone, Debug)]
pub struct Atom<P> {
    pub ball: Ball<P>,
    /// Quadrature mass of the ball.
    pub ball_mass: f64,
    pub values: GridFunction<P>,
}

/// Builds a normalized atom: a seeded random smooth profile on
/// `B(center, radius)`, mean-corrected over the ball, then rescaled so the
/// sup norm equals `1 / ball_mass` exactly.
///
/// Errors if the radius is nonpositive or exceeds the group diameter, if the
/// ball has no quadrature mass, or if the corrected profile is identically
/// zero (a one-node ball cannot carry a mean-zero profile).
pub fn make_atom<G: CompactGroup>(
    group: &G,
    grid: &Arc<Grid<G::Point>>,
    center: G::Point,
    radius: f64,
    profile: AtomProfile,
    seed: u64,
) -> Result<Atom<G::Point>> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::argument(format!(
            "atom radius must be positive, got {radius}"
        )));
    }
    if radius > group.diameter() {
        return Err(Error::argument(format!(
            "atom radius {radius} exceeds the group diameter {}",
            group.diameter()
        )));
    }
    let ball = Ball { center, radius };
    let (members, mass) = ball_members(group, grid.as_ref(), &ball);
    if mass <= 0.0 {
        return Err(Error::domain(format!(
            "degenerate ball: no quadrature mass inside radius {radius}"
        )));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dim = group.point_coords(&ball.center).len();
    let wave: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;

    let mut raw = vec![Complex64::new(0.0, 0.0); grid.len()];
    for &i in &members {
        let d = group.distance(&ball.center, &grid.nodes[i]);
        let s = (d / radius).min(1.0 - 1e-12);
        let bump = (-s * s / (1.0 - s * s)).exp();
        let v = match profile {
            AtomProfile::Smooth => bump,
            AtomProfile::Oscillatory => {
                let coords = group.point_coords(&grid.nodes[i]);
                let arg: f64 = coords.iter().zip(&wave).map(|(c, w)| c * w).sum::<f64>() + phase;
                bump * (1.0 + 0.5 * arg.sin())
            }
        };
        raw[i] = Complex64::new(v, 0.0);
    }

    let avg = members
        .iter()
        .map(|&i| raw[i] * grid.weights[i])
        .sum::<Complex64>()
        / mass;
    for &i in &members {
        raw[i] -= avg;
    }
    let sup = members.iter().map(|&i| raw[i].norm()).fold(0.0, f64::max);
    if sup < 1e-14 {
        return Err(Error::domain(
            "degenerate ball: the mean-corrected profile vanishes (ball too small)",
        ));
    }
    let scale = 1.0 / (mass * sup);
    for &i in &members {
        raw[i] *= scale;
    }
    Ok(Atom {
        ball,
        ball_mass: mass,
        values: GridFunction::new(Arc::clone(grid), raw),
    })
}

/// One bad part of a Calderón–Zygmund decomposition: a mean-zero function
/// supported on a tree cell, recorded sparsely together with the ball
/// circumscribing the cell.
#[derive(Clone, Debug)]
pub struct CzBadPart<P> {
    pub ball: Ball<P>,
    /// Quadrature mass of the circumscribing ball.
    pub ball_mass: f64,
    /// Sparse values `(node index, b(node))` on the cell; zero elsewhere.
    pub entries: Vec<(usize, Complex64)>,
    /// L1 norm of this part.
    pub l1: f64,
}

/// Ratios measured during a decomposition, normalized so each is the
/// constant appearing in the corresponding textbook estimate.
#[derive(Clone, Copy, Debug, Default)]
pub struct CzConstants {
    /// `sup |g| / level`.
    pub good_sup_ratio: f64,
    /// `norm1(g) / norm1(f)`.
    pub good_l1_ratio: f64,
    /// `max_j norm1(b_j) / (level * |I_j|)`.
    pub bad_l1_cell_ratio: f64,
    /// `(sum_j |I_j|) * level / norm1(f)`.
    pub ball_mass_sum_ratio: f64,
    /// `(sum_j norm1(b_j)) / norm1(f)`.
    pub bad_l1_sum_ratio: f64,
    /// Largest number of balls `I_j` covering any single node.
    pub max_overlap: usize,
}

/// Calderón–Zygmund decomposition `f = g + sum_j b_j` at a given level.
#[derive(Clone, Debug)]
pub struct CzDecomposition<P> {
    /// The good part: equals `f` off the selected cells, the cell average on
    /// each selected cell.
    pub good: GridFunction<P>,
    pub bad: Vec<CzBadPart<P>>,
    pub level: f64,
    pub constants: CzConstants,
}

/// An axis-aligned index box in the grid's mixed-radix lattice.
#[derive(Clone, Debug)]
struct Cell {
    lo: Vec<usize>,
    len: Vec<usize>,
}

impl Cell {
    fn root(lattice: &[usize]) -> Self {
        Cell {
            lo: vec![0; lattice.len()],
            len: lattice.to_vec(),
        }
    }

    fn node_count(&self) -> usize {
        self.len.iter().product()
    }

    /// Row-major node indices of the box.
    fn nodes(&self, strides: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut digits = vec![0usize; self.len.len()];
        'outer: loop {
            let idx: usize = digits
                .iter()
                .zip(&self.lo)
                .zip(strides)
                .map(|((d, lo), s)| (d + lo) * s)
                .sum();
            out.push(idx);
            for axis in (0..digits.len()).rev() {
                digits[axis] += 1;
                if digits[axis] < self.len[axis] {
                    continue 'outer;
                }
                digits[axis] = 0;
            }
            break;
        }
        out
    }

    /// Splits the longest axis in half (ties to the lowest axis index).
    fn split(&self) -> Option<(Cell, Cell)> {
        let axis = (0..self.len.len()).max_by_key(|&a| self.len[a])?;
        if self.len[axis] < 2 {
            return None;
        }
        let half = self.len[axis] / 2;
        let mut a = self.clone();
        let mut b = self.clone();
        a.len[axis] = half;
        b.lo[axis] += half;
        b.len[axis] -= half;
        Some((a, b))
    }

    /// Node index at the lattice midpoint of the box.
    fn midpoint(&self, strides: &[usize]) -> usize {
        self.lo
            .iter()
            .zip(&self.len)
            .zip(strides)
            .map(|((lo, len), s)| (lo + (len - 1) / 2) * s)
            .sum()
    }
}

fn row_major_strides(lattice: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; lattice.len()];
    for axis in (0..lattice.len().saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * lattice[axis + 1];
    }
    strides
}

/// Calderón–Zygmund decomposition of `f` at the given level, via a
/// stopping-time argument on the grid's nested cell tree.
///
/// Starting from the whole grid, cells are split in half along their longest
/// lattice axis. A cell whose average of `|f|` exceeds the level is selected
/// and not refined further; the construction guarantees its parent's average
/// was at most the level. Each selected cell `Q_j` contributes the mean-zero
/// bad part `b_j = (f - avg_Q f) * 1_Q` and the ball `I_j` circumscribing
/// the cell about its lattice-midpoint node. The good part is `f` off the
/// selected cells and the cell average on them.
///
/// Requires `level` to exceed the global average of `|f|` (so the root cell
/// is not itself selected).
pub fn cz_decompose<G: CompactGroup>(
    group: &G,
    f: &GridFunction<G::Point>,
    level: f64,
) -> Result<CzDecomposition<G::Point>> {
    let grid = &f.grid;
    let total_mass: f64 = grid.weights.iter().sum();
    let f_l1 = lp_norm(f, 1.0);
    let global_avg = f_l1 / total_mass;
    if level.is_nan() || level <= global_avg {
        return Err(Error::Argument(format!(
            "decomposition level {level} must exceed the global average {global_avg:.6e} of |f|"
        )));
    }

    let strides = row_major_strides(&grid.lattice);
    let cell_avg = |nodes: &[usize]| -> f64 {
        let mut mass = 0.0;
        let mut sum = 0.0;
        for &i in nodes {
            mass += grid.weights[i];
            sum += grid.weights[i] * f.values[i].norm();
        }
        if mass > 0.0 {
            sum / mass
        } else {
            0.0
        }
    };

    // Stopping time: children of an admissible cell are either selected
    // (average above the level) or refined further.
    let mut selected: Vec<Cell> = Vec::new();
    let mut stack: Vec<Cell> = vec![Cell::root(&grid.lattice)];
    while let Some(cell) = stack.pop() {
        match cell.split() {
            None => {} // singleton with average at most the level: good region
            Some((a, b)) => {
                for child in [a, b] {
                    let nodes = child.nodes(&strides);
                    if cell_avg(&nodes) > level {
                        selected.push(child);
                    } else {
                        stack.push(child);
                    }
                }
            }
        }
    }

    let mut good = f.values.clone();
    let mut bad = Vec::with_capacity(selected.len());
    let mut overlap = vec![0usize; grid.len()];
    let mut bad_l1_cell_ratio = 0.0f64;
    let mut ball_mass_sum = 0.0f64;
    let mut bad_l1_sum = 0.0f64;
    for cell in &selected {
        let nodes = cell.nodes(&strides);
        let mut mass = 0.0;
        let mut mean = Complex64::new(0.0, 0.0);
        for &i in &nodes {
            mass += grid.weights[i];
            mean += grid.weights[i] * f.values[i];
        }
        if mass <= 0.0 {
            continue;
        }
        mean /= mass;

        let center_idx = cell.midpoint(&strides);
        let center = grid.nodes[center_idx].clone();
        let max_dist = nodes
            .iter()
            .map(|&i| group.distance(&center, &grid.nodes[i]))
            .fold(0.0, f64::max);
        let ball = Ball {
            center,
            radius: max_dist * 1.0001 + 1e-12,
        };
        let (ball_nodes, ball_mass) = ball_members(group, grid.as_ref(), &ball);
        for &i in &ball_nodes {
            overlap[i] += 1;
        }

        let mut entries = Vec::with_capacity(nodes.len());
        let mut l1 = 0.0;
        for &i in &nodes {
            let b = f.values[i] - mean;
            good[i] = mean;
            l1 += grid.weights[i] * b.norm();
            entries.push((i, b));
        }
        bad_l1_cell_ratio = bad_l1_cell_ratio.max(l1 / (level * ball_mass));
        ball_mass_sum += ball_mass;
        bad_l1_sum += l1;
        bad.push(CzBadPart {
            ball,
            ball_mass,
            entries,
            l1,
        });
    }

    let good = GridFunction::new(Arc::clone(grid), good);
    let constants = CzConstants {
        good_sup_ratio: lp_norm(&good, f64::INFINITY) / level,
        good_l1_ratio: if f_l1 > 0.0 {
            lp_norm(&good, 1.0) / f_l1
        } else {
            0.0
        },
        bad_l1_cell_ratio,
        ball_mass_sum_ratio: if f_l1 > 0.0 {
            ball_mass_sum * level / f_l1
        } else {
            0.0
        },
        bad_l1_sum_ratio: if f_l1 > 0.0 { bad_l1_sum / f_l1 } else { 0.0 },
        max_overlap: overlap.into_iter().max().unwrap_or(0),
    };
    Ok(CzDecomposition {
        good,
        bad,
        level,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::su2::Su2;
    use crate::group::torus::Torus;

    fn su2_grid(res: usize) -> (Su2, Arc<Grid<<Su2 as CompactGroup>::Point>>) {
        let g = Su2::new();
        let grid = Arc::new(g.haar_grid(res).unwrap());
        (g, grid)
    }

    #[test]
    fn lp_norms_of_constants_and_characters() {
        let (g, grid) = su2_grid(6);
        let one = GridFunction::from_fn(&grid, |_| Complex64::new(1.0, 0.0));
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert!((lp_norm(&one, p) - 1.0).abs() < 1e-12, "p = {p}");
        }
        // Characters are L2-normalized by Schur orthogonality.
        for t in [1u32, 2, 3] {
            let chi = GridFunction::from_fn(&grid, |x| g.character(crate::group::su2::Spin(t), x));
            assert!(
                (lp_norm(&chi, 2.0) - 1.0).abs() < 1e-9,
                "character {t}: {}",
                lp_norm(&chi, 2.0)
            );
        }
        // Holder: |integral of f*g| <= norm_p(f) * norm_q(g).
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let f = GridFunction::from_fn(&grid, |_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let h = GridFunction::from_fn(&grid, |_| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let prod = f.mul_pointwise(&h);
        let integral = prod.integral().norm();
        for (p, q) in [(2.0, 2.0), (4.0, 4.0 / 3.0), (1.0, f64::INFINITY)] {
            assert!(
                integral <= lp_norm(&f, p) * lp_norm(&h, q) + 1e-12,
                "Holder failed at ({p}, {q})"
            );
        }
    }

    #[test]
    fn weak_l1_is_exact_on_step_functions() {
        let (g, grid) = su2_grid(8);
        let one = GridFunction::from_fn(&grid, |_| Complex64::new(1.0, 0.0));
        assert!((weak_l1_quasinorm(&one) - 1.0).abs() < 1e-12);

        // Two-valued function c * 1_B: the quasinorm equals the L1 norm.
        let e = g.identity();
        let ind = GridFunction::from_fn(&grid, |x| {
            if g.distance(&e, x) < 0.9 {
                Complex64::new(3.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let l1 = lp_norm(&ind, 1.0);
        assert!(l1 > 0.0);
        assert!((weak_l1_quasinorm(&ind) - l1).abs() < 1e-12 * l1);

        // Chebyshev bracket for positive functions of bounded dynamic range.
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let f = GridFunction::from_fn(&grid, |_| Complex64::new(0.2 + rng.random::<f64>(), 0.0));
        let quasi = weak_l1_quasinorm(&f);
        let l1 = lp_norm(&f, 1.0);
        let max = lp_norm(&f, f64::INFINITY);
        let min = f.values.iter().map(|v| v.norm()).fold(f64::MAX, f64::min);
        assert!(quasi <= l1 + 1e-12);
        assert!(quasi >= l1 / (1.0 + (max / min).ln()) - 1e-12);
    }

    #[test]
    fn maximal_function_of_constants_and_indicators() {
        // Constants are fixed points regardless of the sampled family.
        let t = Torus::<1>;
        let tgrid = Arc::new(t.haar_grid(16).unwrap());
        let c = GridFunction::from_fn(&tgrid, |_| Complex64::new(3.0, 0.0));
        let centers: Vec<usize> = (0..tgrid.len()).collect();
        let m = maximal_function(&t, &c, &[0.5, 1.0], &centers).unwrap();
        for v in &m.values {
            assert!((v.re - 3.0).abs() < 1e-12);
        }
        assert!(maximal_function(&t, &c, &[], &centers).is_err());
        assert!(maximal_function(&t, &c, &[0.5], &[tgrid.len()]).is_err());

        // Indicator of a ball: a sampled ball inside the support has average
        // exactly 1, and no average can exceed the sup.
        let (g, grid) = su2_grid(8);
        let e = g.identity();
        let ind = GridFunction::from_fn(&grid, |x| {
            if g.distance(&e, x) < 0.8 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let near = (0..grid.len())
            .min_by(|&a, &b| {
                g.distance(&e, &grid.nodes[a])
                    .total_cmp(&g.distance(&e, &grid.nodes[b]))
            })
            .unwrap();
        assert!(g.distance(&e, &grid.nodes[near]) < 0.3);
        let m = maximal_function(&g, &ind, &[0.35], &[near]).unwrap();
        assert!((m.values[near].re - 1.0).abs() < 1e-12);
        for v in &m.values {
            assert!(v.re <= 1.0 + 1e-12 && v.re >= 0.0);
        }
    }

    #[test]
    fn bmo_seminorm_brackets() {
        let (g, grid) = su2_grid(8);
        let centers: Vec<usize> = (0..grid.len()).step_by(7).collect();
        let radii = [0.3, 0.8, 1.6, 3.1];

        let c = GridFunction::from_fn(&grid, |_| Complex64::new(2.5, -1.0));
        assert!(bmo_seminorm(&g, &c, &radii, &centers) < 1e-13);

        // An indicator of a unit ball oscillates at unit scale.
        let e = g.identity();
        let ind = GridFunction::from_fn(&grid, |x| {
            if g.distance(&e, x) < 1.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let b = bmo_seminorm(&g, &ind, &radii, &centers);
        assert!((0.1..=1.0).contains(&b), "indicator oscillation {b}");

        // Mean oscillation never exceeds twice the sup norm.
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let f = GridFunction::from_fn(&grid, |_| {
            Complex64::new(rng.random::<f64>() * 2.0 - 1.0, 0.0)
        });
        let bound = 2.0 * lp_norm(&f, f64::INFINITY);
        assert!(bmo_seminorm(&g, &f, &radii, &centers) <= bound + 1e-12);
    }

    #[test]
    fn atoms_are_normalized_mean_zero_and_supported() {
        let (g, grid) = su2_grid(8);
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        for (k, profile) in [AtomProfile::Smooth, AtomProfile::Oscillatory]
            .into_iter()
            .enumerate()
        {
            let z = g.random_point(&mut rng);
            let atom = make_atom(&g, &grid, z, 1.0, profile, 40 + k as u64).unwrap();
            let sup = lp_norm(&atom.values, f64::INFINITY);
            assert!(
                (sup * atom.ball_mass - 1.0).abs() < 1e-12,
                "sup normalization: {sup} * {}",
                atom.ball_mass
            );
            let mean = atom.values.integral().norm();
            assert!(mean < 1e-10, "atom mean {mean}");
            assert!(lp_norm(&atom.values, 1.0) <= 1.0 + 1e-12);
            for (i, v) in atom.values.values.iter().enumerate() {
                if v.norm() > 0.0 {
                    assert!(atom.ball.contains(&g, &grid.nodes[i]));
                }
            }
        }
        // Degenerate and out-of-range radii.
        let e = g.identity();
        assert!(make_atom(&g, &grid, e, 1e-6, AtomProfile::Smooth, 1).is_err());
        assert!(make_atom(&g, &grid, e, 4.0, AtomProfile::Smooth, 1).is_err());
    }

    #[test]
    fn cz_with_a_high_level_keeps_everything_good() {
        let t = Torus::<1>;
        let grid = Arc::new(t.haar_grid(8).unwrap());
        let c = GridFunction::from_fn(&grid, |_| Complex64::new(0.6, 0.0));
        let dec = cz_decompose(&t, &c, 1.0).unwrap();
        assert!(dec.bad.is_empty());
        for (a, b) in dec.good.values.iter().zip(&c.values) {
            assert_eq!(a, b);
        }
        assert!((dec.constants.good_sup_ratio - 0.6).abs() < 1e-12);
        assert_eq!(dec.constants.max_overlap, 0);
        // Level at or below the average violates the precondition.
        assert!(cz_decompose(&t, &c, 0.5).is_err());
    }

    #[test]
    fn cz_of_a_tall_bump_satisfies_the_stopping_time_estimates() {
        let (g, grid) = su2_grid(8);
        let e = g.identity();
        let f = GridFunction::from_fn(&grid, |x| {
            let d = g.distance(&e, x);
            Complex64::new(50.0 * (-6.0 * d * d).exp(), 0.0)
        });
        let f_l1 = lp_norm(&f, 1.0);
        let avg = f_l1; // total mass 1
        let level = 6.0 * avg;
        let dec = cz_decompose(&g, &f, level).unwrap();
        assert!(!dec.bad.is_empty(), "bump above the level must be caught");

        // Pointwise reconstruction f = g + sum b_j, exactly.
        let mut recon = dec.good.values.clone();
        for part in &dec.bad {
            for &(i, v) in &part.entries {
                recon[i] += v;
            }
        }
        for (a, b) in recon.iter().zip(&f.values) {
            assert!((a - b).norm() < 1e-10, "reconstruction mismatch");
        }

        for part in &dec.bad {
            // Mean zero on the cell.
            let mean: Complex64 = part.entries.iter().map(|&(i, v)| v * grid.weights[i]).sum();
            assert!(mean.norm() < 1e-9, "bad part mean {}", mean.norm());
            // Supported inside its ball.
            for &(i, v) in &part.entries {
                if v.norm() > 0.0 {
                    assert!(part.ball.contains(&g, &grid.nodes[i]));
                }
            }
            assert!(part.ball_mass > 0.0);
        }

        // Stopping-time estimates with generous constants; the acceptance
        // checks freeze tighter corpus-measured values.
        let c = &dec.constants;
        assert!(
            c.good_sup_ratio <= 10.0,
            "good sup ratio {}",
            c.good_sup_ratio
        );
        assert!(
            c.good_l1_ratio <= 1.0 + 1e-12,
            "good L1 ratio {}",
            c.good_l1_ratio
        );
        assert!(
            c.bad_l1_cell_ratio <= 10.0,
            "cell ratio {}",
            c.bad_l1_cell_ratio
        );
        assert!(
            c.ball_mass_sum_ratio <= 50.0,
            "mass sum ratio {}",
            c.ball_mass_sum_ratio
        );
        assert!(
            c.bad_l1_sum_ratio <= 2.0 + 1e-12,
            "bad L1 sum {}",
            c.bad_l1_sum_ratio
        );
        assert!(c.max_overlap >= 1 && c.max_overlap <= 64);
    }
}
