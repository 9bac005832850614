//! Finite-difference spectra of the complex anharmonic operator
//! `−d²/dx² + ¼[(j²−1)/r² + r² − g²r⁴]`, `r = x − iη`, and of its Hermitian
//! double-well partner `−d²/dx² + (gx−1)²x² + j(1/2 − gx)`.
//!
//! Both operators are discretized with the three-point stencil and
//! Dirichlet walls, which gives a (complex) symmetric tridiagonal matrix.
//! The double well has its second minimum at `x = 1/g`, so its box is
//! centred at `1/(2g)` to keep both wells inside.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{ComplexMatrix, Tolerance, C64};

pub const MIN_GRID_POINTS: usize = 50;
/// Couplings above this are outside the supported regime.
pub const MAX_SUPPORTED_COUPLING: f64 = 0.2;
/// Relative mass allowed on the outer part of the box.
pub const EDGE_MASS_LIMIT: f64 = 1e-6;
/// Points with `|x − c| > EDGE_FRACTION·L` count as the box edge.
pub const EDGE_FRACTION: f64 = 0.95;

const QL_MAX_ITER: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    n_points: usize,
    center: f64,
}

impl GridSpec {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(
                "grid half width must be positive".into(),
            ));
        }
        if n_points < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
            center: 0.0,
        })
    }

    pub fn centered_at(self, center: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidParameter("grid center must be finite".into()));
        }
        Ok(Self { center, ..self })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points + 1) as f64
    }

    /// Interior points `c − L + i·h`, `i = 1..=n`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        let left = self.center - self.half_width;
        (1..=self.n_points).map(|i| left + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BGParams {
    pub g: f64,
    pub j: f64,
    pub eta: f64,
}

impl BGParams {
    pub fn new(g: f64, j: f64, eta: f64) -> Result<Self> {
        if !(g.is_finite() && j.is_finite() && eta.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        Ok(Self { g, j, eta })
    }

    pub fn is_supported(&self) -> bool {
        self.g.abs() <= MAX_SUPPORTED_COUPLING
    }

    /// Centre of the box used for the double-well partner.
    pub fn double_well_center(&self) -> f64 {
        if self.g == 0.0 {
            0.0
        } else {
            0.5 / self.g
        }
    }

    pub fn complex_potential(&self, x: f64) -> C64 {
        let r = C64::new(x, -self.eta);
        let r2 = r * r;
        ((self.j * self.j - 1.0) / r2 + r2 - r2 * r2 * (self.g * self.g)) * 0.25
    }

    pub fn double_well_potential(&self, x: f64) -> f64 {
        let a = self.g * x - 1.0;
        a * a * x * x + self.j * (0.5 - self.g * x)
    }
}

/// Symmetric tridiagonal matrix: `diag` and the shared off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl Tridiagonal<C64> {
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        let n = self.diag.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        ComplexMatrix::new(m)
    }
}

impl Tridiagonal<f64> {
    pub fn to_complex(&self) -> Tridiagonal<C64> {
        Tridiagonal {
            diag: self.diag.iter().map(|&x| C64::new(x, 0.0)).collect(),
            off: self.off.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }
}

fn kinetic_parts(grid: &GridSpec) -> (f64, f64) {
    let h = grid.spacing();
    (2.0 / (h * h), -1.0 / (h * h))
}

pub fn bg_tridiagonal(
    params: &BGParams,
    grid: &GridSpec,
    tol: &Tolerance,
) -> Result<Tridiagonal<C64>> {
    if params.eta <= tol.zero_abs {
        return Err(Error::SingularPotential(format!(
            "shift eta = {} leaves the 1/r² term singular on the real line",
            params.eta
        )));
    }
    let (d, o) = kinetic_parts(grid);
    Ok(Tridiagonal {
        diag: grid
            .points()
            .iter()
            .map(|&x| params.complex_potential(x) + d)
            .collect(),
        off: vec![C64::new(o, 0.0); grid.n_points - 1],
    })
}

pub fn q_tridiagonal(params: &BGParams, grid: &GridSpec) -> Tridiagonal<f64> {
    let (d, o) = kinetic_parts(grid);
    Tridiagonal {
        diag: grid
            .points()
            .iter()
            .map(|&x| params.double_well_potential(x) + d)
            .collect(),
        off: vec![o; grid.n_points - 1],
    }
}

/// Dense complex symmetric matrix of the shifted complex operator.
pub fn discretize_bg(params: &BGParams, grid: &GridSpec, tol: &Tolerance) -> Result<ComplexMatrix> {
    bg_tridiagonal(params, grid, tol)?.to_dense()
}

/// Dense real symmetric matrix of the double well.
pub fn discretize_q(params: &BGParams, grid: &GridSpec) -> Result<ComplexMatrix> {
    q_tridiagonal(params, grid).to_complex().to_dense()
}

/// Number of eigenvalues of a real symmetric tridiagonal matrix below `x`.
fn sturm_count(t: &Tridiagonal<f64>, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..t.diag.len() {
        let b2 = if i == 0 {
            0.0
        } else {
            t.off[i - 1] * t.off[i - 1]
        };
        q = t.diag[i] - x - b2 / q;
        if q == 0.0 {
            q = f64::EPSILON * (t.diag[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `count` lowest eigenvalues of a real symmetric tridiagonal matrix, by
/// bisection on the Sturm count.
pub fn lowest_symmetric_eigenvalues(t: &Tridiagonal<f64>, count: usize) -> Vec<f64> {
    let n = t.diag.len();
    let count = count.min(n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { t.off[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { t.off[i].abs() } else { 0.0 };
        lo = lo.min(t.diag[i] - r);
        hi = hi.max(t.diag[i] + r);
    }
    (0..count)
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            while b - a > 4.0 * f64::EPSILON * (a.abs().max(b.abs()) + f64::MIN_POSITIVE) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if sturm_count(t, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// `√(a² + b²)` for complex `a, b`, scaled against overflow.
fn csqrt_sum_sq(a: C64, b: C64) -> C64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let (a, b) = (a / s, b / s);
    (a * a + b * b).sqrt() * s
}

/// All eigenvalues of a complex symmetric tridiagonal matrix by the
/// implicit QL iteration with complex orthogonal rotations.
pub fn complex_symmetric_eigenvalues(t: &Tridiagonal<C64>) -> Result<Vec<C64>> {
    let n = t.diag.len();
    let mut d = t.diag.clone();
    let mut e = t.off.clone();
    e.push(C64::new(0.0, 0.0));
    let one = C64::new(1.0, 0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].norm() + d[m + 1].norm();
                if e[m].norm() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (e[l] * 2.0);
            let r = csqrt_sum_sq(g, one);
            let denom = if (g + r).norm() >= (g - r).norm() {
                g + r
            } else {
                g - r
            };
            g = d[m] - d[l] + e[l] / denom;
            let (mut s, mut c, mut p) = (one, one, C64::new(0.0, 0.0));
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                let r = csqrt_sum_sq(f, g);
                e[i + 1] = r;
                if r.norm() == 0.0 {
                    d[i + 1] -= p;
                    e[m] = C64::new(0.0, 0.0);
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let r = (d[i] - g) * s + c * b * 2.0;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = C64::new(0.0, 0.0);
        }
    }
    Ok(d)
}

/// Eigenvector of a complex symmetric tridiagonal matrix for a known
/// eigenvalue, by inverse iteration with a pivoted tridiagonal solve.
pub fn inverse_iteration(t: &Tridiagonal<C64>, lambda: C64) -> Vec<C64> {
    let n = t.diag.len();
    let scale = t
        .diag
        .iter()
        .chain(&t.off)
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(1.0);
    let mut x: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.0))
        .collect();
    for _ in 0..3 {
        x = solve_shifted(t, lambda, &x, scale);
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut x {
            *z /= norm;
        }
    }
    x
}

/// Solves `(T − λI)y = b` by Gaussian elimination with partial pivoting.
fn solve_shifted(t: &Tridiagonal<C64>, lambda: C64, b: &[C64], scale: f64) -> Vec<C64> {
    let n = t.diag.len();
    let zero = C64::new(0.0, 0.0);
    let tiny = f64::EPSILON * scale;
    // row i holds (a0, a1, a2) at columns i, i+1, i+2
    let mut u0: Vec<C64> = t.diag.iter().map(|d| d - lambda).collect();
    let mut u1: Vec<C64> = t.off.iter().copied().chain(std::iter::once(zero)).collect();
    let mut u2 = vec![zero; n];
    let mut rhs = b.to_vec();
    let mut sub: Vec<C64> = t.off.clone();
    for i in 0..n.saturating_sub(1) {
        if sub[i].norm() > u0[i].norm() {
            // swap rows i and i+1
            let (d1, o1) = (
                t.diag[i + 1] - lambda,
                if i + 1 < n - 1 { t.off[i + 1] } else { zero },
            );
            let (a0, a1) = (u0[i], u1[i]);
            u0[i] = sub[i];
            u1[i] = d1;
            u2[i] = o1;
            rhs.swap(i, i + 1);
            sub[i] = a0;
            u0[i + 1] = a1;
            u1[i + 1] = zero;
            let m = sub[i] / u0[i];
            u0[i + 1] -= m * u1[i];
            u1[i + 1] -= m * u2[i];
            let r = rhs[i];
            rhs[i + 1] -= m * r;
        } else {
            if u0[i].norm() < tiny {
                u0[i] = C64::new(tiny, 0.0);
            }
            let m = sub[i] / u0[i];
            u0[i + 1] -= m * u1[i];
            let r = rhs[i];
            rhs[i + 1] -= m * r;
        }
    }
    if u0[n - 1].norm() < tiny {
        u0[n - 1] = C64::new(tiny, 0.0);
    }
    let mut y = vec![zero; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= u1[i] * y[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * y[i + 2];
        }
        y[i] = acc / u0[i];
    }
    y
}

/// Fraction of `Σ|ψ_i|²` carried by points near the walls.
pub fn edge_mass(grid: &GridSpec, vector: &[C64]) -> f64 {
    let limit = EDGE_FRACTION * grid.half_width;
    let mut edge = 0.0;
    let mut total = 0.0;
    for (x, z) in grid.points().iter().zip(vector) {
        let w = z.norm_sqr();
        total += w;
        if (x - grid.center).abs() > limit {
            edge += w;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        edge / total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub params: BGParams,
    pub grid: GridSpec,
    /// Box used for the double well.
    pub double_well_grid: GridSpec,
    pub supported: bool,
    /// Lowest retained eigenvalues of the complex operator, by real part.
    pub bg_levels: Vec<C64>,
    pub q_levels: Vec<f64>,
    /// `|Im λ| / |Re λ|` per level.
    pub imaginary_ratios: Vec<f64>,
    /// `|λ_bg − λ_q| / |λ_q|` per level.
    pub relative_gaps: Vec<f64>,
    /// Eigenvalues skipped as box artifacts below the last retained level.
    pub discarded_artifacts: usize,
    pub max_imaginary_ratio: f64,
    pub max_relative_gap: f64,
}

/// Lowest eigenvalues of the complex operator whose eigenvectors stay away
/// from the walls, with the number of rejected candidates.
pub fn bg_levels(
    params: &BGParams,
    grid: &GridSpec,
    n_levels: usize,
    tol: &Tolerance,
) -> Result<(Vec<C64>, usize)> {
    let t = bg_tridiagonal(params, grid, tol)?;
    let mut ev = complex_symmetric_eigenvalues(&t)?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut kept = Vec::with_capacity(n_levels);
    let mut discarded = 0;
    for lambda in ev {
        if kept.len() == n_levels {
            break;
        }
        let v = inverse_iteration(&t, lambda);
        if edge_mass(grid, &v) < EDGE_MASS_LIMIT {
            kept.push(lambda);
        } else {
            discarded += 1;
        }
    }
    if kept.len() < n_levels {
        return Err(Error::NoConvergence);
    }
    Ok((kept, discarded))
}

pub fn q_levels(params: &BGParams, grid: &GridSpec, n_levels: usize) -> Vec<f64> {
    lowest_symmetric_eigenvalues(&q_tridiagonal(params, grid), n_levels)
}

/// Low spectra of both operators on boxes of the same size and resolution.
pub fn compare_spectra(
    params: &BGParams,
    grid: &GridSpec,
    n_levels: usize,
    tol: &Tolerance,
) -> Result<SpectralReport> {
    if n_levels == 0 {
        return Err(Error::InvalidParameter(
            "at least one level is required".into(),
        ));
    }
    if n_levels * 10 > grid.n_points {
        return Err(Error::LimitExceeded {
            what: "levels (at most a tenth of the grid points)",
            value: n_levels,
            limit: grid.n_points / 10,
        });
    }
    let q_grid = grid.centered_at(params.double_well_center())?;
    let (bg, discarded_artifacts) = bg_levels(params, grid, n_levels, tol)?;
    let q = q_levels(params, &q_grid, n_levels);
    let imaginary_ratios: Vec<f64> = bg.iter().map(|l| l.im.abs() / l.re.abs()).collect();
    let relative_gaps: Vec<f64> = bg
        .iter()
        .zip(&q)
        .map(|(b, q)| (b - q).norm() / q.abs())
        .collect();
    Ok(SpectralReport {
        params: *params,
        grid: *grid,
        double_well_grid: q_grid,
        supported: params.is_supported(),
        max_imaginary_ratio: imaginary_ratios.iter().copied().fold(0.0, f64::max),
        max_relative_gap: relative_gaps.iter().copied().fold(0.0, f64::max),
        bg_levels: bg,
        q_levels: q,
        imaginary_ratios,
        relative_gaps,
        discarded_artifacts,
    })
}
