//! The inviscid spectral problem `(U - c)(d_y^2 - alpha^2) psi = U'' psi`
//! with `psi(0) = psi(y_max) = 0`.
//!
//! Unstable modes (`Im c > 0`) are located in two independent ways: a
//! generalized matrix spectrum on interior collocation nodes (the brute-force
//! oracle, filtered against discretization ghosts by two-resolution
//! matching), and a shooting dispersion relation integrated from the far
//! field, refined by secant iteration. Eigenfunctions come from inverse
//! iteration on the collocation pencil.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::grid::{Grid, GridFunction};
use crate::numeric::{golden_max, rk4_step};
use crate::profile::ShearProfile;
use crate::{Error, Result};

/// An eigen triple `(alpha, c, psi)` with `max |psi| = 1`, the phase fixed so
/// the largest sample is real positive, and the collocation residual.
#[derive(Debug, Clone)]
pub struct EigenMode {
    pub alpha: f64,
    pub c: Complex64,
    pub psi: GridFunction,
    pub residual: f64,
}

impl EigenMode {
    /// Growth rate `alpha Im c`.
    pub fn growth_rate(&self) -> f64 {
        self.alpha * self.c.im
    }
}

/// Solver knobs; the defaults match the production pipeline.
#[derive(Debug, Clone)]
pub struct RayleighOptions {
    pub n_points: usize,
    pub n_points_oracle_low: usize,
    pub map_scale: f64,
    pub shoot_steps: usize,
    pub residual_tol: f64,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        RayleighOptions {
            n_points: 192,
            n_points_oracle_low: 128,
            map_scale: 2.0,
            shoot_steps: 6000,
            residual_tol: 1e-8,
        }
    }
}

/// Apply the Rayleigh operator `(U - c) Delta_alpha psi - U'' psi`.
pub fn rayleigh_apply(
    p: &ShearProfile,
    alpha: f64,
    c: Complex64,
    psi: &GridFunction,
) -> Result<GridFunction> {
    if c.im == 0.0 {
        return Err(Error::Invalid(
            "Rayleigh operator needs Im c != 0 to avoid the critical layer".into(),
        ));
    }
    let grid = psi.grid();
    let u = p.values_on(grid, 0)?;
    let u2 = p.values_on(grid, 2)?;
    let lap = psi
        .derivative(2)?
        .axpy(Complex64::new(-alpha * alpha, 0.0), psi)?;
    let values = lap
        .values()
        .iter()
        .zip(psi.values())
        .zip(u.iter().zip(&u2))
        .map(|((l, s), (&uy, &u2y))| (Complex64::new(uy, 0.0) - c) * l - u2y * s)
        .collect();
    GridFunction::new(Arc::clone(grid), values)
}

/// Interior-node residual of a candidate mode, relative to `max |psi|`.
pub fn mode_residual(p: &ShearProfile, alpha: f64, c: Complex64, psi: &GridFunction) -> Result<f64> {
    let r = rayleigh_apply(p, alpha, c, psi)?;
    let n = r.len();
    let worst = r.values()[1..n - 1]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    Ok(worst / psi.max_abs().max(1e-300))
}

/// Generalized pencil `(A - c B) psi = 0` on interior nodes:
/// `A = U (D2 - a^2) - U''`, `B = D2 - a^2`.
fn interior_pencil(p: &ShearProfile, grid: &Arc<Grid>, alpha: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = grid.n_points();
    let d2 = grid.diff_matrix(2)?;
    let u = p.values_on(grid, 0)?;
    let u2 = p.values_on(grid, 2)?;
    let m = n - 2;
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut b = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let lap = d2[(i + 1, j + 1)] + if i == j { -alpha * alpha } else { 0.0 };
            b[(i, j)] = lap;
            a[(i, j)] = u[i + 1] * lap - if i == j { u2[i + 1] } else { 0.0 };
        }
    }
    Ok((a, b))
}

/// All unstable phase speeds of the discretized pencil at one resolution.
fn raw_spectrum(p: &ShearProfile, grid: &Arc<Grid>, alpha: f64, im_floor: f64) -> Result<Vec<Complex64>> {
    let (a, b) = interior_pencil(p, grid, alpha)?;
    let lu = b.lu();
    let m = lu
        .solve(&a)
        .ok_or_else(|| Error::SolveFailed("singular Helmholtz block in Rayleigh pencil".into()))?;
    let eig = m.complex_eigenvalues();
    Ok(eig.iter().filter(|c| c.im > im_floor).cloned().collect())
}

/// Brute-force oracle: unstable eigenvalues of the collocation pencil,
/// cross-validated at two resolutions to discard critical-layer ghosts.
pub fn rayleigh_spectrum_oracle(
    p: &ShearProfile,
    alpha: f64,
    opts: &RayleighOptions,
) -> Result<Vec<Complex64>> {
    let g_hi = Grid::new(opts.n_points, opts.map_scale)?;
    let g_lo = Grid::new(opts.n_points_oracle_low, opts.map_scale)?;
    let hi = raw_spectrum(p, &g_hi, alpha, 1e-6)?;
    let lo = raw_spectrum(p, &g_lo, alpha, 1e-6)?;
    let mut kept: Vec<Complex64> = hi
        .into_iter()
        .filter(|c| lo.iter().any(|d| (c - d).norm() < 1e-4))
        .collect();
    kept.sort_by(|a, b| b.im.partial_cmp(&a.im).unwrap());
    kept.dedup_by(|a, b| (*a - *b).norm() < 1e-6);
    Ok(kept)
}

/// Shooting dispersion function `D(c) = psi(0; c)`: the Rayleigh ODE is
/// integrated from the far field with decaying data `e^{-|alpha| y}`.
pub fn dispersion_shoot(
    p: &ShearProfile,
    alpha: f64,
    c: Complex64,
    y_top: f64,
    n_steps: usize,
) -> Result<Complex64> {
    let aa = alpha.abs();
    let h = -y_top / n_steps as f64;
    let mut state = [Complex64::ONE, Complex64::new(-aa, 0.0)];
    let mut rhs = |y: f64, s: &[Complex64], out: &mut [Complex64]| {
        let u = p.eval(y.max(0.0), 0).unwrap_or(0.0);
        let u2 = p.eval(y.max(0.0), 2).unwrap_or(0.0);
        let k = Complex64::new(aa * aa, 0.0) + u2 / (Complex64::new(u, 0.0) - c);
        out[0] = s[1];
        out[1] = k * s[0];
    };
    let mut y = y_top;
    for _ in 0..n_steps {
        rk4_step(&mut rhs, y, h, &mut state);
        y += h;
    }
    Ok(state[0])
}

fn secant_on_dispersion(
    p: &ShearProfile,
    alpha: f64,
    c_guess: Complex64,
    y_top: f64,
    n_steps: usize,
) -> Result<Complex64> {
    let mut c0 = c_guess;
    let mut c1 = c_guess * Complex64::new(1.0 + 1e-4, 0.0) + Complex64::new(0.0, 1e-4);
    let mut d0 = dispersion_shoot(p, alpha, c0, y_top, n_steps)?;
    let mut d1 = dispersion_shoot(p, alpha, c1, y_top, n_steps)?;
    for _ in 0..60 {
        let denom = d1 - d0;
        if denom.norm() == 0.0 {
            break;
        }
        let c2 = c1 - d1 * (c1 - c0) / denom;
        if !c2.re.is_finite() || !c2.im.is_finite() || c2.norm() > 1e3 {
            return Err(Error::NoUnstableMode(format!(
                "secant diverged from c = {c_guess}"
            )));
        }
        c0 = c1;
        d0 = d1;
        c1 = c2;
        d1 = dispersion_shoot(p, alpha, c1, y_top, n_steps)?;
        if (c1 - c0).norm() < 1e-13 * (1.0 + c1.norm()) {
            break;
        }
    }
    Ok(c1)
}

/// Eigenfunction by inverse iteration on the collocation pencil at fixed `c`,
/// with Dirichlet rows at both ends.
fn inverse_iteration(
    p: &ShearProfile,
    grid: &Arc<Grid>,
    alpha: f64,
    c: Complex64,
) -> Result<GridFunction> {
    let n = grid.n_points();
    let d2 = grid.diff_matrix(2)?;
    let u = p.values_on(grid, 0)?;
    let u2 = p.values_on(grid, 2)?;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n - 1 {
        let uc = Complex64::new(u[i], 0.0) - c;
        for j in 0..n {
            let lap = Complex64::new(d2[(i, j)], 0.0)
                + if i == j {
                    Complex64::new(-alpha * alpha, 0.0)
                } else {
                    Complex64::ZERO
                };
            m[(i, j)] = uc * lap;
        }
        m[(i, i)] -= u2[i];
    }
    m[(0, 0)] = Complex64::ONE;
    m[(n - 1, n - 1)] = Complex64::ONE;
    let lu = m.lu();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DVector::<Complex64>::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    x[0] = Complex64::ZERO;
    x[n - 1] = Complex64::ZERO;
    for _ in 0..3 {
        let mut y = lu
            .solve(&x)
            .ok_or(Error::NearSingular(f64::INFINITY))?;
        let scale = y.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::SolveFailed("inverse iteration collapsed".into()));
        }
        y /= Complex64::new(scale, 0.0);
        x = y;
        x[0] = Complex64::ZERO;
        x[n - 1] = Complex64::ZERO;
    }
    let f = GridFunction::new(Arc::clone(grid), x.iter().cloned().collect())?;
    Ok(normalize_mode(&f))
}

/// Scale so `max |psi| = 1` with the max-modulus sample real positive.
pub fn normalize_mode(psi: &GridFunction) -> GridFunction {
    let mut best = (0usize, 0.0f64);
    for (j, v) in psi.values().iter().enumerate() {
        if v.norm() > best.1 {
            best = (j, v.norm());
        }
    }
    if best.1 == 0.0 {
        return psi.clone();
    }
    let phase = psi.values()[best.0] / best.1;
    psi.scale(phase.conj() / best.1)
}

/// Refine an unstable Rayleigh mode from a guessed phase speed.
pub fn rayleigh_eigen(
    p: &ShearProfile,
    alpha: f64,
    c_guess: Complex64,
    opts: &RayleighOptions,
) -> Result<EigenMode> {
    if c_guess.im <= 0.0 {
        return Err(Error::Invalid("c guess must have Im c > 0".into()));
    }
    let grid = Grid::new(opts.n_points, opts.map_scale)?;
    let c = secant_on_dispersion(p, alpha, c_guess, grid.y_max(), opts.shoot_steps)?;
    if c.im <= 1e-10 {
        return Err(Error::NoUnstableMode(format!(
            "iteration left the upper half plane (Im c = {:.3e})",
            c.im
        )));
    }
    let psi = inverse_iteration(p, &grid, alpha, c)?;
    let residual = mode_residual(p, alpha, c, &psi)?;
    if residual > opts.residual_tol {
        return Err(Error::NoUnstableMode(format!(
            "refined mode residual {residual:.3e} above tolerance"
        )));
    }
    Ok(EigenMode {
        alpha,
        c,
        psi,
        residual,
    })
}

/// One row of the wavenumber sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub c_re: Option<f64>,
    pub c_im: Option<f64>,
    pub growth: Option<f64>,
}

/// Oracle sweep over the wavenumber range.
pub fn sweep(
    p: &ShearProfile,
    alpha_range: (f64, f64),
    n_samples: usize,
    opts: &RayleighOptions,
) -> Result<Vec<SweepRow>> {
    let (a_min, a_max) = alpha_range;
    if a_min <= 0.0 || a_max <= a_min || n_samples < 2 {
        return Err(Error::Invalid("bad sweep range".into()));
    }
    let mut rows = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let alpha = a_min + (a_max - a_min) * k as f64 / (n_samples - 1) as f64;
        let spec = rayleigh_spectrum_oracle(p, alpha, opts)?;
        let best = spec.iter().max_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        rows.push(match best {
            Some(c) => SweepRow {
                alpha,
                c_re: Some(c.re),
                c_im: Some(c.im),
                growth: Some(alpha * c.im),
            },
            None => SweepRow {
                alpha,
                c_re: None,
                c_im: None,
                growth: None,
            },
        });
    }
    Ok(rows)
}

/// The most unstable mode over a wavenumber range: oracle sweep, secant
/// refinement, then golden-section in `alpha` on the growth rate.
pub fn most_unstable(
    p: &ShearProfile,
    alpha_range: (f64, f64),
    n_samples: usize,
    opts: &RayleighOptions,
) -> Result<EigenMode> {
    let rows = sweep(p, alpha_range, n_samples, opts)?;
    let mut best: Option<(f64, Complex64)> = None;
    for row in &rows {
        if let (Some(re), Some(im), Some(g)) = (row.c_re, row.c_im, row.growth) {
            if best.map(|(bg, _)| g > bg * 0.0 + bg).unwrap_or(true) || best.is_none() {
                let bg = best.map(|(a, c)| a * c.im).unwrap_or(f64::NEG_INFINITY);
                if g > bg {
                    best = Some((row.alpha, Complex64::new(re, im)));
                }
            }
        }
    }
    let (alpha_seed, c_seed) = best.ok_or_else(|| {
        Error::NoUnstableMode("oracle sweep found no unstable eigenvalue in range".into())
    })?;

    // Growth rate as a function of alpha, via secant refinement seeded by
    // continuation from the best oracle point.
    let grid = Grid::new(opts.n_points, opts.map_scale)?;
    let y_top = grid.y_max();
    let growth_of = |alpha: f64| -> f64 {
        secant_on_dispersion(p, alpha, c_seed, y_top, opts.shoot_steps)
            .map(|c| alpha * c.im)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let step = (alpha_range.1 - alpha_range.0) / (n_samples - 1) as f64;
    let lo = (alpha_seed - step).max(alpha_range.0);
    let hi = (alpha_seed + step).min(alpha_range.1);
    let (alpha_star, _) = golden_max(growth_of, lo, hi, 40);
    rayleigh_eigen(p, alpha_star, c_seed, opts)
}
