//! Analytic shear profiles `U(y)` with `U(0) = 0`.
//!
//! Two closed-form families are provided: the wall jet `a y e^{-b y}`
//! (Rayleigh-unstable: `U''` changes sign in the interior) and the monotone
//! exponential `U_inf (1 - e^{-y/s})` (no interior inflection, the stable
//! control case). Heat evolution produces tabulated profiles on a grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, GridFunction};
use crate::numeric::{golden_max, integrate_gl};
use crate::{Error, Result};

/// Base flow `U(y)`, vanishing at the wall and converging exponentially to a
/// constant at infinity.
#[derive(Debug, Clone)]
pub enum ShearProfile {
    /// `U(y) = a y e^{-b y}`.
    WallJet { amplitude: f64, decay: f64 },
    /// `U(y) = u_inf (1 - e^{-y/scale})`.
    ExpMonotone { u_infinity: f64, scale: f64 },
    /// Grid samples of `U` and its first four derivatives.
    Tabulated(TabulatedProfile),
}

#[derive(Debug, Clone)]
pub struct TabulatedProfile {
    grid: Arc<Grid>,
    derivs: Vec<GridFunction>,
    u_infinity: f64,
}

/// Sup-norm coefficients `b_n = sup |d^n U| + sup |d^n U''|` of an analytic
/// profile, used to witness convergence of the profile's derivative series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticityCoeffs {
    pub b: Vec<f64>,
}

impl AnalyticityCoeffs {
    /// Largest `z` (capped at `cap`) for which the terms `b_n z^n / n!` are
    /// numerically summable, from the tail ratio test.
    pub fn fitted_radius(&self, cap: f64) -> f64 {
        let mut rad = cap;
        for n in 1..self.b.len() {
            if self.b[n] > 0.0 && self.b[n - 1] > 0.0 {
                let r = n as f64 * self.b[n - 1] / self.b[n];
                rad = rad.min(r);
            }
        }
        rad
    }

    /// Partial sum of `b_n z^n / n!`.
    pub fn series_at(&self, z: f64) -> f64 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for (n, &b) in self.b.iter().enumerate() {
            if n > 0 {
                term *= z / n as f64;
            }
            acc += b * term;
        }
        acc
    }
}

impl ShearProfile {
    pub fn wall_jet(amplitude: f64, decay: f64) -> Self {
        ShearProfile::WallJet { amplitude, decay }
    }

    pub fn exp_monotone(u_infinity: f64, scale: f64) -> Self {
        ShearProfile::ExpMonotone { u_infinity, scale }
    }

    pub fn u_infinity(&self) -> f64 {
        match self {
            ShearProfile::WallJet { .. } => 0.0,
            ShearProfile::ExpMonotone { u_infinity, .. } => *u_infinity,
            ShearProfile::Tabulated(t) => t.u_infinity,
        }
    }

    /// `d^k U / dy^k` at `y >= 0`, for `k <= 4`.
    pub fn eval(&self, y: f64, k: usize) -> Result<f64> {
        if k > 4 {
            return Err(Error::UnsupportedOrder(k));
        }
        self.eval_any(y, k)
    }

    /// Derivatives of arbitrary order; closed-form kinds only beyond 4.
    pub(crate) fn eval_any(&self, y: f64, k: usize) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::NegativeCoordinate(y));
        }
        match self {
            ShearProfile::WallJet { amplitude, decay } => {
                let (a, b) = (*amplitude, *decay);
                if k == 0 {
                    Ok(a * y * (-b * y).exp())
                } else {
                    // d^k (y e^{-by}) = (-b)^{k-1} e^{-by} (k - b y)
                    Ok(a * (-b).powi(k as i32 - 1) * (-b * y).exp() * (k as f64 - b * y))
                }
            }
            ShearProfile::ExpMonotone { u_infinity, scale } => {
                let s = *scale;
                if k == 0 {
                    Ok(u_infinity * (1.0 - (-y / s).exp()))
                } else {
                    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                    Ok(u_infinity * sign * s.powi(-(k as i32)) * (-y / s).exp())
                }
            }
            ShearProfile::Tabulated(t) => {
                if k > 4 {
                    return Err(Error::UnsupportedOrder(k));
                }
                if y >= t.grid.y_max() {
                    return Ok(if k == 0 { t.u_infinity } else { 0.0 });
                }
                Ok(t.derivs[k].eval(y).re)
            }
        }
    }

    /// Real samples of `d^k U` at the grid nodes.
    pub fn values_on(&self, grid: &Arc<Grid>, k: usize) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&y| self.eval(y, k)).collect()
    }

    /// Number of interior sign changes of `U''` over the grid nodes.
    pub fn inflection_count(&self, grid: &Grid) -> Result<usize> {
        let mut count = 0;
        let mut last: Option<f64> = None;
        for &y in grid.nodes().iter().skip(1) {
            let u2 = self.eval(y, 2)?;
            if u2.abs() < 1e-14 {
                continue;
            }
            if let Some(prev) = last {
                if prev * u2 < 0.0 {
                    count += 1;
                }
            }
            last = Some(u2);
        }
        Ok(count)
    }

    /// Fit the far-field convergence rate: largest `beta` with
    /// `|U - u_inf| <= C e^{-beta y}` on the sampled window.
    pub fn tail_decay_rate(&self, grid: &Grid) -> Result<f64> {
        let u_inf = self.u_infinity();
        let mut pts = Vec::new();
        for &y in grid.nodes() {
            if y < 1.0 || y > 0.6 * grid.y_max() {
                continue;
            }
            let d = (self.eval(y, 0)? - u_inf).abs();
            if d > 1e-280 {
                pts.push((y, d.ln()));
            }
        }
        if pts.len() < 4 {
            return Err(Error::FitFailed("too few tail samples".into()));
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let (slope, _) = crate::numeric::linear_fit(&xs, &ys);
        Ok(-slope)
    }

    /// Amplitude-preserving rescale `U(y) -> s U(y / s)` that sends a mode of
    /// wavenumber `alpha0 = s` to wavenumber 1 with the growth rate intact.
    pub fn rescaled(&self, s: f64) -> Result<ShearProfile> {
        match self {
            ShearProfile::WallJet { amplitude, decay } => Ok(ShearProfile::WallJet {
                amplitude: *amplitude,
                decay: decay / s,
            }),
            ShearProfile::ExpMonotone { u_infinity, scale } => Ok(ShearProfile::ExpMonotone {
                u_infinity: s * u_infinity,
                scale: s * scale,
            }),
            ShearProfile::Tabulated(_) => Err(Error::UnsupportedOrder(0)),
        }
    }

    /// Coefficients `b_n = sup_y |d^n U| + sup_y |d^n U''|` for `n <= n_max`,
    /// with the sup taken over the grid and refined between nodes.
    pub fn analyticity_coeffs(&self, grid: &Grid, n_max: usize) -> Result<AnalyticityCoeffs> {
        if matches!(self, ShearProfile::Tabulated(_)) && n_max + 2 > 4 {
            return Err(Error::UnsupportedOrder(n_max + 2));
        }
        let mut b = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let sup_n = self.sup_abs_deriv(grid, n)?;
            let sup_n2 = self.sup_abs_deriv(grid, n + 2)?;
            b.push(sup_n + sup_n2);
        }
        Ok(AnalyticityCoeffs { b })
    }

    fn sup_abs_deriv(&self, grid: &Grid, k: usize) -> Result<f64> {
        let nodes = grid.nodes();
        let mut best = 0.0f64;
        let mut best_j = 0;
        for (j, &y) in nodes.iter().enumerate() {
            let v = self.eval_any(y, k)?.abs();
            if v > best {
                best = v;
                best_j = j;
            }
        }
        let lo = if best_j == 0 { 0.0 } else { nodes[best_j - 1] };
        let hi = nodes[(best_j + 1).min(nodes.len() - 1)];
        let (_, refined) = golden_max(
            |y| self.eval_any(y, k).map(|v| v.abs()).unwrap_or(0.0),
            lo,
            hi,
            48,
        );
        Ok(best.max(refined))
    }

    /// Evolve `U` by the heat equation on the half-line for time `s`, with
    /// `U(s, 0) = 0` kept exact through odd extension; returns grid samples.
    ///
    /// The heat-kernel convolution is evaluated by Gauss-Legendre panels,
    /// split at the extension point where the integrand loses analyticity.
    pub fn heat_evolve(&self, grid: &Arc<Grid>, s: f64) -> Result<ShearProfile> {
        if s < 0.0 {
            return Err(Error::NegativeCoordinate(s));
        }
        let u_inf = self.u_infinity();
        let values: Vec<f64> = if s == 0.0 {
            grid.nodes()
                .iter()
                .map(|&y| self.eval(y, 0))
                .collect::<Result<_>>()?
        } else {
            let w = 2.0 * s.sqrt();
            let y_top = grid.y_max();
            let u_ext = |z: f64| -> f64 {
                let (sig, az) = if z >= 0.0 { (1.0, z) } else { (-1.0, -z) };
                if az >= y_top {
                    sig * u_inf
                } else {
                    sig * self.eval(az, 0).unwrap_or(u_inf)
                }
            };
            let bound = 13.0;
            let mut vals: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&y| {
                    let split = (-y / w).max(-bound);
                    let g = |u: f64| (-u * u).exp() * u_ext(y + w * u);
                    let left = integrate_gl(g, -bound, split, 1.0, 16);
                    let right = integrate_gl(g, split, bound, 1.0, 16);
                    (left + right) / std::f64::consts::PI.sqrt()
                })
                .collect();
            vals[0] = 0.0; // odd extension keeps the wall value exact
            vals
        };
        let u0 = grid.function_from_real(|_| 0.0);
        let mut derivs = vec![u0; 5];
        derivs[0] = GridFunction::new(
            Arc::clone(grid),
            values.iter().map(|&v| num_complex::Complex64::new(v, 0.0)).collect(),
        )?;
        for k in 1..=4 {
            derivs[k] = derivs[0].derivative(k)?;
        }
        Ok(ShearProfile::Tabulated(TabulatedProfile {
            grid: Arc::clone(grid),
            derivs,
            u_infinity: u_inf,
        }))
    }
}
