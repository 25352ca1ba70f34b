//! Wavenumber-indexed fields `f(x, y) = sum_alpha f_alpha(y) e^{i alpha x}`
//! with finitely many nonzero modes.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::grid::{Grid, GridFunction};
use crate::{Error, Result};

/// Finite collection of Fourier modes on a common grid.
#[derive(Debug, Clone, Default)]
pub struct AlphaField {
    modes: BTreeMap<i32, GridFunction>,
}

impl AlphaField {
    pub fn new() -> Self {
        AlphaField {
            modes: BTreeMap::new(),
        }
    }

    pub fn single(alpha: i32, f: GridFunction) -> Self {
        let mut field = AlphaField::new();
        field.insert(alpha, f);
        field
    }

    pub fn insert(&mut self, alpha: i32, f: GridFunction) {
        self.modes.insert(alpha, f);
    }

    pub fn get(&self, alpha: i32) -> Option<&GridFunction> {
        self.modes.get(&alpha)
    }

    pub fn alphas(&self) -> impl Iterator<Item = i32> + '_ {
        self.modes.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &GridFunction)> {
        self.modes.iter().map(|(&a, f)| (a, f))
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn grid(&self) -> Option<&Arc<Grid>> {
        self.modes.values().next().map(|f| f.grid())
    }

    pub fn common_grid(&self) -> Result<&Arc<Grid>> {
        let grid = self.grid().ok_or(Error::GridMismatch)?;
        for f in self.modes.values() {
            if f.grid().n_points() != grid.n_points() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(grid)
    }

    /// Apply `d/dx`, i.e. multiply each mode by `i alpha`.
    pub fn d_dx(&self) -> AlphaField {
        let modes = self
            .modes
            .iter()
            .map(|(&a, f)| (a, f.scale(Complex64::new(0.0, a as f64))))
            .collect();
        AlphaField { modes }
    }

    /// Apply `d/dy` mode-wise.
    pub fn d_dy(&self) -> Result<AlphaField> {
        let mut modes = BTreeMap::new();
        for (&a, f) in &self.modes {
            modes.insert(a, f.derivative(1)?);
        }
        Ok(AlphaField { modes })
    }

    /// Multiply every mode pointwise by the same real function of `y`.
    pub fn mul_profile(&self, w: &[f64]) -> AlphaField {
        let modes = self
            .modes
            .iter()
            .map(|(&a, f)| {
                let vals = f
                    .values()
                    .iter()
                    .zip(w)
                    .map(|(v, &s)| v * s)
                    .collect();
                (
                    a,
                    GridFunction::new(Arc::clone(f.grid()), vals).expect("same grid"),
                )
            })
            .collect();
        AlphaField { modes }
    }

    /// Wavenumber convolution `(f g)_alpha = sum_{a'} f_{a'} g_{alpha - a'}`,
    /// the Fourier side of the pointwise product in `x`.
    pub fn convolve(&self, other: &AlphaField) -> Result<AlphaField> {
        let mut out: BTreeMap<i32, GridFunction> = BTreeMap::new();
        for (&a1, f1) in &self.modes {
            for (&a2, f2) in &other.modes {
                let prod = f1.mul_pointwise(f2)?;
                match out.get_mut(&(a1 + a2)) {
                    Some(acc) => *acc = acc.axpy(Complex64::ONE, &prod)?,
                    None => {
                        out.insert(a1 + a2, prod);
                    }
                }
            }
        }
        Ok(AlphaField { modes: out })
    }

    /// Sup over modes of the divergence residual `|i alpha u_a + dv_a/dy|`,
    /// for `self = u`, `other = v`.
    pub fn divergence_residual(&self, v: &AlphaField) -> Result<f64> {
        let mut worst = 0.0f64;
        for (&a, u_a) in &self.modes {
            let zero;
            let v_a = match v.get(a) {
                Some(f) => f,
                None => {
                    zero = u_a.grid().zero_function();
                    &zero
                }
            };
            let dv = v_a.derivative(1)?;
            let res = u_a
                .scale(Complex64::new(0.0, a as f64))
                .axpy(Complex64::ONE, &dv)?
                .max_abs();
            worst = worst.max(res);
        }
        for (&a, v_a) in &v.modes {
            if !self.modes.contains_key(&a) {
                worst = worst.max(v_a.derivative(1)?.max_abs());
            }
        }
        Ok(worst)
    }

    /// Largest mode magnitude, across modes and nodes.
    pub fn max_abs(&self) -> f64 {
        self.modes.values().map(|f| f.max_abs()).fold(0.0, f64::max)
    }
}

/// Random decaying analytic mode: a short sum of `c y^m e^{-b y}` terms.
pub fn random_mode(grid: &Arc<Grid>, rng: &mut impl Rng) -> GridFunction {
    let n_terms = rng.gen_range(1..=3);
    let terms: Vec<(Complex64, i32, f64)> = (0..n_terms)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let m = rng.gen_range(0..=2);
            let b = rng.gen_range(0.5..2.5);
            (c, m, b)
        })
        .collect();
    grid.function_from(|y| {
        terms
            .iter()
            .map(|&(c, m, b)| c * y.powi(m) * (-b * y).exp())
            .sum()
    })
}

/// Random analytic field supported on the given wavenumbers.
pub fn random_field(grid: &Arc<Grid>, alphas: &[i32], rng: &mut impl Rng) -> AlphaField {
    let mut field = AlphaField::new();
    for &a in alphas {
        field.insert(a, random_mode(grid, rng));
    }
    field
}

/// Random divergence-free pair `(u, v) = (d_y psi, -d_x psi)` built from a
/// stream field whose modes vanish at the wall.
pub fn random_divfree_pair(
    grid: &Arc<Grid>,
    alphas: &[i32],
    rng: &mut impl Rng,
) -> Result<(AlphaField, AlphaField)> {
    let mut u = AlphaField::new();
    let mut v = AlphaField::new();
    for &a in alphas {
        let n_terms = rng.gen_range(1..=3);
        let terms: Vec<(Complex64, i32, f64)> = (0..n_terms)
            .map(|_| {
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let m = rng.gen_range(1..=3);
                let b = rng.gen_range(0.5..2.5);
                (c, m, b)
            })
            .collect();
        let psi = grid.function_from(|y| {
            terms
                .iter()
                .map(|&(c, m, b)| c * y.powi(m) * (-b * y).exp())
                .sum()
        });
        u.insert(a, psi.derivative(1)?);
        v.insert(a, psi.scale(Complex64::new(0.0, -(a as f64))));
    }
    Ok((u, v))
}
