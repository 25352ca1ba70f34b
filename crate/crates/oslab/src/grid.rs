//! Mapped Chebyshev collocation on the half-line.
//!
//! Nodes are Chebyshev-Lobatto points `t_j = -cos(pi j / (n-1))` squeezed
//! affinely into `[-1, xi_max]` and pushed through the algebraic map
//! `y = L (1 + xi) / (1 - xi)`, so that `y_0 = 0` and the last node sits at
//! `y_max = DOMAIN_RATIO * L`. Spacing clusters quadratically near the wall,
//! where viscous sublayers live. Differentiation is done with the dense
//! barycentric differentiation matrix; the far-field boundary condition is
//! imposed at the last node.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Computational domain length in units of the map scale.
///
/// The underlying problem is posed on `[0, infinity)`; solutions of interest
/// decay exponentially, so truncating at `20 L` puts the last node far beyond
/// every relevant scale.
pub const DOMAIN_RATIO: f64 = 20.0;

/// Collocation grid for the half-line.
#[derive(Debug)]
pub struct Grid {
    n_points: usize,
    map_scale: f64,
    includes_boundary: bool,
    nodes: Vec<f64>,
    /// Barycentric weights of the Lobatto nodes in `t` space.
    bary_w: Vec<f64>,
    /// Squeeze parameter: `xi = -1 + (t + 1) (xi_max + 1) / 2`.
    xi_max: f64,
    /// Mapped differentiation matrices, orders 1..=4.
    diff: [DMatrix<f64>; 4],
    /// Clenshaw-Curtis weights times the map Jacobian.
    quad_w: Vec<f64>,
}

impl Grid {
    /// Build a grid with `n_points` collocation nodes and map parameter
    /// `map_scale` (half of the nodes fall inside `y < map_scale`).
    pub fn new(n_points: usize, map_scale: f64) -> Result<Arc<Grid>> {
        if n_points < 8 {
            return Err(Error::TooFewPoints(n_points));
        }
        if !(map_scale > 0.0) || !map_scale.is_finite() {
            return Err(Error::BadMapScale(map_scale));
        }
        let n = n_points;
        let m = n - 1;
        let l = map_scale;
        let y_max = DOMAIN_RATIO * l;
        let xi_max = (y_max - l) / (y_max + l);
        let squeeze = 0.5 * (xi_max + 1.0);

        let theta: Vec<f64> = (0..n).map(|j| PI * j as f64 / m as f64).collect();
        let t: Vec<f64> = theta.iter().map(|&th| -th.cos()).collect();
        let y_of_t = |tj: f64| {
            let xi = -1.0 + (tj + 1.0) * squeeze;
            l * (1.0 + xi) / (1.0 - xi)
        };
        let mut nodes: Vec<f64> = t.iter().map(|&tj| y_of_t(tj)).collect();
        nodes[0] = 0.0;
        nodes[m] = y_max;

        // Lobatto barycentric weights, up to an irrelevant common factor.
        let mut bary_w = vec![0.0; n];
        for (j, w) in bary_w.iter_mut().enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *w = if j == 0 || j == m { 0.5 * sign } else { sign };
        }

        // Node differences via the trig identity; plain subtraction loses
        // digits at the clustered ends.
        let mut dt = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dt[(i, j)] = 2.0
                        * (0.5 * (theta[i] + theta[j])).sin()
                        * (0.5 * (theta[i] - theta[j])).sin();
                }
            }
        }

        // Differentiation matrices in t up to order 4, built with the
        // derivative recursion and the negative-sum trick at every order;
        // forming matrix powers instead amplifies wall-row roundoff by
        // several orders of magnitude.
        let mut dts: Vec<DMatrix<f64>> = Vec::with_capacity(4);
        let mut prev = DMatrix::<f64>::identity(n, n);
        for order in 1..=4usize {
            let mut cur = DMatrix::<f64>::zeros(n, n);
            for k in 0..n {
                let mut row_sum = 0.0;
                for j in 0..n {
                    if j != k {
                        let v = order as f64 * ((bary_w[j] / bary_w[k]) * prev[(k, k)]
                            - prev[(k, j)])
                            / dt[(k, j)];
                        cur[(k, j)] = v;
                        row_sum += v;
                    }
                }
                cur[(k, k)] = -row_sum;
            }
            dts.push(cur.clone());
            prev = cur;
        }

        // Map derivatives d^k t / dy^k for the algebraic map.
        let s2 = 2.0 / (xi_max + 1.0);
        let map_d = |y: f64, k: usize| -> f64 {
            let p = (y + l).powi(k as i32 + 1);
            let base = [1.0, -2.0, 6.0, -24.0][k - 1];
            s2 * 2.0 * l * base / p
        };
        let a: Vec<Vec<f64>> = (1..=4)
            .map(|k| nodes.iter().map(|&y| map_d(y, k)).collect())
            .collect();

        // Compose with the map (Faa di Bruno up to order 4).
        let scale_rows = |mat: &DMatrix<f64>, w: &[f64]| -> DMatrix<f64> {
            let mut out = mat.clone();
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] *= w[i];
                }
            }
            out
        };
        let a1 = &a[0];
        let a2 = &a[1];
        let a3 = &a[2];
        let a4 = &a[3];
        let pw = |v: &[f64], p: i32| -> Vec<f64> { v.iter().map(|x| x.powi(p)).collect() };
        let comb = |u: &[f64], v: &[f64], c: f64| -> Vec<f64> {
            u.iter().zip(v).map(|(x, y)| c * x * y).collect()
        };

        let d1 = scale_rows(&dts[0], a1);
        let d2 = scale_rows(&dts[1], &pw(a1, 2)) + scale_rows(&dts[0], a2);
        let d3 = scale_rows(&dts[2], &pw(a1, 3))
            + scale_rows(&dts[1], &comb(a1, a2, 3.0))
            + scale_rows(&dts[0], a3);
        let c2: Vec<f64> = a2
            .iter()
            .zip(a1.iter().zip(a3))
            .map(|(x2, (x1, x3))| 3.0 * x2 * x2 + 4.0 * x1 * x3)
            .collect();
        let d4 = scale_rows(&dts[3], &pw(a1, 4))
            + scale_rows(&dts[2], &comb(&pw(a1, 2), a2, 6.0))
            + scale_rows(&dts[1], &c2)
            + scale_rows(&dts[0], a4);

        // Clenshaw-Curtis weights on t in [-1, 1], times dy/dt.
        let cc = clenshaw_curtis_weights(m);
        let quad_w: Vec<f64> = cc
            .iter()
            .zip(a1)
            .map(|(&w, &j)| w / j)
            .collect();

        Ok(Arc::new(Grid {
            n_points,
            map_scale,
            includes_boundary: true,
            nodes,
            bary_w,
            xi_max,
            diff: [d1, d2, d3, d4],
            quad_w,
        }))
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn map_scale(&self) -> f64 {
        self.map_scale
    }

    pub fn includes_boundary(&self) -> bool {
        self.includes_boundary
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn y_max(&self) -> f64 {
        self.nodes[self.n_points - 1]
    }

    /// Mapped differentiation matrix of the given order (1..=4).
    pub fn diff_matrix(&self, order: usize) -> Result<&DMatrix<f64>> {
        if !(1..=4).contains(&order) {
            return Err(Error::BadDerivativeOrder(order));
        }
        Ok(&self.diff[order - 1])
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad_w
    }

    /// Sample a complex-valued function at the nodes.
    pub fn function_from(self: &Arc<Self>, f: impl Fn(f64) -> Complex64) -> GridFunction {
        let values = self.nodes.iter().map(|&y| f(y)).collect();
        GridFunction {
            grid: Arc::clone(self),
            values,
        }
    }

    /// Sample a real-valued function at the nodes.
    pub fn function_from_real(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> GridFunction {
        self.function_from(|y| Complex64::new(f(y), 0.0))
    }

    pub fn zero_function(self: &Arc<Self>) -> GridFunction {
        GridFunction {
            grid: Arc::clone(self),
            values: vec![Complex64::ZERO; self.n_points],
        }
    }

    /// Map `y` back to the Lobatto coordinate `t`.
    fn t_of_y(&self, y: f64) -> f64 {
        let xi = (y - self.map_scale) / (y + self.map_scale);
        -1.0 + 2.0 * (xi + 1.0) / (self.xi_max + 1.0)
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.map_scale == other.map_scale
    }
}

/// Complex samples on a [`Grid`], one value per node.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Spectral derivative of the given order (1..=4).
    pub fn derivative(&self, order: usize) -> Result<GridFunction> {
        let d = self.grid.diff_matrix(order)?;
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values: apply_real_matrix(d, &self.values),
        })
    }

    /// `self + scale * other`.
    pub fn axpy(&self, scale: Complex64, other: &GridFunction) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + scale * b)
            .collect();
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    pub fn scale(&self, s: Complex64) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// Node-wise product.
    pub fn mul_pointwise(&self, other: &GridFunction) -> Result<GridFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(GridFunction {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    pub fn conj(&self) -> GridFunction {
        GridFunction {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Barycentric evaluation at an arbitrary `y` in `[0, y_max]`.
    pub fn eval(&self, y: f64) -> Complex64 {
        let t = self.grid.t_of_y(y);
        let tj: Vec<f64> = self
            .grid
            .nodes
            .iter()
            .map(|&yn| self.grid.t_of_y(yn))
            .collect();
        let mut num = Complex64::ZERO;
        let mut den = 0.0;
        for j in 0..self.values.len() {
            let dt = t - tj[j];
            if dt.abs() < 1e-14 {
                return self.values[j];
            }
            let w = self.grid.bary_w[j] / dt;
            num += self.values[j] * w;
            den += w;
        }
        num / den
    }

    /// Integral over the half-line (the far tail beyond `y_max` is dropped;
    /// callers must feed decaying integrands). Returns the value and a flag
    /// set when `|f|` at the last node exceeds `1e-6 max|f|`.
    pub fn quadrature_checked(&self) -> (Complex64, bool) {
        let mut acc = Complex64::ZERO;
        for (v, w) in self.values.iter().zip(self.grid.quad_weights()) {
            acc += v * *w;
        }
        let tail = self.values[self.values.len() - 1].norm();
        let warn = tail > 1e-6 * self.max_abs() && self.max_abs() > 0.0;
        (acc, warn)
    }

    pub fn quadrature(&self) -> Complex64 {
        self.quadrature_checked().0
    }
}

/// Apply a real matrix to complex samples.
pub fn apply_real_matrix(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = vec![Complex64::ZERO; n];
    for i in 0..n {
        let mut re = 0.0;
        let mut im = 0.0;
        for j in 0..v.len() {
            let a = m[(i, j)];
            re += a * v[j].re;
            im += a * v[j].im;
        }
        out[i] = Complex64::new(re, im);
    }
    out
}

/// Clenshaw-Curtis weights for Lobatto nodes of degree `n` on `[-1, 1]`.
fn clenshaw_curtis_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if n == 0 {
        w[0] = 2.0;
        return w;
    }
    let theta: Vec<f64> = (0..=n).map(|j| PI * j as f64 / n as f64).collect();
    let end = if n % 2 == 0 {
        1.0 / (n * n - 1) as f64
    } else {
        1.0 / (n * n) as f64
    };
    w[0] = end;
    w[n] = end;
    for i in 1..n {
        let mut v = 1.0;
        let half = n / 2;
        if n % 2 == 0 {
            for k in 1..half {
                v -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / (4 * k * k - 1) as f64;
            }
            v -= (n as f64 * theta[i]).cos() / (n * n - 1) as f64;
        } else {
            for k in 1..=half {
                v -= 2.0 * (2.0 * k as f64 * theta[i]).cos() / (4 * k * k - 1) as f64;
            }
        }
        w[i] = 2.0 * v / n as f64;
    }
    w
}
