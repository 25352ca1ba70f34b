//! Weighted sup-norms, boundary-layer norms and generator functions.
//!
//! The plain norm is `||f||_{l,0} = sup_y phi(y)^l |f(y)|` with
//! `phi(y) = y / (1 + y)`; the boundary-layer norm divides by
//! `delta^{-1} e^{-y/delta} + 1`, which discounts a viscous sublayer of
//! width `delta = gamma0 nu^{1/4}`. Generator functions assemble both norm
//! families of all `y`-derivatives and all wavenumbers into a two-parameter
//! series whose positivity and monotonicity drive the convergence argument
//! of the mode cascade.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::field::AlphaField;
use crate::grid::GridFunction;
use crate::numeric::golden_max;
use crate::{Error, Result};

/// Largest retained derivative order in generator tables.
pub const ELL_MAX_LIMIT: usize = 12;

/// Relative size of the last retained term above which a generator
/// evaluation is flagged as truncated.
pub const TAIL_WARN_RATIO: f64 = 1e-8;

/// Boundary-layer scaling parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BLParams {
    pub nu: f64,
    pub gamma0: f64,
}

impl BLParams {
    pub fn new(nu: f64, gamma0: f64) -> Self {
        BLParams { nu, gamma0 }
    }

    /// Sublayer width `delta = gamma0 nu^{1/4}`.
    pub fn delta(&self) -> f64 {
        self.gamma0 * self.nu.powf(0.25)
    }

    /// `gamma0^{-1} <= sqrt(lambda0 / 2)`, required once the growth rate of
    /// the most unstable mode is known.
    pub fn gamma0_admissible(&self, lambda0: f64) -> bool {
        self.gamma0.recip() <= (lambda0 / 2.0).sqrt()
    }
}

/// The analyticity weight `phi(y) = y / (1 + y)`.
pub fn phi_weight(y: f64) -> f64 {
    y / (1.0 + y)
}

/// Which weight family a norm uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Plain,
    BoundaryLayer,
}

/// Which norm family a generator evaluation sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GenFamily {
    Gen0,
    GenDelta,
}

fn weight_at(y: f64, ell: usize, mode: WeightMode, delta: f64) -> f64 {
    let p = phi_weight(y).powi(ell as i32);
    match mode {
        WeightMode::Plain => p,
        WeightMode::BoundaryLayer => p / ((-y / delta).exp() / delta + 1.0),
    }
}

/// `sup_y phi(y)^ell |f(y)|`, optionally discounted by the sublayer weight.
///
/// The sup is taken over the grid nodes and refined by golden section
/// between the bracketing neighbours of the best node.
pub fn norm_weighted(f: &GridFunction, ell: usize, mode: WeightMode, params: &BLParams) -> f64 {
    let delta = params.delta();
    let nodes = f.grid().nodes();
    let mut best = 0.0f64;
    let mut best_j = 0usize;
    for (j, (&y, v)) in nodes.iter().zip(f.values()).enumerate() {
        let w = weight_at(y, ell, mode, delta) * v.norm();
        if w > best {
            best = w;
            best_j = j;
        }
    }
    let lo = if best_j == 0 { 0.0 } else { nodes[best_j - 1] };
    let hi = nodes[(best_j + 1).min(nodes.len() - 1)];
    let (_, refined) = golden_max(
        |y| weight_at(y, ell, mode, delta) * f.eval(y).norm(),
        lo,
        hi,
        40,
    );
    best.max(refined)
}

/// Table of weighted norms `||d_y^l f_alpha||` for both families and all
/// `(alpha, l <= ell_max)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorTable {
    pub alphas: Vec<i32>,
    pub ell_max: usize,
    pub entries0: BTreeMap<i32, Vec<f64>>,
    pub entries_delta: BTreeMap<i32, Vec<f64>>,
    pub params: BLParams,
}

/// Norm tables of all `y`-derivatives of every mode of `field`.
///
/// Derivatives up to order 4 use the stable mapped matrices directly; higher
/// orders chain through repeated fourth-derivative applications.
pub fn build_table(field: &AlphaField, ell_max: usize, params: &BLParams) -> Result<GeneratorTable> {
    if ell_max > ELL_MAX_LIMIT {
        return Err(Error::Invalid(format!(
            "ell_max {ell_max} exceeds the supported limit {ELL_MAX_LIMIT}"
        )));
    }
    if !field.is_empty() {
        field.common_grid()?;
    }
    let mut entries0 = BTreeMap::new();
    let mut entries_delta = BTreeMap::new();
    for (alpha, f) in field.iter() {
        let mut e0 = Vec::with_capacity(ell_max + 1);
        let mut ed = Vec::with_capacity(ell_max + 1);
        let mut base = f.clone(); // d^{4q} f
        let mut base_order = 0usize;
        for ell in 0..=ell_max {
            let df = match ell - base_order {
                0 => base.clone(),
                r @ 1..=3 => base.derivative(r)?,
                _ => {
                    base = base.derivative(4)?;
                    base_order += 4;
                    base.clone()
                }
            };
            e0.push(norm_weighted(&df, ell, WeightMode::Plain, params));
            ed.push(norm_weighted(&df, ell, WeightMode::BoundaryLayer, params));
        }
        entries0.insert(alpha, e0);
        entries_delta.insert(alpha, ed);
    }
    Ok(GeneratorTable {
        alphas: field.alphas().collect(),
        ell_max,
        entries0,
        entries_delta,
        params: *params,
    })
}

impl GeneratorTable {
    fn entries(&self, family: GenFamily) -> &BTreeMap<i32, Vec<f64>> {
        match family {
            GenFamily::Gen0 => &self.entries0,
            GenFamily::GenDelta => &self.entries_delta,
        }
    }

    /// The `(d1, d2)` mixed partial of the generator series at `(z1, z2)`,
    /// by term-wise differentiation of the truncated sum. Also returns
    /// whether the last retained `l` term exceeds [`TAIL_WARN_RATIO`] of the
    /// total (a truncation-tail warning).
    pub fn gen_eval_checked(
        &self,
        family: GenFamily,
        z1: f64,
        z2: f64,
        d1: usize,
        d2: usize,
    ) -> Result<(f64, bool)> {
        if d1 + d2 > 2 {
            return Err(Error::Invalid(format!(
                "generator derivatives limited to total order 2, got {}",
                d1 + d2
            )));
        }
        if z1 < 0.0 || z2 < 0.0 {
            return Err(Error::Invalid("generator arguments must be >= 0".into()));
        }
        if z2 > 1.0 {
            return Err(Error::Invalid(format!(
                "z2 = {z2} outside the small-radius regime (z2 <= 1)"
            )));
        }
        let mut sum = 0.0;
        let mut last = 0.0;
        for (&alpha, entry) in self.entries(family) {
            let aa = (alpha as f64).abs();
            let pref = aa.powi(d1 as i32) * (z1 * aa).exp();
            let mut term = 1.0; // z2^{l - d2} / (l - d2)!
            for ell in d2..=self.ell_max {
                let k = ell - d2;
                if k > 0 {
                    term *= z2 / k as f64;
                }
                let contribution = pref * entry[ell] * term;
                sum += contribution;
                if ell == self.ell_max {
                    last += contribution;
                }
            }
        }
        let warn = sum > 0.0 && last > TAIL_WARN_RATIO * sum;
        Ok((sum, warn))
    }

    pub fn gen_eval(&self, family: GenFamily, z1: f64, z2: f64, d1: usize, d2: usize) -> Result<f64> {
        Ok(self.gen_eval_checked(family, z1, z2, d1, d2)?.0)
    }
}

/// Outcome of a two-sided inequality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub fitted_c: f64,
    pub holds: bool,
}

/// Check the product rule `Gen_delta(f g) <= Gen_0(f) Gen_delta(g)`.
pub fn check_product_inequality(
    f: &AlphaField,
    g: &AlphaField,
    params: &BLParams,
    z1: f64,
    z2: f64,
    ell_max: usize,
) -> Result<InequalityReport> {
    let fg = f.convolve(g)?;
    let t_fg = build_table(&fg, ell_max, params)?;
    let t_f = build_table(f, ell_max, params)?;
    let t_g = build_table(g, ell_max, params)?;
    let lhs = t_fg.gen_eval(GenFamily::GenDelta, z1, z2, 0, 0)?;
    let rhs = t_f.gen_eval(GenFamily::Gen0, z1, z2, 0, 0)?
        * t_g.gen_eval(GenFamily::GenDelta, z1, z2, 0, 0)?;
    Ok(InequalityReport {
        lhs,
        rhs,
        fitted_c: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        holds: lhs <= rhs * (1.0 + 1e-8),
    })
}

/// Check the divergence-free transport bound
/// `Gen_delta(v d_y g) <= C (Gen_0(v) + d_{z1} Gen_0(u)) d_{z2} Gen_delta(g)`
/// and report the smallest constant that makes it hold.
pub fn check_transport_inequality(
    u: &AlphaField,
    v: &AlphaField,
    g: &AlphaField,
    params: &BLParams,
    z1: f64,
    z2: f64,
    ell_max: usize,
    c_config: f64,
) -> Result<InequalityReport> {
    let scale = (u.max_abs() + v.max_abs()).max(1.0);
    let res = u.divergence_residual(v)?;
    if res > 1e-8 * scale {
        return Err(Error::NotDivergenceFree(res));
    }
    let v_dy_g = v.convolve(&g.d_dy()?)?;
    let lhs = build_table(&v_dy_g, ell_max, params)?.gen_eval(GenFamily::GenDelta, z1, z2, 0, 0)?;
    let t_u = build_table(u, ell_max, params)?;
    let t_v = build_table(v, ell_max, params)?;
    let t_g = build_table(g, ell_max, params)?;
    let rhs = (t_v.gen_eval(GenFamily::Gen0, z1, z2, 0, 0)?
        + t_u.gen_eval(GenFamily::Gen0, z1, z2, 1, 0)?)
        * t_g.gen_eval(GenFamily::GenDelta, z1, z2, 0, 1)?;
    let fitted_c = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(InequalityReport {
        lhs,
        rhs,
        fitted_c,
        holds: fitted_c <= c_config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_divfree_pair, random_field};
    use crate::grid::Grid;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Grid::new(128, 2.0).unwrap()
    }

    fn params() -> BLParams {
        BLParams::new(1e-4, 1.0)
    }

    #[test]
    fn delta_definition() {
        let p = BLParams::new(1e-4, 2.0);
        assert_eq!(p.delta(), 2.0 * 1e-4f64.powf(0.25));
        assert!(p.gamma0_admissible(0.6));
        assert!(!BLParams::new(1e-4, 0.5).gamma0_admissible(0.6));
    }

    #[test]
    fn plain_norm_of_constant() {
        let g = grid();
        let f = g.function_from(|_| Complex64::new(-2.5, 1.0));
        let n = norm_weighted(&f, 0, WeightMode::Plain, &params());
        assert!((n - (2.5f64 * 2.5 + 1.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sublayer_norm_of_sublayer_profile() {
        let p = params();
        let d = p.delta();
        let g = grid();
        let f = g.function_from_real(|y| (-y / d).exp() / d);
        let n = norm_weighted(&f, 0, WeightMode::BoundaryLayer, &p);
        assert!(n <= 1.0 + 1e-12, "norm {n}");
        assert!(n >= 0.9, "norm {n}");
    }

    #[test]
    fn weighted_norm_matches_maximization_oracle() {
        // Oracle: golden section on the closed form phi(y)^3 e^{-y}; the
        // stationary point solves y (1 + y) = 3.
        let (_, oracle) = golden_max(|y: f64| phi_weight(y).powi(3) * (-y).exp(), 0.0, 6.0, 80);
        let y_star = (13.0f64.sqrt() - 1.0) / 2.0;
        let closed = phi_weight(y_star).powi(3) * (-y_star).exp();
        assert!((oracle - closed).abs() < 1e-12);
        assert!((closed - 0.049_211_401_8).abs() < 1e-9);

        let g = grid();
        let f = g.function_from_real(|y| (-y).exp());
        let n = norm_weighted(&f, 3, WeightMode::Plain, &params());
        assert!((n - oracle).abs() < 1e-9, "norm {n} vs oracle {oracle}");
    }

    #[test]
    fn table_single_mode_entries() {
        let g = grid();
        let p = params();
        let f = AlphaField::single(1, g.function_from_real(|y| (-y).exp()));
        let t = build_table(&f, 8, &p).unwrap();
        assert!((t.entries0[&1][0] - 1.0).abs() < 1e-12);
        // Eq-alg chain: delta-weighted entries never exceed plain ones.
        for ell in 0..=8 {
            assert!(t.entries_delta[&1][ell] <= t.entries0[&1][ell] * (1.0 + 1e-12));
            assert!(t.entries0[&1][ell] >= 0.0);
        }
    }

    #[test]
    fn empty_field_gives_zero_generator() {
        let t = build_table(&AlphaField::new(), 6, &params()).unwrap();
        for fam in [GenFamily::Gen0, GenFamily::GenDelta] {
            assert_eq!(t.gen_eval(fam, 0.3, 0.1, 0, 0).unwrap(), 0.0);
            assert_eq!(t.gen_eval(fam, 0.0, 0.2, 1, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_mode_generator_bounded_by_exponentials() {
        let g = grid();
        let t = build_table(
            &AlphaField::single(1, g.function_from_real(|y| (-y).exp())),
            12,
            &params(),
        )
        .unwrap();
        for &(z1, z2) in &[(0.0, 0.0), (0.3, 0.1), (1.0, 0.2)] {
            let v = t.gen_eval(GenFamily::Gen0, z1, z2, 0, 0).unwrap();
            assert!(v <= (z1.exp() * z2.exp()) * (1.0 + 1e-10), "Gen0 {v} at ({z1},{z2})");
            assert!(v >= z1.exp() * (1.0 - 1e-12)); // the l = 0 term alone
        }
    }

    #[test]
    fn generator_monotone_in_z() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_field(&g, &[-2, 1, 3], &mut rng);
        let t = build_table(&f, 10, &params()).unwrap();
        let mut prev = 0.0;
        for &z in &[0.0, 0.05, 0.1, 0.15, 0.2] {
            let v = t.gen_eval(GenFamily::GenDelta, z, z, 0, 0).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn z1_derivative_matches_d_dx_table() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_field(&g, &[-1, 2], &mut rng);
        let t = build_table(&f, 10, &params()).unwrap();
        let t_dx = build_table(&f.d_dx(), 10, &params()).unwrap();
        for fam in [GenFamily::Gen0, GenFamily::GenDelta] {
            let a = t.gen_eval(fam, 0.2, 0.1, 1, 0).unwrap();
            let b = t_dx.gen_eval(fam, 0.2, 0.1, 0, 0).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn z1_derivative_matches_finite_difference() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_field(&g, &[1, -2], &mut rng);
        let t = build_table(&f, 10, &params()).unwrap();
        let h = 1e-5;
        let d = t.gen_eval(GenFamily::Gen0, 0.2, 0.1, 1, 0).unwrap();
        let fd = (t.gen_eval(GenFamily::Gen0, 0.2 + h, 0.1, 0, 0).unwrap()
            - t.gen_eval(GenFamily::Gen0, 0.2 - h, 0.1, 0, 0).unwrap())
            / (2.0 * h);
        assert!((d - fd).abs() < 1e-6 * d.max(1.0), "termwise {d} vs fd {fd}");
    }

    #[test]
    fn weighted_dy_bound_has_small_constant() {
        // Gen_delta(phi d_y f) <= C0 d_{z2} Gen_delta(f) with C0 < 10.
        let g = grid();
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let f = random_field(&g, &[1, 2], &mut rng);
            let phi: Vec<f64> = g.nodes().iter().map(|&y| phi_weight(y)).collect();
            let phidy = f.d_dy().unwrap().mul_profile(&phi);
            let lhs = build_table(&phidy, 10, &p)
                .unwrap()
                .gen_eval(GenFamily::GenDelta, 0.2, 0.2, 0, 0)
                .unwrap();
            let rhs = build_table(&f, 10, &p)
                .unwrap()
                .gen_eval(GenFamily::GenDelta, 0.2, 0.2, 0, 1)
                .unwrap();
            assert!(lhs <= 10.0 * rhs, "C0 = {}", lhs / rhs);
        }
    }

    #[test]
    fn product_inequality_on_random_fields() {
        let g = grid();
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let f = random_field(&g, &[-2, 1], &mut rng);
            let h = random_field(&g, &[0, 1, 2], &mut rng);
            let rep = check_product_inequality(&f, &h, &p, 0.2, 0.1, 10).unwrap();
            assert!(rep.holds, "lhs {} rhs {}", rep.lhs, rep.rhs);
        }
    }

    #[test]
    fn product_inequality_trivial_and_single_mode() {
        let g = grid();
        let p = params();
        let f = AlphaField::single(1, g.function_from_real(|y| (-y).exp()));
        let zero = AlphaField::new();
        let rep = check_product_inequality(&f, &zero, &p, 0.2, 0.1, 8).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.holds);
        let rep = check_product_inequality(&f, &f, &p, 0.2, 0.1, 8).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn transport_inequality_on_divfree_pairs() {
        let g = grid();
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut fits = Vec::new();
        for _ in 0..20 {
            let (u, v) = random_divfree_pair(&g, &[1, -2], &mut rng).unwrap();
            let gg = random_field(&g, &[0, 1], &mut rng);
            let rep = check_transport_inequality(&u, &v, &gg, &p, 0.2, 0.1, 10, 100.0).unwrap();
            assert!(rep.holds, "C fit {}", rep.fitted_c);
            if rep.fitted_c > 0.0 {
                fits.push(rep.fitted_c);
            }
        }
        let max = fits.iter().cloned().fold(0.0, f64::max);
        let min = fits.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 10.0, "fitted C range [{min}, {max}]");
    }

    #[test]
    fn transport_rejects_non_divfree() {
        let g = grid();
        let p = params();
        let u = AlphaField::single(1, g.function_from_real(|y| (1.0 - 2.0 * y) * (-y).exp()));
        // v deliberately inconsistent with u
        let v = AlphaField::single(1, g.function_from_real(|y| y * (-0.5 * y).exp()));
        let gg = AlphaField::single(1, g.function_from_real(|y| y * (-y).exp()));
        assert!(matches!(
            check_transport_inequality(&u, &v, &gg, &p, 0.2, 0.1, 8, 100.0),
            Err(Error::NotDivergenceFree(_))
        ));
    }

    #[test]
    fn transport_closed_form_pair() {
        // u = (1 - 2y) e^{-y}, v = -i y e^{-y} is divergence-free at alpha=1
        // (both derived from psi = y e^{-y}).
        let g = grid();
        let p = params();
        let u = AlphaField::single(1, g.function_from_real(|y| (1.0 - y) * (-y).exp()));
        let v = AlphaField::single(
            1,
            g.function_from(|y| Complex64::new(0.0, -y * (-y).exp())),
        );
        let gg = AlphaField::single(1, g.function_from_real(|y| y * (-y).exp()));
        let rep = check_transport_inequality(&u, &v, &gg, &p, 0.2, 0.1, 10, 100.0).unwrap();
        assert!(rep.fitted_c.is_finite());
        assert!(rep.lhs > 0.0);
    }

    #[test]
    fn ell_chain_inequality_for_same_function() {
        // || f ||_{l+1, delta} <= || f ||_{l, delta} since phi <= 1.
        let g = grid();
        let p = params();
        let f = g.function_from_real(|y| (1.0 + y) * (-0.8 * y).exp());
        for ell in 0..=10usize {
            let hi = norm_weighted(&f, ell + 1, WeightMode::BoundaryLayer, &p);
            let lo = norm_weighted(&f, ell, WeightMode::BoundaryLayer, &p);
            assert!(hi <= lo * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tail_warning_fires_for_slowly_decaying_terms() {
        let g = grid();
        let p = params();
        // A thin sublayer mode keeps high-order derivative norms large.
        let d = p.delta();
        let f = AlphaField::single(1, g.function_from_real(|y| (-y / d).exp() / d));
        let t = build_table(&f, 4, &p).unwrap();
        let (_, warn) = t
            .gen_eval_checked(GenFamily::GenDelta, 0.0, 0.9, 0, 0)
            .unwrap();
        assert!(warn);
        let (_, warn_small) = t.gen_eval_checked(GenFamily::GenDelta, 0.0, 1e-3, 0, 0).unwrap();
        assert!(!warn_small);
    }
}
