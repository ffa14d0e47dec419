//! Quadrature grids on the real line.
//!
//! Gauss–Hermite weights are stored already multiplied by `e^{y²}`, so a grid
//! integrates plain integrands `∫ f(x) dx ≈ Σ wᵢ f(xᵢ)`. For `f` of the form
//! polynomial × `e^{−ωx²}` with degree below `2·count` the rule is exact.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default node count for Gauss–Hermite grids.
pub const DEFAULT_NODES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    GaussHermite,
    Trapezoid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scheme: Scheme,
}

impl QuadratureGrid {
    /// Gauss–Hermite rule adapted to the Gaussian `e^{−ω x²}`: nodes `yᵢ/√ω`.
    pub fn gauss_hermite(count: usize, omega: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidArgument(
                "quadrature needs at least one node".into(),
            ));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::Domain(format!(
                "grid scale must be positive, got {omega}"
            )));
        }
        let rule = standard_rule(count)?;
        let (y, w) = (&rule.0, &rule.1);
        let s = omega.sqrt();
        let nodes = y.iter().map(|&yi| yi / s).collect();
        let weights = y
            .iter()
            .zip(w)
            .map(|(&yi, &wi)| wi * (yi * yi).exp() / s)
            .collect();
        Ok(Self {
            nodes,
            weights,
            scheme: Scheme::GaussHermite,
        })
    }

    /// Default grid for a mode of frequency `omega`.
    pub fn for_mode(omega: f64) -> Result<Self> {
        Self::gauss_hermite(DEFAULT_NODES, omega)
    }

    /// Composite trapezoid rule on `[a, b]` with `count` points.
    pub fn trapezoid(a: f64, b: f64, count: usize) -> Result<Self> {
        if count < 2 || a.partial_cmp(&b) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidArgument(format!(
                "trapezoid needs count ≥ 2 and a < b (got {count}, [{a}, {b}])"
            )));
        }
        let h = (b - a) / (count - 1) as f64;
        let nodes = (0..count).map(|k| a + h * k as f64).collect();
        let weights = (0..count)
            .map(|k| if k == 0 || k == count - 1 { 0.5 * h } else { h })
            .collect();
        Ok(Self {
            nodes,
            weights,
            scheme: Scheme::Trapezoid,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Standard rules are cached per node count.
fn standard_rule(n: usize) -> Result<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_hermite_standard(n)?);
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(n, Arc::clone(&rule));
    Ok(rule)
}

/// Nodes (increasing) and weights for `∫ e^{−y²} f(y) dy`.
///
/// Eigenvalues of the Jacobi matrix seed a Newton polish on `H_n`; weights
/// come from the derivative formula so the tail keeps full relative accuracy.
fn gauss_hermite_standard(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    const MAX_ITER: usize = 100;

    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut seeds: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    seeds.sort_by(f64::total_cmp);

    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // largest roots first, mirrored onto the negative half
        let mut z = seeds[n - 1 - i].abs();
        if n % 2 == 1 && i == half - 1 {
            z = 0.0;
        }
        let mut converged = false;
        let mut pp = 0.0;
        for _ in 0..MAX_ITER {
            let (p_n, p_nm1) = orthonormal_hermite(n, z, PIM4);
            pp = (2.0 * nf).sqrt() * p_nm1;
            let dz = p_n / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                let (_, p_nm1) = orthonormal_hermite(n, z, PIM4);
                pp = (2.0 * nf).sqrt() * p_nm1;
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "Gauss–Hermite root {i} of {n} did not converge (z = {z})"
            )));
        }
        x[n - 1 - i] = z;
        x[i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if x.windows(2)
        .any(|p| p[0].partial_cmp(&p[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::Numeric(format!(
            "Gauss–Hermite roots of order {n} are not distinct"
        )));
    }
    Ok((x, w))
}

/// Orthonormal Hermite polynomials (without the Gaussian factor) at `z`:
/// returns `(p_n, p_{n-1})`.
fn orthonormal_hermite(n: usize, z: f64, p0: f64) -> (f64, f64) {
    let mut p1 = p0;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nodes_are_sorted_and_weights_positive() {
        for &n in &[1, 2, 7, 64, 200] {
            let g = QuadratureGrid::gauss_hermite(n, 1.0).unwrap();
            assert_eq!(g.len(), n);
            assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(g.weights().iter().all(|&w| w > 0.0 && w.is_finite()));
        }
    }

    #[test]
    fn gaussian_moments_are_exact() {
        // ∫ x^{2k} e^{−ωx²} dx = Γ(k + ½) / ω^{k+½}
        for &omega in &[0.05, 1.0, 3.0] {
            let g = QuadratureGrid::gauss_hermite(200, omega).unwrap();
            let pi = std::f64::consts::PI;
            let m0 = g.integrate(|x| (-omega * x * x).exp());
            assert_relative_eq!(m0, (pi / omega).sqrt(), max_relative = 1e-13);
            let m2 = g.integrate(|x| x * x * (-omega * x * x).exp());
            assert_relative_eq!(m2, 0.5 * (pi / omega).sqrt() / omega, max_relative = 1e-13);
            let m8 = g.integrate(|x| x.powi(8) * (-omega * x * x).exp());
            let gamma = 105.0 / 16.0 * pi.sqrt();
            assert_relative_eq!(m8, gamma / omega.powf(4.5), max_relative = 1e-12);
        }
    }

    #[test]
    fn small_rule_matches_table() {
        // n = 2: nodes ±1/√2, weights √π/2
        let g = QuadratureGrid::gauss_hermite(2, 1.0).unwrap();
        assert_relative_eq!(
            g.nodes()[1],
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-14
        );
        let w = std::f64::consts::PI.sqrt() / 2.0 * 0.5f64.exp();
        assert_relative_eq!(g.weights()[0], w, max_relative = 1e-14);
    }

    #[test]
    fn trapezoid_and_errors() {
        let g = QuadratureGrid::trapezoid(0.0, 1.0, 1001).unwrap();
        assert_relative_eq!(g.integrate(|x| x), 0.5, max_relative = 1e-14);
        assert!(QuadratureGrid::trapezoid(1.0, 0.0, 10).is_err());
        assert!(QuadratureGrid::gauss_hermite(0, 1.0).is_err());
        assert!(QuadratureGrid::gauss_hermite(10, -1.0).is_err());
    }
}
