//! Position-space Fock wavefunctions of a harmonic mode (ħ = m = 1),
//!
//! `ψ_n(x; ω) = (ω/π)^{1/4} / √(2ⁿ n!) · H_n(√ω x) · e^{−ωx²/2}`,
//!
//! their frequency derivatives, quadrature inner products and the Wigner
//! function of a single Fock state.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::check_omega;
use crate::quadrature::QuadratureGrid;

/// Largest Fock level accepted by [`WaveParams`].
pub const MAX_LEVEL: usize = 40;

/// Finite-difference step relative to ω, used by derivative oracles.
pub const FD_REL_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveParams {
    n: usize,
    omega: f64,
}

impl WaveParams {
    pub fn new(n: usize, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        if n > MAX_LEVEL {
            return Err(Error::OutOfRange(format!(
                "level {n} above supported {MAX_LEVEL}"
            )));
        }
        Ok(Self { n, omega })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite_physicists(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Laguerre polynomial `L_n(x)`.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `ψ_n(x; ω)` without the level cap; `omega` must already be validated.
pub(crate) fn psi_level(n: usize, omega: f64, x: f64) -> f64 {
    let y = omega.sqrt() * x;
    let log_norm = 0.25 * (omega / std::f64::consts::PI).ln()
        - 0.5 * (n as f64 * std::f64::consts::LN_2 + ln_factorial(n));
    let envelope = (log_norm - 0.5 * y * y).exp();
    if envelope == 0.0 {
        return 0.0;
    }
    let h = hermite_physicists(n, y);
    if !h.is_finite() {
        return 0.0;
    }
    h * envelope
}

/// Fock wavefunction `ψ_n(x; ω)`.
pub fn psi(params: &WaveParams, x: f64) -> f64 {
    psi_level(params.n, params.omega, x)
}

/// Fock-basis components of `∂_ω ψ_n`: only levels `n ± 2` appear,
///
/// `∂_ω ψ_n = (1/4ω) [√(n(n−1)) ψ_{n−2} − √((n+1)(n+2)) ψ_{n+2}]`.
pub fn derivative_components(n: usize, omega: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(2);
    let nf = n as f64;
    if n >= 2 {
        out.push((n - 2, (nf * (nf - 1.0)).sqrt() / (4.0 * omega)));
    }
    out.push((n + 2, -((nf + 1.0) * (nf + 2.0)).sqrt() / (4.0 * omega)));
    out
}

/// Frequency derivative `∂_ω ψ_n(x; ω)` from the ladder form.
pub fn dpsi_domega(params: &WaveParams, x: f64) -> f64 {
    derivative_components(params.n, params.omega)
        .into_iter()
        .map(|(level, c)| c * psi_level(level, params.omega, x))
        .sum()
}

/// `∫ f*(x) g(x) dx` on `grid`.
pub fn overlap<F, G>(f: F, g: G, grid: &QuadratureGrid) -> Result<C64>
where
    F: Fn(f64) -> C64,
    G: Fn(f64) -> C64,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty quadrature grid".into()));
    }
    Ok(grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&x, &w)| f(x).conj() * g(x) * w)
        .sum())
}

/// `Tr[ρ_n (q − ⟨q⟩)^order]` for `order ∈ 1..=4`.
pub fn central_moment(params: &WaveParams, order: u32) -> Result<f64> {
    if !(1..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!(
            "moment order {order} not in 1..=4"
        )));
    }
    let grid = QuadratureGrid::for_mode(params.omega)?;
    let density = |x: f64| psi(params, x).powi(2);
    let mean = grid.integrate(|x| x * density(x));
    Ok(grid.integrate(|x| (x - mean).powi(order as i32) * density(x)))
}

/// Wigner function of `|n⟩`:
/// `W_n(q, p) = ((−1)ⁿ/π) e^{−2u} L_n(4u)`, `u = (ωq² + p²/ω)/2`.
pub fn wigner_fock(params: &WaveParams, q: f64, p: f64) -> f64 {
    let w = params.omega;
    let u = 0.5 * (w * q * q + p * p / w);
    let sign = if params.n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    sign / std::f64::consts::PI * (-2.0 * u).exp() * laguerre(params.n, 4.0 * u)
}
