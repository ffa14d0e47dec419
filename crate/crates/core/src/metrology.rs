//! Quantum Fisher information for frequency estimation.
//!
//! Every QFI here is in units of ω⁻² and, for the probe families considered,
//! scales exactly as `F(cω) = F(ω)/c²`.
//!
//! Superpositions get two treatments. [`qfi_superposition_averaged`] averages
//! the Fock-state QFIs, which assumes `⟨∂ψᵢ|∂ψⱼ⟩ = 0` for all `i ≠ j`.
//! [`qfi_superposition_exact`] keeps every cross term; the two agree unless
//! the level set contains a pair `(i, i+4)`, where the derivative overlap is
//! `−√((i+1)(i+2)(i+3)(i+4))/(16ω²)` and the exact value is smaller.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_omega, CVector, PureKet};
use crate::quadrature::QuadratureGrid;
use crate::wavefunction::{derivative_components, psi_level, WaveParams, MAX_LEVEL};

/// Largest level allowed in an exact superposition (its derivative reaches level + 2).
pub const MAX_SUPERPOSITION_LEVEL: usize = MAX_LEVEL - 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "levels")]
pub enum Probe {
    Fock(usize),
    Superposition(Vec<usize>),
    GaussianReference(usize),
    GaussianMoments,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiMethod {
    ClosedForm,
    DerivativeNumeric,
    GaussianFormula,
    SuperpositionAveraged,
    SuperpositionExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CramerRaoBound {
    pub n_meas: u64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfiReport {
    pub omega: f64,
    pub probe: Probe,
    pub qfi: f64,
    pub method: QfiMethod,
    pub crb: Option<CramerRaoBound>,
}

impl QfiReport {
    fn new(omega: f64, probe: Probe, qfi: f64, method: QfiMethod) -> Self {
        Self {
            omega,
            probe,
            qfi,
            method,
            crb: None,
        }
    }

    /// Attach the Cramér-Rao bound for `n_meas` repetitions.
    pub fn with_crb(mut self, n_meas: u64) -> Result<Self> {
        let bound = cramer_rao(self.qfi, n_meas)?;
        self.crb = Some(CramerRaoBound { n_meas, bound });
        Ok(self)
    }
}

/// `(n² + n + 1) / (2ω²)`.
pub fn qfi_fock_closed(n: usize, omega: f64) -> Result<QfiReport> {
    check_omega(omega)?;
    let nf = n as f64;
    let qfi = (nf * nf + nf + 1.0) / (2.0 * omega * omega);
    Ok(QfiReport::new(
        omega,
        Probe::Fock(n),
        qfi,
        QfiMethod::ClosedForm,
    ))
}

/// The two inner products entering the pure-state QFI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureQfiTerms {
    /// `⟨∂ψ|∂ψ⟩`
    pub derivative_norm: f64,
    /// `⟨ψ|∂ψ⟩`
    pub state_derivative_overlap: C64,
    /// `⟨ψ|ψ⟩`, a quadrature diagnostic
    pub norm: f64,
}

impl PureQfiTerms {
    pub fn qfi(&self) -> f64 {
        4.0 * (self.derivative_norm - self.state_derivative_overlap.norm_sqr())
    }
}

/// Quadrature evaluation of the pure-state terms for `|n⟩`.
pub fn pure_qfi_terms(n: usize, omega: f64) -> Result<PureQfiTerms> {
    let params = WaveParams::new(n, omega)?;
    let ket = CVector::from_iterator(
        n + 1,
        (0..=n).map(|k| C64::new(if k == n { 1.0 } else { 0.0 }, 0.0)),
    );
    ket_terms_quadrature(&ket, params.omega())
}

fn ket_terms_quadrature(coeffs: &CVector, omega: f64) -> Result<PureQfiTerms> {
    let grid = QuadratureGrid::for_mode(omega)?;
    let mut norm = 0.0;
    let mut dnorm = 0.0;
    let mut cross = C64::new(0.0, 0.0);
    let support: Vec<(usize, C64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(k, &c)| (k, c))
        .collect();
    for (&x, &w) in grid.nodes().iter().zip(grid.weights()) {
        let mut f = C64::new(0.0, 0.0);
        let mut df = C64::new(0.0, 0.0);
        for &(k, c) in &support {
            f += c * psi_level(k, omega, x);
            let d: f64 = derivative_components(k, omega)
                .into_iter()
                .map(|(level, a)| a * psi_level(level, omega, x))
                .sum();
            df += c * d;
        }
        norm += w * f.norm_sqr();
        dnorm += w * df.norm_sqr();
        cross += w * f.conj() * df;
    }
    if (norm - 1.0).abs() > 1e-8 || !dnorm.is_finite() {
        return Err(Error::Numeric(format!(
            "quadrature lost accuracy: ⟨ψ|ψ⟩ = {norm}, ⟨∂ψ|∂ψ⟩ = {dnorm} on {} nodes",
            grid.len()
        )));
    }
    Ok(PureQfiTerms {
        derivative_norm: dnorm,
        state_derivative_overlap: cross,
        norm,
    })
}

/// Pure-state QFI `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)` for `|n⟩`, by quadrature of the
/// analytic frequency derivative.
pub fn qfi_pure_numeric(n: usize, omega: f64) -> Result<QfiReport> {
    let terms = pure_qfi_terms(n, omega)?;
    Ok(QfiReport::new(
        omega,
        Probe::Fock(n),
        terms.qfi(),
        QfiMethod::DerivativeNumeric,
    ))
}

/// Derivative of a smooth scalar function by Ridders' extrapolation of
/// central differences. Returns the estimate and its error estimate.
pub fn ridders_derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> (f64, f64) {
    const SHRINK: f64 = 1.4;
    const SHRINK2: f64 = SHRINK * SHRINK;
    const TABLE: usize = 10;
    const SAFE: f64 = 2.0;

    let mut a = [[0.0_f64; TABLE]; TABLE];
    let mut h = h0;
    a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..TABLE {
        h /= SHRINK;
        a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
        let mut fac = SHRINK2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= SHRINK2;
            let e = (a[j][i] - a[j - 1][i])
                .abs()
                .max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    (best, err)
}

/// Initial Ridders step, relative to ω.
pub const GAUSSIAN_DERIV_REL_STEP: f64 = 0.1;

/// Single-mode Gaussian QFI from the first and second moments,
///
/// `F = ½ Tr[(σ⁻¹σ′)²]/(1 + P²) + 2P′²/(1 − P⁴) + d′ᵀ σ⁻¹ d′`, `P = det(σ)^{−1/2}`,
///
/// with all ω-derivatives taken numerically. For a pure reference (`P = 1`)
/// the purity term is dropped: `P` is maximal there, so `P′ = 0`.
pub fn qfi_gaussian_formula<S, D>(sigma_fn: S, d_fn: D, omega: f64) -> Result<QfiReport>
where
    S: Fn(f64) -> Matrix2<f64>,
    D: Fn(f64) -> Vector2<f64>,
{
    check_omega(omega)?;
    let sigma = sigma_fn(omega);
    let inv = sigma
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Numeric(format!("singular covariance matrix at ω = {omega}")))?;
    let h = GAUSSIAN_DERIV_REL_STEP * omega;

    let mut dsigma = Matrix2::zeros();
    for r in 0..2 {
        for c in 0..2 {
            dsigma[(r, c)] = ridders_derivative(|w| sigma_fn(w)[(r, c)], omega, h).0;
        }
    }
    let purity = |w: f64| sigma_fn(w).determinant().powf(-0.5);
    let p = purity(omega);
    let dp = ridders_derivative(purity, omega, h).0;
    let dd = Vector2::new(
        ridders_derivative(|w| d_fn(w)[0], omega, h).0,
        ridders_derivative(|w| d_fn(w)[1], omega, h).0,
    );

    let m = inv * dsigma;
    let covariance_term = 0.5 * (m * m).trace() / (1.0 + p * p);
    let purity_term = if 1.0 - p.powi(4) > 1e-10 {
        2.0 * dp * dp / (1.0 - p.powi(4))
    } else {
        0.0
    };
    let displacement_term = (dd.transpose() * inv * dd)[(0, 0)];
    let qfi = covariance_term + purity_term + displacement_term;
    if !qfi.is_finite() || qfi < -1e-12 {
        return Err(Error::Numeric(format!(
            "Gaussian QFI evaluated to {qfi} at ω = {omega}"
        )));
    }
    Ok(QfiReport::new(
        omega,
        Probe::GaussianMoments,
        qfi.max(0.0),
        QfiMethod::GaussianFormula,
    ))
}

/// `(2n+1)² / ([(2n+1)² + 1] ω²)`: QFI of the Gaussian state sharing the
/// moments of `|n⟩`.
pub fn qfi_gaussian_fock(n: usize, omega: f64) -> Result<QfiReport> {
    check_omega(omega)?;
    let k2 = (2.0 * n as f64 + 1.0).powi(2);
    let qfi = k2 / ((k2 + 1.0) * omega * omega);
    Ok(QfiReport::new(
        omega,
        Probe::GaussianReference(n),
        qfi,
        QfiMethod::ClosedForm,
    ))
}

/// Cramér-Rao bound `1 / (N F)` on the estimator variance.
pub fn cramer_rao(qfi: f64, n_meas: u64) -> Result<f64> {
    if n_meas == 0 {
        return Err(Error::InvalidArgument(
            "at least one measurement required".into(),
        ));
    }
    if qfi.is_nan() || qfi <= 0.0 {
        return Err(Error::UnboundedVariance(format!(
            "QFI = {qfi} gives no finite variance bound"
        )));
    }
    Ok(1.0 / (n_meas as f64 * qfi))
}

/// Advantage of `|n⟩` over the vacuum. The raw QFI ratio is `n² + n + 1`;
/// `log_scaled` is `10 ln(ratio)`. Both are frequency independent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeAdvantage {
    pub ratio: f64,
    pub log_scaled: f64,
}

pub fn relative_advantage(n: usize) -> RelativeAdvantage {
    let nf = n as f64;
    let ratio = nf * nf + nf + 1.0;
    RelativeAdvantage {
        ratio,
        log_scaled: 10.0 * ratio.ln(),
    }
}

/// QFI per unit energy above the vacuum, `(n² + n + 1) / (2 n ω³)`.
pub fn qfi_per_energy(n: usize, omega: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::UndefinedRatio("zero energy gap for n = 0".into()));
    }
    let qfi = qfi_fock_closed(n, omega)?.qfi;
    Ok(qfi / (omega * n as f64))
}

fn check_levels(levels: &[usize]) -> Result<Vec<usize>> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("empty level set".into()));
    }
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!(
            "repeated level in {levels:?}"
        )));
    }
    Ok(sorted)
}

/// Mean of the Fock-state QFIs over `levels`.
pub fn qfi_superposition_averaged(levels: &[usize], omega: f64) -> Result<QfiReport> {
    let sorted = check_levels(levels)?;
    let sum = sorted
        .iter()
        .map(|&n| qfi_fock_closed(n, omega).map(|r| r.qfi))
        .sum::<Result<f64>>()?;
    Ok(QfiReport::new(
        omega,
        Probe::Superposition(sorted.clone()),
        sum / sorted.len() as f64,
        QfiMethod::SuperpositionAveraged,
    ))
}

/// Pairs `(i, i+4)` inside `levels`: where the averaged formula is not exact.
pub fn coupled_pairs(levels: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &i in levels {
        if levels.contains(&(i + 4)) {
            out.push((i, i + 4));
        }
    }
    out.sort_unstable();
    out
}

/// Fock-basis coefficients of `∂_ω|ψ⟩` for a ket whose amplitudes do not depend
/// on ω. The result has two more levels than the ket.
pub fn ket_derivative(ket: &PureKet) -> CVector {
    let omega = ket.omega();
    let mut out = CVector::zeros(ket.dim() + 2);
    for (k, &c) in ket.coeffs().iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            continue;
        }
        for (level, a) in derivative_components(k, omega) {
            out[level] += c * a;
        }
    }
    out
}

/// Exact pure-state QFI of `ket` from its ladder-form derivative.
pub fn qfi_pure_ket(ket: &PureKet) -> f64 {
    let d = ket_derivative(ket);
    let c = ket
        .coeffs()
        .clone()
        .resize_vertically(ket.dim() + 2, C64::new(0.0, 0.0));
    let dnorm = d.norm_squared();
    let cross = c.dotc(&d);
    4.0 * (dnorm - cross.norm_sqr())
}

/// Exact pure-state QFI of `ket` by quadrature in position space.
pub fn qfi_ket_quadrature(ket: &PureKet) -> Result<f64> {
    if ket.dim() > MAX_SUPERPOSITION_LEVEL + 1 {
        return Err(Error::OutOfRange(format!(
            "ket has {} levels, at most {} supported",
            ket.dim(),
            MAX_SUPERPOSITION_LEVEL + 1
        )));
    }
    Ok(ket_terms_quadrature(ket.coeffs(), ket.omega())?.qfi())
}

/// QFI of `Σ_{i∈levels}|i⟩/√N` including all cross terms.
pub fn qfi_superposition_exact(levels: &[usize], omega: f64) -> Result<QfiReport> {
    let sorted = check_levels(levels)?;
    let top = *sorted.last().expect("non-empty");
    if top > MAX_SUPERPOSITION_LEVEL {
        return Err(Error::OutOfRange(format!(
            "level {top} above {MAX_SUPERPOSITION_LEVEL}: derivative leaves the truncation"
        )));
    }
    let ket = PureKet::superposition(&sorted, omega, top + 1)?;
    Ok(QfiReport::new(
        omega,
        Probe::Superposition(sorted),
        qfi_pure_ket(&ket),
        QfiMethod::SuperpositionExact,
    ))
}
