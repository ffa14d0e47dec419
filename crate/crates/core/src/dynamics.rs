//! Excitation transfer between a probe mode S and an ancilla mode A under
//!
//! `H = ω_S a†a + ω_A b†b + γ (a†b + a b†)`.
//!
//! The probe starts in `|0⟩` and the ancilla in `|m⟩`. On resonance the
//! exchange moves the ancilla excitations into the probe at `t* = π/(2γ)`.
//! Mode S is the first tensor factor.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian_ref::{
    moments_of_state, ng_degree, reference_gaussian_entropy, two_mode_reference_entropy,
};
use crate::hilbert::{
    annihilation_matrix, fidelity, fock_ket, number_matrix, partial_trace, tensor,
    von_neumann_entropy, CMatrix, DensityMatrix, HermitianEigen, OperatorKind, OperatorMatrix,
};

/// Largest top-level population tolerated before a run is declared leaky.
pub const LEAKAGE_TOL: f64 = 1e-8;
/// A swap is complete once the probe fidelity reaches `1 − SWAP_TOL`.
pub const SWAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub omega_s: f64,
    pub omega_a: f64,
    pub gamma: f64,
    pub ancilla_level: usize,
    pub dim: usize,
    pub t_grid: Vec<f64>,
}

impl ProtocolConfig {
    pub fn new(
        omega_s: f64,
        omega_a: f64,
        gamma: f64,
        ancilla_level: usize,
        dim: usize,
        t_grid: Vec<f64>,
    ) -> Result<Self> {
        for (name, w) in [("omega_s", omega_s), ("omega_a", omega_a)] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {w}")));
            }
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Domain(format!("gamma must be ≥ 0, got {gamma}")));
        }
        if dim <= ancilla_level + 1 {
            return Err(Error::InvalidDimension(format!(
                "dim {dim} must exceed ancilla level + 1 = {}",
                ancilla_level + 1
            )));
        }
        if t_grid.first() != Some(&0.0) {
            return Err(Error::InvalidArgument("time grid must start at 0".into()));
        }
        if t_grid
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidArgument(
                "time grid must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            omega_s,
            omega_a,
            gamma,
            ancilla_level,
            dim,
            t_grid,
        })
    }

    /// Resonant modes at ω = 1, truncated at `m + 4` levels, sampled on
    /// `count` points from 0 to the swap time `π/(2γ)`.
    pub fn resonant(gamma: f64, ancilla_level: usize, count: usize) -> Result<Self> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::Domain(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let grid = linspace(0.0, swap_time(gamma), count)?;
        Self::new(1.0, 1.0, gamma, ancilla_level, ancilla_level + 4, grid)
    }
}

/// `π/(2γ)`: swap time on resonance.
pub fn swap_time(gamma: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / gamma
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs ≥ 2 points, got {count}"
        )));
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|k| start + step * k as f64).collect();
    out[count - 1] = stop;
    Ok(out)
}

/// Exchange Hamiltonian on the `dim²` two-mode space.
pub fn build_hamiltonian(cfg: &ProtocolConfig) -> Result<OperatorMatrix> {
    let d = cfg.dim;
    let a = annihilation_matrix(d)?.matrix;
    let n = number_matrix(d)?.matrix;
    let id = CMatrix::identity(d, d);
    let free = n.kronecker(&id).scale(cfg.omega_s) + id.kronecker(&n).scale(cfg.omega_a);
    let hop = a.adjoint().kronecker(&a) + a.kronecker(&a.adjoint());
    OperatorMatrix::new(free + hop.scale(cfg.gamma), OperatorKind::Hamiltonian)
}

/// Total excitation number `a†a + b†b` for per-mode truncation `dim`.
pub fn total_number(dim: usize) -> Result<OperatorMatrix> {
    let n = number_matrix(dim)?.matrix;
    let id = CMatrix::identity(dim, dim);
    OperatorMatrix::new(n.kronecker(&id) + id.kronecker(&n), OperatorKind::Number)
}

/// `exp(−iHt)` for many `t`, diagonalizing `H` once.
#[derive(Clone, Debug)]
pub struct Propagator {
    eigen: HermitianEigen,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        Ok(Self {
            eigen: HermitianEigen::new(&h.matrix, 1e-12)?,
        })
    }

    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if t == 0.0 {
            return Ok(rho0.clone());
        }
        rho0.conjugate_by(&self.eigen.unitary(t))
    }
}

/// `U ρ₀ U†`, `U = exp(−iHt)`.
pub fn evolve(rho0: &DensityMatrix, h: &OperatorMatrix, t: f64) -> Result<DensityMatrix> {
    if h.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian dim {} vs state dim {}",
            h.dim(),
            rho0.dim()
        )));
    }
    Propagator::new(h)?.evolve(rho0, t)
}

fn require_two_modes(rho: &DensityMatrix) -> Result<()> {
    if rho.num_modes() != 2 {
        return Err(Error::InvalidDimension(format!(
            "two-mode state required, got {} mode(s)",
            rho.num_modes()
        )));
    }
    Ok(())
}

/// `I_SA = S(ρ_S) + S(ρ_A) − S(ρ)`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    require_two_modes(rho)?;
    let s = von_neumann_entropy(&partial_trace(rho, 0)?)?;
    let a = von_neumann_entropy(&partial_trace(rho, 1)?)?;
    let joint = von_neumann_entropy(rho)?;
    Ok(s + a - joint)
}

/// Every term of the balance `ΔI_SA = ΔS − δ_nG,S − δ_nG,A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InformationBalance {
    pub mutual_info: f64,
    pub mutual_info_gaussian: f64,
    pub entropy: f64,
    pub entropy_gaussian: f64,
    pub ng_system: f64,
    pub ng_ancilla: f64,
}

impl InformationBalance {
    pub fn delta_mutual_info(&self) -> f64 {
        self.mutual_info - self.mutual_info_gaussian
    }

    pub fn delta_entropy(&self) -> f64 {
        self.entropy_gaussian - self.entropy
    }

    pub fn residual(&self) -> f64 {
        (self.delta_mutual_info() - (self.delta_entropy() - self.ng_system - self.ng_ancilla)).abs()
    }
}

/// Evaluate the information balance of a two-mode state.
///
/// The global reference Gaussian takes the full 4×4 covariance matrix of `ρ`,
/// cross-mode blocks included; its entropy comes from the two symplectic
/// eigenvalues. The single-mode references are built from each reduced state.
pub fn information_balance(rho: &DensityMatrix) -> Result<InformationBalance> {
    require_two_modes(rho)?;
    let rho_s = partial_trace(rho, 0)?;
    let rho_a = partial_trace(rho, 1)?;
    let s_s = von_neumann_entropy(&rho_s)?;
    let s_a = von_neumann_entropy(&rho_a)?;
    let entropy = von_neumann_entropy(rho)?;
    let g_s = reference_gaussian_entropy(&moments_of_state(&rho_s, 0)?)?;
    let g_a = reference_gaussian_entropy(&moments_of_state(&rho_a, 0)?)?;
    let entropy_gaussian = two_mode_reference_entropy(rho)?;
    Ok(InformationBalance {
        mutual_info: s_s + s_a - entropy,
        mutual_info_gaussian: g_s + g_a - entropy_gaussian,
        entropy,
        entropy_gaussian,
        ng_system: ng_degree(&rho_s, 0)?,
        ng_ancilla: ng_degree(&rho_a, 0)?,
    })
}

/// `|ΔI_SA − (ΔS − δ_nG,S − δ_nG,A)|`; zero up to round-off.
pub fn balance_residual(rho: &DensityMatrix) -> Result<f64> {
    Ok(information_balance(rho)?.residual())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EvolutionRow {
    pub t: f64,
    pub ng_system: f64,
    pub ng_ancilla: f64,
    pub mutual_info: f64,
    pub fidelity: f64,
    pub balance_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub rows: Vec<EvolutionRow>,
}

impl EvolutionTrace {
    pub const COLUMNS: [&'static str; 6] = [
        "t",
        "ng_system",
        "ng_ancilla",
        "mutual_info",
        "fidelity",
        "balance_residual",
    ];

    /// Check the sign and range constraints on every row.
    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if r.ng_system < -1e-10 || r.ng_ancilla < -1e-10 || r.mutual_info < -1e-10 {
                return Err(Error::ContractViolation(format!(
                    "negative information quantity at t = {}",
                    r.t
                )));
            }
            if !(r.fidelity >= 0.0 && r.fidelity <= 1.0 + 1e-10) {
                return Err(Error::ContractViolation(format!(
                    "fidelity {} at t = {}",
                    r.fidelity, r.t
                )));
            }
        }
        Ok(())
    }
}

/// `|0⟩⟨0| ⊗ |m⟩⟨m|`.
pub fn initial_state(cfg: &ProtocolConfig) -> Result<DensityMatrix> {
    let s = fock_ket(0, cfg.omega_s, cfg.dim)?.to_density();
    let a = fock_ket(cfg.ancilla_level, cfg.omega_a, cfg.dim)?.to_density();
    tensor(&s, &a)
}

fn check_leakage(rho: &DensityMatrix, t: f64) -> Result<()> {
    for mode in 0..2 {
        let local = partial_trace(rho, mode)?;
        let top = local.populations()[local.dim() - 1];
        if top > LEAKAGE_TOL {
            return Err(Error::Leakage(format!(
                "mode {mode} has population {top:e} in its top level at t = {t}"
            )));
        }
    }
    Ok(())
}

struct Evolver {
    cfg: ProtocolConfig,
    rho0: DensityMatrix,
    target: DensityMatrix,
    propagator: Propagator,
}

impl Evolver {
    fn new(cfg: &ProtocolConfig) -> Result<Self> {
        let h = build_hamiltonian(cfg)?;
        Ok(Self {
            cfg: cfg.clone(),
            rho0: initial_state(cfg)?,
            target: fock_ket(cfg.ancilla_level, cfg.omega_s, cfg.dim)?.to_density(),
            propagator: Propagator::new(&h)?,
        })
    }

    fn state(&self, t: f64) -> Result<DensityMatrix> {
        let rho = self.propagator.evolve(&self.rho0, t)?;
        check_leakage(&rho, t)?;
        Ok(rho)
    }

    fn fidelity(&self, t: f64) -> Result<f64> {
        fidelity(&partial_trace(&self.state(t)?, 0)?, &self.target)
    }

    fn row(&self, t: f64) -> Result<EvolutionRow> {
        let rho = self.state(t)?;
        let balance = information_balance(&rho)?;
        Ok(EvolutionRow {
            t,
            ng_system: balance.ng_system,
            ng_ancilla: balance.ng_ancilla,
            mutual_info: balance.mutual_info,
            fidelity: fidelity(&partial_trace(&rho, 0)?, &self.target)?,
            balance_residual: balance.residual(),
        })
    }
}

/// Run the transfer protocol over `cfg.t_grid`.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<EvolutionTrace> {
    let ev = Evolver::new(cfg)?;
    let rows = ev
        .cfg
        .t_grid
        .par_iter()
        .map(|&t| ev.row(t))
        .collect::<Result<Vec<_>>>()?;
    let trace = EvolutionTrace { rows };
    trace.validate()?;
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SwapTime {
    pub t: f64,
    pub fidelity: f64,
    /// Whether `fidelity ≥ 1 − SWAP_TOL`.
    pub complete: bool,
}

/// Locate the swap time: the first grid point with fidelity `≥ 1 − SWAP_TOL`
/// (or the grid maximum if none qualifies), refined by golden-section search
/// between its neighbours.
pub fn find_swap_time(cfg: &ProtocolConfig, trace: &EvolutionTrace) -> Result<SwapTime> {
    if trace.rows.is_empty() {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    let idx = trace
        .rows
        .iter()
        .position(|r| r.fidelity >= 1.0 - SWAP_TOL)
        .unwrap_or_else(|| {
            trace
                .rows
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.fidelity.total_cmp(&b.1.fidelity))
                .map(|(i, _)| i)
                .expect("non-empty")
        });
    let lo = trace.rows[idx.saturating_sub(1)].t;
    let hi = trace.rows[(idx + 1).min(trace.rows.len() - 1)].t;
    let ev = Evolver::new(cfg)?;
    let (t, f) = golden_section_max(|t| ev.fidelity(t), lo, hi, 1e-12)?;
    let (t, f) = if trace.rows[idx].fidelity > f {
        (trace.rows[idx].t, trace.rows[idx].fidelity)
    } else {
        (t, f)
    };
    Ok(SwapTime {
        t,
        fidelity: f,
        complete: f >= 1.0 - SWAP_TOL,
    })
}

fn golden_section_max(
    f: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, f(t)?))
}
