//! Truncated Fock-space linear algebra.
//!
//! A mode truncated at `dim` keeps the levels `0..dim`. Two-mode operators and
//! states use the Kronecker ordering `index = i_first * dim_second + i_second`,
//! so the first mode is the slow index.
//!
//! Everything here is immutable after construction. [`DensityMatrix`] checks
//! its invariants (Hermitian, unit trace, positive semidefinite) once, when it
//! is built, and stores the Hermitian part `(ρ + ρ†)/2` so later
//! diagonalizations never see round-off asymmetry.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance on Hermiticity and unit trace of a density matrix.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted for a density matrix.
pub const NEG_EIGEN_TOL: f64 = -1e-10;
/// Eigenvalues below this are treated as exact zeros inside `ln`.
pub const EIGEN_CLIP: f64 = 1e-14;

/// A normalized state vector over a truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureKet {
    coeffs: CVector,
    omega: f64,
}

impl PureKet {
    pub fn new(coeffs: CVector, omega: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidDimension(
                "ket needs at least one level".into(),
            ));
        }
        check_omega(omega)?;
        let norm2: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > STATE_TOL {
            return Err(Error::ContractViolation(format!(
                "ket norm² = {norm2}, expected 1"
            )));
        }
        Ok(Self { coeffs, omega })
    }

    /// Equal-amplitude superposition `Σ_{i∈levels} |i⟩ / √N`.
    pub fn superposition(levels: &[usize], omega: f64, dim: usize) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidArgument("empty level set".into()));
        }
        let mut coeffs = CVector::zeros(dim);
        let amp = 1.0 / (levels.len() as f64).sqrt();
        for &n in levels {
            if n >= dim {
                return Err(Error::OutOfRange(format!("level {n} ≥ dim {dim}")));
            }
            if coeffs[n] != C64::new(0.0, 0.0) {
                return Err(Error::InvalidArgument(format!("level {n} repeated")));
            }
            coeffs[n] = C64::new(amp, 0.0);
        }
        Self::new(coeffs, omega)
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `|ψ⟩⟨ψ|` as a single-mode density matrix.
    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.coeffs * self.coeffs.adjoint();
        DensityMatrix::new(m, vec![self.dim()], vec![self.omega])
            .expect("outer product of a normalized ket is a valid state")
    }
}

/// Fock state `|n⟩` truncated at `dim`.
pub fn fock_ket(n: usize, omega: f64, dim: usize) -> Result<PureKet> {
    if n >= dim {
        return Err(Error::OutOfRange(format!("level {n} ≥ dim {dim}")));
    }
    let mut coeffs = CVector::zeros(dim);
    coeffs[n] = C64::new(1.0, 0.0);
    PureKet::new(coeffs, omega)
}

/// Hermitian, unit-trace, positive-semidefinite matrix over one or two modes.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    mode_dims: Vec<usize>,
    omegas: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, mode_dims: Vec<usize>, omegas: Vec<f64>) -> Result<Self> {
        if mode_dims.is_empty() || mode_dims.len() > 2 {
            return Err(Error::InvalidDimension(format!(
                "{} modes given, one or two supported",
                mode_dims.len()
            )));
        }
        if mode_dims.len() != omegas.len() {
            return Err(Error::InvalidDimension(
                "one frequency per mode required".into(),
            ));
        }
        for &w in &omegas {
            check_omega(w)?;
        }
        let total: usize = mode_dims.iter().product();
        if total == 0 || !matrix.is_square() || matrix.nrows() != total {
            return Err(Error::InvalidDimension(format!(
                "matrix is {}x{}, modes {:?} need {total}x{total}",
                matrix.nrows(),
                matrix.ncols(),
                mode_dims
            )));
        }
        let herm_dev = hermitian_deviation(&matrix);
        if herm_dev > STATE_TOL {
            return Err(Error::ContractViolation(format!(
                "density matrix not Hermitian (deviation {herm_dev:e})"
            )));
        }
        let matrix = hermitian_part(&matrix);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::ContractViolation(format!("trace {tr}, expected 1")));
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < NEG_EIGEN_TOL {
            return Err(Error::ContractViolation(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            matrix,
            mode_dims,
            omegas,
        })
    }

    /// Single-mode state diagonal in the Fock basis.
    pub fn diagonal(populations: &[f64], omega: f64) -> Result<Self> {
        let m = CMatrix::from_diagonal(&CVector::from_iterator(
            populations.len(),
            populations.iter().map(|&p| C64::new(p, 0.0)),
        ));
        Self::new(m, vec![populations.len()], vec![omega])
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn num_modes(&self) -> usize {
        self.mode_dims.len()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        // ρ is Hermitian, so Tr ρ² = Σ |ρ_ij|².
        self.matrix.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Populations ⟨k|ρ|k⟩.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.matrix[(k, k)].re).collect()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Return the single-mode state of `mode`, tracing out the other if present.
    pub fn mode_state(&self, mode: usize) -> Result<DensityMatrix> {
        match self.num_modes() {
            1 if mode == 0 => Ok(self.clone()),
            1 => Err(Error::OutOfRange(format!(
                "mode {mode} of a single-mode state"
            ))),
            _ => partial_trace(self, mode),
        }
    }

    /// Conjugate by a unitary: `U ρ U†`. The unitary is not checked.
    pub fn conjugate_by(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary {}x{} on state of dim {}",
                unitary.nrows(),
                unitary.ncols(),
                self.dim()
            )));
        }
        let m = unitary * &self.matrix * unitary.adjoint();
        DensityMatrix::new(m, self.mode_dims.clone(), self.omegas.clone())
    }
}

/// What an [`OperatorMatrix`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorKind {
    Annihilation,
    Number,
    Hamiltonian,
    Kraus,
    Generic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub matrix: CMatrix,
    pub kind: OperatorKind,
}

impl OperatorMatrix {
    pub fn new(matrix: CMatrix, kind: OperatorKind) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidDimension(format!(
                "operator must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, kind })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            matrix: self.matrix.adjoint(),
            kind: OperatorKind::Generic,
        }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }
}

/// Lowering operator `a` on `dim` levels: `a[n-1, n] = √n`.
pub fn annihilation_matrix(dim: usize) -> Result<OperatorMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    OperatorMatrix::new(m, OperatorKind::Annihilation)
}

/// Number operator `a†a`, built diagonally so the top level is exact.
pub fn number_matrix(dim: usize) -> Result<OperatorMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension("dim must be at least 1".into()));
    }
    let diag = CVector::from_iterator(dim, (0..dim).map(|n| C64::new(n as f64, 0.0)));
    OperatorMatrix::new(CMatrix::from_diagonal(&diag), OperatorKind::Number)
}

/// Kronecker product of two operators.
pub fn kron_ops(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Von Neumann entropy in nats, `−Σ λ ln λ`, ignoring eigenvalues below
/// [`EIGEN_CLIP`].
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_matrix(rho.matrix())
}

pub(crate) fn entropy_of_matrix(m: &CMatrix) -> Result<f64> {
    let dev = hermitian_deviation(m);
    if dev > STATE_TOL {
        return Err(Error::ContractViolation(format!(
            "entropy of a non-Hermitian matrix (deviation {dev:e})"
        )));
    }
    let s = hermitian_eigenvalues(m)
        .into_iter()
        .filter(|&l| l > EIGEN_CLIP)
        .map(|l| -l * l.ln())
        .sum::<f64>();
    Ok(s.max(0.0))
}

/// Uhlmann fidelity `(Tr √(√ρ₁ ρ₂ √ρ₁))²`.
///
/// When either argument is pure this reduces to `Tr[ρ₁ρ₂]`, which is what gets
/// evaluated; otherwise see [`fidelity_general`].
pub fn fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho1.dim(), rho2.dim())?;
    if rho1.purity() > 1.0 - 1e-12 || rho2.purity() > 1.0 - 1e-12 {
        let overlap: C64 = rho1
            .matrix()
            .iter()
            .zip(rho2.matrix().transpose().iter())
            .map(|(a, b)| a * b)
            .sum();
        return Ok(overlap.re.clamp(0.0, 1.0));
    }
    fidelity_general(rho1, rho2)
}

/// Fidelity through explicit matrix square roots, with no pure-state shortcut.
pub fn fidelity_general(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho1.dim(), rho2.dim())?;
    let sqrt1 = psd_sqrt(rho1.matrix());
    let inner = hermitian_part(&(&sqrt1 * rho2.matrix() * &sqrt1));
    let eigs = hermitian_eigenvalues(&inner);
    // round-off eigenvalues of a rank-deficient product would contribute √ε
    let floor = EIGEN_CLIP * eigs.iter().fold(0.0_f64, |m, &l| m.max(l));
    let tr: f64 = eigs.into_iter().filter(|&l| l > floor).map(f64::sqrt).sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Reduced state of mode `keep` of a two-mode state.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    if rho.num_modes() != 2 {
        return Err(Error::InvalidDimension(format!(
            "partial trace needs a two-mode state, got {} mode(s)",
            rho.num_modes()
        )));
    }
    if keep > 1 {
        return Err(Error::OutOfRange(format!("keep = {keep}, must be 0 or 1")));
    }
    let (da, db) = (rho.mode_dims()[0], rho.mode_dims()[1]);
    let m = rho.matrix();
    let reduced = if keep == 0 {
        CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        })
    } else {
        CMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m[(k * db + i, k * db + j)]).sum()
        })
    };
    let dims = vec![rho.mode_dims()[keep]];
    let omegas = vec![rho.omegas()[keep]];
    DensityMatrix::new(reduced, dims, omegas)
}

/// `ρ_A ⊗ ρ_B`; both factors must be single-mode.
pub fn tensor(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<DensityMatrix> {
    if rho_a.num_modes() + rho_b.num_modes() > 2 {
        return Err(Error::InvalidDimension(
            "tensor product beyond two modes is not supported".into(),
        ));
    }
    let m = rho_a.matrix().kronecker(rho_b.matrix());
    let dims = [rho_a.mode_dims(), rho_b.mode_dims()].concat();
    let omegas = [rho_a.omegas(), rho_b.omegas()].concat();
    DensityMatrix::new(m, dims, omegas)
}

/// `Tr[op · ρ]`.
pub fn expectation(op: &OperatorMatrix, rho: &DensityMatrix) -> Result<C64> {
    check_same_dim(op.dim(), rho.dim())?;
    Ok(trace_of_product(&op.matrix, rho.matrix()))
}

pub(crate) fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigendecomposition of a Hermitian operator, reusable for `exp(−iHt)`.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix, tol: f64) -> Result<Self> {
        let dev = hermitian_deviation(h);
        if dev > tol {
            return Err(Error::ContractViolation(format!(
                "operator not Hermitian (deviation {dev:e})"
            )));
        }
        let eig = SymmetricEigen::new(hermitian_part(h));
        Ok(Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    /// `exp(−i H t)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let phases = CVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues
                .iter()
                .map(|&e| C64::from_polar(1.0, -e * t)),
        );
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * v.adjoint()
    }
}

pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).unscale(2.0)
}

pub(crate) fn hermitian_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(eig.eigenvalues[j].max(0.0).sqrt(), 0.0);
    }
    scaled * v.adjoint()
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} vs {b}")));
    }
    Ok(())
}

pub(crate) fn check_omega(omega: f64) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {omega}"
        )));
    }
    Ok(())
}
