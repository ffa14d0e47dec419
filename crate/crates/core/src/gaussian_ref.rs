//! First and second moments, reference Gaussian states and the
//! relative-entropy non-Gaussianity degree.
//!
//! Quadratures are `q = (a + a†)/√(2ω)` and `p = i√(ω/2)(a† − a)` with ħ = 1.
//! Covariances carry no factor ½: `σᵢⱼ = ⟨RᵢRⱼ + RⱼRᵢ⟩ − 2⟨Rᵢ⟩⟨Rⱼ⟩`, so the
//! vacuum has `det σ = 1` and a single-mode Gaussian state with symplectic
//! eigenvalue `ν = √det σ` is thermal with `ñ = (ν − 1)/2`.

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation_matrix, check_omega, number_matrix, trace_of_product, von_neumann_entropy,
    CMatrix, DensityMatrix,
};

/// Slack on the uncertainty bound `det σ ≥ 1`.
pub const UNCERTAINTY_TOL: f64 = 1e-10;
/// Non-Gaussianity values above `−NG_CLAMP_TOL` are clamped to zero.
pub const NG_CLAMP_TOL: f64 = 1e-10;

/// First moments `d = (⟨q⟩, ⟨p⟩)` and covariance matrix of one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianMoments {
    pub d: Vector2<f64>,
    pub sigma: Matrix2<f64>,
    pub omega: f64,
}

impl GaussianMoments {
    pub fn new(d: Vector2<f64>, sigma: Matrix2<f64>, omega: f64) -> Result<Self> {
        check_omega(omega)?;
        let asym = (sigma[(0, 1)] - sigma[(1, 0)]).abs();
        if asym > 1e-12 * sigma.norm().max(1.0) {
            return Err(Error::ContractViolation(format!(
                "σ not symmetric ({asym:e})"
            )));
        }
        let det = sigma.determinant();
        if det < 1.0 - UNCERTAINTY_TOL {
            return Err(Error::ContractViolation(format!(
                "det σ = {det} violates the uncertainty bound"
            )));
        }
        Ok(Self { d, sigma, omega })
    }

    pub fn det(&self) -> f64 {
        self.sigma.determinant()
    }
}

/// Moments of `|n⟩`: `d = 0`, `σ = diag((2n+1)/ω, (2n+1)ω)`.
pub fn moments_of_fock(n: usize, omega: f64) -> Result<GaussianMoments> {
    check_omega(omega)?;
    let k = 2.0 * n as f64 + 1.0;
    GaussianMoments::new(
        Vector2::zeros(),
        Matrix2::new(k / omega, 0.0, 0.0, k * omega),
        omega,
    )
}

struct LadderMoments {
    a: C64,
    a2: C64,
    n: f64,
}

fn ladder_moments(rho: &DensityMatrix) -> Result<LadderMoments> {
    let dim = rho.dim();
    let a = annihilation_matrix(dim)?.matrix;
    let a2 = &a * &a;
    let num = number_matrix(dim)?.matrix;
    Ok(LadderMoments {
        a: trace_of_product(&a, rho.matrix()),
        a2: trace_of_product(&a2, rho.matrix()),
        n: trace_of_product(&num, rho.matrix()).re,
    })
}

/// Moments of one mode of `rho`, from ladder-operator expectations.
///
/// Second moments use `[a, a†] = 1` analytically, so a truncated basis does
/// not corrupt them unless the top level is populated.
pub fn moments_of_state(rho: &DensityMatrix, mode: usize) -> Result<GaussianMoments> {
    let local = rho.mode_state(mode)?;
    let omega = local.omegas()[0];
    let LadderMoments { a, a2, n } = ladder_moments(&local)?;

    let q = (2.0 / omega).sqrt() * a.re;
    let p = (2.0 * omega).sqrt() * a.im;
    let q2 = (2.0 * a2.re + 2.0 * n + 1.0) / (2.0 * omega);
    let p2 = -0.5 * omega * (2.0 * a2.re - 2.0 * n - 1.0);
    let qp_sym = 2.0 * a2.im;

    let sigma = Matrix2::new(
        2.0 * q2 - 2.0 * q * q,
        qp_sym - 2.0 * q * p,
        qp_sym - 2.0 * q * p,
        2.0 * p2 - 2.0 * p * p,
    );
    GaussianMoments::new(Vector2::new(q, p), sigma, omega)
}

/// Symplectic eigenvalue `ν = √det σ ≥ 1`; the reference Gaussian has purity `1/ν`.
pub fn symplectic_nu(m: &GaussianMoments) -> Result<f64> {
    let det = m.det();
    if det < 1.0 - UNCERTAINTY_TOL {
        return Err(Error::ContractViolation(format!("det σ = {det} < 1")));
    }
    Ok(det.max(1.0).sqrt())
}

/// Entropy of a thermal state with mean occupation `nbar`:
/// `(ñ+1) ln(ñ+1) − ñ ln ñ`.
pub fn thermal_entropy(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln()
}

/// Entropy of a Gaussian mode with symplectic eigenvalue `nu`.
pub fn entropy_from_nu(nu: f64) -> f64 {
    thermal_entropy(0.5 * (nu - 1.0))
}

/// Von Neumann entropy of the Gaussian state sharing the moments `m`.
pub fn reference_gaussian_entropy(m: &GaussianMoments) -> Result<f64> {
    Ok(entropy_from_nu(symplectic_nu(m)?))
}

/// `δ_nG = S(ρ_G) − S(ρ)` for one mode of `rho`, clamped at zero.
pub fn ng_degree(rho: &DensityMatrix, mode: usize) -> Result<f64> {
    let local = rho.mode_state(mode)?;
    let s_g = reference_gaussian_entropy(&moments_of_state(&local, 0)?)?;
    let s = von_neumann_entropy(&local)?;
    let delta = s_g - s;
    if delta < -NG_CLAMP_TOL {
        return Err(Error::ContractViolation(format!(
            "negative non-Gaussianity {delta:e}"
        )));
    }
    Ok(delta.max(0.0))
}

/// Closed form for Fock states, `(n+1) ln(n+1) − n ln n`; independent of ω.
pub fn ng_degree_fock(n: usize) -> f64 {
    thermal_entropy(n as f64)
}

/// Full 4×4 covariance matrix of a two-mode state in the ordering
/// `(q_S, p_S, q_A, p_A)`.
pub fn two_mode_covariance(rho: &DensityMatrix) -> Result<Matrix4<f64>> {
    if rho.num_modes() != 2 {
        return Err(Error::InvalidDimension("two-mode state required".into()));
    }
    let ms = moments_of_state(rho, 0)?;
    let ma = moments_of_state(rho, 1)?;

    let (ds, da) = (rho.mode_dims()[0], rho.mode_dims()[1]);
    let (ws, wa) = (rho.omegas()[0], rho.omegas()[1]);
    let quads = |dim: usize, omega: f64| -> Result<[CMatrix; 2]> {
        let a = annihilation_matrix(dim)?.matrix;
        let ad = a.adjoint();
        let q = (&a + &ad).scale((0.5 / omega).sqrt());
        let p = (&ad - &a) * C64::new(0.0, (0.5 * omega).sqrt());
        Ok([q, p])
    };
    let rs = quads(ds, ws)?;
    let ra = quads(da, wa)?;
    let mean = [ms.d[0], ms.d[1], ma.d[0], ma.d[1]];

    let mut sigma = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            sigma[(i, j)] = ms.sigma[(i, j)];
            sigma[(i + 2, j + 2)] = ma.sigma[(i, j)];
        }
    }
    let id_s = CMatrix::identity(ds, ds);
    let id_a = CMatrix::identity(da, da);
    for i in 0..2 {
        for j in 0..2 {
            // operators on different modes commute
            let op = rs[i].kronecker(&id_a) * id_s.kronecker(&ra[j]);
            let corr = trace_of_product(&op, rho.matrix()).re;
            let c = 2.0 * corr - 2.0 * mean[i] * mean[j + 2];
            sigma[(i, j + 2)] = c;
            sigma[(j + 2, i)] = c;
        }
    }
    Ok(sigma)
}

/// Symplectic eigenvalues `(ν₋, ν₊)` of a two-mode covariance matrix.
pub fn two_mode_symplectic(sigma: &Matrix4<f64>) -> (f64, f64) {
    let block = |r: usize, c: usize| {
        Matrix2::new(
            sigma[(r, c)],
            sigma[(r, c + 1)],
            sigma[(r + 1, c)],
            sigma[(r + 1, c + 1)],
        )
    };
    let invariant =
        block(0, 0).determinant() + block(2, 2).determinant() + 2.0 * block(0, 2).determinant();
    let det = sigma.determinant();
    let disc = (invariant * invariant - 4.0 * det).max(0.0).sqrt();
    let minus = (0.5 * (invariant - disc)).max(0.0).sqrt();
    let plus = (0.5 * (invariant + disc)).max(0.0).sqrt();
    (minus, plus)
}

/// Entropy of the two-mode Gaussian state sharing the moments of `rho`.
pub fn two_mode_reference_entropy(rho: &DensityMatrix) -> Result<f64> {
    let (minus, plus) = two_mode_symplectic(&two_mode_covariance(rho)?);
    if minus < 1.0 - 1e-8 {
        return Err(Error::ContractViolation(format!(
            "two-mode symplectic eigenvalue {minus} below 1"
        )));
    }
    Ok(entropy_from_nu(minus.max(1.0)) + entropy_from_nu(plus.max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{fock_ket, tensor, CVector, HermitianEigen};
    use approx::assert_abs_diff_eq;

    fn fock(n: usize, omega: f64, dim: usize) -> DensityMatrix {
        fock_ket(n, omega, dim).unwrap().to_density()
    }

    fn eq17_state(p: f64, omega: f64, dim: usize) -> DensityMatrix {
        let mut pops = vec![0.0; dim];
        pops[0] = 1.0 - p;
        pops[1] = p;
        DensityMatrix::diagonal(&pops, omega).unwrap()
    }

    #[test]
    fn fock_moments() {
        let m0 = moments_of_fock(0, 1.0).unwrap();
        assert_eq!(m0.sigma, Matrix2::identity());
        assert_abs_diff_eq!(m0.det(), 1.0, epsilon = 1e-15);
        let m1 = moments_of_fock(1, 0.5).unwrap();
        assert_eq!(m1.sigma, Matrix2::new(6.0, 0.0, 0.0, 1.5));
        assert_abs_diff_eq!(m1.det(), 9.0, epsilon = 1e-14);
        for n in 0..=20 {
            let k = 2.0 * n as f64 + 1.0;
            assert_abs_diff_eq!(
                moments_of_fock(n, 0.3).unwrap().det(),
                k * k,
                epsilon = 1e-12 * k * k
            );
        }
        assert!(matches!(moments_of_fock(1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn fock_moments_match_quadrature() {
        use crate::quadrature::QuadratureGrid;
        use crate::wavefunction::{psi, WaveParams};
        for &(n, w) in &[(0usize, 1.0), (1, 0.5), (4, 0.1)] {
            let p = WaveParams::new(n, w).unwrap();
            let grid = QuadratureGrid::for_mode(w).unwrap();
            let q2 = grid.integrate(|x| x * x * psi(&p, x).powi(2));
            let m = moments_of_fock(n, w).unwrap();
            assert_abs_diff_eq!(2.0 * q2, m.sigma[(0, 0)], epsilon = 1e-10 * m.sigma[(0, 0)]);
        }
    }

    #[test]
    fn state_moments() {
        for n in 0..6 {
            let from_state = moments_of_state(&fock(n, 0.7, 12), 0).unwrap();
            let closed = moments_of_fock(n, 0.7).unwrap();
            assert!((from_state.sigma - closed.sigma).norm() < 1e-12);
            assert_eq!(from_state.d, Vector2::zeros());
        }
        let m = moments_of_state(&eq17_state(0.3, 1.0, 6), 0).unwrap();
        assert!((m.sigma - Matrix2::new(1.6, 0.0, 0.0, 1.6)).norm() < 1e-14);
        assert_eq!(m.d, Vector2::zeros());
    }

    #[test]
    fn coherent_superposition_has_first_moments() {
        // (|0⟩ + |1⟩)/√2: ⟨a⟩ = ½, so ⟨q⟩ = √(2/ω)·½
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)]);
        let rho = DensityMatrix::new(&v * v.adjoint(), vec![3], vec![2.0]).unwrap();
        let m = moments_of_state(&rho, 0).unwrap();
        assert_abs_diff_eq!(m.d[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.d[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn symplectic_values() {
        assert_abs_diff_eq!(
            symplectic_nu(&moments_of_fock(0, 1.0).unwrap()).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        for n in 0..10 {
            let nu = symplectic_nu(&moments_of_fock(n, 0.2).unwrap()).unwrap();
            assert_abs_diff_eq!(nu, 2.0 * n as f64 + 1.0, epsilon = 1e-12);
        }
        for &p in &[0.0, 0.3, 0.5, 1.0] {
            let nu = symplectic_nu(&moments_of_state(&eq17_state(p, 1.0, 4), 0).unwrap()).unwrap();
            assert_abs_diff_eq!(nu, 2.0 * p + 1.0, epsilon = 1e-14);
        }
        let bad = GaussianMoments {
            d: Vector2::zeros(),
            sigma: Matrix2::identity() * 0.5,
            omega: 1.0,
        };
        assert!(matches!(
            symplectic_nu(&bad),
            Err(Error::ContractViolation(_))
        ));
        assert!(GaussianMoments::new(Vector2::zeros(), Matrix2::identity() * 0.5, 1.0).is_err());
    }

    #[test]
    fn reference_entropies() {
        assert_eq!(
            reference_gaussian_entropy(&moments_of_fock(0, 1.0).unwrap()).unwrap(),
            0.0
        );
        let s1 = reference_gaussian_entropy(&moments_of_fock(1, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s1, 2.0 * 2f64.ln(), epsilon = 1e-14);
        let s10 = reference_gaussian_entropy(&moments_of_fock(10, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(s10, 3.350_997_070_841_619, epsilon = 1e-12);
    }

    #[test]
    fn fock_closed_form() {
        assert_eq!(ng_degree_fock(0), 0.0);
        assert_abs_diff_eq!(ng_degree_fock(1), 1.386_294_361_119_890_6, epsilon = 1e-14);
        assert_abs_diff_eq!(ng_degree_fock(5), 2.703_367_253_197_828, epsilon = 1e-13);
        for n in 0..40 {
            assert!(ng_degree_fock(n + 1) > ng_degree_fock(n));
        }
    }

    #[test]
    fn entropy_path_matches_closed_form() {
        for &w in &[0.05, 0.1, 0.5] {
            for n in 0..=10 {
                let general = ng_degree(&fock(n, w, 64), 0).unwrap();
                assert_abs_diff_eq!(general, ng_degree_fock(n), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn gaussian_states_have_zero_ng() {
        for &nbar in &[0.0, 0.5, 2.0] {
            let r: f64 = nbar / (nbar + 1.0);
            let pops: Vec<f64> = (0..64).map(|k| r.powi(k) / (nbar + 1.0)).collect();
            let total: f64 = pops.iter().sum();
            let pops: Vec<f64> = pops.iter().map(|p| p / total).collect();
            let rho = DensityMatrix::diagonal(&pops, 0.4).unwrap();
            assert_abs_diff_eq!(ng_degree(&rho, 0).unwrap(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn measured_vacuum_ng() {
        // g(½) − ln 2, g(x) = (x+1)ln(x+1) − x ln x
        let expected = 1.5 * 1.5f64.ln() + 0.5 * 2f64.ln() - 2f64.ln();
        assert_abs_diff_eq!(expected, 0.261_624_071_882_273_9, epsilon = 1e-15);
        let rho = eq17_state(0.5, 1.0, 8);
        assert_abs_diff_eq!(ng_degree(&rho, 0).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn phase_rotation_invariance() {
        // random-ish pure superposition, rotated by e^{−iθ a†a}
        let dim = 12;
        let v = CVector::from_iterator(
            dim,
            (0..dim).map(|k| C64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos() * 0.4)),
        );
        let v = v.unscale(v.norm());
        let rho = DensityMatrix::new(&v * v.adjoint(), vec![dim], vec![0.8]).unwrap();
        let base = ng_degree(&rho, 0).unwrap();
        let num = number_matrix(dim).unwrap().matrix;
        for &theta in &[0.3, 1.0, 2.5] {
            let u = HermitianEigen::new(&num, 1e-14).unwrap().unitary(theta);
            let rotated = rho.conjugate_by(&u).unwrap();
            assert_abs_diff_eq!(ng_degree(&rotated, 0).unwrap(), base, epsilon = 1e-10);
        }
    }

    #[test]
    fn two_mode_reference_of_product_vacua() {
        let rho = tensor(&fock(0, 1.0, 4), &fock(0, 2.0, 4)).unwrap();
        let sigma = two_mode_covariance(&rho).unwrap();
        let expected = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 0.5, 2.0));
        assert!((sigma - expected).norm() < 1e-14);
        let (lo, hi) = two_mode_symplectic(&sigma);
        assert_abs_diff_eq!(lo, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            two_mode_reference_entropy(&rho).unwrap(),
            0.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn two_mode_product_reference_is_additive() {
        let a = eq17_state(0.3, 1.0, 4);
        let b = fock(2, 0.5, 5);
        let rho = tensor(&a, &b).unwrap();
        let joint = two_mode_reference_entropy(&rho).unwrap();
        let sum = reference_gaussian_entropy(&moments_of_state(&a, 0).unwrap()).unwrap()
            + reference_gaussian_entropy(&moments_of_state(&b, 0).unwrap()).unwrap();
        assert_abs_diff_eq!(joint, sum, epsilon = 1e-10);
    }
}
