//! Photon-number measurement channel with Kraus operators
//! `M₁ = √(1−p) I` and `M₂ = √p Σₙ |n+1⟩⟨n|`.
//!
//! On a truncated ladder `M₂` annihilates the top level instead of wrapping,
//! so completeness `Σ Mᵢ†Mᵢ = I` holds on levels `0..dim−1` only. Inputs must
//! keep the top level empty.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::gaussian_ref::ng_degree;
use crate::hilbert::{fidelity, fock_ket, CMatrix, DensityMatrix, OperatorKind, OperatorMatrix};
use crate::metrology::{qfi_fock_closed, QfiReport};

/// Largest top-level population accepted by [`apply_channel`].
pub const TOP_LEVEL_GUARD: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    operators: Vec<OperatorMatrix>,
    p: f64,
}

impl KrausChannel {
    pub fn operators(&self) -> &[OperatorMatrix] {
        &self.operators
    }

    pub fn strength(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// `max |(Σ Mᵢ†Mᵢ − I)ⱼₖ|` over levels `0..dim−1`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self.operators.iter().fold(CMatrix::zeros(d, d), |acc, m| {
            acc + m.matrix.adjoint() * &m.matrix
        });
        let guarded = d - 1;
        let mut worst: f64 = 0.0;
        for i in 0..guarded {
            for j in 0..guarded {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((sum[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

pub fn build_channel(p: f64, dim: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "measurement strength {p} outside [0, 1]"
        )));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "channel needs dim ≥ 2, got {dim}"
        )));
    }
    let keep = CMatrix::identity(dim, dim).scale((1.0 - p).sqrt());
    let mut raise = DMatrix::zeros(dim, dim);
    for n in 0..dim - 1 {
        raise[(n + 1, n)] = C64::new(p.sqrt(), 0.0);
    }
    let channel = KrausChannel {
        operators: vec![
            OperatorMatrix::new(keep, OperatorKind::Kraus)?,
            OperatorMatrix::new(raise, OperatorKind::Kraus)?,
        ],
        p,
    };
    let residual = channel.completeness_residual();
    if residual > 1e-12 {
        return Err(Error::Numeric(format!(
            "completeness residual {residual:e}"
        )));
    }
    Ok(channel)
}

/// `ρ ↦ Σ Mᵢ ρ Mᵢ†`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel) -> Result<DensityMatrix> {
    if rho.num_modes() != 1 || rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch(format!(
            "channel of dim {} applied to state of dim {} ({} mode(s))",
            ch.dim(),
            rho.dim(),
            rho.num_modes()
        )));
    }
    let top = rho.populations()[rho.dim() - 1];
    if top > TOP_LEVEL_GUARD {
        return Err(Error::Leakage(format!(
            "top level holds population {top:e}; the truncated channel would not preserve trace"
        )));
    }
    let out = ch
        .operators
        .iter()
        .fold(CMatrix::zeros(rho.dim(), rho.dim()), |acc, m| {
            acc + &m.matrix * rho.matrix() * m.matrix.adjoint()
        });
    DensityMatrix::new(out, rho.mode_dims().to_vec(), rho.omegas().to_vec())
}

/// Outcome of preparing a probe by measuring the vacuum.
#[derive(Clone, Debug, PartialEq)]
pub enum PreparedProbe {
    /// `p = 1`: the output is `|1⟩` and its QFI is known.
    Pure {
        report: QfiReport,
        fidelity_to_one: f64,
    },
    /// `p < 1`: the output is mixed; no QFI is computed.
    Mixed {
        state: DensityMatrix,
        ng_degree: f64,
    },
}

/// Truncation used when preparing probes from the vacuum.
pub const PREPARATION_DIM: usize = 4;

/// Measure the vacuum with strength `p` and report what the probe is good for.
pub fn prepared_probe_qfi(p: f64, omega: f64) -> Result<PreparedProbe> {
    let ch = build_channel(p, PREPARATION_DIM)?;
    let vacuum = fock_ket(0, omega, PREPARATION_DIM)?.to_density();
    let out = apply_channel(&vacuum, &ch)?;
    if p == 1.0 {
        let one = fock_ket(1, omega, PREPARATION_DIM)?.to_density();
        let f = fidelity(&out, &one)?;
        if f < 1.0 - 1e-12 {
            return Err(Error::Numeric(format!(
                "p = 1 output has fidelity {f} with |1⟩"
            )));
        }
        return Ok(PreparedProbe::Pure {
            report: qfi_fock_closed(1, omega)?,
            fidelity_to_one: f,
        });
    }
    let ng = ng_degree(&out, 0)?;
    Ok(PreparedProbe::Mixed {
        state: out,
        ng_degree: ng,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{expectation, number_matrix, CVector};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn vacuum(dim: usize) -> DensityMatrix {
        fock_ket(0, 1.0, dim).unwrap().to_density()
    }

    #[test]
    fn channel_endpoints() {
        let ch0 = build_channel(0.0, 5).unwrap();
        assert!(ch0.operators()[1].matrix.iter().all(|z| z.norm() == 0.0));
        assert_eq!(apply_channel(&vacuum(5), &ch0).unwrap(), vacuum(5));
        let ch1 = build_channel(1.0, 5).unwrap();
        assert!(ch1.operators()[0].matrix.iter().all(|z| z.norm() == 0.0));
        for p in [0.0, 0.3, 0.5, 1.0] {
            assert!(build_channel(p, 6).unwrap().completeness_residual() < 1e-12);
        }
        assert!(build_channel(-0.1, 4).is_err());
        assert!(build_channel(1.1, 4).is_err());
        assert!(build_channel(0.5, 1).is_err());
    }

    #[test]
    fn vacuum_outputs() {
        let out = apply_channel(&vacuum(6), &build_channel(0.3, 6).unwrap()).unwrap();
        let expected = DensityMatrix::diagonal(&[0.7, 0.3, 0.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert!((out.matrix() - expected.matrix()).norm() < 1e-15);
        let n = number_matrix(6).unwrap();
        assert_abs_diff_eq!(expectation(&n, &out).unwrap().re, 0.3, epsilon = 1e-15);

        let out1 = apply_channel(&vacuum(6), &build_channel(1.0, 6).unwrap()).unwrap();
        let one = fock_ket(1, 1.0, 6).unwrap().to_density();
        assert_abs_diff_eq!(fidelity(&out1, &one).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn guard_rejects_top_level() {
        let top = fock_ket(3, 1.0, 4).unwrap().to_density();
        let ch = build_channel(0.5, 4).unwrap();
        assert!(matches!(apply_channel(&top, &ch), Err(Error::Leakage(_))));
        assert!(matches!(
            apply_channel(&vacuum(3), &ch),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn prepared_probes() {
        match prepared_probe_qfi(1.0, 1.0).unwrap() {
            PreparedProbe::Pure {
                report,
                fidelity_to_one,
            } => {
                assert_eq!(report.qfi, 1.5);
                assert_abs_diff_eq!(fidelity_to_one, 1.0, epsilon = 1e-15);
            }
            other => panic!("expected pure probe, got {other:?}"),
        }
        match prepared_probe_qfi(0.0, 1.0).unwrap() {
            PreparedProbe::Mixed { state, ng_degree } => {
                assert_eq!(ng_degree, 0.0);
                assert_eq!(state, vacuum(PREPARATION_DIM));
            }
            other => panic!("expected flagged probe, got {other:?}"),
        }
        match prepared_probe_qfi(0.5, 1.0).unwrap() {
            PreparedProbe::Mixed { ng_degree, .. } => {
                assert_abs_diff_eq!(ng_degree, 0.261_624_071_882_273_9, epsilon = 1e-12);
            }
            other => panic!("expected flagged probe, got {other:?}"),
        }
    }

    #[test]
    fn ng_grows_with_strength() {
        let ch_ng = |p: f64| {
            let out = apply_channel(&vacuum(4), &build_channel(p, 4).unwrap()).unwrap();
            ng_degree(&out, 0).unwrap()
        };
        let values: Vec<f64> = (0..=100).map(|k| ch_ng(k as f64 / 100.0)).collect();
        assert!(values.windows(2).all(|w| w[1] - w[0] >= -1e-10));
        assert_abs_diff_eq!(values[100], 2.0 * 2f64.ln(), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn output_is_valid_state(p in 0.0f64..=1.0, amps in prop::collection::vec(-1.0f64..1.0, 10)) {
            // random pure state on the guarded levels 0..5 of a 6-level mode
            let mut v = CVector::zeros(6);
            for k in 0..5 {
                v[k] = C64::new(amps[2 * k], amps[2 * k + 1]);
            }
            prop_assume!(v.norm() > 1e-3);
            let v = v.unscale(v.norm());
            let rho = DensityMatrix::new(&v * v.adjoint(), vec![6], vec![0.5]).unwrap();
            let out = apply_channel(&rho, &build_channel(p, 6).unwrap());
            prop_assert!(out.is_ok());
            let out = out.unwrap();
            prop_assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
            let n = number_matrix(6).unwrap();
            let before = expectation(&n, &rho).unwrap().re;
            let after = expectation(&n, &out).unwrap().re;
            prop_assert!((after - before - p).abs() < 1e-12);
        }
    }
}
