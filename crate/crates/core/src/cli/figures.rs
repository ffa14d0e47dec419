//! Table builders for the figure data sets and the single-shot commands.

use rayon::prelude::*;
use serde_json::json;

use crate::cli::output::{Column, Table};
use crate::dynamics::{find_swap_time, linspace, run_protocol, EvolutionTrace, ProtocolConfig};
use crate::error::{Error, Result};
use crate::gaussian_ref::{ng_degree, ng_degree_fock};
use crate::hilbert::{check_omega, expectation, fock_ket, number_matrix};
use crate::measurement::{apply_channel, build_channel};
use crate::metrology::{
    cramer_rao, qfi_fock_closed, qfi_gaussian_fock, qfi_per_energy, qfi_pure_numeric,
    qfi_superposition_averaged, qfi_superposition_exact,
};

pub const FIG1_MAX_LEVEL: usize = 10;
pub const FIG2_LEVELS: [usize; 4] = [0, 3, 5, 10];
pub const FIG3_LEVELS: [usize; 3] = [3, 5, 10];
pub const FIG4_OMEGAS: [f64; 3] = [0.05, 0.1, 0.5];
pub const FIG4_LEVELS: [usize; 5] = [1, 3, 5, 7, 10];
pub const FIG5_GAMMA: f64 = 0.1;
pub const FIG5_ANCILLA: usize = 1;
pub const FIG6_MAX_N: usize = 5;
/// Truncation for the entropy-path nG-degree of a Fock state.
pub const NG_TRUNCATION: usize = 64;

/// Frequency sampling for sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self {
            start: 0.05,
            stop: 1.0,
            count: 200,
            log: true,
        }
    }
}

impl OmegaGrid {
    pub fn single(omega: f64) -> Self {
        Self {
            start: omega,
            stop: omega,
            count: 1,
            log: false,
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        for w in [self.start, self.stop] {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "omega grid must be positive, got {w}"
                )));
            }
        }
        if self.count == 1 && self.start == self.stop {
            return Ok(vec![self.start]);
        }
        if self.count < 2 {
            return Err(Error::InvalidArgument(format!(
                "omega grid needs ≥ 2 points, got {}",
                self.count
            )));
        }
        if self.stop <= self.start {
            return Err(Error::InvalidArgument(
                "omega grid must be increasing".into(),
            ));
        }
        if self.log {
            let pts = linspace(self.start.ln(), self.stop.ln(), self.count)?;
            let mut out: Vec<f64> = pts.into_iter().map(f64::exp).collect();
            out[0] = self.start;
            out[self.count - 1] = self.stop;
            Ok(out)
        } else {
            linspace(self.start, self.stop, self.count)
        }
    }

    fn to_json(&self) -> serde_json::Value {
        json!({"start": self.start, "stop": self.stop, "count": self.count, "log": self.log})
    }
}

/// Run `f` over `items` in parallel, keeping input order.
fn par_rows<T: Sync, F>(items: &[T], f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&T) -> Result<Vec<f64>> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

pub fn fig1() -> Result<Table> {
    let mut t = Table::new(
        "fig1",
        json!({}),
        vec![Column::integer("n"), Column::real("delta_ng")],
    );
    t.rows = (0..=FIG1_MAX_LEVEL)
        .map(|n| vec![n as f64, ng_degree_fock(n)])
        .collect();
    Ok(t)
}

pub fn fig2(grid: &OmegaGrid, levels: &[usize]) -> Result<Table> {
    let omegas = grid.points()?;
    let mut cols = vec![Column::real("omega")];
    cols.extend(levels.iter().map(|n| Column::real(format!("F_n{n}"))));
    cols.push(Column::real("F_gauss"));
    let mut t = Table::new(
        "fig2",
        json!({"omega_grid": grid.to_json(), "levels": levels}),
        cols,
    );
    t.rows = par_rows(&omegas, |&w| {
        let mut row = vec![w];
        for &n in levels {
            row.push(qfi_fock_closed(n, w)?.qfi);
        }
        row.push(1.0 / (w * w));
        Ok(row)
    })?;
    Ok(t)
}

pub fn fig3(grid: &OmegaGrid, levels: &[usize]) -> Result<Table> {
    let omegas = grid.points()?;
    let mut cols = vec![Column::real("omega")];
    cols.extend(levels.iter().map(|n| Column::real(format!("R_n{n}"))));
    let mut t = Table::new(
        "fig3",
        json!({"omega_grid": grid.to_json(), "levels": levels}),
        cols,
    );
    t.rows = par_rows(&omegas, |&w| {
        let mut row = vec![w];
        for &n in levels {
            row.push(qfi_per_energy(n, w)?);
        }
        Ok(row)
    })?;
    Ok(t)
}

pub fn fig4(omegas: &[f64], levels: &[usize]) -> Result<Table> {
    let cols = vec![
        Column::real("omega"),
        Column::integer("n"),
        Column::real("delta_ng"),
        Column::real("qfi"),
    ];
    let mut t = Table::new("fig4", json!({"omegas": omegas, "levels": levels}), cols);
    let pairs: Vec<(f64, usize)> = omegas
        .iter()
        .flat_map(|&w| levels.iter().map(move |&n| (w, n)))
        .collect();
    t.rows = par_rows(&pairs, |&(w, n)| {
        Ok(vec![
            w,
            n as f64,
            ng_degree_fock(n),
            qfi_fock_closed(n, w)?.qfi,
        ])
    })?;
    Ok(t)
}

fn trace_table(command: &str, params: serde_json::Value, trace: &EvolutionTrace) -> Table {
    let cols = EvolutionTrace::COLUMNS
        .iter()
        .map(|c| Column::real(*c))
        .collect();
    let mut t = Table::new(command, params, cols);
    t.rows = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.t,
                r.ng_system,
                r.ng_ancilla,
                r.mutual_info,
                r.fidelity,
                r.balance_residual,
            ]
        })
        .collect();
    t
}

/// Exchange protocol table. The swap time found by refinement is recorded in
/// the parameters.
pub fn protocol(cfg: &ProtocolConfig, command: &str) -> Result<Table> {
    let trace = run_protocol(cfg)?;
    let swap = find_swap_time(cfg, &trace)?;
    let params = json!({
        "omega_s": cfg.omega_s,
        "omega_a": cfg.omega_a,
        "gamma": cfg.gamma,
        "m": cfg.ancilla_level,
        "dim": cfg.dim,
        "t_count": cfg.t_grid.len(),
        "swap_time": swap.t,
        "swap_fidelity": swap.fidelity,
        "swap_complete": swap.complete,
    });
    Ok(trace_table(command, params, &trace))
}

pub fn fig5(gamma: f64, m: usize, t_count: usize) -> Result<Table> {
    protocol(&ProtocolConfig::resonant(gamma, m, t_count)?, "fig5")
}

pub fn fig6(grid: &OmegaGrid, n_max: usize) -> Result<Table> {
    if n_max == 0 {
        return Err(Error::InvalidArgument(
            "superposition size must be ≥ 1".into(),
        ));
    }
    let omegas = grid.points()?;
    let mut cols = vec![Column::real("omega")];
    cols.extend((1..=n_max).map(|n| Column::real(format!("F_avg_N{n}"))));
    cols.extend((1..=n_max).map(|n| Column::real(format!("F_exact_N{n}"))));
    let mut t = Table::new(
        "fig6",
        json!({"omega_grid": grid.to_json(), "n_max": n_max}),
        cols,
    );
    let level_sets: Vec<Vec<usize>> = (1..=n_max).map(|n| (0..n).collect()).collect();
    t.rows = par_rows(&omegas, |&w| {
        let mut row = vec![w];
        for set in &level_sets {
            row.push(qfi_superposition_averaged(set, w)?.qfi);
        }
        for set in &level_sets {
            row.push(qfi_superposition_exact(set, w)?.qfi);
        }
        Ok(row)
    })?;
    Ok(t)
}

/// Fock-state QFI by every available method, with the single-shot bound.
pub fn qfi_table(grid: &OmegaGrid, levels: &[usize], n_meas: u64) -> Result<Table> {
    let omegas = grid.points()?;
    let cols = vec![
        Column::real("omega"),
        Column::integer("n"),
        Column::real("qfi_closed"),
        Column::real("qfi_numeric"),
        Column::real("qfi_gaussian"),
        Column::real("crb"),
    ];
    let params = json!({"omega_grid": grid.to_json(), "levels": levels, "n_meas": n_meas});
    let mut t = Table::new("qfi", params, cols);
    let pairs: Vec<(f64, usize)> = omegas
        .iter()
        .flat_map(|&w| levels.iter().map(move |&n| (w, n)))
        .collect();
    t.rows = par_rows(&pairs, |&(w, n)| {
        let closed = qfi_fock_closed(n, w)?.qfi;
        Ok(vec![
            w,
            n as f64,
            closed,
            qfi_pure_numeric(n, w)?.qfi,
            qfi_gaussian_fock(n, w)?.qfi,
            cramer_rao(closed, n_meas)?,
        ])
    })?;
    Ok(t)
}

/// Superposition QFI for one level set.
pub fn superposition_table(grid: &OmegaGrid, levels: &[usize]) -> Result<Table> {
    let omegas = grid.points()?;
    let cols = vec![
        Column::real("omega"),
        Column::real("qfi_averaged"),
        Column::real("qfi_exact"),
    ];
    let mut t = Table::new(
        "qfi",
        json!({"omega_grid": grid.to_json(), "levels": levels, "superposition": true}),
        cols,
    );
    t.rows = par_rows(&omegas, |&w| {
        Ok(vec![
            w,
            qfi_superposition_averaged(levels, w)?.qfi,
            qfi_superposition_exact(levels, w)?.qfi,
        ])
    })?;
    Ok(t)
}

/// nG-degree of Fock states from the closed form and from entropies.
pub fn ng_table(omega: f64, levels: &[usize]) -> Result<Table> {
    check_omega(omega)?;
    if let Some(&n) = levels.iter().find(|&&n| n + 1 >= NG_TRUNCATION) {
        return Err(Error::OutOfRange(format!(
            "level {n} does not fit the truncation {NG_TRUNCATION}"
        )));
    }
    let cols = vec![
        Column::integer("n"),
        Column::real("delta_ng_closed"),
        Column::real("delta_ng_entropy"),
    ];
    let mut t = Table::new(
        "ng",
        json!({"omega": omega, "levels": levels, "dim": NG_TRUNCATION}),
        cols,
    );
    t.rows = par_rows(levels, |&n| {
        let rho = fock_ket(n, omega, NG_TRUNCATION)?.to_density();
        Ok(vec![n as f64, ng_degree_fock(n), ng_degree(&rho, 0)?])
    })?;
    Ok(t)
}

/// Vacuum passed through the measurement channel for each strength.
pub fn measure_table(strengths: &[f64], omega: f64, dim: usize) -> Result<Table> {
    check_omega(omega)?;
    let cols = vec![
        Column::real("p"),
        Column::real("mean_n"),
        Column::real("fidelity_one"),
        Column::real("delta_ng"),
    ];
    let mut t = Table::new(
        "measure",
        json!({"p": strengths, "omega": omega, "dim": dim}),
        cols,
    );
    let vacuum = fock_ket(0, omega, dim)?.to_density();
    let one = fock_ket(1, omega, dim)?.to_density();
    let n_op = number_matrix(dim)?;
    t.rows = par_rows(strengths, |&p| {
        let out = apply_channel(&vacuum, &build_channel(p, dim)?)?;
        Ok(vec![
            p,
            expectation(&n_op, &out)?.re,
            crate::hilbert::fidelity(&out, &one)?,
            ng_degree(&out, 0)?,
        ])
    })?;
    Ok(t)
}
