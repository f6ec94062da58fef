//! The physical experiment: two thermal subsystems, an initial correlation
//! term and an energy-conserving interaction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qcore::{
    commutator_norm, hermitian_eigendecompose, partial_trace, tensor_product, ComplexMatrix,
    LinalgError, Subsystem,
};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("spec check `{name}` failed: residual {residual:e} > tolerance {tolerance:e}")]
    CheckFailed {
        name: String,
        residual: f64,
        tolerance: f64,
    },
    #[error("inverse temperature must be finite and non-negative, got {0}")]
    BadBeta(f64),
    #[error("evolution operator is not unitary (max |U^dagger U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Numerical tolerances used when validating a [`BipartiteSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub marginal: f64,
    pub positivity: f64,
    pub energy_conservation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermiticity: 1e-10,
            trace: 1e-10,
            marginal: 1e-10,
            positivity: 1e-10,
            energy_conservation: 1e-10,
        }
    }
}

impl Tolerances {
    /// Sets a tolerance by name; returns false for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "hermiticity" => &mut self.hermiticity,
            "trace" => &mut self.trace,
            "marginal" => &mut self.marginal,
            "positivity" => &mut self.positivity,
            "energy_conservation" => &mut self.energy_conservation,
            _ => return false,
        };
        *slot = value;
        true
    }
}

/// One experiment: local Hamiltonians and temperatures, the correlation
/// operator χ_AB and the interaction generator.
#[derive(Debug, Clone)]
pub struct BipartiteSpec {
    pub h_a: ComplexMatrix,
    pub h_b: ComplexMatrix,
    pub beta_a: f64,
    pub beta_b: f64,
    pub chi: ComplexMatrix,
    pub h_int: ComplexMatrix,
    pub tolerances: Tolerances,
}

impl BipartiteSpec {
    pub fn dim_a(&self) -> usize {
        self.h_a.rows()
    }

    pub fn dim_b(&self) -> usize {
        self.h_b.rows()
    }

    pub fn dim(&self) -> usize {
        self.dim_a() * self.dim_b()
    }

    pub fn delta_beta(&self) -> f64 {
        self.beta_a - self.beta_b
    }

    /// H_A ⊗ I + I ⊗ H_B.
    pub fn total_local_hamiltonian(&self) -> ComplexMatrix {
        let ia = ComplexMatrix::identity(self.dim_a());
        let ib = ComplexMatrix::identity(self.dim_b());
        &tensor_product(&self.h_a, &ib) + &tensor_product(&ia, &self.h_b)
    }

    pub fn unitary(&self, t: f64) -> Result<ComplexMatrix, LinalgError> {
        crate::qcore::unitary_from_hamiltonian(&self.h_int, t)
    }
}

#[derive(Debug, Clone)]
pub struct GibbsState {
    pub rho: ComplexMatrix,
    pub z: f64,
    pub beta: f64,
    pub energies: Vec<f64>,
}

/// exp(-βH)/Z. The spectrum is shifted by its minimum before exponentiating
/// so large β does not underflow the partition function.
pub fn gibbs_state(h: &ComplexMatrix, beta: f64) -> Result<GibbsState, SystemError> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(SystemError::BadBeta(beta));
    }
    let eig = hermitian_eigendecompose(h, None)?;
    let e_min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: f64 = eig.values.iter().map(|e| (-beta * (e - e_min)).exp()).sum();
    let rho = eig.map_spectrum(|e| Complex64::new((-beta * (e - e_min)).exp() / shifted, 0.0));
    Ok(GibbsState {
        rho,
        z: shifted * (-beta * e_min).exp(),
        beta,
        energies: eig.values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckRecord>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub const CHECK_DIMENSIONS: &str = "dimensions";
pub const CHECK_HERMITIAN_H_A: &str = "hermitian_h_a";
pub const CHECK_HERMITIAN_H_B: &str = "hermitian_h_b";
pub const CHECK_HERMITIAN_H_INT: &str = "hermitian_h_int";
pub const CHECK_HERMITIAN_CHI: &str = "hermitian_chi";
pub const CHECK_BETAS: &str = "inverse_temperatures";
pub const CHECK_CHI_TRACE: &str = "chi_traceless";
pub const CHECK_MARGINAL_A: &str = "chi_marginal_a";
pub const CHECK_MARGINAL_B: &str = "chi_marginal_b";
pub const CHECK_UNIT_TRACE: &str = "rho_unit_trace";
pub const CHECK_POSITIVITY: &str = "rho_positivity";
pub const CHECK_ENERGY_CONSERVATION: &str = "energy_conservation";

fn record(name: &str, residual: f64, tolerance: f64) -> CheckRecord {
    CheckRecord {
        name: name.to_string(),
        residual,
        tolerance,
        pass: residual.is_finite() && residual <= tolerance,
    }
}

/// Runs every spec check and reports residuals. Never fails: a broken spec is
/// a report with failing records.
pub fn validate(spec: &BipartiteSpec) -> ValidationReport {
    let tol = spec.tolerances;
    let mut checks = Vec::new();
    let (da, db) = (spec.dim_a(), spec.dim_b());
    let dims_ok = spec.h_a.is_square()
        && spec.h_b.is_square()
        && spec.h_int.is_square()
        && spec.chi.is_square()
        && spec.h_int.rows() == da * db
        && spec.chi.rows() == da * db;
    checks.push(record(CHECK_DIMENSIONS, if dims_ok { 0.0 } else { f64::INFINITY }, 0.0));
    if !dims_ok {
        return ValidationReport { checks };
    }

    checks.push(record(CHECK_HERMITIAN_H_A, spec.h_a.hermiticity_residual(), tol.hermiticity));
    checks.push(record(CHECK_HERMITIAN_H_B, spec.h_b.hermiticity_residual(), tol.hermiticity));
    checks.push(record(CHECK_HERMITIAN_H_INT, spec.h_int.hermiticity_residual(), tol.hermiticity));
    checks.push(record(CHECK_HERMITIAN_CHI, spec.chi.hermiticity_residual(), tol.hermiticity));
    let beta_ok = [spec.beta_a, spec.beta_b]
        .iter()
        .all(|b| b.is_finite() && *b >= 0.0);
    checks.push(record(CHECK_BETAS, if beta_ok { 0.0 } else { f64::INFINITY }, 0.0));
    if checks.iter().any(|c| !c.pass) {
        return ValidationReport { checks };
    }

    checks.push(record(CHECK_CHI_TRACE, spec.chi.trace().norm(), tol.trace));
    let zero_a = ComplexMatrix::zeros(da, da);
    let zero_b = ComplexMatrix::zeros(db, db);
    let marg_a = partial_trace(&spec.chi, da, db, Subsystem::A).expect("dimensions checked");
    let marg_b = partial_trace(&spec.chi, da, db, Subsystem::B).expect("dimensions checked");
    checks.push(record(CHECK_MARGINAL_A, marg_a.max_abs_diff(&zero_a), tol.marginal));
    checks.push(record(CHECK_MARGINAL_B, marg_b.max_abs_diff(&zero_b), tol.marginal));

    match (gibbs_state(&spec.h_a, spec.beta_a), gibbs_state(&spec.h_b, spec.beta_b)) {
        (Ok(ga), Ok(gb)) => {
            let rho = &tensor_product(&ga.rho, &gb.rho) + &spec.chi;
            checks.push(record(CHECK_UNIT_TRACE, (rho.trace() - 1.0).norm(), tol.trace));
            let min_eig = hermitian_eigendecompose(&rho, None)
                .map(|e| e.values.iter().copied().fold(f64::INFINITY, f64::min))
                .unwrap_or(f64::NEG_INFINITY);
            checks.push(record(CHECK_POSITIVITY, (-min_eig).max(0.0), tol.positivity));
        }
        _ => {
            checks.push(record(CHECK_UNIT_TRACE, f64::INFINITY, tol.trace));
            checks.push(record(CHECK_POSITIVITY, f64::INFINITY, tol.positivity));
        }
    }

    let conservation = commutator_norm(&spec.h_int, &spec.total_local_hamiltonian())
        .unwrap_or(f64::INFINITY);
    checks.push(record(CHECK_ENERGY_CONSERVATION, conservation, tol.energy_conservation));
    ValidationReport { checks }
}

/// ρ_AB(0) = ρ_A⁰ ⊗ ρ_B⁰ + χ_AB, after validating the spec.
pub fn build_initial_state(spec: &BipartiteSpec) -> Result<ComplexMatrix, SystemError> {
    let report = validate(spec);
    if let Some(f) = report.first_failure() {
        return Err(SystemError::CheckFailed {
            name: f.name.clone(),
            residual: f.residual,
            tolerance: f.tolerance,
        });
    }
    let ga = gibbs_state(&spec.h_a, spec.beta_a)?;
    let gb = gibbs_state(&spec.h_b, spec.beta_b)?;
    Ok(&tensor_product(&ga.rho, &gb.rho) + &spec.chi)
}

/// U ρ U†.
pub fn evolve(rho: &ComplexMatrix, u: &ComplexMatrix) -> Result<ComplexMatrix, SystemError> {
    if !u.is_square() || u.rows() != rho.rows() || !rho.is_square() {
        return Err(SystemError::DimensionMismatch(format!(
            "rho {}x{}, U {}x{}",
            rho.rows(),
            rho.cols(),
            u.rows(),
            u.cols()
        )));
    }
    let dev = (&u.adjoint() * u).max_abs_diff(&ComplexMatrix::identity(u.rows()));
    if dev > 1e-10 {
        return Err(SystemError::NotUnitary(dev));
    }
    Ok(&(u * rho) * &u.adjoint())
}
