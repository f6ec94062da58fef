//! Configuration files, command implementations and reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bayesnet::{
    build_bases, choi_path_probability, local_path_table, table_distance, tpm_table, BayesError,
    ReverseProtocol, TimeGrid,
};
use crate::qcore::{hermitian_eigendecompose, partial_trace, tensor_product, ComplexMatrix, Subsystem};
use crate::qubit_example::{
    analytic_forward, analytic_reverse, beta_from_occupation, build_example_spec, QubitExampleParams,
};
use crate::system::{gibbs_state, validate, BipartiteSpec, Tolerances, ValidationReport};
use crate::thermo::{
    average, combined_integral_ft, heat_distribution, integral_ft, max_detailed_residual,
    mean_heat_balance, mutual_information, psi_factor, AugmentedEnsemble, Direction, Quantity,
    ThermoError,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT_ERROR: i32 = 2;

pub const IFT_TOL: f64 = 1e-10;
pub const DETAILED_TOL: f64 = 1e-9;
pub const COMBINED_TOL: f64 = 1e-9;
pub const PSI_TOL: f64 = 1e-9;
pub const ORACLE_TOL: f64 = 1e-10;
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("spec check `{0}` failed")]
    Invalid(String),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
    #[error(transparent)]
    Bayes(#[from] BayesError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Thermo(_) | CliError::Bayes(_) => EXIT_CHECK_FAILED,
            _ => EXIT_INPUT_ERROR,
        }
    }
}

/// Matrix as rows of [re, im] pairs.
pub type MatrixConfig = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: [usize; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_b: Option<f64>,
    /// Excited-level occupation of a two-level A, converted to β_A.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupation_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupation_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
    pub h_a: MatrixConfig,
    pub h_b: MatrixConfig,
    pub chi: MatrixConfig,
    pub h_int: MatrixConfig,
}

fn matrix_from_config(name: &str, m: &MatrixConfig, n: usize) -> Result<ComplexMatrix, CliError> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{name} must be {n}x{n}")));
    }
    let rows: Vec<Vec<Complex64>> = m
        .iter()
        .map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
        .collect();
    Ok(ComplexMatrix::from_rows(&rows))
}

fn matrix_to_config(m: &ComplexMatrix) -> MatrixConfig {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn resolve_beta(
    label: &str,
    beta: Option<f64>,
    occupation: Option<f64>,
    h: &ComplexMatrix,
) -> Result<f64, CliError> {
    match (beta, occupation) {
        (Some(b), None) => Ok(b),
        (None, Some(p)) => {
            if h.rows() != 2 || !(p > 0.0 && p < 0.5) {
                return Err(CliError::Config(format!(
                    "occupation_{label} needs a two-level system and 0 < p < 1/2"
                )));
            }
            let e = hermitian_eigendecompose(h, None).map_err(|e| CliError::Config(e.to_string()))?;
            let gap = (e.values[1] - e.values[0]).abs();
            if gap <= 0.0 {
                return Err(CliError::Config(format!("occupation_{label} needs a nonzero gap")));
            }
            Ok(beta_from_occupation(p) / gap)
        }
        _ => Err(CliError::Config(format!(
            "give exactly one of beta_{label} and occupation_{label}"
        ))),
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds the spec without running physics checks.
    pub fn to_spec(&self) -> Result<BipartiteSpec, CliError> {
        let [da, db] = self.dims;
        if da < 1 || db < 1 {
            return Err(CliError::Config("dims must be positive".into()));
        }
        let h_a = matrix_from_config("h_a", &self.h_a, da)?;
        let h_b = matrix_from_config("h_b", &self.h_b, db)?;
        Ok(BipartiteSpec {
            beta_a: resolve_beta("a", self.beta_a, self.occupation_a, &h_a)?,
            beta_b: resolve_beta("b", self.beta_b, self.occupation_b, &h_b)?,
            chi: matrix_from_config("chi", &self.chi, da * db)?,
            h_int: matrix_from_config("h_int", &self.h_int, da * db)?,
            h_a,
            h_b,
            tolerances: self.tolerances,
        })
    }

    pub fn from_spec(spec: &BipartiteSpec, times: Option<Vec<f64>>) -> Self {
        Self {
            dims: [spec.dim_a(), spec.dim_b()],
            beta_a: Some(spec.beta_a),
            beta_b: Some(spec.beta_b),
            occupation_a: None,
            occupation_b: None,
            times,
            tolerances: spec.tolerances,
            output: None,
            h_a: matrix_to_config(&spec.h_a),
            h_b: matrix_to_config(&spec.h_b),
            chi: matrix_to_config(&spec.chi),
            h_int: matrix_to_config(&spec.h_int),
        }
    }

    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_toml().as_bytes());
        hash.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Loads a spec and rejects structural problems (shape, Hermiticity,
/// temperatures) as input errors. Physics checks are left to the caller.
pub fn load_spec(config: &ExperimentConfig) -> Result<(BipartiteSpec, ValidationReport), CliError> {
    let spec = config.to_spec()?;
    let report = validate(&spec);
    if let Some(f) = report.checks.iter().find(|c| {
        !c.pass && (c.name.starts_with("hermitian") || c.name == "dimensions" || c.name == "inverse_temperatures")
    }) {
        return Err(CliError::Invalid(f.name.clone()));
    }
    Ok((spec, report))
}

/// Loads a spec that must pass every check.
pub fn load_valid_spec(config: &ExperimentConfig) -> Result<BipartiteSpec, CliError> {
    let (spec, report) = load_spec(config)?;
    match report.first_failure() {
        Some(f) => Err(CliError::Invalid(f.name.clone())),
        None => Ok(spec),
    }
}

fn random_block_hermitian(rng: &mut ChaCha8Rng, energies: &[f64]) -> ComplexMatrix {
    let d = energies.len();
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            if (energies[i] - energies[j]).abs() > 1e-12 {
                continue;
            }
            if i == j {
                m[(i, i)] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
            } else {
                let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
    }
    m
}

/// Random valid spec with integer-spaced local spectra, so that total-energy
/// blocks are degenerate and both the interaction and the correlation term
/// act inside them. χ has vanishing marginals and keeps ρ_AB(0) positive.
pub fn random_spec(seed: u64, dim_a: usize, dim_b: usize) -> BipartiteSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ea: Vec<f64> = (0..dim_a).map(|k| k as f64).collect();
    let eb: Vec<f64> = (0..dim_b).map(|k| k as f64).collect();
    let h_a = ComplexMatrix::from_real_diag(&ea);
    let h_b = ComplexMatrix::from_real_diag(&eb);
    let beta_a = rng.gen_range(0.2..2.0);
    let beta_b = rng.gen_range(0.2..2.0);
    let total: Vec<f64> = ea.iter().flat_map(|a| eb.iter().map(move |b| a + b)).collect();
    let h_int = random_block_hermitian(&mut rng, &total).scale_real(rng.gen_range(0.3..2.0));

    let x = random_block_hermitian(&mut rng, &total);
    let xa = partial_trace(&x, dim_a, dim_b, Subsystem::A).expect("square");
    let xb = partial_trace(&x, dim_a, dim_b, Subsystem::B).expect("square");
    let ia = ComplexMatrix::identity(dim_a);
    let ib = ComplexMatrix::identity(dim_b);
    let d = (dim_a * dim_b) as f64;
    let chi = &(&(&x - &tensor_product(&xa, &ib).scale_real(1.0 / dim_b as f64))
        - &tensor_product(&ia, &xb).scale_real(1.0 / dim_a as f64))
        + &ComplexMatrix::identity(dim_a * dim_b).scale(x.trace() / d);

    let ga = gibbs_state(&h_a, beta_a).expect("finite beta");
    let gb = gibbs_state(&h_b, beta_b).expect("finite beta");
    let lambda_min = ga
        .energies
        .iter()
        .map(|e| (-beta_a * e).exp() / ga.z)
        .fold(f64::INFINITY, f64::min)
        * gb.energies
            .iter()
            .map(|e| (-beta_b * e).exp() / gb.z)
            .fold(f64::INFINITY, f64::min);
    let norm = hermitian_eigendecompose(&chi, None)
        .expect("hermitian")
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let c = rng.gen_range(0.05..0.95);
    let chi = if norm > 0.0 {
        chi.scale_real(c * lambda_min / norm)
    } else {
        chi
    };
    BipartiteSpec {
        h_a,
        h_b,
        beta_a,
        beta_b,
        chi,
        h_int,
        tolerances: Tolerances::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReportCheck {
    pub fn close(name: impl Into<String>, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    /// value ≤ tolerance, for residuals.
    pub fn residual(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self::close(name, value, 0.0, tolerance)
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            expected: 1.0,
            tolerance: 0.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config_digest: String,
    pub checks: Vec<ReportCheck>,
    pub tables: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, config_digest: String) -> Self {
        Self {
            command: command.to_string(),
            config_digest,
            checks: Vec::new(),
            tables: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }

    pub fn check(&self, name: &str) -> Option<&ReportCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn table(&mut self, name: impl Into<String>, value: impl Serialize) {
        self.tables
            .insert(name.into(), serde_json::to_value(value).expect("report table serializes"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Number formatting for CSV output: 17 significant digits.
pub fn csv_number(x: f64) -> String {
    format!("{x:.16e}")
}

/// START:STOP:STEPS as STEPS evenly spaced points including both ends.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("sweep `{s}` is not START:STOP:STEPS"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !start.is_finite() || !stop.is_finite() || (steps > 1 && stop <= start) {
        return Err(bad());
    }
    if steps == 1 {
        return Ok(vec![start]);
    }
    Ok((0..steps)
        .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
        .collect())
}

/// NAME=VALUE tolerance override.
pub fn apply_tolerance(tol: &mut Tolerances, arg: &str) -> Result<(), CliError> {
    let (name, value) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("tolerance `{arg}` is not NAME=VALUE")))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("tolerance `{arg}` has a bad value")))?;
    if value.is_nan() || value < 0.0 || !tol.set(name.trim(), value) {
        return Err(CliError::Config(format!("unknown or negative tolerance `{arg}`")));
    }
    Ok(())
}

pub fn cmd_validate(config: &ExperimentConfig) -> Result<Report, CliError> {
    let (_, validation) = load_spec(config)?;
    let mut report = Report::new("validate", config.digest());
    for c in &validation.checks {
        report.checks.push(ReportCheck {
            name: c.name.clone(),
            value: c.residual,
            expected: 0.0,
            tolerance: c.tolerance,
            pass: c.pass,
        });
    }
    if let Some(f) = validation.first_failure() {
        report.notes.push(format!("first failed check: {}", f.name));
    }
    Ok(report)
}

/// Integral, combined and detailed theorems plus the entropy bookkeeping at
/// one time.
pub fn verify_spec(spec: &BipartiteSpec, t: f64, report: &mut Report) -> Result<(), CliError> {
    let grid = TimeGrid::single(t)?;
    let basis = build_bases(spec, &grid)?;
    let prefix = format!("t={t}");

    let ens = AugmentedEnsemble::new(&basis, ReverseProtocol::Retrodictive)?;
    let mut ift_rows = Vec::new();
    for q in Quantity::ALL {
        let r = integral_ft(&ens, q, q.measure())?;
        report
            .checks
            .push(ReportCheck::close(format!("{prefix}/ift/{}", q.name()), r.value, 1.0, IFT_TOL));
        ift_rows.push(r);
    }
    let combined = combined_integral_ft(&ens)?;
    report.checks.push(ReportCheck::close(
        format!("{prefix}/combined_ift"),
        combined.value,
        1.0,
        COMBINED_TOL,
    ));
    report.checks.push(ReportCheck::residual(
        format!("{prefix}/detailed_ft"),
        max_detailed_residual(&ens)?,
        DETAILED_TOL,
    ));

    let (da, db) = (spec.dim_a(), spec.dim_b());
    let i0 = mutual_information(&basis.states[0], da, db)?;
    let i1 = mutual_information(&basis.states[1], da, db)?;
    report.checks.push(ReportCheck::close(
        format!("{prefix}/mean_I0"),
        average(&ens, Quantity::I0),
        i0,
        BALANCE_TOL,
    ));
    report.checks.push(ReportCheck::close(
        format!("{prefix}/mean_I1"),
        average(&ens, Quantity::I1),
        i1,
        BALANCE_TOL,
    ));

    let balance = mean_heat_balance(spec, &basis)?;
    if ens.all_energy_conserving()? {
        report.checks.push(ReportCheck::close(
            format!("{prefix}/mean_heat_balance"),
            balance.lhs,
            balance.rhs,
            BALANCE_TOL,
        ));
    }
    if balance.heat_reversal {
        report.notes.push(format!("{prefix}: correlation budget allows cold-to-hot heat flow"));
    }

    let paths = local_path_table(&basis)?;
    report.checks.push(ReportCheck::residual(
        format!("{prefix}/choi_equivalence"),
        table_distance(&choi_path_probability(spec, &grid)?, &paths),
        1e-12,
    ));
    if spec.chi.max_abs() == 0.0 {
        report.checks.push(ReportCheck::residual(
            format!("{prefix}/tpm_reduction"),
            table_distance(&tpm_table(&basis)?, &paths),
            1e-12,
        ));
    }

    let backward = AugmentedEnsemble::new(&basis, ReverseProtocol::Backward)?;
    report.checks.push(ReportCheck::residual(
        format!("{prefix}/backward/detailed_ft"),
        max_detailed_residual(&backward)?,
        DETAILED_TOL,
    ));
    let back_combined = combined_integral_ft(&backward)?;
    report.checks.push(ReportCheck::close(
        format!("{prefix}/backward/combined_ift"),
        back_combined.value,
        1.0,
        COMBINED_TOL,
    ));
    let back_ifts: Vec<_> = Quantity::ALL
        .iter()
        .map(|q| integral_ft(&backward, *q, q.measure()))
        .collect::<Result<_, _>>()?;

    report.table(format!("{prefix}/ift"), &ift_rows);
    report.table(format!("{prefix}/combined"), combined);
    report.table(format!("{prefix}/backward/ift"), &back_ifts);
    report.table(format!("{prefix}/mean_heat"), balance);
    Ok(())
}

pub fn cmd_verify(config: &ExperimentConfig, times: &[f64]) -> Result<Report, CliError> {
    let spec = load_valid_spec(config)?;
    let mut report = Report::new("verify", config.digest());
    for &t in times {
        verify_spec(&spec, t, &mut report)?;
    }
    Ok(report)
}

pub const HEAT_CSV_HEADER: &str = "t,Q,P_f,P_r,ratio,exp_Q_dbeta,psi";

/// Heat statistics per (t, Q) bin. P_r is the reverse probability of -Q.
pub fn cmd_heat(config: &ExperimentConfig, times: &[f64]) -> Result<(String, Report), CliError> {
    let spec = load_valid_spec(config)?;
    let mut report = Report::new("heat", config.digest());
    let mut csv = String::from(HEAT_CSV_HEADER);
    csv.push('\n');
    for &t in times {
        let basis = build_bases(&spec, &TimeGrid::single(t)?)?;
        let ens = AugmentedEnsemble::new(&basis, ReverseProtocol::Backward)?;
        let psi = psi_factor(&basis, &ens)?;
        for r in &psi.rows {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                csv_number(t),
                csv_number(r.q),
                csv_number(r.p_f),
                csv_number(r.p_r_minus_q),
                csv_number(r.ratio),
                csv_number(r.exp_q_dbeta),
                csv_number(r.psi)
            );
        }
        report.checks.push(ReportCheck::residual(
            format!("t={t}/modified_heat_ft"),
            psi.max_residual(),
            PSI_TOL,
        ));
        let unverified: Vec<f64> = psi.rows.iter().filter(|r| !r.verified).map(|r| r.q).collect();
        if !unverified.is_empty() {
            report
                .notes
                .push(format!("t={t}: bins {unverified:?} have no reverse weight at -Q"));
        }
    }
    Ok((csv, report))
}

pub const EXAMPLE_CSV_HEADER: &str = "t,Q,P_f_numeric,P_f_analytic,P_r_numeric,P_r_analytic";

/// Two-qubit example: numeric and closed-form heat distributions side by side.
pub fn cmd_example(params: &QubitExampleParams, times: &[f64]) -> Result<(String, Report), CliError> {
    let spec = build_example_spec(params);
    let config = ExperimentConfig::from_spec(&spec, Some(times.to_vec()));
    let mut report = Report::new("example", config.digest());
    let mut csv = String::from(EXAMPLE_CSV_HEADER);
    csv.push('\n');
    let protocol = ReverseProtocol::Backward;
    let (mut dev_f, mut dev_r, mut fr_gap) = (0.0f64, 0.0f64, 0.0f64);
    for &t in times {
        let basis = build_bases(&spec, &TimeGrid::single(t)?)?;
        let pf = heat_distribution(&basis, Direction::Forward, protocol)?;
        let pr = heat_distribution(&basis, Direction::Reverse, protocol)?;
        let af = analytic_forward(params, t);
        let ar = analytic_reverse(params, t);
        dev_f = dev_f.max(pf.max_deviation(&af));
        dev_r = dev_r.max(pr.max_deviation(&ar));
        fr_gap = fr_gap.max(pf.max_deviation(&pr));
        for q in [-1.0, 0.0, 1.0] {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                csv_number(t),
                csv_number(q),
                csv_number(pf.prob(&[q])),
                csv_number(af.prob(&[q])),
                csv_number(pr.prob(&[q])),
                csv_number(ar.prob(&[q]))
            );
        }
    }
    report
        .checks
        .push(ReportCheck::residual("forward_vs_analytic", dev_f, ORACLE_TOL));
    report
        .checks
        .push(ReportCheck::residual("reverse_vs_analytic", dev_r, ORACLE_TOL));
    if params.correlated {
        report.notes.push(format!("max |P_f - P_r| over the grid: {fr_gap:e}"));
    } else {
        report
            .checks
            .push(ReportCheck::residual("forward_equals_reverse", fr_gap, 1e-12));
    }
    Ok((csv, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_config(correlated: bool) -> ExperimentConfig {
        let p = QubitExampleParams::from_occupations(0.2, 0.3, 1.0, correlated);
        ExperimentConfig::from_spec(&build_example_spec(&p), Some(vec![0.37]))
    }

    #[test]
    fn round_trip_is_bit_identical() {
        for seed in 0..5 {
            let spec = random_spec(seed, 3, 2);
            let text = ExperimentConfig::from_spec(&spec, None).to_toml();
            let back = ExperimentConfig::parse(&text).unwrap().to_spec().unwrap();
            for (x, y) in [(&spec.h_int, &back.h_int), (&spec.chi, &back.chi), (&spec.h_a, &back.h_a)] {
                assert!(x.data().iter().zip(y.data()).all(|(p, q)| p.re.to_bits() == q.re.to_bits()
                    && p.im.to_bits() == q.im.to_bits()));
            }
            assert_eq!(spec.beta_a.to_bits(), back.beta_a.to_bits());
        }
    }

    #[test]
    fn random_specs_are_valid_and_correlated() {
        for seed in 0..20 {
            let spec = random_spec(seed, 2 + (seed as usize % 2), 3 - (seed as usize % 2));
            let report = validate(&spec);
            assert!(report.passed(), "{seed}: {:?}", report.first_failure());
            assert!(spec.chi.max_abs() > 0.0);
        }
        assert_eq!(random_spec(9, 2, 3).chi, random_spec(9, 2, 3).chi);
    }

    #[test]
    fn sweep_and_tolerance_parsing() {
        assert_eq!(parse_sweep("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_sweep("0.5:0.5:1").unwrap(), vec![0.5]);
        assert!(parse_sweep("1:0:3").is_err());
        assert!(parse_sweep("0:1").is_err());
        let mut tol = Tolerances::default();
        apply_tolerance(&mut tol, "marginal=1e-6").unwrap();
        assert_eq!(tol.marginal, 1e-6);
        assert!(apply_tolerance(&mut tol, "bogus=1").is_err());
        assert!(apply_tolerance(&mut tol, "trace").is_err());
    }

    #[test]
    fn csv_numbers_have_seventeen_digits() {
        assert_eq!(csv_number(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_number(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn validate_reports() {
        assert!(cmd_validate(&example_config(true)).unwrap().passed());

        let mut cfg = example_config(true);
        cfg.h_int[1][2] = [1.0, 0.0];
        match cmd_validate(&cfg) {
            Err(CliError::Invalid(name)) => assert_eq!(name, "hermitian_h_int"),
            other => panic!("{other:?}"),
        }

        let mut cfg = example_config(false);
        cfg.chi[0][0] = [0.01, 0.0];
        cfg.chi[1][1] = [-0.01, 0.0];
        let report = cmd_validate(&cfg).unwrap();
        assert!(!report.passed());
        assert_eq!(report.exit_code(), EXIT_CHECK_FAILED);
        assert!(report.notes[0].contains("marginal"));
    }

    #[test]
    fn occupation_shorthand() {
        let mut cfg = example_config(false);
        cfg.beta_a = None;
        cfg.occupation_a = Some(0.2);
        let spec = cfg.to_spec().unwrap();
        assert!((spec.beta_a - 4f64.ln()).abs() < 1e-15);
        cfg.beta_a = Some(1.0);
        assert!(cfg.to_spec().is_err());
    }

    #[test]
    fn verify_passes_on_examples() {
        let report = cmd_verify(&example_config(true), &[0.0, 0.37]).unwrap();
        assert!(report.passed(), "{:?}", report.checks.iter().find(|c| !c.pass));
        let cfg = ExperimentConfig::from_spec(&random_spec(3, 3, 2), None);
        assert!(cmd_verify(&cfg, &[0.8]).unwrap().passed());
    }

    #[test]
    fn heat_csv_rows() {
        let (csv, report) = cmd_heat(&example_config(false), &[0.0, 1.0]).unwrap();
        assert!(report.passed());
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], HEAT_CSV_HEADER);
        assert!(lines.iter().any(|l| l.starts_with("0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0")));
        assert_eq!(cmd_heat(&example_config(false), &[0.0, 1.0]).unwrap().0, csv);
    }
}
