//! Dynamic Bayesian network over global and local spectral bases.
//!
//! The global state evolves deterministically: each eigenvector |s⟩ of
//! ρ_AB(0) is carried to |s_n⟩ = U(t_n)|s⟩ with its population fixed. At
//! every grid time the local outcome pair (a_n, b_n) is drawn from
//! |⟨a_n b_n|s_n⟩|², where |a_n⟩, |b_n⟩ diagonalise the reduced states.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::qcore::{
    hermitian_eigendecompose, inner, kron_vec, partial_trace, tensor_product, ComplexMatrix,
    EigenSystem, LinalgError, Subsystem,
};
use crate::system::{build_initial_state, evolve, BipartiteSpec, SystemError};

/// Trajectories lighter than this are dropped from enumerations.
pub const PROBABILITY_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum BayesError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("time grid must be non-empty, finite, non-negative and strictly increasing")]
    BadGrid,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("operation needs a two-time grid, basis has {0} measurement times")]
    NotTwoTime(usize),
}

/// Measurement times t_1..t_N; t_0 = 0 is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self, BayesError> {
        let increasing = times.windows(2).all(|w| w[0] < w[1]);
        let valid = times.iter().all(|t| t.is_finite() && *t >= 0.0);
        if times.is_empty() || !increasing || !valid {
            return Err(BayesError::BadGrid);
        }
        Ok(Self { times })
    }

    pub fn single(t: f64) -> Result<Self, BayesError> {
        Self::new(vec![t])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Global and local eigenbases at t_0 = 0 and every grid time.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub dim_a: usize,
    pub dim_b: usize,
    /// t_0 = 0 followed by the grid times.
    pub times: Vec<f64>,
    /// P_s, clamped at zero.
    pub populations: Vec<f64>,
    /// `global[n][s]` = U(t_n)|s⟩.
    pub global: Vec<Vec<Vec<Complex64>>>,
    pub unitaries: Vec<ComplexMatrix>,
    pub states: Vec<ComplexMatrix>,
    pub local_a: Vec<EigenSystem>,
    pub local_b: Vec<EigenSystem>,
    /// E_{a_n} = ⟨a_n|H_A|a_n⟩.
    pub energies_a: Vec<Vec<f64>>,
    pub energies_b: Vec<Vec<f64>>,
    /// `cond[n][s][a * dim_b + b]` = |⟨a_n b_n|s_n⟩|².
    pub cond: Vec<Vec<Vec<f64>>>,
    pub beta_a: f64,
    pub beta_b: f64,
    pub z_a: f64,
    pub z_b: f64,
}

impl BasisSet {
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Number of measurement times including t_0.
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn local_index(&self, a: usize, b: usize) -> usize {
        a * self.dim_b + b
    }

    pub fn split_local(&self, ab: usize) -> (usize, usize) {
        (ab / self.dim_b, ab % self.dim_b)
    }

    /// |a_n⟩ ⊗ |b_n⟩.
    pub fn product_vector(&self, n: usize, a: usize, b: usize) -> Vec<Complex64> {
        kron_vec(&self.local_a[n].vector(a), &self.local_b[n].vector(b))
    }

    /// Thermal occupation e^{-β_A E}/Z_A of a local A level at time n.
    pub fn thermal_a(&self, n: usize, a: usize) -> f64 {
        (-self.beta_a * self.energies_a[n][a]).exp() / self.z_a
    }

    pub fn thermal_b(&self, n: usize, b: usize) -> f64 {
        (-self.beta_b * self.energies_b[n][b]).exp() / self.z_b
    }

    fn ensure_two_time(&self) -> Result<(), BayesError> {
        if self.n_times() != 2 {
            return Err(BayesError::NotTwoTime(self.n_times()));
        }
        Ok(())
    }
}

/// Builds every basis the network needs.
///
/// Local bases use the local Hamiltonian as tie-break, the global basis uses
/// H_A ⊗ I + I ⊗ H_B, so degenerate eigenvectors stay inside energy
/// subspaces.
pub fn build_bases(spec: &BipartiteSpec, grid: &TimeGrid) -> Result<BasisSet, BayesError> {
    let rho0 = build_initial_state(spec)?;
    let (da, db) = (spec.dim_a(), spec.dim_b());
    let d = da * db;
    let global0 = hermitian_eigendecompose(&rho0, Some(&spec.total_local_hamiltonian()))?;
    let populations: Vec<f64> = global0.values.iter().map(|p| p.max(0.0)).collect();
    let za = crate::system::gibbs_state(&spec.h_a, spec.beta_a)?.z;
    let zb = crate::system::gibbs_state(&spec.h_b, spec.beta_b)?.z;

    let times: Vec<f64> = std::iter::once(0.0).chain(grid.times().iter().copied()).collect();
    let mut global = Vec::with_capacity(times.len());
    let mut unitaries = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    let mut local_a = Vec::with_capacity(times.len());
    let mut local_b = Vec::with_capacity(times.len());
    let mut energies_a = Vec::with_capacity(times.len());
    let mut energies_b = Vec::with_capacity(times.len());
    let mut cond = Vec::with_capacity(times.len());

    for &t in &times {
        let u = if t == 0.0 {
            ComplexMatrix::identity(d)
        } else {
            spec.unitary(t)?
        };
        let rho = evolve(&rho0, &u)?;
        let vecs: Vec<Vec<Complex64>> = (0..d).map(|s| u.mul_vec(&global0.vector(s))).collect();
        let ra = partial_trace(&rho, da, db, Subsystem::A)?;
        let rb = partial_trace(&rho, da, db, Subsystem::B)?;
        let la = hermitian_eigendecompose(&ra, Some(&spec.h_a))?;
        let lb = hermitian_eigendecompose(&rb, Some(&spec.h_b))?;
        let ea: Vec<f64> = (0..da)
            .map(|a| spec.h_a.sandwich(&la.vector(a), &la.vector(a)).re)
            .collect();
        let eb: Vec<f64> = (0..db)
            .map(|b| spec.h_b.sandwich(&lb.vector(b), &lb.vector(b)).re)
            .collect();
        let products: Vec<Vec<Complex64>> = (0..da)
            .flat_map(|a| (0..db).map(move |b| (a, b)))
            .map(|(a, b)| kron_vec(&la.vector(a), &lb.vector(b)))
            .collect();
        let table: Vec<Vec<f64>> = vecs
            .iter()
            .map(|sv| products.iter().map(|p| inner(p, sv).norm_sqr()).collect())
            .collect();
        global.push(vecs);
        unitaries.push(u);
        states.push(rho);
        local_a.push(la);
        local_b.push(lb);
        energies_a.push(ea);
        energies_b.push(eb);
        cond.push(table);
    }

    Ok(BasisSet {
        dim_a: da,
        dim_b: db,
        times,
        populations,
        global,
        unitaries,
        states,
        local_a,
        local_b,
        energies_a,
        energies_b,
        cond,
        beta_a: spec.beta_a,
        beta_b: spec.beta_b,
        z_a: za,
        z_b: zb,
    })
}

/// P(a_n, b_n | s_n) = |⟨a_n b_n|s_n⟩|².
pub fn conditional_prob(
    basis: &BasisSet,
    n: usize,
    a: usize,
    b: usize,
    s: usize,
) -> Result<f64, BayesError> {
    if n >= basis.n_times() || a >= basis.dim_a || b >= basis.dim_b || s >= basis.dim() {
        return Err(BayesError::IndexOutOfRange(format!(
            "n={n}, a={a}, b={b}, s={s} for {} times, dims {}x{}",
            basis.n_times(),
            basis.dim_a,
            basis.dim_b
        )));
    }
    Ok(basis.cond[n][s][basis.local_index(a, b)])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTrajectory {
    /// Global label (s for forward paths, s* for reversed ones).
    pub s: usize,
    /// Local outcomes (a, b) in the order they are measured.
    pub outcomes: Vec<(usize, usize)>,
    pub weight: f64,
}

/// All conditional trajectories (s, a_0, b_0, …, a_N, b_N) with weight
/// P_s Π_n P(a_n, b_n|s_n) above [`PROBABILITY_FLOOR`].
///
/// The index space is split into one chunk per global label; chunks are
/// evaluated in parallel and concatenated in label order.
pub fn enumerate_trajectories(basis: &BasisSet) -> Vec<ConditionalTrajectory> {
    let d = basis.dim();
    let nt = basis.n_times();
    let per_s = d.pow(nt as u32);
    let chunks: Vec<Vec<ConditionalTrajectory>> = (0..d)
        .into_par_iter()
        .map(|s| {
            let ps = basis.populations[s];
            let mut out = Vec::new();
            if ps < PROBABILITY_FLOOR {
                return out;
            }
            for flat in 0..per_s {
                let mut rest = flat;
                let mut w = ps;
                let mut outcomes = vec![(0, 0); nt];
                // last time varies fastest
                for n in (0..nt).rev() {
                    let ab = rest % d;
                    rest /= d;
                    w *= basis.cond[n][s][ab];
                    outcomes[n] = basis.split_local(ab);
                }
                if w >= PROBABILITY_FLOOR {
                    out.push(ConditionalTrajectory {
                        s,
                        outcomes,
                        weight: w,
                    });
                }
            }
            out
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// How the reversed process picks its global eigenvectors |s*⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReverseProtocol {
    /// |s*⟩ = U(t_1)|s⟩, eigenvectors of ρ_AB(t_1). The reversed path then
    /// runs back from the final state.
    Retrodictive,
    /// |s*⟩ = |s⟩, eigenvectors of ρ_AB(0); the reversed process starts from
    /// the initial preparation and runs with U†(t_1).
    Backward,
}

impl ReverseProtocol {
    pub fn name(self) -> &'static str {
        match self {
            Self::Retrodictive => "retrodictive",
            Self::Backward => "backward",
        }
    }
}

/// Reverse conditional probabilities for a two-time basis:
/// `first[s*][a1b1]` = |⟨a_1 b_1|s*⟩|² and `second[s*][a0b0]` =
/// |⟨a_0 b_0|U†(t_1)|s*⟩|².
#[derive(Debug, Clone)]
pub struct ReverseTables {
    pub protocol: ReverseProtocol,
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
}

pub fn reverse_tables(
    basis: &BasisSet,
    protocol: ReverseProtocol,
) -> Result<ReverseTables, BayesError> {
    basis.ensure_two_time()?;
    let d = basis.dim();
    let star: Vec<Vec<Complex64>> = match protocol {
        ReverseProtocol::Retrodictive => basis.global[1].clone(),
        ReverseProtocol::Backward => basis.global[0].clone(),
    };
    let u_dag = basis.unitaries[1].adjoint();
    let p1: Vec<Vec<Complex64>> = (0..d)
        .map(|ab| {
            let (a, b) = basis.split_local(ab);
            basis.product_vector(1, a, b)
        })
        .collect();
    let p0: Vec<Vec<Complex64>> = (0..d)
        .map(|ab| {
            let (a, b) = basis.split_local(ab);
            basis.product_vector(0, a, b)
        })
        .collect();
    let mut first = Vec::with_capacity(d);
    let mut second = Vec::with_capacity(d);
    for sv in &star {
        let back = u_dag.mul_vec(sv);
        first.push(p1.iter().map(|p| inner(p, sv).norm_sqr()).collect());
        second.push(p0.iter().map(|p| inner(p, &back).norm_sqr()).collect());
    }
    Ok(ReverseTables {
        protocol,
        first,
        second,
    })
}

/// Reversed trajectories Γ* = (s*, a_1, b_1, a_0, b_0) with weight
/// P_{s*} |⟨a_1 b_1|s*⟩|² |⟨a_0 b_0|U†(t_1)|s*⟩|². Populations P_{s*} equal
/// P_s under both protocols.
pub fn reverse_enumerate(
    basis: &BasisSet,
    protocol: ReverseProtocol,
) -> Result<Vec<ConditionalTrajectory>, BayesError> {
    let tables = reverse_tables(basis, protocol)?;
    let d = basis.dim();
    let mut out = Vec::new();
    for s_star in 0..d {
        let p = basis.populations[s_star];
        if p < PROBABILITY_FLOOR {
            continue;
        }
        for ab1 in 0..d {
            for ab0 in 0..d {
                let w = p * tables.first[s_star][ab1] * tables.second[s_star][ab0];
                if w >= PROBABILITY_FLOOR {
                    out.push(ConditionalTrajectory {
                        s: s_star,
                        outcomes: vec![basis.split_local(ab1), basis.split_local(ab0)],
                        weight: w,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Local marginal tables of a two-time enumeration.
#[derive(Debug, Clone)]
pub struct LocalMarginals {
    /// 𝒫(a_1, b_1) summed over s, a_0, b_0; indexed by a_1 * d_B + b_1.
    pub joint1: Vec<f64>,
    /// ⟨a_1 b_1|ρ_AB(t_1)|a_1 b_1⟩.
    pub joint1_direct: Vec<f64>,
    pub a1: Vec<f64>,
    pub b1: Vec<f64>,
    pub joint0: Vec<f64>,
    pub joint0_direct: Vec<f64>,
    pub a0: Vec<f64>,
    pub b0: Vec<f64>,
}

impl LocalMarginals {
    /// Largest disagreement between summed and direct joint tables.
    pub fn route_discrepancy(&self) -> f64 {
        self.joint1
            .iter()
            .zip(&self.joint1_direct)
            .chain(self.joint0.iter().zip(&self.joint0_direct))
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

fn diagonal_in_local_basis(basis: &BasisSet, n: usize) -> Vec<f64> {
    (0..basis.dim())
        .map(|ab| {
            let (a, b) = basis.split_local(ab);
            let v = basis.product_vector(n, a, b);
            basis.states[n].sandwich(&v, &v).re
        })
        .collect()
}

fn row_col_sums(basis: &BasisSet, joint: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut pa = vec![0.0; basis.dim_a];
    let mut pb = vec![0.0; basis.dim_b];
    for (ab, &p) in joint.iter().enumerate() {
        let (a, b) = basis.split_local(ab);
        pa[a] += p;
        pb[b] += p;
    }
    (pa, pb)
}

pub fn local_marginals(
    basis: &BasisSet,
    trajectories: &[ConditionalTrajectory],
) -> Result<LocalMarginals, BayesError> {
    basis.ensure_two_time()?;
    let d = basis.dim();
    let mut joint0 = vec![0.0; d];
    let mut joint1 = vec![0.0; d];
    for tr in trajectories {
        let (a0, b0) = tr.outcomes[0];
        let (a1, b1) = tr.outcomes[1];
        joint0[basis.local_index(a0, b0)] += tr.weight;
        joint1[basis.local_index(a1, b1)] += tr.weight;
    }
    let (a0, b0) = row_col_sums(basis, &joint0);
    let (a1, b1) = row_col_sums(basis, &joint1);
    Ok(LocalMarginals {
        joint1_direct: diagonal_in_local_basis(basis, 1),
        joint0_direct: diagonal_in_local_basis(basis, 0),
        joint1,
        a1,
        b1,
        joint0,
        a0,
        b0,
    })
}

/// Local path probability 𝒫(a_0, b_0, a_1, b_1) = Σ_s P_s P(a_0 b_0|s) P(a_1 b_1|s_1),
/// returned as `table[a0b0][a1b1]`.
pub fn local_path_table(basis: &BasisSet) -> Result<Vec<Vec<f64>>, BayesError> {
    basis.ensure_two_time()?;
    let d = basis.dim();
    let mut table = vec![vec![0.0; d]; d];
    for s in 0..d {
        let ps = basis.populations[s];
        for (ab0, row) in table.iter_mut().enumerate() {
            let w0 = ps * basis.cond[0][s][ab0];
            for (ab1, cell) in row.iter_mut().enumerate() {
                *cell += w0 * basis.cond[1][s][ab1];
            }
        }
    }
    Ok(table)
}

/// Two-point-measurement table P_{a_0} P_{b_0} |⟨a_1 b_1|U|a_0 b_0⟩|², valid
/// for uncorrelated preparations.
pub fn tpm_table(basis: &BasisSet) -> Result<Vec<Vec<f64>>, BayesError> {
    basis.ensure_two_time()?;
    let d = basis.dim();
    let u = &basis.unitaries[1];
    let mut table = vec![vec![0.0; d]; d];
    for (ab0, row) in table.iter_mut().enumerate() {
        let (a0, b0) = basis.split_local(ab0);
        let p = basis.local_a[0].values[a0].max(0.0) * basis.local_b[0].values[b0].max(0.0);
        let evolved = u.mul_vec(&basis.product_vector(0, a0, b0));
        for (ab1, cell) in row.iter_mut().enumerate() {
            let (a1, b1) = basis.split_local(ab1);
            *cell = p * inner(&basis.product_vector(1, a1, b1), &evolved).norm_sqr();
        }
    }
    Ok(table)
}

/// Local path probabilities as diagonal expectations of the Choi-type
/// operator Λ(t) = (I ⊗ 𝓔)(Σ_s p_s |s⟩⟨s| ⊗ |s⟩⟨s|), 𝓔(ρ) = UρU†.
/// Returned as `table[a0b0][a1b1]`.
pub fn choi_path_probability(
    spec: &BipartiteSpec,
    grid: &TimeGrid,
) -> Result<Vec<Vec<f64>>, BayesError> {
    if grid.len() != 1 {
        return Err(BayesError::NotTwoTime(grid.len() + 1));
    }
    let basis = build_bases(spec, grid)?;
    let d = basis.dim();
    let mut omega = ComplexMatrix::zeros(d * d, d * d);
    for s in 0..d {
        let v = &basis.global[0][s];
        let proj = ComplexMatrix::outer(v, v);
        let term = tensor_product(&proj, &proj).scale_real(basis.populations[s]);
        omega = &omega + &term;
    }
    let channel = tensor_product(&ComplexMatrix::identity(d), &basis.unitaries[1]);
    let lambda = &(&channel * &omega) * &channel.adjoint();
    let mut table = vec![vec![0.0; d]; d];
    for (ab0, row) in table.iter_mut().enumerate() {
        let (a0, b0) = basis.split_local(ab0);
        let v0 = basis.product_vector(0, a0, b0);
        for (ab1, cell) in row.iter_mut().enumerate() {
            let (a1, b1) = basis.split_local(ab1);
            let v = kron_vec(&v0, &basis.product_vector(1, a1, b1));
            *cell = lambda.sandwich(&v, &v).re;
        }
    }
    Ok(table)
}

/// Largest entry-wise difference of two path tables.
pub fn table_distance(x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    x.iter()
        .flatten()
        .zip(y.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit_example::{build_example_spec, QubitExampleParams};

    fn basis(correlated: bool, t: f64) -> BasisSet {
        let p = QubitExampleParams::from_occupations(0.2, 0.3, 1.0, correlated);
        build_bases(&build_example_spec(&p), &TimeGrid::single(t).unwrap()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![-0.1]).is_err());
        assert!(TimeGrid::new(vec![f64::NAN]).is_err());
        assert_eq!(TimeGrid::new(vec![0.0, 1.0]).unwrap().len(), 2);
    }

    #[test]
    fn enumeration_normalized_and_ordered() {
        for corr in [false, true] {
            let b = basis(corr, 0.4);
            let fwd = enumerate_trajectories(&b);
            let total: f64 = fwd.iter().map(|t| t.weight).sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(fwd.windows(2).all(|w| w[0].s <= w[1].s));
            for p in [ReverseProtocol::Retrodictive, ReverseProtocol::Backward] {
                let rev: f64 = reverse_enumerate(&b, p).unwrap().iter().map(|t| t.weight).sum();
                assert!((rev - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_time_reverse_equals_forward() {
        let b = basis(true, 0.0);
        let fwd = local_path_table(&b).unwrap();
        let rev = reverse_enumerate(&b, ReverseProtocol::Backward).unwrap();
        let mut table = vec![vec![0.0; 4]; 4];
        for tr in rev {
            let (a1, b1) = tr.outcomes[0];
            let (a0, b0) = tr.outcomes[1];
            table[b.local_index(a0, b0)][b.local_index(a1, b1)] += tr.weight;
        }
        assert!(table_distance(&fwd, &table) < 1e-12);
    }

    #[test]
    fn uncorrelated_paths_agree_with_two_point_measurement() {
        let b = basis(false, 0.7);
        let paths = local_path_table(&b).unwrap();
        assert!(table_distance(&paths, &tpm_table(&b).unwrap()) < 1e-12);
    }

    #[test]
    fn marginals_agree_across_routes() {
        let b = basis(true, 0.3);
        let m = local_marginals(&b, &enumerate_trajectories(&b)).unwrap();
        assert!(m.route_discrepancy() < 1e-12);
        for (x, y) in m.a0.iter().zip(&b.local_a[0].values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn choi_route_matches_enumeration() {
        let p = QubitExampleParams::from_occupations(0.2, 0.3, 1.0, true);
        let spec = build_example_spec(&p);
        let grid = TimeGrid::single(0.45).unwrap();
        let b = build_bases(&spec, &grid).unwrap();
        let choi = choi_path_probability(&spec, &grid).unwrap();
        assert!(table_distance(&choi, &local_path_table(&b).unwrap()) < 1e-12);
    }

    #[test]
    fn conditional_index_checks() {
        let b = basis(false, 0.2);
        assert!(conditional_prob(&b, 2, 0, 0, 0).is_err());
        assert!(conditional_prob(&b, 0, 2, 0, 0).is_err());
        let row: f64 = (0..4)
            .map(|ab| {
                let (a, bb) = b.split_local(ab);
                conditional_prob(&b, 1, a, bb, 3).unwrap()
            })
            .sum();
        assert!((row - 1.0).abs() < 1e-12);
    }
}
