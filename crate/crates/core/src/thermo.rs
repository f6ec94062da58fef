//! Stochastic thermodynamics of augmented trajectories.
//!
//! An augmented trajectory is a forward conditional trajectory
//! Γ = (s, a_0, b_0, a_1, b_1) paired with a reverse anchor s*. Its partner
//! is the reversed trajectory Γ* = (s*, a_1, b_1, a_0, b_0) paired with s.
//! Anchors are drawn uniformly, so the augmented weights are
//! W_f = 𝒫[Γ]/d and W_r = 𝒫[Γ*]/d and their log-ratio is exactly the
//! entropy-production exponent of the pair.
//!
//! Averages of the form ⟨e^{-X}⟩ are summed over the full augmented index
//! space. Where a tuple carries weight and X is finite the integrand is
//! W e^{-X}; elsewhere (zero-probability branches, infinite X) the integrand
//! is the closed form left after cancelling the common factor between the
//! weight and e^{-X}. The latter part is reported separately as the
//! support deficit, next to the average over weighted tuples only.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bayesnet::{
    enumerate_trajectories, local_marginals, reverse_enumerate, reverse_tables, BasisSet,
    BayesError, ReverseProtocol, PROBABILITY_FLOOR,
};
use crate::qcore::{relative_entropy, von_neumann_entropy, LinalgError};
use crate::system::gibbs_state;

/// Support points closer than this on every coordinate share a bin.
pub const BINNING_TOL: f64 = 1e-9;

/// |Q_A + Q_B| at or below this counts as energy conserving.
pub const ENERGY_TOL: f64 = 1e-9;

/// Largest tolerated |ln W_f - ln W_r - exponent| while building ledgers.
pub const LEDGER_IDENTITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ThermoError {
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    System(#[from] crate::system::SystemError),
    #[error("log of zero on retained trajectory {0:?} (probability floor misconfigured)")]
    LogOfZero(TupleIndex),
    #[error("ledger identity violated on {tuple:?}: {field} off by {residual:e}")]
    LedgerIdentity {
        tuple: TupleIndex,
        field: &'static str,
        residual: f64,
    },
    #[error("{quantity} is defined under the {expected:?} measure, not {got:?}")]
    MeasureMismatch {
        quantity: &'static str,
        expected: Measure,
        got: Measure,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Measure {
    Forward,
    Reverse,
}

/// Stochastic quantities that satisfy an individual integral theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    I0,
    I1,
    J0,
    J1,
    C0,
    C1,
    SigmaA,
    SigmaB,
    Gamma,
}

impl Quantity {
    pub const ALL: [Quantity; 9] = [
        Quantity::I0,
        Quantity::I1,
        Quantity::J0,
        Quantity::J1,
        Quantity::C0,
        Quantity::C1,
        Quantity::SigmaA,
        Quantity::SigmaB,
        Quantity::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::I0 => "I0",
            Quantity::I1 => "I1",
            Quantity::J0 => "J0",
            Quantity::J1 => "J1",
            Quantity::C0 => "C0",
            Quantity::C1 => "C1",
            Quantity::SigmaA => "Sigma_A",
            Quantity::SigmaB => "Sigma_B",
            Quantity::Gamma => "gamma",
        }
    }

    /// Final-time informational terms are averaged over reversed paths,
    /// everything else over forward paths.
    pub fn measure(self) -> Measure {
        match self {
            Quantity::I1 | Quantity::J1 | Quantity::C1 => Measure::Reverse,
            _ => Measure::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TupleIndex {
    pub s: usize,
    pub a0: usize,
    pub b0: usize,
    pub a1: usize,
    pub b1: usize,
    pub s_star: usize,
}

/// One point of the augmented index space with the factors of both weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedTrajectory {
    pub index: TupleIndex,
    pub p_s: f64,
    pub p_s_star: f64,
    /// P(a_0 b_0|s).
    pub fwd0: f64,
    /// P(a_1 b_1|s_1).
    pub fwd1: f64,
    /// |⟨a_1 b_1|s*⟩|².
    pub rev1: f64,
    /// |⟨a_0 b_0|U†(t_1)|s*⟩|².
    pub rev0: f64,
}

impl AugmentedTrajectory {
    /// 𝒫[Γ].
    pub fn path_forward(&self) -> f64 {
        self.p_s * self.fwd0 * self.fwd1
    }

    /// 𝒫[Γ*].
    pub fn path_reverse(&self) -> f64 {
        self.p_s_star * self.rev1 * self.rev0
    }
}

/// Every stochastic quantity of one retained augmented trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ledger {
    pub q_a: f64,
    pub q_b: f64,
    pub i0: f64,
    pub i1: f64,
    pub j0: f64,
    pub j1: f64,
    pub c0: f64,
    pub c1: f64,
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub gamma: f64,
    pub k: f64,
    pub energy_conserving: bool,
    /// β_A Q_A + β_B Q_B + I_0 - I_1 - Σ_A - Σ_B + γ.
    pub exponent_exact: f64,
    /// Q_A Δβ + I_0 - I_1 - Σ_A - Σ_B + γ.
    pub exponent_heat: f64,
    /// ln 𝒫[Γ] - ln 𝒫[Γ*] - exponent_exact.
    pub detailed_residual: f64,
}

/// Forward/reverse augmented ensemble of a two-time experiment.
#[derive(Debug, Clone)]
pub struct AugmentedEnsemble {
    pub protocol: ReverseProtocol,
    pub dim_a: usize,
    pub dim_b: usize,
    pub beta_a: f64,
    pub beta_b: f64,
    pub tuples: Vec<AugmentedTrajectory>,
    energies_a: [Vec<f64>; 2],
    energies_b: [Vec<f64>; 2],
    /// ln of e^{-βE_{x_1}}/Z at t_1.
    ln_thermal_a1: Vec<f64>,
    ln_thermal_b1: Vec<f64>,
    joint0: Vec<f64>,
    joint1: Vec<f64>,
    pa0: Vec<f64>,
    pb0: Vec<f64>,
    pa1: Vec<f64>,
    pb1: Vec<f64>,
}

fn ln(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

impl AugmentedEnsemble {
    pub fn new(basis: &BasisSet, protocol: ReverseProtocol) -> Result<Self, ThermoError> {
        let rev = reverse_tables(basis, protocol)?;
        let forward = enumerate_trajectories(basis);
        let marg = local_marginals(basis, &forward)?;
        let d = basis.dim();
        let db = basis.dim_b;
        let da = basis.dim_a;

        let tuples: Vec<AugmentedTrajectory> = (0..d)
            .into_par_iter()
            .map(|s| {
                let mut chunk = Vec::with_capacity(d * d * d);
                for ab0 in 0..d {
                    for ab1 in 0..d {
                        for s_star in 0..d {
                            chunk.push(AugmentedTrajectory {
                                index: TupleIndex {
                                    s,
                                    a0: ab0 / db,
                                    b0: ab0 % db,
                                    a1: ab1 / db,
                                    b1: ab1 % db,
                                    s_star,
                                },
                                p_s: basis.populations[s],
                                p_s_star: basis.populations[s_star],
                                fwd0: basis.cond[0][s][ab0],
                                fwd1: basis.cond[1][s][ab1],
                                rev1: rev.first[s_star][ab1],
                                rev0: rev.second[s_star][ab0],
                            });
                        }
                    }
                }
                chunk
            })
            .flatten()
            .collect();

        let sums = |joint: &[f64]| {
            let mut pa = vec![0.0; da];
            let mut pb = vec![0.0; db];
            for (ab, &p) in joint.iter().enumerate() {
                pa[ab / db] += p;
                pb[ab % db] += p;
            }
            (pa, pb)
        };
        let joint0 = marg.joint0_direct.iter().map(|p| p.max(0.0)).collect::<Vec<_>>();
        let joint1 = marg.joint1_direct.iter().map(|p| p.max(0.0)).collect::<Vec<_>>();
        let (pa1, pb1) = sums(&joint1);
        let pa0 = basis.local_a[0].values.iter().map(|p| p.max(0.0)).collect();
        let pb0 = basis.local_b[0].values.iter().map(|p| p.max(0.0)).collect();
        let ln_za = basis.z_a.ln();
        let ln_zb = basis.z_b.ln();
        Ok(Self {
            protocol,
            dim_a: da,
            dim_b: db,
            beta_a: basis.beta_a,
            beta_b: basis.beta_b,
            ln_thermal_a1: basis.energies_a[1]
                .iter()
                .map(|e| -basis.beta_a * e - ln_za)
                .collect(),
            ln_thermal_b1: basis.energies_b[1]
                .iter()
                .map(|e| -basis.beta_b * e - ln_zb)
                .collect(),
            energies_a: [basis.energies_a[0].clone(), basis.energies_a[1].clone()],
            energies_b: [basis.energies_b[0].clone(), basis.energies_b[1].clone()],
            tuples,
            joint0,
            joint1,
            pa0,
            pb0,
            pa1,
            pb1,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn delta_beta(&self) -> f64 {
        self.beta_a - self.beta_b
    }

    fn ab(&self, a: usize, b: usize) -> usize {
        a * self.dim_b + b
    }

    fn weight(&self, t: &AugmentedTrajectory, m: Measure) -> f64 {
        let d = self.dim() as f64;
        match m {
            Measure::Forward => t.path_forward() / d,
            Measure::Reverse => t.path_reverse() / d,
        }
    }

    fn carries(&self, t: &AugmentedTrajectory, m: Measure) -> bool {
        match m {
            Measure::Forward => t.path_forward() >= PROBABILITY_FLOOR,
            Measure::Reverse => t.path_reverse() >= PROBABILITY_FLOOR,
        }
    }

    pub fn heat_a(&self, t: &AugmentedTrajectory) -> f64 {
        self.energies_a[1][t.index.a1] - self.energies_a[0][t.index.a0]
    }

    pub fn heat_b(&self, t: &AugmentedTrajectory) -> f64 {
        self.energies_b[1][t.index.b1] - self.energies_b[0][t.index.b0]
    }

    /// Value of `q` on a tuple; may be infinite off the support.
    pub fn quantity(&self, q: Quantity, t: &AugmentedTrajectory) -> f64 {
        let TupleIndex { a0, b0, a1, b1, .. } = t.index;
        let j = |joint: f64, pa: f64, pb: f64| ln(joint) - ln(pa) - ln(pb);
        match q {
            Quantity::J0 => j(self.joint0[self.ab(a0, b0)], self.pa0[a0], self.pb0[b0]),
            Quantity::C0 => ln(t.p_s) - ln(self.joint0[self.ab(a0, b0)]),
            Quantity::I0 => self.quantity(Quantity::J0, t) + self.quantity(Quantity::C0, t),
            Quantity::J1 => j(self.joint1[self.ab(a1, b1)], self.pa1[a1], self.pb1[b1]),
            Quantity::C1 => ln(t.p_s_star) - ln(self.joint1[self.ab(a1, b1)]),
            Quantity::I1 => self.quantity(Quantity::J1, t) + self.quantity(Quantity::C1, t),
            Quantity::SigmaA => ln(self.pa1[a1]) - self.ln_thermal_a1[a1],
            Quantity::SigmaB => ln(self.pb1[b1]) - self.ln_thermal_b1[b1],
            Quantity::Gamma => ln(t.fwd0) + ln(t.fwd1) - ln(t.rev1) - ln(t.rev0),
        }
    }

    /// W e^{-X} with the common factor cancelled analytically, so it stays
    /// defined where the weight vanishes.
    fn cancelled_integrand(&self, q: Quantity, t: &AugmentedTrajectory) -> f64 {
        let d = self.dim() as f64;
        let TupleIndex { a0, b0, a1, b1, .. } = t.index;
        let j0 = self.joint0[self.ab(a0, b0)];
        let j1 = self.joint1[self.ab(a1, b1)];
        let ratio = |w: f64, num: f64, den: f64| if den > 0.0 { w * num / den } else { 0.0 };
        match q {
            Quantity::I0 => t.fwd0 * t.fwd1 * self.pa0[a0] * self.pb0[b0] / d,
            Quantity::C0 => t.fwd0 * t.fwd1 * j0 / d,
            Quantity::J0 => ratio(self.weight(t, Measure::Forward), self.pa0[a0] * self.pb0[b0], j0),
            Quantity::SigmaA => ratio(
                self.weight(t, Measure::Forward),
                self.ln_thermal_a1[a1].exp(),
                self.pa1[a1],
            ),
            Quantity::SigmaB => ratio(
                self.weight(t, Measure::Forward),
                self.ln_thermal_b1[b1].exp(),
                self.pb1[b1],
            ),
            Quantity::Gamma => t.p_s * t.rev1 * t.rev0 / d,
            Quantity::I1 => t.rev1 * t.rev0 * self.pa1[a1] * self.pb1[b1] / d,
            Quantity::C1 => t.rev1 * t.rev0 * j1 / d,
            Quantity::J1 => ratio(self.weight(t, Measure::Reverse), self.pa1[a1] * self.pb1[b1], j1),
        }
    }

    /// Ledger of a tuple. `None` unless both path probabilities clear the
    /// floor.
    pub fn ledger(&self, t: &AugmentedTrajectory) -> Result<Option<Ledger>, ThermoError> {
        let pf = t.path_forward();
        let pr = t.path_reverse();
        if pf < PROBABILITY_FLOOR || pr < PROBABILITY_FLOOR {
            return Ok(None);
        }
        let v = |q| self.quantity(q, t);
        let (j0, c0, j1, c1) = (v(Quantity::J0), v(Quantity::C0), v(Quantity::J1), v(Quantity::C1));
        let (i0, i1) = (v(Quantity::I0), v(Quantity::I1));
        let (sigma_a, sigma_b, gamma) = (v(Quantity::SigmaA), v(Quantity::SigmaB), v(Quantity::Gamma));
        let q_a = self.heat_a(t);
        let q_b = self.heat_b(t);
        let k = i1 - i0 + sigma_a + sigma_b;
        let info = i0 - i1 - sigma_a - sigma_b + gamma;
        let exponent_exact = self.beta_a * q_a + self.beta_b * q_b + info;
        let exponent_heat = q_a * self.delta_beta() + info;
        let all = [j0, c0, j1, c1, i0, i1, sigma_a, sigma_b, gamma, k];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(ThermoError::LogOfZero(t.index));
        }
        let i_split = (i0 - (j0 + c0)).abs().max((i1 - (j1 + c1)).abs());
        if i_split > 1e-12 {
            return Err(ThermoError::LedgerIdentity {
                tuple: t.index,
                field: "I = J + C",
                residual: i_split,
            });
        }
        let detailed_residual = pf.ln() - pr.ln() - exponent_exact;
        if detailed_residual.abs() > LEDGER_IDENTITY_TOL {
            return Err(ThermoError::LedgerIdentity {
                tuple: t.index,
                field: "detailed fluctuation relation",
                residual: detailed_residual,
            });
        }
        Ok(Some(Ledger {
            q_a,
            q_b,
            i0,
            i1,
            j0,
            j1,
            c0,
            c1,
            sigma_a,
            sigma_b,
            gamma,
            k,
            energy_conserving: (q_a + q_b).abs() <= ENERGY_TOL,
            exponent_exact,
            exponent_heat,
            detailed_residual,
        }))
    }

    /// True when every retained pair conserves bare energy.
    pub fn all_energy_conserving(&self) -> Result<bool, ThermoError> {
        Ok(compute_ledgers(self)?
            .iter()
            .all(|(_, l)| l.energy_conserving))
    }
}

/// Ledgers of every retained augmented trajectory, in index order.
pub fn compute_ledgers(
    ens: &AugmentedEnsemble,
) -> Result<Vec<(AugmentedTrajectory, Ledger)>, ThermoError> {
    let mut out = Vec::new();
    for t in &ens.tuples {
        if let Some(l) = ens.ledger(t)? {
            out.push((*t, l));
        }
    }
    Ok(out)
}

/// Largest |ln 𝒫[Γ] - ln 𝒫[Γ*] - exponent| over retained pairs.
pub fn max_detailed_residual(ens: &AugmentedEnsemble) -> Result<f64, ThermoError> {
    let mut worst: f64 = 0.0;
    for t in &ens.tuples {
        let pf = t.path_forward();
        let pr = t.path_reverse();
        if pf < PROBABILITY_FLOOR || pr < PROBABILITY_FLOOR {
            continue;
        }
        let exponent = ens.beta_a * ens.heat_a(t)
            + ens.beta_b * ens.heat_b(t)
            + ens.quantity(Quantity::I0, t)
            - ens.quantity(Quantity::I1, t)
            - ens.quantity(Quantity::SigmaA, t)
            - ens.quantity(Quantity::SigmaB, t)
            + ens.quantity(Quantity::Gamma, t);
        worst = worst.max((pf.ln() - pr.ln() - exponent).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralFt {
    pub quantity: &'static str,
    pub measure: Measure,
    /// ⟨e^{-X}⟩ over the full index space.
    pub value: f64,
    /// Contribution of tuples carrying weight with finite X.
    pub restricted: f64,
    /// Contribution of the remaining tuples (cancelled integrand).
    pub deficit: f64,
}

/// ⟨e^{-X}⟩ under the quantity's defining measure.
pub fn integral_ft(
    ens: &AugmentedEnsemble,
    q: Quantity,
    measure: Measure,
) -> Result<IntegralFt, ThermoError> {
    if q.measure() != measure {
        return Err(ThermoError::MeasureMismatch {
            quantity: q.name(),
            expected: q.measure(),
            got: measure,
        });
    }
    let mut restricted = 0.0;
    let mut deficit = 0.0;
    for t in &ens.tuples {
        let x = ens.quantity(q, t);
        if ens.carries(t, measure) && x.is_finite() {
            restricted += ens.weight(t, measure) * (-x).exp();
        } else {
            deficit += ens.cancelled_integrand(q, t);
        }
    }
    Ok(IntegralFt {
        quantity: q.name(),
        measure,
        value: restricted + deficit,
        restricted,
        deficit,
    })
}

/// ⟨X⟩ over tuples carrying weight under the defining measure.
pub fn average(ens: &AugmentedEnsemble, q: Quantity) -> f64 {
    let m = q.measure();
    ens.tuples
        .iter()
        .filter(|t| ens.carries(t, m))
        .map(|t| (ens.weight(t, m), ens.quantity(q, t)))
        .filter(|(_, x)| x.is_finite())
        .map(|(w, x)| w * x)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExponentForm {
    /// Q_A Δβ.
    HeatTimesDeltaBeta,
    /// β_A Q_A + β_B Q_B.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CombinedFt {
    pub form: ExponentForm,
    pub value: f64,
    pub restricted: f64,
    pub deficit: f64,
}

/// ⟨exp(-(Q_A Δβ + I_0 - I_1 - Σ_A - Σ_B + γ))⟩ over forward pairs. The
/// Q_A Δβ form is used when every retained pair conserves energy, the
/// exact β_A Q_A + β_B Q_B form otherwise.
pub fn combined_integral_ft(ens: &AugmentedEnsemble) -> Result<CombinedFt, ThermoError> {
    let form = if ens.all_energy_conserving()? {
        ExponentForm::HeatTimesDeltaBeta
    } else {
        ExponentForm::Exact
    };
    let mut restricted = 0.0;
    let mut deficit = 0.0;
    let d = ens.dim() as f64;
    for t in &ens.tuples {
        match ens.ledger(t)? {
            Some(l) => {
                let x = match form {
                    ExponentForm::HeatTimesDeltaBeta => l.exponent_heat,
                    ExponentForm::Exact => l.exponent_exact,
                };
                restricted += ens.weight(t, Measure::Forward) * (-x).exp();
            }
            None => deficit += t.path_reverse() / d,
        }
    }
    Ok(CombinedFt {
        form,
        value: restricted + deficit,
        restricted,
        deficit,
    })
}

/// Binned probability distribution over real tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteDistribution {
    pub points: Vec<(Vec<f64>, f64)>,
    pub tol: f64,
}

fn coord_eq(x: f64, y: f64, tol: f64) -> bool {
    if x.is_infinite() || y.is_infinite() {
        x == y
    } else {
        (x - y).abs() <= tol
    }
}

impl DiscreteDistribution {
    /// Bins weighted samples; bins are returned sorted by coordinates.
    pub fn from_samples(samples: impl IntoIterator<Item = (Vec<f64>, f64)>, tol: f64) -> Self {
        let mut points: Vec<(Vec<f64>, f64)> = Vec::new();
        for (key, w) in samples {
            match points
                .iter_mut()
                .find(|(k, _)| k.len() == key.len() && k.iter().zip(&key).all(|(a, b)| coord_eq(*a, *b, tol)))
            {
                Some((_, p)) => *p += w,
                None => points.push((key, w)),
            }
        }
        points.sort_by(|(a, _), (b, _)| {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Self { points, tol }
    }

    pub fn total(&self) -> f64 {
        self.points.iter().map(|(_, p)| p).sum()
    }

    /// Probability of the bin matching `key` (0 when absent).
    pub fn prob(&self, key: &[f64]) -> f64 {
        self.points
            .iter()
            .find(|(k, _)| k.iter().zip(key).all(|(a, b)| coord_eq(*a, *b, self.tol)))
            .map_or(0.0, |(_, p)| *p)
    }

    /// Scalar support (first coordinate of each bin).
    pub fn support(&self) -> Vec<f64> {
        self.points.iter().map(|(k, _)| k[0]).collect()
    }

    /// Largest |p - q| over the union of both supports.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mine = self.points.iter().map(|(k, p)| (p - other.prob(k)).abs());
        let theirs = other.points.iter().map(|(k, p)| (p - self.prob(k)).abs());
        mine.chain(theirs).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Reverse,
}

/// Heat distribution. Forward: Q_A = E_{a_1} - E_{a_0} over 𝒫[Γ]. Reverse:
/// the heat E_{a_0} - E_{a_1} absorbed by A along Γ*, over 𝒫[Γ*].
pub fn heat_distribution(
    basis: &BasisSet,
    direction: Direction,
    protocol: ReverseProtocol,
) -> Result<DiscreteDistribution, ThermoError> {
    let ea = &basis.energies_a;
    let samples: Vec<(Vec<f64>, f64)> = match direction {
        Direction::Forward => enumerate_trajectories(basis)
            .into_iter()
            .map(|tr| {
                let (a0, _) = tr.outcomes[0];
                let (a1, _) = tr.outcomes[1];
                (vec![ea[1][a1] - ea[0][a0]], tr.weight)
            })
            .collect(),
        Direction::Reverse => reverse_enumerate(basis, protocol)?
            .into_iter()
            .map(|tr| {
                let (a1, _) = tr.outcomes[0];
                let (a0, _) = tr.outcomes[1];
                (vec![ea[0][a0] - ea[1][a1]], tr.weight)
            })
            .collect(),
    };
    Ok(DiscreteDistribution::from_samples(samples, BINNING_TOL))
}

/// Joint (Q, K, γ) statistics with the bin-by-bin detailed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointReport {
    pub forward: DiscreteDistribution,
    pub reverse: DiscreteDistribution,
    /// Largest |P_f(Q,K,γ) - e^{QΔβ-K+γ} P_r(-Q,-K,γ̄)| over finite
    /// forward bins.
    pub max_bin_residual: f64,
    pub bins_checked: usize,
    /// Reverse mass whose forward partner bin carries no weight.
    pub unmatched_reverse_mass: f64,
    pub energy_conserving: bool,
}

/// Forward P_f(Q, K, γ) from W_f and reversed P_r(Q*, K*, γ̄) from W_r.
/// On the reversed tuple Q* = E_{a_0} - E_{a_1}, K* = -K and
/// γ̄ = -ln[P̄(a_1 b_1|s*) P̄(a_0 b_0|s*_1) / P(a_0 b_0|s) P(a_1 b_1|s_1)].
pub fn joint_distribution(ens: &AugmentedEnsemble) -> Result<JointReport, ThermoError> {
    let energy_conserving = ens.all_energy_conserving()?;
    let mut fwd = Vec::new();
    let mut rev = Vec::new();
    for t in &ens.tuples {
        let k = ens.quantity(Quantity::I1, t) - ens.quantity(Quantity::I0, t)
            + ens.quantity(Quantity::SigmaA, t)
            + ens.quantity(Quantity::SigmaB, t);
        let q = ens.heat_a(t);
        if ens.carries(t, Measure::Forward) {
            let g = ens.quantity(Quantity::Gamma, t);
            fwd.push((vec![q, k, g], ens.weight(t, Measure::Forward)));
        }
        if ens.carries(t, Measure::Reverse) {
            let q_star = ens.energies_a[0][t.index.a0] - ens.energies_a[1][t.index.a1];
            let gamma_bar = -(ln(t.rev1) + ln(t.rev0) - ln(t.fwd0) - ln(t.fwd1));
            rev.push((vec![q_star, -k, gamma_bar], ens.weight(t, Measure::Reverse)));
        }
    }
    let forward = DiscreteDistribution::from_samples(fwd, BINNING_TOL);
    let reverse = DiscreteDistribution::from_samples(rev, BINNING_TOL);
    let db = ens.delta_beta();
    let mut max_bin_residual: f64 = 0.0;
    let mut bins_checked = 0;
    for (key, pf) in &forward.points {
        if key.iter().all(|x| x.is_finite()) {
            let (q, k, g) = (key[0], key[1], key[2]);
            let pr = reverse.prob(&[-q, -k, g]);
            max_bin_residual = max_bin_residual.max((pf - (q * db - k + g).exp() * pr).abs());
            bins_checked += 1;
        }
    }
    let unmatched_reverse_mass = reverse
        .points
        .iter()
        .filter(|(k, _)| {
            !k.iter().all(|x| x.is_finite()) || forward.prob(&[-k[0], -k[1], k[2]]) == 0.0
        })
        .map(|(_, p)| p)
        .sum();
    Ok(JointReport {
        forward,
        reverse,
        max_bin_residual,
        bins_checked,
        unmatched_reverse_mass,
        energy_conserving,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiRow {
    pub q: f64,
    pub p_f: f64,
    pub p_r_minus_q: f64,
    /// Ψ(Q) = E[e^{K-γ} | Q] over the full index space.
    pub psi: f64,
    /// Same conditional average restricted to retained pairs.
    pub psi_restricted: f64,
    /// P_f(Q) / P_r(-Q), NaN when P_r(-Q) is below the floor.
    pub ratio: f64,
    pub exp_q_dbeta: f64,
    /// |P_f Ψ - e^{QΔβ} P_r(-Q)|.
    pub residual: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiReport {
    pub rows: Vec<PsiRow>,
    pub energy_conserving: bool,
}

impl PsiReport {
    pub fn max_residual(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.verified)
            .map(|r| r.residual)
            .fold(0.0, f64::max)
    }

    pub fn row(&self, q: f64) -> Option<&PsiRow> {
        self.rows.iter().find(|r| (r.q - q).abs() <= BINNING_TOL)
    }
}

/// Ψ(Q) and the modified heat relation P_f(Q)/P_r(-Q) = e^{QΔβ}/Ψ(Q).
///
/// Ψ(Q) P_f(Q) sums W_f e^{K-γ} over retained pairs at heat Q; pairs whose
/// forward weight vanishes contribute their cancelled integrand
/// e^{QΔβ} W_r.
pub fn psi_factor(basis: &BasisSet, ens: &AugmentedEnsemble) -> Result<PsiReport, ThermoError> {
    let energy_conserving = ens.all_energy_conserving()?;
    let pf = heat_distribution(basis, Direction::Forward, ens.protocol)?;
    let pr = heat_distribution(basis, Direction::Reverse, ens.protocol)?;
    let db = ens.delta_beta();
    let mut rows = Vec::new();
    for (key, &p_f) in pf.points.iter().map(|(k, p)| (k, p)) {
        let q = key[0];
        if p_f < PROBABILITY_FLOOR {
            continue;
        }
        let mut restricted = 0.0;
        let mut cancelled = 0.0;
        for t in ens.tuples.iter().filter(|t| coord_eq(ens.heat_a(t), q, BINNING_TOL)) {
            match ens.ledger(t)? {
                Some(l) => restricted += ens.weight(t, Measure::Forward) * (l.k - l.gamma).exp(),
                None => {
                    if !ens.carries(t, Measure::Forward) {
                        cancelled += (q * db).exp() * ens.weight(t, Measure::Reverse);
                    }
                }
            }
        }
        let psi = (restricted + cancelled) / p_f;
        let p_r_minus_q = pr.prob(&[-q]);
        let verified = p_r_minus_q >= PROBABILITY_FLOOR;
        rows.push(PsiRow {
            q,
            p_f,
            p_r_minus_q,
            psi,
            psi_restricted: restricted / p_f,
            ratio: if verified { p_f / p_r_minus_q } else { f64::NAN },
            exp_q_dbeta: (q * db).exp(),
            residual: (p_f * psi - (q * db).exp() * p_r_minus_q).abs(),
            verified,
        });
    }
    Ok(PsiReport {
        rows,
        energy_conserving,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanHeatReport {
    pub mean_q_a: f64,
    /// ⟨Q_A⟩ Δβ from trajectories.
    pub lhs: f64,
    /// Δ⟨I⟩ + S(ρ_A‖ρ_A⁰) + S(ρ_B‖ρ_B⁰) from density matrices.
    pub rhs: f64,
    pub delta_mutual_info: f64,
    pub rel_entropy_a: f64,
    pub rel_entropy_b: f64,
    pub residual: f64,
    /// Right side ≤ 0: heat may flow from cold to hot.
    pub heat_reversal: bool,
}

/// von Neumann mutual information S(ρ_A) + S(ρ_B) - S(ρ_AB).
pub fn mutual_information(
    rho: &crate::qcore::ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
) -> Result<f64, ThermoError> {
    use crate::qcore::{partial_trace, Subsystem};
    let ra = partial_trace(rho, dim_a, dim_b, Subsystem::A)?;
    let rb = partial_trace(rho, dim_a, dim_b, Subsystem::B)?;
    Ok(von_neumann_entropy(&ra)? + von_neumann_entropy(&rb)? - von_neumann_entropy(rho)?)
}

/// Mean heat balance between ⟨Q_A⟩Δβ and the correlation/entropy budget.
pub fn mean_heat_balance(
    spec: &crate::system::BipartiteSpec,
    basis: &BasisSet,
) -> Result<MeanHeatReport, ThermoError> {
    use crate::qcore::{partial_trace, Subsystem};
    let forward = enumerate_trajectories(basis);
    let ea = &basis.energies_a;
    let mean_q_a: f64 = forward
        .iter()
        .map(|tr| tr.weight * (ea[1][tr.outcomes[1].0] - ea[0][tr.outcomes[0].0]))
        .sum();
    let lhs = mean_q_a * (basis.beta_a - basis.beta_b);
    let (da, db) = (basis.dim_a, basis.dim_b);
    let rho0 = &basis.states[0];
    let rho1 = &basis.states[1];
    let delta_mutual_info = mutual_information(rho1, da, db)? - mutual_information(rho0, da, db)?;
    let ga = gibbs_state(&spec.h_a, spec.beta_a)?;
    let gb = gibbs_state(&spec.h_b, spec.beta_b)?;
    let rel_entropy_a = relative_entropy(&partial_trace(rho1, da, db, Subsystem::A)?, &ga.rho)?;
    let rel_entropy_b = relative_entropy(&partial_trace(rho1, da, db, Subsystem::B)?, &gb.rho)?;
    let rhs = delta_mutual_info + rel_entropy_a + rel_entropy_b;
    Ok(MeanHeatReport {
        mean_q_a,
        lhs,
        rhs,
        delta_mutual_info,
        rel_entropy_a,
        rel_entropy_b,
        residual: (lhs - rhs).abs(),
        heat_reversal: rhs <= 0.0,
    })
}
