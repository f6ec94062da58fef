//! Two qubits exchanging one excitation, with or without initial
//! coherence between |01⟩ and |10⟩.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::qcore::ComplexMatrix;
use crate::system::{BipartiteSpec, Tolerances};
use crate::thermo::{DiscreteDistribution, BINNING_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitExampleParams {
    pub beta_a: f64,
    pub beta_b: f64,
    /// Full-swap time.
    pub tau: f64,
    pub correlated: bool,
}

impl QubitExampleParams {
    /// β from the excited-state occupation of a unit-gap qubit.
    pub fn from_occupations(p_a: f64, p_b: f64, tau: f64, correlated: bool) -> Self {
        Self {
            beta_a: beta_from_occupation(p_a),
            beta_b: beta_from_occupation(p_b),
            tau,
            correlated,
        }
    }

    pub fn z_a(&self) -> f64 {
        1.0 + (-self.beta_a).exp()
    }

    pub fn z_b(&self) -> f64 {
        1.0 + (-self.beta_b).exp()
    }

    /// Coherence α = -i e^{-(β_A+β_B)/2}/(Z_A Z_B), or 0 when uncorrelated.
    pub fn alpha(&self) -> Complex64 {
        if self.correlated {
            Complex64::new(0.0, -(-(self.beta_a + self.beta_b) / 2.0).exp() / (self.z_a() * self.z_b()))
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// ln((1 - p)/p): inverse temperature giving excited occupation p.
pub fn beta_from_occupation(p: f64) -> f64 {
    ((1.0 - p) / p).ln()
}

fn exchange(c: Complex64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(1, 2)] = c;
    m[(2, 1)] = c.conj();
    m
}

pub fn build_example_spec(p: &QubitExampleParams) -> BipartiteSpec {
    let h = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    BipartiteSpec {
        h_a: h.clone(),
        h_b: h,
        beta_a: p.beta_a,
        beta_b: p.beta_b,
        chi: exchange(p.alpha()),
        h_int: exchange(Complex64::new(PI / (2.0 * p.tau), 0.0)),
        tolerances: Tolerances::default(),
    }
}

/// Closed-form P_f(Q_A) at time t.
pub fn analytic_forward(p: &QubitExampleParams, t: f64) -> DiscreteDistribution {
    let (c, s) = {
        let th = t * PI / (2.0 * p.tau);
        (th.cos(), th.sin())
    };
    let ea = (-p.beta_a).exp();
    let eb = (-p.beta_b).exp();
    let zz = p.z_a() * p.z_b();
    let stay = (1.0 + ea * eb) / zz;
    let (plus, minus, zero) = if p.correlated {
        let n = ea + eb;
        let x = ((-p.beta_a / 2.0).exp() * c - (-p.beta_b / 2.0).exp() * s).powi(2) / n;
        let y = ((-p.beta_b / 2.0).exp() * c + (-p.beta_a / 2.0).exp() * s).powi(2) / n;
        (eb / zz * x, ea / zz * y, stay + ea / zz * x + eb / zz * y)
    } else {
        (eb / zz * s * s, ea / zz * s * s, stay + (ea + eb) / zz * c * c)
    };
    DiscreteDistribution::from_samples(
        [(vec![-1.0], minus), (vec![0.0], zero), (vec![1.0], plus)]
            .into_iter()
            .filter(|(_, w)| *w > 0.0),
        BINNING_TOL,
    )
}

/// Closed-form reverse heat distribution: the forward one at -t.
pub fn analytic_reverse(p: &QubitExampleParams, t: f64) -> DiscreteDistribution {
    analytic_forward(p, -t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::hermitian_eigendecompose;
    use crate::system::{build_initial_state, validate};

    fn params(correlated: bool) -> QubitExampleParams {
        QubitExampleParams::from_occupations(0.2, 0.3, 1.0, correlated)
    }

    #[test]
    fn temperatures_from_occupations() {
        let p = params(false);
        assert!((p.beta_a - 4f64.ln()).abs() < 1e-15);
        assert!((p.beta_b - (7.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!((p.z_a() - 1.25).abs() < 1e-15);
        assert!((p.z_b() - 10.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn initial_spectra() {
        for (corr, want) in [(true, [0.0, 0.06, 0.38, 0.56]), (false, [0.06, 0.14, 0.24, 0.56])] {
            let spec = build_example_spec(&params(corr));
            assert!(validate(&spec).passed());
            let rho = build_initial_state(&spec).unwrap();
            let mut vals = hermitian_eigendecompose(&rho, None).unwrap().values;
            vals.sort_by(f64::total_cmp);
            for (v, w) in vals.iter().zip(want) {
                assert!((v - w).abs() < 1e-12, "{vals:?}");
            }
        }
    }

    #[test]
    fn swap_time_values() {
        let f = analytic_forward(&params(false), 1.0);
        assert!((f.prob(&[1.0]) - 0.24).abs() < 1e-14);
        assert!((f.prob(&[-1.0]) - 0.14).abs() < 1e-14);
        assert!((f.prob(&[0.0]) - 0.62).abs() < 1e-14);

        let p = params(true);
        let f = analytic_forward(&p, 1.0);
        let ea = (-p.beta_a).exp();
        let eb = (-p.beta_b).exp();
        let want = (-2.0 * p.beta_b).exp() / ((ea + eb) * p.z_a() * p.z_b());
        assert!((f.prob(&[1.0]) - want).abs() < 1e-14);
    }

    #[test]
    fn analytic_distributions_normalized() {
        for corr in [false, true] {
            for k in 0..=20 {
                let t = 0.1 * k as f64;
                let p = params(corr);
                assert!((analytic_forward(&p, t).total() - 1.0).abs() < 1e-14);
                assert!((analytic_reverse(&p, t).total() - 1.0).abs() < 1e-14);
            }
        }
    }
}
