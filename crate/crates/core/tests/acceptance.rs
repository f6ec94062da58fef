//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::Instant;

use heatft::bayesnet::{
    build_bases, choi_path_probability, local_path_table, table_distance, tpm_table, BasisSet,
    ReverseProtocol, TimeGrid,
};
use heatft::cli::random_spec;
use heatft::qcore::ComplexMatrix;
use heatft::qubit_example::{analytic_forward, analytic_reverse, build_example_spec, QubitExampleParams};
use heatft::system::BipartiteSpec;
use heatft::thermo::{
    average, combined_integral_ft, heat_distribution, integral_ft, max_detailed_residual,
    mean_heat_balance, mutual_information, psi_factor, AugmentedEnsemble, Direction, Quantity,
};

const PROTOCOLS: [ReverseProtocol; 2] = [ReverseProtocol::Retrodictive, ReverseProtocol::Backward];

struct Case {
    label: String,
    spec: BipartiteSpec,
    t: f64,
    correlated_example: Option<bool>,
}

fn params(correlated: bool) -> QubitExampleParams {
    QubitExampleParams::from_occupations(0.2, 0.3, 1.0, correlated)
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * k as f64 / (n - 1) as f64).collect()
}

fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    for correlated in [false, true] {
        let spec = build_example_spec(&params(correlated));
        for t in grid(21) {
            out.push(Case {
                label: format!("qubits(correlated={correlated}) t={t:.2}"),
                spec: spec.clone(),
                t,
                correlated_example: Some(correlated),
            });
        }
    }
    for seed in 0..50u64 {
        let (da, db) = (2 + (seed % 2) as usize, 2 + ((seed / 2) % 2) as usize);
        out.push(Case {
            label: format!("random(seed={seed}, {da}x{db})"),
            spec: random_spec(seed, da, db),
            t: 0.05 + 0.05 * (seed % 37) as f64,
            correlated_example: None,
        });
    }
    out
}

fn basis(spec: &BipartiteSpec, t: f64) -> BasisSet {
    build_bases(spec, &TimeGrid::single(t).unwrap()).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn worst(label: &mut String, current: &mut f64, value: f64, where_: &str) {
    if value.is_nan() || value > *current {
        *current = value;
        *label = where_.to_string();
    }
}

fn criterion_1(cases: &[Case]) -> Outcome {
    let (mut w, mut at) = (0.0, String::new());
    for c in cases {
        let ens = AugmentedEnsemble::new(&basis(&c.spec, c.t), ReverseProtocol::Retrodictive).unwrap();
        for q in Quantity::ALL {
            let r = integral_ft(&ens, q, q.measure()).unwrap();
            worst(&mut at, &mut w, (r.value - 1.0).abs(), &format!("{} {}", c.label, q.name()));
        }
    }
    Outcome { pass: w <= 1e-10, detail: format!("max |<e^-X> - 1| = {w:.2e} ({at})") }
}

fn criterion_2(cases: &[Case]) -> Outcome {
    let (mut w, mut at) = (0.0, String::new());
    for c in cases {
        let b = basis(&c.spec, c.t);
        for p in PROTOCOLS {
            let r = max_detailed_residual(&AugmentedEnsemble::new(&b, p).unwrap()).unwrap();
            worst(&mut at, &mut w, r, &format!("{} {}", c.label, p.name()));
        }
    }
    Outcome { pass: w <= 1e-9, detail: format!("max pointwise residual = {w:.2e} ({at})") }
}

fn criterion_3(cases: &[Case]) -> Outcome {
    let (mut w, mut at) = (0.0, String::new());
    for c in cases {
        let b = basis(&c.spec, c.t);
        for p in PROTOCOLS {
            let r = combined_integral_ft(&AugmentedEnsemble::new(&b, p).unwrap()).unwrap();
            worst(&mut at, &mut w, (r.value - 1.0).abs(), &format!("{} {} {:?}", c.label, p.name(), r.form));
        }
    }
    Outcome { pass: w <= 1e-9, detail: format!("max |combined - 1| = {w:.2e} ({at})") }
}

fn criterion_4() -> Outcome {
    let (mut w, mut at) = (0.0, String::new());
    for correlated in [false, true] {
        let p = params(correlated);
        let spec = build_example_spec(&p);
        for t in grid(101) {
            let b = basis(&spec, t);
            let pf = heat_distribution(&b, Direction::Forward, ReverseProtocol::Backward).unwrap();
            let pr = heat_distribution(&b, Direction::Reverse, ReverseProtocol::Backward).unwrap();
            worst(&mut at, &mut w, pf.max_deviation(&analytic_forward(&p, t)), &format!("forward {correlated} t={t}"));
            worst(&mut at, &mut w, pr.max_deviation(&analytic_reverse(&p, t)), &format!("reverse {correlated} t={t}"));
        }
    }
    let b = basis(&build_example_spec(&params(false)), 1.0);
    let pf = heat_distribution(&b, Direction::Forward, ReverseProtocol::Backward).unwrap();
    let fig = [(1.0, 0.24), (-1.0, 0.14), (0.0, 0.62)];
    let fig_dev = fig.iter().map(|(q, v)| (pf.prob(&[*q]) - v).abs()).fold(0.0, f64::max);
    Outcome {
        pass: w <= 1e-10 && fig_dev <= 1e-10,
        detail: format!("max |numeric - closed form| = {w:.2e} ({at}); t=tau values off by {fig_dev:.2e}"),
    }
}

fn criterion_5() -> Outcome {
    let spec = build_example_spec(&params(false));
    let (mut w, mut at) = (0.0, String::new());
    let mut checked = 0;
    for t in grid(21) {
        let b = basis(&spec, t);
        let ens = AugmentedEnsemble::new(&b, ReverseProtocol::Backward).unwrap();
        for r in psi_factor(&b, &ens).unwrap().rows {
            worst(&mut at, &mut w, (r.psi - 1.0).abs(), &format!("psi t={t} Q={}", r.q));
            if r.verified {
                checked += 1;
                worst(&mut at, &mut w, (r.ratio - r.exp_q_dbeta).abs(), &format!("ratio t={t} Q={}", r.q));
            }
        }
    }
    let b = basis(&spec, 1.0);
    let ens = AugmentedEnsemble::new(&b, ReverseProtocol::Backward).unwrap();
    let ratio = psi_factor(&b, &ens).unwrap().row(1.0).map_or(f64::NAN, |r| r.ratio);
    let ratio_dev = (ratio - 12.0 / 7.0).abs();
    Outcome {
        pass: w <= 1e-10 && ratio_dev <= 1e-10 && checked > 0,
        detail: format!("max deviation = {w:.2e} over {checked} bins ({at}); P_f(+1)/P_r(-1) at tau = {ratio:.15}"),
    }
}

fn criterion_6() -> Outcome {
    let spec = build_example_spec(&params(true));
    let (mut w, mut at) = (0.0, String::new());
    let mut psi_spread: f64 = 0.0;
    let mut unverified = 0;
    for t in grid(21) {
        let b = basis(&spec, t);
        let ens = AugmentedEnsemble::new(&b, ReverseProtocol::Backward).unwrap();
        let rep = psi_factor(&b, &ens).unwrap();
        for r in &rep.rows {
            if r.verified {
                worst(&mut at, &mut w, r.residual, &format!("t={t} Q={}", r.q));
            } else {
                unverified += 1;
            }
            psi_spread = psi_spread.max((r.psi - 1.0).abs());
        }
    }
    Outcome {
        pass: w <= 1e-9 && psi_spread > 1e-3,
        detail: format!(
            "max |P_f Psi - e^(Q dbeta) P_r(-Q)| = {w:.2e} ({at}); max |Psi - 1| = {psi_spread:.3}; {unverified} bins without reverse weight"
        ),
    }
}

fn criterion_7(cases: &[Case]) -> Outcome {
    let (mut w, mut at) = (0.0, String::new());
    let mut reversal = None;
    for c in cases {
        let b = basis(&c.spec, c.t);
        let r = mean_heat_balance(&c.spec, &b).unwrap();
        worst(&mut at, &mut w, r.residual, &c.label);
        if c.correlated_example == Some(true) && r.lhs < 0.0 && reversal.is_none() {
            reversal = Some((c.t, r.lhs));
        }
    }
    Outcome {
        pass: w <= 1e-9 && reversal.is_some(),
        detail: format!("max balance residual = {w:.2e} ({at}); first reversal {reversal:?}"),
    }
}

fn criterion_8(cases: &[Case]) -> Outcome {
    let (mut choi, mut at_c) = (0.0, String::new());
    let (mut tpm, mut at_t) = (0.0, String::new());
    let mut tpm_specs = 0;
    for c in cases {
        let g = TimeGrid::single(c.t).unwrap();
        let b = build_bases(&c.spec, &g).unwrap();
        let paths = local_path_table(&b).unwrap();
        worst(&mut at_c, &mut choi, table_distance(&choi_path_probability(&c.spec, &g).unwrap(), &paths), &c.label);
        let mut plain = c.spec.clone();
        plain.chi = ComplexMatrix::zeros(plain.dim(), plain.dim());
        let b0 = build_bases(&plain, &g).unwrap();
        worst(
            &mut at_t,
            &mut tpm,
            table_distance(&tpm_table(&b0).unwrap(), &local_path_table(&b0).unwrap()),
            &c.label,
        );
        tpm_specs += 1;
    }
    Outcome {
        pass: choi <= 1e-12 && tpm <= 1e-12,
        detail: format!("Choi max diff = {choi:.2e} ({at_c}); TPM max diff = {tpm:.2e} over {tpm_specs} chi=0 specs ({at_t})"),
    }
}

fn criterion_9(cases: &[Case]) -> Outcome {
    let (mut w, mut at) = (0.0, String::new());
    for c in cases {
        let b = basis(&c.spec, c.t);
        let ens = AugmentedEnsemble::new(&b, ReverseProtocol::Retrodictive).unwrap();
        let (da, db) = (c.spec.dim_a(), c.spec.dim_b());
        let i0 = mutual_information(&b.states[0], da, db).unwrap();
        let i1 = mutual_information(&b.states[1], da, db).unwrap();
        worst(&mut at, &mut w, (average(&ens, Quantity::I0) - i0).abs(), &format!("{} I0", c.label));
        worst(&mut at, &mut w, (average(&ens, Quantity::I1) - i1).abs(), &format!("{} I1", c.label));
    }
    Outcome { pass: w <= 1e-9, detail: format!("max |<I> - I(rho)| = {w:.2e} ({at})") }
}

fn main() {
    let start = Instant::now();
    let cases = cases();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 integral fluctuation theorems", criterion_1(&cases)),
        ("2 pointwise detailed theorem", criterion_2(&cases)),
        ("3 combined integral theorem", criterion_3(&cases)),
        ("4 heat distributions vs closed forms", criterion_4()),
        ("5 uncorrelated heat exchange limit", criterion_5()),
        ("6 modified heat theorem", criterion_6()),
        ("7 mean heat balance", criterion_7(&cases)),
        ("8 Choi and two-point-measurement tables", criterion_8(&cases)),
        ("9 stochastic vs entropic information", criterion_9(&cases)),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} | {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {}/{} passed in {:.2} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
