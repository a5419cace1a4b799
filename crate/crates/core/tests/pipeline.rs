//! Cross-module checks: the sampler's exact kernel, full factoring runs and
//! experiment reproducibility.

use num_bigint::BigInt;
use pbit_factor::algebra::{factor, FactorParams, Method};
use pbit_factor::experiments::{random_semiprime, run_experiment, BitRange, ExperimentConfig, ExperimentId};
use pbit_factor::pbit::{calculate_bias, logistic, BitState, EnergyUnit, RefinementProblem};
use pbit_factor::seed;
use rand::Rng;

fn small_problem(seed: u64, m: usize) -> RefinementProblem {
    let mut rng = seed::rng(seed);
    let mut v = |n: usize| -> Vec<i64> { (0..n).map(|_| rng.gen_range(-2..=2)).collect() };
    let target = v(m + 1);
    let b_op = v(m + 1);
    let basis = (0..m).map(|_| v(m + 1)).collect();
    let directions = (0..m).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
    RefinementProblem::new(target, b_op, basis, directions)
        .unwrap()
        .with_energy_unit(EnergyUnit::Raw)
}

/// Transition matrix of one index-order sweep, built from the public bias.
fn sweep_kernel(p: &RefinementProblem, beta: f64) -> Vec<Vec<f64>> {
    let m = p.dim();
    let n = 1usize << m;
    let mut kernel: Vec<Vec<f64>> = (0..n).map(|s| (0..n).map(|t| f64::from(u8::from(s == t))).collect()).collect();
    for i in 0..m {
        let mut single = vec![vec![0.0; n]; n];
        for (s, row) in single.iter_mut().enumerate() {
            let state = BitState::from_word(s as u64, m);
            let up = logistic(calculate_bias(p, &state, i, beta));
            row[s | (1 << i)] += up;
            row[s & !(1 << i)] += 1.0 - up;
        }
        kernel = kernel
            .iter()
            .map(|row| (0..n).map(|t| (0..n).map(|k| row[k] * single[k][t]).sum()).collect())
            .collect();
    }
    kernel
}

#[test]
fn sweep_kernel_preserves_boltzmann() {
    for case in 0..20u64 {
        let p = small_problem(seed::derive(99, &[case]), 4);
        for beta in [0.05, 0.2, 0.66, 1.5] {
            let energies: Vec<f64> = (0..16).map(|w| p.energy(&BitState::from_word(w, 4)) as f64).collect();
            let e0 = energies.iter().copied().fold(f64::INFINITY, f64::min);
            let w: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
            let z: f64 = w.iter().sum();
            let pi: Vec<f64> = w.iter().map(|x| x / z).collect();
            let kernel = sweep_kernel(&p, beta);
            for row in &kernel {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            for t in 0..16 {
                let moved: f64 = (0..16).map(|s| pi[s] * kernel[s][t]).sum();
                assert!((moved - pi[t]).abs() < 1e-12, "case {case} beta {beta} state {t}");
            }
        }
    }
}

#[test]
fn factors_random_semiprimes_end_to_end() {
    for (i, bits) in [20u64, 22, 24, 26].into_iter().enumerate() {
        let sp = random_semiprime(bits, seed::derive(5, &[i as u64]));
        let report = factor(&sp.n, &FactorParams::for_bits(bits, 17 + i as u64)).unwrap();
        assert_eq!(report.method, Method::Lattice);
        let (p, q) = report.factor_pair().expect("factored");
        let (p, q) = (BigInt::from(p), BigInt::from(q));
        assert_eq!(&p * &q, sp.n);
        assert!(p == sp.p || p == sp.q);
    }
}

#[test]
fn experiments_are_reproducible() {
    let mut config = ExperimentConfig::new(ExperimentId::Fig3);
    config.bits = "20:24".parse::<BitRange>().unwrap();
    config.lattices = 4;
    config.seed = 3;
    let a = run_experiment(&config).unwrap().to_csv().unwrap();
    let b = run_experiment(&config).unwrap().to_csv().unwrap();
    assert_eq!(a, b);
    config.seed = 4;
    let c = run_experiment(&config).unwrap().to_csv().unwrap();
    assert_ne!(a, c);
}
