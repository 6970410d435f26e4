use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn proton_electron_scaling() {
    // choosing v₀² = κ_B T₀ / m_i
    let (mi, me, t0) = (1.67262192e-27, 9.1093837e-31, 1.0e4);
    let v0 = (BOLTZMANN * t0 / mi).sqrt();
    let inp = ScalingInputs::new(mi, me, t0, 1e18, 1e-3, 1e-3 / v0);
    let g = nondimensionalize(&inp).unwrap();
    assert!((g.zeta - 1.0).abs() < 1e-12);
    assert!((g.eps - me / mi).abs() < 1e-12 * me / mi);
}

#[test]
fn scaling_symmetries() {
    let base = ScalingInputs::new(2.0e-26, 2.0e-26, 300.0, 1e20, 1e-4, 1e-6);
    let g = nondimensionalize(&base).unwrap();
    assert_eq!(g.eps, g.zeta);
    // doubling L at fixed v₀ quarters δ
    let wide = ScalingInputs { length: 2e-4, time_scale: 2e-6, ..base };
    let h = nondimensionalize(&wide).unwrap();
    assert!((h.delta - g.delta / 4.0).abs() < 1e-12 * g.delta);
    assert!((h.eps - g.eps).abs() < 1e-12 * g.eps);
    let lambda = (VACUUM_PERMITTIVITY * BOLTZMANN * 300.0 / (ELEMENTARY_CHARGE.powi(2) * 1e20)).sqrt();
    assert!((g.delta - (lambda / 1e-4).powi(2)).abs() < 1e-12 * g.delta);
    assert!(nondimensionalize(&ScalingInputs { temperature: 0.0, ..base }).is_err());
}

#[test]
fn fit_identities() {
    let xs = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let f = fit_rate(&xs, &xs).unwrap();
    assert!((f.slope - 1.0).abs() < 1e-12 && f.intercept.abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
    let ys: Vec<f64> = xs.iter().map(|x| 5.0 * x * x).collect();
    let f = fit_rate(&xs, &ys).unwrap();
    assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 5f64.ln()).abs() < 1e-12);
    let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x).collect();
    assert!((fit_rate(&xs, &ys).unwrap().slope - 1.0).abs() < 1e-12);
    assert!(fit_rate(&xs[..1], &xs[..1]).is_err());
    assert!(fit_rate(&[1.0, -1.0], &[1.0, 1.0]).is_err());
}

#[test]
fn fit_under_bounded_noise() {
    let xs = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let ys: Vec<f64> = xs.iter().map(|x| x * (1.0 + rng.gen_range(-0.05..0.05))).collect();
        let f = fit_rate(&xs, &ys).unwrap();
        assert!((f.slope - 1.0).abs() < 0.15);
        assert!((0.0..=1.0).contains(&f.r_squared));
    }
}

#[test]
fn limit_names_round_trip() {
    for l in [Limit::ZeroElectronMass, Limit::Joint] {
        assert_eq!(l.to_string().parse::<Limit>().unwrap(), l);
    }
    assert!("quasi".parse::<Limit>().is_err());
}

#[test]
fn flat_data_is_an_exact_equilibrium() {
    let cfg = SweepConfig { amplitude: 0.0, end_time: 0.01, ..SweepConfig::with_ncells(40).unwrap() };
    let init = well_prepared_init(&cfg.mesh, 0.1, 0.1, cfg.ion_eos, cfg.electron_eos, 0.0).unwrap();
    assert!(init.plasma.phi.iter().all(|p| *p == 0.0));
    let run = run_paired(Limit::ZeroElectronMass, 0.1, 1.0, &cfg).unwrap();
    assert_eq!(run.phi0(), 0.0);
    assert!(run.phi_sup() < 1e-28);
}

#[test]
fn quasi_neutral_initial_data() {
    let cfg = SweepConfig::with_ncells(50).unwrap();
    let init = well_prepared_init(&cfg.mesh, 0.1, 0.0, cfg.ion_eos, cfg.electron_eos, 0.05).unwrap();
    assert_eq!(init.ae.n, init.plasma.ion.density);
    let mean = cfg.mesh.integrate(&init.plasma.phi).unwrap();
    assert!(mean.abs() < 1e-15);
    assert!(well_prepared_init(&cfg.mesh, 0.1, 0.1, cfg.ion_eos, cfg.electron_eos, 0.7).is_err());
}

#[test]
fn small_initial_relative_energy() {
    let cfg = SweepConfig { end_time: 1e-3, ..SweepConfig::with_ncells(100).unwrap() };
    // against Euler the slaved electrons differ from ρ₀ by O(δ), so Φ(0) = O(δ²)
    let a = run_paired(Limit::Joint, 1e-2, 1e-2, &cfg).unwrap().phi0();
    let b = run_paired(Limit::Joint, 1e-3, 1e-3, &cfg).unwrap().phi0();
    assert!(a < (2e-2f64).powi(2), "{a}");
    assert!((a / b).log10() > 1.8, "{a} {b}");
    let run = run_paired(Limit::ZeroElectronMass, 1e-2, 1.0, &cfg).unwrap();
    assert!(run.phi0() < 1e-20, "{}", run.phi0());
}

#[test]
fn sweep_preconditions_and_single_entry() {
    let cfg = SweepConfig { end_time: 1e-3, ..SweepConfig::with_ncells(40).unwrap() };
    assert!(run_joint_sweep(&[0.0], &cfg).is_err());
    assert!(run_zem_sweep(&[1e-2, 1e-1], &cfg).is_err());
    let single = run_zem_sweep(&[1e-1], &cfg).unwrap();
    assert_eq!(single.entries.len(), 1);
    assert!(single.fit.is_none());
    assert!(single.failure.is_none());
}

#[test]
fn failed_entry_keeps_earlier_results() {
    // The second run starts with a Debye length too small for the oscillation
    // bound to leave a usable time step.
    let cfg = SweepConfig { end_time: 1e-3, ..SweepConfig::with_ncells(40).unwrap() };
    let res = run_joint_sweep(&[1e-1, 1e-40], &cfg).unwrap();
    assert_eq!(res.entries.len(), 1);
    assert!(res.failure.is_some());
    assert!(res.fit.is_none());
}
