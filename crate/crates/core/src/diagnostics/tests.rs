use super::*;
use crate::hyperbolic::SchemeConfig;
use crate::poisson::solve_poisson;
use crate::state::SpeciesState;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ctx(n: usize) -> Context {
    Context::new(Mesh1D::new(1.0, n).unwrap(), EosSpec::new(2.0, 1.0).unwrap(), EosSpec::new(1.5, 0.8).unwrap())
}

fn reference(c: &Context) -> LiftedReference {
    let m = &c.mesh;
    LiftedReference {
        rhobar: m.sample(|x| 1.0 + 0.2 * (PI * x).cos()),
        ubar: m.sample(|x| 0.3 * (PI * x).sin()),
        nbar: m.sample(|x| 1.1 + 0.1 * (2.0 * PI * x).cos()),
        vbar: m.sample(|x| -0.2 * (PI * x).sin()),
        phibar: m.sample(|x| 0.4 * (PI * x).cos()),
        dphibar_dt: vec![0.0; m.ncells()],
        time: 0.0,
    }
}

fn state_from(r: &LiftedReference, eps: f64, delta: f64) -> PlasmaState {
    PlasmaState {
        ion: SpeciesState::from_velocity(r.rhobar.clone(), &r.ubar).unwrap(),
        electron: SpeciesState::from_velocity(r.nbar.clone(), &r.vbar).unwrap(),
        phi: r.phibar.clone(),
        eps,
        delta,
        time: r.time,
    }
}

fn perturbed(c: &Context, r: &LiftedReference) -> PlasmaState {
    let m = &c.mesh;
    let rho: Vec<f64> = r.rhobar.iter().zip(m.centers()).map(|(v, x)| v + 0.05 * (3.0 * PI * x).cos()).collect();
    let u: Vec<f64> = r.ubar.iter().zip(m.centers()).map(|(v, x)| v + 0.04 * (2.0 * PI * x).sin()).collect();
    let n: Vec<f64> = r.nbar.iter().zip(m.centers()).map(|(v, x)| v - 0.03 * (PI * x).cos()).collect();
    let v: Vec<f64> = r.vbar.iter().zip(m.centers()).map(|(v, x)| v + 0.06 * (PI * x).sin()).collect();
    let phi: Vec<f64> = r.phibar.iter().zip(m.centers()).map(|(v, x)| v + 0.1 * (2.0 * PI * x).cos()).collect();
    PlasmaState {
        ion: SpeciesState::from_velocity(rho, &u).unwrap(),
        electron: SpeciesState::from_velocity(n, &v).unwrap(),
        phi,
        eps: 0.3,
        delta: 0.7,
        time: 0.0,
    }
}

#[test]
fn phi_vanishes_on_the_reference() {
    let c = ctx(64);
    let r = reference(&c);
    let s = state_from(&r, 0.1, 0.5);
    let phi = relative_energy(&c, &s, &r).unwrap();
    assert!(phi.total.abs() < 1e-15, "{phi:?}");
    let sig = sigma_terms(&c, &s, &r).unwrap();
    assert!(sig.sigma1.abs() < 1e-15 && sig.sigma2.abs() < 1e-15 && sig.sigma_star.abs() < 1e-15);
}

#[test]
fn phi_against_direct_integrand() {
    let c = ctx(80);
    let r = reference(&c);
    let s = perturbed(&c, &r);
    let got = relative_energy(&c, &s, &r).unwrap();

    // H(r|r̄) written out from the power law
    let h = |g: f64, k: f64, x: f64| k * x.powf(g) / (g - 1.0);
    let hp = |g: f64, k: f64, x: f64| k * g * x.powf(g - 1.0) / (g - 1.0);
    let rel = |g: f64, k: f64, x: f64, y: f64| h(g, k, x) - h(g, k, y) - hp(g, k, y) * (x - y);
    let dx = c.mesh.dx();
    let nc = c.mesh.ncells();
    let mut total = 0.0;
    for j in 0..nc {
        let u = s.ion.momentum[j] / s.ion.density[j];
        let v = s.electron.momentum[j] / s.electron.density[j];
        let dphi = |i: usize| s.phi[i] - r.phibar[i];
        let g = if j == 0 {
            (dphi(1) - dphi(0)) / (2.0 * dx)
        } else if j == nc - 1 {
            (dphi(nc - 1) - dphi(nc - 2)) / (2.0 * dx)
        } else {
            (dphi(j + 1) - dphi(j - 1)) / (2.0 * dx)
        };
        total += dx
            * (0.5 * s.ion.density[j] * (u - r.ubar[j]).powi(2)
                + rel(2.0, 1.0, s.ion.density[j], r.rhobar[j])
                + s.eps * 0.5 * s.electron.density[j] * (v - r.vbar[j]).powi(2)
                + rel(1.5, 0.8, s.electron.density[j], r.nbar[j])
                + s.delta * 0.5 * g * g);
    }
    assert!((got.total - total).abs() <= 1e-13 * total, "{} vs {}", got.total, total);
    let parts = got.rel_kin_ion + got.rel_int_ion + got.rel_kin_ele + got.rel_int_ele + got.field;
    assert!((parts - got.total).abs() <= 1e-15 * got.total);
}

#[test]
fn sigma_terms_converge_to_refined_quadrature() {
    // Smooth analytic pairs; the oracle integrates the exact integrands with
    // composite Simpson on 20000 panels.
    let rho = |x: f64| 1.0 + 0.2 * (PI * x).cos();
    let ub = |x: f64| 0.3 * (PI * x).sin();
    let ubx = |x: f64| 0.3 * PI * (PI * x).cos();
    let u = |x: f64| ub(x) + 0.04 * (2.0 * PI * x).sin();
    let rhob = |x: f64| 1.0 + 0.1 * (PI * x).cos();
    let integrand = |x: f64| {
        let r = rho(x);
        let rb = rhob(x);
        let p_rel = r * r - rb * rb - 2.0 * rb * (r - rb);
        -r * ubx(x) * (u(x) - ub(x)).powi(2) - ubx(x) * p_rel
    };
    let panels = 20000;
    let h = 1.0 / panels as f64;
    let simpson = (0..panels)
        .map(|i| {
            let a = i as f64 * h;
            h / 6.0 * (integrand(a) + 4.0 * integrand(a + 0.5 * h) + integrand(a + h))
        })
        .sum::<f64>();

    let mut errors = Vec::new();
    for &n in &[50usize, 100, 200] {
        let c = ctx(n);
        let m = &c.mesh;
        let r = LiftedReference {
            rhobar: m.sample(rhob),
            ubar: m.sample(ub),
            nbar: vec![1.0; n],
            vbar: vec![0.0; n],
            phibar: vec![0.0; n],
            dphibar_dt: vec![0.0; n],
            time: 0.0,
        };
        let s = PlasmaState {
            ion: SpeciesState::from_velocity(m.sample(rho), &m.sample(u)).unwrap(),
            electron: SpeciesState::at_rest(vec![1.0; n]),
            phi: vec![0.0; n],
            eps: 1.0,
            delta: 1.0,
            time: 0.0,
        };
        let sig = sigma_terms(&c, &s, &r).unwrap();
        errors.push((sig.sigma1 + sig.sigma2 - simpson).abs());
    }
    for w in errors.windows(2) {
        assert!(w[0] / w[1] > 3.0, "{errors:?}");
    }
}

#[test]
fn bep_and_ae_energies_agree_without_electron_inertia() {
    let c = ctx(100);
    let m = &c.mesh;
    let rho = m.sample(|x| 1.0 + 0.1 * (PI * x).cos());
    let u = m.sample(|x| 0.2 * (PI * x).sin());
    let n = m.sample(|x| 1.0 + 0.08 * (PI * x).cos());
    let w: Vec<f64> = n.iter().map(|&v| c.electron_eos.h_prime(v).unwrap()).collect();
    let ion = SpeciesState::from_velocity(rho, &u).unwrap();
    let bep = PlasmaState {
        ion: ion.clone(),
        electron: SpeciesState::at_rest(n.clone()),
        phi: w,
        eps: 0.01,
        delta: 0.3,
        time: 0.0,
    };
    let ae = AeState { ion, n, delta: 0.3, time: 0.0 };
    let a = total_energy(&c, StateRef::Bep(&bep));
    let b = total_energy(&c, StateRef::Ae(&ae));
    assert!((a.total - b.total).abs() <= 1e-14 * a.total);
    assert_eq!(a.kin_ele, 0.0);
}

#[test]
fn euler_energy_counts_both_pressures() {
    let c = ctx(10);
    let e = EulerState { ion: SpeciesState::at_rest(vec![2.0; 10]), time: 0.0 };
    let b = total_energy(&c, StateRef::Euler(&e));
    assert!((b.int_ion - 4.0).abs() < 1e-14);
    assert!((b.int_ele - 0.8 * 2f64.powf(1.5) / 0.5).abs() < 1e-14);
    assert_eq!(b.field, 0.0);
}

#[test]
fn euler_lift_and_its_residuals() {
    let c = ctx(64);
    let m = &c.mesh;
    let prev = EulerState {
        ion: SpeciesState::from_velocity(m.sample(|x| 1.0 + 0.1 * (PI * x).cos()), &m.sample(|x| 0.1 * (PI * x).sin()))
            .unwrap(),
        time: 0.0,
    };
    let mut curr = prev.clone();
    curr.time = 0.01;
    let a = lift_euler_solution(&c, &prev).unwrap();
    let b = lift_euler_solution(&c, &curr).unwrap();
    assert_eq!(b.nbar, b.rhobar);
    assert_eq!(b.vbar, b.ubar);
    let res = approx_residual(&c, System::Euler, &a, &b).unwrap();
    // frozen in time: ē = n̄ v̄ ∂ₓv̄
    let dv = m.divergence(&b.vbar).unwrap();
    for j in 0..64 {
        assert!((res.ebar[j] - b.nbar[j] * b.vbar[j] * dv[j]).abs() < 1e-14);
    }
    let lap = m.laplacian(&b.phibar).unwrap();
    assert!((res.ebar0_sup.unwrap() - lap.iter().fold(0.0_f64, |s, v| s.max(v.abs()))).abs() < 1e-14);
    assert!(approx_residual(&c, System::Euler, &b, &a).is_err());
    assert!(approx_residual(&c, System::Bep, &a, &b).is_err());

    let mut vac = prev.clone();
    vac.ion.density[5] = 0.0;
    assert!(matches!(lift_euler_solution(&c, &vac), Err(Error::Vacuum(_))));
}

#[test]
fn quasi_neutral_ae_lift_keeps_ion_velocity() {
    let c = ctx(32);
    let m = &c.mesh;
    let ion =
        SpeciesState::from_velocity(m.sample(|x| 1.0 + 0.1 * (PI * x).cos()), &m.sample(|x| 0.1 * (PI * x).sin()))
            .unwrap();
    let a = AeState { n: ion.density.clone(), ion: ion.clone(), delta: 0.0, time: 0.0 };
    let mut b = a.clone();
    b.time = 0.1;
    let lift = lift_ae_solution(&c, &a, &b).unwrap();
    for j in 0..32 {
        assert!((lift.reference.vbar[j] - lift.reference.ubar[j]).abs() < 1e-15);
        assert!((lift.reference.phibar[j] - c.electron_eos.h_prime(b.n[j]).unwrap()).abs() < 1e-15);
    }
    assert!(lift_ae_solution(&c, &b, &a).is_err());
}

#[test]
fn instantaneous_lift_satisfies_continuity() {
    // v̄ built from the exact instantaneous ∂ₜφ̄ satisfies ∂ₜn̄ + ∂ₓ(n̄v̄) = 0
    // up to the mismatch between the compact Laplacian and divergence∘gradient.
    let stepper = Stepper::new(
        Mesh1D::new(1.0, 200).unwrap(),
        EosSpec::new(2.0, 1.0).unwrap(),
        EosSpec::new(2.0, 1.0).unwrap(),
        SchemeConfig::default(),
    )
    .unwrap();
    let m = stepper.mesh;
    let ion =
        SpeciesState::from_velocity(m.sample(|x| 1.0 + 0.05 * (PI * x).cos()), &m.sample(|x| 0.05 * (PI * x).sin()))
            .unwrap();
    let ae = stepper.ae_state(ion, 0.1, 0.0).unwrap();
    let lift = lift_ae_instantaneous(&stepper, &ae).unwrap();
    let dt = 1e-4;
    let (next, _) = stepper.step_ae(&ae, dt).unwrap();
    let flux: Vec<f64> = lift.nbar.iter().zip(&lift.vbar).map(|(n, v)| n * v).collect();
    let div = m.divergence(&flux).unwrap();
    let defect: f64 = (0..200).map(|j| ((next.n[j] - ae.n[j]) / dt + div[j]).abs() * m.dx()).sum();
    assert!(defect < 5e-3, "{defect}");
}

#[test]
fn identity_residual_of_exact_budget() {
    let mut series = RelEnergySeries::default();
    for k in 0..20 {
        let t = 0.05 * k as f64;
        series.push(RelEnergySample {
            t,
            parts: RelativeEnergy { rel_kin_ion: t * t, total: t * t, ..Default::default() },
            sigma: SigmaTerms { sigma1: 2.0 * t, ..Default::default() },
            sigma3: 0.0,
        });
    }
    let r = releng_identity_residual(&series).unwrap();
    assert_eq!(r.len(), 19);
    assert!(r.iter().all(|v| v.abs() < 1e-13));
    series.samples[5].t = series.samples[4].t;
    assert!(matches!(releng_identity_residual(&series), Err(Error::Misaligned(_))));
}

#[test]
fn misaligned_sample_is_rejected() {
    let c = ctx(16);
    let mut r = reference(&c);
    let s = state_from(&r, 1.0, 1.0);
    r.time = 0.5;
    assert!(matches!(rel_energy_sample(&c, &s, &r, None), Err(Error::Misaligned(_))));
}

#[test]
fn dissipation_check() {
    let t = [0.0, 0.1, 0.2, 0.3];
    assert!(check_energy_dissipation(&t, &[1.0, 0.99, 0.98, 0.97], 0.01, 0.0).unwrap().passed);
    let bad = check_energy_dissipation(&t, &[1.0, 0.99, 1.0, 0.97], 0.01, 0.0).unwrap();
    assert!(!bad.passed);
    assert!((bad.max_jump - 0.01).abs() < 1e-15);
    assert!(check_energy_dissipation(&t, &[1.0, 0.99, 1.0, 0.97], 0.01, 20.0).unwrap().passed);
    assert!(check_energy_dissipation(&t[..1], &[1.0], 0.01, 0.0).unwrap().passed);
    assert!(check_energy_dissipation(&t, &[1.0], 0.01, 0.0).is_err());
}

#[test]
fn leading_order_at_zero_debye_length() {
    let c = ctx(32);
    let m = &c.mesh;
    let hist: Vec<AeState> = (0..3)
        .map(|k| {
            let rho = m.sample(|x| 1.0 + 0.1 * (PI * x).cos() * (1.0 - 0.1 * k as f64));
            AeState { ion: SpeciesState::at_rest(rho.clone()), n: rho, delta: 0.0, time: 0.1 * k as f64 }
        })
        .collect();
    let rep = leading_order_check(&c, &hist).unwrap();
    assert_eq!(rep.momentum_correction, 0.0);
    assert_eq!(rep.closure_defect, 0.0);
    assert!(leading_order_check(&c, &hist[..1]).is_err());
}

#[test]
fn poisson_reference_field_energy() {
    // With φ̄ = 0 the field part is the electrostatic energy of φ.
    let c = ctx(128);
    let m = &c.mesh;
    let rhs = m.sample(|x| (PI * x).cos());
    let (phi, _) = solve_poisson(m, &rhs, 0.5).unwrap();
    let mut r = reference(&c);
    r.phibar = vec![0.0; 128];
    let mut s = state_from(&r, 1.0, 0.5);
    s.phi = phi.clone();
    let got = relative_energy(&c, &s, &r).unwrap();
    let plain = total_energy(&c, StateRef::Bep(&s)).field;
    assert!((got.field - plain).abs() < 1e-15);
    assert!((got.total - got.field).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn phi_is_nonnegative(seed in 0u64..1000, amp in 0.0f64..0.5) {
        let c = ctx(24);
        let r = reference(&c);
        let m = &c.mesh;
        let s0 = seed as f64;
        let rho: Vec<f64> = r.rhobar.iter().zip(m.centers()).map(|(v, x)| v * (1.0 + amp * (s0 + 7.0 * x).sin())).collect();
        let n: Vec<f64> = r.nbar.iter().zip(m.centers()).map(|(v, x)| v * (1.0 + amp * (2.0 * s0 + 5.0 * x).cos())).collect();
        let s = PlasmaState {
            ion: SpeciesState::at_rest(rho),
            electron: SpeciesState::at_rest(n),
            phi: m.sample(|x| amp * (s0 * x).sin()),
            eps: 0.2,
            delta: 0.3,
            time: 0.0,
        };
        let phi = relative_energy(&c, &s, &r).unwrap();
        prop_assert!(phi.total >= 0.0);
        prop_assert!(phi.rel_int_ion >= 0.0 && phi.rel_int_ele >= 0.0);
    }
}
