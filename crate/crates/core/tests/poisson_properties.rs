use eplab_core::poisson::{solve_ae_elliptic, solve_poisson};
use eplab_core::{EosSpec, Error, Mesh1D};
use proptest::prelude::*;

fn zero_mean(mut v: Vec<f64>) -> Vec<f64> {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
    v
}

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n).prop_map(zero_mean)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn solve_is_self_adjoint(f in field(48), g in field(48), delta in 0.05f64..5.0) {
        let mesh = Mesh1D::new(1.0, 48).unwrap();
        let (sf, _) = solve_poisson(&mesh, &f, delta).unwrap();
        let (sg, _) = solve_poisson(&mesh, &g, delta).unwrap();
        let a: f64 = f.iter().zip(&sg).map(|(x, y)| x * y).sum();
        let b: f64 = sf.iter().zip(&g).map(|(x, y)| x * y).sum();
        prop_assert!((a - b).abs() * mesh.dx() <= 1e-12);
    }

    #[test]
    fn solve_is_linear(f in field(40), g in field(40), alpha in -3.0f64..3.0) {
        let mesh = Mesh1D::new(2.0, 40).unwrap();
        let combo: Vec<f64> = f.iter().zip(&g).map(|(x, y)| alpha * x + y).collect();
        let (sc, _) = solve_poisson(&mesh, &combo, 0.7).unwrap();
        let (sf, _) = solve_poisson(&mesh, &f, 0.7).unwrap();
        let (sg, _) = solve_poisson(&mesh, &g, 0.7).unwrap();
        for j in 0..40 {
            prop_assert!((sc[j] - alpha * sf[j] - sg[j]).abs() <= 1e-11);
        }
    }

    #[test]
    fn solution_satisfies_the_stencil(f in field(32), delta in 0.1f64..2.0) {
        let mesh = Mesh1D::new(1.0, 32).unwrap();
        let (phi, _) = solve_poisson(&mesh, &f, delta).unwrap();
        let lap = mesh.laplacian(&phi).unwrap();
        for j in 0..32 {
            prop_assert!((-delta * lap[j] - f[j]).abs() <= 1e-10);
        }
        prop_assert!(mesh.integrate(&phi).unwrap().abs() <= 1e-13);
    }

    #[test]
    fn ae_solution_satisfies_the_constraint(amp in 0.0f64..0.4, delta in 0.0f64..2.0) {
        let mesh = Mesh1D::new(1.0, 64).unwrap();
        let eos = EosSpec::new(1.5, 0.8).unwrap();
        let rho = mesh.sample(|x| 1.0 + amp * (std::f64::consts::PI * x).cos());
        let (n, _) = solve_ae_elliptic(&mesh, &rho, delta, &eos).unwrap();
        let w: Vec<f64> = n.iter().map(|&v| eos.h_prime(v).unwrap()).collect();
        let lap = mesh.laplacian(&w).unwrap();
        for j in 0..64 {
            prop_assert!((n[j] - delta * lap[j] - rho[j]).abs() <= 1e-9);
        }
        // integrating the constraint: the electron mass equals the ion mass
        let gap = mesh.integrate(&n).unwrap() - mesh.integrate(&rho).unwrap();
        prop_assert!(gap.abs() <= 1e-9);
    }
}

#[test]
fn incompatible_rhs_is_rejected() {
    let mesh = Mesh1D::new(1.0, 16).unwrap();
    assert!(matches!(solve_poisson(&mesh, &[1.0; 16], 1.0), Err(Error::Compatibility { .. })));
}
