//! Elliptic solves with homogeneous Neumann walls.
//!
//! * the linear Poisson problem `-δ φ'' = f` of the two-fluid system;
//! * the nonlinear adiabatic-electron problem `-δ (H₂'(n))'' + n = ρ`;
//! * discrete checks of the two integration-by-parts identities that tie the
//!   potential energy to the source.
//!
//! All operators use the compact three-point Laplacian with mirror ghosts, so
//! every system is tridiagonal and solved directly.

use crate::eos::EosSpec;
use crate::error::{Error, Result};
use crate::mesh::Mesh1D;

const MAX_NEWTON_ITERATIONS: usize = 50;
const MAX_DAMPING_HALVINGS: usize = 5;
const NEWTON_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EllipticReport {
    pub iterations: usize,
    pub final_residual: f64,
    /// `|∫ rhs dx|` for the linear problem; zero for the nonlinear one.
    pub compatibility_defect: f64,
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

fn remove_mean(field: &mut [f64]) {
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    field.iter_mut().for_each(|v| *v -= mean);
}

fn max_abs(field: &[f64]) -> f64 {
    field.iter().fold(0.0, |a, &b| a.max(b.abs()))
}

/// Solves `-δ φ'' = rhs` with `φ' = 0` at both walls; returns the zero-mean solution.
pub fn solve_poisson(mesh: &Mesh1D, rhs: &[f64], delta: f64) -> Result<(Vec<f64>, EllipticReport)> {
    mesh.check_len(rhs)?;
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let defect = mesh.integrate_unchecked(rhs).abs();
    let l1: f64 = mesh.dx() * rhs.iter().map(|v| v.abs()).sum::<f64>();
    if defect > 1e-10 * (l1 + 1.0) {
        return Err(Error::Compatibility { defect });
    }

    let n = mesh.ncells();
    let dx2 = mesh.dx() * mesh.dx();
    // Project out the (rounding-level) incompatible part.
    let mut source = rhs.to_vec();
    remove_mean(&mut source);

    // -ψ'' = source, pinned at ψ_0 = 0; the dropped first row holds by compatibility.
    let lower = vec![-1.0; n];
    let upper = vec![-1.0; n];
    let mut diag = vec![2.0; n];
    diag[n - 1] = 1.0;
    let mut b: Vec<f64> = source.iter().map(|s| s * dx2).collect();
    diag[0] = 1.0;
    let mut up = upper;
    up[0] = 0.0;
    b[0] = 0.0;
    let mut psi = solve_tridiagonal(&lower, &diag, &up, &b);
    remove_mean(&mut psi);

    let phi: Vec<f64> = psi.iter().map(|p| p / delta).collect();
    let lap = mesh.laplacian_unchecked(&phi);
    let residual = lap.iter().zip(&source).fold(0.0_f64, |a, (l, s)| a.max((-delta * l - s).abs()));
    Ok((phi, EllipticReport { iterations: 1, final_residual: residual, compatibility_defect: defect }))
}

fn ae_residual(mesh: &Mesh1D, w: &[f64], rho: &[f64], delta: f64, eos: &EosSpec) -> Vec<f64> {
    let lap = mesh.laplacian_unchecked(w);
    w.iter().zip(&lap).zip(rho).map(|((&wj, &lj), &rj)| -delta * lj + eos.h_prime_inverse_unchecked(wj) - rj).collect()
}

/// Tridiagonal operator `-δ Δ + diag(extra)` with Neumann closure.
fn neumann_operator(mesh: &Mesh1D, delta: f64, extra: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = mesh.ncells();
    let a = delta / (mesh.dx() * mesh.dx());
    let lower = vec![-a; n];
    let upper = vec![-a; n];
    let diag = (0..n)
        .map(|j| {
            let couplings = if j == 0 || j + 1 == n { 1.0 } else { 2.0 };
            couplings * a + extra[j]
        })
        .collect();
    (lower, diag, upper)
}

/// Solves `-δ (H₂'(n))'' + n = ρ` for `n` by damped Newton iteration on `w = H₂'(n)`.
pub fn solve_ae_elliptic(mesh: &Mesh1D, rho: &[f64], delta: f64, eos2: &EosSpec) -> Result<(Vec<f64>, EllipticReport)> {
    solve_ae_elliptic_with_guess(mesh, rho, delta, eos2, None)
}

/// As [`solve_ae_elliptic`], starting Newton from `guess` (an electron density) when given.
pub fn solve_ae_elliptic_with_guess(
    mesh: &Mesh1D,
    rho: &[f64],
    delta: f64,
    eos2: &EosSpec,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, EllipticReport)> {
    mesh.check_len(rho)?;
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("delta must be nonnegative, got {delta}")));
    }
    if let Some(bad) = rho.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Domain(format!("ion density must be positive, found {bad}")));
    }
    if delta == 0.0 {
        return Ok((rho.to_vec(), EllipticReport::default()));
    }
    let start = match guess {
        Some(g) if g.len() == rho.len() && g.iter().all(|v| *v > 0.0) => g,
        _ => rho,
    };
    let mut w: Vec<f64> = start.iter().map(|&r| eos2.h_prime_unchecked(r)).collect();
    let mut residual = ae_residual(mesh, &w, rho, delta, eos2);
    let mut norm = max_abs(&residual);
    // Below this level the residual is dominated by cancellation in δΔw.
    let rounding_floor =
        |w: &[f64]| 16.0 * f64::EPSILON * (4.0 * delta / (mesh.dx() * mesh.dx()) * max_abs(w) + max_abs(rho));

    let mut iterations = 0;
    while norm > NEWTON_TOLERANCE.max(rounding_floor(&w)) {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::Nonconvergence {
                report: EllipticReport { iterations, final_residual: norm, compatibility_defect: 0.0 },
            });
        }
        iterations += 1;
        let slopes: Vec<f64> =
            w.iter().map(|&wj| 1.0 / eos2.h_double_prime_unchecked(eos2.h_prime_inverse_unchecked(wj))).collect();
        let (lower, diag, upper) = neumann_operator(mesh, delta, &slopes);
        let minus_f: Vec<f64> = residual.iter().map(|r| -r).collect();
        let step = solve_tridiagonal(&lower, &diag, &upper, &minus_f);

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_DAMPING_HALVINGS {
            let trial: Vec<f64> = w.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            if trial.iter().all(|v| *v > 0.0 && v.is_finite()) {
                let trial_res = ae_residual(mesh, &trial, rho, delta, eos2);
                let trial_norm = max_abs(&trial_res);
                if trial_norm < norm {
                    accepted = Some((trial, trial_res, trial_norm));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, trial_res, trial_norm)) => {
                w = trial;
                residual = trial_res;
                norm = trial_norm;
            }
            None => {
                return Err(Error::Nonconvergence {
                    report: EllipticReport { iterations, final_residual: norm, compatibility_defect: 0.0 },
                })
            }
        }
    }
    let n = w.iter().map(|&wj| eos2.h_prime_inverse_unchecked(wj)).collect();
    Ok((n, EllipticReport { iterations, final_residual: norm, compatibility_defect: 0.0 }))
}

/// Time derivative of `w = H₂'(n)` implied by `∂ₜρ` through the elliptic
/// constraint: `(-δΔ + 1/H₂''(n)) ∂ₜw = ∂ₜρ`.
pub fn elliptic_time_derivative(
    mesh: &Mesh1D,
    n: &[f64],
    delta: f64,
    eos2: &EosSpec,
    drho_dt: &[f64],
) -> Result<Vec<f64>> {
    mesh.check_len(n)?;
    mesh.check_len(drho_dt)?;
    if let Some(bad) = n.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Vacuum(format!("electron density {bad} is not positive")));
    }
    let slopes: Vec<f64> = n.iter().map(|&r| 1.0 / eos2.h_double_prime_unchecked(r)).collect();
    if delta == 0.0 {
        return Ok(drho_dt.iter().zip(&slopes).map(|(d, s)| d / s).collect());
    }
    let (lower, diag, upper) = neumann_operator(mesh, delta, &slopes);
    Ok(solve_tridiagonal(&lower, &diag, &upper, drho_dt))
}

/// Defect of `∫ φ̄ f dx = ∫ δ φ̄' φ' dx`, where `-δφ'' = f`.
///
/// Gradients are taken across faces, the pairing under which the compact
/// Laplacian is exactly summable by parts.
pub fn verify_ibp1(mesh: &Mesh1D, f: &[f64], varphi_bar: &[f64], delta: f64) -> Result<f64> {
    mesh.check_len(varphi_bar)?;
    let (phi, _) = solve_poisson(mesh, f, delta)?;
    let mut source = f.to_vec();
    remove_mean(&mut source);
    let lhs = mesh.integrate_unchecked(&varphi_bar.iter().zip(&source).map(|(a, b)| a * b).collect::<Vec<_>>());
    let gb = mesh.face_gradient(varphi_bar)?;
    let gp = mesh.face_gradient(&phi)?;
    let rhs = delta * mesh.dx() * gb.iter().zip(&gp).map(|(a, b)| a * b).sum::<f64>();
    Ok((lhs - rhs).abs())
}

/// Defect of `∫ f φ' ū dx = ∫ δ ū' (φ')²/2 dx` in one dimension.
///
/// `ubar_faces` holds `ū` at all `ncells + 1` faces; both wall values must vanish.
pub fn verify_ibp2(mesh: &Mesh1D, f: &[f64], ubar_faces: &[f64], delta: f64) -> Result<f64> {
    let n = mesh.ncells();
    if ubar_faces.len() != n + 1 {
        return Err(Error::LengthMismatch { expected: n + 1, found: ubar_faces.len() });
    }
    let scale = max_abs(ubar_faces).max(1.0);
    if ubar_faces[0].abs() > 1e-12 * scale || ubar_faces[n].abs() > 1e-12 * scale {
        return Err(Error::Precondition("ū must vanish at the walls (ū · ν = 0)".into()));
    }
    let (phi, _) = solve_poisson(mesh, f, delta)?;
    let mut source = f.to_vec();
    remove_mean(&mut source);
    let dx = mesh.dx();

    // φ' on all faces, zero at the walls.
    let mut g = vec![0.0; n + 1];
    for i in 1..n {
        g[i] = (phi[i] - phi[i - 1]) / dx;
    }
    let lhs: f64 = (1..n).map(|i| 0.5 * (source[i - 1] + source[i]) * g[i] * ubar_faces[i]).sum::<f64>() * dx;
    let rhs: f64 = (0..n)
        .map(|j| {
            let du = (ubar_faces[j + 1] - ubar_faces[j]) / dx;
            let g2 = 0.5 * (g[j] * g[j] + g[j + 1] * g[j + 1]);
            delta * du * 0.5 * g2
        })
        .sum::<f64>()
        * dx;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_mesh(n: usize) -> Mesh1D {
        Mesh1D::new(1.0, n).unwrap()
    }

    #[test]
    fn thomas_solves_small_system() {
        let x = solve_tridiagonal(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &[5.0, 6.0, 5.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_source_gives_zero_potential() {
        let m = unit_mesh(32);
        let (phi, rep) = solve_poisson(&m, &[0.0; 32], 0.3).unwrap();
        assert!(phi.iter().all(|&p| p == 0.0));
        assert_eq!(rep.final_residual, 0.0);
    }

    #[test]
    fn cosine_eigenfunction_second_order() {
        let err = |n: usize| {
            let m = unit_mesh(n);
            let rhs = m.sample(|x| (PI * x).cos());
            let (phi, rep) = solve_poisson(&m, &rhs, 1.0).unwrap();
            assert!(rep.final_residual <= 1e-12 * n as f64);
            m.centers().iter().zip(&phi).map(|(x, p)| (p - (PI * x).cos() / (PI * PI)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 < 1e-4);
        assert!((e1 / e2 - 4.0).abs() < 0.2, "ratio {}", e1 / e2);
    }

    #[test]
    fn incompatible_source_is_rejected() {
        let m = Mesh1D::new(2.0, 20).unwrap();
        match solve_poisson(&m, &[1.0; 20], 1.0) {
            Err(Error::Compatibility { defect }) => assert!((defect - 2.0).abs() < 1e-12),
            other => panic!("expected compatibility error, got {other:?}"),
        }
        assert!(matches!(solve_poisson(&m, &[0.0; 20], 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn potential_has_zero_mean_and_scales_with_delta() {
        let m = unit_mesh(50);
        let rhs = m.sample(|x| (3.0 * PI * x).cos() + 0.2 * (PI * x).cos());
        let (p1, _) = solve_poisson(&m, &rhs, 1.0).unwrap();
        let (p3, _) = solve_poisson(&m, &rhs, 0.37).unwrap();
        assert!(m.integrate(&p1).unwrap().abs() < 1e-15);
        for (a, b) in p1.iter().zip(&p3) {
            assert_eq!(*b, a / 0.37);
        }
    }

    #[test]
    fn ae_elliptic_quasi_neutral_and_constant() {
        let m = unit_mesh(40);
        let eos = EosSpec::new(1.6, 1.3).unwrap();
        let rho = m.sample(|x| 1.0 + 0.2 * (PI * x).cos());
        let (n, _) = solve_ae_elliptic(&m, &rho, 0.0, &eos).unwrap();
        assert_eq!(n, rho);
        let (n, _) = solve_ae_elliptic(&m, &[0.7; 40], 0.5, &eos).unwrap();
        for v in n {
            assert!((v - 0.7).abs() < 1e-13);
        }
    }

    #[test]
    fn ae_elliptic_residual_and_maximum_principle() {
        let m = unit_mesh(100);
        let eos = EosSpec::new(2.0, 1.0).unwrap();
        let rho = m.sample(|x| 1.0 + 0.1 * (PI * x).cos());
        let (n, rep) = solve_ae_elliptic(&m, &rho, 0.01, &eos).unwrap();
        // independent residual evaluation
        let w: Vec<f64> = n.iter().map(|&v| eos.h_prime(v).unwrap()).collect();
        let lap = m.laplacian(&w).unwrap();
        let res = (0..100).map(|j| (-0.01 * lap[j] + n[j] - rho[j]).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10, "residual {res}");
        assert!(rep.iterations <= 50);
        let (lo, hi) = (0.9 - 1e-12, 1.1 + 1e-12);
        assert!(n.iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn ae_elliptic_large_delta_converges() {
        let m = unit_mesh(64);
        for &gamma in &[1.2, 1.4, 3.0] {
            let eos = EosSpec::new(gamma, 1.0).unwrap();
            let rho = m.sample(|x| 1.0 + 0.8 * (PI * x).cos());
            let (n, _) = solve_ae_elliptic(&m, &rho, 10.0, &eos).unwrap();
            let (lo, hi) = (0.2 - 1e-9, 1.8 + 1e-9);
            assert!(n.iter().all(|&v| v > lo && v < hi));
        }
    }

    #[test]
    fn ae_elliptic_rejects_bad_density() {
        let m = unit_mesh(4);
        let eos = EosSpec::new(2.0, 1.0).unwrap();
        assert!(solve_ae_elliptic(&m, &[1.0, 0.0, 1.0, 1.0], 0.1, &eos).is_err());
    }

    #[test]
    fn elliptic_time_derivative_matches_finite_difference() {
        let m = unit_mesh(60);
        let eos = EosSpec::new(1.7, 0.8).unwrap();
        let delta = 0.05;
        let rho0 = m.sample(|x| 1.0 + 0.1 * (PI * x).cos());
        let drho = m.sample(|x| 0.3 * (2.0 * PI * x).cos());
        let h = 1e-5;
        let plus: Vec<f64> = rho0.iter().zip(&drho).map(|(r, d)| r + h * d).collect();
        let minus: Vec<f64> = rho0.iter().zip(&drho).map(|(r, d)| r - h * d).collect();
        let (n0, _) = solve_ae_elliptic(&m, &rho0, delta, &eos).unwrap();
        let (np, _) = solve_ae_elliptic(&m, &plus, delta, &eos).unwrap();
        let (nm, _) = solve_ae_elliptic(&m, &minus, delta, &eos).unwrap();
        let dw = elliptic_time_derivative(&m, &n0, delta, &eos, &drho).unwrap();
        for j in 0..60 {
            let fd = (eos.h_prime(np[j]).unwrap() - eos.h_prime(nm[j]).unwrap()) / (2.0 * h);
            assert!((fd - dw[j]).abs() < 1e-6, "{j}: {fd} vs {}", dw[j]);
        }
    }

    #[test]
    fn ibp1_examples() {
        let m = unit_mesh(256);
        let f = m.sample(|x| (PI * x).cos());
        let vb = m.sample(|x| x * x);
        assert_eq!(verify_ibp1(&m, &[0.0; 256], &vb, 1.0).unwrap(), 0.0);
        assert!(verify_ibp1(&m, &f, &vb, 1.0).unwrap() <= 1e-10);
    }

    fn faces_of(m: &Mesh1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut v: Vec<f64> = m.faces().into_iter().map(f).collect();
        let last = v.len() - 1;
        v[0] = 0.0;
        v[last] = 0.0;
        v
    }

    #[test]
    fn ibp2_trivial_cases_and_precondition() {
        let m = unit_mesh(64);
        let ub = faces_of(&m, |x| (PI * x).sin());
        let f = m.sample(|x| (PI * x).cos());
        assert_eq!(verify_ibp2(&m, &[0.0; 64], &ub, 1.0).unwrap(), 0.0);
        assert_eq!(verify_ibp2(&m, &f, &[0.0; 65], 1.0).unwrap(), 0.0);
        let bad: Vec<f64> = m.faces().iter().map(|x| 1.0 + x).collect();
        assert!(matches!(verify_ibp2(&m, &f, &bad, 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn ibp2_defect_is_second_order() {
        // f = cos(πx) alone makes both sides vanish by symmetry about x = 1/2,
        // so a second mode is added to get a nonzero integrand.
        let defect = |n: usize| {
            let m = unit_mesh(n);
            let f = m.sample(|x| (PI * x).cos() + (2.0 * PI * x).cos());
            let ub = faces_of(&m, |x| (PI * x).sin());
            verify_ibp2(&m, &f, &ub, 1.0).unwrap()
        };
        let d: Vec<f64> = [64, 128, 256].iter().map(|&n| defect(n)).collect();
        let slope = ((d[0] / d[2]).ln()) / (4.0f64).ln();
        assert!((slope - 2.0).abs() <= 0.3, "slope {slope}, defects {d:?}");
    }
}
