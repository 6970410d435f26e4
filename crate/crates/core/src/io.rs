//! CSV writers. Every number is printed with 17 significant digits so that
//! files round-trip exactly and identical runs give identical bytes.

use std::io::{self, Write};

use crate::diagnostics::{lift_ae_instantaneous, lift_euler_solution, Context, EnergyBreakdown, RelEnergySeries};
use crate::error::Result;
use crate::experiments::SweepResult;
use crate::hyperbolic::Stepper;
use crate::state::{AeState, EulerState, PlasmaState};

/// Formats a float with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn row(w: &mut impl Write, values: &[f64]) -> io::Result<()> {
    let line: Vec<String> = values.iter().map(|&v| num(v)).collect();
    writeln!(w, "{}", line.join(","))
}

/// Writes `# key = value` lines.
pub fn write_header(w: &mut impl Write, entries: &[(String, String)]) -> io::Result<()> {
    for (k, v) in entries {
        writeln!(w, "# {k} = {v}")?;
    }
    Ok(())
}

/// Cell-centred `x, rho, u, n, v, phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub n: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
}

impl FieldDump {
    pub fn from_plasma(stepper: &Stepper, s: &PlasmaState) -> Self {
        let floor = stepper.config.density_floor;
        Self {
            x: stepper.mesh.centers(),
            rho: s.ion.density.clone(),
            u: s.ion.velocity(floor).values,
            n: s.electron.density.clone(),
            v: s.electron.velocity(floor).values,
            phi: s.phi.clone(),
        }
    }

    /// Electron fields come from the five-field lift of the AE state.
    pub fn from_ae(stepper: &Stepper, s: &AeState) -> Result<Self> {
        let lift = lift_ae_instantaneous(stepper, s)?;
        Ok(Self {
            x: stepper.mesh.centers(),
            rho: lift.rhobar,
            u: lift.ubar,
            n: lift.nbar,
            v: lift.vbar,
            phi: lift.phibar,
        })
    }

    /// Electron fields come from the five-field lift of the Euler state.
    pub fn from_euler(stepper: &Stepper, s: &EulerState) -> Result<Self> {
        let lift = lift_euler_solution(&Context::from(stepper), s)?;
        Ok(Self {
            x: stepper.mesh.centers(),
            rho: lift.rhobar,
            u: lift.ubar,
            n: lift.nbar,
            v: lift.vbar,
            phi: lift.phibar,
        })
    }
}

pub fn write_fields(w: &mut impl Write, d: &FieldDump) -> io::Result<()> {
    writeln!(w, "x,rho,u,n,v,phi")?;
    for j in 0..d.x.len() {
        row(w, &[d.x[j], d.rho[j], d.u[j], d.n[j], d.v[j], d.phi[j]])?;
    }
    Ok(())
}

pub fn write_energy(w: &mut impl Write, rows: &[(f64, EnergyBreakdown)]) -> io::Result<()> {
    writeln!(w, "t,kin_ion,int_ion,kin_ele,int_ele,field,total")?;
    for (t, e) in rows {
        row(w, &[*t, e.kin_ion, e.int_ion, e.kin_ele, e.int_ele, e.field, e.total])?;
    }
    Ok(())
}

pub fn write_rel_energy(w: &mut impl Write, series: &RelEnergySeries) -> io::Result<()> {
    writeln!(w, "t,Phi,rk_ion,ri_ion,rk_ele,ri_ele,field,sig1,sig2,sig3,sigstar")?;
    for s in &series.samples {
        let p = &s.parts;
        row(
            w,
            &[
                s.t,
                p.total,
                p.rel_kin_ion,
                p.rel_int_ion,
                p.rel_kin_ele,
                p.rel_int_ele,
                p.field,
                s.sigma.sigma1,
                s.sigma.sigma2,
                s.sigma3,
                s.sigma.sigma_star,
            ],
        )?;
    }
    Ok(())
}

/// Sweep table followed by a `#`-prefixed summary block. Wall-clock times are
/// left out so that repeated sweeps produce identical files.
pub fn write_sweep(w: &mut impl Write, result: &SweepResult) -> io::Result<()> {
    writeln!(w, "eps,delta,ncells,phi0,phi_sup,slope,r2")?;
    let (slope, r2) = result.fit.map_or(("nan".to_string(), "nan".to_string()), |f| (num(f.slope), num(f.r_squared)));
    for e in &result.entries {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(e.eps),
            num(e.delta),
            e.ncells,
            num(e.phi0),
            num(e.phi_sup),
            slope,
            r2
        )?;
    }
    let abscissa = match result.limit {
        crate::experiments::Limit::ZeroElectronMass => "eps",
        crate::experiments::Limit::Joint => "eps + delta",
    };
    writeln!(w, "# limit = {}", result.limit)?;
    match result.fit {
        Some(f) => writeln!(
            w,
            "# fitted rate: sup Phi ~ ({abscissa})^{:.4} (intercept {:.4}, r2 = {:.4})",
            f.slope, f.intercept, f.r_squared
        )?,
        None => writeln!(w, "# fitted rate: undefined (fewer than two completed entries)")?,
    }
    writeln!(w, "# monotone within 10%: {}", result.is_monotone(0.1))?;
    for e in &result.entries {
        writeln!(
            w,
            "# eps = {}: gronwall C = {:.4}, bound holds = {}, steps = {}",
            num(e.eps),
            e.gronwall_c,
            e.gronwall_consistent(result.end_time),
            e.steps
        )?;
    }
    if let Some(f) = &result.failure {
        writeln!(w, "# aborted at eps = {}, delta = {}: {}", num(f.eps), num(f.delta), f.error)?;
    }
    writeln!(w, "# note: one-dimensional runs; rates are extrapolated to the multi-dimensional setting")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{RelEnergySample, RelativeEnergy};
    use crate::experiments::{Limit, RateFit, SweepEntry};
    use std::time::Duration;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn energy_and_series_layout() {
        let mut buf = Vec::new();
        write_header(&mut buf, &[("system".into(), "bep".into())]).unwrap();
        write_energy(&mut buf, &[(0.0, EnergyBreakdown { total: 1.5, ..Default::default() })]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# system = bep");
        assert_eq!(lines[1], "t,kin_ion,int_ion,kin_ele,int_ele,field,total");
        assert_eq!(lines[2].split(',').count(), 7);

        let mut series = RelEnergySeries::default();
        series.push(RelEnergySample {
            t: 0.5,
            parts: RelativeEnergy { total: 2.0, ..Default::default() },
            ..Default::default()
        });
        let mut buf = Vec::new();
        write_rel_energy(&mut buf, &series).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap().split(',').count(), 11);
    }

    #[test]
    fn sweep_layout() {
        let entry = |eps: f64| SweepEntry {
            eps,
            delta: 1.0,
            ncells: 10,
            phi0: 0.0,
            phi_sup: eps,
            gronwall_c: 0.5,
            steps: 3,
            wall_clock: Duration::from_millis(eps as u64),
        };
        let res = SweepResult {
            limit: Limit::ZeroElectronMass,
            end_time: 0.2,
            entries: vec![entry(0.1), entry(0.01)],
            fit: Some(RateFit { slope: 1.0, intercept: 0.0, r_squared: 1.0 }),
            failure: None,
        };
        let mut buf = Vec::new();
        write_sweep(&mut buf, &res).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,delta,ncells,phi0,phi_sup,slope,r2\n"));
        assert!(text.contains("sup Phi ~ (eps)^1.0000"));
        assert!(text.contains("one-dimensional"));
    }
}
