use crate::eos::EosSpec;
use crate::mesh::Mesh1D;

/// Cell data seen by the Riemann solver.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FluxCell {
    pub density: f64,
    pub momentum: f64,
    pub pressure: f64,
    pub sound: f64,
    pub velocity: f64,
}

impl FluxCell {
    fn reflected(self) -> Self {
        Self { momentum: -self.momentum, velocity: -self.velocity, ..self }
    }
}

/// Local Lax-Friedrichs flux for `(ρ, m)` with momentum flux `m²/ρ + Π`.
#[inline]
pub(crate) fn rusanov(left: FluxCell, right: FluxCell) -> (f64, f64) {
    let speed = (left.velocity.abs() + left.sound).max(right.velocity.abs() + right.sound);
    let fl_mom = left.momentum * left.velocity + left.pressure;
    let fr_mom = right.momentum * right.velocity + right.pressure;
    (
        0.5 * (left.momentum + right.momentum) - 0.5 * speed * (right.density - left.density),
        0.5 * (fl_mom + fr_mom) - 0.5 * speed * (right.momentum - left.momentum),
    )
}

/// Rusanov flux between two states `(density, momentum)` for a single pressure law.
pub fn rusanov_flux(left: (f64, f64), right: (f64, f64), eos: &EosSpec, floor: f64) -> (f64, f64) {
    let cell = |(r, m): (f64, f64)| {
        let r0 = r.max(0.0);
        FluxCell {
            density: r,
            momentum: m,
            pressure: eos.pressure_unchecked(r0),
            sound: eos.sound_speed(r0),
            velocity: m / r.max(floor),
        }
    };
    rusanov(cell(left), cell(right))
}

/// Accumulates `-(F_{j+1/2} - F_{j-1/2}) / dx` into `rates` and returns the
/// largest signal speed. Wall faces see mirror ghosts with reflected momentum,
/// so the mass flux through them is exactly zero.
pub(crate) fn flux_divergence(
    mesh: &Mesh1D,
    density: &[f64],
    momentum: &[f64],
    pressure: &[f64],
    sound: &[f64],
    floor: f64,
    mass_rate: &mut [f64],
    momentum_rate: &mut [f64],
) -> f64 {
    let n = density.len();
    let inv_dx = 1.0 / mesh.dx();
    let cells: Vec<FluxCell> = (0..n)
        .map(|j| FluxCell {
            density: density[j],
            momentum: momentum[j],
            pressure: pressure[j],
            sound: sound[j],
            velocity: momentum[j] / density[j].max(floor),
        })
        .collect();
    let max_speed = cells.iter().map(|c| c.velocity.abs() + c.sound).fold(0.0, f64::max);

    let mut previous = rusanov(cells[0].reflected(), cells[0]);
    for j in 0..n {
        let next =
            if j + 1 < n { rusanov(cells[j], cells[j + 1]) } else { rusanov(cells[n - 1], cells[n - 1].reflected()) };
        mass_rate[j] -= (next.0 - previous.0) * inv_dx;
        momentum_rate[j] -= (next.1 - previous.1) * inv_dx;
        previous = next;
    }
    max_speed
}
