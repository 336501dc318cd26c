// Annulus spectrum against the flux threaded through the hole.
//
// The levels are periodic in the flux with period `2 pi hbar / e`; the
// sweep reports the spectrum on one period plus the shift test.

use std::f64::consts::PI;

use magbill::gauge::{PhysicalParams, PotentialSpec};
use magbill::geometry::GridKind;
use magbill::spectral::{flux_sweep, BcSpec, Domain, Problem, SweepDiagnostics};

fn main() {
    let quantum = PhysicalParams::default().flux_quantum();
    let annulus = Domain::Grid(GridKind::Annulus { r_in: 0.4, r_out: 1.0, nr: 12, ntheta: 72 });
    let problem = Problem::new(annulus, PotentialSpec::Zero, BcSpec::dirichlet()).with_k(3);
    let fluxes: Vec<f64> = (0..=8).map(|i| i as f64 * quantum / 8.0).collect();
    let sweep = flux_sweep(&problem, &fluxes).expect("flux sweep");

    println!("flux/(2 pi)   lambda_1     lambda_2     lambda_3");
    for (phi, s) in sweep.values.iter().zip(&sweep.spectra) {
        println!("{:>10.4}  {:>11.6}  {:>11.6}  {:>11.6}", phi / (2.0 * PI), s.values[0], s.values[1], s.values[2]);
    }
    let SweepDiagnostics::Flux { periodicity_error } = &sweep.diagnostics else {
        unreachable!("flux sweeps report periodicity")
    };
    let worst = periodicity_error.iter().cloned().fold(0.0, f64::max);
    println!("max |lambda(phi + quantum) - lambda(phi)| = {worst:.2e}");
    assert!(worst < 1e-9);
    // half a quantum is the most distinct point of the cycle
    let mid = &sweep.spectra[4];
    assert!((mid.values[0] - sweep.spectra[0].values[0]).abs() > 1e-4);
}
