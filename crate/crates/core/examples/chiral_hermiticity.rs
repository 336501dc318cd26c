// Chiral conditions `nu_A psi = (alpha + i beta D_s) psi`, `D_s` the covariant
// tangential derivative, for growing `beta`.
//
// Every assembly stays Hermitian; the lowest level drifts downward as the
// tangential coupling grows, which is recorded here without a threshold.

use magbill::gauge::PotentialSpec;
use magbill::geometry::GridKind;
use magbill::operator::hermiticity_defect;
use magbill::spectral::{BcSpec, Domain, Problem};

fn main() {
    let disk = Domain::Grid(GridKind::Disk { radius: 1.0, nr: 24, ntheta: 96 });
    println!("   beta   hermiticity   lambda_1     lambda_2");
    let mut last = f64::INFINITY;
    for beta in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let problem = Problem::new(disk, PotentialSpec::Symmetric { b: 2.0 }, BcSpec::chiral(0.0, beta)).with_k(2);
        let h = problem.hamiltonian().expect("assembly");
        let defect = hermiticity_defect(&h);
        let s = problem.solve().expect("spectrum");
        println!("{beta:>7.2}   {defect:>10.1e}   {:>10.5}   {:>10.5}", s.values[0], s.values[1]);
        assert!(defect <= 1e-12);
        last = last.min(s.values[0]);
    }
    println!("lowest level seen: {last:.5}");
}
