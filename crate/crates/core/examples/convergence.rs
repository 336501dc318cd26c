// Observed orders of the lowest eigenvalues under grid halving, for the
// disk with Dirichlet data (against the Bessel zero) and for the annulus
// with a Robin condition (Richardson, no closed form).

use magbill::gauge::PotentialSpec;
use magbill::geometry::GridKind;
use magbill::spectral::{convergence_study, BcSpec, Domain, Problem};

// first zero of J_0
const J01: f64 = 2.404_825_557_695_773;

fn main() {
    let disk = Domain::Grid(GridKind::Disk { radius: 1.0, nr: 8, ntheta: 16 });
    let problem = Problem::new(disk, PotentialSpec::Zero, BcSpec::dirichlet());
    let t = convergence_study(&problem, &[8, 16, 32, 64], Some(&[0.5 * J01 * J01])).expect("disk study");
    for (n, row) in t.resolutions.iter().zip(&t.eigenvalues) {
        println!("disk nr = {n:>3}: lambda_1 = {:.10}", row[0]);
    }
    println!("disk orders {:.3?}", t.orders[0]);

    let annulus = Domain::Grid(GridKind::Annulus { r_in: 0.5, r_out: 1.0, nr: 8, ntheta: 32 });
    let problem = Problem::new(annulus, PotentialSpec::Zero, BcSpec::robin(-1.0)).with_k(2);
    let t = convergence_study(&problem, &[8, 16, 32, 64], None).expect("annulus study");
    for level in 0..2 {
        println!("annulus robin level {level}: orders {:.3?}", t.orders[level]);
        assert!(t.orders[level].iter().all(|o| (1.7..=2.3).contains(o)));
    }
}
