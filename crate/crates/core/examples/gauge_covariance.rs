// Same field, different potentials: Landau against symmetric gauge, then a
// random smooth gauge change on a disk with a chiral condition.

use magbill::gauge::{PotentialSpec, ScalarGauge};
use magbill::geometry::GridKind;
use magbill::spectral::{gauge_cross_check, scalar_gauge_check, BcSpec, Domain, Problem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let rect = Domain::Grid(GridKind::Rectangle { a: 1.2, b: 1.0, nx: 36, ny: 30 });
    let problem = Problem::new(rect, PotentialSpec::Landau { b: 5.0 }, BcSpec::robin(0.7)).with_k(5);
    let c = gauge_cross_check(&problem, &PotentialSpec::Symmetric { b: 5.0 }).expect("cross check");
    println!("landau vs symmetric, rectangle, robin");
    println!("  entrywise |H' - D H D*| = {:.2e}", c.entrywise_defect);
    println!("  max spectral difference = {:.2e}", c.max_spectral_difference);
    println!("  levels {:?}", c.original.values);
    assert!(c.entrywise_defect < 1e-13 && c.max_spectral_difference < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let chi = ScalarGauge::random(&mut rng, 4, 1.0, 5.0);
    let disk = Domain::Grid(GridKind::Disk { radius: 1.0, nr: 20, ntheta: 80 });
    let problem = Problem::new(disk, PotentialSpec::Symmetric { b: 3.0 }, BcSpec::chiral(0.4, 0.5)).with_k(5);
    let c = scalar_gauge_check(&problem, &chi).expect("random gauge");
    println!("random gauge, disk, chiral");
    println!("  entrywise = {:.2e}, spectra = {:.2e}", c.entrywise_defect, c.max_spectral_difference);
    assert!(c.entrywise_defect < 1e-13 && c.max_spectral_difference < 1e-9);
}
