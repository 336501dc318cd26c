// Robin parameter sweep on the unit square.
//
// `alpha = 0` is Neumann, large negative `alpha` pins the boundary values
// and approaches Dirichlet, positive `alpha` produces a bound surface state.

use magbill::gauge::PotentialSpec;
use magbill::geometry::GridKind;
use magbill::spectral::{robin_sweep, BcSpec, Domain, Problem, SweepDiagnostics};

fn main() {
    let square = Domain::Grid(GridKind::Rectangle { a: 1.0, b: 1.0, nx: 32, ny: 32 });
    let problem = Problem::new(square, PotentialSpec::Zero, BcSpec::robin(0.0));
    let alphas = [-1000.0, -100.0, -10.0, -3.0, -1.0, 0.0, 1.0, 3.0];
    let sweep = robin_sweep(&problem, &alphas).expect("robin sweep");
    for (a, s) in sweep.values.iter().zip(&sweep.spectra) {
        println!("alpha = {a:>8}: lambda_1 = {:.6}", s.values[0]);
    }
    let SweepDiagnostics::Robin { nonincreasing, neumann_identical, dirichlet_relative_gap, dirichlet_lowest } =
        sweep.diagnostics
    else {
        unreachable!("robin sweeps report their limits")
    };
    println!("nonincreasing: {nonincreasing}");
    println!("alpha = 0 matches the Neumann assembly bit for bit: {neumann_identical:?}");
    println!("Dirichlet lambda_1 = {dirichlet_lowest:.6}, gap at alpha = -1000: {dirichlet_relative_gap:.2e}");
    assert!(nonincreasing && neumann_identical == Some(true));
    assert!(dirichlet_relative_gap < 1e-2);
}
