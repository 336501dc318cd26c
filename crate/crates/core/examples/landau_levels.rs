// Lowest Dirichlet levels of a disk in a strong uniform field.
//
// Deep inside the disk the states are Landau orbits, so the bottom of the
// spectrum sits near `hbar omega_c / 2` with a large near-degeneracy.

use magbill::gauge::PhysicalParams;
use magbill::spectral::landau_check;

fn main() {
    let params = PhysicalParams::default();
    let rep = landau_check(64.0, 1.0, 48, 96, 8, params).expect("landau run");
    println!("B = {}, magnetic length {:.4}", rep.b, rep.magnetic_length);
    println!("hbar omega_c / 2 = {}", rep.landau_energy);
    for (i, l) in rep.spectrum.values.iter().enumerate() {
        println!("  level {i}: {l:.6}");
    }
    println!(
        "lowest {:.6}, relative deviation {:+.3e}, {} levels within {:.2}",
        rep.lowest, rep.deviation, rep.degeneracy, rep.window
    );
    assert!(rep.deviation.abs() < 0.05);
    assert!(rep.degeneracy >= 4);
}
