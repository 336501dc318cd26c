// Self-adjoint realizations of `-d^2/dx^2` on an interval.
//
// A 2x2 unitary `U` picks the boundary condition; when `1` is not in its
// spectrum the Cayley transform gives an equivalent Robin-type matrix `L`.
// Both forms must produce the same operator.

use std::f64::consts::PI;

use magbill::gauge::PhysicalParams;
use magbill::selfadjoint1d::{cayley, gauge_away_1d, interval_spectrum, inverse_cayley, transform_unitary, Interval, IntervalBc, UnitaryBC};
use magbill::spectral::theta_family;
use magbill::C64;
use nalgebra::DMatrix;

fn main() {
    let params = PhysicalParams::default();
    let interval = Interval::new(PI, 800).unwrap();

    let thetas: Vec<f64> = (1..=5).map(|j| j as f64 * PI / 3.0).collect();
    let fam = theta_family(&thetas, interval, 3, params).expect("theta family");
    for (t, s) in fam.values.iter().zip(&fam.spectra) {
        let l = cayley(&UnitaryBC::scalar(*t)).unwrap();
        println!("theta = {t:.4}  L = {:+.5}  levels {:.5?}", l.matrix()[(0, 0)].re, s.values);
    }

    // a non-diagonal unitary mixing the two ends
    let (c, s) = (0.6, 0.8);
    let u = DMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), C64::new(0.0, s), C64::new(0.0, s), C64::new(c, 0.0)]);
    let u = UnitaryBC::new(u).unwrap();
    let l = cayley(&u).unwrap();
    let back = inverse_cayley(&l).unwrap();
    let defect = (back.matrix() - u.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    println!("round trip U -> L -> U: {defect:.1e}");
    let a = interval_spectrum(&IntervalBc::Unitary(u.clone()), &|_| 0.0, interval, 4, params).unwrap();
    let b = interval_spectrum(&IntervalBc::Cayley(l), &|_| 0.0, interval, 4, params).unwrap();
    println!("U form {:.6?}", a.values);
    println!("L form {:.6?}", b.values);
    assert!(a.max_difference(&b) < 1e-9);

    // a vector potential on an interval is pure gauge: it moves into U
    let pot = |x: f64| 0.5 + x.cos();
    let g = gauge_away_1d(&pot, interval, params);
    let with_field = interval_spectrum(&IntervalBc::Unitary(u.clone()), &pot, interval, 4, params).unwrap();
    let moved = interval_spectrum(&IntervalBc::Unitary(transform_unitary(&u, &g)), &|_| 0.0, interval, 4, params).unwrap();
    println!("gauge-away difference {:.1e}", with_field.max_difference(&moved));
    assert!(with_field.max_difference(&moved) < 1e-9);
}
