// The boundary form `Lambda_A(psi, phi)`.
//
// For generic smooth states the bulk defect `<psi, H phi> - <H psi, phi>`
// of the unconstrained operator matches the boundary line integral up to
// `O(h^2)`, and `Lambda_A` does not change under a gauge transformation of
// states and links together.

use magbill::gauge::{apply_gauge, link_phases, transform_links, GaugeFunction, PhysicalParams, PotentialSpec, ScalarGauge};
use magbill::geometry::build_disk;
use magbill::operator::{boundary_form, bulk_form};
use magbill::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let params = PhysicalParams::default();
    let spec = PotentialSpec::Symmetric { b: 1.5 };
    let mut prev: Option<f64> = None;
    for n in [12, 24, 48] {
        let g = build_disk(1.0, n, 4 * n).unwrap();
        let links = link_phases(&g, &spec, params).unwrap();
        let psi = g.sample(|x, y| C64::new(1.0 + x * y, (2.0 * x - y).sin()));
        let phi = g.sample(|x, y| C64::from_polar(1.0 + 0.3 * y, 1.7 * x));
        let bulk = bulk_form(&g, &links, params, &psi, &phi).unwrap();
        let line = boundary_form(&g, &links, params, &psi, &phi).unwrap();
        let d = (bulk - line).norm();
        let ratio = prev.map(|p| format!("{:.2}", p / d)).unwrap_or_else(|| "-".into());
        println!("nr = {n:>2}: Lambda = {line:.6}, |bulk - Lambda| = {d:.3e}, ratio {ratio}");
        prev = Some(d);
    }

    let g = build_disk(1.0, 16, 64).unwrap();
    let links = link_phases(&g, &spec, params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let chi = GaugeFunction::from_scalar(&g, &ScalarGauge::random(&mut rng, 3, 1.0, 4.0), params).unwrap();
    let moved = transform_links(&g, &links, &chi).unwrap();
    let psi = g.sample(|x, y| C64::new(x, y * y));
    let phi = g.sample(|x, y| C64::new((x + y).cos(), x));
    let before = boundary_form(&g, &links, params, &psi, &phi).unwrap();
    let after = boundary_form(&g, &moved, params, &apply_gauge(&psi, &chi).unwrap(), &apply_gauge(&phi, &chi).unwrap()).unwrap();
    println!("gauge invariance: {before:.12} vs {after:.12}");
    assert!((before - after).norm() < 1e-12);
}
