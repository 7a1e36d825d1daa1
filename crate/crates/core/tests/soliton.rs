//! End-to-end soliton checks on built configurations: Monge–Ampère
//! residual constancy and boundary behaviour of the symplectic potential.

use gkrs::ansatz::Ansatz;
use gkrs::profiles::{build_cao_profile, build_taubnut_profile, Gauge, SolitonParams};
use gkrs::toric::{boundary_condition_check, forbidden_region_check, ma_residual_spread, DelzantPolyhedron};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn params(a: f64, alpha: &[f64], dims: &[usize]) -> SolitonParams {
    SolitonParams {
        a,
        alpha: alpha.to_vec(),
        dims: dims.to_vec(),
        scale: 1.0,
        gauge: Gauge::UnitC,
    }
}

fn configurations(a: f64) -> Vec<Ansatz> {
    let cao = |al: &[f64], d: &[usize]| Ansatz::new(build_cao_profile(&params(a, al, d)).unwrap()).unwrap();
    let tn = |al: &[f64], d: &[usize]| Ansatz::new(build_taubnut_profile(&params(a, al, d)).unwrap()).unwrap();
    vec![
        cao(&[0.0], &[1]),
        cao(&[0.0, 1.0], &[0, 0]),
        cao(&[0.0, 1.0], &[1, 0]),
        tn(&[0.0, 1.0], &[0, 0]),
        tn(&[0.0, 1.0, 2.0], &[0, 0, 0]),
    ]
}

#[test]
fn monge_ampere_residual_is_constant() {
    for a in [0.0, 1.0] {
        for an in configurations(a) {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            let pts: Vec<Vec<f64>> = (0..100)
                .map(|_| {
                    let p = an.sample_point(&mut rng);
                    an.moment_map(&p.xi, &p.base).unwrap()
                })
                .collect();
            let sv = an.soliton_vector();
            let c = vec![2.0; an.n()];
            let s = ma_residual_spread(&an, &sv.b, &c, &pts).unwrap();
            assert!(
                s.std_dev < 1e-6 * (1.0 + s.mean.abs()),
                "a={a} dims={:?}: {s:?}",
                an.profiles.dims
            );
            let wrong: Vec<f64> = sv.b.iter().map(|v| v + 0.1).collect();
            let s = ma_residual_spread(&an, &wrong, &c, &pts).unwrap();
            assert!(s.std_dev > 1e-3);
        }
    }
}

#[test]
fn potential_satisfies_facet_conditions() {
    for an in configurations(0.0).into_iter().chain(configurations(1.0)) {
        let poly = DelzantPolyhedron::standard_cone(an.n());
        let p = an.sample_point(&mut ChaCha8Rng::seed_from_u64(1));
        let x0 = an.moment_map(&p.xi, &p.base).unwrap();
        for facet in 0..an.n() {
            let r = boundary_condition_check(&an, &poly, facet, &x0, 1e-3).unwrap();
            assert!(
                r.pass,
                "a={} dims={:?} facet {facet}: {r:?}",
                an.profiles.a, an.profiles.dims
            );
        }
    }
}

#[test]
fn soliton_vectors_avoid_the_forbidden_region() {
    for a in [0.25, 1.0, 4.0] {
        for an in configurations(a) {
            let poly = DelzantPolyhedron::standard_cone(an.n());
            let r = forbidden_region_check(&poly, &an.soliton_vector().b).unwrap();
            assert!(!r.forbidden);
        }
    }
}
