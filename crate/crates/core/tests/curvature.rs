//! Finite-difference curvature of the ansatz metrics against closed forms.

use gkrs::ansatz::Ansatz;
use gkrs::curvature::{ambi_cao_2d, ambi_closed_forms_2d, curvature_from_potential, sectional_min, Chart};
use gkrs::profiles::{build_cao_profile, build_taubnut_profile, Gauge, SolitonParams};

fn params(a: f64, alpha: &[f64]) -> SolitonParams {
    SolitonParams {
        a,
        alpha: alpha.to_vec(),
        dims: vec![0; alpha.len()],
        scale: 1.0,
        gauge: Gauge::UnitC,
    }
}

fn cao(a: f64) -> Ansatz {
    Ansatz::new(build_cao_profile(&params(a, &[0.0, 1.0])).unwrap()).unwrap()
}

fn taubnut(a: f64, alpha: &[f64]) -> Ansatz {
    Ansatz::new(build_taubnut_profile(&params(a, alpha)).unwrap()).unwrap()
}

const POINTS: [[f64; 2]; 4] = [[0.5, 2.0], [0.2, 1.3], [0.8, 3.5], [0.4, 1.05]];

#[test]
fn cao_scalar_curvature_matches_closed_form() {
    let an = cao(1.0);
    let b = an.soliton_vector().b;
    for xi in POINTS {
        let x = an.moment_map(&xi, &[vec![], vec![]]).unwrap();
        let r = curvature_from_potential(&an, &x, &b, Chart::Log).unwrap();
        let am = ambi_cao_2d(1.0, xi).unwrap();
        assert!((r.scal - am.scal).abs() < 1e-4, "{xi:?}: {} vs {}", r.scal, am.scal);
        assert!(r.soliton_residual_norm < 1e-4, "{xi:?}: {}", r.soliton_residual_norm);
        let lower = am.scal / 4.0 - am.lambda;
        assert!(
            r.ricci_eigenvalues[0] >= lower - 1e-4,
            "{xi:?}: {:?} {lower}",
            r.ricci_eigenvalues
        );
        let sec = r.sectional.unwrap();
        let (m, _) = sectional_min(&am);
        assert!(sec.min >= -1e-4 && sec.min <= m + 1e-4, "{xi:?}: {} {m}", sec.min);
        assert!(sec.max > 0.0);
    }
}

#[test]
fn taubnut_scalar_curvature_matches_closed_form() {
    for a in [0.0, 1.0] {
        let an = taubnut(a, &[0.0, 1.0]);
        let b = an.soliton_vector().b;
        let (f1, f2) = (&an.profiles.profiles[0], &an.profiles.profiles[1]);
        for xi in [[-0.5, 2.0], [-2.0, 1.3], [-0.1, 3.5], [-1.0, 1.05]] {
            let x = an.moment_map(&xi, &[vec![], vec![]]).unwrap();
            let r = curvature_from_potential(&an, &x, &b, Chart::Log).unwrap();
            let am = ambi_closed_forms_2d(f1, f2, xi).unwrap();
            assert!(
                (r.scal - am.scal).abs() < 1e-4,
                "a={a} {xi:?}: {} vs {}",
                r.scal,
                am.scal
            );
            assert!(
                r.soliton_residual_norm < 1e-4,
                "a={a} {xi:?}: {}",
                r.soliton_residual_norm
            );
            if a == 0.0 {
                assert!(r.ricci_norm < 1e-5, "{xi:?}: {}", r.ricci_norm);
            }
        }
    }
}

#[test]
fn flat_cao_is_flat() {
    let an = cao(0.0);
    let x = an.moment_map(&[0.3, 1.7], &[vec![], vec![]]).unwrap();
    let r = curvature_from_potential(&an, &x, &an.soliton_vector().b, Chart::Log).unwrap();
    assert!(r.riemann_norm < 1e-5, "{}", r.riemann_norm);
}
