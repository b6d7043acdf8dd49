//! Decay and oscillation probes on closed-form fields and on discrete minimizers.

use singell_core::fem::{mesh_disk, minimize};
use singell_core::probes::{
    default_radii, excess_decay, mesh_radii, morrey_decay, oscillation_probe, polar_net, probe, DecayTable, LinearField,
    P1Field, ProbeOptions, Quantity, SingularField, Verdict,
};
use singell_core::{make_params, Mat2, Vec2};

const P: f64 = 1.5;

fn opts() -> ProbeOptions {
    ProbeOptions::new(P)
}

fn origin() -> Vec2<f64> {
    Vec2::zero()
}

fn off_center() -> Vec2<f64> {
    Vec2::new(0.5, 0.0)
}

#[test]
fn morrey_slope_at_the_singularity_is_two_minus_p() {
    let x0 = origin();
    let t = morrey_decay(&SingularField, &x0, &default_radii(&x0), &opts()).unwrap();
    let slope = t.asserted_slope().expect("clean fit");
    assert!((slope - (2.0 - P)).abs() <= 0.1, "{}", t.summary());
    assert!((t.mu().unwrap() - P).abs() <= 0.1);
}

#[test]
fn morrey_slope_at_a_regular_point_is_two() {
    let x0 = off_center();
    let t = morrey_decay(&SingularField, &x0, &default_radii(&x0), &opts()).unwrap();
    assert!((t.asserted_slope().unwrap() - 2.0).abs() <= 0.1, "{}", t.summary());
}

#[test]
fn excess_decays_fast_only_away_from_the_singularity() {
    let (a, b) = (off_center(), origin());
    let regular = excess_decay(&SingularField, &a, &default_radii(&a), &opts()).unwrap();
    let singular = excess_decay(&SingularField, &b, &default_radii(&b), &opts()).unwrap();
    assert!(regular.slope >= 3.0, "{}", regular.summary());
    assert!(singular.slope <= 2.0, "{}", singular.summary());
}

#[test]
fn oscillation_verdicts() {
    let (a, b) = (origin(), off_center());
    let at_origin = oscillation_probe(&SingularField, &a, &default_radii(&a), &opts()).unwrap();
    assert_eq!(at_origin.verdict, Some(Verdict::Discontinuous));
    assert!(at_origin.values.iter().all(|v| (v - 2.0).abs() <= 0.2), "{:?}", at_origin.values);
    let regular = oscillation_probe(&SingularField, &b, &default_radii(&b), &opts()).unwrap();
    assert_eq!(regular.verdict, Some(Verdict::Continuous));
}

#[test]
fn linear_fields_have_no_excess_and_linear_oscillation() {
    let field = LinearField { offset: Vec2::new(0.2, 0.1), gradient: Mat2::new(1.0, 0.5, -0.3, 2.0) };
    let x0 = Vec2::new(0.1, -0.2);
    let radii = default_radii(&x0);
    let ex = excess_decay(&field, &x0, &radii, &opts()).unwrap();
    assert!(ex.values.iter().all(|v| *v <= 1e-24), "{:?}", ex.values);
    let osc = oscillation_probe(&field, &x0, &radii, &opts()).unwrap();
    assert!((osc.slope - 1.0).abs() <= 1e-6);
    let morrey = morrey_decay(&field, &x0, &radii, &opts()).unwrap();
    assert!((morrey.slope - 2.0).abs() <= 1e-6);
}

#[test]
fn oscillation_grows_with_the_net() {
    let x0 = Vec2::new(0.05, 0.02);
    let radii = [0.3, 0.15];
    let mut previous = vec![0.0; radii.len()];
    for k in 0..4 {
        let o = ProbeOptions { net_rings: 4 << k, net_angles: 8 << k, ..opts() };
        let t = oscillation_probe(&SingularField, &x0, &radii, &o).unwrap();
        for (v, prev) in t.values.iter().zip(&previous) {
            assert!(v >= prev, "net level {k}: {v} < {prev}");
        }
        previous = t.values;
    }
}

#[test]
fn nets_are_nested_under_doubling() {
    let x0 = Vec2::new(0.1, 0.1);
    let coarse = polar_net(&x0, 0.4, 4, 8);
    let fine = polar_net(&x0, 0.4, 8, 16);
    for c in &coarse {
        assert!(fine.iter().any(|f| (*f - *c).norm() <= 1e-14), "{c:?}");
    }
}

#[test]
fn integral_probes_settle_under_quadrature_refinement() {
    for x0 in [origin(), off_center()] {
        let radii = default_radii(&x0);
        let mut previous: Option<DecayTable> = None;
        for n_r in [100, 200, 400] {
            let o = ProbeOptions { n_r, ..opts() };
            let t = morrey_decay(&SingularField, &x0, &radii, &o).unwrap();
            if let Some(prev) = &previous {
                if n_r == 400 {
                    for (a, b) in prev.values.iter().zip(&t.values) {
                        assert!((a - b).abs() <= 1e-4 * b.abs(), "x0 = {x0:?}: {a} vs {b}");
                    }
                }
            }
            previous = Some(t);
        }
    }
}

#[test]
fn dispatcher_matches_the_direct_calls() {
    let x0 = off_center();
    let radii = default_radii(&x0);
    for q in [Quantity::Morrey, Quantity::Excess, Quantity::Oscillation] {
        let a = probe(q, &SingularField, &x0, &radii, &opts()).unwrap();
        let b = match q {
            Quantity::Morrey => morrey_decay(&SingularField, &x0, &radii, &opts()),
            Quantity::Excess => excess_decay(&SingularField, &x0, &radii, &opts()),
            Quantity::Oscillation => oscillation_probe(&SingularField, &x0, &radii, &opts()),
        }
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(Quantity::parse(q.name()).unwrap(), q);
    }
}

#[test]
fn balls_must_stay_inside_the_disk() {
    let x0 = Vec2::new(0.8, 0.0);
    assert!(morrey_decay(&SingularField, &x0, &[0.5], &opts()).is_err());
    assert!(morrey_decay(&SingularField, &x0, &[], &opts()).is_err());
    assert!(morrey_decay(&SingularField, &x0, &[0.1, 0.1], &opts()).is_err());
}

#[test]
fn discrete_minimizers_look_discontinuous_at_the_origin() {
    let params = make_params(P).unwrap();
    let mut at_shared_radius = Vec::new();
    for h in [0.2, 0.1, 0.05] {
        let mesh = mesh_disk(h, true).unwrap();
        let (w, _) = minimize(&params, &mesh, 1e-8).unwrap();
        let field = P1Field::new(&mesh, &w).unwrap();
        let x0 = origin();
        let radii = mesh_radii(&x0, mesh.h);
        let t = oscillation_probe(&field, &x0, &radii, &opts()).unwrap();
        assert_eq!(t.verdict, Some(Verdict::Discontinuous), "h = {h}: {:?}", t.values);
        let k = radii.iter().position(|r| (r - 0.4).abs() <= 1e-12).expect("0.4 is on every ladder");
        at_shared_radius.push(t.values[k]);
    }
    assert!(at_shared_radius.windows(2).all(|w| w[1] >= w[0]), "{at_shared_radius:?}");
    assert!((at_shared_radius.last().unwrap() - 2.0).abs() <= 0.2);
}
