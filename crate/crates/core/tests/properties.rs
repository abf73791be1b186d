//! Randomized invariants across modules.

use proptest::prelude::*;
use worldtube::compare::{lw_point_potential, shell_potential, KAPPA};
use worldtube::retardation::solve_retarded;
use worldtube::tube::gram_determinant;
use worldtube::{Event, Frame, ShellConfig, SphereQuadrature, UniformWorldline, Velocity};

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter("nonzero", |d| d.iter().map(|c| c * c).sum::<f64>() > 1e-2)
}

fn worldline(max_accel: f64) -> impl Strategy<Value = UniformWorldline> {
    (0.0..2.0f64, direction(), direction(), 0.0..max_accel).prop_map(|(r, du, dn, a)| {
        let u = Velocity::from_rapidity(r, du).unwrap();
        let norm = dn.iter().map(|c| c * c).sum::<f64>().sqrt();
        let n = Frame::boosted(&u).spatial(dn.map(|c| c / norm));
        UniformWorldline::new(Event::ORIGIN, u, n, a).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn worldline_velocity_is_unit_timelike(w in worldline(2.0), s in -3.0..3.0f64) {
        let v = w.velocity(s);
        prop_assert!((v.square() + 1.0).abs() < 1e-12 * v.max_abs().powi(2));
        prop_assert!(v.dot(&w.acceleration(s)).abs() < 1e-10 * (1.0 + v.max_abs().powi(2)));
    }

    #[test]
    fn retarded_point_is_on_the_past_light_cone(w in worldline(1.5), c in prop::array::uniform4(-3.0..3.0f64)) {
        let x = Event(c);
        if let Ok(sol) = solve_retarded(&w, &x) {
            let k = x - w.position(sol.s_ret);
            prop_assert!(k.square().abs() < 1e-10 * k.max_abs().powi(2).max(1.0));
            prop_assert!(k[0] * w.velocity(sol.s_ret)[0] > 0.0 || k.max_abs() == 0.0);
            prop_assert!(sol.rho > 0.0);
        }
    }

    #[test]
    fn measure_density_matches_the_closed_form(
        w in worldline(1.0), eps in 0.01..0.5f64, s in -2.0..2.0f64, d in direction()
    ) {
        let shell = ShellConfig::new(w, eps, 1.0).unwrap();
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        let n = Frame::adapted(&w.u(), &w.n()).unwrap().spatial(d.map(|c| c / norm));
        let closed = eps * eps * (1.0 + eps * w.acceleration_magnitude() * w.n().dot(&n));
        let got = gram_determinant(&shell, s, &n).unwrap().abs().sqrt();
        prop_assert!((got / closed - 1.0).abs() < 1e-8);
    }

    #[test]
    fn static_potential_is_coulomb(q in -3.0..3.0f64, d in direction(), r in 0.1..10.0f64, t in -5.0..5.0f64) {
        let w = UniformWorldline::inertial(Event::ORIGIN, Velocity::REST);
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        let x = Event::new(t, r * d[0] / norm, r * d[1] / norm, r * d[2] / norm);
        let a = lw_point_potential(&w, q, &x).unwrap();
        prop_assert!((a[0] - KAPPA * q / r).abs() < 1e-13 * (KAPPA * q / r).abs().max(1e-300));
        prop_assert!(a[1] == 0.0 && a[2] == 0.0 && a[3] == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn inertial_shell_matches_point_charge_outside(
        rapidity in 0.0..2.0f64, du in direction(), d in direction(), r in 2.0..10.0f64, t in -5.0..5.0f64
    ) {
        let u = Velocity::from_rapidity(rapidity, du).unwrap();
        let w = UniformWorldline::inertial(Event::ORIGIN, u);
        let eps = 0.2;
        let shell = ShellConfig::with_charge(w, eps, 1.0).unwrap();
        let quad = SphereQuadrature::for_worldline(&w, 16, 32).unwrap();
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        let x = Event::ORIGIN + Frame::boosted(&u).vector([t, r * eps * d[0] / norm, r * eps * d[1] / norm, r * eps * d[2] / norm]);
        let a = shell_potential(&shell, &x, &quad).unwrap();
        let b = lw_point_potential(&w, 1.0, &x).unwrap();
        prop_assert!((a - b).euclidean_norm() < 1e-9 * b.euclidean_norm());
    }
}
