//! Invariant checks behind `worldtube verify` and the acceptance tests.
//!
//! Each check returns a [`Check`] with the worst observed value, the
//! tolerance it was held to and the wall time it took.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compare::{
    leading_integral, lw_point_potential, shell_potential, verdict, CompareOptions, Convention, Equality,
};
use crate::error::{Error, Result};
use crate::retardation::{solve_retarded, RetardedSolution};
use crate::spacetime::sampling::{random_direction, random_velocity};
use crate::spacetime::{boost, tensor, Event, FourVector, Frame, LinMap4, Velocity};
use crate::testfn::BumpTestFunction;
use crate::tube::{gram_determinant, ShellConfig, SphereQuadrature};
use crate::worldline::{UniformWorldline, Worldline};

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64, detail: String, start: Instant) -> Check {
        Check {
            name: name.to_string(),
            passed: value.is_finite() && value <= tolerance,
            value,
            tolerance,
            detail,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn failed(name: &str, err: Error, start: Instant) -> Check {
        Check {
            name: name.to_string(),
            passed: false,
            value: f64::NAN,
            tolerance: f64::NAN,
            detail: format!("error: {err}"),
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn from_result(name: &str, start: Instant, r: Result<Check>) -> Check {
        r.unwrap_or_else(|e| Check::failed(name, e, start))
    }
}

/// Centre worldline, test functions and sweep used by the comparison checks.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub center: UniformWorldline,
    pub charge: f64,
    pub test_functions: Vec<BumpTestFunction>,
    /// Distance scale of the test-function supports from the centre.
    pub d0: f64,
    /// Sweep radii as multiples of `d0`.
    pub sweep: Vec<f64>,
    pub options: CompareOptions,
}

impl Scenario {
    /// `a_c = 1` at rest, three supports of radius `d0/2` around the centre, `ε/d0 ∈ {0.2, 0.1, 0.05, 0.025}`.
    pub fn standard() -> Scenario {
        let center = UniformWorldline::new(Event::ORIGIN, Velocity::REST, FourVector::basis(1), 1.0)
            .expect("valid worldline");
        Scenario::around(center, 1.0)
    }

    /// The standard supports placed in the centre's adapted frame at `s = 0`.
    pub fn around(center: UniformWorldline, d0: f64) -> Scenario {
        let frame = Frame::adapted(&center.u(), &center.n()).expect("valid worldline");
        let offsets = [[0.0, 0.0, 1.0, 0.0], [0.5, 0.6, 0.0, 0.6], [1.0, 0.3, 0.0, -1.0]];
        let test_functions = offsets
            .iter()
            .map(|c| {
                BumpTestFunction::new(center.origin() + frame.vector(c.map(|v| v * d0)), 0.5 * d0, 1.0, frame)
                    .expect("valid test function")
            })
            .collect();
        Scenario {
            center,
            charge: 1.0,
            test_functions,
            d0,
            sweep: vec![0.2, 0.1, 0.05, 0.025],
            options: CompareOptions::default(),
        }
    }

    /// The same supports and sweep around a centre with a different acceleration.
    pub fn with_acceleration(&self, a: f64) -> Result<Scenario> {
        let w = &self.center;
        let center = UniformWorldline::new(w.origin(), w.u(), w.n(), a)?;
        Ok(Scenario { center, ..self.clone() })
    }
}

/// Sizes of the randomized checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSizes {
    pub boost_pairs: usize,
    pub retardation_cases: usize,
    pub exterior_points: usize,
    pub wave_points: usize,
    pub derivative_points: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes { boost_pairs: 1000, retardation_cases: 10_000, exterior_points: 20, wave_points: 20, derivative_points: 100 }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `‖L*L - 1‖` and `‖L·u - u'‖` for random velocity pairs, tolerance `1e-12`.
pub fn boost_algebra(pairs: usize, seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let (u, u2) = (random_velocity(&mut rng, 2.0), random_velocity(&mut rng, 2.0));
        let l = boost(&u, &u2);
        worst = worst.max((l.adjoint().compose(&l) - LinMap4::identity()).max_abs());
        worst = worst.max((l * u.vector() - u2.vector()).max_abs());
    }
    Check::new("boost_algebra", worst, 1e-12, format!("{pairs} random velocity pairs"), start)
}

fn random_worldline<R: Rng>(rng: &mut R, a: f64) -> UniformWorldline {
    let u = random_velocity(rng, 2.0);
    let frame = Frame::boosted(&u);
    let origin = Event(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
    UniformWorldline::new(origin, u, frame.spatial(random_direction(rng)), a).expect("valid worldline")
}

/// `L̇` from fourth-order differences of `L` against the closed form, and
/// `L̇ L* = a(u_c⊗n_c - n_c⊗u_c)`, elementwise over `s ∈ [-3, 3]`; tolerance `1e-8`.
pub fn boost_derivative(seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 2);
    let mut worst: f64 = 0.0;
    let h = 1e-3;
    for _ in 0..10 {
        let a = rng.gen_range(0.1..1.0);
        let w = random_worldline(&mut rng, a);
        let (u, n) = (w.u().vector(), w.n());
        let generator = (tensor(&u, &n) - tensor(&n, &u)) * w.acceleration_magnitude();
        for i in 0..=60 {
            let s = -3.0 + 0.1 * i as f64;
            let l = |t: f64| w.center_boost(t);
            let fd = (l(s - 2.0 * h) - l(s + 2.0 * h) + (l(s + h) - l(s - h)) * 8.0) * (1.0 / (12.0 * h));
            let exact = w.center_boost_dot(s);
            worst = worst.max((fd - exact).max_abs());
            worst = worst.max((fd.compose(&l(s).adjoint()) - generator).max_abs());
        }
    }
    Check::new("boost_derivative", worst, 1e-8, "10 random worldlines, 61 values of s in [-3, 3]".into(), start)
}

/// The 26 directions of a 3×3×3 cube around its centre, normalized.
fn cube_directions() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                if (i, j, k) != (0, 0, 0) {
                    let v = [i as f64, j as f64, k as f64];
                    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    out.push(v.map(|c| c / norm));
                }
            }
        }
    }
    out
}

/// `√|G| / (ε²(1 + ε a (n_c·n))) - 1` over 3 radii × 3 accelerations × 8 times × 26 directions;
/// tolerance `1e-6`.
pub fn measure_formula(seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 3);
    let mut run = || -> Result<Check> {
        let mut worst: f64 = 0.0;
        for a in [0.0, 0.5, 1.5] {
            let w = random_worldline(&mut rng, a);
            let frame = Frame::adapted(&w.u(), &w.n())?;
            for eps in [0.05, 0.2, 0.5] {
                let shell = ShellConfig::new(w, eps, 1.0)?;
                for s in (0..8).map(|i| -2.0 + 4.0 * i as f64 / 7.0) {
                    for d in cube_directions() {
                        let n = frame.spatial(d);
                        let root = gram_determinant(&shell, s, &n)?.abs().sqrt();
                        let closed = eps * eps * (1.0 + eps * a * w.n().dot(&n));
                        worst = worst.max((root / closed - 1.0).abs());
                    }
                }
            }
        }
        Ok(Check::new("measure_formula", worst, 1e-6, "3 ε × 3 a_c × 8 s × 26 n".into(), start))
    };
    Check::from_result("measure_formula", start, run())
}

/// Zeroth to third moments of the sphere quadrature against `4π`, `0`,
/// `(4π/3)(1 + u_c⊗u_c)` and `0`; tolerance `1e-12`.
pub fn moment_identities(polar: usize, azimuthal: usize, seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 4);
    let mut run = || -> Result<Check> {
        let w = random_worldline(&mut rng, 1.0);
        let q = SphereQuadrature::for_worldline(&w, polar, azimuthal)?;
        let u = w.u().vector();
        let total: f64 = q.weights.iter().sum();
        let mut worst = (total - 4.0 * PI).abs();
        worst = worst.max(q.integrate(|n| *n).max_abs());
        let second = q.integrate(|n| tensor(n, n));
        worst = worst.max((second - (LinMap4::identity() + tensor(&u, &u)) * (4.0 * PI / 3.0)).max_abs());
        for i in 0..4 {
            for j in 0..4 {
                let third = q.integrate(|n| *n * (n[i] * n[j]));
                worst = worst.max(third.max_abs());
            }
        }
        Ok(Check::new(
            "moment_identities",
            worst,
            1e-12,
            format!("N_θ = {polar}, N_φ = {azimuthal}, all components of moments 0 to 3"),
            start,
        ))
    };
    Check::from_result("moment_identities", start, run())
}

fn solution_ok(sol: &RetardedSolution) -> bool {
    sol.rho > 0.0 && sol.k.square().abs() < 1e-12 * sol.k.max_abs().powi(2).max(1.0)
}

/// Retarded solutions on random inertial and hyperbolic worldlines: residual,
/// `ρ > 0`, agreement with the inertial closed form to `1e-12`, and horizon detection.
pub fn retardation(cases: usize, seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 5);
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..cases {
        let w = random_worldline(&mut rng, 0.0);
        let x = Event(std::array::from_fn(|_| rng.gen_range(-5.0..5.0)));
        match solve_retarded(&w, &x) {
            Ok(sol) => {
                let d = x - w.origin();
                let tau = -d.dot(&w.u().vector());
                let exact = tau - (d.square() + tau * tau).sqrt();
                worst = worst.max((sol.s_ret - exact).abs() / exact.abs().max(1.0));
                failures += usize::from(!solution_ok(&sol));
            }
            Err(_) => failures += 1,
        }
    }
    let mut hyperbolic = 0;
    let mut horizons = 0;
    for _ in 0..cases {
        let a = rng.gen_range(0.1..2.0);
        let w = random_worldline(&mut rng, a);
        let x = Event(std::array::from_fn(|_| rng.gen_range(-5.0..5.0)));
        // light-cone coordinate about the hyperbola centre; negative means beyond the horizon
        let d = x - w.origin();
        let plus = d.dot(&w.n()) - d.dot(&w.u().vector()) + 1.0 / a;
        match solve_retarded(&w, &x) {
            Ok(sol) if plus > 1e-9 => {
                hyperbolic += 1;
                failures += usize::from(!solution_ok(&sol));
            }
            Err(Error::Horizon) if plus < -1e-9 => horizons += 1,
            Ok(_) | Err(_) if plus.abs() <= 1e-9 => {}
            _ => failures += 1,
        }
    }
    let value = if failures > 0 { f64::INFINITY } else { worst };
    Check::new(
        "retardation",
        value,
        1e-12,
        format!("{cases} inertial cases, {hyperbolic} hyperbolic solutions, {horizons} horizon cases, {failures} failures"),
        start,
    )
}

/// Static and boosted shells against the point charge at exterior points
/// between `2ε` and `10ε` from the centre; tolerance `1e-6` relative.
pub fn inertial_equivalence(points: usize, polar: usize, azimuthal: usize, seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 6);
    let mut run = || -> Result<Check> {
        let eps = 0.25;
        let mut worst: f64 = 0.0;
        for rapidity in [0.0, 1.0, 2.0] {
            let u = Velocity::from_rapidity(rapidity, random_direction(&mut rng))?;
            let frame = Frame::boosted(&u);
            let w = UniformWorldline::new(Event::ORIGIN, u, frame.spatial(random_direction(&mut rng)), 0.0)?;
            let shell = ShellConfig::with_charge(w, eps, 1.0)?;
            let quad = SphereQuadrature::for_worldline(&w, polar, azimuthal)?;
            for _ in 0..points {
                let r = eps * rng.gen_range(2.0..10.0);
                let d = random_direction(&mut rng).map(|c| c * r);
                let x = Event::ORIGIN + frame.vector([rng.gen_range(-5.0..5.0), d[0], d[1], d[2]]);
                let a = shell_potential(&shell, &x, &quad)?;
                let b = lw_point_potential(&w, 1.0, &x)?;
                worst = worst.max((a - b).euclidean_norm() / b.euclidean_norm());
            }
        }
        Ok(Check::new(
            "inertial_equivalence",
            worst,
            1e-6,
            format!("rapidities 0, 1, 2; {points} points each; N_θ = {polar}, N_φ = {azimuthal}"),
            start,
        ))
    };
    Check::from_result("inertial_equivalence", start, run())
}

/// `max_μ |□A_μ| / (max_μ |A_μ| / ρ²)` by fourth-order central differences
/// along the axes of the rest frame at the retarded time. The step is `h`
/// times the smaller of `ρ` and the acceleration length there.
pub fn dalembertian_residual<W: Worldline + ?Sized>(w: &W, x: &Event, h: f64) -> Result<f64> {
    let sol = solve_retarded(w, x)?;
    let rho = sol.rho;
    let frame = Frame::boosted(&Velocity::new(w.velocity(sol.s_ret))?);
    let ds = 1e-4 * rho;
    let accel = (w.velocity(sol.s_ret + ds) - w.velocity(sol.s_ret - ds)) * (0.5 / ds);
    let length = rho.min(1.0 / accel.square().max(0.0).sqrt());
    let step = h * length;
    let a = |p: Event| -> Result<[f64; 4]> { Ok(frame.coordinates(&lw_point_potential(w, 1.0, &p)?)) };
    let centre = a(*x)?;
    let mut box_a = [0.0; 4];
    for mu in 0..4 {
        let e = frame.axis(mu) * step;
        let (p2, p1, m1, m2) = (a(*x + e * 2.0)?, a(*x + e)?, a(*x - e)?, a(*x - e * 2.0)?);
        for (k, out) in box_a.iter_mut().enumerate() {
            let second = (-p2[k] + 16.0 * p1[k] - 30.0 * centre[k] + 16.0 * m1[k] - m2[k]) / (12.0 * step * step);
            *out += crate::spacetime::METRIC[mu] * second;
        }
    }
    let max_abs = |v: &[f64; 4]| v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    Ok(max_abs(&box_a) / (max_abs(&centre) / (rho * rho)))
}

/// The wave equation for the hyperbolic point potential at random points in
/// the causal future of the worldline; tolerance `1e-4`.
pub fn wave_equation(points: usize, seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 7);
    let mut run = || -> Result<Check> {
        let mut worst: f64 = 0.0;
        let mut tested = 0;
        while tested < points {
            let a = rng.gen_range(0.2..1.5);
            let w = random_worldline(&mut rng, a);
            let frame = Frame::adapted(&w.u(), &w.n())?;
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let x = w.origin() + frame.vector(c);
            match dalembertian_residual(&w, &x, 1e-2) {
                Ok(r) if solve_retarded(&w, &x)?.rho > 0.1 => {
                    worst = worst.max(r);
                    tested += 1;
                }
                Ok(_) | Err(Error::Horizon) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Check::new("wave_equation", worst, 1e-4, format!("{points} points off the worldline"), start))
    };
    Check::from_result("wave_equation", start, run())
}

/// Gradient and Hessian of random bumps against Richardson-extrapolated
/// central differences; tolerance `1e-6` relative.
pub fn test_function_derivatives(points: usize, seed: u64) -> Check {
    let start = Instant::now();
    let mut rng = rng(seed, 8);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let frame = Frame::boosted(&random_velocity(&mut rng, 1.0));
        let center = Event(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let phi = BumpTestFunction::new(center, rng.gen_range(0.3..2.0), rng.gen_range(0.5..2.0), frame)
            .expect("valid test function");
        let dir = random_direction(&mut rng);
        let r = phi.radius * rng.gen_range(0.0..0.8);
        let t = rng.gen_range(-0.5..0.5) * (phi.radius * phi.radius - r * r).max(0.0).sqrt();
        let x = phi.point([t, r * dir[0], r * dir[1], r * dir[2]]);
        let h = 2e-3 * phi.radius;
        let grad = phi.gradient(&x);
        let hess = phi.hessian(&x);
        let g = |p: Event| phi.value(&p);
        let gscale = grad.max_abs().max(1e-3 * phi.value(&x) / phi.radius);
        let hscale = hess.max_abs().max(1e-3 * phi.value(&x) / phi.radius.powi(2));
        for mu in 0..4 {
            let e = FourVector::basis(mu);
            let d1 = |h: f64| (g(x + e * h) - g(x - e * h)) / (2.0 * h);
            let fd = (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
            worst = worst.max((fd - e.dot(&grad)).abs() / gscale);
            for nu in 0..4 {
                let f = FourVector::basis(nu);
                let d2 = |h: f64| {
                    (g(x + e * h + f * h) - g(x + e * h - f * h) - g(x - e * h + f * h) + g(x - e * h - f * h))
                        / (4.0 * h * h)
                };
                let fd2 = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
                worst = worst.max((fd2 - hess.bilinear(&e, &f)).abs() / hscale);
            }
        }
    }
    Check::new("test_function_derivatives", worst, 1e-6, format!("{points} interior points"), start)
}

/// For the accelerated scenario at `ε = 0.05 d0`: the smallest ratio
/// `‖Δ‖ / (10 · error)` over the test functions must reach 1, and at least
/// three test functions are required.
pub fn accelerated_inequality(scenario: &Scenario) -> Check {
    let start = Instant::now();
    let run = || -> Result<Check> {
        let eps = 0.05 * scenario.d0;
        let convention = Convention::FixedCharge { charge: scenario.charge };
        let v = verdict(&scenario.center, &convention, &scenario.test_functions, &[eps], &scenario.options)?;
        let mut worst = 0.0_f64;
        let mut lines = Vec::new();
        for tf in &v.per_test_function {
            let r = &tf.records[0];
            let margin = 10.0 * r.delta_error / r.norm_delta;
            worst = worst.max(margin);
            lines.push(format!("‖Δ‖ = {:.3e}, error = {:.1e}", r.norm_delta, r.delta_error));
        }
        if scenario.test_functions.len() < 3 || v.equality != Equality::NotEqual {
            worst = f64::INFINITY;
        }
        Ok(Check::new("accelerated_inequality", worst, 1.0, lines.join("; "), start))
    };
    Check::from_result("accelerated_inequality", start, run())
}

/// The fixed-charge sweep: worst of `|slope - 2| / 0.1`, `|ratio - 1| / 0.1`
/// and `deviation / 0.1` at the smallest `ε`, over all test functions; must not exceed 1.
pub fn leading_order_law(scenario: &Scenario) -> Check {
    let start = Instant::now();
    let run = || -> Result<Check> {
        let convention = Convention::FixedCharge { charge: scenario.charge };
        let sweep: Vec<f64> = scenario.sweep.iter().map(|f| f * scenario.d0).collect();
        let v = verdict(&scenario.center, &convention, &scenario.test_functions, &sweep, &scenario.options)?;
        let mut worst = 0.0_f64;
        let mut lines = Vec::new();
        for tf in &v.per_test_function {
            let last = tf.records.iter().min_by(|a, b| a.eps.total_cmp(&b.eps)).ok_or(Error::InsufficientSweep {
                needed: 2,
                got: 0,
            })?;
            let slope = tf.slope.unwrap_or(f64::NAN);
            for m in [(slope - 2.0).abs(), (last.ratio - 1.0).abs(), last.deviation] {
                worst = worst.max(if m.is_nan() { f64::INFINITY } else { m / 0.1 });
            }
            lines.push(format!("slope {slope:.4}, ratio {:.5}, deviation {:.1e}", last.ratio, last.deviation));
        }
        if !v.timelike {
            worst = f64::INFINITY;
            lines.push("non-timelike prediction integrand".into());
        }
        Ok(Check::new("leading_order_law", worst, 1.0, lines.join("; "), start))
    };
    Check::from_result("leading_order_law", start, run())
}

/// For inertial motion the prediction must vanish: `‖pred‖ / max(error, 1e-9 · magnitude)` ≤ 1.
pub fn inertial_prediction_vanishes(scenario: &Scenario) -> Check {
    let start = Instant::now();
    let run = || -> Result<Check> {
        let inertial = scenario.with_acceleration(0.0)?;
        let mut worst = 0.0_f64;
        let mut lines = Vec::new();
        for phi in &inertial.test_functions {
            let shell = ShellConfig::with_charge(inertial.center, 0.05 * inertial.d0, inertial.charge)?;
            phi.check_exterior(&shell)?;
            let unit = leading_integral(&inertial.center, phi, &inertial.options.prediction)?;
            let r = unit.result;
            let norm = r.value.euclidean_norm();
            let bound = r.error.max(1e-9 * r.magnitude);
            worst = worst.max(norm / bound);
            lines.push(format!("‖J‖ = {norm:.2e}, error = {:.1e}, scale = {:.1e}", r.error, r.magnitude));
        }
        Ok(Check::new("inertial_prediction_vanishes", worst, 1.0, lines.join("; "), start))
    };
    Check::from_result("inertial_prediction_vanishes", start, run())
}

/// Every check, in a fixed order.
pub fn run_all(sizes: &SuiteSizes, scenario: &Scenario, seed: u64) -> Vec<Check> {
    vec![
        boost_algebra(sizes.boost_pairs, seed),
        boost_derivative(seed),
        measure_formula(seed),
        moment_identities(8, 16, seed),
        retardation(sizes.retardation_cases, seed),
        inertial_equivalence(sizes.exterior_points, 16, 32, seed),
        accelerated_inequality(scenario),
        leading_order_law(scenario),
        wave_equation(sizes.wave_points, seed),
        inertial_prediction_vanishes(scenario),
        test_function_derivatives(sizes.derivative_points, seed),
    ]
}
