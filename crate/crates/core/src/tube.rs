//! World-tube geometry of the rigidly accelerated shell: the parametrization
//! `p(s, n) = r_c(s) + ε L(s)·n`, its Gram determinant, the surface measure,
//! the velocity field of the world current, and product quadrature over
//! `I × S_c(1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussLegendre, Integrand};
use crate::spacetime::{check_unit_spacelike, Event, FourVector, Frame, Velocity};
use crate::worldline::{ShellConstituent, UniformWorldline};

/// A rigid spherical shell of radius `ε` and uniform surface charge density `σ`
/// whose centre follows `center`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellConfig {
    center: UniformWorldline,
    radius: f64,
    density: f64,
}

impl ShellConfig {
    pub fn new(center: UniformWorldline, radius: f64, density: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        if !density.is_finite() {
            return Err(Error::InvalidCharge(density));
        }
        let eps_a = radius * center.acceleration_magnitude();
        if eps_a >= 1.0 {
            return Err(Error::WedgeViolation { eps_a, factor: 1.0 - eps_a });
        }
        Ok(ShellConfig { center, radius, density })
    }

    /// Shell carrying total charge `q`, i.e. `σ = q / (4π ε²)`.
    pub fn with_charge(center: UniformWorldline, radius: f64, q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::InvalidCharge(q));
        }
        ShellConfig::new(center, radius, q / (4.0 * PI * radius * radius))
    }

    pub fn center(&self) -> &UniformWorldline {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    /// `Q = 4π ε² σ`.
    pub fn charge(&self) -> f64 {
        4.0 * PI * self.radius * self.radius * self.density
    }

    pub fn constituent(&self, n: FourVector) -> Result<ShellConstituent> {
        ShellConstituent::new(self.center, self.radius, n)
    }

    /// Distance from `x` to the centre, measured in the centre's simultaneity
    /// hyperplane through `x`, minus `ε`. Positive outside the tube. Points
    /// that share no hyperplane with the centre (outside the Rindler wedge)
    /// report `+∞`.
    pub fn exterior_clearance(&self, x: &Event) -> f64 {
        let w = &self.center;
        let a = w.acceleration_magnitude();
        let u = w.u().vector();
        let d = *x - w.origin();
        let t = -d.dot(&u);
        let along = d.dot(&w.n());
        let perp = d + u * u.dot(&d) - w.n() * along;
        let perp2 = perp.square().max(0.0);
        // Rindler radius relative to the centre: R - 1/a, written without cancellation
        let ax1 = a * along + 1.0;
        if ax1 <= a * t.abs() {
            return f64::INFINITY;
        }
        let a_r = ((ax1 - a * t) * (ax1 + a * t)).sqrt();
        let radial = (a * along * along + 2.0 * along - a * t * t) / (a_r + 1.0);
        (radial * radial + perp2).sqrt() - self.radius
    }
}

/// `p(s, n) = r_c(s) + ε L(s)·n`.
pub fn tube_param(shell: &ShellConfig, s: f64, n: &FourVector) -> Result<Event> {
    Ok(shell.constituent(*n)?.position_at(s))
}

/// Determinant of the 3×3 Gram matrix `(Dp)*·Dp` at `(s, n)`.
///
/// Columns: `z(s, n)` and `ε L(s)·t_k` for an orthonormal basis `t_1, t_2` of the
/// plane orthogonal to `u_c` and `n`.
pub fn gram_determinant(shell: &ShellConfig, s: f64, n: &FourVector) -> Result<f64> {
    let c = shell.constituent(*n)?;
    let w = shell.center();
    let frame = Frame::adapted(&w.u(), n)?;
    let l = w.center_boost(s);
    let cols = [
        c.z(s),
        l.apply(&frame.space[1]) * shell.radius,
        l.apply(&frame.space[2]) * shell.radius,
    ];
    Ok(gram_det3(&cols))
}

pub(crate) fn gram_det3(cols: &[FourVector; 3]) -> f64 {
    let g: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| cols[i].dot(&cols[j])));
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

/// `ε² (1 + ε a_c (n_c·n))`, the density of the tube measure in `(s, n)`.
pub fn measure_density(shell: &ShellConfig, n: &FourVector) -> Result<f64> {
    let c = shell.constituent(*n)?;
    Ok(shell.radius * shell.radius * c.stretch())
}

/// The world-current velocity `u_ε(p(s, n)) = z(s, n) / (1 + ε a_c (n_c·n))`.
pub fn velocity_field(shell: &ShellConfig, s: f64, n: &FourVector) -> Result<FourVector> {
    let c = shell.constituent(*n)?;
    Ok(c.z(s) * (1.0 / c.stretch()))
}

/// Product rule on `S_c(1)`: Gauss–Legendre in `cos θ` (θ measured from `n_c`)
/// times the uniform azimuthal rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub nodes: Vec<FourVector>,
    pub weights: Vec<f64>,
    pub polar: usize,
    pub azimuthal: usize,
}

impl SphereQuadrature {
    /// Exact for polynomials in `n` of degree `≤ min(2 N_θ - 1, N_φ - 1)`.
    pub fn new(u: &Velocity, n_c: &FourVector, polar: usize, azimuthal: usize) -> Result<Self> {
        if polar < 2 || azimuthal < 4 {
            return Err(Error::InvalidQuadratureOrder(format!(
                "sphere quadrature needs N_θ ≥ 2 and N_φ ≥ 4, got {polar} and {azimuthal}"
            )));
        }
        check_unit_spacelike(u, n_c)?;
        let frame = Frame::adapted(u, n_c)?;
        let gl = GaussLegendre::new(polar)?;
        let dphi = 2.0 * PI / azimuthal as f64;
        let mut nodes = Vec::with_capacity(polar * azimuthal);
        let mut weights = Vec::with_capacity(polar * azimuthal);
        for (&ct, &wt) in gl.nodes.iter().zip(&gl.weights) {
            let st = (1.0 - ct * ct).sqrt();
            for j in 0..azimuthal {
                let phi = dphi * j as f64;
                nodes.push(frame.spatial([ct, st * phi.cos(), st * phi.sin()]));
                weights.push(wt * dphi);
            }
        }
        Ok(SphereQuadrature { nodes, weights, polar, azimuthal })
    }

    /// Quadrature adapted to a worldline's `u_c` and `n_c`.
    pub fn for_worldline(w: &UniformWorldline, polar: usize, azimuthal: usize) -> Result<Self> {
        SphereQuadrature::new(&w.u(), &w.n(), polar, azimuthal)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<T: Integrand>(&self, f: impl Fn(&FourVector) -> T) -> T {
        let terms: Vec<T> = self.nodes.iter().zip(&self.weights).map(|(n, &w)| f(n) * w).collect();
        pairwise_sum(&terms)
    }
}

/// A point of the tube handed to [`tube_integral`] integrands.
#[derive(Clone, Copy, Debug)]
pub struct TubePoint {
    pub s: f64,
    pub n: FourVector,
    pub position: Event,
    /// `u_ε` at the point.
    pub velocity: FourVector,
}

/// Gauss–Legendre panels in `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SRule {
    pub panels: usize,
    pub order: usize,
}

impl Default for SRule {
    fn default() -> Self {
        SRule { panels: 8, order: 8 }
    }
}

/// `∫ f dλ_{T_ε} = ε² ∫_{s_range} ∫_{S_c(1)} f(p(s, n)) (1 + ε a_c (n_c·n)) dn ds`.
pub fn tube_integral<T: Integrand>(
    shell: &ShellConfig,
    f: impl Fn(&TubePoint) -> T + Sync,
    s_range: (f64, f64),
    s_rule: SRule,
    quad: &SphereQuadrature,
) -> Result<T> {
    if s_rule.panels == 0 {
        return Err(Error::InvalidQuadratureOrder("need at least one s-panel".into()));
    }
    let gl = GaussLegendre::new(s_rule.order)?;
    let s_nodes = gl.composite(s_range.0, s_range.1, s_rule.panels);
    let constituents = quad.nodes.iter().map(|n| shell.constituent(*n)).collect::<Result<Vec<_>>>()?;
    let eps2 = shell.radius * shell.radius;
    let mut terms = Vec::with_capacity(s_nodes.len() * quad.len());
    for &(s, ws) in &s_nodes {
        for (c, &wn) in constituents.iter().zip(&quad.weights) {
            let stretch = c.stretch();
            let point = TubePoint {
                s,
                n: c.direction(),
                position: c.position_at(s),
                velocity: c.z(s) * (1.0 / stretch),
            };
            let v = f(&point);
            if !v.is_finite() {
                return Err(Error::NonFinite);
            }
            terms.push(v * (ws * wn * eps2 * stretch));
        }
    }
    Ok(pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::sampling::*;
    use crate::spacetime::{tensor, LinMap4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shell(eps: f64, a: f64) -> ShellConfig {
        let w = UniformWorldline::new(Event::ORIGIN, Velocity::REST, FourVector::basis(1), a).unwrap();
        ShellConfig::new(w, eps, 1.0).unwrap()
    }

    fn random_shell<R: Rng>(rng: &mut R, eps: f64, a: f64) -> ShellConfig {
        let u = random_velocity(rng, 2.0);
        let n_c = Frame::boosted(&u).spatial(random_direction(rng));
        let origin = Event(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        ShellConfig::new(UniformWorldline::new(origin, u, n_c, a).unwrap(), eps, 1.0).unwrap()
    }

    fn sphere_point(w: &UniformWorldline, theta: f64, phi: f64) -> FourVector {
        let f = Frame::adapted(&w.u(), &w.n()).unwrap();
        f.spatial([theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin()])
    }

    #[test]
    fn tube_param_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let sh = random_shell(&mut rng, 0.2, 0.9);
        let n = sphere_point(sh.center(), 0.4, 1.0);
        assert!((tube_param(&sh, 0.0, &n).unwrap() - (sh.center().origin() + n * 0.2)).max_abs() < 1e-15);
        for s in [-1.0, 0.3, 2.0] {
            let c = sh.constituent(n).unwrap();
            assert_eq!(tube_param(&sh, s, &n).unwrap(), c.position_at(s));
        }
        let tiny = ShellConfig::new(*sh.center(), 1e-12, 1.0).unwrap();
        let p = tube_param(&tiny, 1.5, &n).unwrap();
        assert!((p - sh.center().position(1.5)).max_abs() < 1e-11);
    }

    #[test]
    fn gram_determinant_examples() {
        let inertial = shell(0.3, 0.0);
        let n = sphere_point(inertial.center(), 1.0, 2.0);
        assert!((gram_determinant(&inertial, 0.7, &n).unwrap().abs() - 0.3f64.powi(4)).abs() < 1e-15);

        let accel = shell(0.1, 1.0);
        let nc = accel.center().n();
        let det = gram_determinant(&accel, 0.0, &nc).unwrap();
        assert!((det.abs().sqrt() - 0.011).abs() < 1e-15);
        assert!((measure_density(&accel, &(nc * -1.0)).unwrap() - 0.009).abs() < 1e-15);
        let perp = sphere_point(accel.center(), PI / 2.0, 0.3);
        assert!((measure_density(&accel, &perp).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn gram_determinant_matches_finite_difference_parametrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let (eps, a) = (rng.gen_range(0.05..0.5), rng.gen_range(0.0..1.5));
            let sh = random_shell(&mut rng, eps, a);
            let (s, theta, phi) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.3..2.8), rng.gen_range(0.0..6.0));
            let p = |s: f64, t: f64, f: f64| tube_param(&sh, s, &sphere_point(sh.center(), t, f)).unwrap();
            let h = 1e-4;
            let col = |dp: FourVector| dp * (0.5 / h);
            let cols = [
                col(p(s + h, theta, phi) - p(s - h, theta, phi)),
                col(p(s, theta + h, phi) - p(s, theta - h, phi)),
                col(p(s, theta, phi + h) - p(s, theta, phi - h)),
            ];
            let fd = gram_det3(&cols).abs().sqrt() / theta.sin();
            let n = sphere_point(sh.center(), theta, phi);
            let exact = gram_determinant(&sh, s, &n).unwrap().abs().sqrt();
            assert!(((fd - exact) / exact).abs() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn measure_density_is_root_gram_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..200 {
            let (eps, a) = (rng.gen_range(0.01..0.5), rng.gen_range(0.0..1.9));
            let sh = random_shell(&mut rng, eps, a);
            let n = sphere_point(sh.center(), rng.gen_range(0.0..PI), rng.gen_range(0.0..6.3));
            let s = rng.gen_range(-3.0..3.0);
            let root = gram_determinant(&sh, s, &n).unwrap().abs().sqrt();
            let dens = measure_density(&sh, &n).unwrap();
            assert!((root / dens - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn velocity_field_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let sh = random_shell(&mut rng, 0.3, 1.1);
        let n = sphere_point(sh.center(), 0.8, 0.1);
        let zero = ShellConfig::new(*sh.center(), 1e-300, 1.0).unwrap();
        assert!((velocity_field(&zero, 0.4, &n).unwrap() - sh.center().velocity(0.4)).max_abs() < 1e-15);
        for _ in 0..100 {
            let n = sphere_point(sh.center(), rng.gen_range(0.0..PI), rng.gen_range(0.0..6.3));
            let s = rng.gen_range(-3.0..3.0);
            let v = velocity_field(&sh, s, &n).unwrap();
            assert!((v.square() + 1.0).abs() < 1e-12 * v.max_abs().powi(2));
        }
        let inertial = random_shell(&mut rng, 0.3, 0.0);
        let n = sphere_point(inertial.center(), 0.8, 0.1);
        let v = velocity_field(&inertial, 1.0, &n).unwrap();
        assert_eq!(v, inertial.center().velocity(1.0));
    }

    #[test]
    fn sphere_quadrature_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let sh = random_shell(&mut rng, 0.1, 1.0);
        let w = sh.center();
        let q = SphereQuadrature::for_worldline(w, 4, 8).unwrap();
        let total: f64 = q.weights.iter().sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        for n in &q.nodes {
            assert!(w.u().vector().dot(n).abs() < 1e-12);
            assert!((n.square() - 1.0).abs() < 1e-12);
        }
        let first = q.integrate(|n| *n);
        assert!(first.max_abs() < 1e-12);
        let second = q.integrate(|n| tensor(n, n));
        let u = w.u().vector();
        let expected = (LinMap4::identity() + tensor(&u, &u)) * (4.0 * PI / 3.0);
        assert!((second - expected).max_abs() < 1e-12);
        let (a, b) = (random_vector(&mut rng), random_vector(&mut rng));
        let third = q.integrate(|n| *n * (a.dot(n) * b.dot(n)));
        assert!(third.max_abs() < 1e-12);
    }

    #[test]
    fn sphere_quadrature_exactness_degree() {
        // ∫ (n_c·n)^{2k} dn = 4π / (2k + 1), exact while 2k ≤ 2 N_θ - 1
        let w = UniformWorldline::new(Event::ORIGIN, Velocity::REST, FourVector::basis(1), 0.0).unwrap();
        let q = SphereQuadrature::for_worldline(&w, 6, 12).unwrap();
        for k in 0..6 {
            let got = q.integrate(|n| w.n().dot(n).powi(2 * k));
            assert!((got - 4.0 * PI / (2 * k + 1) as f64).abs() < 1e-12);
        }
        // (y·n)^10 needs degree 10 in cos θ and in φ
        let y = FourVector::basis(2);
        let got = q.integrate(|n| y.dot(n).powi(10));
        assert!((got - 4.0 * PI / 11.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_quadrature_rejects_small_orders() {
        let u = Velocity::REST;
        let n = FourVector::basis(1);
        assert!(SphereQuadrature::new(&u, &n, 1, 8).is_err());
        assert!(SphereQuadrature::new(&u, &n, 4, 3).is_err());
    }

    #[test]
    fn tube_integral_of_one_is_area_times_time() {
        for a in [0.0, 1.0] {
            let sh = shell(0.2, a);
            let q = SphereQuadrature::for_worldline(sh.center(), 4, 8).unwrap();
            let area = tube_integral(&sh, |_| 1.0, (-1.0, 2.0), SRule::default(), &q).unwrap();
            assert!((area - 4.0 * PI * 0.04 * 3.0).abs() < 1e-12);
            let first = tube_integral(&sh, |p| sh.center().n().dot(&p.n), (-1.0, 2.0), SRule::default(), &q).unwrap();
            // the (n_c·n) weight pairs with the measure's own (n_c·n) term
            let expected = 0.04 * 3.0 * 0.2 * a * 4.0 * PI / 3.0;
            assert!((first - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn tube_integral_reports_non_finite_values() {
        let sh = shell(0.2, 0.5);
        let q = SphereQuadrature::for_worldline(sh.center(), 2, 4).unwrap();
        let r = tube_integral(&sh, |_| f64::NAN, (0.0, 1.0), SRule::default(), &q);
        assert_eq!(r, Err(Error::NonFinite));
    }

    #[test]
    fn tube_integral_is_invariant_under_rotations_about_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let sh = shell(0.3, 0.8);
        let q = SphereQuadrature::for_worldline(sh.center(), 8, 16).unwrap();
        let target = Event::new(0.3, 1.5, -0.7, 0.4);
        let f = |p: &TubePoint| {
            let d = target - p.position;
            (-0.5 * (d.square() + 2.0 * d[0] * d[0])).exp() * (1.0 - p.velocity.dot(&FourVector::basis(2)))
        };
        let base = tube_integral(&sh, f, (-1.5, 1.5), SRule { panels: 6, order: 10 }, &q).unwrap();
        for _ in 0..3 {
            let rot = random_rotation(&mut rng);
            // a rotated sphere grid, still about u_c = e₀
            let rotated = SphereQuadrature {
                nodes: q.nodes.iter().map(|n| rot.apply(n)).collect(),
                ..q.clone()
            };
            let v = tube_integral(&sh, f, (-1.5, 1.5), SRule { panels: 6, order: 10 }, &rotated).unwrap();
            assert!((v - base).abs() < 1e-10 * base.abs().max(1.0), "{v} vs {base}");
        }
    }

    #[test]
    fn exterior_clearance_in_rest_slice() {
        let inertial = shell(0.2, 0.0);
        let x = Event::new(5.0, 0.0, 3.0, 4.0);
        assert!((inertial.exterior_clearance(&x) - 4.8).abs() < 1e-14);
        let accel = shell(0.2, 1.0);
        // at s = 0 the slice is t = 0
        assert!((accel.exterior_clearance(&Event::new(0.0, 0.0, 0.5, 0.0)) - 0.3).abs() < 1e-14);
        assert!((accel.exterior_clearance(&Event::new(0.0, -0.5, 0.0, 0.0)) - 0.3).abs() < 1e-14);
        // boosted slice: the centre at s = 1 plus 0.1 along the rest-space normal n_c-direction
        let w = accel.center();
        let along = w.center_boost(1.0).apply(&w.n());
        let p = w.position(1.0) + along * 0.1;
        assert!((accel.exterior_clearance(&p) + 0.1).abs() < 1e-12);
        assert_eq!(accel.exterior_clearance(&Event::new(0.0, -2.0, 0.0, 0.0)), f64::INFINITY);
    }
}
