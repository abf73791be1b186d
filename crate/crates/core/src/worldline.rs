//! Inertial and uniformly accelerated worldlines, the centre boost `L(s)`, and
//! the constituent worldlines of a rigidly accelerated spherical shell.

use crate::error::{Error, Result};
use crate::spacetime::{boost, check_unit_spacelike, tensor, Event, FourVector, LinMap4, Velocity};

/// Below this `|a s|` the hyperbolic quotients are evaluated by their series.
const SERIES_CUTOFF: f64 = 1e-4;

/// Largest `|a s|` the solvers are allowed to visit; `e^{300}` keeps products finite.
const MAX_RAPIDITY: f64 = 300.0;

/// Geometry of `x - r(s)` at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Separation {
    /// `k = x - r(s)`.
    pub k: FourVector,
    /// `k·k`.
    pub interval: f64,
    /// `-k·ṙ(s)`, with `ṙ` the derivative with respect to the worldline parameter.
    pub rho: f64,
}

impl Separation {
    pub fn from_vectors(k: FourVector, rdot: FourVector) -> Self {
        Separation { k, interval: k.square(), rho: -k.dot(&rdot) }
    }

    /// `r(s)` lies in the chronological past of `x`.
    pub fn is_past(&self) -> bool {
        self.interval < 0.0 && self.rho > 0.0
    }
}

/// A timelike worldline with a (not necessarily proper-time) parameter.
pub trait Worldline {
    fn position(&self, s: f64) -> Event;

    /// Derivative of [`Worldline::position`] with respect to the parameter.
    fn velocity(&self, s: f64) -> FourVector;

    /// Parameter window inside which the worldline may be evaluated safely.
    fn admissible_range(&self) -> (f64, f64) {
        (-1e300, 1e300)
    }

    fn separation(&self, x: &Event, s: f64) -> Separation {
        Separation::from_vectors(*x - self.position(s), self.velocity(s))
    }

    /// Inertial-motion estimate of the retarded parameter, from the tangent line at `s = 0`.
    fn retarded_guess(&self, x: &Event) -> f64 {
        let v = self.velocity(0.0);
        let speed = (-v.square()).sqrt();
        let u = v * (1.0 / speed);
        let d = *x - self.position(0.0);
        let tau = -d.dot(&u);
        let dist = (d.square() + tau * tau).max(0.0).sqrt();
        (tau - dist) / speed
    }
}

/// `sinh(a s)/a`, exact at `a = 0`.
pub(crate) fn sinh_over(a: f64, s: f64) -> f64 {
    let x = a * s;
    if x.abs() < SERIES_CUTOFF {
        let x2 = x * x;
        s * (1.0 + x2 / 6.0 * (1.0 + x2 / 20.0))
    } else {
        x.sinh() / a
    }
}

/// `(cosh(a s) - 1)/a`, exact at `a = 0`.
pub(crate) fn cosh_m1_over(a: f64, s: f64) -> f64 {
    let x = a * s;
    if x.abs() < SERIES_CUTOFF {
        let x2 = x * x;
        0.5 * x * s * (1.0 + x2 / 12.0 * (1.0 + x2 / 30.0))
    } else {
        // 2 sinh²(x/2) avoids the cancellation in cosh(x) - 1
        2.0 * (0.5 * x).sinh().powi(2) / a
    }
}

/// `(e^{a s} - 1)/a`, exact at `a = 0`.
fn expm1_over(a: f64, s: f64) -> f64 {
    let x = a * s;
    if x.abs() < SERIES_CUTOFF {
        s * (1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0)))
    } else {
        x.exp_m1() / a
    }
}

/// `r(s) = x_c + u_c sinh(a s)/a + n_c (cosh(a s) - 1)/a`, parametrized by proper time.
///
/// `a = 0` is inertial motion `x_c + u_c s`; `n_c` is then irrelevant but still validated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformWorldline {
    origin: Event,
    u: Velocity,
    n: FourVector,
    a: f64,
}

impl UniformWorldline {
    pub fn new(origin: Event, u: Velocity, n: FourVector, acceleration: f64) -> Result<Self> {
        if !(acceleration >= 0.0 && acceleration.is_finite()) {
            return Err(Error::InvalidAcceleration(acceleration));
        }
        if !origin.is_finite() {
            return Err(Error::NonFinite);
        }
        check_unit_spacelike(&u, &n)?;
        Ok(UniformWorldline { origin, u, n, a: acceleration })
    }

    /// Inertial worldline through `origin` with velocity `u`.
    pub fn inertial(origin: Event, u: Velocity) -> Self {
        let n = boost(&Velocity::REST, &u).apply(&FourVector::basis(1));
        UniformWorldline { origin, u, n, a: 0.0 }
    }

    pub fn origin(&self) -> Event {
        self.origin
    }

    pub fn u(&self) -> Velocity {
        self.u
    }

    pub fn n(&self) -> FourVector {
        self.n
    }

    pub fn acceleration_magnitude(&self) -> f64 {
        self.a
    }

    pub fn is_inertial(&self) -> bool {
        self.a == 0.0
    }

    pub fn position(&self, s: f64) -> Event {
        self.origin + self.u.vector() * sinh_over(self.a, s) + self.n * cosh_m1_over(self.a, s)
    }

    /// `ṙ(s) = u_c cosh(a s) + n_c sinh(a s)`.
    pub fn velocity(&self, s: f64) -> FourVector {
        let x = self.a * s;
        self.u.vector() * x.cosh() + self.n * x.sinh()
    }

    /// `r̈(s) = a (u_c sinh(a s) + n_c cosh(a s))`.
    pub fn acceleration(&self, s: f64) -> FourVector {
        let x = self.a * s;
        (self.u.vector() * x.sinh() + self.n * x.cosh()) * self.a
    }

    /// `L(s)`, the rotation-free boost from `u_c` to `ṙ(s)`.
    pub fn center_boost(&self, s: f64) -> LinMap4 {
        boost(&self.u, &Velocity::new_unchecked(self.velocity(s)))
    }

    /// `dL/ds`, differentiated from the closed form of the boost with
    /// `1 - ṙ·u_c = 1 + cosh(a s)`.
    pub fn center_boost_dot(&self, s: f64) -> LinMap4 {
        if self.a == 0.0 {
            return LinMap4::ZERO;
        }
        let u = self.u.vector();
        let x = self.a * s;
        let sum = self.velocity(s) + u;
        let acc = self.acceleration(s);
        let denom = 1.0 + x.cosh();
        let ddenom = self.a * x.sinh();
        (tensor(&acc, &sum) + tensor(&sum, &acc)) * (1.0 / denom)
            - tensor(&sum, &sum) * (ddenom / (denom * denom))
            - tensor(&acc, &u) * 2.0
    }

    pub(crate) fn stable_separation(&self, x: &Event, s: f64) -> Separation {
        let d = *x - self.origin;
        let u = self.u.vector();
        let big_t = -d.dot(&u);
        let big_x = d.dot(&self.n);
        let perp = d + u * (u.dot(&d)) - self.n * big_x;
        let perp2 = perp.square();
        let (sh, cm1) = (sinh_over(self.a, s), cosh_m1_over(self.a, s));
        let k = d - u * sh - self.n * cm1;
        // light-cone combinations of -k·u_c and k·n_c, each free of cancellation
        let plus = big_x + big_t - expm1_over(self.a, s);
        let minus = big_x - big_t - expm1_over(self.a, -s);
        let interval = plus * minus + perp2;
        let x = self.a * s;
        let rho = 0.5 * ((-x).exp() * plus - x.exp() * minus);
        Separation { k, interval, rho }
    }
}

impl Worldline for UniformWorldline {
    fn position(&self, s: f64) -> Event {
        UniformWorldline::position(self, s)
    }

    fn velocity(&self, s: f64) -> FourVector {
        UniformWorldline::velocity(self, s)
    }

    fn admissible_range(&self) -> (f64, f64) {
        if self.a == 0.0 {
            (-1e300, 1e300)
        } else {
            let bound = (1e3 / self.a.max(1.0)).min(MAX_RAPIDITY / self.a);
            (-bound, bound)
        }
    }

    fn separation(&self, x: &Event, s: f64) -> Separation {
        self.stable_separation(x, s)
    }

    /// Exact root of the light-cone condition, which is a quadratic in `e^{a s}`
    /// for hyperbolic motion; the solver still refines and certifies it.
    fn retarded_guess(&self, x: &Event) -> f64 {
        let d = *x - self.origin;
        let u = self.u.vector();
        let tau = -d.dot(&u);
        let dist = (d.square() + tau * tau).max(0.0).sqrt();
        let (lo, hi) = self.admissible_range();
        let inertial = (tau - dist).clamp(0.5 * lo, 0.5 * hi);
        if self.a == 0.0 {
            return inertial;
        }
        let a = self.a;
        let along = d.dot(&self.n);
        let perp2 = (dist * dist - along * along).max(0.0);
        // light-cone coordinates about the centre of the hyperbola
        let plus = along + tau + 1.0 / a;
        let minus = along - tau + 1.0 / a;
        if plus <= 0.0 {
            return inertial;
        }
        let b = plus * minus + 1.0 / (a * a) + perp2;
        let disc = (b * b - 4.0 * plus * minus / (a * a)).max(0.0);
        let w = 2.0 * plus / (a * (b + disc.sqrt()));
        let guess = w.ln() / a;
        if guess.is_finite() {
            guess.clamp(0.5 * lo, 0.5 * hi)
        } else {
            inertial
        }
    }
}

/// One constituent point of the shell: the worldline through `x_c + ε n` that
/// moves rigidly with the centre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellConstituent {
    parent: UniformWorldline,
    radius: f64,
    n: FourVector,
    /// `1 + ε a (n_c·n)`.
    stretch: f64,
    own: UniformWorldline,
}

impl ShellConstituent {
    /// Requires `n ∈ S_c(1)` and `ε a < 1`.
    pub fn new(parent: UniformWorldline, radius: f64, n: FourVector) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        check_unit_spacelike(&parent.u, &n)?;
        let eps_a = radius * parent.a;
        let stretch = 1.0 + eps_a * parent.n.dot(&n);
        if eps_a >= 1.0 || stretch <= 0.0 {
            return Err(Error::WedgeViolation { eps_a, factor: stretch });
        }
        let own = UniformWorldline {
            origin: parent.origin + n * radius,
            u: parent.u,
            n: parent.n,
            a: parent.a / stretch,
        };
        Ok(ShellConstituent { parent, radius, n, stretch, own })
    }

    pub fn direction(&self) -> FourVector {
        self.n
    }

    /// `1 + ε a_c (n_c·n)`: ratio of constituent to centre proper time.
    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    /// `a_{ε,n} = a_c / (1 + ε a_c (n_c·n))`.
    pub fn acceleration_magnitude(&self) -> f64 {
        self.own.a
    }

    /// Constituent proper time at centre time `s`.
    pub fn proper_time(&self, s: f64) -> f64 {
        self.stretch * s
    }

    /// The constituent as a worldline in its own proper time.
    pub fn proper_worldline(&self) -> UniformWorldline {
        self.own
    }

    /// `r_c(s) + ε L(s)·n`.
    pub fn position_at(&self, s: f64) -> Event {
        self.parent.position(s) + self.parent.center_boost(s).apply(&self.n) * self.radius
    }

    /// `z(s, n) = ṙ_c(s) + ε L̇(s)·n`.
    pub fn z(&self, s: f64) -> FourVector {
        self.parent.velocity(s) + self.parent.center_boost_dot(s).apply(&self.n) * self.radius
    }
}

/// The constituent parametrized by centre proper time; the parameter
/// derivative is `z = (1 + ε a n_c·n) ṙ_{ε,n}`.
impl Worldline for ShellConstituent {
    fn position(&self, s: f64) -> Event {
        self.own.position(self.stretch * s)
    }

    fn velocity(&self, s: f64) -> FourVector {
        self.own.velocity(self.stretch * s) * self.stretch
    }

    fn admissible_range(&self) -> (f64, f64) {
        let (lo, hi) = self.own.admissible_range();
        (lo / self.stretch, hi / self.stretch)
    }

    fn separation(&self, x: &Event, s: f64) -> Separation {
        let sep = self.own.stable_separation(x, self.stretch * s);
        Separation { rho: sep.rho * self.stretch, ..sep }
    }

    fn retarded_guess(&self, x: &Event) -> f64 {
        self.own.retarded_guess(x) / self.stretch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::sampling::*;
    use crate::spacetime::Frame;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn standard(a: f64) -> UniformWorldline {
        UniformWorldline::new(Event::ORIGIN, Velocity::REST, FourVector::basis(1), a).unwrap()
    }

    fn random_worldline<R: Rng>(rng: &mut R, a: f64) -> UniformWorldline {
        let u = random_velocity(rng, 2.0);
        let frame = Frame::boosted(&u);
        let d = random_direction(rng);
        let origin = Event(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        UniformWorldline::new(origin, u, frame.spatial(d), a).unwrap()
    }

    fn random_sphere_point<R: Rng>(rng: &mut R, w: &UniformWorldline) -> FourVector {
        let frame = Frame::adapted(&w.u(), &w.n()).unwrap();
        frame.spatial(random_direction(rng))
    }

    #[test]
    fn position_examples() {
        let w = standard(1.0);
        assert_eq!(w.position(0.0), Event::ORIGIN);
        let p = w.position(1.0);
        let expected = [1f64.sinh(), 1f64.cosh() - 1.0, 0.0, 0.0];
        for i in 0..4 {
            assert!((p[i] - expected[i]).abs() < 1e-15);
        }
        let inertial = standard(0.0);
        assert_eq!(inertial.position(2.0), Event::new(2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn velocity_and_acceleration_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for a in [0.0, 0.3, 1.0, 2.5] {
            let w = random_worldline(&mut rng, a);
            assert!((w.velocity(0.0) - w.u().vector()).max_abs() < 1e-15);
            assert!((w.acceleration(0.0) - w.n() * a).max_abs() < 1e-15);
            for _ in 0..50 {
                let s = rng.gen_range(-3.0..3.0);
                let (v, acc) = (w.velocity(s), w.acceleration(s));
                let scale = v.max_abs().powi(2);
                assert!((v.square() + 1.0).abs() < 1e-12 * scale);
                assert!((acc.square() - a * a).abs() < 1e-12 * scale.max(1.0) * a.max(1.0).powi(2));
                assert!(v.dot(&acc).abs() < 1e-12 * scale * a.max(1.0));
                assert!(v[0] > 0.0);
            }
        }
    }

    #[test]
    fn velocity_is_second_order_finite_difference_of_position() {
        let w = standard(1.3);
        let s = 0.7;
        let err = |h: f64| {
            let fd = (w.position(s + h) - w.position(s - h)) * (0.5 / h);
            (fd - w.velocity(s)).max_abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.05, "observed order {order}");
    }

    #[test]
    fn small_acceleration_is_continuous_with_inertial_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = random_worldline(&mut rng, 0.0);
        let tiny = UniformWorldline::new(base.origin(), base.u(), base.n(), 1e-8).unwrap();
        for s in [-3.0, -0.5, 0.1, 2.0, 7.0] {
            let (p0, p1) = (base.position(s) - Event::ORIGIN, tiny.position(s) - Event::ORIGIN);
            assert!((p0 - p1).max_abs() <= 1e-7 * p0.max_abs().max(1.0));
            let (v0, v1) = (base.velocity(s), tiny.velocity(s));
            assert!((v0 - v1).max_abs() <= 1e-7 * v0.max_abs());
        }
    }

    /// `L(s)·n` and `L̇(s)·n` for `n ∈ S_c(1)` as printed closed forms.
    fn boost_action(w: &UniformWorldline, s: f64, n: &FourVector) -> (FourVector, FourVector) {
        let (u, nc, a) = (w.u().vector(), w.n(), w.acceleration_magnitude());
        let x = a * s;
        let c = nc.dot(n);
        let ln = *n + (u * x.sinh() + nc * (x.cosh() - 1.0)) * c;
        let lndot = (u * x.cosh() + nc * x.sinh()) * (c * a);
        (ln, lndot)
    }

    #[test]
    fn center_boost_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = random_worldline(&mut rng, 0.8);
        assert!((w.center_boost(0.0) - LinMap4::identity()).max_abs() < 1e-14);
        for _ in 0..50 {
            let s = rng.gen_range(-3.0..3.0);
            let n = random_sphere_point(&mut rng, &w);
            let (ln, lndot) = boost_action(&w, s, &n);
            let scale = w.velocity(s).max_abs().powi(2);
            assert!((w.center_boost(s).apply(&n) - ln).max_abs() < 1e-12 * scale);
            assert!((w.center_boost_dot(s).apply(&n) - lndot).max_abs() < 1e-12 * scale);
            assert!((w.center_boost(s).apply(&w.u().vector()) - w.velocity(s)).max_abs() < 1e-12 * scale);
        }
        let n = random_sphere_point(&mut rng, &w);
        let at_zero = w.center_boost_dot(0.0).apply(&n);
        let expected = w.u().vector() * (w.n().dot(&n) * 0.8);
        assert!((at_zero - expected).max_abs() < 1e-14);
    }

    #[test]
    fn center_boost_derivative_identity() {
        let w = standard(1.0);
        let (u, n) = (w.u().vector(), w.n());
        let expected = (tensor(&u, &n) - tensor(&n, &u)) * 1.0;
        for s in [-2.0, -0.3, 0.0, 1.1, 2.9] {
            let got = w.center_boost_dot(s).compose(&w.center_boost(s).adjoint());
            assert!((got - expected).max_abs() < 1e-12 * w.velocity(s).max_abs().powi(2));
        }
    }

    #[test]
    fn center_boost_dot_matches_fourth_order_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = random_worldline(&mut rng, 1.0);
        let h = 1e-3;
        for s in [-3.0, -1.0, 0.0, 0.5, 3.0] {
            let l = |t: f64| w.center_boost(t);
            let fd = (l(s - 2.0 * h) - l(s + 2.0 * h) + (l(s + h) - l(s - h)) * 8.0) * (1.0 / (12.0 * h));
            let diff = (fd - w.center_boost_dot(s)).max_abs();
            assert!(diff < 1e-8, "s = {s}: {diff}");
        }
    }

    #[test]
    fn constituent_matches_its_own_hyperbola() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for a in [0.0, 0.5, 2.0] {
            let w = random_worldline(&mut rng, a);
            for _ in 0..20 {
                let n = random_sphere_point(&mut rng, &w);
                let eps = rng.gen_range(0.01..0.4);
                let c = ShellConstituent::new(w, eps, n).unwrap();
                let stretch = 1.0 + eps * a * w.n().dot(&n);
                assert!((c.acceleration_magnitude() - a / stretch).abs() < 1e-15);
                let own = UniformWorldline::new(w.origin() + n * eps, w.u(), w.n(), a / stretch).unwrap();
                for k in -8..=8 {
                    let s = 0.35 * k as f64;
                    let scale = w.velocity(s).max_abs();
                    let direct = c.position_at(s);
                    let hyper = own.position(stretch * s);
                    assert!((direct - hyper).max_abs() < 1e-12 * scale.max(1.0) * (1.0 + s.abs()));
                    let via_trait = Worldline::position(&c, s);
                    assert!((direct - via_trait).max_abs() < 1e-12 * scale.max(1.0) * (1.0 + s.abs()));
                    assert!((c.z(s) - Worldline::velocity(&c, s)).max_abs() < 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn constituent_special_cases() {
        let w = standard(1.0);
        let n = FourVector::basis(2);
        let c = ShellConstituent::new(w, 0.2, n).unwrap();
        assert_eq!(c.acceleration_magnitude(), 1.0);

        let inertial = standard(0.0);
        let c = ShellConstituent::new(inertial, 0.3, n).unwrap();
        let p = c.position_at(1.5);
        assert_eq!(p, inertial.position(1.5) + n * 0.3);

        assert!(matches!(
            ShellConstituent::new(w, 1.0, FourVector::basis(1) * -1.0),
            Err(Error::WedgeViolation { .. })
        ));
        assert!(matches!(ShellConstituent::new(standard(2.0), 0.6, n), Err(Error::WedgeViolation { .. })));
    }

    #[test]
    fn z_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let w = random_worldline(&mut rng, 1.2);
        let c0 = ShellConstituent::new(w, 0.0, random_sphere_point(&mut rng, &w)).unwrap();
        assert_eq!(c0.z(0.7), w.velocity(0.7));
        for _ in 0..100 {
            let n = random_sphere_point(&mut rng, &w);
            let eps = rng.gen_range(0.0..0.8);
            let c = ShellConstituent::new(w, eps, n).unwrap();
            let s = rng.gen_range(-3.0..3.0);
            let z = c.z(s);
            let l = w.center_boost(s);
            let stretch = c.stretch();
            let scale = w.velocity(s).max_abs().powi(2);
            assert!((z.square() + stretch * stretch).abs() < 1e-12 * scale);
            assert!(z.dot(&l.apply(&n)).abs() < 1e-12 * scale);
            assert!((z.dot(&l.apply(&w.u().vector())) + stretch).abs() < 1e-12 * scale);
            let own_velocity = c.proper_worldline().velocity(c.proper_time(s));
            assert!((z - own_velocity * stretch).max_abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn stable_separation_agrees_with_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for a in [0.0, 0.7, 1.0] {
            let w = random_worldline(&mut rng, a);
            for _ in 0..100 {
                let x = Event(std::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
                let s = rng.gen_range(-2.0..2.0);
                let direct = Separation::from_vectors(x - w.position(s), w.velocity(s));
                let stable = w.stable_separation(&x, s);
                let scale = direct.k.max_abs().powi(2) * w.velocity(s).max_abs();
                assert!((direct.interval - stable.interval).abs() < 1e-11 * scale.max(1.0));
                assert!((direct.rho - stable.rho).abs() < 1e-11 * scale.max(1.0));
            }
        }
    }
}
