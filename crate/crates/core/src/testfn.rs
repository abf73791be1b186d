//! Smooth compactly supported test functions on spacetime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::spacetime::{Event, FourVector, Frame, LinMap4, METRIC};
use crate::tube::{ShellConfig, SphereQuadrature};
use crate::worldline::Worldline;

/// Required clearance between the support ball and the world tube, as a fraction of `R`.
pub const SUPPORT_MARGIN: f64 = 0.1;

/// `Φ(x) = A exp(1/(ρ² - 1))` for `ρ = |x - x₀|_E / R < 1`, zero outside.
///
/// `|·|_E` is the Euclidean norm of the coordinates in `frame`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFunction {
    pub center: Event,
    pub radius: f64,
    pub amplitude: f64,
    pub frame: Frame,
}

impl BumpTestFunction {
    pub fn new(center: Event, radius: f64, amplitude: f64, frame: Frame) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSupport(radius));
        }
        if !center.is_finite() || !amplitude.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(BumpTestFunction { center, radius, amplitude, frame })
    }

    /// Frame coordinates of `x - x₀`.
    pub fn local(&self, x: &Event) -> [f64; 4] {
        self.frame.coordinates(&(*x - self.center))
    }

    /// Inverse of [`BumpTestFunction::local`].
    pub fn point(&self, c: [f64; 4]) -> Event {
        self.center + self.frame.vector(c)
    }

    fn rho2(&self, c: &[f64; 4]) -> f64 {
        c.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius)
    }

    pub fn value(&self, x: &Event) -> f64 {
        self.value_local(&self.local(x))
    }

    pub fn value_local(&self, c: &[f64; 4]) -> f64 {
        let r2 = self.rho2(c);
        if r2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 / (r2 - 1.0)).exp()
        }
    }

    /// `(Φ, dΦ/dρ², d²Φ/d(ρ²)²)` at frame coordinates `c`, or `None` outside the support.
    pub fn radial_derivatives(&self, c: &[f64; 4]) -> Option<(f64, f64, f64)> {
        let r2 = self.rho2(c);
        if r2 >= 1.0 {
            return None;
        }
        let q = 1.0 / (r2 - 1.0);
        let e = self.amplitude * q.exp();
        Some((e, -e * q * q, e * (q.powi(4) + 2.0 * q.powi(3))))
    }

    /// The vector `DΦ[x]` with `ξ·DΦ[x]` the derivative of `Φ` along `ξ`.
    pub fn gradient(&self, x: &Event) -> FourVector {
        let c = self.local(x);
        let r2 = self.rho2(&c);
        if r2 >= 1.0 {
            return FourVector::ZERO;
        }
        let q = 1.0 / (r2 - 1.0);
        let f1 = -self.amplitude * q.exp() * q * q;
        let r2inv = 1.0 / (self.radius * self.radius);
        let partial: [f64; 4] = std::array::from_fn(|mu| f1 * 2.0 * c[mu] * r2inv);
        self.raise(partial)
    }

    /// The map `H` with `ξ·H·η = D²Φ[x](ξ, η)`, the full second derivative.
    pub fn hessian(&self, x: &Event) -> LinMap4 {
        let c = self.local(x);
        let r2 = self.rho2(&c);
        if r2 >= 1.0 {
            return LinMap4::ZERO;
        }
        let q = 1.0 / (r2 - 1.0);
        let e = self.amplitude * q.exp();
        let f1 = -e * q * q;
        let f2 = e * (q.powi(4) + 2.0 * q.powi(3));
        let r2inv = 1.0 / (self.radius * self.radius);
        // second partials in frame coordinates
        let h: [[f64; 4]; 4] = std::array::from_fn(|mu| {
            std::array::from_fn(|nu| {
                let diag = if mu == nu { 2.0 * f1 * r2inv } else { 0.0 };
                f2 * 4.0 * c[mu] * c[nu] * r2inv * r2inv + diag
            })
        });
        // H = Σ_{μν} h_{μν} (s_μ e_μ) ⊗ (s_ν e_ν) with the index raised on the left slot only
        let mut m = LinMap4::ZERO;
        for mu in 0..4 {
            let left = self.frame.axis(mu) * METRIC[mu];
            for nu in 0..4 {
                let right = self.frame.axis(nu) * METRIC[nu];
                m = m + crate::spacetime::tensor(&left, &right) * h[mu][nu];
            }
        }
        m
    }

    /// Converts frame partial derivatives `∂_μ Φ` into the vector `Σ s_μ ∂_μΦ e_μ`.
    fn raise(&self, partial: [f64; 4]) -> FourVector {
        (0..4).fold(FourVector::ZERO, |acc, mu| acc + self.frame.axis(mu) * (METRIC[mu] * partial[mu]))
    }

    /// `∫ Φ d⁴x = A R⁴ · 2π² ∫₀¹ r³ e^{1/(r²-1)} dr`.
    pub fn integral(&self) -> f64 {
        let gl = GaussLegendre::new(64).expect("static order");
        let radial: f64 = gl
            .composite(0.0, 1.0, 8)
            .iter()
            .map(|&(r, w)| if r < 1.0 { w * r.powi(3) * (1.0 / (r * r - 1.0)).exp() } else { 0.0 })
            .sum();
        self.amplitude * self.radius.powi(4) * 2.0 * std::f64::consts::PI.powi(2) * radial
    }

    /// Sampled Euclidean clearance between the support ball and the world tube:
    /// the smallest frame distance from `x₀` to a tube point, minus `R`.
    ///
    /// Tube points are sampled on a sphere grid of the given orders; for each
    /// constituent the `s`-interval whose frame time is within reach of the ball
    /// is scanned and the closest sample refined by golden-section search.
    pub fn tube_clearance(&self, shell: &ShellConfig, polar: usize, azimuthal: usize) -> Result<f64> {
        let quad = SphereQuadrature::for_worldline(shell.center(), polar, azimuthal)?;
        let reach = self.radius * (1.0 + SUPPORT_MARGIN) + 1e-9;
        let mut best = f64::INFINITY;
        for n in &quad.nodes {
            let c = shell.constituent(*n)?;
            let time = |s: f64| self.local(&Worldline::position(&c, s))[0];
            let dist = |s: f64| {
                let l = self.local(&Worldline::position(&c, s));
                l.iter().map(|v| v * v).sum::<f64>().sqrt()
            };
            let (lo_bound, hi_bound) = c.admissible_range();
            // frame time of a timelike worldline increases with s
            let Some(lo) = crossing(&time, -reach, lo_bound, hi_bound) else { continue };
            let Some(hi) = crossing(&time, reach, lo_bound, hi_bound) else { continue };
            if hi <= lo {
                continue;
            }
            let samples = 64;
            let step = (hi - lo) / samples as f64;
            let (mut arg, mut val) = (lo, dist(lo));
            for i in 1..=samples {
                let s = lo + step * i as f64;
                let d = dist(s);
                if d < val {
                    arg = s;
                    val = d;
                }
            }
            let refined = golden_min(&dist, (arg - step).max(lo), (arg + step).min(hi));
            best = best.min(val.min(refined));
        }
        Ok(best - self.radius)
    }

    /// Fails with [`Error::SupportOverlap`] unless the support clears the tube
    /// by at least `SUPPORT_MARGIN · R`.
    pub fn check_exterior(&self, shell: &ShellConfig) -> Result<f64> {
        let clearance = self.tube_clearance(shell, 16, 32)?;
        let required = SUPPORT_MARGIN * self.radius;
        if clearance < required {
            return Err(Error::SupportOverlap { clearance, required });
        }
        Ok(clearance)
    }
}

/// Smallest `s` in `[lo, hi]` with `f(s) ≥ target` for increasing `f`, by bisection.
fn crossing(f: &impl Fn(f64) -> f64, target: f64, lo: f64, hi: f64) -> Option<f64> {
    // expand from 0 to keep the search inside a well-conditioned window
    let (mut a, mut b) = (0.0_f64.clamp(lo, hi), 0.0_f64.clamp(lo, hi));
    let mut step = 1.0;
    while f(a) > target {
        if a <= lo {
            return Some(lo);
        }
        b = a;
        a = (a - step).max(lo);
        step *= 2.0;
    }
    while f(b) < target {
        if b >= hi {
            return None;
        }
        a = b;
        b = (b + step).min(hi);
        step *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    Some(b)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.min(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::sampling::*;
    use crate::spacetime::Velocity;
    use crate::worldline::UniformWorldline;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bump<R: Rng>(rng: &mut R) -> BumpTestFunction {
        let u = random_velocity(rng, 1.0);
        let center = Event(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        BumpTestFunction::new(center, rng.gen_range(0.5..2.0), rng.gen_range(0.5..3.0), Frame::boosted(&u)).unwrap()
    }

    fn interior_point<R: Rng>(rng: &mut R, phi: &BumpTestFunction) -> Event {
        loop {
            let c: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.85..0.85) * phi.radius);
            if c.iter().map(|v| v * v).sum::<f64>() < (0.85 * phi.radius).powi(2) {
                return phi.point(c);
            }
        }
    }

    #[test]
    fn support_and_smooth_cutoff() {
        let phi = BumpTestFunction::new(Event::ORIGIN, 2.0, 1.5, Frame::rest()).unwrap();
        assert!((phi.value(&Event::ORIGIN) - 1.5 * (-1f64).exp()).abs() < 1e-15);
        assert_eq!(phi.value(&Event::new(2.0, 0.0, 0.0, 0.0)), 0.0);
        assert_eq!(phi.value(&Event::new(0.0, 1.5, 1.5, 0.0)), 0.0);
        assert!(phi.value(&Event::new(0.0, 0.0, 1.999, 0.0)) < 1e-100);
        assert!(BumpTestFunction::new(Event::ORIGIN, 0.0, 1.0, Frame::rest()).is_err());
    }

    #[test]
    fn derivatives_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let mut worst_grad: f64 = 0.0;
        let mut worst_hess: f64 = 0.0;
        for _ in 0..100 {
            let phi = bump(&mut rng);
            let x = interior_point(&mut rng, &phi);
            let h = 2e-3 * phi.radius;
            let grad = phi.gradient(&x);
            let hess = phi.hessian(&x);
            let gscale = grad.max_abs().max(1e-3 * phi.value(&x) / phi.radius);
            let hscale = hess.max_abs().max(1e-3 * phi.value(&x) / phi.radius.powi(2));
            for mu in 0..4 {
                let e = FourVector::basis(mu);
                let g = |p: Event| phi.value(&p);
                // Richardson-extrapolated central differences
                let d1 = |h: f64| (g(x + e * h) - g(x - e * h)) / (2.0 * h);
                let fd = (4.0 * d1(0.5 * h) - d1(h)) / 3.0;
                worst_grad = worst_grad.max((fd - e.dot(&grad)).abs() / gscale);
                for nu in 0..4 {
                    let f = FourVector::basis(nu);
                    let d2 = |h: f64| {
                        (g(x + e * h + f * h) - g(x + e * h - f * h) - g(x - e * h + f * h) + g(x - e * h - f * h))
                            / (4.0 * h * h)
                    };
                    let fd2 = (4.0 * d2(0.5 * h) - d2(h)) / 3.0;
                    worst_hess = worst_hess.max((fd2 - hess.bilinear(&e, &f)).abs() / hscale);
                }
            }
        }
        assert!(worst_grad < 1e-6, "gradient {worst_grad}");
        assert!(worst_hess < 1e-6, "hessian {worst_hess}");
    }

    #[test]
    fn hessian_is_self_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let phi = bump(&mut rng);
        let x = interior_point(&mut rng, &phi);
        let h = phi.hessian(&x);
        assert!((h.adjoint() - h).max_abs() < 1e-12 * h.max_abs());
    }

    #[test]
    fn integral_matches_box_quadrature() {
        let phi = BumpTestFunction::new(Event::ORIGIN, 0.7, 2.0, Frame::rest()).unwrap();
        let gl = GaussLegendre::new(40).unwrap();
        let nodes: Vec<(f64, f64)> = gl.mapped(-0.7, 0.7).collect();
        let mut total = 0.0;
        for &(a, wa) in &nodes {
            for &(b, wb) in &nodes {
                for &(c, wc) in &nodes {
                    for &(d, wd) in &nodes {
                        total += wa * wb * wc * wd * phi.value_local(&[a, b, c, d]);
                    }
                }
            }
        }
        assert!((total / phi.integral() - 1.0).abs() < 1e-6, "{total} vs {}", phi.integral());
    }

    #[test]
    fn tube_clearance_detects_overlap() {
        let w = UniformWorldline::new(Event::ORIGIN, Velocity::REST, FourVector::basis(1), 1.0).unwrap();
        let shell = ShellConfig::new(w, 0.1, 1.0).unwrap();
        let far = BumpTestFunction::new(Event::new(0.0, 0.0, 2.0, 0.0), 1.0, 1.0, Frame::rest()).unwrap();
        let clearance = far.check_exterior(&shell).unwrap();
        // nearest tube point: the constituent at (0, 0, 0.1, 0) at s = 0
        assert!((clearance - 0.9).abs() < 1e-3, "{clearance}");
        let near = BumpTestFunction::new(Event::new(0.0, 0.0, 1.15, 0.0), 1.0, 1.0, Frame::rest()).unwrap();
        assert!(matches!(near.check_exterior(&shell), Err(Error::SupportOverlap { .. })));
        let moving = BumpTestFunction::new(Event::new(1.0, 1f64.cosh() - 1.0, 0.45, 0.0), 0.4, 1.0, Frame::rest()).unwrap();
        assert!(matches!(moving.check_exterior(&shell), Err(Error::SupportOverlap { .. })));
    }
}
