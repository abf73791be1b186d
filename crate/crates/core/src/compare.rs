//! Point and shell potentials, their pairings with bump test functions, the
//! predicted leading-order difference and the equality verdict.
//!
//! Pairings are computed by two independent routes:
//!
//! * 4D quadrature of `A(x) Φ(x)` over the support of `Φ`
//!   ([`pair_potential_with_test`]);
//! * the iterated form `∫ds ∫dλ_L(ξ) Φ(r(s) + ξ) ṙ(s)` with the light-cone
//!   measure `dλ_L = ℓ dℓ dΩ` ([`pair_current_direct`]).
//!
//! They agree because `d⁴x = ρ ds dλ_L` under `x = r(s) + ξ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{pairwise_sum, GaussLegendre};
use crate::retardation::solve_retarded;
use crate::spacetime::{Event, FourVector, Frame};
use crate::testfn::BumpTestFunction;
use crate::tube::{ShellConfig, SphereQuadrature};
use crate::worldline::{UniformWorldline, Worldline};

/// Kernel constant of the retarded potentials: `A = κ q ṙ / ρ`.
pub const KAPPA: f64 = 1.0 / (4.0 * PI);

/// `κ q ṙ(s_ret) / ρ` for any worldline. For a constituent parametrized by
/// centre time the velocity is `z` and `ρ = -k·z`, so the ratio is unchanged.
pub fn lw_point_potential<W: Worldline + ?Sized>(w: &W, q: f64, x: &Event) -> Result<FourVector> {
    Ok(retarded_kernel(w, x)? * (KAPPA * q))
}

fn retarded_kernel<W: Worldline + ?Sized>(w: &W, x: &Event) -> Result<FourVector> {
    let sol = solve_retarded(w, x)?;
    Ok(w.velocity(sol.s_ret) * (1.0 / sol.rho))
}

fn check_outside(shell: &ShellConfig, x: &Event) -> Result<()> {
    let clearance = shell.exterior_clearance(x);
    if clearance > 0.0 {
        Ok(())
    } else {
        Err(Error::InteriorPoint { distance: clearance + shell.radius(), radius: shell.radius() })
    }
}

/// `Σ_i w_i z_i / ρ_i`, without the charge prefactor.
fn shell_kernel(shell: &ShellConfig, x: &Event, quad: &SphereQuadrature) -> Result<FourVector> {
    check_outside(shell, x)?;
    let terms = quad
        .nodes
        .iter()
        .zip(&quad.weights)
        .map(|(n, &w)| Ok(retarded_kernel(&shell.constituent(*n)?, x)? * w))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `κ σ ε² Σ_i w_i z(s_ret,i, n_i) / ρ_i`, one retarded solve per sphere node.
pub fn shell_potential(shell: &ShellConfig, x: &Event, quad: &SphereQuadrature) -> Result<FourVector> {
    let eps = shell.radius();
    Ok(shell_kernel(shell, x, quad)? * (KAPPA * shell.density() * eps * eps))
}

/// Shell potential minus the potential of the central point charge `Q = 4πε²σ`.
pub fn potential_difference(shell: &ShellConfig, x: &Event, quad: &SphereQuadrature) -> Result<FourVector> {
    let eps = shell.radius();
    let sum = shell_kernel(shell, x, quad)?;
    let centre = retarded_kernel(shell.center(), x)?;
    let total: f64 = quad.weights.iter().sum();
    Ok((sum - centre * total) * (KAPPA * shell.density() * eps * eps))
}

/// A vector-valued pairing `(T | Φ)` with a non-negative error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub value: FourVector,
    /// Estimated quadrature error in the Euclidean component norm.
    pub error: f64,
    /// Sum of absolute contributions, a natural scale for relative tolerances.
    pub magnitude: f64,
}

/// 4D integration rule over the support box of `Φ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairingRule {
    /// Tensor Gauss–Legendre with `order` nodes per axis; the error estimate is
    /// the change from `order / 2`.
    Gauss { order: usize },
    /// Uniform samples in the support box; the error estimate is one standard error.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Default for PairingRule {
    fn default() -> Self {
        PairingRule::Gauss { order: 24 }
    }
}

fn abs_sum(v: &FourVector) -> f64 {
    v.0.iter().map(|c| c.abs()).sum()
}

/// `∫ A(x) Φ(x) d⁴x` over the support ball of `Φ`.
///
/// `field` is only evaluated where `Φ ≠ 0`.
pub fn pair_potential_with_test<F>(field: F, phi: &BumpTestFunction, rule: &PairingRule) -> Result<PairingResult>
where
    F: Fn(&Event) -> Result<FourVector> + Sync,
{
    match *rule {
        PairingRule::Gauss { order } => {
            if order < 2 {
                return Err(Error::InvalidQuadratureOrder(format!("4D pairing needs order ≥ 2, got {order}")));
            }
            let (fine, magnitude) = gauss_box(&field, phi, order)?;
            let (coarse, _) = gauss_box(&field, phi, (order / 2).max(1))?;
            Ok(PairingResult { value: fine, error: (fine - coarse).euclidean_norm(), magnitude })
        }
        PairingRule::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidQuadratureOrder(format!("Monte Carlo needs ≥ 2 samples, got {samples}")));
            }
            monte_carlo_box(&field, phi, samples, seed)
        }
    }
}

fn gauss_box<F>(field: &F, phi: &BumpTestFunction, order: usize) -> Result<(FourVector, f64)>
where
    F: Fn(&Event) -> Result<FourVector> + Sync,
{
    let r = phi.radius;
    let nodes: Vec<(f64, f64)> = GaussLegendre::new(order)?.mapped(-r, r).collect();
    let n = nodes.len();
    let terms = (0..n * n * n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j, k, l) = (idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n);
            let c = [nodes[i].0, nodes[j].0, nodes[k].0, nodes[l].0];
            let v = phi.value_local(&c);
            if v == 0.0 {
                return Ok(FourVector::ZERO);
            }
            let w = nodes[i].1 * nodes[j].1 * nodes[k].1 * nodes[l].1;
            let a = field(&phi.point(c))?;
            if !a.is_finite() {
                return Err(Error::NonFinite);
            }
            Ok(a * (v * w))
        })
        .collect::<Result<Vec<_>>>()?;
    let magnitude = terms.iter().map(abs_sum).sum();
    Ok((pairwise_sum(&terms), magnitude))
}

fn monte_carlo_box<F>(field: &F, phi: &BumpTestFunction, samples: usize, seed: u64) -> Result<PairingResult>
where
    F: Fn(&Event) -> Result<FourVector> + Sync,
{
    let r = phi.radius;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 4]> = (0..samples).map(|_| std::array::from_fn(|_| rng.gen_range(-r..r))).collect();
    let values = points
        .par_iter()
        .map(|c| {
            let v = phi.value_local(c);
            if v == 0.0 {
                return Ok(FourVector::ZERO);
            }
            let a = field(&phi.point(*c))?;
            if !a.is_finite() {
                return Err(Error::NonFinite);
            }
            Ok(a * v)
        })
        .collect::<Result<Vec<_>>>()?;
    let volume = (2.0 * r).powi(4);
    let count = samples as f64;
    let mean = pairwise_sum(&values) * (1.0 / count);
    let squares: Vec<FourVector> = values.iter().map(|v| FourVector((*v - mean).0.map(|c| c * c))).collect();
    let variance = pairwise_sum(&squares) * (1.0 / (count - 1.0));
    let stderr = variance.0.iter().map(|v| v / count).sum::<f64>().sqrt();
    let magnitude = values.iter().map(abs_sum).sum::<f64>() * volume / count;
    Ok(PairingResult { value: mean * volume, error: stderr * volume, magnitude })
}

/// Orders of the iterated light-cone quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeRule {
    /// Gauss–Legendre panels and nodes per panel over the `s`-window.
    pub s_panels: usize,
    pub s_order: usize,
    /// Nodes in the cosine of the angle to the direction of `Φ`'s centre.
    pub polar: usize,
    /// Uniform azimuthal nodes (only used where `Φ` is not axially symmetric about the apex).
    pub azimuthal: usize,
    /// Nodes along each chord of the cone through the support.
    pub radial: usize,
}

impl Default for ConeRule {
    fn default() -> Self {
        ConeRule { s_panels: 8, s_order: 16, polar: 24, azimuthal: 24, radial: 24 }
    }
}

impl ConeRule {
    /// Every order halved, for error estimation.
    pub fn coarse(&self) -> ConeRule {
        ConeRule {
            s_panels: self.s_panels,
            s_order: (self.s_order / 2).max(2),
            polar: (self.polar / 2).max(2),
            azimuthal: (self.azimuthal / 2).max(4),
            radial: (self.radial / 2).max(2),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.s_panels == 0 || self.s_order < 2 || self.polar < 2 || self.azimuthal < 4 || self.radial < 2 {
            return Err(Error::InvalidQuadratureOrder(format!(
                "cone rule needs s_panels ≥ 1, s_order ≥ 2, polar ≥ 2, azimuthal ≥ 4 and radial ≥ 2, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// The current whose pairing is computed by [`pair_current_direct`].
#[derive(Clone, Copy, Debug)]
pub enum Source<'a> {
    Point { worldline: &'a UniformWorldline, charge: f64 },
    Shell { shell: &'a ShellConfig, quad: &'a SphereQuadrature },
}

/// Geometry of the future light cone from an apex `d` (frame coordinates
/// relative to the centre of `Φ`) through the support ball.
struct Apex {
    d: [f64; 4],
    /// `|d|²` and `|d|² - R²`, both Euclidean.
    dd: f64,
    excess: f64,
    /// Spatial length of `d` and the unit vector towards the centre of `Φ`.
    spatial: f64,
    axis: [f64; 3],
}

impl Apex {
    fn new(phi: &BumpTestFunction, x: &Event) -> Result<Apex> {
        let d = phi.local(x);
        let dd: f64 = d.iter().map(|c| c * c).sum();
        let excess = dd - phi.radius * phi.radius;
        if excess <= 0.0 {
            return Err(Error::SupportOverlap { clearance: dd.sqrt() - phi.radius, required: 0.0 });
        }
        let spatial = (d[1] * d[1] + d[2] * d[2] + d[3] * d[3]).sqrt();
        let axis = if spatial > 0.0 { [-d[1] / spatial, -d[2] / spatial, -d[3] / spatial] } else { [1.0, 0.0, 0.0] };
        Ok(Apex { d, dd, excess, spatial, axis })
    }

    /// Positive iff the cone meets the open support ball.
    fn reach(&self) -> f64 {
        self.spatial - self.d[0] - (2.0 * self.excess).sqrt()
    }

    /// Range of `c = ω·axis` over directions whose ray meets the ball.
    fn polar_range(&self) -> Option<(f64, f64)> {
        if self.reach() <= 0.0 {
            return None;
        }
        let lo = if self.spatial > 0.0 { ((2.0 * self.excess).sqrt() + self.d[0]) / self.spatial } else { -1.0 };
        Some((lo.max(-1.0), 1.0))
    }

    /// Chord `ℓ ∈ (ℓ₋, ℓ₊)` of the ray `d + ℓ(1, ω)` inside the ball, for
    /// `b = d_t + d⃗·ω`: the roots of `2ℓ² + 2bℓ + |d|² - R²`.
    fn chord(&self, b: f64) -> Option<(f64, f64)> {
        let disc = b * b - 2.0 * self.excess;
        if b >= 0.0 || disc <= 0.0 {
            return None;
        }
        let hi = 0.5 * (-b + disc.sqrt());
        Some((0.5 * self.excess / hi, hi))
    }
}

/// Rules shared by every light-cone integral of one pairing.
struct ConeNodes {
    polar: GaussLegendre,
    radial: GaussLegendre,
    azimuth: Vec<(f64, f64)>,
}

impl ConeNodes {
    fn new(rule: &ConeRule) -> Result<Self> {
        rule.validate()?;
        let m = rule.azimuthal;
        let azimuth = (0..m).map(|j| (2.0 * PI * j as f64 / m as f64, 2.0 * PI / m as f64)).collect();
        Ok(ConeNodes { polar: GaussLegendre::new(rule.polar)?, radial: GaussLegendre::new(rule.radial)?, azimuth })
    }

    /// `∫ Φ(apex + ξ) dλ_L(ξ)`, using the symmetry of `Φ` about its centre
    /// to do the azimuthal integral exactly.
    fn scalar(&self, phi: &BumpTestFunction, apex: &Apex) -> f64 {
        let Some((c_lo, c_hi)) = apex.polar_range() else { return 0.0 };
        let r2 = phi.radius * phi.radius;
        let mut total = 0.0;
        for (c, wc) in self.polar.mapped(c_lo, c_hi) {
            let b = apex.d[0] - apex.spatial * c;
            let Some((l0, l1)) = apex.chord(b) else { continue };
            let mut inner = 0.0;
            for (l, wl) in self.radial.mapped(l0, l1) {
                let rho2 = (apex.dd + 2.0 * b * l + 2.0 * l * l) / r2;
                if rho2 < 1.0 {
                    inner += wl * l * (1.0 / (rho2 - 1.0)).exp();
                }
            }
            total += wc * inner;
        }
        2.0 * PI * phi.amplitude * total
    }

    /// `∫ g(apex + ξ) dλ_L(ξ)` for `g` supported in the ball, given in frame coordinates.
    fn general(&self, apex: &Apex, g: impl Fn(&[f64; 4]) -> f64) -> f64 {
        let Some((c_lo, c_hi)) = apex.polar_range() else { return 0.0 };
        let (e1, e2) = complement(apex.axis);
        let mut total = 0.0;
        for (c, wc) in self.polar.mapped(c_lo, c_hi) {
            let b = apex.d[0] - apex.spatial * c;
            let Some((l0, l1)) = apex.chord(b) else { continue };
            let sine = (1.0 - c * c).max(0.0).sqrt();
            for &(phi_angle, wp) in &self.azimuth {
                let (cp, sp) = (phi_angle.cos(), phi_angle.sin());
                let omega: [f64; 3] =
                    std::array::from_fn(|i| c * apex.axis[i] + sine * (cp * e1[i] + sp * e2[i]));
                let mut inner = 0.0;
                for (l, wl) in self.radial.mapped(l0, l1) {
                    let y = [
                        apex.d[0] + l,
                        apex.d[1] + l * omega[0],
                        apex.d[2] + l * omega[1],
                        apex.d[3] + l * omega[2],
                    ];
                    inner += wl * l * g(&y);
                }
                total += wc * wp * inner;
            }
        }
        total
    }
}

/// Two unit vectors completing `axis` to an orthonormal basis of ℝ³.
fn complement(axis: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot = pick[0] * axis[0] + pick[1] * axis[1] + pick[2] * axis[2];
    let mut e1: [f64; 3] = std::array::from_fn(|i| pick[i] - dot * axis[i]);
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1 = e1.map(|c| c / norm);
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    (e1, e2)
}

/// The interval of `s` whose future light cone meets the support of `Φ`.
///
/// Starts at the retarded time of `Φ`'s centre, expands geometrically to a
/// bracket on each side, bisects the endpoints, and then checks a margin of
/// twice the window width beyond each end.
///
/// Returns `None` when no probe point of the support (its centre and the
/// points at `0.9 R` along each frame axis) has a retarded time, which for
/// hyperbolic motion means the support lies beyond the horizon.
pub fn cone_window<W: Worldline + ?Sized>(w: &W, phi: &BumpTestFunction) -> Result<Option<(f64, f64)>> {
    let reach = |s: f64| -> Result<f64> { Ok(Apex::new(phi, &w.position(s))?.reach()) };
    let mut probes = vec![[0.0; 4]];
    for axis in 0..4 {
        for sign in [1.0, -1.0] {
            let mut c = [0.0; 4];
            c[axis] = sign * 0.9 * phi.radius;
            probes.push(c);
        }
    }
    let mut start = None;
    for c in probes {
        match solve_retarded(w, &phi.point(c)) {
            Ok(sol) if reach(sol.s_ret)? > 0.0 => {
                start = Some(sol.s_ret);
                break;
            }
            Ok(_) | Err(Error::Horizon) => {}
            Err(e) => return Err(e),
        }
    }
    let Some(start) = start else { return Ok(None) };
    let (lo_bound, hi_bound) = w.admissible_range();
    let edge = |dir: f64| -> Result<f64> {
        let mut inside = start;
        let mut step = phi.radius;
        let mut outside;
        loop {
            outside = (start + dir * step).clamp(lo_bound, hi_bound);
            if reach(outside)? <= 0.0 {
                break;
            }
            inside = outside;
            if outside == lo_bound || outside == hi_bound {
                return Err(Error::WindowTruncation { s_min: lo_bound, s_max: hi_bound });
            }
            step *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if mid == inside || mid == outside {
                break;
            }
            if reach(mid)? > 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(outside)
    };
    let (lo, hi) = (edge(-1.0)?, edge(1.0)?);
    let width = hi - lo;
    for i in 1..=64 {
        let offset = 2.0 * width * i as f64 / 64.0;
        for s in [lo - offset, hi + offset] {
            if s > lo_bound && s < hi_bound && reach(s)? > 0.0 {
                return Err(Error::WindowTruncation { s_min: lo, s_max: hi });
            }
        }
    }
    Ok(Some((lo, hi)))
}

fn union(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    match (a, b) {
        (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.max(b.1))),
        (a, None) => a,
        (None, b) => b,
    }
}

/// Per-`s` contributions of the point and shell currents and their difference,
/// on shared nodes so that inner quadrature errors cancel in the difference.
struct DirectSums {
    point: FourVector,
    shell: FourVector,
    difference: FourVector,
    magnitude: f64,
}

/// Currents are normalized to unit charge density per area (`σ ε²` factored out).
fn direct_sums(
    centre: &UniformWorldline,
    shell: Option<(&ShellConfig, &SphereQuadrature)>,
    phi: &BumpTestFunction,
    rule: &ConeRule,
) -> Result<DirectSums> {
    let nodes = ConeNodes::new(rule)?;
    let constituents = match shell {
        Some((sh, quad)) => {
            quad.nodes.iter().zip(&quad.weights).map(|(n, &w)| Ok((sh.constituent(*n)?, w))).collect::<Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let mut window = cone_window(centre, phi)?;
    for (c, _) in &constituents {
        window = union(window, cone_window(c, phi)?);
    }
    let Some(window) = window else {
        return Ok(DirectSums {
            point: FourVector::ZERO,
            shell: FourVector::ZERO,
            difference: FourVector::ZERO,
            magnitude: 0.0,
        });
    };
    let total_weight: f64 = shell.map_or(4.0 * PI, |(_, q)| q.weights.iter().sum());
    let s_nodes = GaussLegendre::new(rule.s_order)?.composite(window.0, window.1, rule.s_panels);
    let rows = s_nodes
        .par_iter()
        .map(|&(s, ws)| -> Result<[FourVector; 3]> {
            let at_centre = nodes.scalar(phi, &Apex::new(phi, &centre.position(s))?);
            let point = centre.velocity(s) * (total_weight * at_centre);
            let shell_terms = constituents
                .iter()
                .map(|(c, w)| {
                    let value = nodes.scalar(phi, &Apex::new(phi, &c.position_at(s))?);
                    Ok(c.z(s) * (w * value))
                })
                .collect::<Result<Vec<_>>>()?;
            let shell_sum = pairwise_sum(&shell_terms);
            Ok([point * ws, shell_sum * ws, (shell_sum - point) * ws])
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |k: usize| pairwise_sum(&rows.iter().map(|r| r[k]).collect::<Vec<_>>());
    let magnitude = rows.iter().map(|r| abs_sum(&r[0])).sum();
    let sums = DirectSums { point: column(0), shell: column(1), difference: column(2), magnitude };
    if !(sums.point.is_finite() && sums.shell.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(sums)
}

/// `(j * λ_L | Φ)` by the iterated integral: `s` outermost, then the sphere
/// (shell only), then the light cone.
pub fn pair_current_direct(source: Source<'_>, phi: &BumpTestFunction, rule: &ConeRule) -> Result<PairingResult> {
    let eval = |rule: &ConeRule| -> Result<(FourVector, f64)> {
        match source {
            Source::Point { worldline, charge } => {
                let sums = direct_sums(worldline, None, phi, rule)?;
                let k = KAPPA * charge / (4.0 * PI);
                Ok((sums.point * k, sums.magnitude * k.abs()))
            }
            Source::Shell { shell, quad } => {
                let sums = direct_sums(shell.center(), Some((shell, quad)), phi, rule)?;
                let k = KAPPA * shell.density() * shell.radius() * shell.radius();
                Ok((sums.shell * k, sums.magnitude * k.abs()))
            }
        }
    };
    let (fine, magnitude) = eval(rule)?;
    let (coarse, _) = eval(&rule.coarse())?;
    Ok(PairingResult { value: fine, error: (fine - coarse).euclidean_norm(), magnitude })
}

/// Shell and point pairings and their difference, all with the point charge
/// `Q = 4πε²σ` and computed on shared nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferencePairing {
    pub shell: FourVector,
    pub point: FourVector,
    pub difference: PairingResult,
}

/// The pairing difference `(j_ε * λ_L | Φ) - (j_point * λ_L | Φ)`.
///
/// The error estimate compares against a run with every order halved,
/// including the sphere quadrature.
pub fn pair_difference_direct(
    shell: &ShellConfig,
    phi: &BumpTestFunction,
    rule: &ConeRule,
    polar: usize,
    azimuthal: usize,
) -> Result<DifferencePairing> {
    let k = KAPPA * shell.density() * shell.radius() * shell.radius();
    let fine_quad = SphereQuadrature::for_worldline(shell.center(), polar, azimuthal)?;
    let coarse_quad = SphereQuadrature::for_worldline(shell.center(), (polar / 2).max(2), (azimuthal / 2).max(4))?;
    let fine = direct_sums(shell.center(), Some((shell, &fine_quad)), phi, rule)?;
    let coarse = direct_sums(shell.center(), Some((shell, &coarse_quad)), phi, &rule.coarse())?;
    let value = fine.difference * k;
    Ok(DifferencePairing {
        shell: fine.shell * k,
        point: fine.point * k,
        difference: PairingResult {
            value,
            error: (value - coarse.difference * k).euclidean_norm(),
            magnitude: fine.magnitude * k.abs(),
        },
    })
}

/// The predicted leading difference and whether every `s`-node contribution
/// is timelike or zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub result: PairingResult,
    pub timelike: bool,
}

impl Prediction {
    fn scaled(&self, k: f64) -> Prediction {
        let r = &self.result;
        Prediction {
            result: PairingResult { value: r.value * k, error: r.error * k.abs(), magnitude: r.magnitude * k.abs() },
            timelike: self.timelike,
        }
    }
}

/// `κσε² · ε²(4π/3) ∫ds ∫dλ_L [r̈·DΦ + ½ Tr((1 + ṙ⊗ṙ)·D²Φ)] ṙ(s)`, all
/// derivatives of `Φ` taken at `r_c(s) + ξ`.
///
/// Requires the support of `Φ` to clear the tube.
pub fn predicted_difference(shell: &ShellConfig, phi: &BumpTestFunction, rule: &ConeRule) -> Result<Prediction> {
    phi.check_exterior(shell)?;
    Ok(leading_integral(shell.center(), phi, rule)?.scaled(prediction_factor(shell)))
}

/// `κσε⁴ · 4π/3`, the `ε`-dependent prefactor of the prediction.
fn prediction_factor(shell: &ShellConfig) -> f64 {
    let eps = shell.radius();
    KAPPA * shell.density() * eps.powi(4) * 4.0 * PI / 3.0
}

/// The double integral of the prediction without its prefactor. It depends
/// only on the centre worldline and `Φ`.
pub fn leading_integral(w: &UniformWorldline, phi: &BumpTestFunction, rule: &ConeRule) -> Result<Prediction> {
    let (fine, timelike, magnitude) = prediction_integral(w, phi, rule)?;
    let (coarse, _, _) = prediction_integral(w, phi, &rule.coarse())?;
    Ok(Prediction { result: PairingResult { value: fine, error: (fine - coarse).euclidean_norm(), magnitude }, timelike })
}

/// `∫ds ∫dλ_L [r̈·DΦ + ½ Tr((1 + ṙ⊗ṙ)·D²Φ)] ṙ(s)` for the centre worldline.
fn prediction_integral(w: &UniformWorldline, phi: &BumpTestFunction, rule: &ConeRule) -> Result<(FourVector, bool, f64)> {
    let nodes = ConeNodes::new(rule)?;
    let Some(window) = cone_window(w, phi)? else { return Ok((FourVector::ZERO, true, 0.0)) };
    let s_nodes = GaussLegendre::new(rule.s_order)?.composite(window.0, window.1, rule.s_panels);
    let rows = s_nodes
        .par_iter()
        .map(|&(s, ws)| -> Result<FourVector> {
            let v = w.velocity(s);
            let acc = w.acceleration(s);
            let vl = phi.frame.coordinates(&v);
            let al = phi.frame.coordinates(&acc);
            let apex = Apex::new(phi, &w.position(s))?;
            let scalar = nodes.general(&apex, |y| leading_integrand(phi, y, &vl, &al));
            Ok(v * (ws * scalar))
        })
        .collect::<Result<Vec<_>>>()?;
    let timelike = rows.iter().all(|r| r.square() <= 1e-12 * r.max_abs().powi(2));
    let magnitude = rows.iter().map(abs_sum).sum();
    Ok((pairwise_sum(&rows), timelike, magnitude))
}

/// `r̈·DΦ + ½ Tr((1 + ṙ⊗ṙ)·D²Φ)` at frame coordinates `y`, for `ṙ` and `r̈`
/// given by their frame components. Uses the radial form of `Φ`.
fn leading_integrand(phi: &BumpTestFunction, y: &[f64; 4], vl: &[f64; 4], al: &[f64; 4]) -> f64 {
    let Some((_, f1, f2)) = phi.radial_derivatives(y) else { return 0.0 };
    let r2inv = 1.0 / (phi.radius * phi.radius);
    let euclid = |p: &[f64; 4], q: &[f64; 4]| (0..4).map(|m| p[m] * q[m]).sum::<f64>();
    let (a_y, v_y, v_sq) = (euclid(al, y), euclid(vl, y), euclid(vl, vl));
    let lorentz_y = -y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3];
    // ∂_μΦ = 2 f1 y_μ / R², ∂_μ∂_νΦ = 4 f2 y_μ y_ν / R⁴ + 2 f1 δ_μν / R²
    let gradient = 2.0 * f1 * r2inv * a_y;
    let trace = 4.0 * f2 * r2inv * r2inv * lorentz_y + 4.0 * f1 * r2inv;
    let along = 4.0 * f2 * r2inv * r2inv * v_y * v_y + 2.0 * f1 * r2inv * v_sq;
    gradient + 0.5 * (trace + along)
}

/// How the shell charge varies along an `ε` sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Convention {
    /// Total charge `Q` fixed; the leading difference scales as `ε²`.
    FixedCharge { charge: f64 },
    /// Surface density `σ` fixed; the leading difference scales as `ε⁴`.
    FixedDensity { density: f64 },
}

impl Convention {
    pub fn shell(&self, center: UniformWorldline, eps: f64) -> Result<ShellConfig> {
        match *self {
            Convention::FixedCharge { charge } => ShellConfig::with_charge(center, eps, charge),
            Convention::FixedDensity { density } => ShellConfig::new(center, eps, density),
        }
    }

    /// Expected log–log slope of `‖Δ‖` against `ε`.
    pub fn expected_slope(&self) -> f64 {
        match self {
            Convention::FixedCharge { .. } => 2.0,
            Convention::FixedDensity { .. } => 4.0,
        }
    }
}

/// Settings of a comparison run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareOptions {
    /// Kernel constant shared by every potential and pairing.
    pub kappa: f64,
    /// Rule for the pairing difference.
    pub cone: ConeRule,
    /// Rule for the prediction, whose integrand carries derivatives of `Φ`.
    pub prediction: ConeRule,
    /// Sphere quadrature over the shell directions.
    pub polar: usize,
    pub azimuthal: usize,
    /// `Δ` counts as zero when `‖Δ‖ ≤ max(error_factor · error, relative_tolerance · ‖point pairing‖)`.
    pub error_factor: f64,
    pub relative_tolerance: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            kappa: KAPPA,
            cone: ConeRule::default(),
            prediction: ConeRule { s_panels: 8, s_order: 32, polar: 48, azimuthal: 48, radial: 48 },
            polar: 8,
            azimuthal: 16,
            error_factor: 10.0,
            relative_tolerance: 1e-9,
        }
    }
}

/// One `(Φ, ε)` evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceRecord {
    pub eps: f64,
    pub charge: f64,
    pub density: f64,
    pub shell: FourVector,
    pub point: FourVector,
    pub delta: FourVector,
    pub delta_error: f64,
    pub predicted: FourVector,
    pub predicted_error: f64,
    /// `‖Δ‖` and `‖predicted‖` in the Euclidean norm of the centre's rest frame at `s = 0`.
    pub norm_delta: f64,
    pub norm_predicted: f64,
    /// Projection of `Δ` on the prediction, `(Δ, P) / (P, P)`.
    pub ratio: f64,
    /// `‖Δ - P‖ / ‖P‖`.
    pub deviation: f64,
    /// `Δ` exceeds both its error threshold and the relative tolerance.
    pub nonzero: bool,
    /// Every `s`-node contribution of the prediction is timelike or zero.
    pub timelike: bool,
}

/// Computes `Δ(ε)` and the prediction for one test function.
pub fn difference_record(shell: &ShellConfig, phi: &BumpTestFunction, options: &CompareOptions) -> Result<DifferenceRecord> {
    let unit = leading_integral(shell.center(), phi, &options.prediction)?;
    record_with(shell, phi, options, &unit)
}

fn record_with(
    shell: &ShellConfig,
    phi: &BumpTestFunction,
    options: &CompareOptions,
    unit: &Prediction,
) -> Result<DifferenceRecord> {
    phi.check_exterior(shell)?;
    // every potential carries the same κ
    let scale = options.kappa / KAPPA;
    let pair = pair_difference_direct(shell, phi, &options.cone, options.polar, options.azimuthal)?;
    let prediction = unit.scaled(prediction_factor(shell));
    let w = shell.center();
    let frame = Frame::adapted(&w.u(), &w.n())?;
    let norm = |v: &FourVector| frame.euclidean_norm(v);
    let delta = pair.difference.value * scale;
    let predicted = prediction.result.value * scale;
    let delta_error = pair.difference.error * scale;
    let norm_delta = norm(&delta);
    let norm_predicted = norm(&predicted);
    let dot = {
        let (d, p) = (frame.coordinates(&delta), frame.coordinates(&predicted));
        (0..4).map(|i| d[i] * p[i]).sum::<f64>()
    };
    let ratio = if norm_predicted > 0.0 { dot / (norm_predicted * norm_predicted) } else { f64::NAN };
    let deviation = if norm_predicted > 0.0 { norm(&(delta - predicted)) / norm_predicted } else { f64::NAN };
    let point = pair.point * scale;
    let threshold = (options.error_factor * delta_error).max(options.relative_tolerance * norm(&point));
    Ok(DifferenceRecord {
        eps: shell.radius(),
        charge: shell.charge(),
        density: shell.density(),
        shell: pair.shell * scale,
        point,
        delta,
        delta_error,
        predicted,
        predicted_error: prediction.result.error * scale,
        norm_delta,
        norm_predicted,
        ratio,
        deviation,
        nonzero: norm_delta > threshold,
        timelike: prediction.timelike,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Equality {
    Equal,
    NotEqual,
}

/// All records of one test function along the sweep, with the fitted slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionVerdict {
    pub records: Vec<DifferenceRecord>,
    /// Least-squares slope of `log ‖Δ‖` against `log ε`; `None` with fewer than two points
    /// or when some `Δ` vanishes.
    pub slope: Option<f64>,
    pub equality: Equality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub per_test_function: Vec<TestFunctionVerdict>,
    /// `NOT_EQUAL` as soon as one pairing difference is nonzero.
    pub equality: Equality,
    /// Every prediction integrand was timelike or zero.
    pub timelike: bool,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Runs every `(Φ, ε)` pair. Test functions are checked against the tube at every `ε`.
pub fn verdict(
    center: &UniformWorldline,
    convention: &Convention,
    test_functions: &[BumpTestFunction],
    sweep: &[f64],
    options: &CompareOptions,
) -> Result<Verdict> {
    let mut per = Vec::with_capacity(test_functions.len());
    for phi in test_functions {
        let unit = leading_integral(center, phi, &options.prediction)?;
        let records = sweep
            .iter()
            .map(|&eps| record_with(&convention.shell(*center, eps)?, phi, options, &unit))
            .collect::<Result<Vec<_>>>()?;
        let slope = log_log_slope(&records.iter().map(|r| (r.eps, r.norm_delta)).collect::<Vec<_>>());
        let equality = if records.iter().any(|r| r.nonzero) { Equality::NotEqual } else { Equality::Equal };
        per.push(TestFunctionVerdict { records, slope, equality });
    }
    let equality =
        if per.iter().any(|v| v.equality == Equality::NotEqual) { Equality::NotEqual } else { Equality::Equal };
    let timelike = per.iter().flat_map(|v| &v.records).all(|r| r.timelike);
    Ok(Verdict { per_test_function: per, equality, timelike })
}
