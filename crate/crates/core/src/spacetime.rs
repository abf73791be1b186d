//! Minkowski spacetime in a fixed orthonormal basis with signature (-,+,+,+).
//!
//! Events (affine points) and four-vectors are kept as distinct types; their
//! differences and translations follow the affine rules. Linear maps act by
//! ordinary matrix multiplication on components, and every contraction that
//! appears in a formula (`a ⊗ b`, adjoints, traces) uses the Lorentz product.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when validating normalization and orthogonality.
pub const NORM_TOL: f64 = 1e-12;

/// Metric diagonal.
pub const METRIC: [f64; 4] = [-1.0, 1.0, 1.0, 1.0];

/// A spacetime vector `(t, x, y, z)` with `c = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

/// A spacetime point. `Event - Event` is a [`FourVector`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Event(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        FourVector([t, x, y, z])
    }

    /// Unit basis vector `e_i` of the global frame.
    pub fn basis(i: usize) -> Self {
        let mut c = [0.0; 4];
        c[i] = 1.0;
        FourVector(c)
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        lorentz_product(self, other)
    }

    /// Lorentz square `v·v`.
    pub fn square(&self) -> f64 {
        self.dot(self)
    }

    /// Component-wise max norm, used for tolerance scaling.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Euclidean norm of the components in the global basis.
    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Lowers the index: the covector `g·v`.
    pub fn lowered(&self) -> [f64; 4] {
        let v = self.0;
        [-v[0], v[1], v[2], v[3]]
    }
}

impl Event {
    pub const ORIGIN: Event = Event([0.0; 4]);

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Event([t, x, y, z])
    }

    /// The vector from the origin of the coordinate chart to this event.
    pub fn to_vector(self) -> FourVector {
        FourVector(self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Index<usize> for Event {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn zip4(a: [f64; 4], b: [f64; 4], f: impl Fn(f64, f64) -> f64) -> [f64; 4] {
    [f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2]), f(a[3], b[3])]
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(zip4(self.0, rhs.0, |a, b| a + b))
    }
}

impl AddAssign for FourVector {
    fn add_assign(&mut self, rhs: FourVector) {
        *self = *self + rhs;
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(zip4(self.0, rhs.0, |a, b| a - b))
    }
}

impl SubAssign for FourVector {
    fn sub_assign(&mut self, rhs: FourVector) {
        *self = *self - rhs;
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|c| -c))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, k: f64) -> FourVector {
        FourVector(self.0.map(|c| c * k))
    }
}

impl Mul<FourVector> for f64 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        v * self
    }
}

impl Sub for Event {
    type Output = FourVector;
    fn sub(self, rhs: Event) -> FourVector {
        FourVector(zip4(self.0, rhs.0, |a, b| a - b))
    }
}

impl Add<FourVector> for Event {
    type Output = Event;
    fn add(self, rhs: FourVector) -> Event {
        Event(zip4(self.0, rhs.0, |a, b| a + b))
    }
}

impl Sub<FourVector> for Event {
    type Output = Event;
    fn sub(self, rhs: FourVector) -> Event {
        Event(zip4(self.0, rhs.0, |a, b| a - b))
    }
}

/// `v·w = -v⁰w⁰ + v¹w¹ + v²w² + v³w³`.
pub fn lorentz_product(v: &FourVector, w: &FourVector) -> f64 {
    -v.0[0] * w.0[0] + v.0[1] * w.0[1] + v.0[2] * w.0[2] + v.0[3] * w.0[3]
}

/// An absolute velocity: a futurelike unit timelike vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FourVector", into = "FourVector")]
pub struct Velocity(FourVector);

impl Velocity {
    /// The rest velocity `(1, 0, 0, 0)` of the global frame.
    pub const REST: Velocity = Velocity(FourVector([1.0, 0.0, 0.0, 0.0]));

    /// Validates `u·u = -1` and `u⁰ > 0` to [`NORM_TOL`].
    pub fn new(u: FourVector) -> Result<Self> {
        let sq = u.square();
        if !u.is_finite() || (sq + 1.0).abs() > NORM_TOL * u.max_abs().powi(2).max(1.0) || u.0[0] <= 0.0 {
            return Err(Error::NotAbsoluteVelocity { square: sq, time: u.0[0] });
        }
        Ok(Velocity(u))
    }

    /// Velocity with the given rapidity along a spatial direction of the global frame.
    pub fn from_rapidity(rapidity: f64, direction: [f64; 3]) -> Result<Self> {
        let norm = direction.iter().map(|c| c * c).sum::<f64>().sqrt();
        if rapidity == 0.0 {
            return Ok(Velocity::REST);
        }
        if norm.is_nan() || norm <= 0.0 || !rapidity.is_finite() {
            return Err(Error::InvalidDirection);
        }
        let (sh, ch) = (rapidity.sinh(), rapidity.cosh());
        let d = direction.map(|c| c / norm);
        Velocity::new(FourVector::new(ch, sh * d[0], sh * d[1], sh * d[2]))
    }

    /// Wraps a vector already known to be an absolute velocity up to round-off
    /// (e.g. `cosh`/`sinh` combinations evaluated at large arguments).
    pub(crate) fn new_unchecked(u: FourVector) -> Self {
        Velocity(u)
    }

    pub fn vector(&self) -> FourVector {
        self.0
    }
}

impl From<Velocity> for FourVector {
    fn from(u: Velocity) -> FourVector {
        u.0
    }
}

impl TryFrom<FourVector> for Velocity {
    type Error = Error;
    fn try_from(v: FourVector) -> Result<Self> {
        Velocity::new(v)
    }
}

/// A 4×4 real matrix acting on four-vector components: `(L·v)ⁱ = Σⱼ Lⁱⱼ vʲ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinMap4(pub [[f64; 4]; 4]);

impl LinMap4 {
    pub const ZERO: LinMap4 = LinMap4([[0.0; 4]; 4]);

    pub fn identity() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        LinMap4(m)
    }

    pub fn apply(&self, v: &FourVector) -> FourVector {
        let mut out = [0.0; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row[0] * v.0[0] + row[1] * v.0[1] + row[2] * v.0[2] + row[3] * v.0[3];
        }
        FourVector(out)
    }

    pub fn compose(&self, other: &LinMap4) -> LinMap4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..4).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        LinMap4(m)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// The Lorentz adjoint, see [`adjoint`].
    pub fn adjoint(&self) -> LinMap4 {
        adjoint(self)
    }

    /// Bilinear evaluation `y·L·x`.
    pub fn bilinear(&self, y: &FourVector, x: &FourVector) -> f64 {
        y.dot(&self.apply(x))
    }

    /// Whether `L*·L = 1` to the given tolerance.
    pub fn is_lorentz(&self, tol: f64) -> bool {
        (self.adjoint().compose(self) - LinMap4::identity()).max_abs() < tol
    }
}

impl Add for LinMap4 {
    type Output = LinMap4;
    fn add(self, rhs: LinMap4) -> LinMap4 {
        let mut m = self.0;
        for (row, other) in m.iter_mut().zip(rhs.0.iter()) {
            for (a, b) in row.iter_mut().zip(other) {
                *a += b;
            }
        }
        LinMap4(m)
    }
}

impl Sub for LinMap4 {
    type Output = LinMap4;
    fn sub(self, rhs: LinMap4) -> LinMap4 {
        self + rhs * -1.0
    }
}

impl Mul<f64> for LinMap4 {
    type Output = LinMap4;
    fn mul(self, k: f64) -> LinMap4 {
        LinMap4(self.0.map(|row| row.map(|c| c * k)))
    }
}

impl Mul<FourVector> for LinMap4 {
    type Output = FourVector;
    fn mul(self, v: FourVector) -> FourVector {
        self.apply(&v)
    }
}

impl Mul for LinMap4 {
    type Output = LinMap4;
    fn mul(self, rhs: LinMap4) -> LinMap4 {
        self.compose(&rhs)
    }
}

/// `(a ⊗ b)·x = a (b·x)`; in components `aⁱ (g b)ⱼ`.
pub fn tensor(a: &FourVector, b: &FourVector) -> LinMap4 {
    let bl = b.lowered();
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = a.0[i] * bl[j];
        }
    }
    LinMap4(m)
}

/// `L*` with `(L*·x)·y = x·(L·y)`; in components `g⁻¹ Lᵀ g`.
pub fn adjoint(l: &LinMap4) -> LinMap4 {
    let mut m = [[0.0; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = METRIC[i] * l.0[j][i] * METRIC[j];
        }
    }
    LinMap4(m)
}

/// The rotation-free Lorentz boost sending `u` to `u2`:
/// `1 + (u2+u)⊗(u2+u)/(1 - u2·u) - 2 u2⊗u`.
pub fn boost(u: &Velocity, u2: &Velocity) -> LinMap4 {
    let (u, u2) = (u.vector(), u2.vector());
    let sum = u2 + u;
    let denom = 1.0 - u2.dot(&u);
    LinMap4::identity() + tensor(&sum, &sum) * (1.0 / denom) - tensor(&u2, &u) * 2.0
}

/// `1 + u⊗u`, the projection onto the `u`-spacelike subspace.
pub fn spatial_projection(u: &Velocity) -> LinMap4 {
    let u = u.vector();
    LinMap4::identity() + tensor(&u, &u)
}

/// `1 + u⊗u - n⊗n`, the projection onto the 2-plane orthogonal to `u` and `n`.
pub fn plane_projection(u: &Velocity, n: &FourVector) -> Result<LinMap4> {
    check_unit_spacelike(u, n)?;
    Ok(spatial_projection(u) - tensor(n, n))
}

/// Checks `n·n = 1` and `u·n = 0` to [`NORM_TOL`].
pub fn check_unit_spacelike(u: &Velocity, n: &FourVector) -> Result<()> {
    let nn = n.square();
    if !n.is_finite() || (nn - 1.0).abs() > NORM_TOL {
        return Err(Error::NotUnitSpacelike { square: nn });
    }
    let un = u.vector().dot(n);
    if un.abs() > NORM_TOL * u.vector().max_abs() {
        return Err(Error::NotOrthogonal { product: un });
    }
    Ok(())
}

/// An orthonormal frame `(e₀, e₁, e₂, e₃)` with `e₀` an absolute velocity.
///
/// Frame coordinates of a vector `v` are `(-e₀·v, e₁·v, e₂·v, e₃·v)`; the
/// Euclidean norm in a frame is the norm of those coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub time: Velocity,
    pub space: [FourVector; 3],
}

impl Frame {
    pub fn rest() -> Self {
        Frame {
            time: Velocity::REST,
            space: [FourVector::basis(1), FourVector::basis(2), FourVector::basis(3)],
        }
    }

    /// Frame with `e₀ = u`, `e₁ = n`, completed by Gram–Schmidt in the Lorentz product.
    pub fn adapted(u: &Velocity, n: &FourVector) -> Result<Self> {
        check_unit_spacelike(u, n)?;
        let p = spatial_projection(u);
        let mut space = vec![*n];
        for i in 1..4 {
            if space.len() == 3 {
                break;
            }
            let mut v = p.apply(&FourVector::basis(i));
            for e in &space {
                v -= *e * e.dot(&v);
            }
            let norm2 = v.square();
            if norm2 > 1e-6 {
                space.push(v * (1.0 / norm2.sqrt()));
            }
        }
        // one extra pass keeps the completion orthonormal to round-off
        for k in 1..space.len() {
            let mut v = space[k];
            for e in &space[..k] {
                v -= *e * e.dot(&v);
            }
            space[k] = v * (1.0 / v.square().sqrt());
        }
        Ok(Frame { time: *u, space: [space[0], space[1], space[2]] })
    }

    /// Frame obtained from the rest frame by the boost to `u` (no spatial rotation).
    pub fn boosted(u: &Velocity) -> Self {
        let l = boost(&Velocity::REST, u);
        Frame {
            time: *u,
            space: [1, 2, 3].map(|i| l.apply(&FourVector::basis(i))),
        }
    }

    pub fn axis(&self, mu: usize) -> FourVector {
        if mu == 0 {
            self.time.vector()
        } else {
            self.space[mu - 1]
        }
    }

    pub fn coordinates(&self, v: &FourVector) -> [f64; 4] {
        [
            -self.time.vector().dot(v),
            self.space[0].dot(v),
            self.space[1].dot(v),
            self.space[2].dot(v),
        ]
    }

    pub fn vector(&self, c: [f64; 4]) -> FourVector {
        self.time.vector() * c[0] + self.space[0] * c[1] + self.space[1] * c[2] + self.space[2] * c[3]
    }

    pub fn euclidean_norm(&self, v: &FourVector) -> f64 {
        self.coordinates(v).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Spatial vector `Σ cᵢ eᵢ` from frame components.
    pub fn spatial(&self, c: [f64; 3]) -> FourVector {
        self.vector([0.0, c[0], c[1], c[2]])
    }
}

/// Random velocities, directions and Lorentz maps for property checks.
pub mod sampling {
    use super::*;
    use rand::Rng;

    /// Rapidity uniform in `[0, max_rapidity]`, direction uniform on S².
    pub fn random_velocity<R: Rng>(rng: &mut R, max_rapidity: f64) -> Velocity {
        let rapidity = rng.gen_range(0.0..max_rapidity);
        Velocity::from_rapidity(rapidity.max(1e-9), random_direction(rng)).unwrap()
    }

    pub fn random_direction<R: Rng>(rng: &mut R) -> [f64; 3] {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        [r * phi.cos(), r * phi.sin(), z]
    }

    pub fn random_vector<R: Rng>(rng: &mut R) -> FourVector {
        FourVector(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
    }

    pub fn random_lorentz<R: Rng>(rng: &mut R) -> LinMap4 {
        let u = random_velocity(rng, 2.0);
        let rot = random_rotation(rng);
        boost(&Velocity::REST, &u).compose(&rot)
    }

    /// Random spatial rotation from a random unit quaternion.
    pub fn random_rotation<R: Rng>(rng: &mut R) -> LinMap4 {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|c| c / n);
        let r = [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
            [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
            [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
        ];
        let mut m = LinMap4::identity().0;
        for i in 0..3 {
            for j in 0..3 {
                m[i + 1][j + 1] = r[i][j];
            }
        }
        LinMap4(m)
    }
}
