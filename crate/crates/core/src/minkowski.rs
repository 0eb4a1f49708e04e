//! Flat spacetime bookkeeping.
//!
//! Coordinates are `x⁰ = t` and `(x¹, x², x³)` Cartesian, with `c = 1`. The
//! metric has signature `(+, −, −, −)`, so raising or lowering an index keeps
//! the time component and negates the spatial ones.
//!
//! Index position is carried in the type: a [`Covector`] can only be
//! contracted against a [`Vector`], and mixing two covariant objects without
//! going through the metric does not compile.
//!
//! ## Two-index alternation
//!
//! For a gradient `A_{ρ,σ}` (first slot: component, second slot: derivative)
//! [`alternate`] returns `f_{μν} = A_{ν,μ} − A_{μ,ν}` with no factor of ½.
//! This is the normalization for which `A_{ρ,σ} = B_ρ k_σ` gives exactly
//! `f_{μν} = k_μ B_ν − k_ν B_μ`.

use std::fmt;
use std::marker::PhantomData;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Diagonal of `η_{αβ}` (and of `η^{αβ}`, which is numerically identical).
pub const METRIC_DIAG: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// Marker for a covariant (lower) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Lower;

/// Marker for a contravariant (upper) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Upper;

pub trait IndexPosition: Copy + Default + fmt::Debug + Send + Sync + 'static {
    const NAME: &'static str;
}

impl IndexPosition for Lower {
    const NAME: &'static str = "lower";
}

impl IndexPosition for Upper {
    const NAME: &'static str = "upper";
}

/// A four-vector whose index position is fixed by `P`.
#[derive(Clone, Copy, PartialEq)]
pub struct FourVector<P: IndexPosition> {
    components: [f64; 4],
    _position: PhantomData<P>,
}

/// `v_μ`
pub type Covector = FourVector<Lower>;
/// `v^μ`
pub type Vector = FourVector<Upper>;

impl<P: IndexPosition> fmt::Debug for FourVector<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FourVector<{}>{:?}", P::NAME, self.components)
    }
}

impl<P: IndexPosition> Default for FourVector<P> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<P: IndexPosition> FourVector<P> {
    pub const fn new(components: [f64; 4]) -> Self {
        Self {
            components,
            _position: PhantomData,
        }
    }

    pub const fn zero() -> Self {
        Self::new([0.0; 4])
    }

    /// Builds from a time component and a spatial 3-vector.
    pub fn from_parts(time: f64, space: &Vec3) -> Self {
        Self::new([time, space.x, space.y, space.z])
    }

    pub fn components(&self) -> [f64; 4] {
        self.components
    }

    pub fn get(&self, index: usize) -> f64 {
        self.components[index]
    }

    pub fn time(&self) -> f64 {
        self.components[0]
    }

    pub fn space(&self) -> Vec3 {
        Vec3::new(self.components[1], self.components[2], self.components[3])
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.components.map(|c| c * factor))
    }

    /// Component-wise (Euclidean) dot product. Not a Lorentz invariant; used
    /// for least-squares projections where the Minkowski norm degenerates.
    pub fn euclidean_dot(&self, other: &Self) -> f64 {
        self.components
            .iter()
            .zip(other.components.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.euclidean_dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn flip_spatial(&self) -> [f64; 4] {
        let mut out = self.components;
        for (c, g) in out.iter_mut().zip(METRIC_DIAG) {
            *c *= g;
        }
        out
    }
}

impl<P: IndexPosition> std::ops::Add for FourVector<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut c = self.components;
        for (a, b) in c.iter_mut().zip(rhs.components) {
            *a += b;
        }
        Self::new(c)
    }
}

impl<P: IndexPosition> std::ops::Sub for FourVector<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let mut c = self.components;
        for (a, b) in c.iter_mut().zip(rhs.components) {
            *a -= b;
        }
        Self::new(c)
    }
}

impl Covector {
    pub fn raise(&self) -> Vector {
        Vector::new(self.flip_spatial())
    }

    /// `η^{ρσ} v_ρ v_σ`
    pub fn minkowski_square(&self) -> f64 {
        contract(self, &self.raise())
    }
}

impl Vector {
    pub fn lower(&self) -> Covector {
        Covector::new(self.flip_spatial())
    }

    /// `η_{ρσ} v^ρ v^σ`
    pub fn minkowski_square(&self) -> f64 {
        contract(&self.lower(), self)
    }
}

/// `a_ν b^ν`
pub fn contract(a: &Covector, b: &Vector) -> f64 {
    a.components
        .iter()
        .zip(b.components.iter())
        .map(|(x, y)| x * y)
        .sum()
}

/// Rank-2 tensor with index positions `A` (first slot) and `B` (second slot).
#[derive(Clone, Copy, PartialEq)]
pub struct Tensor2<A: IndexPosition, B: IndexPosition> {
    components: [[f64; 4]; 4],
    _position: PhantomData<(A, B)>,
}

/// `T_{μν}`
pub type CovTensor = Tensor2<Lower, Lower>;

impl<A: IndexPosition, B: IndexPosition> fmt::Debug for Tensor2<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor2<{}, {}>{:?}", A::NAME, B::NAME, self.components)
    }
}

impl<A: IndexPosition, B: IndexPosition> Default for Tensor2<A, B> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<A: IndexPosition, B: IndexPosition> Tensor2<A, B> {
    pub const fn new(components: [[f64; 4]; 4]) -> Self {
        Self {
            components,
            _position: PhantomData,
        }
    }

    pub const fn zero() -> Self {
        Self::new([[0.0; 4]; 4])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut c = [[0.0; 4]; 4];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        }
        Self::new(c)
    }

    /// `a_A ⊗ b_B`
    pub fn outer(a: &FourVector<A>, b: &FourVector<B>) -> Self {
        Self::from_fn(|i, j| a.get(i) * b.get(j))
    }

    pub fn components(&self) -> [[f64; 4]; 4] {
        self.components
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.components[i][j]
    }

    pub fn row(&self, i: usize) -> FourVector<B> {
        FourVector::new(self.components[i])
    }

    pub fn column(&self, j: usize) -> FourVector<A> {
        FourVector::new([
            self.components[0][j],
            self.components[1][j],
            self.components[2][j],
            self.components[3][j],
        ])
    }

    pub fn transpose(&self) -> Tensor2<B, A> {
        Tensor2::from_fn(|i, j| self.components[j][i])
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_fn(|i, j| self.components[i][j] * factor)
    }

    /// Frobenius norm over the stored components.
    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Largest `|T_ij + T_ji|`.
    pub fn antisymmetry_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.components[i][j] + self.components[j][i]).abs());
            }
        }
        worst
    }

    /// Largest `|T_ij − T_ji|`.
    pub fn symmetry_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.components[i][j] - self.components[j][i]).abs());
            }
        }
        worst
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.antisymmetry_violation() == 0.0
    }
}

impl<A: IndexPosition, B: IndexPosition> std::ops::Add for Tensor2<A, B> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.components[i][j] + rhs.components[i][j])
    }
}

impl<A: IndexPosition, B: IndexPosition> std::ops::Sub for Tensor2<A, B> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.components[i][j] - rhs.components[i][j])
    }
}

impl CovTensor {
    /// `η_{μν}`
    pub fn metric() -> Self {
        Self::from_fn(|i, j| if i == j { METRIC_DIAG[i] } else { 0.0 })
    }

    /// `T^{μν}`
    pub fn raise_both(&self) -> Tensor2<Upper, Upper> {
        Tensor2::from_fn(|i, j| METRIC_DIAG[i] * METRIC_DIAG[j] * self.components[i][j])
    }

    /// `T^μ{}_ν`
    pub fn raise_first(&self) -> Tensor2<Upper, Lower> {
        Tensor2::from_fn(|i, j| METRIC_DIAG[i] * self.components[i][j])
    }

    /// `T_μ{}^ν`
    pub fn raise_second(&self) -> Tensor2<Lower, Upper> {
        Tensor2::from_fn(|i, j| METRIC_DIAG[j] * self.components[i][j])
    }

    /// `η^{μν} T_{μν}`
    pub fn trace(&self) -> f64 {
        (0..4).map(|i| METRIC_DIAG[i] * self.components[i][i]).sum()
    }

    /// Wraps `f` after checking exact antisymmetry.
    pub fn validate_antisymmetric(&self) -> Result<()> {
        let violation = self.antisymmetry_violation();
        if violation == 0.0 {
            Ok(())
        } else {
            Err(Error::NotAntisymmetric { violation })
        }
    }
}

/// Full contraction `S_{μν} T^{μν}`.
pub fn contract2(lower: &CovTensor, upper: &Tensor2<Upper, Upper>) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            acc += lower.get(i, j) * upper.get(i, j);
        }
    }
    acc
}

/// Alternation of a potential gradient: `f_{μν} = A_{ν,μ} − A_{μ,ν}`.
///
/// `grad.get(ρ, σ)` holds `A_{ρ,σ}`. The result is antisymmetric bit for bit
/// since `f_{νμ}` is computed as the negation of the same difference.
#[allow(clippy::needless_range_loop)]
pub fn alternate(grad: &CovTensor) -> CovTensor {
    let mut c = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in (mu + 1)..4 {
            let v = grad.get(nu, mu) - grad.get(mu, nu);
            c[mu][nu] = v;
            c[nu][mu] = -v;
        }
    }
    CovTensor::new(c)
}

/// `a_μ b_ν − a_ν b_μ`
#[allow(clippy::needless_range_loop)]
pub fn wedge(a: &Covector, b: &Covector) -> CovTensor {
    let mut c = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in (mu + 1)..4 {
            let v = a.get(mu) * b.get(nu) - a.get(nu) * b.get(mu);
            c[mu][nu] = v;
            c[nu][mu] = -v;
        }
    }
    CovTensor::new(c)
}

/// A spacetime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub position: Vec3,
}

impl Event {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self {
            t,
            position: Vec3::new(x, y, z),
        }
    }

    pub fn at(t: f64, position: Vec3) -> Self {
        Self { t, position }
    }

    pub fn radius(&self) -> f64 {
        self.position.norm()
    }

    /// Unit vector `n = x/r`; `None` at the origin.
    pub fn direction(&self) -> Option<Vec3> {
        let r = self.radius();
        (r > 0.0).then(|| self.position / r)
    }

    pub fn shifted(&self, dt: f64, dx: Vec3) -> Self {
        Self {
            t: self.t + dt,
            position: self.position + dx,
        }
    }

    /// Moves along coordinate axis `axis` (0 = t, 1..3 = x, y, z) by `step`.
    pub fn shifted_along(&self, axis: usize, step: f64) -> Self {
        let mut out = *self;
        match axis {
            0 => out.t += step,
            1..=3 => out.position[axis - 1] += step,
            _ => panic!("coordinate axis {axis} out of range"),
        }
        out
    }
}

/// Which Green's function a solution (or a null direction) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Retarded,
    Advanced,
}

impl Orientation {
    /// Sign `s` in the emission time `t + s·R`: −1 retarded, +1 advanced.
    pub fn time_sign(self) -> f64 {
        match self {
            Orientation::Retarded => -1.0,
            Orientation::Advanced => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Retarded => Orientation::Advanced,
            Orientation::Advanced => Orientation::Retarded,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Retarded => f.write_str("retarded"),
            Orientation::Advanced => f.write_str("advanced"),
        }
    }
}

/// Spatial unit vector `n` with the null four-vector it generates:
/// `k^σ = (1, n)` retarded, `k^σ = (1, −n)` advanced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullDirection {
    n: Vec3,
    orientation: Orientation,
}

impl NullDirection {
    /// Normalizes `n`; fails for a zero or non-finite vector.
    pub fn new(n: Vec3, orientation: Orientation) -> Result<Self> {
        let len = n.norm();
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "null direction needs a non-zero spatial vector, got {:?}",
                n.as_slice()
            )));
        }
        Ok(Self {
            n: n / len,
            orientation,
        })
    }

    pub fn retarded(n: Vec3) -> Result<Self> {
        Self::new(n, Orientation::Retarded)
    }

    pub fn advanced(n: Vec3) -> Result<Self> {
        Self::new(n, Orientation::Advanced)
    }

    pub fn n(&self) -> Vec3 {
        self.n
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn with_orientation(&self, orientation: Orientation) -> Self {
        Self {
            n: self.n,
            orientation,
        }
    }

    /// Spatial part of `k^σ`: `n` or `−n`.
    pub fn spatial(&self) -> Vec3 {
        match self.orientation {
            Orientation::Retarded => self.n,
            Orientation::Advanced => -self.n,
        }
    }

    /// `k^σ`
    pub fn k_upper(&self) -> Vector {
        Vector::from_parts(1.0, &self.spatial())
    }

    /// `k_σ`
    pub fn k_lower(&self) -> Covector {
        self.k_upper().lower()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn raise_flips_spatial_components() {
        let v = Covector::new([1.0, 0.0, 0.0, -1.0]);
        assert_eq!(v.raise().components(), [1.0, 0.0, 0.0, 1.0]);
        assert_eq!(Covector::zero().raise().components(), [0.0; 4]);
        let w = Vector::new([0.3, -1.2, 7.0, 0.5]);
        assert_eq!(w.lower().raise(), w);
    }

    #[test]
    fn contraction_examples() {
        let e0 = Covector::new([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(contract(&e0, &Vector::new([1.0, 0.0, 0.0, 0.0])), 1.0);
        let b = Vector::new([1.0, 1.0, 0.0, 0.0]);
        assert_eq!(contract(&b.lower(), &b), 0.0);
        let k = NullDirection::retarded(Vec3::new(0.2, -0.7, 0.4)).unwrap();
        assert!(contract(&k.k_lower(), &k.k_upper()).abs() < 1e-12);
    }

    #[test]
    fn advanced_direction_flips_spatial_part() {
        let k = NullDirection::advanced(Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert_eq!(k.k_upper().components(), [1.0, 0.0, 0.0, -1.0]);
        assert_eq!(k.k_lower().components(), [1.0, 0.0, 0.0, 1.0]);
        assert!((k.n().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(NullDirection::retarded(Vec3::zeros()).is_err());
    }

    #[test]
    fn symmetric_gradient_alternates_to_zero() {
        let g = CovTensor::from_fn(|i, j| (i + j) as f64 * 0.5 + (i * j) as f64);
        assert_eq!(alternate(&g), CovTensor::zero());
    }

    #[test]
    fn outer_gradient_gives_wedge() {
        let b = Covector::new([0.0, 1.0, 0.0, 0.0]);
        let k = NullDirection::retarded(Vec3::new(0.0, 0.0, 1.0))
            .unwrap()
            .k_lower();
        let grad = CovTensor::outer(&b, &k);
        let f = alternate(&grad);
        assert_eq!(f, wedge(&k, &b));
        // f_{03} = k_0 B_3 − k_3 B_0 = 0, f_{13} = k_1 B_3 − k_3 B_1 = 1
        assert_eq!(f.get(1, 3), 1.0);
        assert_eq!(f.get(3, 1), -1.0);
    }

    #[test]
    fn metric_trace_and_index_moves() {
        let eta = CovTensor::metric();
        assert_eq!(eta.trace(), 4.0);
        let t = CovTensor::from_fn(|i, j| (1 + i * 4 + j) as f64);
        let mixed = t.raise_first();
        assert_eq!(mixed.get(0, 2), t.get(0, 2));
        assert_eq!(mixed.get(2, 0), -t.get(2, 0));
        assert_eq!(t.raise_both().get(1, 2), t.get(1, 2));
        assert_eq!(t.raise_both().get(0, 2), -t.get(0, 2));
    }

    fn finite() -> impl Strategy<Value = f64> {
        -1e6..1e6f64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn raise_lower_roundtrip(a in finite(), b in finite(), c in finite(), d in finite()) {
            let v = Covector::new([a, b, c, d]);
            let back = v.raise().lower();
            for i in 0..4 {
                prop_assert!((back.get(i) - v.get(i)).abs() <= 1e-14 * v.get(i).abs());
            }
        }
    }

    proptest! {
        #[test]
        fn null_direction_is_null(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64, adv in any::<bool>()) {
            prop_assume!(x * x + y * y + z * z > 1e-6);
            let o = if adv { Orientation::Advanced } else { Orientation::Retarded };
            let k = NullDirection::new(Vec3::new(x, y, z), o).unwrap();
            prop_assert!((k.n().norm() - 1.0).abs() < 1e-12);
            prop_assert!(k.k_upper().minkowski_square().abs() < 1e-12);
        }

        #[test]
        fn alternation_is_antisymmetric(vals in proptest::collection::vec(-1e3..1e3f64, 16)) {
            let g = CovTensor::from_fn(|i, j| vals[i * 4 + j]);
            let f = alternate(&g);
            prop_assert!(f.is_antisymmetric());
        }
    }
}
