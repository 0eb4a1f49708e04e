//! Compactly supported sources: scalar densities `ρ` and four-currents `j^μ`.
//!
//! Every built-in source is a smooth bump `w_a` (support radius `a`) times a
//! time signal. Time derivatives are analytic, because the retarded kernel
//! needs `∂ρ/∂t` at the emission time of every quadrature node.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::minkowski::Vec3;
use crate::quadrature::{chunked_sum, Ball, VolumeRule};

/// `w_a(s) = C_a (1 − (s/a)²)⁴` for `s < a`, zero outside, with `∫ w_a dV = 1`.
///
/// `∫₀¹ s²(1 − s²)⁴ ds = 128/3465`, hence `C_a = 3465 / (512 π a³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    radius: f64,
    norm: f64,
}

impl BumpProfile {
    pub fn new(radius: f64) -> Self {
        Self {
            radius,
            norm: 3465.0 / (512.0 * PI * radius.powi(3)),
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Peak value `C_a`.
    pub fn peak(&self) -> f64 {
        self.norm
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        let u = s / self.radius;
        if u >= 1.0 {
            return 0.0;
        }
        let v = 1.0 - u * u;
        let v2 = v * v;
        self.norm * v2 * v2
    }

    /// `∇w_a` at offset `d` from the centre.
    #[inline]
    pub fn gradient(&self, d: &Vec3) -> Vec3 {
        let a2 = self.radius * self.radius;
        let v = 1.0 - d.norm_squared() / a2;
        if v <= 0.0 {
            return Vec3::zeros();
        }
        d * (-8.0 * self.norm / a2 * v * v * v)
    }
}

/// Time dependence of a source amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Signal {
    Constant(f64),
    /// `amplitude · sin(ω t)`
    Sine { amplitude: f64, omega: f64 },
}

impl Signal {
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Signal::Constant(q) => q,
            Signal::Sine { amplitude, omega } => amplitude * (omega * t).sin(),
        }
    }

    #[inline]
    pub fn rate(&self, t: f64) -> f64 {
        match *self {
            Signal::Constant(_) => 0.0,
            Signal::Sine { amplitude, omega } => amplitude * omega * (omega * t).cos(),
        }
    }

    #[inline]
    pub fn second_rate(&self, t: f64) -> f64 {
        match *self {
            Signal::Constant(_) => 0.0,
            Signal::Sine { amplitude, omega } => -amplitude * omega * omega * (omega * t).sin(),
        }
    }

    /// `(value, rate, second_rate)` sharing one `sin`/`cos` evaluation.
    #[inline]
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Signal::Constant(q) => (q, 0.0, 0.0),
            Signal::Sine { amplitude, omega } => {
                let (s, c) = (omega * t).sin_cos();
                (
                    amplitude * s,
                    amplitude * omega * c,
                    -amplitude * omega * omega * s,
                )
            }
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match *self {
            Signal::Constant(_) => None,
            Signal::Sine { omega, .. } => Some(omega),
        }
    }
}

/// A scalar density `ρ(x, t)` supported in a ball.
pub trait ScalarSource: Send + Sync {
    fn density(&self, x: &Vec3, t: f64) -> f64;
    fn density_rate(&self, x: &Vec3, t: f64) -> f64;

    /// `(ρ, ∂ρ/∂t)`
    fn density_and_rate(&self, x: &Vec3, t: f64) -> (f64, f64) {
        (self.density(x, t), self.density_rate(x, t))
    }

    fn support(&self) -> Ball;

    /// Angular frequency of the fastest component, `None` when static.
    fn frequency(&self) -> Option<f64> {
        None
    }
}

/// A four-current `j^μ(x, t)` supported in a ball.
pub trait CurrentSource: Send + Sync {
    fn current(&self, x: &Vec3, t: f64) -> [f64; 4];
    fn current_rate(&self, x: &Vec3, t: f64) -> [f64; 4];

    fn current_and_rate(&self, x: &Vec3, t: f64) -> ([f64; 4], [f64; 4]) {
        (self.current(x, t), self.current_rate(x, t))
    }

    fn support(&self) -> Ball;

    fn frequency(&self) -> Option<f64> {
        None
    }
}

impl<S: ScalarSource + ?Sized> ScalarSource for Box<S> {
    fn density(&self, x: &Vec3, t: f64) -> f64 {
        (**self).density(x, t)
    }
    fn density_rate(&self, x: &Vec3, t: f64) -> f64 {
        (**self).density_rate(x, t)
    }
    fn density_and_rate(&self, x: &Vec3, t: f64) -> (f64, f64) {
        (**self).density_and_rate(x, t)
    }
    fn support(&self) -> Ball {
        (**self).support()
    }
    fn frequency(&self) -> Option<f64> {
        (**self).frequency()
    }
}

impl<S: CurrentSource + ?Sized> CurrentSource for Box<S> {
    fn current(&self, x: &Vec3, t: f64) -> [f64; 4] {
        (**self).current(x, t)
    }
    fn current_rate(&self, x: &Vec3, t: f64) -> [f64; 4] {
        (**self).current_rate(x, t)
    }
    fn current_and_rate(&self, x: &Vec3, t: f64) -> ([f64; 4], [f64; 4]) {
        (**self).current_and_rate(x, t)
    }
    fn support(&self) -> Ball {
        (**self).support()
    }
    fn frequency(&self) -> Option<f64> {
        (**self).frequency()
    }
}

/// Spherically symmetric density `q(t) · w_a(|x − c|)`.
///
/// As a [`CurrentSource`] it is a pure charge density (`j⁰ = ρ`, `j⃗ = 0`),
/// which conserves charge only when the signal is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monopole {
    pub center: Vec3,
    pub profile: BumpProfile,
    pub signal: Signal,
}

impl Monopole {
    pub fn with_center(mut self, center: Vec3) -> Self {
        self.center = center;
        self
    }
}

impl ScalarSource for Monopole {
    #[inline]
    fn density(&self, x: &Vec3, t: f64) -> f64 {
        let w = self.profile.value((x - self.center).norm());
        if w == 0.0 {
            return 0.0;
        }
        self.signal.value(t) * w
    }

    #[inline]
    fn density_rate(&self, x: &Vec3, t: f64) -> f64 {
        let w = self.profile.value((x - self.center).norm());
        if w == 0.0 {
            return 0.0;
        }
        self.signal.rate(t) * w
    }

    #[inline]
    fn density_and_rate(&self, x: &Vec3, t: f64) -> (f64, f64) {
        let w = self.profile.value((x - self.center).norm());
        if w == 0.0 {
            return (0.0, 0.0);
        }
        let (q, qdot, _) = self.signal.jet(t);
        (q * w, qdot * w)
    }

    fn support(&self) -> Ball {
        Ball::new(self.center, self.profile.radius())
    }

    fn frequency(&self) -> Option<f64> {
        self.signal.omega()
    }
}

impl CurrentSource for Monopole {
    fn current(&self, x: &Vec3, t: f64) -> [f64; 4] {
        [self.density(x, t), 0.0, 0.0, 0.0]
    }

    fn current_rate(&self, x: &Vec3, t: f64) -> [f64; 4] {
        [self.density_rate(x, t), 0.0, 0.0, 0.0]
    }

    fn current_and_rate(&self, x: &Vec3, t: f64) -> ([f64; 4], [f64; 4]) {
        let (r, rdot) = self.density_and_rate(x, t);
        ([r, 0.0, 0.0, 0.0], [rdot, 0.0, 0.0, 0.0])
    }

    fn support(&self) -> Ball {
        ScalarSource::support(self)
    }

    fn frequency(&self) -> Option<f64> {
        self.signal.omega()
    }
}

/// Mollified Hertzian dipole with moment `p(t) · axis`:
/// `j⃗ = ṗ w_a axis`, `j⁰ = −p (axis·∇) w_a`. Conserves charge identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dipole {
    pub center: Vec3,
    pub profile: BumpProfile,
    pub moment: Signal,
    pub axis: Vec3,
}

impl Dipole {
    pub fn with_center(mut self, center: Vec3) -> Self {
        self.center = center;
        self
    }
}

impl CurrentSource for Dipole {
    fn current(&self, x: &Vec3, t: f64) -> [f64; 4] {
        self.current_and_rate(x, t).0
    }

    fn current_rate(&self, x: &Vec3, t: f64) -> [f64; 4] {
        self.current_and_rate(x, t).1
    }

    #[inline]
    fn current_and_rate(&self, x: &Vec3, t: f64) -> ([f64; 4], [f64; 4]) {
        let d = x - self.center;
        let w = self.profile.value(d.norm());
        if w == 0.0 {
            return ([0.0; 4], [0.0; 4]);
        }
        let dw = self.axis.dot(&self.profile.gradient(&d));
        let (p, pdot, pddot) = self.moment.jet(t);
        let a = self.axis;
        (
            [-p * dw, pdot * w * a.x, pdot * w * a.y, pdot * w * a.z],
            [-pdot * dw, pddot * w * a.x, pddot * w * a.y, pddot * w * a.z],
        )
    }

    fn support(&self) -> Ball {
        Ball::new(self.center, self.profile.radius())
    }

    fn frequency(&self) -> Option<f64> {
        self.moment.omega()
    }
}

/// Sum of sources. The support is a ball around the first part's centre
/// that encloses every part.
#[derive(Debug, Clone, Default)]
pub struct Superposition<S> {
    pub parts: Vec<S>,
}

impl<S> Superposition<S> {
    pub fn new(parts: Vec<S>) -> Self {
        Self { parts }
    }
}

fn max_frequency(it: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    it.flatten().fold(None, |m, w| Some(m.map_or(w, |m: f64| m.max(w))))
}

impl<S: ScalarSource> ScalarSource for Superposition<S> {
    fn density(&self, x: &Vec3, t: f64) -> f64 {
        self.parts.iter().map(|s| s.density(x, t)).sum()
    }
    fn density_rate(&self, x: &Vec3, t: f64) -> f64 {
        self.parts.iter().map(|s| s.density_rate(x, t)).sum()
    }
    fn density_and_rate(&self, x: &Vec3, t: f64) -> (f64, f64) {
        self.parts.iter().fold((0.0, 0.0), |(a, b), s| {
            let (r, rd) = s.density_and_rate(x, t);
            (a + r, b + rd)
        })
    }
    fn support(&self) -> Ball {
        enclosing(self.parts.iter().map(|p| p.support()))
    }
    fn frequency(&self) -> Option<f64> {
        max_frequency(self.parts.iter().map(|p| p.frequency()))
    }
}

impl<S: CurrentSource> CurrentSource for Superposition<S> {
    fn current(&self, x: &Vec3, t: f64) -> [f64; 4] {
        self.current_and_rate(x, t).0
    }
    fn current_rate(&self, x: &Vec3, t: f64) -> [f64; 4] {
        self.current_and_rate(x, t).1
    }
    fn current_and_rate(&self, x: &Vec3, t: f64) -> ([f64; 4], [f64; 4]) {
        let mut j = [0.0; 4];
        let mut jd = [0.0; 4];
        for p in &self.parts {
            let (a, b) = p.current_and_rate(x, t);
            for k in 0..4 {
                j[k] += a[k];
                jd[k] += b[k];
            }
        }
        (j, jd)
    }
    fn support(&self) -> Ball {
        enclosing(self.parts.iter().map(|p| p.support()))
    }
    fn frequency(&self) -> Option<f64> {
        max_frequency(self.parts.iter().map(|p| p.frequency()))
    }
}

fn enclosing(mut balls: impl Iterator<Item = Ball>) -> Ball {
    let first = balls.next().unwrap_or(Ball::centered(0.0));
    balls.fold(first, |acc, b| acc.enclosing(&b))
}

pub fn static_monopole(charge: f64, radius: f64) -> Monopole {
    Monopole {
        center: Vec3::zeros(),
        profile: BumpProfile::new(radius),
        signal: Signal::Constant(charge),
    }
}

pub fn oscillating_monopole(amplitude: f64, omega: f64, radius: f64) -> Monopole {
    Monopole {
        center: Vec3::zeros(),
        profile: BumpProfile::new(radius),
        signal: Signal::Sine { amplitude, omega },
    }
}

pub fn static_charge(charge: f64, radius: f64) -> Monopole {
    static_monopole(charge, radius)
}

/// `axis` is normalized; fails for a zero axis.
pub fn hertzian_dipole(moment: f64, omega: f64, radius: f64, axis: Vec3) -> Result<Dipole> {
    let len = axis.norm();
    if !(len.is_finite() && len > 0.0) {
        return Err(Error::InvalidParameter("dipole axis must be non-zero".into()));
    }
    Ok(Dipole {
        center: Vec3::zeros(),
        profile: BumpProfile::new(radius),
        moment: Signal::Sine {
            amplitude: moment,
            omega,
        },
        axis: axis / len,
    })
}

/// `∫ j⁰ dV` at time `t`.
pub fn total_charge<S: CurrentSource + ?Sized>(src: &S, t: f64, rule: &VolumeRule) -> Result<f64> {
    let ball = src.support();
    let [q] = chunked_sum(rule.len(), |i| {
        let n = rule.node_on(&ball, i);
        Ok([n.weight * src.current(&n.point, t)[0]])
    })?;
    Ok(q)
}

/// `∫ ρ dV` at time `t`.
pub fn total_density<S: ScalarSource + ?Sized>(src: &S, t: f64, rule: &VolumeRule) -> Result<f64> {
    let ball = src.support();
    let [q] = chunked_sum(rule.len(), |i| {
        let n = rule.node_on(&ball, i);
        Ok([n.weight * src.density(&n.point, t)])
    })?;
    Ok(q)
}

/// `max |∂_t j⁰ + ∇·j⃗|` over the nodes of `rule`, divided by `max |j| / a`.
///
/// The divergence uses a fourth-order central stencil with step `a/200`.
pub fn continuity_residual<S: CurrentSource + ?Sized>(src: &S, t: f64, rule: &VolumeRule) -> f64 {
    let ball = src.support();
    let h = ball.radius / 200.0;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..rule.len() {
        let p = rule.node_on(&ball, i).point;
        let (j, jdot) = src.current_and_rate(&p, t);
        scale = scale.max(j.iter().map(|c| c * c).sum::<f64>().sqrt());
        let mut div = 0.0;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let jk = |q: Vec3| src.current(&q, t)[k + 1];
            div += (-jk(p + 2.0 * e) + 8.0 * jk(p + e) - 8.0 * jk(p - e) + jk(p - 2.0 * e)) / (12.0 * h);
        }
        worst = worst.max((jdot[0] + div).abs());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / (scale / ball.radius)
    }
}
