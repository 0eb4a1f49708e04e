//! Product quadrature over balls and spheres.
//!
//! Both rules use Gauss–Legendre in `cos θ` and the uniform trapezoid rule in
//! azimuth; the volume rule adds Gauss–Legendre in radius with the `r²`
//! Jacobian folded into the weights. Node sets are built once and reused.
//!
//! Sums run over fixed-size chunks of nodes. Chunks may be evaluated on any
//! number of worker threads, but the chunk partials are always combined in
//! the same pairwise order, so results are bit-identical regardless of the
//! thread count.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::Vec3;

pub const MIN_ORDER: usize = 2;
const CHUNK: usize = 256;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
///
/// The node set is symmetric bit for bit (`x[n−1−i] == −x[i]`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th root from the top
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature orders for the product rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOrders {
    pub radial: usize,
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        Self {
            radial: 24,
            polar: 24,
            azimuthal: 48,
        }
    }
}

impl QuadratureOrders {
    pub fn new(radial: usize, polar: usize, azimuthal: usize) -> Self {
        Self {
            radial,
            polar,
            azimuthal,
        }
    }

    /// Every order multiplied by `factor`, rounded to the nearest integer.
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |n: usize| ((n as f64) * factor).round().max(1.0) as usize;
        Self::new(s(self.radial), s(self.polar), s(self.azimuthal))
    }

    fn validate(&self) -> Result<()> {
        for (what, got) in [
            ("radial order", self.radial),
            ("polar order", self.polar),
            ("azimuthal order", self.azimuthal),
        ] {
            if got < MIN_ORDER {
                return Err(Error::Resolution {
                    what,
                    got,
                    min: MIN_ORDER,
                });
            }
        }
        Ok(())
    }
}

/// A closed ball, the support of every built-in source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Vec3,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        Self::new(Vec3::zeros(), radius)
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    pub fn distance_to_center(&self, p: &Vec3) -> f64 {
        (p - self.center).norm()
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.distance_to_center(p) < self.radius
    }

    /// Smallest ball centred at the first ball's centre that contains both.
    pub fn enclosing(&self, other: &Ball) -> Ball {
        let reach = (other.center - self.center).norm() + other.radius;
        Ball::new(self.center, self.radius.max(reach))
    }
}

#[derive(Debug, Clone)]
struct AngularNode {
    direction: Vec3,
    weight: f64,
}

fn angular_nodes(polar: usize, azimuthal: usize) -> Vec<AngularNode> {
    let (mu, wmu) = gauss_legendre(polar);
    let dphi = 2.0 * PI / azimuthal as f64;
    let mut out = Vec::with_capacity(polar * azimuthal);
    for (&c, &wc) in mu.iter().zip(&wmu) {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for j in 0..azimuthal {
            let phi = (j as f64 + 0.5) * dphi;
            out.push(AngularNode {
                direction: Vec3::new(s * phi.cos(), s * phi.sin(), c),
                weight: wc * dphi,
            });
        }
    }
    out
}

/// One quadrature node: position and weight (Jacobian included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub point: Vec3,
    pub weight: f64,
}

/// Product rule over the unit ball; map onto any [`Ball`] with [`VolumeRule::node_on`].
#[derive(Debug, Clone)]
pub struct VolumeRule {
    orders: QuadratureOrders,
    nodes: Vec<Node>,
    radial: (Vec<f64>, Vec<f64>),
    angular: Vec<AngularNode>,
}

impl VolumeRule {
    pub fn new(orders: QuadratureOrders) -> Result<Self> {
        orders.validate()?;
        let (x, w) = gauss_legendre(orders.radial);
        let angular = angular_nodes(orders.polar, orders.azimuthal);
        let mut nodes = Vec::with_capacity(orders.radial * angular.len());
        for (&xi, &wi) in x.iter().zip(&w) {
            // map [−1, 1] → [0, 1]
            let s = 0.5 * (xi + 1.0);
            let ws = 0.5 * wi * s * s;
            for a in &angular {
                nodes.push(Node {
                    point: a.direction * s,
                    weight: ws * a.weight,
                });
            }
        }
        Ok(Self {
            orders,
            nodes,
            radial: (x, w),
            angular,
        })
    }

    pub fn orders(&self) -> QuadratureOrders {
        self.orders
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Unit-ball nodes.
    pub fn unit_nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Node `i` mapped onto `ball`.
    #[inline]
    pub fn node_on(&self, ball: &Ball, i: usize) -> Node {
        let n = &self.nodes[i];
        let a = ball.radius;
        Node {
            point: ball.center + n.point * a,
            weight: n.weight * a * a * a,
        }
    }

    /// Nodes of the same orders, but in spherical coordinates centred on
    /// `origin` (which must lie inside `ball`). Each ray runs from `origin`
    /// to the ball surface, and the weights carry the `R²` Jacobian, so an
    /// integrand with a `1/R` singularity at `origin` stays smooth.
    pub fn star_nodes(&self, ball: &Ball, origin: &Vec3) -> Vec<Node> {
        let d0 = origin - ball.center;
        let d0sq = d0.norm_squared();
        let a2 = ball.radius * ball.radius;
        let (x, w) = &self.radial;
        let mut out = Vec::with_capacity(self.nodes.len());
        for ang in &self.angular {
            let b = ang.direction.dot(&d0);
            let reach = -b + (b * b - d0sq + a2).max(0.0).sqrt();
            for (&xi, &wi) in x.iter().zip(w) {
                let r = 0.5 * reach * (xi + 1.0);
                out.push(Node {
                    point: origin + ang.direction * r,
                    weight: ang.weight * 0.5 * reach * wi * r * r,
                });
            }
        }
        out
    }
}

/// Product rule on the sphere of radius `radius` centred at the origin.
#[derive(Debug, Clone)]
pub struct SphereRule {
    radius: f64,
    polar: usize,
    azimuthal: usize,
    nodes: Vec<Node>,
}

impl SphereRule {
    pub fn new(radius: f64, polar: usize, azimuthal: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        for (what, got) in [("polar order", polar), ("azimuthal order", azimuthal)] {
            if got < MIN_ORDER {
                return Err(Error::Resolution {
                    what,
                    got,
                    min: MIN_ORDER,
                });
            }
        }
        let r2 = radius * radius;
        let nodes = angular_nodes(polar, azimuthal)
            .into_iter()
            .map(|a| Node {
                point: a.direction,
                weight: a.weight * r2,
            })
            .collect();
        Ok(Self {
            radius,
            polar,
            azimuthal,
            nodes,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn polar(&self) -> usize {
        self.polar
    }

    pub fn azimuthal(&self) -> usize {
        self.azimuthal
    }

    /// Unit directions with area weights (`r²` included).
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(radius, self.polar, self.azimuthal)
    }
}

/// Deterministic sum of `K` weighted quantities over `n` nodes.
///
/// `term(i)` must already include the node weight.
pub fn chunked_sum<const K: usize, F>(n: usize, term: F) -> Result<[f64; K]>
where
    F: Fn(usize) -> Result<[f64; K]> + Sync,
{
    let n_chunks = n.div_ceil(CHUNK);
    let partials: Vec<[f64; K]> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; K];
            for i in (c * CHUNK)..((c + 1) * CHUNK).min(n) {
                let v = term(i)?;
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(pairwise(&partials))
}

fn pairwise<const K: usize>(items: &[[f64; K]]) -> [f64; K] {
    match items.len() {
        0 => [0.0; K],
        1 => items[0],
        len => {
            let (l, r) = items.split_at(len / 2);
            let (a, b) = (pairwise(l), pairwise(r));
            let mut out = a;
            for (o, x) in out.iter_mut().zip(b) {
                *o += x;
            }
            out
        }
    }
}

fn check_finite(v: f64, p: &Vec3) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            x: p.x,
            y: p.y,
            z: p.z,
        })
    }
}

/// `∫_ball f dV`
pub fn integrate_volume<F>(f: F, rule: &VolumeRule, ball: &Ball) -> Result<f64>
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let [v] = chunked_sum(rule.len(), |i| {
        let node = rule.node_on(ball, i);
        Ok([node.weight * check_finite(f(&node.point), &node.point)?])
    })?;
    Ok(v)
}

/// `∮ g(n) dS` over the sphere of `rule`; `g` receives the unit direction.
pub fn integrate_sphere<F>(g: F, rule: &SphereRule) -> Result<f64>
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let [v] = chunked_sum(rule.nodes.len(), |i| {
        let node = &rule.nodes[i];
        Ok([node.weight * check_finite(g(&node.point), &node.point)?])
    })?;
    Ok(v)
}

/// A volume integral with a self-convergence error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// `|I(N) − I(N/2)|`, floored at `1e−14·|I(N)|`.
    pub error: f64,
}

pub fn integrate_volume_estimated<F>(f: F, orders: QuadratureOrders, ball: &Ball) -> Result<Estimate>
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    let fine = integrate_volume(&f, &VolumeRule::new(orders)?, ball)?;
    let half = QuadratureOrders::new(
        (orders.radial / 2).max(MIN_ORDER),
        (orders.polar / 2).max(MIN_ORDER),
        (orders.azimuthal / 2).max(MIN_ORDER),
    );
    let coarse = integrate_volume(&f, &VolumeRule::new(half)?, ball)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs().max(1e-14 * fine.abs()),
    })
}
