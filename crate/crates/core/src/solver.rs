//! Retarded and advanced solutions by quadrature of the kernel
//! `ρ(x′, t ∓ R) / R`, `R = |x − x′|`.
//!
//! First derivatives are obtained by differentiating the kernel under the
//! integral sign, using the analytic `∂ρ/∂t` of the source:
//!
//! ```text
//! ∂_t φ = ∫ ρ̇ / R
//! ∂_s φ = ∫ [ s ρ̇ (x^s − x′^s)/R² − ρ (x^s − x′^s)/R³ ]
//! ```
//!
//! with `s = −1` for retarded and `s = +1` for advanced solutions. Far from
//! the source `∂φ ~ 1/r` while finite differences of `φ` would lose about
//! `log10 r` digits, so differencing is kept only as a test oracle and for
//! the second-derivative residual checks.

use crate::error::{Error, Result};
use crate::minkowski::{alternate, CovTensor, Covector, Event, Orientation, Vec3, Vector, METRIC_DIAG};
use crate::quadrature::{chunked_sum, Ball, Node, VolumeRule};
use crate::sources::{CurrentSource, ScalarSource};

/// Gradients need the event at least this many support radii from the centre.
pub const OUTSIDE_BUFFER: f64 = 1.01;
/// Nodes closer than this many support radii raise [`Error::NearSingularity`].
pub const NEAR_SINGULAR: f64 = 1e-9;
/// Default step for [`wave_residual`].
pub const WAVE_STEP: f64 = 1e-2;

/// Geometry of one kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGeometry {
    pub separation: f64,
    pub emission_time: f64,
    /// `(x − x′) / R`
    pub direction: Vec3,
}

impl KernelGeometry {
    #[inline]
    pub fn new(ev: &Event, source_point: &Vec3, orientation: Orientation, min_separation: f64) -> Result<Self> {
        let d = ev.position - source_point;
        let separation = d.norm();
        if separation < min_separation || separation == 0.0 {
            return Err(Error::NearSingularity {
                separation,
                limit: min_separation,
            });
        }
        Ok(Self {
            separation,
            emission_time: ev.t + orientation.time_sign() * separation,
            direction: d / separation,
        })
    }
}

/// `φ` and `φ_{,σ}` at one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: f64,
    pub gradient: Covector,
}

/// `A^μ`, `A_{ρ,σ}`, `f_{μν}` and `A^ν_{,ν}` at one event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSample {
    pub potential: Vector,
    /// `jacobian.get(ρ, σ) = A_{ρ,σ}`
    pub jacobian: CovTensor,
    /// Always `alternate(jacobian)`.
    pub field: CovTensor,
    pub lorenz: f64,
}

impl PotentialSample {
    pub fn from_parts(potential: Vector, jacobian: CovTensor) -> Self {
        let lorenz = (0..4).map(|i| METRIC_DIAG[i] * jacobian.get(i, i)).sum();
        Self {
            potential,
            jacobian,
            field: alternate(&jacobian),
            lorenz,
        }
    }

    /// `E^k = f^{k0} = f_{0k}`
    pub fn electric(&self) -> Vec3 {
        Vec3::new(self.field.get(0, 1), self.field.get(0, 2), self.field.get(0, 3))
    }

    /// `H^k = −½ ε_{kij} f_{ij}`
    pub fn magnetic(&self) -> Vec3 {
        Vec3::new(-self.field.get(2, 3), -self.field.get(3, 1), -self.field.get(1, 2))
    }
}

enum NodeSet<'a> {
    Mapped(&'a VolumeRule, Ball),
    Star(Vec<Node>),
}

impl NodeSet<'_> {
    fn len(&self) -> usize {
        match self {
            NodeSet::Mapped(rule, _) => rule.len(),
            NodeSet::Star(nodes) => nodes.len(),
        }
    }

    #[inline]
    fn get(&self, i: usize) -> Node {
        match self {
            NodeSet::Mapped(rule, ball) => rule.node_on(ball, i),
            NodeSet::Star(nodes) => nodes[i],
        }
    }
}

/// Whether `ev` is within `factor` support radii of the centre.
pub fn is_inside(support: &Ball, ev: &Event, factor: f64) -> bool {
    support.distance_to_center(&ev.position) <= factor * support.radius
}

fn require_outside(support: &Ball, ev: &Event) -> Result<()> {
    let distance = support.distance_to_center(&ev.position);
    let limit = OUTSIDE_BUFFER * support.radius;
    if distance <= limit {
        return Err(Error::InsideSupport {
            t: ev.t,
            x: ev.position.x,
            y: ev.position.y,
            z: ev.position.z,
            distance,
            limit,
        });
    }
    Ok(())
}

fn node_set<'a>(rule: &'a VolumeRule, support: Ball, ev: &Event) -> NodeSet<'a> {
    if support.contains(&ev.position) {
        NodeSet::Star(rule.star_nodes(&support, &ev.position))
    } else {
        NodeSet::Mapped(rule, support)
    }
}

/// `∫ ρ(x′, t ∓ R)/R dV′`.
///
/// Events inside the support are integrated in spherical coordinates
/// centred on the event, which removes the `1/R` singularity; accuracy there
/// is limited by the `C³` kink of the profile at the support boundary.
pub fn scalar_potential<S: ScalarSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<f64> {
    let support = src.support();
    let nodes = node_set(rule, support, ev);
    let min_sep = NEAR_SINGULAR * support.radius;
    let [v] = chunked_sum(nodes.len(), |i| {
        let node = nodes.get(i);
        let k = KernelGeometry::new(ev, &node.point, orientation, min_sep)?;
        Ok([node.weight * src.density(&node.point, k.emission_time) / k.separation])
    })?;
    Ok(v)
}

/// `φ` and `φ_{,σ}` together. Requires the event outside the support.
pub fn scalar_sample<S: ScalarSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<FieldSample> {
    let support = src.support();
    require_outside(&support, ev)?;
    let s = orientation.time_sign();
    let min_sep = NEAR_SINGULAR * support.radius;
    let [v, g0, g1, g2, g3] = chunked_sum(rule.len(), |i| {
        let node = rule.node_on(&support, i);
        let k = KernelGeometry::new(ev, &node.point, orientation, min_sep)?;
        let (rho, rho_dot) = src.density_and_rate(&node.point, k.emission_time);
        let inv_r = 1.0 / k.separation;
        let w = node.weight * inv_r;
        // d/dx^s of ρ(t + sR)/R, with ∂R/∂x^s = direction_s
        let radial = w * (s * rho_dot - rho * inv_r);
        Ok([
            w * rho,
            w * rho_dot,
            radial * k.direction.x,
            radial * k.direction.y,
            radial * k.direction.z,
        ])
    })?;
    Ok(FieldSample {
        value: v,
        gradient: Covector::new([g0, g1, g2, g3]),
    })
}

/// `φ_{,σ}` by analytic differentiation of the kernel.
pub fn scalar_gradient<S: ScalarSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<Covector> {
    scalar_sample(src, ev, orientation, rule).map(|s| s.gradient)
}

/// `A^μ` alone; allowed anywhere, including inside the support.
pub fn vector_potential_value<S: CurrentSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<Vector> {
    let support = src.support();
    let nodes = node_set(rule, support, ev);
    let min_sep = NEAR_SINGULAR * support.radius;
    let a = chunked_sum(nodes.len(), |i| {
        let node = nodes.get(i);
        let k = KernelGeometry::new(ev, &node.point, orientation, min_sep)?;
        let w = node.weight / k.separation;
        Ok(src.current(&node.point, k.emission_time).map(|j| w * j))
    })?;
    Ok(Vector::new(a))
}

/// Full potential sample. Requires the event outside the support.
pub fn vector_potential<S: CurrentSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<PotentialSample> {
    let support = src.support();
    require_outside(&support, ev)?;
    let s = orientation.time_sign();
    let min_sep = NEAR_SINGULAR * support.radius;
    // layout: [A^0..A^3, ∂_0 A^0..∂_0 A^3, ∂_1 A^0.., ∂_2 A^0.., ∂_3 A^0..]
    let sums: [f64; 20] = chunked_sum(rule.len(), |i| {
        let node = rule.node_on(&support, i);
        let k = KernelGeometry::new(ev, &node.point, orientation, min_sep)?;
        let (j, jdot) = src.current_and_rate(&node.point, k.emission_time);
        let inv_r = 1.0 / k.separation;
        let w = node.weight * inv_r;
        let mut out = [0.0; 20];
        for mu in 0..4 {
            out[mu] = w * j[mu];
            out[4 + mu] = w * jdot[mu];
            let radial = w * (s * jdot[mu] - j[mu] * inv_r);
            out[8 + mu] = radial * k.direction.x;
            out[12 + mu] = radial * k.direction.y;
            out[16 + mu] = radial * k.direction.z;
        }
        Ok(out)
    })?;
    let potential = Vector::new([sums[0], sums[1], sums[2], sums[3]]);
    let jacobian = CovTensor::from_fn(|rho, sigma| METRIC_DIAG[rho] * sums[4 + 4 * sigma + rho]);
    Ok(PotentialSample::from_parts(potential, jacobian))
}

fn second_difference(f: impl Fn(&Event) -> Result<f64>, ev: &Event, h: f64) -> Result<f64> {
    let centre = f(ev)?;
    let mut box_op = 0.0;
    for axis in 0..4 {
        let plus = f(&ev.shifted_along(axis, h))?;
        let minus = f(&ev.shifted_along(axis, -h))?;
        let d2 = (plus + minus - 2.0 * centre) / (h * h);
        // Δφ − ∂²φ/∂t²
        box_op += if axis == 0 { -d2 } else { d2 };
    }
    Ok(box_op)
}

/// `|Δφ − ∂²φ/∂t²|` from second central differences of [`scalar_potential`]
/// with step [`WAVE_STEP`]. Zero outside the support, `4πρ` inside.
pub fn wave_residual<S: ScalarSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<f64> {
    wave_residual_with_step(src, ev, orientation, rule, WAVE_STEP)
}

pub fn wave_residual_with_step<S: ScalarSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
    h: f64,
) -> Result<f64> {
    second_difference(|e| scalar_potential(src, e, orientation, rule), ev, h).map(f64::abs)
}

/// Largest `|□A^μ|` over the four components.
pub fn vector_wave_residual<S: CurrentSource + ?Sized>(
    src: &S,
    ev: &Event,
    orientation: Orientation,
    rule: &VolumeRule,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for mu in 0..4 {
        let r = second_difference(
            |e| vector_potential_value(src, e, orientation, rule).map(|a| a.get(mu)),
            ev,
            WAVE_STEP,
        )?;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Gauge function `χ = c · sin(ω u) / r`, `u = t ∓ r` (outgoing for retarded).
///
/// `χ` solves the homogeneous wave equation away from the origin, so the
/// shift `A_μ → A_μ + χ_{,μ}` preserves the Lorenz condition and leaves
/// `f_{μν}` untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeShift {
    pub amplitude: f64,
    pub omega: f64,
    pub orientation: Orientation,
}

impl GaugeShift {
    pub fn new(amplitude: f64, omega: f64, orientation: Orientation) -> Self {
        Self {
            amplitude,
            omega,
            orientation,
        }
    }

    /// `(χ_{,μ}, χ_{,μν})` at `ev`; `ev` must not be at the origin.
    pub fn derivatives(&self, ev: &Event) -> (Covector, CovTensor) {
        let r = ev.radius();
        let n = ev.position / r;
        let s = self.orientation.time_sign();
        let c = self.amplitude;
        let (sin, cos) = (self.omega * (ev.t + s * r)).sin_cos();
        let (g, g1, g2) = (sin, self.omega * cos, -self.omega * self.omega * sin);

        let h = s * g1 / r - g / (r * r);
        let dh = g2 / r - 2.0 * s * g1 / (r * r) + 2.0 * g / (r * r * r);
        let grad = Covector::from_parts(c * g1 / r, &(n * (c * h)));
        let ht = c * (s * g2 / r - g1 / (r * r));
        let hess = CovTensor::from_fn(|mu, nu| match (mu, nu) {
            (0, 0) => c * g2 / r,
            (0, j) | (j, 0) => ht * n[j - 1],
            (i, j) => {
                let (ni, nj) = (n[i - 1], n[j - 1]);
                let delta = if i == j { 1.0 } else { 0.0 };
                c * ((delta - ni * nj) * h / r + ni * nj * dh)
            }
        });
        (grad, hess)
    }

    pub fn apply(&self, sample: &PotentialSample, ev: &Event) -> PotentialSample {
        let (grad, hess) = self.derivatives(ev);
        PotentialSample::from_parts(sample.potential + grad.raise(), sample.jacobian + hess)
    }
}
