//! Stress-energy tensors, radiated fluxes through a sphere, and the
//! Gauss-law charge.
//!
//! Scalar field: with `L = −η^{ρσ} φ_{,ρ} φ_{,σ} / 8π` and
//! `T^ν{}_μ = L δ^ν{}_μ − φ_{,μ} ∂L/∂φ_{,ν}`, one has
//! `∂L/∂φ_{,ν} = −φ^{,ν}/4π`, hence
//!
//! ```text
//! T_{μν} = L η_{μν} + φ_{,μ} φ_{,ν} / 4π
//! ```
//!
//! Electromagnetic field: `4π T_{μν} = ¼ η_{μν} f_{ρσ} f^{ρσ} − f_{μρ} f_ν{}^ρ`.
//!
//! The flux through a sphere of radius `r` is `W_μ = ∮ T^s{}_μ n^s dS`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{extract_b, amplitude_psi, ScalarAsymptotics};
use crate::error::Result;
use crate::minkowski::{contract2, CovTensor, Covector, Event, NullDirection, Orientation, Vec3, METRIC_DIAG};
use crate::quadrature::{chunked_sum, SphereRule, VolumeRule};
use crate::solver::{scalar_gradient, vector_potential, GaugeShift};
use crate::sources::{CurrentSource, ScalarSource};

/// Covariant `T_{μν}`, plus `L` for the scalar field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressTensor {
    pub components: CovTensor,
    pub lagrangian: Option<f64>,
}

pub fn scalar_stress(grad: &Covector) -> StressTensor {
    let lagrangian = -grad.minkowski_square() / (8.0 * PI);
    let components =
        CovTensor::from_fn(|mu, nu| {
            let eta = if mu == nu { METRIC_DIAG[mu] } else { 0.0 };
            lagrangian * eta + grad.get(mu) * grad.get(nu) / (4.0 * PI)
        });
    StressTensor {
        components,
        lagrangian: Some(lagrangian),
    }
}

/// Fails unless `f` is exactly antisymmetric.
pub fn em_stress(f: &CovTensor) -> Result<StressTensor> {
    f.validate_antisymmetric()?;
    let invariant = contract2(f, &f.raise_both());
    let mixed = f.raise_second();
    let components = CovTensor::from_fn(|mu, nu| {
        let eta = if mu == nu { METRIC_DIAG[mu] } else { 0.0 };
        let ff: f64 = (0..4).map(|rho| f.get(mu, rho) * mixed.get(nu, rho)).sum();
        (0.25 * eta * invariant - ff) / (4.0 * PI)
    });
    Ok(StressTensor {
        components,
        lagrangian: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxMethod {
    ExactIntegrand,
    AsymptoticAmplitude,
}

/// Energy (`W₀`) and momentum (`W_s`) per unit time through a sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxVector {
    pub w: Covector,
    pub radius: f64,
    pub method: FluxMethod,
}

/// `W_μ = ∮ T^s{}_μ n^s dS = −∮ T_{sμ} n^s dS`.
///
/// `field_at` receives the node index and unit direction of each sphere node.
pub fn flux<F>(field_at: F, sphere: &SphereRule) -> Result<FluxVector>
where
    F: Fn(usize, &Vec3) -> Result<StressTensor> + Sync,
{
    let nodes = sphere.nodes();
    let w = chunked_sum(nodes.len(), |i| {
        let node = &nodes[i];
        let t = field_at(i, &node.point)?.components;
        let mut out = [0.0; 4];
        for (mu, o) in out.iter_mut().enumerate() {
            let tn: f64 = (0..3).map(|s| t.get(s + 1, mu) * node.point[s]).sum();
            *o = -node.weight * tn;
        }
        Ok(out)
    })?;
    Ok(FluxVector {
        w: Covector::new(w),
        radius: sphere.radius(),
        method: FluxMethod::ExactIntegrand,
    })
}

/// Flux from the asymptotic form `4π T_{μν} ≈ κ k_μ k_ν`, where `κ = ψ̂²`
/// for the scalar field and `κ = −B̂_ρB̂^ρ` for Maxwell:
/// `W_μ = −(1/4π) ∮ κ k_μ (k_s n^s) dS`, i.e. `(1/4π) ∮ κ k_μ dS` for
/// retarded `k`.
pub fn asymptotic_flux<F>(null_energy_at: F, orientation: Orientation, sphere: &SphereRule) -> Result<FluxVector>
where
    F: Fn(usize, &Vec3) -> Result<f64> + Sync,
{
    let nodes = sphere.nodes();
    let w = chunked_sum(nodes.len(), |i| {
        let node = &nodes[i];
        let kappa = null_energy_at(i, &node.point)?;
        let k = NullDirection::new(node.point, orientation)?.k_lower();
        let kn: f64 = (0..3).map(|s| k.get(s + 1) * node.point[s]).sum();
        let mut out = [0.0; 4];
        for (mu, o) in out.iter_mut().enumerate() {
            *o = -node.weight * kappa * k.get(mu) * kn / (4.0 * PI);
        }
        Ok(out)
    })?;
    Ok(FluxVector {
        w: Covector::new(w),
        radius: sphere.radius(),
        method: FluxMethod::AsymptoticAmplitude,
    })
}

/// Exact and asymptotic flux of a scalar solution through the sphere of
/// `sphere`, every node evaluated at the same time `t`.
pub fn scalar_flux<S: ScalarSource + ?Sized>(
    src: &S,
    solution: Orientation,
    t: f64,
    sphere: &SphereRule,
    rule: &VolumeRule,
) -> Result<(FluxVector, FluxVector)> {
    let r = sphere.radius();
    let grads: Vec<Covector> = sphere
        .nodes()
        .par_iter()
        .map(|n| scalar_gradient(src, &Event::at(t, n.point * r), solution, rule))
        .collect::<Result<_>>()?;
    let exact = flux(|i, _| Ok(scalar_stress(&grads[i])), sphere)?;
    let asym = asymptotic_flux(
        |i, n| {
            let dir = NullDirection::new(*n, solution)?;
            let (psi, _) = amplitude_psi(&grads[i], &dir);
            Ok(psi * psi)
        },
        solution,
        sphere,
    )?;
    Ok((exact, asym))
}

/// Exact and asymptotic flux of an electromagnetic solution.
pub fn em_flux<S: CurrentSource + ?Sized>(
    src: &S,
    solution: Orientation,
    t: f64,
    sphere: &SphereRule,
    rule: &VolumeRule,
    gauge: Option<&GaugeShift>,
) -> Result<(FluxVector, FluxVector)> {
    let r = sphere.radius();
    let samples: Vec<_> = sphere
        .nodes()
        .par_iter()
        .map(|n| {
            let ev = Event::at(t, n.point * r);
            let s = vector_potential(src, &ev, solution, rule)?;
            Ok(gauge.map_or(s, |g| g.apply(&s, &ev)))
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = flux(|i, _| em_stress(&samples[i].field), sphere)?;
    let asym = asymptotic_flux(
        |i, _| Ok(-extract_b(&samples[i].jacobian).minkowski_square()),
        solution,
        sphere,
    )?;
    Ok((exact, asym))
}

/// `e = (1/4π) ∮ f^{k0} n^k dS` on the sphere of radius `sphere.radius()` at time `t`.
pub fn gauss_charge<S: CurrentSource + ?Sized>(
    src: &S,
    solution: Orientation,
    t: f64,
    sphere: &SphereRule,
    rule: &VolumeRule,
    gauge: Option<&GaugeShift>,
) -> Result<f64> {
    let r = sphere.radius();
    let nodes = sphere.nodes();
    let radial: Vec<f64> = nodes
        .par_iter()
        .map(|n| {
            let ev = Event::at(t, n.point * r);
            let s = vector_potential(src, &ev, solution, rule)?;
            let s = gauge.map_or(s, |g| g.apply(&s, &ev));
            // f^{k0} = f_{0k}
            Ok((1..4).map(|k| s.field.get(0, k) * n.point[k - 1]).sum())
        })
        .collect::<Result<_>>()?;
    let [e] = chunked_sum(nodes.len(), |i| Ok([nodes[i].weight * radial[i]]))?;
    Ok(e / (4.0 * PI))
}

/// Per-rung `‖4πT − ψ̂² k⊗k‖` and `|L|` along a scalar ladder.
pub fn scalar_stress_residuals(asym: &ScalarAsymptotics, dir: &NullDirection) -> (Vec<f64>, Vec<f64>) {
    let k = dir.k_lower();
    let kk = CovTensor::outer(&k, &k);
    asym.gradient
        .iter()
        .map(|g| {
            let g = Covector::new(*g);
            let (psi, _) = amplitude_psi(&g, dir);
            let st = scalar_stress(&g);
            let dev = st.components.scale(4.0 * PI) - kk.scale(psi * psi);
            (dev.norm(), st.lagrangian.unwrap_or(0.0).abs())
        })
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::wedge;
    use crate::quadrature::QuadratureOrders;
    use crate::sources::{oscillating_monopole, static_charge, static_monopole};

    #[test]
    fn scalar_stress_examples() {
        let dir = NullDirection::retarded(Vec3::z()).unwrap();
        let k = dir.k_lower();
        let st = scalar_stress(&k.scale(2.0));
        assert_eq!(st.lagrangian, Some(0.0));
        let want = CovTensor::outer(&k, &k).scale(4.0);
        assert!((st.components.scale(4.0 * PI) - want).max_abs() < 1e-12);

        let st = scalar_stress(&Covector::new([1.0, 0.0, 0.0, 0.0]));
        assert!((st.lagrangian.unwrap() + 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!((st.components.get(0, 0) - 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!(st.components.symmetry_violation() == 0.0);
    }

    #[test]
    fn em_stress_examples() {
        let b = Covector::new([0.0, 1.0, 0.0, 0.0]);
        let dir = NullDirection::retarded(Vec3::z()).unwrap();
        let k = dir.k_lower();
        let st = em_stress(&wedge(&k, &b)).unwrap();
        // −B_ρB^ρ = 1
        let want = CovTensor::outer(&k, &k);
        assert!((st.components.scale(4.0 * PI) - want).max_abs() < 1e-12);

        // Coulomb field e = 1 at r = 5: E = 1/25
        let e = 1.0 / 25.0;
        let f = CovTensor::from_fn(|i, j| match (i, j) {
            (0, 3) => e,
            (3, 0) => -e,
            _ => 0.0,
        });
        let st = em_stress(&f).unwrap();
        assert!((st.components.get(0, 0) - e * e / (8.0 * PI)).abs() < 1e-18);

        let h = 0.7;
        let f = CovTensor::from_fn(|i, j| match (i, j) {
            (1, 2) => h,
            (2, 1) => -h,
            _ => 0.0,
        });
        let st = em_stress(&f).unwrap();
        assert!((st.components.get(0, 0) - h * h / (8.0 * PI)).abs() < 1e-15);
        assert!(st.components.trace().abs() < 1e-15);
    }

    #[test]
    fn em_stress_rejects_symmetric_input() {
        let f = CovTensor::from_fn(|i, j| (i + j) as f64);
        assert!(em_stress(&f).is_err());
    }

    #[test]
    fn em_stress_is_traceless_and_symmetric() {
        let a = Covector::new([0.3, -1.1, 0.4, 2.0]);
        let b = Covector::new([-0.2, 0.5, 1.7, -0.9]);
        let c = Covector::new([1.0, 0.2, -0.3, 0.4]);
        let f = wedge(&a, &b) + wedge(&c, &a);
        let st = em_stress(&f).unwrap();
        let scale = st.components.max_abs();
        assert!(st.components.trace().abs() < 1e-10 * scale);
        assert!(st.components.symmetry_violation() < 1e-12 * scale);
    }

    fn rule() -> VolumeRule {
        VolumeRule::new(QuadratureOrders::default()).unwrap()
    }

    #[test]
    fn static_monopole_has_no_flux() {
        let sphere = SphereRule::new(20.0, 12, 24).unwrap();
        let (exact, asym) = scalar_flux(&static_monopole(1.0, 0.1), Orientation::Retarded, 3.0, &sphere, &rule()).unwrap();
        assert!(exact.w.max_abs() < 1e-10);
        assert!(asym.w.max_abs() < 1e-10);
    }

    #[test]
    fn monopole_flux_is_q_dot_squared() {
        let (q0, w) = (1.0, 0.5);
        let m = oscillating_monopole(q0, w, 0.1);
        let r = 100.0;
        let u0 = 0.4;
        let sphere = SphereRule::new(r, 12, 24).unwrap();
        let (exact, asym) = scalar_flux(&m, Orientation::Retarded, u0 + r, &sphere, &rule()).unwrap();
        let want = (q0 * w * (w * u0).cos()).powi(2);
        assert!((exact.w.get(0) / want - 1.0).abs() < 0.02);
        assert!((asym.w.get(0) / want - 1.0).abs() < 0.02);
        for s in 1..4 {
            assert!(exact.w.get(s).abs() < 1e-6 * exact.w.get(0));
        }
    }

    #[test]
    fn coulomb_charge() {
        let q = static_charge(2.0, 0.1);
        for r in [5.0, 10.0] {
            let sphere = SphereRule::new(r, 12, 24).unwrap();
            let e = gauss_charge(&q, Orientation::Retarded, 0.0, &sphere, &rule(), None).unwrap();
            assert!((e / 2.0 - 1.0).abs() < 1e-3);
        }
    }
}
