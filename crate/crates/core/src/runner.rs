//! Scenario runs behind the command-line tool and their reports.
//!
//! Every report is a pure function of the scenario: reductions run in a fixed
//! order, and nothing time- or host-dependent is written.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{extract_b, amplitude_psi, verify_em, verify_scalar, ConditionRecord, ConditionReport};
use crate::error::{Error, Result};
use crate::minkowski::{Event, NullDirection, Orientation, Vec3};
use crate::quadrature::{QuadratureOrders, VolumeRule};
use crate::scenario::{ConvergenceQuantity, SampleKind, Scenario, Theory};
use crate::solver::{scalar_potential, scalar_sample, vector_potential, vector_potential_value};
use crate::stress::{em_flux, em_stress, gauss_charge, scalar_flux, scalar_stress, FluxVector};

pub const REPORT_SCHEMA: &str = "fieldcheck/report/v1";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Relative floor for the sign of `W₀`.
pub const ENERGY_SIGN_FLOOR: f64 = 1e-10;
/// Charges at different radii may differ by this fraction of the largest.
pub const CHARGE_SPREAD: f64 = 5e-3;
/// Charges this small count as zero in the radius-independence check.
pub const CHARGE_FLOOR: f64 = 1e-12;
/// Relative changes below this are rounding noise in a convergence study.
pub const CONVERGENCE_FLOOR: f64 = 1e-11;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn of(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn exit_code(self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Common rendering for every report.
pub trait Report: Serialize {
    fn verdict(&self) -> Verdict;
    fn text(&self) -> String;
    fn csv(&self) -> String;

    fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
            Format::Text => self.text(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioInfo {
    pub name: String,
    pub theory: Theory,
    pub orientation: Orientation,
    pub ladder_orientation: Orientation,
    pub quadrature: QuadratureOrders,
    pub omega_a: Option<f64>,
    pub omega_a_warning: bool,
}

impl ScenarioInfo {
    pub fn of(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            theory: s.theory,
            orientation: s.orientation,
            ladder_orientation: s.ladder_orientation(),
            quadrature: s.quadrature,
            omega_a: s.omega_a(),
            omega_a_warning: s.omega_a_warning(),
        }
    }
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub scenario: ScenarioInfo,
    pub conditions: Vec<ConditionReport>,
    pub flux: Option<FluxReport>,
    pub charge: Option<ChargeReport>,
    /// Conjunction of the ladder verdicts; flux and charge are informational.
    pub verdict: Verdict,
}

pub fn run_verify(s: &Scenario) -> Result<VerifyReport> {
    let rule = s.volume_rule()?;
    let conditions = condition_reports(s, &rule)?;
    let flux = s.flux.is_some().then(|| flux_report(s, &rule)).transpose()?;
    let charge = s.charge.is_some().then(|| charge_report(s, &rule)).transpose()?;
    let verdict = Verdict::of(conditions.iter().all(|c| c.verdict));
    Ok(VerifyReport {
        schema: REPORT_SCHEMA,
        scenario: ScenarioInfo::of(s),
        conditions,
        flux,
        charge,
        verdict,
    })
}

fn condition_reports(s: &Scenario, rule: &VolumeRule) -> Result<Vec<ConditionReport>> {
    let ladders = s.ladders()?;
    match s.theory {
        Theory::Scalar => {
            let src = s.source.scalar()?;
            ladders
                .iter()
                .map(|l| verify_scalar(&src, s.orientation, l, rule, &s.thresholds))
                .collect()
        }
        Theory::Maxwell => {
            let src = s.source.current()?;
            let gauge = s.gauge_shift();
            ladders
                .iter()
                .map(|l| verify_em(&src, s.orientation, l, rule, gauge.as_ref(), &s.thresholds))
                .collect()
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

impl Report for VerifyReport {
    fn verdict(&self) -> Verdict {
        self.verdict
    }

    fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {}  ({:?}, {} solution)", self.scenario.name, self.scenario.theory, self.scenario.orientation);
        if self.scenario.omega_a_warning {
            let _ = writeln!(out, "warning: omega*a = {} is not small", fmt_opt(self.scenario.omega_a));
        }
        for rep in &self.conditions {
            let [x, y, z] = rep.direction;
            let _ = writeln!(out, "\nray ({x:.4}, {y:.4}, {z:.4}), {} null vector", rep.ladder);
            let _ = writeln!(out, "  {:<26} {:>8} {:>10} {:>10}  result", "condition", "target", "threshold", "measured");
            for c in &rep.conditions {
                let _ = writeln!(
                    out,
                    "  {:<26} {:>8} {:>10.4} {:>10}  {}",
                    c.name,
                    fmt_opt(c.target),
                    c.threshold,
                    fmt_opt(c.measured),
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
        }
        if let Some(f) = &self.flux {
            out.push('\n');
            out.push_str(&f.text());
        }
        if let Some(c) = &self.charge {
            out.push('\n');
            out.push_str(&c.text());
        }
        let _ = writeln!(out, "\nverdict: {:?}", self.verdict);
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("nx,ny,nz,ladder,condition,target,threshold,measured,amplitude,max_residual,pass\n");
        for rep in &self.conditions {
            let [x, y, z] = rep.direction;
            for c in &rep.conditions {
                let cell = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                let _ = writeln!(
                    out,
                    "{x},{y},{z},{},{},{},{},{},{},{},{}",
                    rep.ladder,
                    c.name,
                    cell(c.target),
                    c.threshold,
                    cell(c.measured),
                    cell(c.fit.map(|f| f.amplitude)),
                    cell(c.fit.map(|f| f.max_residual)),
                    c.pass
                );
            }
        }
        out
    }
}

// ---------------------------------------------------------------- flux

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxRow {
    pub radius: f64,
    /// Retarded (or advanced) time `u` the sphere is locked to.
    pub u: f64,
    pub t: f64,
    pub exact: [f64; 4],
    pub asymptotic: [f64; 4],
}

/// Averages over the sampled phases at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxMean {
    pub radius: f64,
    pub exact: [f64; 4],
    pub asymptotic: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxReport {
    pub schema: &'static str,
    pub scenario: String,
    pub rows: Vec<FluxRow>,
    pub means: Vec<FluxMean>,
    /// Decay of `|W₀(exact) − W₀(asymptotic)|` over the radii at the first
    /// phase; needs at least four radii.
    pub agreement: Option<ConditionRecord>,
    /// Retarded: `W₀ ≥ −floor` everywhere. Advanced: `W₀ ≤ floor`.
    pub energy_sign: bool,
    pub energy_floor: f64,
    pub verdict: Verdict,
}

/// Retarded (or advanced) times sampled by the flux run.
pub fn flux_phases(s: &Scenario) -> Vec<f64> {
    let Some(f) = &s.flux else { return Vec::new() };
    match source_omega(s) {
        Some(w) if f.phases > 1 => (0..f.phases)
            .map(|j| f.u0 + j as f64 * 2.0 * PI / (w * f.phases as f64))
            .collect(),
        _ => vec![f.u0],
    }
}

fn source_omega(s: &Scenario) -> Option<f64> {
    match s.theory {
        Theory::Scalar => s.source.scalar().ok()?.frequency(),
        Theory::Maxwell => s.source.current().ok()?.frequency(),
    }
}

/// `(exact, asymptotic)` flux through the sphere of radius `r` locked at `u`.
pub fn flux_at(s: &Scenario, rule: &VolumeRule, r: f64, u: f64) -> Result<(FluxVector, FluxVector)> {
    let sphere = s.sphere_rule(r)?;
    let t = u - s.orientation.time_sign() * r;
    match s.theory {
        Theory::Scalar => scalar_flux(&s.source.scalar()?, s.orientation, t, &sphere, rule),
        Theory::Maxwell => em_flux(&s.source.current()?, s.orientation, t, &sphere, rule, s.gauge_shift().as_ref()),
    }
}

pub fn run_flux(s: &Scenario) -> Result<FluxReport> {
    if s.flux.is_none() {
        return Err(Error::config("flux", "section required for the flux command"));
    }
    flux_report(s, &s.volume_rule()?)
}

fn flux_report(s: &Scenario, rule: &VolumeRule) -> Result<FluxReport> {
    let spec = s.flux.as_ref().expect("caller checked");
    let phases = flux_phases(s);
    let mut rows = Vec::new();
    let mut means = Vec::new();
    for &r in &spec.radii {
        let mut sum_e = [0.0; 4];
        let mut sum_a = [0.0; 4];
        for &u in &phases {
            let (e, a) = flux_at(s, rule, r, u)?;
            for mu in 0..4 {
                sum_e[mu] += e.w.get(mu);
                sum_a[mu] += a.w.get(mu);
            }
            rows.push(FluxRow {
                radius: r,
                u,
                t: u - s.orientation.time_sign() * r,
                exact: e.w.components(),
                asymptotic: a.w.components(),
            });
        }
        let m = phases.len() as f64;
        means.push(FluxMean {
            radius: r,
            exact: sum_e.map(|x| x / m),
            asymptotic: sum_a.map(|x| x / m),
        });
    }
    let agreement = if spec.radii.len() >= 4 {
        let diffs: Vec<(f64, f64)> = rows
            .iter()
            .filter(|row| row.u == phases[0])
            .map(|row| (row.radius, row.exact[0] - row.asymptotic[0]))
            .collect();
        Some(ConditionRecord::falloff_at(
            "flux_agreement",
            &diffs,
            1.0,
            1.0 - s.thresholds.subleading_slack,
        )?)
    } else {
        None
    };
    let scale = rows.iter().map(|r| r.exact[0].abs()).fold(0.0, f64::max);
    let energy_floor = ENERGY_SIGN_FLOOR * scale;
    let energy_sign = rows.iter().all(|r| match s.orientation {
        Orientation::Retarded => r.exact[0] >= -energy_floor,
        Orientation::Advanced => r.exact[0] <= energy_floor,
    });
    let verdict = Verdict::of(energy_sign && agreement.as_ref().is_none_or(|a| a.pass));
    Ok(FluxReport {
        schema: REPORT_SCHEMA,
        scenario: s.name.clone(),
        rows,
        means,
        agreement,
        energy_sign,
        energy_floor,
        verdict,
    })
}

impl Report for FluxReport {
    fn verdict(&self) -> Verdict {
        self.verdict
    }

    fn text(&self) -> String {
        let mut out = String::from("flux\n");
        let _ = writeln!(out, "  {:>10} {:>10} {:>14} {:>14} {:>12}", "radius", "u", "W0 exact", "W0 asymptotic", "|W_s|");
        for r in &self.rows {
            let ws = (r.exact[1].powi(2) + r.exact[2].powi(2) + r.exact[3].powi(2)).sqrt();
            let _ = writeln!(out, "  {:>10.3} {:>10.4} {:>14.6e} {:>14.6e} {:>12.3e}", r.radius, r.u, r.exact[0], r.asymptotic[0], ws);
        }
        for m in &self.means {
            let _ = writeln!(out, "  mean at r = {}: W0 exact {:.6e}, asymptotic {:.6e}", m.radius, m.exact[0], m.asymptotic[0]);
        }
        if let Some(a) = &self.agreement {
            let _ = writeln!(out, "  exact/asymptotic difference decays as r^-{}", fmt_opt(a.measured));
        }
        let _ = writeln!(out, "  energy sign {}", if self.energy_sign { "ok" } else { "VIOLATED" });
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("radius,u,t,W0,W1,W2,W3,W0_asym,W1_asym,W2_asym,W3_asym\n");
        for r in &self.rows {
            let [e0, e1, e2, e3] = r.exact;
            let [a0, a1, a2, a3] = r.asymptotic;
            let _ = writeln!(out, "{},{},{},{e0},{e1},{e2},{e3},{a0},{a1},{a2},{a3}", r.radius, r.u, r.t);
        }
        out
    }
}

// ---------------------------------------------------------------- charge

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeRow {
    pub radius: f64,
    pub time: f64,
    pub charge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeReport {
    pub schema: &'static str,
    pub scenario: String,
    pub rows: Vec<ChargeRow>,
    /// `max e − min e` over the radii.
    pub spread: f64,
    pub radius_independent: bool,
    pub verdict: Verdict,
}

pub fn run_charge(s: &Scenario) -> Result<ChargeReport> {
    if s.charge.is_none() {
        return Err(Error::config("charge", "section required for the charge command"));
    }
    charge_report(s, &s.volume_rule()?)
}

fn charge_report(s: &Scenario, rule: &VolumeRule) -> Result<ChargeReport> {
    let spec = s.charge.as_ref().expect("caller checked");
    let src = s.source.current()?;
    let gauge = s.gauge_shift();
    let rows = spec
        .radii
        .iter()
        .map(|&r| {
            let e = gauss_charge(&src, s.orientation, spec.time, &s.sphere_rule(r)?, rule, gauge.as_ref())?;
            Ok(ChargeRow {
                radius: r,
                time: spec.time,
                charge: e,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let hi = rows.iter().map(|r| r.charge).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.charge).fold(f64::INFINITY, f64::min);
    let scale = rows.iter().map(|r| r.charge.abs()).fold(0.0, f64::max);
    let spread = hi - lo;
    let radius_independent = spread <= CHARGE_SPREAD * scale + CHARGE_FLOOR;
    Ok(ChargeReport {
        schema: REPORT_SCHEMA,
        scenario: s.name.clone(),
        rows,
        spread,
        radius_independent,
        verdict: Verdict::of(radius_independent),
    })
}

impl Report for ChargeReport {
    fn verdict(&self) -> Verdict {
        self.verdict
    }

    fn text(&self) -> String {
        let mut out = String::from("Gauss charge\n");
        for r in &self.rows {
            let _ = writeln!(out, "  r = {:<8} t = {:<8} e = {:.9}", r.radius, r.time, r.charge);
        }
        let _ = writeln!(
            out,
            "  spread {:.3e}, {}",
            self.spread,
            if self.radius_independent { "radius independent" } else { "RADIUS DEPENDENT" }
        );
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("radius,time,charge\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.radius, r.time, r.charge);
        }
        out
    }
}

// ---------------------------------------------------------------- sample

/// Rows of numbers under a header; rendered as CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

const STRESS_COLUMNS: [(usize, usize); 10] =
    [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)];

pub fn run_sample(s: &Scenario) -> Result<Table> {
    let spec = s
        .sample
        .as_ref()
        .ok_or_else(|| Error::config("sample", "section required for the sample command"))?;
    let rule = s.volume_rule()?;
    let ladder = s.ladders()?.swap_remove(0);
    let radii = spec.radii.clone().unwrap_or_else(|| ladder.radii().to_vec());
    let n = Vec3::from(spec.direction).normalize();
    let event = |r: f64| Event::at(spec.time.unwrap_or(ladder.u0 - s.orientation.time_sign() * r), n * r);
    let o = s.orientation;

    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut header = if spec.what == SampleKind::Psi {
        names(&["r"])
    } else {
        names(&["t", "x", "y", "z", "r"])
    };
    header.extend(match (s.theory, spec.what) {
        (Theory::Scalar, SampleKind::Potential) => names(&["phi"]),
        (Theory::Scalar, SampleKind::Gradient) => names(&["dphi_0", "dphi_1", "dphi_2", "dphi_3"]),
        (Theory::Scalar, SampleKind::Psi) => names(&["psi"]),
        (Theory::Maxwell, SampleKind::Potential) => names(&["A0", "A1", "A2", "A3"]),
        (Theory::Maxwell, SampleKind::Gradient) => (0..4)
            .flat_map(|rho| (0..4).map(move |sigma| format!("dA{rho}_{sigma}")))
            .collect(),
        (Theory::Maxwell, SampleKind::Field) => names(&["Ex", "Ey", "Ez", "Hx", "Hy", "Hz"]),
        (Theory::Maxwell, SampleKind::Psi) => names(&["B0", "B1", "B2", "B3"]),
        (_, SampleKind::Stress) => STRESS_COLUMNS.iter().map(|(m, n)| format!("T{m}{n}")).collect(),
        (Theory::Scalar, SampleKind::Field) => unreachable!("rejected by validation"),
    });

    let scalar = match s.theory {
        Theory::Scalar => Some(s.source.scalar()?),
        Theory::Maxwell => None,
    };
    let current = match s.theory {
        Theory::Maxwell => Some(s.source.current()?),
        Theory::Scalar => None,
    };
    let gauge = s.gauge_shift();
    let null_dir = NullDirection::new(n, s.ladder_orientation())?;

    let rows = radii
        .par_iter()
        .map(|&r| {
            let ev = event(r);
            let values: Vec<f64> = match (&scalar, &current, spec.what) {
                (Some(src), _, SampleKind::Potential) => vec![scalar_potential(src, &ev, o, &rule)?],
                (Some(src), _, what) => {
                    let g = scalar_sample(src, &ev, o, &rule)?.gradient;
                    match what {
                        SampleKind::Gradient => g.components().to_vec(),
                        SampleKind::Psi => vec![amplitude_psi(&g, &null_dir).0],
                        _ => {
                            let t = scalar_stress(&g).components;
                            STRESS_COLUMNS.iter().map(|&(m, n)| t.get(m, n)).collect()
                        }
                    }
                }
                (None, Some(src), SampleKind::Potential) => {
                    let a = vector_potential_value(src, &ev, o, &rule)?;
                    let a = match &gauge {
                        Some(g) => a + g.derivatives(&ev).0.raise(),
                        None => a,
                    };
                    a.components().to_vec()
                }
                (None, Some(src), what) => {
                    let p = vector_potential(src, &ev, o, &rule)?;
                    let p = gauge.as_ref().map_or(p, |g| g.apply(&p, &ev));
                    match what {
                        SampleKind::Gradient => (0..4)
                            .flat_map(|rho| (0..4).map(move |sigma| (rho, sigma)))
                            .map(|(rho, sigma)| p.jacobian.get(rho, sigma))
                            .collect(),
                        SampleKind::Field => {
                            let (e, h) = (p.electric(), p.magnetic());
                            vec![e.x, e.y, e.z, h.x, h.y, h.z]
                        }
                        SampleKind::Psi => extract_b(&p.jacobian).components().to_vec(),
                        _ => {
                            let t = em_stress(&p.field)?.components;
                            STRESS_COLUMNS.iter().map(|&(m, n)| t.get(m, n)).collect()
                        }
                    }
                }
                (None, None, _) => unreachable!(),
            };
            let mut row = if spec.what == SampleKind::Psi {
                vec![r]
            } else {
                vec![ev.t, ev.position.x, ev.position.y, ev.position.z, r]
            };
            row.extend(values);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { header, rows })
}

// ---------------------------------------------------------------- convergence

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceLevel {
    pub factor: f64,
    pub orders: QuadratureOrders,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema: &'static str,
    pub scenario: String,
    pub quantity: ConvergenceQuantity,
    pub labels: Vec<String>,
    pub levels: Vec<ConvergenceLevel>,
    /// `max |Q(level i+1) − Q(level i)|`
    pub deltas: Vec<f64>,
    /// Deltas at or below this are rounding noise.
    pub floor: f64,
    pub converged: bool,
    pub verdict: Verdict,
}

/// Values of the designated quantity, with labels.
fn convergence_values(s: &Scenario, q: ConvergenceQuantity) -> Result<(Vec<String>, Vec<f64>)> {
    let rule = s.volume_rule()?;
    Ok(match q {
        ConvergenceQuantity::Flux => {
            let f = s.flux.as_ref().expect("validated");
            let (e, _) = flux_at(s, &rule, f.radii[0], f.u0)?;
            ((0..4).map(|mu| format!("W{mu}")).collect(), e.w.components().to_vec())
        }
        ConvergenceQuantity::Charge => {
            let rep = charge_report(s, &rule)?;
            (
                rep.rows.iter().map(|r| format!("e(r={})", r.radius)).collect(),
                rep.rows.iter().map(|r| r.charge).collect(),
            )
        }
        ConvergenceQuantity::Verify => {
            let mut labels = Vec::new();
            let mut values = Vec::new();
            for (i, rep) in condition_reports(s, &rule)?.iter().enumerate() {
                for c in &rep.conditions {
                    if let Some(m) = c.measured {
                        labels.push(format!("{i}:{}", c.name));
                        values.push(m);
                    }
                }
            }
            (labels, values)
        }
    })
}

pub fn run_convergence(s: &Scenario) -> Result<ConvergenceReport> {
    let spec = s
        .convergence
        .as_ref()
        .ok_or_else(|| Error::config("convergence", "section required for the convergence command"))?;
    let mut labels = Vec::new();
    let mut levels = Vec::new();
    for &factor in &spec.factors {
        let refined = s.refined(factor);
        let (l, values) = convergence_values(&refined, spec.quantity)?;
        if !levels.is_empty() && l != labels {
            return Err(Error::InvalidParameter(
                "the set of converging quantities changed between refinement levels".into(),
            ));
        }
        labels = l;
        levels.push(ConvergenceLevel {
            factor,
            orders: refined.quadrature,
            values,
        });
    }
    let deltas: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            w[0].values
                .iter()
                .zip(&w[1].values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let scale = levels
        .iter()
        .flat_map(|l| l.values.iter())
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    let floor = CONVERGENCE_FLOOR * scale.max(f64::MIN_POSITIVE);
    // each delta must shrink, unless it is already lost in rounding
    let converged = deltas.windows(2).all(|d| d[1] <= floor || d[1] < d[0]);
    Ok(ConvergenceReport {
        schema: REPORT_SCHEMA,
        scenario: s.name.clone(),
        quantity: spec.quantity,
        labels,
        levels,
        deltas,
        floor,
        converged,
        verdict: Verdict::of(converged),
    })
}

impl Report for ConvergenceReport {
    fn verdict(&self) -> Verdict {
        self.verdict
    }

    fn text(&self) -> String {
        let mut out = format!("convergence of {}\n", format!("{:?}", self.quantity).to_lowercase());
        for l in &self.levels {
            let o = l.orders;
            let _ = writeln!(out, "  x{:<4} orders {}/{}/{}", l.factor, o.radial, o.polar, o.azimuthal);
        }
        for (i, d) in self.deltas.iter().enumerate() {
            let _ = writeln!(out, "  delta {}: {:.3e}", i + 1, d);
        }
        let _ = writeln!(out, "  floor {:.3e}: {}", self.floor, if self.converged { "converged" } else { "NOT CONVERGED" });
        out
    }

    fn csv(&self) -> String {
        let mut out = String::from("factor,radial,polar,azimuthal");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for l in &self.levels {
            let o = l.orders;
            let _ = write!(out, "{},{},{},{}", l.factor, o.radial, o.polar, o.azimuthal);
            for v in &l.values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
