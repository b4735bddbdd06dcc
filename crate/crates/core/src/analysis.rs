//! Norms and the quantitative inequalities of the existence argument.
//!
//! Bounds with explicit constants are checked as hard assertions; bounds
//! stated with an unnamed constant `C` are reported as the empirical ratio
//! needed to close them.

use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{RunRecord, System};
use crate::fft::{transform, Direction};
use crate::field::{Reality, SpectralField, VectorField};
use crate::gauge::{phase_multiply, PhysParams};
use crate::grid::Grid;
use crate::matter::{covariant_gradient_physical, vector_to_physical};
use crate::random::{random_field, random_vector, SpectrumProfile};
use crate::spectral::{curl_2d, curl_norm, grad, grad_norm, h1dot_norm, helmholtz};

/// Slack allowed on explicit growth bounds for discretization error.
pub const GROWTH_TOL: f64 = 1e-9;
/// Relative tolerance on exact torus equalities.
pub const EQUALITY_TOL: f64 = 1e-12;

/// `<x> = sqrt(1 + x^2)`.
pub fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `||<xi>^s f^||` under the `L^d sum |c|^2` normalization.
pub fn sobolev_norm(f: &SpectralField, s: f64) -> f64 {
    let g = f.grid();
    let c = f.coeffs();
    let mut sum = 0.0;
    g.for_each_mode(|k, xi| {
        let x2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        sum += (1.0 + x2).powf(s) * c[k].norm_sqr();
    });
    (g.volume() * sum).sqrt()
}

pub fn h1dot(f: &SpectralField) -> f64 {
    h1dot_norm(f)
}

/// `L^4` norm by quadrature on a lattice fine enough for `|f|^4`.
pub fn l4_norm(f: &SpectralField) -> f64 {
    let g = f.grid();
    let m = 2 * g.n();
    let vals = f.to_physical(m);
    let w = g.volume() / vals.len() as f64;
    (w * vals.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>()).powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevEntry {
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub h1dot: f64,
    pub hs: Vec<SobolevEntry>,
}

pub fn norm_report(f: &SpectralField, s_list: &[f64]) -> NormReport {
    NormReport {
        l2: f.l2_norm(),
        h1dot: h1dot(f),
        hs: s_list
            .iter()
            .map(|&s| SobolevEntry {
                s,
                value: sobolev_norm(f, s),
            })
            .collect(),
    }
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub ratio: f64,
    #[serde(rename = "empirical_C")]
    pub empirical_c: Option<f64>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
    /// Whether the inequality is a hard assertion; empirical reports pass.
    pub hard: bool,
    pub passed: bool,
}

impl InequalityReport {
    fn bound(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        InequalityReport {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            ratio: ratio(lhs, rhs),
            empirical_c: None,
            seed: None,
            resolution: None,
            hard: true,
            passed: rhs - lhs >= -tol,
        }
    }

    fn equality(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let mut r = Self::bound(name, lhs, rhs, 0.0);
        r.passed = (lhs - rhs).abs() <= EQUALITY_TOL * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        r
    }

    /// `lhs <= C * unit`, reporting the smallest `C` that works.
    fn empirical(name: impl Into<String>, lhs: f64, unit: f64) -> Self {
        let c = if unit > 0.0 { lhs / unit } else { 0.0 };
        InequalityReport {
            name: name.into(),
            lhs,
            rhs: unit,
            slack: unit - lhs,
            ratio: ratio(lhs, unit),
            empirical_c: Some(c),
            seed: None,
            resolution: None,
            hard: false,
            passed: c.is_finite(),
        }
    }

    pub fn with_seed(mut self, seed: u64, resolution: usize) -> Self {
        self.seed = Some(seed);
        self.resolution = Some(resolution);
        self
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Explicit `L^2` growth bounds along a run, one report per row and field.
/// `||A(t)|| <= ||A(0)|| + t sqrt(2 E(0))`, `||phi(t)|| <= ||phi(0)|| + c t sqrt(E(0))`
/// with `c = sqrt 2` for MKG and `1` for MCSH, and `||N~(t)|| <= ||N~(0)|| + t sqrt(2 E(0))`.
pub fn growth_bound_check(record: &RunRecord) -> Vec<InequalityReport> {
    let mut out = Vec::new();
    for row in &record.rows {
        let mut push = |name: &str, value: f64, slack: f64| {
            let mut r = InequalityReport::bound(format!("{name} t={}", row.t), value, value + slack, GROWTH_TOL);
            r.slack = slack;
            out.push(r);
        };
        push("bound37", row.l2_a, row.bound37_slack);
        push("bound39", row.l2_phi, row.bound39_slack);
        if let (Some(n), Some(s)) = (row.l2_n, row.bound52_slack) {
            push("bound52", n, s);
        }
    }
    out
}

/// Terms of `||grad phi0|| <= 2 ||U|| + C ||a||_{H1dot}^2 ||phi0||` with
/// `U = grad phi0 - i phi0 a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma28Report {
    pub grad_phi: f64,
    pub u_norm: f64,
    pub a_h1dot: f64,
    pub phi_l2: f64,
    #[serde(rename = "C_emp")]
    pub c_emp: f64,
}

/// `||d_j phi - i q a_j phi||` summed in quadrature, by padded quadrature.
fn covariant_norm(a: &VectorField, phi: &SpectralField, q: f64) -> f64 {
    let m = phi.grid().dealias_n();
    let ap = vector_to_physical(a, m);
    let (_, g) = covariant_gradient_physical(&ap, phi, q, m);
    let w = phi.grid().volume() / g[0].len() as f64;
    (w * g.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

pub fn lemma28_check(phi0: &SpectralField, a: &VectorField) -> Result<Lemma28Report> {
    phi0.same_grid(a.component(0))?;
    if a.reality() != Reality::Real {
        return Err(Error::precondition("a must be real"));
    }
    let scale = a.l2_norm().max(1.0);
    if a.mean().iter().any(|m| m.norm() > 1e-12 * scale) {
        return Err(Error::precondition("a must have zero mean"));
    }
    let grad_phi = h1dot_norm(phi0);
    let u_norm = covariant_norm(a, phi0, 1.0);
    let a_h1dot = grad_norm(a);
    let phi_l2 = phi0.l2_norm();
    let den = a_h1dot * a_h1dot * phi_l2;
    let c_emp = if den > 0.0 {
        (grad_phi - 2.0 * u_norm).max(0.0) / den
    } else {
        0.0
    };
    Ok(Lemma28Report {
        grad_phi,
        u_norm,
        a_h1dot,
        phi_l2,
        c_emp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma28Sweep {
    pub resolution: usize,
    pub seeds: usize,
    pub max_c: f64,
    pub mean_c: f64,
    pub values: Vec<f64>,
}

/// Amplitudes of the near-gauge pairs drawn by [`lemma28_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma28Draw {
    pub psi: f64,
    pub theta: f64,
    pub noise: f64,
}

/// `C_emp` over seeded pairs `phi0 = exp(i theta) psi`, `a = grad theta + noise`.
/// Uncorrelated pairs have `||grad phi0|| < 2 ||U||` and give `C_emp = 0`; the
/// bound is only tight near a pure gauge. The same seed draws the same
/// continuum data on every grid that resolves the profile.
pub fn lemma28_sweep(
    grid: Grid,
    seeds: std::ops::Range<u64>,
    profile: &SpectrumProfile,
    draw: Lemma28Draw,
) -> Result<Lemma28Sweep> {
    let values = seeds
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_field(&grid, &mut rng, profile, Reality::Complex, draw.psi);
            let theta = random_field(&grid, &mut rng, profile, Reality::Real, draw.theta);
            let noise = random_vector(&grid, &mut rng, profile, draw.noise);
            let phi = phase_multiply(&psi, &theta, 1.0);
            let a = grad(&theta).add(&noise);
            lemma28_check(&phi, &a).map(|r| r.c_emp)
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_c = values.iter().copied().fold(0.0, f64::max);
    let mean_c = values.iter().sum::<f64>() / values.len().max(1) as f64;
    Ok(Lemma28Sweep {
        resolution: grid.n(),
        seeds: values.len(),
        max_c,
        mean_c,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H1ControlReport {
    pub entries: Vec<InequalityReport>,
    pub passed: bool,
}

/// Evaluates the `H1dot` control chain at a Coulomb-gauge state.
pub fn h1_control_check(system: &System) -> Result<H1ControlReport> {
    let a = system.potential();
    let (a_df, a_cf) = helmholtz(a)?;
    if a_cf.l2_norm() > 1e-10 * a.l2_norm().max(1.0) {
        return Err(Error::precondition(
            "A has a curl-free part; apply coulomb_fix first",
        ));
    }
    let entries = match system {
        System::Mkg(s) => mkg_chain(&a_df, &s.phi, system.energy())?,
        System::Mcsh(s, p) => mcsh_chain(&a_df, &s.phi, p, system.energy())?,
    };
    let passed = entries.iter().all(|e| e.passed);
    Ok(H1ControlReport { entries, passed })
}

fn mkg_chain(a_df: &VectorField, phi: &SpectralField, energy: f64) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    // Zero-mean divergence-free fields have ||grad A|| = ||curl A|| on the torus.
    let mut fluct = a_df.clone();
    for c in fluct.components_mut() {
        c.coeffs_mut()[0] = Complex64::default();
    }
    out.push(InequalityReport::equality("h1dot_equals_curl", grad_norm(&fluct), curl_norm(&fluct)));
    let l = lemma28_check(phi, &fluct)?;
    let rest = l.a_h1dot.powi(2) * l.phi_l2;
    out.push(InequalityReport::empirical(
        "lemma28",
        (l.grad_phi - 2.0 * l.u_norm).max(0.0),
        rest,
    ));
    let phi_l2 = phi.l2_norm();
    out.push(InequalityReport::empirical(
        "h1dot_phi_by_energy",
        l.grad_phi,
        1.0 + energy * (1.0 + phi_l2),
    ));
    Ok(out)
}

fn mcsh_chain(
    a_df: &VectorField,
    phi: &SpectralField,
    p: &PhysParams,
    energy: f64,
) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::new();
    let mut fluct = a_df.clone();
    for c in fluct.components_mut() {
        c.coeffs_mut()[0] = Complex64::default();
    }
    let b = curl_2d(a_df)?.l2_norm();
    out.push(InequalityReport::equality("grad_equals_curl_2d", grad_norm(&fluct), b));

    let phi_l2 = phi.l2_norm();
    let grad_phi = h1dot_norm(phi);
    let e = p.e.abs();
    let dphi = grad(phi);
    // Every lattice quantity below uses one lattice, on which the triangle
    // and Hoelder inequalities hold exactly.
    let m = 2 * phi.grid().n();
    let w = phi.grid().volume() / m.pow(2) as f64;
    let lattice_norm = |vals: &mut dyn Iterator<Item = f64>| (w * vals.sum::<f64>()).sqrt();
    let ap = vector_to_physical(a_df, m);
    let (pp, g) = covariant_gradient_physical(&ap, phi, p.e, m);
    let phi_l4 = lattice_norm(&mut pp.iter().map(|z| z.norm_sqr().powi(2))).sqrt();
    for i in 0..2 {
        let di = dphi.component(i).l2_norm();
        let cov = lattice_norm(&mut g[i].iter().map(|z| z.norm_sqr()));
        let prod = e * lattice_norm(&mut ap[i].iter().zip(&pp).map(|(a, z)| a * a * z.norm_sqr()));
        let ai = a_df.component(i);
        let ai_l4 = lattice_norm(&mut ap[i].iter().map(|a| a.powi(4))).sqrt();
        let ai_l2 = ai.l2_norm();
        let ai_grad = h1dot_norm(ai);
        let tol = 1e-12 * (di + cov + prod);
        out.push(InequalityReport::bound(format!("triangle_{}", i + 1), di, cov + prod, tol));
        out.push(InequalityReport::bound(format!("hoelder_{}", i + 1), prod, e * phi_l4 * ai_l4, tol));
        // Ladyzhenskaya, ||f||_4^2 <= C ||f|| ||grad f||, with its constant reported.
        let gn = e * (phi_l2 * grad_phi * ai_l2 * ai_grad).sqrt();
        out.push(InequalityReport::empirical(
            format!("gagliardo_nirenberg_{}", i + 1),
            e * phi_l4 * ai_l4,
            gn,
        ));
        // sqrt(xy) <= x/2 + y/2 with x = ||grad phi||, y = e^2 ||phi|| ||A_i|| ||grad A_i||,
        // and ||grad A_i|| <= ||curl A||.
        let young = 0.5 * grad_phi + 2.0 * e * e * phi_l2 * a_df.l2_norm() * b;
        out.push(InequalityReport::bound(format!("young_{}", i + 1), gn, young, 1e-12 * young));
    }
    out.push(InequalityReport::empirical(
        "h1dot_phi_by_energy",
        grad_phi,
        1.0 + energy + phi_l2.powi(2) * a_df.l2_norm().powi(2),
    ));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    None,
    /// Cosine ramps over the first and last quarter of the interval.
    CosineTaper,
}

/// Samples `u(t_k)`, `t_k = k dt`, of one field on a fixed grid.
#[derive(Debug, Clone)]
pub struct SpaceTimeBlock {
    samples: Vec<SpectralField>,
    dt: f64,
    window: Window,
}

impl SpaceTimeBlock {
    pub fn new(samples: Vec<SpectralField>, dt: f64, window: Window) -> Result<Self> {
        if samples.len() < 8 {
            return Err(Error::precondition("a space-time block needs at least 8 samples"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::precondition("sample spacing must be positive"));
        }
        for s in &samples[1..] {
            samples[0].same_grid(s)?;
        }
        Ok(SpaceTimeBlock { samples, dt, window })
    }

    pub fn n_t(&self) -> usize {
        self.samples.len()
    }

    pub fn period(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    pub fn grid(&self) -> &Grid {
        self.samples[0].grid()
    }

    fn weights(&self) -> Vec<f64> {
        let n = self.n_t();
        match self.window {
            Window::None => vec![1.0; n],
            Window::CosineTaper => (0..n)
                .map(|k| {
                    let x = k as f64 / (n - 1) as f64;
                    let edge = x.min(1.0 - x);
                    if edge >= 0.25 {
                        1.0
                    } else {
                        0.5 * (1.0 - (std::f64::consts::PI * edge / 0.25).cos())
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    /// `<|tau| - |xi|>`
    #[serde(rename = "wave")]
    Wave,
    /// `<-tau + |xi|>`
    #[serde(rename = "wave+")]
    WavePlus,
    /// `<-tau - |xi|>`
    #[serde(rename = "wave-")]
    WaveMinus,
    /// `<tau>`
    #[serde(rename = "tau0")]
    Tau0,
}

impl Flavor {
    pub fn weight(self, tau: f64, xi: f64) -> f64 {
        japanese(match self {
            Flavor::Wave => tau.abs() - xi,
            Flavor::WavePlus => -tau + xi,
            Flavor::WaveMinus => -tau - xi,
            Flavor::Tau0 => tau,
        })
    }
}

impl FromStr for Flavor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wave" => Ok(Flavor::Wave),
            "wave+" => Ok(Flavor::WavePlus),
            "wave-" => Ok(Flavor::WaveMinus),
            "tau0" => Ok(Flavor::Tau0),
            _ => Err(format!("unknown flavor {s:?} (wave|wave+|wave-|tau0)")),
        }
    }
}

/// Discrete `X^{s,b}` norm of one explicit extension of the block.
///
/// The time transform is `sum_k u(t_k) exp(+i tau t_k)`, so that
/// `exp(i(xi x - |xi| t))` sits at `tau = |xi|`.
pub fn xsb_weight_norm(block: &SpaceTimeBlock, s: f64, b: f64, flavor: Flavor) -> f64 {
    let g = *block.grid();
    let nt = block.n_t();
    let win = block.weights();
    let period = block.period();
    let taus: Vec<f64> = (0..nt)
        .map(|j| {
            let js = if j < nt.div_ceil(2) { j as i64 } else { j as i64 - nt as i64 };
            2.0 * std::f64::consts::PI * js as f64 / period
        })
        .collect();
    let mut sum = 0.0;
    let mut series = vec![Complex64::default(); nt];
    g.for_each_mode(|k, xi| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        for (t, sample) in block.samples.iter().enumerate() {
            series[t] = sample.coeffs()[k] * win[t];
        }
        if series.iter().all(|c| *c == Complex64::default()) {
            return;
        }
        transform(&mut series, nt, 1, Direction::Inverse);
        let sw = japanese(r).powf(s);
        for (j, c) in series.iter().enumerate() {
            let wt = flavor.weight(taus[j], r).powf(b) * sw;
            sum += wt * wt * c.norm_sqr();
        }
    });
    // Parseval in time: T sum_j |c_j / n_t|^2.
    (g.volume() * period * sum / (nt * nt) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightCheck {
    pub passed: bool,
    pub nodes: usize,
    /// `(sign, tau, |xi|, lhs, rhs)` at the node with the least margin.
    pub worst: Option<(i8, f64, f64, f64, f64)>,
}

/// Pointwise check of `<xi>^s <|tau| - |xi|>^b <= <xi>^s <-tau +- |xi|>^b`
/// for `b >= 0` (reversed for `b <= 0`) on the lattice of `n_t` temporal
/// frequencies with period equal to the box length, both signs.
pub fn weight_inequality_check(s: f64, b: f64, grid: &Grid, n_t: usize) -> WeightCheck {
    let period = grid.box_length();
    let mut nodes = 0;
    let mut worst: Option<(i8, f64, f64, f64, f64)> = None;
    let mut worst_margin = f64::INFINITY;
    let mut passed = true;
    let xis: Vec<f64> = grid
        .wavevectors()
        .iter()
        .map(|x| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt())
        .collect();
    for j in 0..n_t {
        let js = j as i64 - (n_t / 2) as i64;
        let tau = 2.0 * std::f64::consts::PI * js as f64 / period;
        for &r in &xis {
            let sw = japanese(r).powf(s);
            let lhs = sw * Flavor::Wave.weight(tau, r).powf(b);
            for (sign, flavor) in [(1i8, Flavor::WavePlus), (-1i8, Flavor::WaveMinus)] {
                let rhs = sw * flavor.weight(tau, r).powf(b);
                let margin = if b >= 0.0 { rhs - lhs } else { lhs - rhs };
                let tol = 1e-14 * lhs.abs().max(rhs.abs());
                nodes += 1;
                if margin < -tol {
                    passed = false;
                }
                if margin < worst_margin {
                    worst_margin = margin;
                    worst = Some((sign, tau, r, lhs, rhs));
                }
            }
        }
    }
    WeightCheck { passed, nodes, worst }
}
