//! Time integration for both systems.
//!
//! The phase space is a flat list of spectral fields: positions, then
//! momenta, then (for the decomposed form) the curl-free potential, which
//! is slaved to the Gauss law and integrated by quadrature. Leapfrog is
//! kick-drift-kick; the Chern-Simons velocity term is folded into the kicks
//! with a Cayley solve so the scheme stays symmetric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{SpectralField, VectorField};
use crate::gauge::{
    coulomb_fix, gauge_transform_mcsh, gauge_transform_mkg, gauss_residual_mcsh, gauss_residual_mkg,
    GaugeFunction, PhysParams,
};
use crate::grid::Grid;
use crate::matter::{im_product, matter_terms};
use crate::mcsh::{self, energy_mcsh, McshSplit, McshState};
use crate::mkg::{self, energy_mkg, maxwell_operator, MkgSplit, MkgState};
use crate::spectral::{curl, curl_2d, df_part, grad_norm, h1dot_norm, laplacian};

/// Leapfrog is stable for `dt |xi|_max <= 2`; runs are held to half of that.
pub const CFL_LIMIT: f64 = 2.0;
pub const CFL_SAFETY: f64 = 0.5;

/// Relative energy drift that flags a run as blown up.
const BLOWUP_DRIFT: f64 = 0.1;
const BLOWUP_MAX: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Leapfrog,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Raw,
    Decomposed,
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "leapfrog" => Ok(Scheme::Leapfrog),
            "rk4" => Ok(Scheme::Rk4),
            _ => Err(format!("unknown scheme {s:?} (leapfrog|rk4)")),
        }
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "raw" => Ok(Formulation::Raw),
            "decomposed" => Ok(Formulation::Decomposed),
            _ => Err(format!("unknown formulation {s:?} (raw|decomposed)")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Leapfrog => "leapfrog",
            Scheme::Rk4 => "rk4",
        })
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Raw => "raw",
            Formulation::Decomposed => "decomposed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    /// Record a diagnostics row every this many steps.
    pub snapshot_every: usize,
    pub formulation: Formulation,
    /// Re-impose the Coulomb gauge every this many steps.
    pub regauge_every: Option<usize>,
    /// Diameter of the initial support, for the wrap-around guard.
    pub support_diameter: Option<f64>,
}

impl IntegratorConfig {
    pub fn new(scheme: Scheme, dt: f64, t_final: f64) -> Self {
        IntegratorConfig {
            scheme,
            dt,
            t_final,
            snapshot_every: 1,
            formulation: Formulation::Raw,
            regauge_every: None,
            support_diameter: None,
        }
    }

    pub fn with_formulation(mut self, f: Formulation) -> Self {
        self.formulation = f;
        self
    }

    pub fn with_snapshot_every(mut self, k: usize) -> Self {
        self.snapshot_every = k;
        self
    }

    /// Number of steps; `t_final` must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Integrator(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::Integrator(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return Err(Error::Integrator(format!(
                "t_final = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        self.steps()?;
        if self.snapshot_every == 0 {
            return Err(Error::Integrator("snapshot_every must be at least 1".into()));
        }
        if self.regauge_every == Some(0) {
            return Err(Error::Integrator("regauge_every must be at least 1".into()));
        }
        let product = self.dt * grid.max_wavenumber();
        let limit = CFL_LIMIT * CFL_SAFETY;
        if product > limit {
            return Err(Error::Cfl { product, limit });
        }
        if let Some(support) = self.support_diameter {
            if grid.box_length() <= 2.0 * self.t_final + support {
                return Err(Error::WrapAround {
                    box_length: grid.box_length(),
                    t_final: self.t_final,
                    support,
                });
            }
        }
        Ok(())
    }
}

/// A state of either system.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Mkg(MkgState),
    Mcsh(McshState, PhysParams),
}

impl System {
    pub fn grid(&self) -> &Grid {
        match self {
            System::Mkg(s) => s.grid(),
            System::Mcsh(s, _) => s.grid(),
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            System::Mkg(s) => s.time,
            System::Mcsh(s, _) => s.time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            System::Mkg(s) => s.validate(),
            System::Mcsh(s, p) => {
                p.validate()?;
                s.validate()
            }
        }
    }

    pub fn energy(&self) -> f64 {
        match self {
            System::Mkg(s) => energy_mkg(s),
            System::Mcsh(s, p) => energy_mcsh(s, p),
        }
    }

    pub fn gauss_residual(&self) -> SpectralField {
        match self {
            System::Mkg(s) => gauss_residual_mkg(s),
            System::Mcsh(s, p) => gauss_residual_mcsh(s, p),
        }
    }

    pub fn potential(&self) -> &VectorField {
        match self {
            System::Mkg(s) => &s.a,
            System::Mcsh(s, _) => &s.a,
        }
    }

    pub fn electric(&self) -> &VectorField {
        match self {
            System::Mkg(s) => &s.da,
            System::Mcsh(s, _) => &s.da,
        }
    }

    pub fn phi(&self) -> &SpectralField {
        match self {
            System::Mkg(s) => &s.phi,
            System::Mcsh(s, _) => &s.phi,
        }
    }

    pub fn n_tilde(&self) -> Option<&SpectralField> {
        match self {
            System::Mkg(_) => None,
            System::Mcsh(s, _) => Some(&s.n_tilde),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            System::Mkg(s) => s.is_finite(),
            System::Mcsh(s, _) => s.is_finite(),
        }
    }

    fn fields(&self) -> Vec<&SpectralField> {
        match self {
            System::Mkg(s) => s
                .a
                .components()
                .iter()
                .chain(s.da.components())
                .chain([&s.phi, &s.dphi])
                .collect(),
            System::Mcsh(s, _) => s
                .a
                .components()
                .iter()
                .chain(s.da.components())
                .chain([&s.phi, &s.dphi, &s.n_tilde, &s.dn_tilde])
                .collect(),
        }
    }

    /// Largest coefficient modulus over all fields.
    pub fn max_abs_coeff(&self) -> f64 {
        self.fields().iter().map(|f| f.max_abs_coeff()).fold(0.0, f64::max)
    }

    /// Fields under their snapshot record names.
    pub fn named_fields(&self) -> Vec<(&'static str, &SpectralField)> {
        match self {
            System::Mkg(s) => {
                let mut out = Vec::new();
                for (i, c) in s.a.components().iter().enumerate() {
                    out.push((["A1", "A2", "A3"][i], c));
                }
                for (i, c) in s.da.components().iter().enumerate() {
                    out.push((["dA1", "dA2", "dA3"][i], c));
                }
                out.push(("phi", &s.phi));
                out.push(("dphi", &s.dphi));
                out
            }
            System::Mcsh(s, _) => vec![
                ("A1", s.a.component(0)),
                ("A2", s.a.component(1)),
                ("dA1", s.da.component(0)),
                ("dA2", s.da.component(1)),
                ("phi", &s.phi),
                ("dphi", &s.dphi),
                ("ntilde", &s.n_tilde),
                ("dntilde", &s.dn_tilde),
            ],
        }
    }

    /// `L^2` distance over all fields.
    pub fn distance(&self, other: &System) -> Result<f64> {
        let a = self.fields();
        let b = other.fields();
        if a.len() != b.len() {
            return Err(Error::precondition("states belong to different systems"));
        }
        let mut s = 0.0;
        for (x, y) in a.iter().zip(&b) {
            x.same_grid(y)?;
            s += x.sub(y).l2_norm().powi(2);
        }
        Ok(s.sqrt())
    }

    pub fn gauge_transform(&self, chi: &GaugeFunction) -> Result<System> {
        Ok(match self {
            System::Mkg(s) => System::Mkg(gauge_transform_mkg(s, chi)?),
            System::Mcsh(s, p) => System::Mcsh(gauge_transform_mcsh(s, chi, p)?, *p),
        })
    }

    fn with_time(mut self, t: f64) -> System {
        match &mut self {
            System::Mkg(s) => s.time = t,
            System::Mcsh(s, _) => s.time = t,
        }
        self
    }
}

type Phase = Vec<SpectralField>;

fn vector(fields: &[SpectralField]) -> VectorField {
    VectorField::from_components_unchecked(fields.to_vec())
}

/// One formulation of one system in flat phase-space form.
trait Model {
    /// Velocity-independent accelerations of the momentum block.
    fn forces(&self, y: &[SpectralField]) -> Phase;
    /// Advances the momenta by `step` given the forces at the current positions.
    fn kick(&self, y: &mut [SpectralField], f: &[SpectralField], step: f64);
    /// Advances the positions by `h` at fixed momenta.
    fn drift(&self, y: &mut [SpectralField], h: f64);
    /// Time derivative of the whole phase vector.
    fn derivative(&self, y: &[SpectralField]) -> Phase;
    fn to_system(&self, y: &[SpectralField], time: f64) -> System;
}

struct MkgRaw;
struct MkgDecomposed;
struct McshRaw(PhysParams);
struct McshDecomposed(PhysParams);

// MKG raw layout: A(3), phi, A_t(3), phi_t.
impl Model for MkgRaw {
    fn forces(&self, y: &[SpectralField]) -> Phase {
        let a = vector(&y[0..3]);
        let m = matter_terms(&a, &y[3], 1.0, None);
        let mut f = maxwell_operator(&a).into_components();
        for (fi, ji) in f.iter_mut().zip(&m.current) {
            fi.axpy(-1.0, ji);
        }
        f.push(m.accel);
        f
    }

    fn kick(&self, y: &mut [SpectralField], f: &[SpectralField], step: f64) {
        for i in 0..4 {
            y[4 + i].axpy(step, &f[i]);
        }
    }

    fn drift(&self, y: &mut [SpectralField], h: f64) {
        let (q, p) = y.split_at_mut(4);
        for i in 0..4 {
            q[i].axpy(h, &p[i]);
        }
    }

    fn derivative(&self, y: &[SpectralField]) -> Phase {
        let mut d: Phase = y[4..8].to_vec();
        d.extend(self.forces(y));
        d
    }

    fn to_system(&self, y: &[SpectralField], time: f64) -> System {
        System::Mkg(MkgState {
            a: vector(&y[0..3]),
            da: vector(&y[4..7]),
            phi: y[3].clone(),
            dphi: y[7].clone(),
            time,
        })
    }
}

// MKG decomposed layout: A_df(3), phi, A_df_t(3), phi_t, A_cf(3).
impl Model for MkgDecomposed {
    fn forces(&self, y: &[SpectralField]) -> Phase {
        let a_df = vector(&y[0..3]);
        let a = a_df.add(&vector(&y[8..11]));
        let m = matter_terms(&a, &y[3], 1.0, None);
        let pj = df_part(&VectorField::from_components_unchecked(m.current));
        let mut f = a_df.map(laplacian).sub(&pj).into_components();
        f.push(m.accel);
        f
    }

    fn kick(&self, y: &mut [SpectralField], f: &[SpectralField], step: f64) {
        for i in 0..4 {
            y[4 + i].axpy(step, &f[i]);
        }
    }

    fn drift(&self, y: &mut [SpectralField], h: f64) {
        // Im(phi conj phi_t) is constant along the drift, so this is exact.
        let v_cf = mkg::cf_velocity(&y[3], &y[7]);
        for i in 0..3 {
            y[8 + i].axpy(h, v_cf.component(i));
        }
        let (q, p) = y.split_at_mut(4);
        for i in 0..4 {
            q[i].axpy(h, &p[i]);
        }
    }

    fn derivative(&self, y: &[SpectralField]) -> Phase {
        let mut d: Phase = y[4..8].to_vec();
        d.extend(self.forces(y));
        d.extend(mkg::cf_velocity(&y[3], &y[7]).into_components());
        d
    }

    fn to_system(&self, y: &[SpectralField], time: f64) -> System {
        let split = MkgSplit {
            a_df: vector(&y[0..3]),
            a_cf: vector(&y[8..11]),
            da_df: vector(&y[4..7]),
            phi: y[3].clone(),
            dphi: y[7].clone(),
        };
        System::Mkg(split.recompose(time))
    }
}

/// Solves `x = v + step (F - kappa R(v + x) / 2)` for a planar vector.
fn cayley_kick(v: [&mut SpectralField; 2], f: [&SpectralField; 2], step: f64, kappa: f64) {
    let a = 0.5 * step * kappa;
    let den = 1.0 + a * a;
    let [v1, v2] = v;
    let c1 = v1.coeffs_mut();
    let c2 = v2.coeffs_mut();
    for k in 0..c1.len() {
        let r1 = c1[k] - a * c2[k] + step * f[0].coeffs()[k];
        let r2 = c2[k] + a * c1[k] + step * f[1].coeffs()[k];
        c1[k] = (r1 - a * r2) / den;
        c2[k] = (r2 + a * r1) / den;
    }
}

// MCSH raw layout: A(2), phi, N~, A_t(2), phi_t, N~_t.
impl Model for McshRaw {
    fn forces(&self, y: &[SpectralField]) -> Phase {
        let (fa, fphi, fn_) = mcsh::conservative_forces(&vector(&y[0..2]), &y[2], &y[3], &self.0);
        let mut f = fa.into_components();
        f.push(fphi);
        f.push(fn_);
        f
    }

    fn kick(&self, y: &mut [SpectralField], f: &[SpectralField], step: f64) {
        let (v1, rest) = y[4..].split_at_mut(1);
        cayley_kick([&mut v1[0], &mut rest[0]], [&f[0], &f[1]], step, self.0.kappa);
        y[6].axpy(step, &f[2]);
        y[7].axpy(step, &f[3]);
    }

    fn drift(&self, y: &mut [SpectralField], h: f64) {
        let (q, p) = y.split_at_mut(4);
        for i in 0..4 {
            q[i].axpy(h, &p[i]);
        }
    }

    fn derivative(&self, y: &[SpectralField]) -> Phase {
        let mut f = self.forces(y);
        let v = vector(&y[4..6]);
        let r = mcsh::rotate(&v);
        for i in 0..2 {
            f[i].axpy(-self.0.kappa, r.component(i));
        }
        let mut d: Phase = y[4..8].to_vec();
        d.extend(f);
        d
    }

    fn to_system(&self, y: &[SpectralField], time: f64) -> System {
        System::Mcsh(
            McshState {
                a: vector(&y[0..2]),
                da: vector(&y[4..6]),
                phi: y[2].clone(),
                dphi: y[6].clone(),
                n_tilde: y[3].clone(),
                dn_tilde: y[7].clone(),
                time,
            },
            self.0,
        )
    }
}

// MCSH decomposed layout: A_df(2), phi, N~, A_df_t(2), phi_t, N~_t, A_cf(2).
// The conservative force on A_df omits the Chern-Simons term; the kick adds
// it using the curl-free velocity at the kick midpoint. Only the mean of
// A_df_t feels its own rotation, since P R w = 0 for divergence-free w
// away from the zero mode.
impl Model for McshDecomposed {
    fn forces(&self, y: &[SpectralField]) -> Phase {
        let p = &self.0;
        let a_df = vector(&y[0..2]);
        let a = a_df.add(&vector(&y[8..10]));
        // P(lap A - grad div A - 2eJ) = lap A_df - P(2eJ).
        let (fa, fphi, fn_) = mcsh::conservative_forces(&a, &y[2], &y[3], p);
        let mut f = df_part(&fa).into_components();
        f.push(fphi);
        f.push(fn_);
        f
    }

    fn kick(&self, y: &mut [SpectralField], f: &[SpectralField], step: f64) {
        let p = &self.0;
        let old_dphi = y[6].clone();
        y[6].axpy(step, &f[2]);
        y[7].axpy(step, &f[3]);
        let mut mid = old_dphi;
        mid.axpy(1.0, &y[6]);
        let mid = mid.scale(0.5);
        let v_cf = mcsh::cf_velocity(&vector(&y[0..2]), &y[2], &mid, p);
        let rot = df_part(&mcsh::rotate(&v_cf));
        let mean = [y[4].coeffs()[0], y[5].coeffs()[0]];
        for i in 0..2 {
            y[4 + i].axpy(step, &f[i]);
            y[4 + i].axpy(-step * p.kappa, rot.component(i));
        }
        let a = 0.5 * step * p.kappa;
        let den = 1.0 + a * a;
        let r1 = mean[0] - a * mean[1] + step * f[0].coeffs()[0];
        let r2 = mean[1] + a * mean[0] + step * f[1].coeffs()[0];
        y[4].coeffs_mut()[0] = (r1 - a * r2) / den;
        y[5].coeffs_mut()[0] = (r2 + a * r1) / den;
    }

    fn drift(&self, y: &mut [SpectralField], h: f64) {
        // The charge density is constant along the drift and B is linear in
        // time, so the curl-free velocity at the midpoint integrates exactly.
        let mut a_mid = vector(&y[0..2]);
        a_mid.axpy(0.5 * h, &vector(&y[4..6]));
        let v_cf = mcsh::cf_velocity(&a_mid, &y[2], &y[6], &self.0);
        for i in 0..2 {
            y[8 + i].axpy(h, v_cf.component(i));
        }
        let (q, p) = y.split_at_mut(4);
        for i in 0..4 {
            q[i].axpy(h, &p[i]);
        }
    }

    fn derivative(&self, y: &[SpectralField]) -> Phase {
        let split = self.split(y);
        let (da_cf, dda_df, ddphi, ddn) = mcsh::rhs_decomposed_unchecked(&split, &self.0);
        let mut d: Phase = y[4..8].to_vec();
        d.extend(dda_df.into_components());
        d.push(ddphi);
        d.push(ddn);
        d.extend(da_cf.into_components());
        d
    }

    fn to_system(&self, y: &[SpectralField], time: f64) -> System {
        System::Mcsh(self.split(y).recompose(time, &self.0), self.0)
    }
}

impl McshDecomposed {
    fn split(&self, y: &[SpectralField]) -> McshSplit {
        McshSplit {
            a_df: vector(&y[0..2]),
            a_cf: vector(&y[8..10]),
            da_df: vector(&y[4..6]),
            phi: y[2].clone(),
            dphi: y[6].clone(),
            n_tilde: y[3].clone(),
            dn_tilde: y[7].clone(),
        }
    }
}

fn phase_of(system: &System, formulation: Formulation) -> (Box<dyn Model>, Phase) {
    match (system, formulation) {
        (System::Mkg(s), Formulation::Raw) => {
            let mut y = s.a.components().to_vec();
            y.push(s.phi.clone());
            y.extend(s.da.components().iter().cloned());
            y.push(s.dphi.clone());
            (Box::new(MkgRaw), y)
        }
        (System::Mkg(s), Formulation::Decomposed) => {
            let sp = s.split();
            let mut y = sp.a_df.into_components();
            y.push(sp.phi);
            y.extend(sp.da_df.into_components());
            y.push(sp.dphi);
            y.extend(sp.a_cf.into_components());
            (Box::new(MkgDecomposed), y)
        }
        (System::Mcsh(s, p), Formulation::Raw) => {
            let mut y = s.a.components().to_vec();
            y.push(s.phi.clone());
            y.push(s.n_tilde.clone());
            y.extend(s.da.components().iter().cloned());
            y.push(s.dphi.clone());
            y.push(s.dn_tilde.clone());
            (Box::new(McshRaw(*p)), y)
        }
        (System::Mcsh(s, p), Formulation::Decomposed) => {
            let sp = s.split();
            let mut y = sp.a_df.into_components();
            y.push(sp.phi);
            y.push(sp.n_tilde);
            y.extend(sp.da_df.into_components());
            y.push(sp.dphi);
            y.push(sp.dn_tilde);
            y.extend(sp.a_cf.into_components());
            (Box::new(McshDecomposed(*p)), y)
        }
    }
}

fn combine(y: &[SpectralField], terms: &[(f64, &Phase)]) -> Phase {
    let mut out = y.to_vec();
    for (c, k) in terms {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            o.axpy(*c, ki);
        }
    }
    out
}

/// A running integrator holding one system in one formulation.
pub struct Integrator {
    model: Box<dyn Model>,
    y: Phase,
    forces: Option<Phase>,
    scheme: Scheme,
    dt: f64,
    time: f64,
}

impl Integrator {
    pub fn new(system: &System, formulation: Formulation, scheme: Scheme, dt: f64) -> Result<Self> {
        system.validate()?;
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::Integrator(format!("invalid step {dt}")));
        }
        let (model, y) = phase_of(system, formulation);
        Ok(Integrator {
            model,
            y,
            forces: None,
            scheme,
            dt,
            time: system.time(),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn system(&self) -> System {
        self.model.to_system(&self.y, self.time)
    }

    pub fn step(&mut self) {
        self.step_by(self.dt)
    }

    /// One step of size `h`; a negative `h` runs the scheme backwards.
    pub fn step_by(&mut self, h: f64) {
        match self.scheme {
            Scheme::Leapfrog => {
                let f0 = match self.forces.take() {
                    Some(f) => f,
                    None => self.model.forces(&self.y),
                };
                self.model.kick(&mut self.y, &f0, 0.5 * h);
                self.model.drift(&mut self.y, h);
                let f1 = self.model.forces(&self.y);
                self.model.kick(&mut self.y, &f1, 0.5 * h);
                self.forces = Some(f1);
            }
            Scheme::Rk4 => {
                let k1 = self.model.derivative(&self.y);
                let k2 = self.model.derivative(&combine(&self.y, &[(0.5 * h, &k1)]));
                let k3 = self.model.derivative(&combine(&self.y, &[(0.5 * h, &k2)]));
                let k4 = self.model.derivative(&combine(&self.y, &[(h, &k3)]));
                self.y = combine(
                    &self.y,
                    &[(h / 6.0, &k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)],
                );
            }
        }
        self.time += h;
    }
}

/// Advances `system` by one step of `cfg`.
pub fn step(system: &System, cfg: &IntegratorConfig) -> Result<System> {
    let mut it = Integrator::new(system, cfg.formulation, cfg.scheme, cfg.dt)?;
    it.step();
    Ok(it.system())
}

/// Diagnostics recorded along a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    pub gauss_l2: f64,
    #[serde(rename = "l2_A")]
    pub l2_a: f64,
    pub l2_phi: f64,
    #[serde(rename = "l2_N")]
    pub l2_n: Option<f64>,
    #[serde(rename = "h1dot_A")]
    pub h1dot_a: f64,
    pub h1dot_phi: f64,
    /// Explicit growth bound minus the observed norm, for `A`, `phi`, `N~`.
    pub bound37_slack: f64,
    pub bound39_slack: f64,
    pub bound52_slack: Option<f64>,
}

impl RunRow {
    pub const CSV_HEADER: &'static str =
        "t,E,gauss_l2,l2_A,l2_phi,l2_N,h1dot_A,h1dot_phi,bound37_slack,bound39_slack,bound52_slack";

    pub fn csv_line(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{}",
            self.t,
            self.energy,
            self.gauss_l2,
            self.l2_a,
            self.l2_phi,
            opt(self.l2_n),
            self.h1dot_a,
            self.h1dot_phi,
            self.bound37_slack,
            self.bound39_slack,
            opt(self.bound52_slack)
        )
    }
}

/// Constants `c` in the explicit bounds `||X(t)|| <= ||X(0)|| + c t sqrt(E(0))`.
pub(crate) fn bound_constants(system: &System) -> (f64, f64, Option<f64>) {
    let r2 = 2f64.sqrt();
    match system {
        System::Mkg(_) => (r2, r2, None),
        System::Mcsh(..) => (r2, 1.0, Some(r2)),
    }
}

struct Baseline {
    energy: f64,
    a: f64,
    phi: f64,
    n: Option<f64>,
}

fn make_row(system: &System, base: Option<&Baseline>) -> (RunRow, f64) {
    let energy = system.energy();
    let a = system.potential();
    let l2_a = a.l2_norm();
    let l2_phi = system.phi().l2_norm();
    let l2_n = system.n_tilde().map(|n| n.l2_norm());
    let t = system.time();
    let (ca, cphi, cn) = bound_constants(system);
    let (e0, a0, phi0, n0) = match base {
        Some(b) => (b.energy, b.a, b.phi, b.n),
        None => (energy, l2_a, l2_phi, l2_n),
    };
    let grow = t.abs() * e0.max(0.0).sqrt();
    let row = RunRow {
        t,
        energy,
        gauss_l2: system.gauss_residual().l2_norm(),
        l2_a,
        l2_phi,
        l2_n,
        h1dot_a: grad_norm(a),
        h1dot_phi: h1dot_norm(system.phi()),
        bound37_slack: a0 + ca * grow - l2_a,
        bound39_slack: phi0 + cphi * grow - l2_phi,
        bound52_slack: match (n0, l2_n, cn) {
            (Some(n0), Some(n), Some(c)) => Some(n0 + c * grow - n),
            _ => None,
        },
    };
    (row, energy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowUp { time: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rows: Vec<RunRow>,
    pub status: RunStatus,
    /// Final state, or the last finite state before a blow-up.
    pub final_state: System,
    /// `L^2` distance between the regauged run and a run without regauging.
    pub regauge_defect: Option<f64>,
}

/// Admissibility threshold for initial data, relative to `max(1, sqrt E)`.
const ADMISSIBLE_TOL: f64 = 1e-10;

fn check_admissible(system: &System) -> Result<()> {
    let r = system.gauss_residual().l2_norm();
    let scale = system.energy().abs().sqrt().max(1.0);
    if r > ADMISSIBLE_TOL * scale {
        return Err(Error::precondition(format!(
            "initial data violate the Gauss law (residual {r:.3e})"
        )));
    }
    Ok(())
}

/// Integrates to `cfg.t_final`, recording a row every `snapshot_every`
/// steps and at the end.
pub fn run(system: &System, cfg: &IntegratorConfig) -> Result<RunRecord> {
    run_with(system, cfg, |_, _| Ok(()))
}

/// As [`run`], calling `observe` on every recorded row and its state.
pub fn run_with(
    system: &System,
    cfg: &IntegratorConfig,
    mut observe: impl FnMut(&RunRow, &System) -> Result<()>,
) -> Result<RunRecord> {
    system.validate()?;
    cfg.validate(system.grid())?;
    check_admissible(system)?;
    let nsteps = cfg.steps()?;
    let t0 = system.time();

    let (row0, e0) = make_row(system, None);
    let base = Baseline {
        energy: e0,
        a: row0.l2_a,
        phi: row0.l2_phi,
        n: row0.l2_n,
    };
    observe(&row0, system)?;
    let mut rows = vec![row0];

    // Regauging evolves a gauge-fixed copy; `chi_total` maps it back.
    let mut chi_total = GaugeFunction::zero(*system.grid());
    let regauge = |s: &System, chi_total: &mut GaugeFunction| -> Result<System> {
        let (_, chi) = coulomb_fix(s.potential())?;
        *chi_total = GaugeFunction::new(chi_total.chi().add(chi.chi()))?;
        s.gauge_transform(&chi)
    };
    let start = match cfg.regauge_every {
        Some(_) => regauge(system, &mut chi_total)?,
        None => system.clone(),
    };
    let mut it = Integrator::new(&start, cfg.formulation, cfg.scheme, cfg.dt)?;
    let physical = |s: System, chi_total: &GaugeFunction| -> Result<System> {
        if cfg.regauge_every.is_some() {
            s.gauge_transform(&chi_total.negated())
        } else {
            Ok(s)
        }
    };

    let mut status = RunStatus::Completed;
    let mut last_good = system.clone();
    for k in 1..=nsteps {
        it.step();
        let t = t0 + k as f64 * cfg.dt;
        let current = it.system().with_time(t);
        let max = current.max_abs_coeff();
        if !current.is_finite() || max > BLOWUP_MAX {
            status = RunStatus::BlowUp {
                time: t,
                reason: if max.is_finite() {
                    format!("field amplitude {max:.3e} exceeds {BLOWUP_MAX:e}")
                } else {
                    "non-finite field values".into()
                },
            };
            break;
        }
        let record = k % cfg.snapshot_every == 0 || k == nsteps;
        let regauge_now = matches!(cfg.regauge_every, Some(r) if k % r == 0 && k < nsteps);
        if record {
            let phys = physical(current.clone(), &chi_total)?;
            let (row, e) = make_row(&phys, Some(&base));
            let drift = (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
            if drift > BLOWUP_DRIFT {
                status = RunStatus::BlowUp {
                    time: t,
                    reason: format!("relative energy drift {drift:.3e}"),
                };
                rows.push(row);
                last_good = phys;
                break;
            }
            observe(&row, &phys)?;
            rows.push(row);
            last_good = phys;
        } else if k == nsteps || regauge_now {
            last_good = physical(current.clone(), &chi_total)?;
        }
        if regauge_now {
            let fixed = regauge(&current, &mut chi_total)?;
            it = Integrator::new(&fixed, cfg.formulation, cfg.scheme, cfg.dt)?;
        }
    }

    let regauge_defect = match (cfg.regauge_every, &status) {
        (Some(_), RunStatus::Completed) => {
            let mut plain = cfg.clone();
            plain.regauge_every = None;
            let shadow = run(system, &plain)?;
            Some(last_good.distance(&shadow.final_state)?)
        }
        _ => None,
    };

    Ok(RunRecord {
        rows,
        status,
        final_state: last_good,
        regauge_defect,
    })
}

/// Differences of gauge-invariant observables between two states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableDefect {
    /// `|| |phi_a|^2 - |phi_b|^2 ||`.
    pub phi_modulus: f64,
    /// `|| F_ij^a - F_ij^b ||`.
    pub field_strength: f64,
    /// `|| F_0i^a - F_0i^b ||`.
    pub electric: f64,
    /// `|| e_a - e_b ||` for the energy densities.
    pub energy_density: f64,
    pub energy: f64,
}

impl ObservableDefect {
    pub fn max(&self) -> f64 {
        [self.phi_modulus, self.field_strength, self.electric, self.energy_density, self.energy]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn field_strength(system: &System) -> Vec<SpectralField> {
    match system {
        System::Mkg(s) => curl(&s.a).expect("three-dimensional state").into_components(),
        System::Mcsh(s, _) => vec![curl_2d(&s.a).expect("planar state")],
    }
}

pub fn energy_density(system: &System) -> SpectralField {
    match system {
        System::Mkg(s) => mkg::energy_density_mkg(s),
        System::Mcsh(s, p) => mcsh::energy_density_mcsh(s, p),
    }
}

pub fn compare_observables(a: &System, b: &System) -> Result<ObservableDefect> {
    let same_kind = matches!((a, b), (System::Mkg(_), System::Mkg(_)) | (System::Mcsh(..), System::Mcsh(..)));
    if !same_kind {
        return Err(Error::precondition("states belong to different systems"));
    }
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let diff = |x: &[SpectralField], y: &[SpectralField]| -> f64 {
        x.iter().zip(y).map(|(u, v)| u.sub(v).l2_norm().powi(2)).sum::<f64>().sqrt()
    };
    let rho_a = im_product(a.phi(), &a.phi().mul_i());
    let rho_b = im_product(b.phi(), &b.phi().mul_i());
    Ok(ObservableDefect {
        // Im(phi conj(i phi)) = -|phi|^2.
        phi_modulus: rho_a.sub(&rho_b).l2_norm(),
        field_strength: diff(&field_strength(a), &field_strength(b)),
        electric: diff(a.electric().components(), b.electric().components()),
        energy_density: energy_density(a).sub(&energy_density(b)).l2_norm(),
        energy: (a.energy() - b.energy()).abs(),
    })
}

#[derive(Debug, Clone)]
pub struct CrossValidation {
    pub raw: RunRecord,
    pub decomposed: RunRecord,
    pub defect: ObservableDefect,
}

/// Runs both formulations from the same data and compares observables at
/// the final time.
pub fn cross_validate(system: &System, cfg: &IntegratorConfig) -> Result<CrossValidation> {
    let mut c = cfg.clone();
    c.formulation = Formulation::Raw;
    let raw = run(system, &c)?;
    c.formulation = Formulation::Decomposed;
    let decomposed = run(system, &c)?;
    if raw.status != RunStatus::Completed || decomposed.status != RunStatus::Completed {
        return Err(Error::Integrator("a cross-validation run did not complete".into()));
    }
    let defect = compare_observables(&raw.final_state, &decomposed.final_state)?;
    Ok(CrossValidation {
        raw,
        decomposed,
        defect,
    })
}
