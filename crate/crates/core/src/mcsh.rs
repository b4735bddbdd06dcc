//! Maxwell-Chern-Simons-Higgs in temporal gauge on the plane, nontopological
//! branch.
//!
//! `N = N~ + e v^2 / kappa` is never stored. With `D_j = d_j - i e A_j`,
//! `J_j = Im(phi conj D_j phi)`, `B = d_1 A_2 - d_2 A_1` and
//! `R(w) = (w_2, -w_1)`:
//!
//! ```text
//! A_tt   = lap A - grad div A - kappa R(A_t) - 2 e J
//! phi_tt = D_j D_j phi - U_phibar
//! N~_tt  = lap N~ - U_N
//! ```
//!
//! with `U = 1/2 (e|phi|^2 + kappa N - e v^2)^2 + e^2 N^2 |phi|^2`,
//! `U_phibar = (e (e|phi|^2 + kappa N~) + e^2 N^2) phi` and
//! `U_N = kappa (e|phi|^2 + kappa N~) + 2 e^2 N |phi|^2`.
//!
//! Gauss law: `div A_t + kappa B + 2 e Im(phi conj phi_t) = 0`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Reality, SpectralField, VectorField};
use crate::gauge::PhysParams;
use crate::grid::Grid;
use crate::matter::{higgs_density, im_product, matter_terms, sum_of_squares, PotentialInput};
use crate::snapshot;
use crate::spectral::{curl_2d, df_part, div, grad, h1dot_norm, inv_laplacian, laplacian};

#[derive(Debug, Clone, PartialEq)]
pub struct McshState {
    pub a: VectorField,
    pub da: VectorField,
    pub phi: SpectralField,
    pub dphi: SpectralField,
    pub n_tilde: SpectralField,
    pub dn_tilde: SpectralField,
    pub time: f64,
}

impl McshState {
    pub fn new(
        a: VectorField,
        da: VectorField,
        phi: SpectralField,
        dphi: SpectralField,
        n_tilde: SpectralField,
        dn_tilde: SpectralField,
    ) -> Result<Self> {
        let s = McshState {
            a,
            da,
            phi,
            dphi,
            n_tilde,
            dn_tilde,
            time: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(grid: Grid) -> Result<Self> {
        McshState::new(
            VectorField::zeros(grid, Reality::Real),
            VectorField::zeros(grid, Reality::Real),
            SpectralField::zeros(grid, Reality::Complex),
            SpectralField::zeros(grid, Reality::Complex),
            SpectralField::zeros(grid, Reality::Real),
            SpectralField::zeros(grid, Reality::Real),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.phi.grid();
        if g.dim() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: g.dim(),
            });
        }
        if self.a.grid() != g
            || self.da.grid() != g
            || self.dphi.grid() != g
            || self.n_tilde.grid() != g
            || self.dn_tilde.grid() != g
        {
            return Err(Error::GridMismatch);
        }
        if self.a.reality() != Reality::Real
            || self.da.reality() != Reality::Real
            || !self.n_tilde.is_real()
            || !self.dn_tilde.is_real()
        {
            return Err(Error::InvalidField("A and N~ must be real".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.a.components().iter().all(|c| c.is_finite())
            && self.da.components().iter().all(|c| c.is_finite())
            && self.phi.is_finite()
            && self.dphi.is_finite()
            && self.n_tilde.is_finite()
            && self.dn_tilde.is_finite()
    }

    pub fn split(&self) -> McshSplit {
        let a_df = df_part(&self.a);
        let a_cf = self.a.sub(&a_df);
        McshSplit {
            a_df,
            a_cf,
            da_df: df_part(&self.da),
            phi: self.phi.clone(),
            dphi: self.dphi.clone(),
            n_tilde: self.n_tilde.clone(),
            dn_tilde: self.dn_tilde.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let c = |v: &VectorField, i: usize| v.component(i).clone();
        let fields = [
            ("A1", c(&self.a, 0)),
            ("A2", c(&self.a, 1)),
            ("dA1", c(&self.da, 0)),
            ("dA2", c(&self.da, 1)),
            ("phi", self.phi.clone()),
            ("dphi", self.dphi.clone()),
            ("ntilde", self.n_tilde.clone()),
            ("dntilde", self.dn_tilde.clone()),
        ];
        let refs: Vec<(&str, &SpectralField)> = fields.iter().map(|(n, f)| (*n, f)).collect();
        snapshot::write_fields(path, &refs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = snapshot::read_fields(path)?;
        let t = |n: &str| snapshot::take_field(&f, n);
        McshState::new(
            VectorField::new(vec![t("A1")?, t("A2")?])?,
            VectorField::new(vec![t("dA1")?, t("dA2")?])?,
            t("phi")?,
            t("dphi")?,
            t("ntilde")?,
            t("dntilde")?,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McshSplit {
    pub a_df: VectorField,
    pub a_cf: VectorField,
    pub da_df: VectorField,
    pub phi: SpectralField,
    pub dphi: SpectralField,
    pub n_tilde: SpectralField,
    pub dn_tilde: SpectralField,
}

impl McshSplit {
    pub fn da_cf(&self, p: &PhysParams) -> VectorField {
        cf_velocity(&self.a_df, &self.phi, &self.dphi, p)
    }

    pub fn recompose(&self, time: f64, p: &PhysParams) -> McshState {
        McshState {
            a: self.a_df.add(&self.a_cf),
            da: self.da_df.add(&self.da_cf(p)),
            phi: self.phi.clone(),
            dphi: self.dphi.clone(),
            n_tilde: self.n_tilde.clone(),
            dn_tilde: self.dn_tilde.clone(),
            time,
        }
    }

    pub(crate) fn check_split(&self, tol: f64) -> Result<()> {
        let scale = self.a_df.l2_norm().max(self.a_cf.l2_norm()).max(1.0);
        let d = div(&self.a_df).l2_norm().max(div(&self.da_df).l2_norm());
        if d > tol * scale {
            return Err(Error::precondition(format!("A_df is not divergence-free ({d:.3e})")));
        }
        let c = curl_2d(&self.a_cf)?.l2_norm();
        if c > tol * scale {
            return Err(Error::precondition(format!("A_cf is not curl-free ({c:.3e})")));
        }
        if self.a_cf.mean().iter().any(|m| m.norm() > tol * scale) {
            return Err(Error::precondition("A_cf carries a mean"));
        }
        Ok(())
    }
}

/// `-grad lap^{-1} [kappa B + 2 e Im(phi conj phi_t)]`; only `A_df` carries curl.
pub(crate) fn cf_velocity(a_df: &VectorField, phi: &SpectralField, dphi: &SpectralField, p: &PhysParams) -> VectorField {
    let mut src = curl_2d(a_df).expect("planar field").scale(p.kappa);
    if p.e != 0.0 {
        src.axpy(2.0 * p.e, &im_product(phi, dphi));
    }
    grad(&inv_laplacian(&src)).scale(-1.0)
}

/// `R(w) = (w_2, -w_1)`.
pub(crate) fn rotate(w: &VectorField) -> VectorField {
    VectorField::from_components_unchecked(vec![w.component(1).clone(), w.component(0).scale(-1.0)])
}

fn pointwise_potential(phi: &SpectralField, n_tilde: &SpectralField, p: &PhysParams, f: impl Fn(f64, f64, f64) -> f64) -> SpectralField {
    let g = *phi.grid();
    let m = g.dealias_n();
    let pp = phi.to_physical(m);
    let np = n_tilde.to_physical_real(m);
    let vals: Vec<f64> = pp.iter().zip(&np).map(|(z, &nt)| f(z.norm_sqr(), nt, nt + p.n_shift())).collect();
    SpectralField::from_physical_real(g, m, &vals)
}

/// `U(|phi|^2, N)` as a band-limited real field.
pub fn potential_u(phi: &SpectralField, n_tilde: &SpectralField, p: &PhysParams) -> SpectralField {
    pointwise_potential(phi, n_tilde, p, |rho, nt, n| {
        let s = p.e * rho + p.kappa * nt;
        0.5 * s * s + p.e * p.e * n * n * rho
    })
}

/// `(U_phibar, U_N)`.
pub fn potential_grad(phi: &SpectralField, n_tilde: &SpectralField, p: &PhysParams) -> (SpectralField, SpectralField) {
    let coef = pointwise_potential(phi, n_tilde, p, |rho, nt, n| {
        p.e * (p.e * rho + p.kappa * nt) + p.e * p.e * n * n
    });
    let u_phibar = crate::spectral::product(&coef.with_reality(Reality::Complex), phi).expect("same grid");
    let u_n = pointwise_potential(phi, n_tilde, p, |rho, nt, n| {
        p.kappa * (p.e * rho + p.kappa * nt) + 2.0 * p.e * p.e * n * rho
    });
    (u_phibar, u_n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McshEnergy {
    pub electric: f64,
    pub magnetic: f64,
    pub kinetic: f64,
    pub gradient: f64,
    pub n_kinetic: f64,
    pub n_gradient: f64,
    pub potential: f64,
}

impl McshEnergy {
    pub fn total(&self) -> f64 {
        self.electric + self.magnetic + self.kinetic + self.gradient + self.n_kinetic + self.n_gradient + self.potential
    }
}

pub fn energy_parts_mcsh(state: &McshState, p: &PhysParams) -> McshEnergy {
    let m = matter_terms(&state.a, &state.phi, p.e, Some(potential_input(&state.n_tilde, p)));
    McshEnergy {
        electric: 0.5 * state.da.l2_norm().powi(2),
        magnetic: 0.5 * curl_2d(&state.a).map(|b| b.l2_norm().powi(2)).unwrap_or(0.0),
        kinetic: state.dphi.l2_norm().powi(2),
        gradient: m.gradient_energy,
        n_kinetic: 0.5 * state.dn_tilde.l2_norm().powi(2),
        n_gradient: 0.5 * h1dot_norm(&state.n_tilde).powi(2),
        potential: m.potential_energy,
    }
}

/// `int 1/2 |F_0i|^2 + 1/2 F_12^2 + |D_mu phi|^2 + 1/2 |d_mu N|^2 + U`.
pub fn energy_mcsh(state: &McshState, p: &PhysParams) -> f64 {
    energy_parts_mcsh(state, p).total()
}

/// Pointwise energy density, band-limited.
pub fn energy_density_mcsh(state: &McshState, p: &PhysParams) -> SpectralField {
    let g = *state.grid();
    let m = g.dealias_n();
    let b = curl_2d(&state.a).expect("planar state");
    let gn = grad(&state.n_tilde);
    let fields: Vec<&SpectralField> = state
        .da
        .components()
        .iter()
        .chain([&b, &state.dn_tilde])
        .chain(gn.components())
        .collect();
    let quad = sum_of_squares(&fields, m);
    let higgs = higgs_density(&state.a, &state.phi, &state.dphi, p.e, 1.0, m);
    let u = potential_u(&state.phi, &state.n_tilde, p).to_physical_real(m);
    let vals: Vec<f64> = quad
        .iter()
        .zip(&higgs)
        .zip(&u)
        .map(|((x, y), z)| 0.5 * x + y + z)
        .collect();
    SpectralField::from_physical_real(g, m, &vals)
}

fn potential_input<'a>(n_tilde: &'a SpectralField, p: &PhysParams) -> PotentialInput<'a> {
    PotentialInput {
        ntilde: n_tilde,
        e: p.e,
        kappa: p.kappa,
        v: p.v,
    }
}

/// Accelerations without the Chern-Simons velocity term:
/// `(lap A - grad div A - 2 e J, phi_tt, N~_tt)`.
pub(crate) fn conservative_forces(
    a: &VectorField,
    phi: &SpectralField,
    n_tilde: &SpectralField,
    p: &PhysParams,
) -> (VectorField, SpectralField, SpectralField) {
    let m = matter_terms(a, phi, p.e, Some(potential_input(n_tilde, p)));
    let j = VectorField::from_components_unchecked(m.current);
    let fa = crate::mkg::maxwell_operator(a).sub(&j.scale(2.0 * p.e));
    let fn_ = laplacian(n_tilde).add(&m.n_force.expect("potential requested"));
    (fa, m.accel, fn_)
}

/// Returns `(A_tt, phi_tt, N~_tt)`.
pub fn rhs_raw_mcsh(state: &McshState, p: &PhysParams) -> (VectorField, SpectralField, SpectralField) {
    let (fa, fphi, fn_) = conservative_forces(&state.a, &state.phi, &state.n_tilde, p);
    let dda = fa.sub(&rotate(&state.da).scale(p.kappa));
    (dda, fphi, fn_)
}

/// Returns `(d_t A_cf, A_df_tt, phi_tt, N~_tt)`.
pub fn rhs_decomposed_mcsh(
    split: &McshSplit,
    p: &PhysParams,
) -> Result<(VectorField, VectorField, SpectralField, SpectralField)> {
    split.check_split(1e-10)?;
    Ok(rhs_decomposed_unchecked(split, p))
}

pub(crate) fn rhs_decomposed_unchecked(
    split: &McshSplit,
    p: &PhysParams,
) -> (VectorField, VectorField, SpectralField, SpectralField) {
    let a = split.a_df.add(&split.a_cf);
    let m = matter_terms(&a, &split.phi, p.e, Some(potential_input(&split.n_tilde, p)));
    let j = VectorField::from_components_unchecked(m.current);
    let da_cf = cf_velocity(&split.a_df, &split.phi, &split.dphi, p);
    let v = split.da_df.add(&da_cf);
    let src = rotate(&v).scale(p.kappa).add(&j.scale(2.0 * p.e));
    let dda_df = split.a_df.map(laplacian).sub(&df_part(&src));
    let ddn = laplacian(&split.n_tilde).add(&m.n_force.expect("potential requested"));
    (da_cf, dda_df, m.accel, ddn)
}
