//! Maxwell-Klein-Gordon in temporal gauge (`A_0 = 0`, unit charge).
//!
//! With `D_j = d_j - i A_j` and `J_j = Im(phi conj D_j phi)`:
//!
//! ```text
//! A_tt   = lap A - grad div A - J
//! phi_tt = D_j D_j phi
//! ```
//!
//! Gauss law: `-div A_t - Im(phi conj phi_t) = 0`.
//!
//! The decomposed form evolves `A = A_df + A_cf` with `A_cf` first order:
//!
//! ```text
//! d_t A_cf = -grad lap^{-1} Im(phi conj phi_t)
//! A_df_tt  = lap A_df - P J
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Reality, SpectralField, VectorField};
use crate::grid::Grid;
use crate::matter::{higgs_density, im_product, matter_terms, sum_of_squares};
use crate::snapshot;
use crate::spectral::{curl, df_part, div, grad, inv_laplacian, laplacian, partial};

#[derive(Debug, Clone, PartialEq)]
pub struct MkgState {
    pub a: VectorField,
    pub da: VectorField,
    pub phi: SpectralField,
    pub dphi: SpectralField,
    pub time: f64,
}

impl MkgState {
    pub fn new(a: VectorField, da: VectorField, phi: SpectralField, dphi: SpectralField) -> Result<Self> {
        let s = MkgState {
            a,
            da,
            phi,
            dphi,
            time: 0.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn zeros(grid: Grid) -> Result<Self> {
        MkgState::new(
            VectorField::zeros(grid, Reality::Real),
            VectorField::zeros(grid, Reality::Real),
            SpectralField::zeros(grid, Reality::Complex),
            SpectralField::zeros(grid, Reality::Complex),
        )
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.phi.grid();
        if g.dim() != 3 {
            return Err(Error::Dimension {
                expected: 3,
                found: g.dim(),
            });
        }
        if self.a.grid() != g || self.da.grid() != g || self.dphi.grid() != g {
            return Err(Error::GridMismatch);
        }
        if self.a.reality() != Reality::Real || self.da.reality() != Reality::Real {
            return Err(Error::InvalidField("gauge potential must be real".into()));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.a.components().iter().all(|c| c.is_finite())
            && self.da.components().iter().all(|c| c.is_finite())
            && self.phi.is_finite()
            && self.dphi.is_finite()
    }

    /// Helmholtz split of the potential; the curl-free velocity is dropped
    /// (the decomposed form recovers it from the constraint).
    pub fn split(&self) -> MkgSplit {
        let a_df = df_part(&self.a);
        let a_cf = self.a.sub(&a_df);
        MkgSplit {
            a_df,
            a_cf,
            da_df: df_part(&self.da),
            phi: self.phi.clone(),
            dphi: self.dphi.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let names = ["A1", "A2", "A3", "dA1", "dA2", "dA3"];
        let mut fields: Vec<(&str, &SpectralField)> = Vec::new();
        for (i, c) in self.a.components().iter().chain(self.da.components()).enumerate() {
            fields.push((names[i], c));
        }
        fields.push(("phi", &self.phi));
        fields.push(("dphi", &self.dphi));
        snapshot::write_fields(path, &fields)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = snapshot::read_fields(path)?;
        let t = |n: &str| snapshot::take_field(&f, n);
        MkgState::new(
            VectorField::new(vec![t("A1")?, t("A2")?, t("A3")?])?,
            VectorField::new(vec![t("dA1")?, t("dA2")?, t("dA3")?])?,
            t("phi")?,
            t("dphi")?,
        )
    }
}

/// Decomposed variables: `A = A_df + A_cf`, with only `A_df` carrying a velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct MkgSplit {
    pub a_df: VectorField,
    pub a_cf: VectorField,
    pub da_df: VectorField,
    pub phi: SpectralField,
    pub dphi: SpectralField,
}

impl MkgSplit {
    /// Curl-free velocity implied by the Gauss law.
    pub fn da_cf(&self) -> VectorField {
        cf_velocity(&self.phi, &self.dphi)
    }

    pub fn recompose(&self, time: f64) -> MkgState {
        MkgState {
            a: self.a_df.add(&self.a_cf),
            da: self.da_df.add(&self.da_cf()),
            phi: self.phi.clone(),
            dphi: self.dphi.clone(),
            time,
        }
    }

    pub(crate) fn check_split(&self, tol: f64) -> Result<()> {
        let scale = self.a_df.l2_norm().max(self.a_cf.l2_norm()).max(1.0);
        let d = div(&self.a_df).l2_norm().max(div(&self.da_df).l2_norm());
        if d > tol * scale {
            return Err(Error::precondition(format!("A_df is not divergence-free ({d:.3e})")));
        }
        let c = curl(&self.a_cf)?.l2_norm();
        if c > tol * scale {
            return Err(Error::precondition(format!("A_cf is not curl-free ({c:.3e})")));
        }
        if self.a_cf.mean().iter().any(|m| m.norm() > tol * scale) {
            return Err(Error::precondition("A_cf carries a mean"));
        }
        Ok(())
    }
}

/// `-grad lap^{-1} Im(phi conj phi_t)`.
pub(crate) fn cf_velocity(phi: &SpectralField, dphi: &SpectralField) -> VectorField {
    grad(&inv_laplacian(&im_product(phi, dphi))).scale(-1.0)
}

/// `D_mu phi`: `mu = 0` is the time derivative, `mu = 1..3` spatial.
pub fn covariant_derivative(state: &MkgState, mu: usize) -> Result<SpectralField> {
    match mu {
        0 => Ok(state.dphi.clone()),
        1..=3 => {
            let j = mu - 1;
            let dj = partial(&state.phi, j)?;
            let prod = crate::spectral::product(state.a.component(j), &state.phi)?;
            Ok(dj.sub(&prod.mul_i()))
        }
        _ => Err(Error::AxisOutOfRange { axis: mu, dim: 4 }),
    }
}

/// Energy split into its electric, magnetic and Higgs parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MkgEnergy {
    pub electric: f64,
    pub magnetic: f64,
    pub kinetic: f64,
    pub gradient: f64,
}

impl MkgEnergy {
    pub fn total(&self) -> f64 {
        self.electric + self.magnetic + self.kinetic + self.gradient
    }
}

pub fn energy_parts_mkg(state: &MkgState) -> MkgEnergy {
    let m = matter_terms(&state.a, &state.phi, 1.0, None);
    MkgEnergy {
        electric: 0.5 * state.da.l2_norm().powi(2),
        magnetic: 0.5 * curl(&state.a).map(|c| c.l2_norm().powi(2)).unwrap_or(0.0),
        kinetic: 0.5 * state.dphi.l2_norm().powi(2),
        gradient: 0.5 * m.gradient_energy,
    }
}

/// `1/2 int |F_0i|^2 + sum_{i<j} F_ij^2 + |D_0 phi|^2 + sum_j |D_j phi|^2`.
pub fn energy_mkg(state: &MkgState) -> f64 {
    energy_parts_mkg(state).total()
}

/// Pointwise energy density, band-limited.
pub fn energy_density_mkg(state: &MkgState) -> SpectralField {
    let g = *state.grid();
    let m = g.dealias_n();
    let b = curl(&state.a).expect("three-dimensional state");
    let fields: Vec<&SpectralField> = state.da.components().iter().chain(b.components()).collect();
    let maxwell = sum_of_squares(&fields, m);
    let higgs = higgs_density(&state.a, &state.phi, &state.dphi, 1.0, 1.0, m);
    let vals: Vec<f64> = maxwell.iter().zip(&higgs).map(|(x, y)| 0.5 * (x + y)).collect();
    SpectralField::from_physical_real(g, m, &vals)
}

/// `lap A - grad div A`, i.e. `-curl curl A`.
pub(crate) fn maxwell_operator(a: &VectorField) -> VectorField {
    let da = div(a);
    a.zip_with(&grad(&da), |ai, gi| laplacian(ai).sub(gi))
}

pub fn rhs_raw_mkg(state: &MkgState) -> (VectorField, SpectralField) {
    let m = matter_terms(&state.a, &state.phi, 1.0, None);
    let j = VectorField::from_components_unchecked(m.current);
    let dda = maxwell_operator(&state.a).sub(&j);
    (dda, m.accel)
}

/// Returns `(d_t A_cf, A_df_tt, phi_tt)`.
pub fn rhs_decomposed_mkg(split: &MkgSplit) -> Result<(VectorField, VectorField, SpectralField)> {
    split.check_split(1e-10)?;
    Ok(rhs_decomposed_unchecked(split))
}

pub(crate) fn rhs_decomposed_unchecked(split: &MkgSplit) -> (VectorField, VectorField, SpectralField) {
    let a = split.a_df.add(&split.a_cf);
    let m = matter_terms(&a, &split.phi, 1.0, None);
    let j = VectorField::from_components_unchecked(m.current);
    let dda_df = split
        .a_df
        .map(laplacian)
        .sub(&df_part(&j));
    (cf_velocity(&split.phi, &split.dphi), dda_df, m.accel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::make_admissible_mkg;
    use crate::random::SpectrumProfile;
    use num_complex::Complex64;

    fn smooth(g: &Grid) -> SpectrumProfile {
        SpectrumProfile::new(0.1 * g.nyquist_wavenumber())
    }

    #[test]
    fn zero_state_has_zero_energy_and_rhs() {
        let s = MkgState::zeros(Grid::new(3, 8, 1.0).unwrap()).unwrap();
        assert_eq!(energy_mkg(&s), 0.0);
        let (a, p) = rhs_raw_mkg(&s);
        assert_eq!(a.l2_norm() + p.l2_norm(), 0.0);
    }

    #[test]
    fn constant_phi_has_zero_energy() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let mut s = MkgState::zeros(g).unwrap();
        s.phi = SpectralField::constant_complex(g, Complex64::new(0.3, -1.2));
        assert!(energy_mkg(&s).abs() < 1e-28);
    }

    #[test]
    fn plane_wave_energy_matches_quadrature() {
        let g = Grid::new(3, 8, 3.0).unwrap();
        let mut s = MkgState::zeros(g).unwrap();
        let eps = 0.2;
        let k = [1i64, -2, 3];
        s.phi = SpectralField::plane_wave(g, k, Complex64::new(eps, 0.0)).unwrap();
        let xi2 = g.dk().powi(2) * 14.0;
        let closed = 0.5 * g.volume() * eps * eps * xi2;
        assert!((energy_mkg(&s) - closed).abs() < 1e-13 * closed);
        // independent quadrature of |grad phi|^2 on the bare lattice
        let mut quad = 0.0;
        for j in 0..3 {
            let v = partial(&s.phi, j).unwrap().to_physical(g.n());
            quad += v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        quad *= 0.5 * g.volume() / g.len() as f64;
        assert!((energy_mkg(&s) - quad).abs() < 1e-13 * closed);
    }

    #[test]
    fn free_wave_limit() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let mut s = MkgState::zeros(g).unwrap();
        s.phi = SpectralField::plane_wave(g, [1, 1, 0], Complex64::new(0.5, 0.1)).unwrap();
        let (_, ddphi) = rhs_raw_mkg(&s);
        let xi2 = 2.0 * g.dk().powi(2);
        assert!(ddphi.add(&s.phi.scale(xi2)).l2_norm() < 1e-13);
    }

    #[test]
    fn covariant_derivative_of_two_modes() {
        // A_1 = a cos(k y), phi = exp(i p x): D_1 phi = i p phi - i a cos(k y) phi
        let g = Grid::new(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        let mut s = MkgState::zeros(g).unwrap();
        let a = 0.3;
        s.a.components_mut()[0] = SpectralField::from_fn(g, Reality::Real, |x| Complex64::new(a * (2.0 * x[1]).cos(), 0.0));
        s.phi = SpectralField::from_fn(g, Reality::Complex, |x| Complex64::from_polar(1.0, 3.0 * x[0]));
        let d1 = covariant_derivative(&s, 1).unwrap();
        let expect = SpectralField::from_fn(g, Reality::Complex, |x| {
            Complex64::new(0.0, 3.0 - a * (2.0 * x[1]).cos()) * Complex64::from_polar(1.0, 3.0 * x[0])
        });
        assert!(d1.sub(&expect).l2_norm() < 1e-12);
        assert!(covariant_derivative(&s, 4).is_err());
        assert_eq!(covariant_derivative(&s, 0).unwrap(), s.dphi);
    }

    #[test]
    fn forces_are_energy_gradients() {
        // directional derivative of the potential energy against the forces
        let g = Grid::new(3, 8, 4.0).unwrap();
        let s = make_admissible_mkg(g, 3, &smooth(&g), 0.4);
        let d = make_admissible_mkg(g, 4, &smooth(&g), 0.4);
        let (dda, ddphi) = rhs_raw_mkg(&s);
        let pot = |t: f64| {
            let mut x = s.clone();
            x.a.axpy(t, &d.a);
            x.phi.axpy(t, &d.phi);
            let e = energy_parts_mkg(&x);
            e.magnetic + e.gradient
        };
        let h = 1e-4;
        let fd = (pot(h) - pot(-h)) / (2.0 * h);
        let analytic = -(dda.inner(&d.a).re + ddphi.inner(&d.phi).re);
        assert!((fd - analytic).abs() < 1e-7 * analytic.abs().max(1.0), "{fd} vs {analytic}");
    }

    #[test]
    fn decomposed_matches_raw() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let s = make_admissible_mkg(g, 5, &smooth(&g), 0.5);
        let split = s.split();
        let (dacf, ddadf, ddphi_d) = rhs_decomposed_mkg(&split).unwrap();
        let (dda, ddphi) = rhs_raw_mkg(&s);
        assert!(ddphi.sub(&ddphi_d).l2_norm() < 1e-12 * ddphi.l2_norm());
        // velocity of A_cf equals the curl-free velocity of the admissible state
        assert!(dacf.sub(&s.da.sub(&df_part(&s.da))).l2_norm() < 1e-12);
        // time derivative of d_t A_cf from the phi equation
        let dd_cf = grad(&inv_laplacian(&im_product(&s.phi, &ddphi))).scale(-1.0);
        let total = ddadf.add(&dd_cf);
        let rel = total.sub(&dda).l2_norm() / dda.l2_norm();
        assert!(rel < 1e-10, "relative mismatch {rel:.3e}");
        assert!(div(&ddadf).l2_norm() < 1e-12);
    }

    #[test]
    fn gauss_law_is_propagated() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let s = make_admissible_mkg(g, 6, &smooth(&g), 0.5);
        let (dda, ddphi) = rhs_raw_mkg(&s);
        // d/dt(-div A_t - Im(phi conj phi_t)) = -div A_tt - Im(phi conj phi_tt)
        let rate = div(&dda).scale(-1.0).sub(&im_product(&s.phi, &ddphi));
        let scale = div(&dda).l2_norm().max(1.0);
        assert!(rate.l2_norm() < 1e-10 * scale, "{:.3e}", rate.l2_norm());
    }

    #[test]
    fn split_precondition_is_enforced() {
        let g = Grid::new(3, 8, 3.0).unwrap();
        let s = make_admissible_mkg(g, 7, &SpectrumProfile::quarter_nyquist(&g), 1.0);
        let mut bad = s.split();
        bad.a_df = s.a.clone();
        assert!(rhs_decomposed_mkg(&bad).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let g = Grid::new(3, 8, 3.0).unwrap();
        let s = make_admissible_mkg(g, 8, &smooth(&g), 1.0);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("state.snap");
        s.save(&p).unwrap();
        assert_eq!(MkgState::load(&p).unwrap(), s);
    }
}
