//! Gauge transformations, Coulomb fixing, Gauss residuals and
//! constraint-satisfying random data.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Reality, SpectralField, VectorField};
use crate::grid::Grid;
use crate::matter::im_product;
use crate::mcsh::McshState;
use crate::mkg::MkgState;
use crate::random::{random_field, random_vector, SpectrumProfile};
use crate::spectral::{curl_2d, df_part, div, grad, inv_laplacian};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub e: f64,
    pub kappa: f64,
    pub v: f64,
}

impl PhysParams {
    pub fn new(e: f64, kappa: f64, v: f64) -> Result<Self> {
        let p = PhysParams { e, kappa, v };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e.is_finite() && self.kappa.is_finite() && self.v.is_finite()) {
            return Err(Error::precondition("physical parameters must be finite"));
        }
        if self.kappa <= 0.0 {
            return Err(Error::precondition(format!("kappa must be positive, got {}", self.kappa)));
        }
        if self.v == 0.0 {
            return Err(Error::precondition("vacuum constant v must be nonzero"));
        }
        Ok(())
    }

    /// `e v^2 / kappa`, the vacuum value of `N`.
    pub fn n_shift(&self) -> f64 {
        self.e * self.v * self.v / self.kappa
    }
}

/// Time-independent real gauge function.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFunction {
    chi: SpectralField,
}

impl GaugeFunction {
    pub fn new(chi: SpectralField) -> Result<Self> {
        if !chi.is_real() {
            return Err(Error::InvalidField("gauge function must be real".into()));
        }
        Ok(GaugeFunction { chi })
    }

    pub fn zero(grid: Grid) -> Self {
        GaugeFunction {
            chi: SpectralField::zeros(grid, Reality::Real),
        }
    }

    pub fn chi(&self) -> &SpectralField {
        &self.chi
    }

    pub fn negated(&self) -> Self {
        GaugeFunction {
            chi: self.chi.scale(-1.0),
        }
    }
}

/// `P(exp(i q chi) f)`, evaluated on a lattice padded to `2n`.
pub(crate) fn phase_multiply(f: &SpectralField, chi: &SpectralField, q: f64) -> SpectralField {
    let grid = *f.grid();
    let m = 2 * grid.n();
    let fp = f.to_physical(m);
    let cp = chi.to_physical_real(m);
    let vals = fp
        .iter()
        .zip(&cp)
        .map(|(z, c)| z * Complex64::from_polar(1.0, q * c))
        .collect();
    SpectralField::from_physical(grid, m, vals, Reality::Complex)
}

fn check_chi(chi: &GaugeFunction, grid: &Grid) -> Result<()> {
    if chi.chi.grid() != grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

pub fn gauge_transform_mkg(state: &MkgState, chi: &GaugeFunction) -> Result<MkgState> {
    check_chi(chi, state.grid())?;
    Ok(MkgState {
        a: state.a.add(&grad(&chi.chi)),
        da: state.da.clone(),
        phi: phase_multiply(&state.phi, &chi.chi, 1.0),
        dphi: phase_multiply(&state.dphi, &chi.chi, 1.0),
        time: state.time,
    })
}

pub fn gauge_transform_mcsh(state: &McshState, chi: &GaugeFunction, p: &PhysParams) -> Result<McshState> {
    check_chi(chi, state.grid())?;
    let (phi, dphi) = if p.e == 0.0 {
        (state.phi.clone(), state.dphi.clone())
    } else {
        (
            phase_multiply(&state.phi, &chi.chi, p.e),
            phase_multiply(&state.dphi, &chi.chi, p.e),
        )
    };
    Ok(McshState {
        a: state.a.add(&grad(&chi.chi)),
        da: state.da.clone(),
        phi,
        dphi,
        n_tilde: state.n_tilde.clone(),
        dn_tilde: state.dn_tilde.clone(),
        time: state.time,
    })
}

/// `chi = -lap^{-1} div A0` and `A0 + grad chi`, which is divergence-free.
pub fn coulomb_fix(a0: &VectorField) -> Result<(VectorField, GaugeFunction)> {
    if a0.reality() != Reality::Real {
        return Err(Error::precondition("coulomb_fix expects a real vector field"));
    }
    let chi = inv_laplacian(&div(a0)).scale(-1.0);
    let fixed = a0.add(&grad(&chi));
    Ok((fixed, GaugeFunction { chi }))
}

/// `-div A_t - Im(phi conj phi_t)`.
pub fn gauss_residual_mkg(state: &MkgState) -> SpectralField {
    div(&state.da)
        .scale(-1.0)
        .sub(&im_product(&state.phi, &state.dphi))
}

/// `div A_t + kappa F_12 + 2 e Im(phi conj phi_t)`.
pub fn gauss_residual_mcsh(state: &McshState, p: &PhysParams) -> SpectralField {
    let mut r = div(&state.da);
    r.axpy(p.kappa, &curl_2d(&state.a).expect("planar state"));
    if p.e != 0.0 {
        r.axpy(2.0 * p.e, &im_product(&state.phi, &state.dphi));
    }
    r
}

/// Rotates `dphi -> dphi + i lambda phi` so that the total charge
/// `int Im(phi conj dphi)` vanishes. A periodic box admits no net charge.
fn neutralize(phi: &SpectralField, dphi: &mut SpectralField) {
    let q = im_product(phi, dphi).mean().re;
    let mass = phi.l2_norm().powi(2) / phi.grid().volume();
    if mass > 0.0 {
        let lambda = q / mass;
        dphi.axpy(lambda, &phi.mul_i());
    }
}

/// Random state satisfying the MKG Gauss law; deterministic in `seed`.
pub fn make_admissible_mkg(grid: Grid, seed: u64, profile: &SpectrumProfile, amplitude: f64) -> MkgState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_vector(&grid, &mut rng, profile, amplitude);
    let phi = random_field(&grid, &mut rng, profile, Reality::Complex, amplitude);
    let mut dphi = random_field(&grid, &mut rng, profile, Reality::Complex, amplitude);
    let w = df_part(&random_vector(&grid, &mut rng, profile, amplitude));
    neutralize(&phi, &mut dphi);
    let rho = im_product(&phi, &dphi);
    let da = w.sub(&grad(&inv_laplacian(&rho)));
    MkgState {
        a,
        da,
        phi,
        dphi,
        time: 0.0,
    }
}

/// Random state satisfying the MCSH Gauss law; deterministic in `seed`.
pub fn make_admissible_mcsh(
    grid: Grid,
    seed: u64,
    profile: &SpectrumProfile,
    amplitude: f64,
    p: &PhysParams,
) -> McshState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_vector(&grid, &mut rng, profile, amplitude);
    let phi = random_field(&grid, &mut rng, profile, Reality::Complex, amplitude);
    let mut dphi = random_field(&grid, &mut rng, profile, Reality::Complex, amplitude);
    let w = df_part(&random_vector(&grid, &mut rng, profile, amplitude));
    let n_tilde = random_field(&grid, &mut rng, profile, Reality::Real, amplitude);
    let dn_tilde = random_field(&grid, &mut rng, profile, Reality::Real, amplitude);
    if p.e != 0.0 {
        neutralize(&phi, &mut dphi);
    }
    let mut src = curl_2d(&a).expect("planar grid").scale(p.kappa);
    if p.e != 0.0 {
        src.axpy(2.0 * p.e, &im_product(&phi, &dphi));
    }
    // div A_t = -src
    let da = w.sub(&grad(&inv_laplacian(&src)));
    McshState {
        a,
        da,
        phi,
        dphi,
        n_tilde,
        dn_tilde,
        time: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcsh::energy_mcsh;
    use crate::mkg::energy_mkg;
    use crate::spectral::{curl, helmholtz};

    fn smooth(g: &Grid) -> SpectrumProfile {
        SpectrumProfile::new(0.1 * g.nyquist_wavenumber())
    }

    // exp(i chi) carries harmonics of size J_m(|chi|); a small amplitude keeps
    // the part cut off at Nyquist below the tolerances used here.
    fn chi(g: &Grid, seed: u64, amp: f64) -> GaugeFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GaugeFunction::new(random_field(g, &mut rng, &SpectrumProfile::new(0.05 * g.nyquist_wavenumber()), Reality::Real, amp)).unwrap()
    }

    fn mkg_diff(a: &MkgState, b: &MkgState) -> f64 {
        a.a.sub(&b.a).l2_norm()
            + a.da.sub(&b.da).l2_norm()
            + a.phi.sub(&b.phi).l2_norm()
            + a.dphi.sub(&b.dphi).l2_norm()
    }

    fn params() -> PhysParams {
        PhysParams::new(0.8, 1.3, 0.9).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(PhysParams::new(1.0, 0.0, 1.0).is_err());
        assert!(PhysParams::new(1.0, 1.0, 0.0).is_err());
        assert!(PhysParams::new(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_and_constant_gauge_functions() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let s = make_admissible_mkg(g, 1, &smooth(&g), 0.5);
        let same = gauge_transform_mkg(&s, &GaugeFunction::zero(g)).unwrap();
        assert!(mkg_diff(&s, &same) < 1e-13);
        let c = GaugeFunction::new(SpectralField::constant(g, 0.7)).unwrap();
        let rot = gauge_transform_mkg(&s, &c).unwrap();
        assert!(rot.a.sub(&s.a).l2_norm() == 0.0);
        let expect = s.phi.scale_complex(Complex64::from_polar(1.0, 0.7));
        assert!(rot.phi.sub(&expect).l2_norm() < 1e-13);
        let e0 = energy_mkg(&s);
        assert!((energy_mkg(&rot) - e0).abs() < 1e-13 * e0);
    }

    #[test]
    fn energy_and_gauss_residual_are_gauge_invariant() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let s = make_admissible_mkg(g, 2, &smooth(&g), 0.5);
        let t = gauge_transform_mkg(&s, &chi(&g, 3, 0.1)).unwrap();
        let e0 = energy_mkg(&s);
        assert!((energy_mkg(&t) - e0).abs() < 1e-11 * e0, "{:.3e}", (energy_mkg(&t) - e0).abs() / e0);
        let r = gauss_residual_mkg(&t).l2_norm();
        assert!(r < 1e-12, "{r:.3e}");

        let g2 = Grid::new(2, 32, 6.0).unwrap();
        let p = params();
        let s = make_admissible_mcsh(g2, 4, &smooth(&g2), 0.5, &p);
        let t = gauge_transform_mcsh(&s, &chi(&g2, 5, 0.5), &p).unwrap();
        let e0 = energy_mcsh(&s, &p);
        assert!((energy_mcsh(&t, &p) - e0).abs() < 1e-11 * e0);
        assert!(gauss_residual_mcsh(&t, &p).l2_norm() < 1e-12);
        assert_eq!(t.n_tilde, s.n_tilde);
    }

    #[test]
    fn decoupled_charge_leaves_phi_alone() {
        let g = Grid::new(2, 16, 6.0).unwrap();
        let p = PhysParams::new(0.0, 1.0, 1.0).unwrap();
        let s = make_admissible_mcsh(g, 6, &smooth(&g), 0.5, &p);
        let c = chi(&g, 7, 0.4);
        let t = gauge_transform_mcsh(&s, &c, &p).unwrap();
        assert_eq!(t.phi, s.phi);
        assert!(t.a.sub(&s.a).sub(&grad(c.chi())).l2_norm() < 1e-15);
    }

    #[test]
    fn composition_and_inverse() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let s = make_admissible_mkg(g, 8, &smooth(&g), 0.5);
        let c1 = chi(&g, 9, 0.1);
        let c2 = chi(&g, 10, 0.1);
        let sum = GaugeFunction::new(c1.chi().add(c2.chi())).unwrap();
        let two = gauge_transform_mkg(&gauge_transform_mkg(&s, &c2).unwrap(), &c1).unwrap();
        let one = gauge_transform_mkg(&s, &sum).unwrap();
        assert!(mkg_diff(&one, &two) < 1e-12, "{:.3e}", mkg_diff(&one, &two));
        let back = gauge_transform_mkg(&gauge_transform_mkg(&s, &c1).unwrap(), &c1.negated()).unwrap();
        assert!(mkg_diff(&back, &s) < 1e-12);
    }

    #[test]
    fn coulomb_fix_properties() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_vector(&g, &mut rng, &SpectrumProfile::quarter_nyquist(&g), 1.0);
        let (fixed, c) = coulomb_fix(&a).unwrap();
        assert!(div(&fixed).l2_norm() < 1e-12);
        assert!(fixed.l2_norm() <= a.l2_norm());
        let (twice, c2) = coulomb_fix(&fixed).unwrap();
        assert!(twice.sub(&fixed).l2_norm() < 1e-14);
        assert!(c2.chi().l2_norm() < 1e-14);
        assert!(c.chi().is_real());
        let (df, _) = helmholtz(&a).unwrap();
        let (same, c3) = coulomb_fix(&df).unwrap();
        assert!(same.sub(&df).l2_norm() < 1e-14 && c3.chi().l2_norm() < 1e-14);
        let psi = random_field(&g, &mut rng, &smooth(&g), Reality::Real, 1.0);
        let mut gradient = grad(&psi);
        gradient.components_mut()[1].coeffs_mut()[0] = Complex64::new(0.25, 0.0);
        let (rest, _) = coulomb_fix(&gradient).unwrap();
        assert!((rest.l2_norm() - 0.25 * g.volume().sqrt()).abs() < 1e-13);
        assert!(curl(&rest).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn gauss_residual_trivial_cases() {
        let g = Grid::new(3, 8, 2.0).unwrap();
        let mut s = MkgState::zeros(g).unwrap();
        assert_eq!(gauss_residual_mkg(&s).l2_norm(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        s.phi = random_field(&g, &mut rng, &smooth(&g), Reality::Real, 1.0).with_reality(Reality::Complex);
        s.dphi = random_field(&g, &mut rng, &smooth(&g), Reality::Real, 1.0).with_reality(Reality::Complex);
        assert!(gauss_residual_mkg(&s).l2_norm() < 1e-14);
    }

    #[test]
    fn chern_simons_term_balanced_by_curl_free_velocity() {
        let g = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let p = params();
        let mut s = McshState::zeros(g).unwrap();
        // A = (-d2 psi, d1 psi), psi = cos(x + 2y)
        let psi = SpectralField::from_fn(g, Reality::Real, |x| Complex64::new((x[0] + 2.0 * x[1]).cos(), 0.0));
        s.a = VectorField::new(vec![
            crate::spectral::partial(&psi, 1).unwrap().scale(-1.0),
            crate::spectral::partial(&psi, 0).unwrap(),
        ])
        .unwrap();
        let b = curl_2d(&s.a).unwrap();
        s.da = grad(&inv_laplacian(&b.scale(-p.kappa)));
        assert!(gauss_residual_mcsh(&s, &p).l2_norm() < 1e-13);
        assert_eq!(gauss_residual_mcsh(&McshState::zeros(g).unwrap(), &p).l2_norm(), 0.0);
    }

    #[test]
    fn admissible_data() {
        let g = Grid::new(3, 16, 6.0).unwrap();
        let prof = SpectrumProfile::quarter_nyquist(&g);
        let zero = make_admissible_mkg(g, 1, &prof, 0.0);
        assert_eq!(energy_mkg(&zero), 0.0);
        assert_eq!(gauss_residual_mkg(&zero).l2_norm(), 0.0);
        let a = make_admissible_mkg(g, 13, &prof, 1.0);
        let b = make_admissible_mkg(g, 13, &prof, 1.0);
        assert_eq!(a, b);
        assert!(gauss_residual_mkg(&a).l2_norm() < 1e-12);
        assert!(energy_mkg(&a).is_finite());

        let g2 = Grid::new(2, 32, 6.0).unwrap();
        let p = params();
        let prof = SpectrumProfile::quarter_nyquist(&g2);
        let zero = make_admissible_mcsh(g2, 1, &prof, 0.0, &p);
        assert_eq!(gauss_residual_mcsh(&zero, &p).l2_norm(), 0.0);
        let a = make_admissible_mcsh(g2, 14, &prof, 1.0, &p);
        assert_eq!(a, make_admissible_mcsh(g2, 14, &prof, 1.0, &p));
        assert!(gauss_residual_mcsh(&a, &p).l2_norm() < 1e-12);
        assert!(energy_mcsh(&a, &p).is_finite());
    }
}
