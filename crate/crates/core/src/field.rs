//! Scalar and vector fields stored as Fourier coefficients.
//!
//! Normalization: the forward transform carries `1/n^dim`, so a field is
//! `f(x) = sum_xi c(xi) exp(i xi.x)` and Parseval reads
//! `||f||_{L2}^2 = L^dim * sum |c|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::Grid;

const HERMITIAN_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reality {
    Real,
    Complex,
}

impl Reality {
    pub fn join(self, other: Reality) -> Reality {
        if self == Reality::Real && other == Reality::Real {
            Reality::Real
        } else {
            Reality::Complex
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    reality: Reality,
}

impl SpectralField {
    pub fn zeros(grid: Grid, reality: Reality) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
            reality,
        }
    }

    /// Validating constructor: checks length, finiteness and, for real
    /// fields, Hermitian symmetry.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>, reality: Reality) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        let f = SpectralField {
            grid,
            coeffs,
            reality,
        };
        if reality == Reality::Real {
            let defect = f.hermitian_defect();
            if defect > HERMITIAN_TOL {
                return Err(Error::InvalidField(format!(
                    "real field violates Hermitian symmetry (relative defect {defect:.3e})"
                )));
            }
        }
        Ok(f)
    }

    pub(crate) fn from_coeffs_unchecked(grid: Grid, coeffs: Vec<Complex64>, reality: Reality) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralField {
            grid,
            coeffs,
            reality,
        }
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        let mut f = SpectralField::zeros(grid, Reality::Real);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    pub fn constant_complex(grid: Grid, value: Complex64) -> Self {
        let mut f = SpectralField::zeros(grid, Reality::Complex);
        f.coeffs[0] = value;
        f
    }

    /// Samples `f` on the lattice and transforms; Nyquist content is dropped.
    pub fn from_fn(grid: Grid, reality: Reality, f: impl Fn([f64; 3]) -> Complex64) -> Self {
        let values: Vec<Complex64> = (0..grid.len()).map(|j| f(grid.point(j))).collect();
        SpectralField::from_physical(grid, grid.n(), values, reality)
    }

    /// Single Fourier mode `amplitude * exp(i k.x)` with integer wave index `k`.
    pub fn plane_wave(grid: Grid, k: [i64; 3], amplitude: Complex64) -> Result<Self> {
        let h = (grid.n() / 2) as i64;
        if k[..grid.dim()].iter().any(|&ki| ki.abs() >= h) {
            return Err(Error::InvalidField(format!("wave index {k:?} is not resolved")));
        }
        let mut f = SpectralField::zeros(grid, Reality::Complex);
        let idx = [grid.position(k[0]), grid.position(k[1]), grid.position(k[2])];
        let flat = grid.flat(idx);
        f.coeffs[flat] = amplitude;
        Ok(f)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn reality(&self) -> Reality {
        self.reality
    }

    pub fn is_real(&self) -> bool {
        self.reality == Reality::Real
    }

    pub fn with_reality(mut self, reality: Reality) -> Self {
        self.reality = reality;
        self
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.volume() * s).sqrt()
    }

    /// `int conj(self) * other dx`.
    pub fn inner(&self, other: &SpectralField) -> Complex64 {
        let s: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.volume()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `max |c(-xi) - conj c(xi)| / max |c|`, zero for an exactly real field.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.coeffs.len() {
            let j = self.grid.mirror(i);
            worst = worst.max((self.coeffs[j] - self.coeffs[i].conj()).norm());
        }
        worst / scale
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    pub fn scale_complex(&self, z: Complex64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= z);
        if z.im != 0.0 {
            out.reality = Reality::Complex;
        }
        out
    }

    /// `i * self`.
    pub fn mul_i(&self) -> SpectralField {
        self.scale_complex(Complex64::i())
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "axpy across grids");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.reality = self.reality.join(other.reality);
    }

    /// Coefficients of `conj(f)`: `c'(xi) = conj(c(-xi))`.
    pub fn conj(&self) -> SpectralField {
        if self.is_real() {
            return self.clone();
        }
        let coeffs = (0..self.coeffs.len())
            .map(|i| self.coeffs[self.grid.mirror(i)].conj())
            .collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs, Reality::Complex)
    }

    pub fn real_part(&self) -> SpectralField {
        if self.is_real() {
            return self.clone();
        }
        let c = self.conj();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&c.coeffs)
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs, Reality::Real)
    }

    pub fn imag_part(&self) -> SpectralField {
        if self.is_real() {
            return SpectralField::zeros(self.grid, Reality::Real);
        }
        let c = self.conj();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&c.coeffs)
            .map(|(a, b)| (a - b) * Complex64::new(0.0, -0.5))
            .collect();
        SpectralField::from_coeffs_unchecked(self.grid, coeffs, Reality::Real)
    }

    /// `re + i im` from two real fields.
    pub fn from_parts(re: &SpectralField, im: &SpectralField) -> SpectralField {
        let mut out = re.clone().with_reality(Reality::Complex);
        for (x, y) in out.coeffs.iter_mut().zip(&im.coeffs) {
            *x += y * Complex64::i();
        }
        out
    }

    /// Removes Nyquist-plane content, restoring the band-limited invariant.
    pub fn band_limit(&mut self) {
        for i in 0..self.coeffs.len() {
            if self.grid.touches_nyquist(i) {
                self.coeffs[i] = Complex64::default();
            }
        }
    }

    /// Physical values on an `m`-point-per-axis lattice (`m >= n`).
    pub fn to_physical(&self, m: usize) -> Vec<Complex64> {
        let g = &self.grid;
        let n = g.n();
        let dim = g.dim();
        assert!(m >= n, "padded lattice smaller than the grid");
        let mut buf = vec![Complex64::default(); m.pow(dim as u32)];
        let target = |i: usize| -> Option<usize> {
            if g.is_nyquist(i) {
                None
            } else {
                Some(g.wave_index(i).rem_euclid(m as i64) as usize)
            }
        };
        let map: Vec<Option<usize>> = (0..n).map(target).collect();
        if dim == 2 {
            for i0 in 0..n {
                let Some(t0) = map[i0] else { continue };
                for i1 in 0..n {
                    let Some(t1) = map[i1] else { continue };
                    buf[t0 * m + t1] = self.coeffs[i0 * n + i1];
                }
            }
        } else {
            for i0 in 0..n {
                let Some(t0) = map[i0] else { continue };
                for i1 in 0..n {
                    let Some(t1) = map[i1] else { continue };
                    let src = (i0 * n + i1) * n;
                    let dst = (t0 * m + t1) * m;
                    for i2 in 0..n {
                        if let Some(t2) = map[i2] {
                            buf[dst + t2] = self.coeffs[src + i2];
                        }
                    }
                }
            }
        }
        let support = lattice_support(g, m);
        fft::transform_pruned(&mut buf, m, dim, Direction::Inverse, Some(&support));
        if self.is_real() {
            buf.iter_mut().for_each(|v| v.im = 0.0);
        }
        buf
    }

    /// Real physical values on an `m`-point lattice; only meaningful for real fields.
    pub fn to_physical_real(&self, m: usize) -> Vec<f64> {
        self.to_physical(m).into_iter().map(|v| v.re).collect()
    }

    /// Transforms physical values sampled on an `m`-point lattice and keeps the
    /// band-limited modes of `grid`.
    pub fn from_physical(grid: Grid, m: usize, mut values: Vec<Complex64>, reality: Reality) -> Self {
        let n = grid.n();
        let dim = grid.dim();
        assert!(m >= n);
        assert_eq!(values.len(), m.pow(dim as u32));
        if reality == Reality::Real {
            values.iter_mut().for_each(|v| v.im = 0.0);
        }
        let support = lattice_support(&grid, m);
        fft::transform_pruned(&mut values, m, dim, Direction::Forward, Some(&support));
        let scale = 1.0 / m.pow(dim as u32) as f64;
        let mut coeffs = vec![Complex64::default(); grid.len()];
        let map: Vec<Option<usize>> = (0..n)
            .map(|i| {
                if grid.is_nyquist(i) {
                    None
                } else {
                    Some(grid.wave_index(i).rem_euclid(m as i64) as usize)
                }
            })
            .collect();
        if dim == 2 {
            for i0 in 0..n {
                let Some(t0) = map[i0] else { continue };
                for i1 in 0..n {
                    let Some(t1) = map[i1] else { continue };
                    coeffs[i0 * n + i1] = values[t0 * m + t1] * scale;
                }
            }
        } else {
            for i0 in 0..n {
                let Some(t0) = map[i0] else { continue };
                for i1 in 0..n {
                    let Some(t1) = map[i1] else { continue };
                    let dst = (i0 * n + i1) * n;
                    let src = (t0 * m + t1) * m;
                    for i2 in 0..n {
                        if let Some(t2) = map[i2] {
                            coeffs[dst + i2] = values[src + t2] * scale;
                        }
                    }
                }
            }
        }
        if reality == Reality::Real {
            symmetrize(&grid, &mut coeffs);
        }
        SpectralField::from_coeffs_unchecked(grid, coeffs, reality)
    }

    pub fn from_physical_real(grid: Grid, m: usize, values: &[f64]) -> Self {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        SpectralField::from_physical(grid, m, values, Reality::Real)
    }
}

/// Lattice indices that carry a band-limited mode of `grid`.
fn lattice_support(grid: &Grid, m: usize) -> Vec<bool> {
    let mut s = vec![false; m];
    for i in 0..grid.n() {
        if !grid.is_nyquist(i) {
            s[grid.wave_index(i).rem_euclid(m as i64) as usize] = true;
        }
    }
    s
}

/// Enforces exact Hermitian symmetry by averaging mirrored pairs.
pub(crate) fn symmetrize(grid: &Grid, coeffs: &mut [Complex64]) {
    for i in 0..coeffs.len() {
        let j = grid.mirror(i);
        if j < i {
            continue;
        }
        let avg = (coeffs[i] + coeffs[j].conj()) * 0.5;
        coeffs[i] = avg;
        coeffs[j] = avg.conj();
    }
}

/// A `dim`-component vector field whose components share one grid and reality.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidField("vector field needs components".into()))?;
        let grid = *first.grid();
        if components.len() != grid.dim() {
            return Err(Error::Dimension {
                expected: grid.dim(),
                found: components.len(),
            });
        }
        for c in &components {
            if *c.grid() != grid {
                return Err(Error::GridMismatch);
            }
            if c.reality() != first.reality() {
                return Err(Error::InvalidField("components differ in reality".into()));
            }
        }
        Ok(VectorField { components })
    }

    pub(crate) fn from_components_unchecked(components: Vec<SpectralField>) -> Self {
        VectorField { components }
    }

    pub fn zeros(grid: Grid, reality: Reality) -> Self {
        VectorField {
            components: (0..grid.dim()).map(|_| SpectralField::zeros(grid, reality)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn reality(&self) -> Reality {
        self.components[0].reality()
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.components[i]
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField] {
        &mut self.components
    }

    pub fn into_components(self) -> Vec<SpectralField> {
        self.components
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &VectorField) -> Complex64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, a: f64) -> VectorField {
        self.map(|c| c.scale(a))
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (x, y) in self.components.iter_mut().zip(&other.components) {
            x.axpy(a, y);
        }
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> VectorField {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &VectorField,
        f: impl Fn(&SpectralField, &SpectralField) -> SpectralField,
    ) -> VectorField {
        VectorField {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn mean(&self) -> Vec<Complex64> {
        self.components.iter().map(|c| c.mean()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2() -> Grid {
        Grid::new(2, 16, 2.0 * PI).unwrap()
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid2();
        let f = SpectralField::from_fn(g, Reality::Real, |x| {
            Complex64::new(1.0 + (x[0]).sin() * (2.0 * x[1]).cos(), 0.0)
        });
        let phys = f.to_physical_real(g.n());
        let quad: f64 = phys.iter().map(|v| v * v).sum::<f64>() * g.spacing().powi(2);
        assert!((f.l2_norm().powi(2) - quad).abs() < 1e-12 * quad);
    }

    #[test]
    fn padded_round_trip_is_exact() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let f = SpectralField::from_fn(g, Reality::Complex, |x| {
            Complex64::from_polar(1.0, 2.0 * PI * (x[0] + 2.0 * x[2]))
                + Complex64::new((2.0 * PI * x[1]).cos(), 0.0)
        });
        let m = g.dealias_n();
        let back = SpectralField::from_physical(g, m, f.to_physical(m), Reality::Complex);
        assert!(back.sub(&f).l2_norm() < 1e-13);
    }

    #[test]
    fn rejects_non_hermitian_real_field() {
        let g = grid2();
        let mut c = vec![Complex64::default(); g.len()];
        c[1] = Complex64::new(1.0, 0.0);
        assert!(SpectralField::from_coeffs(g, c, Reality::Real).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let g = grid2();
        let mut c = vec![Complex64::default(); g.len()];
        c[0] = Complex64::new(f64::NAN, 0.0);
        assert!(SpectralField::from_coeffs(g, c, Reality::Complex).is_err());
    }

    #[test]
    fn real_and_imag_parts_recompose() {
        let g = grid2();
        let f = SpectralField::from_fn(g, Reality::Complex, |x| {
            Complex64::new(x[0].sin(), (x[1] + x[0]).cos())
        });
        let back = SpectralField::from_parts(&f.real_part(), &f.imag_part());
        assert!(back.sub(&f).l2_norm() < 1e-13);
        assert!(f.real_part().hermitian_defect() < 1e-15);
    }

    #[test]
    fn vector_field_requires_matching_grids() {
        let g = grid2();
        let h = Grid::new(2, 8, 2.0 * PI).unwrap();
        let a = SpectralField::zeros(g, Reality::Real);
        let b = SpectralField::zeros(h, Reality::Real);
        assert!(VectorField::new(vec![a.clone(), b]).is_err());
        assert!(VectorField::new(vec![a.clone()]).is_err());
        assert!(VectorField::new(vec![a.clone(), a]).is_ok());
    }
}
