//! Fourier-multiplier operators and dealiased products.
//!
//! `inv_laplacian`, `inv_modulus_d` and `riesz` are only defined modulo
//! constants: they annihilate the mean (and every other mode whose
//! band-limited wavevector vanishes).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Reality, SpectralField, VectorField};
use crate::grid::Grid;

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis < grid.dim() {
        Ok(())
    } else {
        Err(Error::AxisOutOfRange {
            axis,
            dim: grid.dim(),
        })
    }
}

/// Applies a per-mode multiplier `m(xi)`.
pub fn apply_multiplier(
    f: &SpectralField,
    reality: Reality,
    m: impl Fn([f64; 3]) -> Complex64,
) -> SpectralField {
    let g = *f.grid();
    let src = f.coeffs();
    let mut out = vec![Complex64::default(); g.len()];
    g.for_each_mode(|i, xi| out[i] = src[i] * m(xi));
    SpectralField::from_coeffs_unchecked(g, out, reality)
}

/// Real-valued multiplier; preserves reality when the multiplier is even.
fn apply_real_multiplier(f: &SpectralField, m: impl Fn([f64; 3]) -> f64) -> SpectralField {
    let g = *f.grid();
    let src = f.coeffs();
    let mut out = vec![Complex64::default(); g.len()];
    g.for_each_mode(|i, xi| out[i] = src[i] * m(xi));
    SpectralField::from_coeffs_unchecked(g, out, f.reality())
}

fn norm2(xi: [f64; 3]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

pub fn partial(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    check_axis(f.grid(), axis)?;
    Ok(partial_unchecked(f, axis))
}

pub(crate) fn partial_unchecked(f: &SpectralField, axis: usize) -> SpectralField {
    apply_multiplier(f, f.reality(), |xi| Complex64::new(0.0, xi[axis]))
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    apply_real_multiplier(f, |xi| -norm2(xi))
}

pub fn inv_laplacian(f: &SpectralField) -> SpectralField {
    apply_real_multiplier(f, |xi| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    })
}

/// `|D|`, the multiplier `|xi|`.
pub fn modulus_d(f: &SpectralField) -> SpectralField {
    apply_real_multiplier(f, |xi| norm2(xi).sqrt())
}

/// `|D|^{-1}`, the multiplier `1/|xi|`.
pub fn inv_modulus_d(f: &SpectralField) -> SpectralField {
    apply_real_multiplier(f, |xi| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2.sqrt()
        }
    })
}

/// Riesz transform `R_i = |D|^{-1} d_i`, the multiplier `i xi_i / |xi|`.
pub fn riesz(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    check_axis(f.grid(), axis)?;
    Ok(apply_multiplier(f, f.reality(), |xi| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            Complex64::default()
        } else {
            Complex64::new(0.0, xi[axis] / k2.sqrt())
        }
    }))
}

pub fn grad(f: &SpectralField) -> VectorField {
    VectorField::from_components_unchecked(
        (0..f.grid().dim()).map(|i| partial_unchecked(f, i)).collect(),
    )
}

pub fn div(a: &VectorField) -> SpectralField {
    let mut out = partial_unchecked(a.component(0), 0);
    for i in 1..a.dim() {
        out.axpy(1.0, &partial_unchecked(a.component(i), i));
    }
    out
}

/// Three-dimensional curl.
pub fn curl(a: &VectorField) -> Result<VectorField> {
    if a.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: a.dim(),
        });
    }
    let d = |c: usize, ax: usize| partial_unchecked(a.component(c), ax);
    Ok(VectorField::from_components_unchecked(vec![
        d(2, 1).sub(&d(1, 2)),
        d(0, 2).sub(&d(2, 0)),
        d(1, 0).sub(&d(0, 1)),
    ]))
}

/// Planar curl `d_1 A_2 - d_2 A_1`.
pub fn curl_2d(a: &VectorField) -> Result<SpectralField> {
    if a.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: a.dim(),
        });
    }
    Ok(partial_unchecked(a.component(1), 0).sub(&partial_unchecked(a.component(0), 1)))
}

/// `L2` norm of the curl in either dimension (the scalar curl in 2D).
pub fn curl_norm(a: &VectorField) -> f64 {
    if a.dim() == 2 {
        curl_2d(a).map(|c| c.l2_norm()).unwrap_or(0.0)
    } else {
        curl(a).map(|c| c.l2_norm()).unwrap_or(0.0)
    }
}

/// `||grad A||_{L2}` summed over components.
pub fn grad_norm(a: &VectorField) -> f64 {
    a.components()
        .iter()
        .map(|c| h1dot_norm(c).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Homogeneous `H^1` seminorm `||grad f||_{L2}`.
pub fn h1dot_norm(f: &SpectralField) -> f64 {
    let g = f.grid();
    let mut s = 0.0;
    let c = f.coeffs();
    g.for_each_mode(|i, xi| s += norm2(xi) * c[i].norm_sqr());
    (g.volume() * s).sqrt()
}

/// Splits a real vector field into divergence-free and curl-free parts.
/// The mean is assigned to the divergence-free part.
pub fn helmholtz(a: &VectorField) -> Result<(VectorField, VectorField)> {
    if a.reality() != Reality::Real {
        return Err(Error::precondition("helmholtz expects a real vector field"));
    }
    let g = *a.grid();
    let d = g.dim();
    let mut cf: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); g.len()]; d];
    g.for_each_mode(|i, xi| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            return;
        }
        let mut dot = Complex64::default();
        for ax in 0..d {
            dot += a.component(ax).coeffs()[i] * xi[ax];
        }
        for ax in 0..d {
            cf[ax][i] = dot * (xi[ax] / k2);
        }
    });
    let cf = VectorField::from_components_unchecked(
        cf.into_iter()
            .map(|c| SpectralField::from_coeffs_unchecked(g, c, Reality::Real))
            .collect(),
    );
    let df = a.sub(&cf);
    Ok((df, cf))
}

/// Projection onto divergence-free fields, `(-lap)^{-1} curl curl`, with the
/// mean carried through unchanged.
pub fn project_df(x: &VectorField) -> Result<VectorField> {
    if x.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: x.dim(),
        });
    }
    let cc = curl(&curl(x)?)?;
    let mut out = cc.map(|c| inv_laplacian(c).scale(-1.0));
    for (o, src) in out.components_mut().iter_mut().zip(x.components()) {
        o.coeffs_mut()[0] = src.coeffs()[0];
    }
    Ok(out)
}

/// Divergence-free part in any dimension (Helmholtz multiplier form).
pub(crate) fn df_part(x: &VectorField) -> VectorField {
    let g = *x.grid();
    let d = g.dim();
    let mut out: Vec<Vec<Complex64>> = x.components().iter().map(|c| c.coeffs().to_vec()).collect();
    g.for_each_mode(|i, xi| {
        let k2 = norm2(xi);
        if k2 == 0.0 {
            return;
        }
        let mut dot = Complex64::default();
        for ax in 0..d {
            dot += out[ax][i] * xi[ax];
        }
        for ax in 0..d {
            out[ax][i] -= dot * (xi[ax] / k2);
        }
    });
    VectorField::from_components_unchecked(
        out.into_iter()
            .map(|c| SpectralField::from_coeffs_unchecked(g, c, x.reality()))
            .collect(),
    )
}

/// Pseudospectral product on the 3/2-padded lattice, truncated back to the grid.
pub fn product(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    let g = *u.grid();
    let m = g.dealias_n();
    let pu = u.to_physical(m);
    let pv = v.to_physical(m);
    let w: Vec<Complex64> = pu.iter().zip(&pv).map(|(a, b)| a * b).collect();
    Ok(SpectralField::from_physical(g, m, w, u.reality().join(v.reality())))
}

/// Null form `Q_ij(u, v) = d_i u d_j v - d_j u d_i v`.
pub fn null_form(u: &SpectralField, v: &SpectralField, i: usize, j: usize) -> Result<SpectralField> {
    u.same_grid(v)?;
    check_axis(u.grid(), i)?;
    check_axis(u.grid(), j)?;
    if i == j {
        return Err(Error::DegenerateIndexPair(i));
    }
    let g = *u.grid();
    let m = g.dealias_n();
    let ui = partial_unchecked(u, i).to_physical(m);
    let uj = partial_unchecked(u, j).to_physical(m);
    let vi = partial_unchecked(v, i).to_physical(m);
    let vj = partial_unchecked(v, j).to_physical(m);
    let w: Vec<Complex64> = (0..ui.len()).map(|k| ui[k] * vj[k] - uj[k] * vi[k]).collect();
    Ok(SpectralField::from_physical(g, m, w, u.reality().join(v.reality())))
}
