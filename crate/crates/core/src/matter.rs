//! Shared Higgs-sector kernel for both systems.
//!
//! Everything is evaluated on the 3/2-padded lattice from one set of
//! interpolated values: `g_j = d_j phi - i q A_j phi`, the current
//! `Im(phi conj g_j)`, the covariant Laplacian and, for the Chern-Simons
//! system, the potential. The discrete energy uses the same lattice
//! quadrature, so the forces returned here are exact gradients of it.

use num_complex::Complex64;

use crate::field::{Reality, SpectralField, VectorField};
use crate::spectral::partial_unchecked;

/// Inputs of the Chern-Simons-Higgs potential `U(|phi|^2, N)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PotentialInput<'a> {
    pub ntilde: &'a SpectralField,
    pub e: f64,
    pub kappa: f64,
    pub v: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct MatterTerms {
    /// `P Im(phi conj D_j phi)`, one real field per axis.
    pub current: Vec<SpectralField>,
    /// `D_j D_j phi`, minus `U_phibar` when a potential is present.
    pub accel: SpectralField,
    /// `sum_j int |D_j phi|^2` by lattice quadrature.
    pub gradient_energy: f64,
    /// `-U_N`, when a potential is present.
    pub n_force: Option<SpectralField>,
    /// `int U`, zero without a potential.
    pub potential_energy: f64,
}

/// Physical values of two real fields from one complex transform.
pub(crate) fn real_pair_to_physical(
    f: &SpectralField,
    g: &SpectralField,
    m: usize,
) -> (Vec<f64>, Vec<f64>) {
    let packed = SpectralField::from_parts(f, g);
    let vals = packed.to_physical(m);
    (vals.iter().map(|z| z.re).collect(), vals.iter().map(|z| z.im).collect())
}

/// Real vector field components on the padded lattice.
pub(crate) fn vector_to_physical(a: &VectorField, m: usize) -> Vec<Vec<f64>> {
    let c = a.components();
    let mut out = Vec::with_capacity(c.len());
    let mut i = 0;
    while i < c.len() {
        if i + 1 < c.len() {
            let (x, y) = real_pair_to_physical(&c[i], &c[i + 1], m);
            out.push(x);
            out.push(y);
            i += 2;
        } else {
            out.push(c[i].to_physical_real(m));
            i += 1;
        }
    }
    out
}

/// Band-limited coefficients of real lattice functions, two per transform.
pub(crate) fn reals_from_physical(
    grid: crate::grid::Grid,
    m: usize,
    values: Vec<Vec<f64>>,
) -> Vec<SpectralField> {
    let mut out = Vec::with_capacity(values.len());
    let mut it = values.into_iter();
    while let Some(x) = it.next() {
        match it.next() {
            Some(y) => {
                let packed: Vec<Complex64> = x.iter().zip(&y).map(|(&a, &b)| Complex64::new(a, b)).collect();
                let h = SpectralField::from_physical(grid, m, packed, Reality::Complex);
                out.push(h.real_part());
                out.push(h.imag_part());
            }
            None => out.push(SpectralField::from_physical_real(grid, m, &x)),
        }
    }
    out
}

/// `phi` and `g_j = d_j phi - i q A_j phi` on the lattice of size `m`,
/// given the physical values of `A` there.
pub(crate) fn covariant_gradient_physical(
    ap: &[Vec<f64>],
    phi: &SpectralField,
    q: f64,
    m: usize,
) -> (Vec<Complex64>, Vec<Vec<Complex64>>) {
    let pp = phi.to_physical(m);
    let iq = Complex64::new(0.0, q);
    let g = ap
        .iter()
        .enumerate()
        .map(|(j, aj)| {
            let mut gj = partial_unchecked(phi, j).to_physical(m);
            for ((gx, &ax), px) in gj.iter_mut().zip(aj).zip(&pp) {
                *gx -= iq * ax * px;
            }
            gj
        })
        .collect();
    (pp, g)
}

pub(crate) fn matter_terms(
    a: &VectorField,
    phi: &SpectralField,
    q: f64,
    potential: Option<PotentialInput<'_>>,
) -> MatterTerms {
    let grid = *phi.grid();
    let dim = grid.dim();
    let m = grid.dealias_n();
    let npts = m.pow(dim as u32);
    let weight = grid.volume() / npts as f64;

    let ap = vector_to_physical(a, m);
    let (pp, g) = covariant_gradient_physical(&ap, phi, q, m);
    let iq = Complex64::new(0.0, q);

    let mut gradient_energy = 0.0;
    let mut current = vec![vec![0.0; npts]; dim];
    let mut coupling = vec![Complex64::default(); npts];
    for j in 0..dim {
        for x in 0..npts {
            let gj = g[j][x];
            gradient_energy += gj.norm_sqr();
            current[j][x] = (pp[x] * gj.conj()).im;
            coupling[x] -= iq * ap[j][x] * gj;
        }
    }
    gradient_energy *= weight;

    let mut n_force = None;
    let mut potential_energy = 0.0;
    if let Some(pot) = potential {
        let np = pot.ntilde.to_physical_real(m);
        let shift = pot.e * pot.v * pot.v / pot.kappa;
        let mut un = vec![0.0; npts];
        for x in 0..npts {
            let rho = pp[x].norm_sqr();
            let nt = np[x];
            let n = nt + shift;
            let s = pot.e * rho + pot.kappa * nt;
            let e2 = pot.e * pot.e;
            potential_energy += 0.5 * s * s + e2 * n * n * rho;
            un[x] = -(pot.kappa * s + 2.0 * e2 * n * rho);
            coupling[x] -= (pot.e * s + e2 * n * n) * pp[x];
        }
        potential_energy *= weight;
        n_force = Some(SpectralField::from_physical_real(grid, m, &un));
    }

    let mut accel = SpectralField::from_physical(grid, m, coupling, Reality::Complex);
    for (j, gj) in g.into_iter().enumerate() {
        let pg = SpectralField::from_physical(grid, m, gj, Reality::Complex);
        accel.axpy(1.0, &partial_unchecked(&pg, j));
    }

    MatterTerms {
        current: reals_from_physical(grid, m, current),
        accel,
        gradient_energy,
        n_force,
        potential_energy,
    }
}

/// `P Im(u conj w)` on the padded lattice.
pub(crate) fn im_product(u: &SpectralField, w: &SpectralField) -> SpectralField {
    let grid = *u.grid();
    let m = grid.dealias_n();
    let up = u.to_physical(m);
    let wp = w.to_physical(m);
    let vals: Vec<f64> = up.iter().zip(&wp).map(|(a, b)| (a * b.conj()).im).collect();
    SpectralField::from_physical_real(grid, m, &vals)
}

/// `sum_f f^2` on the lattice of size `m` for real band-limited fields.
pub(crate) fn sum_of_squares(fields: &[&SpectralField], m: usize) -> Vec<f64> {
    let grid = *fields[0].grid();
    let mut out = vec![0.0; m.pow(grid.dim() as u32)];
    for pair in fields.chunks(2) {
        let (x, y) = match pair {
            [f, g] => real_pair_to_physical(f, g, m),
            [f] => (f.to_physical_real(m), vec![0.0; out.len()]),
            _ => unreachable!(),
        };
        for (o, (a, b)) in out.iter_mut().zip(x.iter().zip(&y)) {
            *o += a * a + b * b;
        }
    }
    out
}

/// `sum_j |D_j phi|^2 + c |phi_t|^2` on the lattice of size `m`.
pub(crate) fn higgs_density(a: &VectorField, phi: &SpectralField, dphi: &SpectralField, q: f64, c: f64, m: usize) -> Vec<f64> {
    let ap = vector_to_physical(a, m);
    let (_, g) = covariant_gradient_physical(&ap, phi, q, m);
    let dp = dphi.to_physical(m);
    let mut out: Vec<f64> = dp.iter().map(|z| c * z.norm_sqr()).collect();
    for gj in &g {
        for (o, z) in out.iter_mut().zip(gj) {
            *o += z.norm_sqr();
        }
    }
    out
}
