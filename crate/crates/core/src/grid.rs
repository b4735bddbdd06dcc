//! Periodic box discretization.
//!
//! A [`Grid`] is the cube `[0, L)^dim` sampled at `n` points per axis. Fourier
//! coefficients are stored in row-major order (axis 0 slowest) using the FFT
//! layout: storage index `i` on an axis holds the integer wave index `i` for
//! `i < n/2`, `i - n` above, and the Nyquist index `n/2` is shared by `+-n/2`.
//!
//! Every field in this crate is band-limited: Nyquist planes carry no energy
//! and every Fourier multiplier vanishes on them. With that convention the
//! derivative, Laplacian and Riesz multipliers are all built from one
//! wavevector and compose exactly (`sum_i d_i d_i == laplacian`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    box_length: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, box_length: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {box_length}"
            )));
        }
        Ok(Grid { dim, n, box_length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of lattice points (and Fourier coefficients).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.dim as i32)
    }

    /// Spacing of the wavenumber lattice, `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Points per axis of the 3/2-rule padded grid used for products.
    pub fn dealias_n(&self) -> usize {
        3 * self.n / 2
    }

    pub fn nyquist_wavenumber(&self) -> f64 {
        PI * self.n as f64 / self.box_length
    }

    /// Largest `|xi|` carried by a band-limited field.
    pub fn max_wavenumber(&self) -> f64 {
        self.dk() * (self.n / 2 - 1) as f64 * (self.dim as f64).sqrt()
    }

    /// Signed integer wave index stored at axis position `i`.
    pub fn wave_index(&self, i: usize) -> i64 {
        let h = self.n / 2;
        if i < h {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Storage position of wave index `k` (requires `|k| < n/2`).
    pub fn position(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Per-axis wavenumbers with the Nyquist entry zeroed.
    pub fn axis_wavenumbers(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                if self.is_nyquist(i) {
                    0.0
                } else {
                    self.dk() * self.wave_index(i) as f64
                }
            })
            .collect()
    }

    pub fn coords(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        if self.dim == 2 {
            [flat / n, flat % n, 0]
        } else {
            [flat / (n * n), (flat / n) % n, flat % n]
        }
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        if self.dim == 2 {
            idx[0] * n + idx[1]
        } else {
            (idx[0] * n + idx[1]) * n + idx[2]
        }
    }

    /// Storage index of the mode `-xi` for the mode stored at `flat`.
    pub fn mirror(&self, flat: usize) -> usize {
        let c = self.coords(flat);
        let m = |i: usize| (self.n - i) % self.n;
        self.flat([m(c[0]), m(c[1]), if self.dim == 2 { 0 } else { m(c[2]) }])
    }

    /// True when the mode touches a Nyquist plane on any axis.
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let c = self.coords(flat);
        c[..self.dim].iter().any(|&i| self.is_nyquist(i))
    }

    /// Calls `f(flat, xi)` for every stored mode with the band-limited
    /// wavevector `xi` (zero on Nyquist components; unused axes are zero).
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [f64; 3])) {
        let k = self.axis_wavenumbers();
        let n = self.n;
        let mut flat = 0;
        if self.dim == 2 {
            for &k0 in &k {
                for &k1 in &k {
                    f(flat, [k0, k1, 0.0]);
                    flat += 1;
                }
            }
        } else {
            for &k0 in &k {
                for &k1 in &k {
                    for i2 in 0..n {
                        f(flat, [k0, k1, k[i2]]);
                        flat += 1;
                    }
                }
            }
        }
    }

    /// Wavevectors of every stored mode, in storage order.
    pub fn wavevectors(&self) -> Vec<[f64; 3]> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each_mode(|_, xi| out.push(xi));
        out
    }

    /// Physical coordinates of lattice point `flat` on an `m`-point grid.
    pub fn point_on(&self, m: usize, flat: usize) -> [f64; 3] {
        let h = self.box_length / m as f64;
        let (i0, i1, i2) = if self.dim == 2 {
            (flat / m, flat % m, 0)
        } else {
            (flat / (m * m), (flat / m) % m, flat % m)
        };
        [i0 as f64 * h, i1 as f64 * h, i2 as f64 * h]
    }

    /// Physical coordinates of lattice point `flat`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        self.point_on(self.n, flat)
    }
}
