//! Screened Poisson solves `0 = (Δ − λ) v + μ u` on the periodic box, done
//! diagonally in Fourier space, plus a direct kernel-quadrature oracle for 1D
//! and first derivatives.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::grid::{Field, Grid};
use crate::regime::ModelParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("kernel oracle is 1D only (grid has dim = {0})")]
    NotOneDimensional(usize),
    #[error("screening rate must be > 0, got {0}")]
    Screening(f64),
}

/// Images folded into the kernel oracle on each side of the box.
pub const ORACLE_IMAGES: i32 = 3;
/// Largest allowed e^{−√λ·2X} for an oracle comparison to be meaningful.
pub const ORACLE_TAIL_LIMIT: f64 = 1e-10;

/// FFT plans and wavenumbers for one grid. Not shared between threads; each
/// worker builds its own.
pub struct Spectral {
    grid: Grid,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Angular wavenumber for each axis index.
    k: Vec<f64>,
    /// Same, with the Nyquist entry zeroed (odd-order derivatives).
    k_odd: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let base = std::f64::consts::PI / grid.half_length();
        let k: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j <= n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                base * m
            })
            .collect();
        let mut k_odd = k.clone();
        k_odd[n / 2] = 0.0;
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        Spectral {
            grid,
            fwd,
            inv,
            k,
            k_odd,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// |k|² at a flat spectral index.
    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let [i, j] = self.grid.unflatten(idx);
        if self.grid.dim() == 1 {
            self.k[i] * self.k[i]
        } else {
            self.k[i] * self.k[i] + self.k[j] * self.k[j]
        }
    }

    /// Wavenumber along `axis` at a flat spectral index, Nyquist zeroed.
    #[inline]
    pub fn k_axis(&self, idx: usize, axis: usize) -> f64 {
        self.k_odd[self.grid.unflatten(idx)[axis]]
    }

    fn transform(&mut self, buf: &mut [Complex64], forward: bool) {
        let n = self.grid.n();
        let plan = if forward { &self.fwd } else { &self.inv };
        // rows (the only axis in 1D)
        plan.process_with_scratch(buf, &mut self.scratch);
        if self.grid.dim() == 2 {
            transpose(buf, n);
            plan.process_with_scratch(buf, &mut self.scratch);
            transpose(buf, n);
        }
    }

    pub fn forward(&mut self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        buf
    }

    /// Inverse transform into `out`, keeping the real part. Returns the largest
    /// discarded imaginary magnitude.
    pub fn inverse_real(&mut self, spec: &mut [Complex64], out: &mut [f64]) -> f64 {
        self.transform(spec, false);
        let scale = 1.0 / spec.len() as f64;
        let mut residue: f64 = 0.0;
        for (o, c) in out.iter_mut().zip(spec.iter()) {
            *o = c.re * scale;
            residue = residue.max((c.im * scale).abs());
        }
        residue
    }

    /// Applies the Fourier multiplier `symbol(idx)` to `hat` and returns the real field.
    fn apply(&mut self, hat: &[Complex64], symbol: impl Fn(&Self, usize) -> Complex64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(i, &c)| c * symbol(self, i))
            .collect();
        let mut out = vec![0.0; buf.len()];
        let residue = self.inverse_real(&mut buf, &mut out);
        debug_assert!(
            residue <= 1e-12 * sup_abs(&out) + 1e-300,
            "imaginary residue {residue:e} exceeds tolerance"
        );
        out
    }

    pub fn solve_screened(&mut self, u: &Field, lam: f64, mu: f64) -> Field {
        let hat = self.forward(u.values());
        let v = self.apply(&hat, |s, i| {
            Complex64::new(mu / (lam + s.k_squared(i)), 0.0)
        });
        Field::from_values(self.grid, v).expect("grid matches")
    }

    pub fn gradient(&mut self, f: &Field) -> Vec<Field> {
        let hat = self.forward(f.values());
        (0..self.grid.dim())
            .map(|axis| {
                let v = self.apply(&hat, |s, i| Complex64::new(0.0, s.k_axis(i, axis)));
                Field::from_values(self.grid, v).expect("grid matches")
            })
            .collect()
    }

    /// Chemical fields and taxis coefficients of the current density.
    ///
    /// The drift potential χ1v1 − χ2v2 and the growth term χ2λ2v2 − χ1λ1v1 are
    /// built from a single combined multiplier, so they vanish identically
    /// (bit-for-bit) when χ1μ1 = χ2μ2 and λ1 = λ2.
    pub fn couple(&mut self, u: &Field, p: &ModelParams) -> Coupling {
        let hat = self.forward(u.values());
        let (c1, c2) = (p.attraction(), p.repulsion());
        let (l1, l2) = (p.lam1, p.lam2);
        let v1 = self.apply(&hat, |s, i| {
            Complex64::new(p.mu1 / (l1 + s.k_squared(i)), 0.0)
        });
        let v2 = self.apply(&hat, |s, i| {
            Complex64::new(p.mu2 / (l2 + s.k_squared(i)), 0.0)
        });
        let potential = |s: &Self, i: usize| {
            let k2 = s.k_squared(i);
            c1 / (l1 + k2) - c2 / (l2 + k2)
        };
        let drift = (0..self.grid.dim())
            .map(|axis| {
                self.apply(&hat, |s, i| {
                    Complex64::new(0.0, s.k_axis(i, axis) * potential(s, i))
                })
            })
            .collect();
        let growth = self.apply(&hat, |s, i| {
            let k2 = s.k_squared(i);
            Complex64::new(c2 * l2 / (l2 + k2) - c1 * l1 / (l1 + k2), 0.0)
        });
        Coupling {
            v1: Field::from_values(self.grid, v1).expect("grid matches"),
            v2: Field::from_values(self.grid, v2).expect("grid matches"),
            drift,
            growth,
        }
    }
}

/// Output of [`Spectral::couple`].
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub v1: Field,
    pub v2: Field,
    /// Components of ∇(χ1v1 − χ2v2), the taxis velocity.
    pub drift: Vec<Vec<f64>>,
    /// χ2λ2v2 − χ1λ1v1
    pub growth: Vec<f64>,
}

fn sup_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Periodic solution of (λ − Δ) v = μ u.
pub fn solve_screened(u: &Field, lam: f64, mu: f64) -> Result<Field, EllipticError> {
    if !(lam > 0.0) {
        return Err(EllipticError::Screening(lam));
    }
    Ok(Spectral::new(*u.grid()).solve_screened(u, lam, mu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMethod {
    /// Exact differentiation of the trigonometric interpolant.
    Spectral,
    /// Second-order central differences.
    CentralDifference,
}

pub fn gradient(f: &Field, method: GradientMethod) -> Vec<Field> {
    match method {
        GradientMethod::Spectral => Spectral::new(*f.grid()).gradient(f),
        GradientMethod::CentralDifference => central_gradient(f),
    }
}

fn central_gradient(f: &Field) -> Vec<Field> {
    let g = *f.grid();
    let n = g.n();
    let inv = 1.0 / (2.0 * g.dx());
    let vals = f.values();
    (0..g.dim())
        .map(|axis| {
            let out = (0..g.len())
                .map(|idx| {
                    let [i, j] = g.unflatten(idx);
                    let (plus, minus) = match (g.dim(), axis) {
                        (1, _) => ((i + 1) % n, (i + n - 1) % n),
                        (_, 0) => (((i + 1) % n) * n + j, ((i + n - 1) % n) * n + j),
                        _ => (i * n + (j + 1) % n, i * n + (j + n - 1) % n),
                    };
                    (vals[plus] - vals[minus]) * inv
                })
                .collect();
            Field::from_values(g, out).expect("grid matches")
        })
        .collect()
}

/// e^{−√λ·2X}: size of the first neglected periodic image in the oracle.
pub fn oracle_tail(grid: &Grid, lam: f64) -> f64 {
    (-lam.sqrt() * 2.0 * grid.half_length()).exp()
}

/// v(x) = μ/(2√λ) ∫ e^{−√λ|x−z|} u(z) dz by the lattice trapezoid rule, with
/// the integral continued periodically over ±[`ORACLE_IMAGES`] boxes.
pub fn kernel_oracle_1d(u: &Field, lam: f64, mu: f64, x: f64) -> Result<f64, EllipticError> {
    let g = u.grid();
    if g.dim() != 1 {
        return Err(EllipticError::NotOneDimensional(g.dim()));
    }
    if !(lam > 0.0) {
        return Err(EllipticError::Screening(lam));
    }
    let s = lam.sqrt();
    let period = 2.0 * g.half_length();
    let dx = g.dx();
    let mut acc = 0.0;
    for (j, &uj) in u.values().iter().enumerate() {
        if uj == 0.0 {
            continue;
        }
        let z = g.coord(j);
        let kernel: f64 = (-ORACLE_IMAGES..=ORACLE_IMAGES)
            .map(|m| (-s * (x - z - period * m as f64).abs()).exp())
            .sum();
        acc += kernel * uj;
    }
    Ok(mu / (2.0 * s) * dx * acc)
}
