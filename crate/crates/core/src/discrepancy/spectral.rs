//! Eigenvalue representation of the periodic energy on the grid.
//!
//! For a canonical triple the energy matrix `E_xy = Π_k η(|x_k − y_k|)` is a
//! Kronecker product of symmetric circulants, so
//!
//! ```text
//! Σ_{x,y} w(x) w(y) E_xy = M^{-d} Σ_f λ_f |ŵ(f)|²,   λ_f = Π_k Σ_m η(m/M) cos(2π f_k m / M)
//! ```
//!
//! where `ŵ` is the d-dimensional DFT of the weight array. The fast path uses a
//! mixed-radix FFT (any `M`); [`dft_nd_naive`] is the O(M^{d+1}) reference.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{GridWeights, TorusGrid};
use crate::scalar::{Rational, Scalar};
use crate::triple::{EnergyTriple, SampledTriple};

/// Per-axis eigenvalue factors; the full `λ_f` / `μ_f` are products over axes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumWeights {
    grid: TorusGrid,
    lambda_axis: Vec<f64>,
    mu_axis: Option<Vec<f64>>,
}

impl SpectrumWeights {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// `Σ_m η(m/M) cos(2π f m / M)` for `f = 0..M`.
    pub fn lambda_axis(&self) -> &[f64] {
        &self.lambda_axis
    }

    /// Closed-form periodic-discrepancy factors, present for the discrepancy triple only.
    pub fn mu_axis(&self) -> Option<&[f64]> {
        self.mu_axis.as_deref()
    }

    pub fn lambda(&self, freq: &[usize]) -> f64 {
        freq.iter().map(|&f| self.lambda_axis[f]).product()
    }

    pub fn mu(&self, freq: &[usize]) -> Option<f64> {
        let mu = self.mu_axis.as_ref()?;
        Some(freq.iter().map(|&f| mu[f]).product())
    }

    /// `λ_f` for every frequency, in grid index order.
    pub fn lambda_table(&self) -> Vec<f64> {
        product_table(self.grid, &self.lambda_axis)
    }

    pub fn mu_table(&self) -> Option<Vec<f64>> {
        self.mu_axis.as_ref().map(|mu| product_table(self.grid, mu))
    }
}

fn product_table(grid: TorusGrid, axis: &[f64]) -> Vec<f64> {
    let mut table = vec![1.0];
    for _ in 0..grid.dim() {
        table = table
            .iter()
            .flat_map(|prefix| axis.iter().map(move |a| prefix * a))
            .collect();
    }
    table
}

/// `λ_f` of a canonical triple sampled at the grid's resolution.
pub fn spectrum<S: Scalar>(triple: &SampledTriple<S>, grid: TorusGrid) -> Result<SpectrumWeights> {
    if !triple.is_canonical() {
        return Err(Error::NotCanonical);
    }
    if triple.order() != grid.order() {
        return Err(Error::InvalidArgument(format!(
            "triple sampled at M = {} used on grid with M = {}",
            triple.order(),
            grid.order()
        )));
    }
    let m = grid.order();
    let eta: Vec<f64> = triple.eta_samples().iter().map(Scalar::to_f64).collect();
    let lambda_axis = (0..m)
        .map(|f| {
            eta.iter()
                .enumerate()
                .map(|(j, e)| e * (2.0 * PI * (f * j % m) as f64 / m as f64).cos())
                .sum()
        })
        .collect();
    Ok(SpectrumWeights {
        grid,
        lambda_axis,
        mu_axis: None,
    })
}

/// Spectrum of the discrepancy triple, with `μ_f` from its closed form
/// `Π_k [f_k = 0 ? 1/3 + 1/(6M²) : 1/(2M² sin²(π f_k / M))]`.
pub fn discrepancy_spectrum(grid: TorusGrid) -> Result<SpectrumWeights> {
    let sampled = EnergyTriple::<f64>::discrepancy().sample(grid.order())?;
    let mut weights = spectrum(&sampled, grid)?;
    let m = grid.order() as f64;
    let mu = (0..grid.order())
        .map(|f| {
            if f == 0 {
                1.0 / 3.0 + 1.0 / (6.0 * m * m)
            } else {
                let s = (PI * f as f64 / m).sin();
                1.0 / (2.0 * m * m * s * s)
            }
        })
        .collect();
    weights.mu_axis = Some(mu);
    Ok(weights)
}

/// `μ_0` two ways in exact arithmetic: `T(M)^d / M^d` from the rational
/// samples of `η`, and the closed form `(1/3 + 1/(6M²))^d`.
pub fn mu_zero_exact(order: usize, dim: usize) -> Result<(Rational, Rational)> {
    let t = EnergyTriple::<Rational>::discrepancy().constants(order)?.t;
    let m = Rational::from_usize(order);
    let from_samples = (t / &m).powu(dim as u32);
    let closed = (Rational::ratio(1, 3) + Rational::ratio(1, 6) / &(m.clone() * &m)).powu(dim as u32);
    Ok((from_samples, closed))
}

fn to_complex<S: Scalar>(w: &GridWeights<S>) -> Vec<Complex64> {
    w.weights()
        .iter()
        .map(|v| Complex64::new(v.to_f64(), 0.0))
        .collect()
}

/// In-place d-dimensional forward FFT over a row-major `M^d` array.
pub fn fft_nd(grid: TorusGrid, data: &mut [Complex64]) {
    let m = grid.order();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..grid.dim() {
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        for start in line_starts(grid, stride) {
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[start + j * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (j, v) in line.iter().enumerate() {
                data[start + j * stride] = *v;
            }
        }
    }
}

/// Reference transform: direct O(M²) DFT along each axis, `exp(-2πi f m / M)`.
pub fn dft_nd_naive(grid: TorusGrid, data: &mut [Complex64]) {
    let m = grid.order();
    let roots: Vec<Complex64> = (0..m)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / m as f64))
        .collect();
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..grid.dim() {
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        for start in line_starts(grid, stride) {
            for (f, slot) in line.iter_mut().enumerate() {
                *slot = (0..m)
                    .map(|j| data[start + j * stride] * roots[f * j % m])
                    .sum();
            }
            for (j, v) in line.iter().enumerate() {
                data[start + j * stride] = *v;
            }
        }
    }
}

fn line_starts(grid: TorusGrid, stride: usize) -> impl Iterator<Item = usize> {
    let m = grid.order();
    let block = stride * m;
    (0..grid.cell_count() / block).flat_map(move |b| (0..stride).map(move |s| b * block + s))
}

fn power_spectrum<S: Scalar>(w: &GridWeights<S>) -> Vec<f64> {
    let mut data = to_complex(w);
    fft_nd(w.grid(), &mut data);
    data.iter().map(Complex64::norm_sqr).collect()
}

/// Periodic T-energy via the spectral representation, `M^{-d} Σ_f λ_f |ŵ(f)|²`.
pub fn periodic_energy_spectral<S: Scalar, W: Scalar>(
    triple: &SampledTriple<S>,
    w: &GridWeights<W>,
) -> Result<f64> {
    let spec = spectrum(triple, w.grid())?;
    let lambda = spec.lambda_table();
    let power = power_spectrum(w);
    let sum: f64 = lambda.iter().zip(&power).map(|(l, p)| l * p).sum();
    Ok(sum / w.grid().cell_count() as f64)
}

/// Squared periodic L2-discrepancy of a grid weight, `−(Σw)²/3^d + Σ_f μ_f |ŵ(f)|²`.
pub fn periodic_l2_spectral<S: Scalar>(w: &GridWeights<S>) -> Result<f64> {
    let grid = w.grid();
    let spec = discrepancy_spectrum(grid)?;
    let mu = spec.mu_table().expect("discrepancy spectrum carries mu");
    let power = power_spectrum(w);
    let total = w.total().to_f64();
    let sum: f64 = mu.iter().zip(&power).map(|(m, p)| m * p).sum();
    Ok(sum - total * total / 3f64.powi(grid.dim() as i32))
}

/// Squared periodic L2-discrepancy of the permutation set `X(σ)` by the
/// two-dimensional frequency sum; only `f1, f2 ≥ 1` contribute besides `f = 0`.
pub fn permutation_lp_spectral(sigma: &[usize]) -> Result<f64> {
    crate::latin::check_permutation(sigma)?;
    let n = sigma.len();
    let nf = n as f64;
    let inv_sin_sq: Vec<f64> = (0..n)
        .map(|f| {
            let s = (PI * f as f64 / nf).sin();
            1.0 / (s * s)
        })
        .collect();
    let roots: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / nf))
        .collect();
    let mut sum = 0.0;
    for f1 in 1..n {
        for f2 in 1..n {
            let s: Complex64 = (0..n)
                .map(|m| roots[(f1 * m + f2 * sigma[m]) % n])
                .sum();
            sum += s.norm_sqr() * inv_sin_sq[f1] * inv_sin_sq[f2];
        }
    }
    Ok(1.0 / 9.0 + 1.0 / (36.0 * nf * nf) + sum / (4.0 * nf.powi(4)))
}

/// Largest deviation over `m` between `1/2 − m/M + m²/M²` and its inverse-DFT form
/// `1/3 + 1/(6M²) + (1/(2M²)) Σ_{n=1}^{M-1} cos(2πmn/M) / sin²(πn/M)`.
pub fn eta_fourier_identity_deviation(order: usize) -> f64 {
    let m = order as f64;
    (0..order)
        .map(|j| {
            let jf = j as f64;
            let lhs = 0.5 - jf / m + jf * jf / (m * m);
            let series: f64 = (1..order)
                .map(|n| {
                    let s = (PI * n as f64 / m).sin();
                    (2.0 * PI * (j * n % order) as f64 / m).cos() / (s * s)
                })
                .sum();
            let rhs = 1.0 / 3.0 + 1.0 / (6.0 * m * m) + series / (2.0 * m * m);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// `true` iff the inverse-DFT identity for `η` holds within 1e-12 for every `m`.
pub fn eta_fourier_identity_check(order: usize) -> bool {
    order >= 1 && eta_fourier_identity_deviation(order) <= 1e-12
}
