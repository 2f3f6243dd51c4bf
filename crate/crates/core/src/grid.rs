use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{RbError, Result};
use crate::field::{RealField2D, SpectralField2D, SpectralVector2D};

/// Relative tolerance on the imaginary residue when transforming back to
/// physical space.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on the mean mode for the periodic Biot-Savart inversion.
pub const MEAN_TOL: f64 = 1e-13;

/// Periodic n x n grid with cached FFT plans, the scaled wavenumber lattice
/// and the 2/3-rule dealias mask. All spectral operations live here as pure
/// methods; a grid is immutable after construction and freely shareable.
pub struct Grid2D {
    n: usize,
    box_length: f64,
    /// Scaled wavenumber for each array index along one axis.
    k_axis: Vec<f64>,
    /// Same but with the self-conjugate Nyquist index zeroed; odd-order
    /// (i k) symbols use this one so real fields stay real.
    k_deriv: Vec<f64>,
    /// |k| on the full lattice.
    kmag: Array2<f64>,
    /// true where max(|m1|, |m2|) <= floor(n/3), m the integer wavenumber.
    keep: Array2<bool>,
    kcut: i64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid2D")
            .field("n", &self.n)
            .field("box_length", &self.box_length)
            .finish()
    }
}

impl Grid2D {
    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(RbError::InvalidGrid { n });
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(RbError::InvalidInput(format!(
                "box_length must be positive and finite, got {box_length}"
            )));
        }
        let scale = 2.0 * std::f64::consts::PI / box_length;
        let k_axis: Vec<f64> = (0..n).map(|i| Self::int_wavenumber(n, i) as f64 * scale).collect();
        let mut k_deriv = k_axis.clone();
        k_deriv[n / 2] = 0.0;
        let kmag = Array2::from_shape_fn((n, n), |(i, j)| (k_axis[i].powi(2) + k_axis[j].powi(2)).sqrt());
        let kcut = (n / 3) as i64;
        let keep = Array2::from_shape_fn((n, n), |(i, j)| {
            Self::int_wavenumber(n, i).abs() <= kcut && Self::int_wavenumber(n, j).abs() <= kcut
        });
        let mut planner = FftPlanner::new();
        Ok(Self {
            n,
            box_length,
            k_axis,
            k_deriv,
            kmag,
            keep,
            kcut,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    /// Default 2 pi periodic box.
    pub fn with_default_box(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * std::f64::consts::PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dx(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn box_area(&self) -> f64 {
        self.box_length * self.box_length
    }

    /// Integer wavenumber carried by array index i (i for i < n/2, i - n otherwise).
    pub fn int_wavenumber(n: usize, i: usize) -> i64 {
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Scaled wavenumber component for an array index.
    pub fn k_at(&self, i: usize) -> f64 {
        self.k_axis[i]
    }

    /// Wavenumber used in odd-order derivative symbols (Nyquist zeroed).
    pub fn k_deriv_at(&self, i: usize) -> f64 {
        self.k_deriv[i]
    }

    pub fn kmag(&self) -> &Array2<f64> {
        &self.kmag
    }

    /// Largest |k| retained after dealiasing (corner of the kept square).
    pub fn kmax_dealiased(&self) -> f64 {
        let scale = 2.0 * std::f64::consts::PI / self.box_length;
        (self.kcut as f64) * std::f64::consts::SQRT_2 * scale
    }

    pub fn dealias_cutoff(&self) -> i64 {
        self.kcut
    }

    pub fn keep_mask(&self) -> &Array2<bool> {
        &self.keep
    }

    // ---- transforms -------------------------------------------------------

    fn fft2_in_place(&self, data: &mut Array2<Complex64>, inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.ifft } else { &self.fft };
        // rows are contiguous in standard layout
        for mut row in data.rows_mut() {
            plan.process(row.as_slice_mut().expect("contiguous row"));
        }
        let mut scratch = vec![Complex64::default(); n];
        for j in 0..n {
            for i in 0..n {
                scratch[i] = data[(i, j)];
            }
            plan.process(&mut scratch);
            for i in 0..n {
                data[(i, j)] = scratch[i];
            }
        }
    }

    /// Forward transform to Fourier coefficients, normalized so that
    /// f(x) = sum_k c(k) exp(i k . x).
    pub fn forward(&self, real: &RealField2D) -> Result<SpectralField2D> {
        assert_eq!(real.n(), self.n, "field/grid size mismatch");
        if let Some(((i, j), _)) = real
            .values
            .indexed_iter()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(RbError::NonFinite {
                context: "forward transform input".into(),
                i,
                j,
            });
        }
        let mut data = real.values.mapv(|v| Complex64::new(v, 0.0));
        self.fft2_in_place(&mut data, false);
        let norm = 1.0 / (self.n * self.n) as f64;
        data.mapv_inplace(|c| c * norm);
        // pin exact Hermitian symmetry; FFT rounding would otherwise leave
        // asymmetric noise that downstream operators cannot repair
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let ci = (n - i) % n;
                let cj = (n - j) % n;
                if (ci, cj) < (i, j) {
                    continue;
                }
                let sym = 0.5 * (data[(i, j)] + data[(ci, cj)].conj());
                if (ci, cj) == (i, j) {
                    data[(i, j)] = Complex64::new(sym.re, 0.0);
                } else {
                    data[(i, j)] = sym;
                    data[(ci, cj)] = sym.conj();
                }
            }
        }
        Ok(SpectralField2D { coeffs: data })
    }

    /// Inverse transform back to real samples. Fails when the coefficients
    /// are not Hermitian-symmetric within `HERMITIAN_TOL` of the field scale.
    pub fn inverse(&self, spec: &SpectralField2D) -> Result<RealField2D> {
        assert_eq!(spec.n(), self.n, "field/grid size mismatch");
        let coeff_scale = spec.max_abs();
        let (k1, k2, dev) = self.worst_symmetry_violation(spec);
        if dev > HERMITIAN_TOL * coeff_scale.max(1e-300) {
            return Err(RbError::SymmetryViolation {
                k1,
                k2,
                deviation: dev,
                tol: HERMITIAN_TOL * coeff_scale,
            });
        }
        let mut data = spec.coeffs.clone();
        self.fft2_in_place(&mut data, true);
        Ok(RealField2D {
            values: data.mapv(|c| c.re),
        })
    }

    fn worst_symmetry_violation(&self, spec: &SpectralField2D) -> (i64, i64, f64) {
        let n = self.n;
        let mut worst = (0i64, 0i64, 0.0f64);
        for i in 0..n {
            for j in 0..n {
                let ci = (n - i) % n;
                let cj = (n - j) % n;
                let dev = (spec.coeffs[(ci, cj)] - spec.coeffs[(i, j)].conj()).norm();
                if dev > worst.2 {
                    worst = (Self::int_wavenumber(n, i), Self::int_wavenumber(n, j), dev);
                }
            }
        }
        worst
    }

    // ---- differential operators ------------------------------------------

    /// Spectral gradient: component i multiplies by i k_i.
    pub fn gradient(&self, spec: &SpectralField2D) -> SpectralVector2D {
        let n = self.n;
        let mut g1 = spec.coeffs.clone();
        let mut g2 = spec.coeffs.clone();
        for i in 0..n {
            let k1 = Complex64::new(0.0, self.k_deriv[i]);
            for j in 0..n {
                let k2 = Complex64::new(0.0, self.k_deriv[j]);
                g1[(i, j)] *= k1;
                g2[(i, j)] *= k2;
            }
        }
        SpectralVector2D {
            x1: SpectralField2D { coeffs: g1 },
            x2: SpectralField2D { coeffs: g2 },
        }
    }

    /// Spectral divergence i k . u of a spectral vector field.
    pub fn divergence(&self, v: &SpectralVector2D) -> SpectralField2D {
        let n = self.n;
        let mut out = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = Complex64::new(0.0, self.k_deriv[i]) * v.x1.coeffs[(i, j)]
                    + Complex64::new(0.0, self.k_deriv[j]) * v.x2.coeffs[(i, j)];
            }
        }
        SpectralField2D { coeffs: out }
    }

    /// Scalar curl d1 u2 - d2 u1 of a spectral vector field.
    pub fn curl(&self, v: &SpectralVector2D) -> SpectralField2D {
        let n = self.n;
        let mut out = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = Complex64::new(0.0, self.k_deriv[i]) * v.x2.coeffs[(i, j)]
                    - Complex64::new(0.0, self.k_deriv[j]) * v.x1.coeffs[(i, j)];
            }
        }
        SpectralField2D { coeffs: out }
    }

    /// Velocity from vorticity on the torus: u = perp-gradient of the
    /// streamfunction solving the Poisson problem, i.e.
    /// u1(k) = i k2 w(k)/|k|^2, u2(k) = -i k1 w(k)/|k|^2, u(0) = 0.
    ///
    /// The mean vorticity mode must vanish (checked against `MEAN_TOL`
    /// relative to the coefficient scale with an absolute floor of 1).
    pub fn biot_savart(&self, omega: &SpectralField2D) -> Result<SpectralVector2D> {
        assert_eq!(omega.n(), self.n, "field/grid size mismatch");
        let mean = omega.coeffs[(0, 0)].norm();
        if mean > MEAN_TOL * omega.max_abs().max(1.0) {
            return Err(RbError::NonzeroMean {
                mean,
                tol: MEAN_TOL,
            });
        }
        let n = self.n;
        let mut u1 = Array2::<Complex64>::zeros((n, n));
        let mut u2 = Array2::<Complex64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                if i == 0 && j == 0 {
                    continue;
                }
                let k1 = self.k_axis[i];
                let k2 = self.k_axis[j];
                let inv_k2 = 1.0 / (k1 * k1 + k2 * k2);
                let w = omega.coeffs[(i, j)];
                u1[(i, j)] = Complex64::new(0.0, self.k_deriv[j] * inv_k2) * w;
                u2[(i, j)] = Complex64::new(0.0, -self.k_deriv[i] * inv_k2) * w;
            }
        }
        Ok(SpectralVector2D {
            x1: SpectralField2D { coeffs: u1 },
            x2: SpectralField2D { coeffs: u2 },
        })
    }

    /// 2/3-rule projection: zero every coefficient with
    /// max(|m1|, |m2|) > floor(n/3).
    pub fn dealias(&self, spec: &SpectralField2D) -> SpectralField2D {
        let mut out = spec.coeffs.clone();
        out.zip_mut_with(&self.keep, |c, keep| {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        });
        SpectralField2D { coeffs: out }
    }

    pub fn dealias_in_place(&self, spec: &mut SpectralField2D) {
        spec.coeffs.zip_mut_with(&self.keep, |c, keep| {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        });
    }

    // ---- norms -------------------------------------------------------------

    /// Grid Lebesgue norm: (sum |f|^p dx^2)^{1/p} for finite p, collocation
    /// maximum for p = inf (a lower bound on the true sup).
    pub fn lp_norm(&self, real: &RealField2D, p: f64) -> Result<f64> {
        assert_eq!(real.n(), self.n, "field/grid size mismatch");
        if p.is_infinite() && p > 0.0 {
            return Ok(real.max_abs());
        }
        if !(p >= 1.0) {
            return Err(RbError::InvalidLpExponent { p });
        }
        let da = self.dx() * self.dx();
        let sum: f64 = real.values.iter().map(|v| v.abs().powf(p)).sum();
        Ok((sum * da).powf(1.0 / p))
    }

    /// L2 norm straight from the coefficients (Parseval).
    pub fn l2_norm_spectral(&self, spec: &SpectralField2D) -> f64 {
        let sum: f64 = spec.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (sum * self.box_area()).sqrt()
    }

    pub fn l2_norm_spectral_vec(&self, v: &SpectralVector2D) -> f64 {
        let sum: f64 = v
            .x1
            .coeffs
            .iter()
            .chain(v.x2.coeffs.iter())
            .map(|c| c.norm_sqr())
            .sum();
        (sum * self.box_area()).sqrt()
    }

    /// Inner product over the box from physical samples.
    pub fn inner(&self, a: &RealField2D, b: &RealField2D) -> f64 {
        let da = self.dx() * self.dx();
        a.values
            .iter()
            .zip(b.values.iter())
            .map(|(x, y)| x * y)
            .sum::<f64>()
            * da
    }

    // ---- random fields -----------------------------------------------------

    /// Hermitian-symmetric random field with |coeff| = amplitude on every
    /// retained mode with k_lo <= |k| <= k_hi and uniformly random phases.
    /// The mean mode stays zero. Deterministic for a given rng stream.
    pub fn random_band(
        &self,
        k_lo: f64,
        k_hi: f64,
        amplitude: f64,
        rng: &mut impl Rng,
    ) -> SpectralField2D {
        let n = self.n;
        let mut out = SpectralField2D::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == 0 && j == 0 {
                    continue;
                }
                let ci = (n - i) % n;
                let cj = (n - j) % n;
                // visit each conjugate pair once, canonical member first
                if (ci, cj) < (i, j) {
                    continue;
                }
                let km = self.kmag[(i, j)];
                if km < k_lo || km > k_hi || !self.keep[(i, j)] {
                    continue;
                }
                if (ci, cj) == (i, j) {
                    // self-conjugate (Nyquist-type) mode: real amplitude
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    out.coeffs[(i, j)] = Complex64::new(sign * amplitude, 0.0);
                } else {
                    let phase = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
                    let c = Complex64::from_polar(amplitude, phase);
                    out.coeffs[(i, j)] = c;
                    out.coeffs[(ci, cj)] = c.conj();
                }
            }
        }
        out
    }
}
