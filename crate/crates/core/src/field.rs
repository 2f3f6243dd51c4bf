use ndarray::Array2;
use num_complex::Complex64;

/// Real scalar samples on the n x n collocation lattice (axis 0 = x1, axis 1 = x2).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField2D {
    pub values: Array2<f64>,
}

impl RealField2D {
    pub fn zeros(n: usize) -> Self {
        Self {
            values: Array2::zeros((n, n)),
        }
    }

    pub fn from_fn(n: usize, box_length: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let dx = box_length / n as f64;
        let values = Array2::from_shape_fn((n, n), |(i, j)| f(i as f64 * dx, j as f64 * dx));
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Complex Fourier coefficients of a real field, full n x n storage.
///
/// Index i along an axis carries the integer wavenumber i for i < n/2 and
/// i - n otherwise, so mode (0, 0) sits at index (0, 0). Real fields satisfy
/// coeff(-k) = conj(coeff(k)).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2D {
    pub coeffs: Array2<Complex64>,
}

impl SpectralField2D {
    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: Array2::zeros((n, n)),
        }
    }

    pub fn n(&self) -> usize {
        self.coeffs.nrows()
    }

    /// Array index of the integer wavenumber pair (k1, k2), taken mod n.
    pub fn index_of(n: usize, k1: i64, k2: i64) -> (usize, usize) {
        let wrap = |k: i64| -> usize { k.rem_euclid(n as i64) as usize };
        (wrap(k1), wrap(k2))
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        let (i, j) = Self::index_of(self.n(), k1, k2);
        self.coeffs[(i, j)]
    }

    pub fn set_coeff(&mut self, k1: i64, k2: i64, value: Complex64) {
        let (i, j) = Self::index_of(self.n(), k1, k2);
        self.coeffs[(i, j)] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// A pair of same-kind fields interpreted as the components (x1, x2) of a
/// vector field, e.g. the velocity or a gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector2D<F> {
    pub x1: F,
    pub x2: F,
}

pub type VectorField2D = Vector2D<RealField2D>;
pub type SpectralVector2D = Vector2D<SpectralField2D>;

impl VectorField2D {
    /// Pointwise Euclidean magnitude sqrt(u1^2 + u2^2).
    pub fn magnitude(&self) -> RealField2D {
        let mut out = self.x1.values.clone();
        out.zip_mut_with(&self.x2.values, |a, b| *a = (*a * *a + b * b).sqrt());
        RealField2D { values: out }
    }
}
