//! Linear drift design and the tridiagonal AR(1) precision.

use nalgebra::{DMatrix, Matrix2, Vector2};

use super::ModelError;

/// Validated construction of the AR(1) precision operator.
pub fn build_precision(rho: f64, n: usize) -> Result<ArPrecision, ModelError> {
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(ModelError::State(format!("autocorrelation {rho} outside (-1, 1)")));
    }
    if n < 2 {
        return Err(ModelError::Dimension(format!("precision needs at least 2 time points, got {n}")));
    }
    Ok(ArPrecision::new(rho, n))
}

/// Design matrix for the linear drift `eta_t = phi_1 + phi_2 * t` over the
/// model time coordinate `t = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftDesign {
    times: Vec<f64>,
}

impl DriftDesign {
    pub fn new(n: usize) -> Self {
        Self { times: (1..=n).map(|t| t as f64).collect() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Column `l` of the design: `l = 0` is the intercept, `l = 1` the slope.
    pub fn column(&self, l: usize) -> Vec<f64> {
        assert!(l < 2, "drift design has two columns");
        match l {
            0 => vec![1.0; self.times.len()],
            _ => self.times.clone(),
        }
    }

    /// Drift value at an arbitrary time, used past the training window.
    pub fn eta_at(phi: [f64; 2], time: f64) -> f64 {
        phi[0] + phi[1] * time
    }

    /// Drift path `W * phi` over the training times.
    pub fn eta(&self, phi: [f64; 2]) -> Vec<f64> {
        self.times.iter().map(|&t| Self::eta_at(phi, t)).collect()
    }
}

/// Precision `Q = U'U` of a length-`n` AR(1) deviation path, where `U` is
/// unit lower bidiagonal with `-rho` on the subdiagonal.
///
/// `Q` is tridiagonal with diagonal `(1 + rho^2, ..., 1 + rho^2, 1)` and
/// off-diagonal `-rho`; its determinant is 1, so the Gaussian normalizer
/// needs no determinant term. The first state carries the innovation
/// variance, not the stationary one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArPrecision {
    rho: f64,
    n: usize,
}

impl ArPrecision {
    pub fn new(rho: f64, n: usize) -> Self {
        assert!(n > 0, "AR precision needs at least one time point");
        assert!(rho.is_finite());
        Self { rho, n }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `U r`: first entry `r_1`, then innovations `r_t - rho * r_{t-1}`.
    pub fn apply_factor(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.n);
        let mut out = Vec::with_capacity(self.n);
        out.push(r[0]);
        for t in 1..self.n {
            out.push(r[t] - self.rho * r[t - 1]);
        }
        out
    }

    /// `r' Q r`, computed as the squared norm of `U r`.
    pub fn quad_form(&self, r: &[f64]) -> f64 {
        self.apply_factor(r).iter().map(|u| u * u).sum()
    }

    /// `Q v` via two bidiagonal passes, `U'(U v)`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let u = self.apply_factor(v);
        let mut out = vec![0.0; self.n];
        for t in 0..self.n {
            out[t] += u[t];
            if t + 1 < self.n {
                out[t] -= self.rho * u[t + 1];
            }
        }
        out
    }

    /// `a' Q b` for two equal-length vectors.
    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        let ua = self.apply_factor(a);
        let ub = self.apply_factor(b);
        ua.iter().zip(&ub).map(|(x, y)| x * y).sum()
    }

    /// `W' Q W` for the drift design.
    pub fn wtqw(&self, design: &DriftDesign) -> Matrix2<f64> {
        assert_eq!(design.len(), self.n);
        let c0 = design.column(0);
        let c1 = design.column(1);
        let q00 = self.bilinear(&c0, &c0);
        let q01 = self.bilinear(&c0, &c1);
        let q11 = self.bilinear(&c1, &c1);
        Matrix2::new(q00, q01, q01, q11)
    }

    /// `W' Q v` for the drift design.
    pub fn wtqv(&self, design: &DriftDesign, v: &[f64]) -> Vector2<f64> {
        assert_eq!(design.len(), self.n);
        assert_eq!(v.len(), self.n);
        let qv = self.mul_vec(v);
        let c0 = design.column(0);
        let c1 = design.column(1);
        let d0: f64 = c0.iter().zip(&qv).map(|(a, b)| a * b).sum();
        let d1: f64 = c1.iter().zip(&qv).map(|(a, b)| a * b).sum();
        Vector2::new(d0, d1)
    }

    /// `log |Q|` computed through the factor: twice the log determinant of
    /// the unit-triangular `U`. Always zero, but derived rather than assumed.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|_| 1.0f64.ln()).sum::<f64>()
    }

    /// Dense `Q`, for small-`n` cross-checks.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.n, self.n);
        for t in 0..self.n {
            q[(t, t)] = if t + 1 < self.n { 1.0 + self.rho * self.rho } else { 1.0 };
            if t + 1 < self.n {
                q[(t, t + 1)] = -self.rho;
                q[(t + 1, t)] = -self.rho;
            }
        }
        q
    }
}
