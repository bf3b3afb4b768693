use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::scalar::Real;

/// Linear state feedback `u = K x` with `K` of shape m×n.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix<T>(Mat<T>);

impl<T: Real> GainMatrix<T> {
    pub fn new(k: Mat<T>) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::NonFinite("GainMatrix"));
        }
        Ok(Self(k))
    }

    /// Single-input gain from its row.
    pub fn from_row(row: &[T]) -> Self {
        Self(Mat::row_vector(row))
    }

    pub fn zeros(inputs: usize, states: usize) -> Self {
        Self(Mat::zeros(inputs, states))
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Mat<T> {
        self.0
    }

    pub fn input_dim(&self) -> usize {
        self.0.rows()
    }

    pub fn state_dim(&self) -> usize {
        self.0.cols()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.0.mul_vec(x)
    }

    /// `A + B K`.
    pub fn closed_loop(&self, a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
        a + &(b * &self.0)
    }

    /// Whether `A + B K` is Hurwitz.
    pub fn stabilizes(&self, a: &Mat<T>, b: &Mat<T>) -> bool {
        crate::numerics::is_hurwitz(&self.closed_loop(a, b))
    }
}

impl<T: Real> From<GainMatrix<T>> for Mat<T> {
    fn from(g: GainMatrix<T>) -> Self {
        g.0
    }
}
