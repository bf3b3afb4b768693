use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::scalar::Real;

/// Gaussian radial basis functions
/// `φⱼ(x) = exp(−Σ_d (x_d − c_{j,d})² / (2 w_d²))` on a set of centers.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGrid<T> {
    /// N×n, one center per row
    centers: Mat<T>,
    widths: Vec<T>,
}

impl<T: Real> BasisGrid<T> {
    pub fn new(centers: Mat<T>, widths: Vec<T>) -> Result<Self> {
        if widths.len() != centers.cols() {
            return Err(Error::DimensionMismatch {
                context: "BasisGrid::new",
                expected: format!("{} widths", centers.cols()),
                actual: format!("{}", widths.len()),
            });
        }
        if widths.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter("basis widths must be positive".into()));
        }
        Ok(Self { centers, widths })
    }

    /// Tensor-product grid with `counts[d]` evenly spaced centers on
    /// `[lower[d], upper[d]]` and widths equal to the spacing.
    pub fn uniform(lower: &[T], upper: &[T], counts: &[usize]) -> Result<Self> {
        let dims = counts.len();
        if lower.len() != dims || upper.len() != dims {
            return Err(Error::DimensionMismatch {
                context: "BasisGrid::uniform",
                expected: format!("{dims} bounds"),
                actual: format!("{} lower, {} upper", lower.len(), upper.len()),
            });
        }
        if counts.iter().any(|&c| c < 2) || lower.iter().zip(upper).any(|(l, u)| !(u > l)) {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 points per axis and upper > lower".into(),
            ));
        }
        let spacing: Vec<T> = (0..dims)
            .map(|d| (upper[d] - lower[d]) / T::from_count(counts[d] - 1))
            .collect();
        let total: usize = counts.iter().product();
        let mut data = Vec::with_capacity(total * dims);
        let mut index = vec![0usize; dims];
        for _ in 0..total {
            for d in 0..dims {
                data.push(lower[d] + spacing[d] * T::from_count(index[d]));
            }
            // last axis varies fastest
            for d in (0..dims).rev() {
                index[d] += 1;
                if index[d] < counts[d] {
                    break;
                }
                index[d] = 0;
            }
        }
        Self::new(Mat::new(total, dims, data)?, spacing)
    }

    /// 11 × 11 grid over ψ ∈ [−0.5, 0.5] rad, ξ ∈ [−2, 2] rad/s.
    pub fn pendulum() -> Self {
        Self::uniform(&[T::lit(-0.5), T::lit(-2.0)], &[T::lit(0.5), T::lit(2.0)], &[11, 11])
            .expect("static grid is valid")
    }

    /// Number of basis functions N.
    pub fn len(&self) -> usize {
        self.centers.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state_dim(&self) -> usize {
        self.centers.cols()
    }

    pub fn center(&self, j: usize) -> &[T] {
        self.centers.row(j)
    }

    pub fn widths(&self) -> &[T] {
        &self.widths
    }

    pub fn features(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.state_dim());
        let half = T::lit(0.5);
        (0..self.len())
            .map(|j| {
                let c = self.center(j);
                let s: T = (0..x.len())
                    .map(|d| {
                        let z = (x[d] - c[d]) / self.widths[d];
                        z * z
                    })
                    .sum();
                (-half * s).exp()
            })
            .collect()
    }
}

/// `θᵀ φ(x)`.
pub fn value<T: Real>(x: &[T], theta: &[T], grid: &BasisGrid<T>) -> T {
    dot(theta, &grid.features(x))
}

/// `Wᵀ φ(x)`.
pub fn policy_mean<T: Real>(x: &[T], w: &Mat<T>, grid: &BasisGrid<T>) -> Vec<T> {
    w.tr_mul_vec(&grid.features(x))
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&p, &q)| p * q).sum()
}
