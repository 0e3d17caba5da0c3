use crate::error::{CoreError, Result};

/// A real inner-product space whose elements can be linearly combined.
///
/// The DLN identities only ever need `(x, y)` and finite linear combinations,
/// so both plain vectors and spectral velocity fields implement this.
pub trait InnerProductSpace: Clone {
    /// Errors unless `self` and `other` belong to the same space.
    fn check_compatible(&self, other: &Self) -> Result<()>;

    /// Symmetric, bilinear, positive-definite inner product.
    fn dot(&self, other: &Self) -> Result<f64>;

    /// `sum_i c_i x_i`; `terms` must be non-empty.
    fn linear_combination(terms: &[(f64, &Self)]) -> Result<Self>;

    fn norm_sq(&self) -> f64 {
        self.dot(self).expect("an element is always compatible with itself")
    }
}

impl InnerProductSpace for Vec<f64> {
    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    fn dot(&self, other: &Self) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.iter().zip(other).map(|(a, b)| a * b).sum())
    }

    fn linear_combination(terms: &[(f64, &Self)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| CoreError::SequenceLength {
            name: "terms",
            len: 0,
            needed: 1,
        })?;
        let mut out = vec![0.0; first.len()];
        for (c, x) in terms {
            first.check_compatible(x)?;
            for (o, xi) in out.iter_mut().zip(x.iter()) {
                *o += c * xi;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_dot_and_combination() {
        let x = vec![1.0, 2.0, 3.0];
        let y = vec![0.0, -1.0, 2.0];
        assert_eq!(x.dot(&y).unwrap(), 4.0);
        let z = Vec::linear_combination(&[(2.0, &x), (-1.0, &y)]).unwrap();
        assert_eq!(z, vec![2.0, 5.0, 4.0]);
        assert_eq!(x.norm_sq(), 14.0);
    }

    #[test]
    fn vec_mismatch() {
        let x = vec![1.0; 3];
        let y = vec![1.0; 4];
        assert_eq!(
            x.dot(&y),
            Err(CoreError::DimensionMismatch { left: 3, right: 4 })
        );
        assert!(Vec::linear_combination(&[(1.0, &x), (1.0, &y)]).is_err());
        assert!(Vec::<f64>::linear_combination(&[]).is_err());
    }
}
