use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major numeric array with an explicit shape.
///
/// This is the only tensor type the layers use. Hot paths index through
/// leading-dimension slices (`row`) rather than per-element accessors.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![S::zero(); len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<S>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::shape(format!(
                "shape {:?} implies {} entries, got {}",
                shape,
                expected,
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    /// Length of one leading-dimension slice.
    fn row_len(&self) -> usize {
        debug_assert!(!self.shape.is_empty());
        self.data.len() / self.shape[0].max(1)
    }

    /// Slice of everything under leading index `i`: a row for a matrix,
    /// a plane for a 3-D tensor.
    #[inline]
    pub fn row(&self, i: usize) -> &[S] {
        let w = self.row_len();
        &self.data[i * w..(i + 1) * w]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        let w = self.row_len();
        &mut self.data[i * w..(i + 1) * w]
    }

    #[inline]
    pub fn at2(&self, i: usize, j: usize) -> S {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[i * self.shape[1] + j]
    }

    #[inline]
    pub fn set2(&mut self, i: usize, j: usize, value: S) {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[i * self.shape[1] + j] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Finite-entry check at layer boundaries; active in debug/test builds only.
    #[inline]
    pub fn debug_assert_finite(&self, context: &str) {
        #[cfg(debug_assertions)]
        {
            assert!(self.is_finite(), "non-finite value in {context}");
        }
        #[cfg(not(debug_assertions))]
        {
            let _ = context;
        }
    }

    /// Element-wise `self += other`. Shapes must agree.
    pub fn add_assign(&mut self, other: &Tensor<S>) {
        debug_assert_eq!(self.shape, other.shape);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
    }

    /// Element-wise scale by a constant.
    pub fn scale(&mut self, factor: S) {
        for v in self.data.iter_mut() {
            *v *= factor;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_bad_length() {
        let r = Tensor::<f64>::from_vec(&[2, 3], vec![0.0; 5]);
        assert!(r.is_err());
    }

    #[test]
    fn rows_slice_leading_dimension() {
        let t = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(t.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(t.row(1), &[4.0, 5.0, 6.0]);
        assert_eq!(t.at2(1, 2), 6.0);
    }

    #[test]
    fn finite_check_flags_nan() {
        let mut t = Tensor::<f64>::zeros(&[2, 2]);
        assert!(t.is_finite());
        t.data_mut()[3] = f64::NAN;
        assert!(!t.is_finite());
    }
}
