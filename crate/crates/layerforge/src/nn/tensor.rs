//! Dense N×C×H×W tensor in f64, row-major with W fastest.

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize, c: usize, h: usize, w: usize) -> Tensor4 {
        assert!(n >= 1 && c >= 1 && h >= 1 && w >= 1, "tensor dims must be >= 1");
        Tensor4 {
            n,
            c,
            h,
            w,
            data: vec![0.0; n * c * h * w],
        }
    }

    pub fn from_vec(n: usize, c: usize, h: usize, w: usize, data: Vec<f64>) -> Tensor4 {
        assert_eq!(data.len(), n * c * h * w, "data length must match dims");
        Tensor4 { n, c, h, w, data }
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn at(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[((n * self.c + c) * self.h + y) * self.w + x]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, v: f64) {
        let w = self.w;
        self.data[((n * self.c + c) * self.h + y) * w + x] = v;
    }

    /// One H×W channel plane as a slice.
    #[inline]
    pub fn plane(&self, n: usize, c: usize) -> &[f64] {
        let sz = self.h * self.w;
        let base = (n * self.c + c) * sz;
        &self.data[base..base + sz]
    }

    #[inline]
    pub fn plane_mut(&mut self, n: usize, c: usize) -> &mut [f64] {
        let sz = self.h * self.w;
        let base = (n * self.c + c) * sz;
        &mut self.data[base..base + sz]
    }

    /// Elementwise sum; dims must match.
    pub fn add(&self, other: &Tensor4) -> Tensor4 {
        assert_eq!(self.dims(), other.dims(), "add requires matching dims");
        let mut out = self.clone();
        for (o, &v) in out.data.iter_mut().zip(&other.data) {
            *o += v;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major_w_fastest() {
        let mut t = Tensor4::zeros(2, 3, 4, 5);
        t.set(1, 2, 3, 4, 7.5);
        let flat = ((3 + 2) * 4 + 3) * 5 + 4; // ((n*C + c)*H + y)*W + x
        assert_eq!(t.data[flat], 7.5);
        assert_eq!(t.at(1, 2, 3, 4), 7.5);
        assert_eq!(t.plane(1, 2)[3 * 5 + 4], 7.5);
    }

    #[test]
    fn add_is_elementwise() {
        let a = Tensor4::from_vec(1, 1, 1, 3, vec![1.0, 2.0, 3.0]);
        let b = Tensor4::from_vec(1, 1, 1, 3, vec![0.5, 0.5, 0.5]);
        assert_eq!(a.add(&b).data, vec![1.5, 2.5, 3.5]);
    }
}
