//! Small dense-vector helpers shared across modules.

/// Dot product with four independent accumulators, so the summation order is
/// fixed but not strictly left-to-right.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (norm(a) * norm(b))
}

/// Neumaier-compensated accumulator for a fixed-length vector.
#[derive(Debug, Clone)]
pub struct CompensatedSum {
    sum: Vec<f64>,
    carry: Vec<f64>,
}

impl CompensatedSum {
    pub fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            carry: vec![0.0; len],
        }
    }

    pub fn add(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.sum.len());
        for ((s, c), &x) in self.sum.iter_mut().zip(self.carry.iter_mut()).zip(v) {
            let t = *s + x;
            if s.abs() >= x.abs() {
                *c += (*s - t) + x;
            } else {
                *c += (x - t) + *s;
            }
            *s = t;
        }
    }

    pub fn finish(self) -> Vec<f64> {
        self.sum.iter().zip(&self.carry).map(|(s, c)| s + c).collect()
    }
}

/// Lower Cholesky factor of a dense symmetric positive definite matrix,
/// stored row-major.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    /// Factors the `n × n` row-major matrix `a` (only the lower triangle is
    /// read). Returns `None` if a pivot is not positive.
    pub fn factor(a: &[f64], n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let (done, rest) = l.split_at_mut(i * n);
            let row_i = &mut rest[..n];
            for j in 0..i {
                let row_j = &done[j * n..j * n + j];
                let s = a[i * n + j] - dot(&row_i[..j], row_j);
                row_i[j] = s / done[j * n + j];
            }
            let s = a[i * n + i] - dot(&row_i[..i], &row_i[..i]);
            if !(s > 0.0) {
                return None;
            }
            row_i[i] = s.sqrt();
        }
        Some(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            y[i] = (y[i] - dot(row, &y[..i])) / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            y[i] /= self.l[i * n + i];
            let xi = y[i];
            let row = &self.l[i * n..i * n + i];
            for (yk, lik) in y[..i].iter_mut().zip(row) {
                *yk -= lik * xi;
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut acc = CompensatedSum::new(1);
        acc.add(&[1e16]);
        acc.add(&[1.0]);
        acc.add(&[-1e16]);
        assert_eq!(acc.finish(), vec![1.0]);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        // A = [[4,2,0],[2,5,1],[0,1,3]], x = (1,-1,2) → b = (2,-1,5).
        let a = [4.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0];
        let ch = DenseCholesky::factor(&a, 3).unwrap();
        let x = ch.solve(&[2.0, -1.0, 5.0]);
        for (xi, ei) in x.iter().zip([1.0, -1.0, 2.0]) {
            assert!((xi - ei).abs() < 1e-14);
        }
        assert!(DenseCholesky::factor(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn cosine_of_parallel_vectors_is_one() {
        assert!((cosine(&[1.0, 2.0], &[2.0, 4.0]) - 1.0).abs() < 1e-15);
    }
}
