//! Dense complex linear algebra helpers on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `e^{-iθ}`.
#[inline]
pub fn phase(theta: f64) -> Complex64 {
    Complex64::new(libm::cos(theta), -libm::sin(theta))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M − M†|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * real(0.5)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Kronecker product with `a` acting on the high-order index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues and the
/// unitary whose columns are the eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Self {
        let eig = h.clone().symmetric_eigen();
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// `V f(λ) V†` for a complex-valued spectral function.
    pub fn apply(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= w);
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(−iHt)`.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        self.apply(|lambda| phase(lambda * t))
    }
}

/// Index sets of the connected components of the nonzero pattern of `m`.
/// A matrix that is block diagonal up to a permutation splits into its
/// blocks.
pub fn blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in 0..n {
        for r in 0..n {
            if r != c && m[(r, c)] != ZERO {
                let (a, b) = (root(&mut parent, r), root(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = alloc::vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// `exp(−iHt)` for Hermitian `H`, diagonalizing each block of
/// [`blocks`] on its own. Exact zeros of `H` stay exact zeros of the result.
pub fn exp_i_blockwise(h: &CMatrix, t: f64) -> CMatrix {
    let n = h.nrows();
    let mut u = CMatrix::zeros(n, n);
    for idx in blocks(h) {
        if let [k] = idx[..] {
            u[(k, k)] = phase(h[(k, k)].re * t);
            continue;
        }
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |r, c| h[(idx[r], idx[c])]);
        let e = HermitianEigen::new(&sub).exp_i(t);
        for (r, &gr) in idx.iter().enumerate() {
            for (c, &gc) in idx.iter().enumerate() {
                u[(gr, gc)] = e[(r, c)];
            }
        }
    }
    u
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    let gram = hermitian_part(&(m.adjoint() * m));
    let eig = HermitianEigen::new(&gram);
    libm::sqrt(eig.values.iter().fold(0.0f64, |a, &v| a.max(v)))
}

/// `max |U†U − I|`.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(alloc::vec![real(1.0), real(-3.0)]));
        assert!((spectral_norm(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn blockwise_matches_dense() {
        let m = CMatrix::from_fn(5, 5, |r, c| {
            let same = (r % 2) == (c % 2);
            if !same {
                ZERO
            } else if r == c {
                real(r as f64 - 1.5)
            } else {
                Complex64::new(0.3 * (r + c) as f64, if r < c { 0.2 } else { -0.2 })
            }
        });
        assert_eq!(blocks(&m), alloc::vec![alloc::vec![0, 2, 4], alloc::vec![1, 3]]);
        let dense = HermitianEigen::new(&m).exp_i(0.7);
        let split = exp_i_blockwise(&m, 0.7);
        assert!(max_abs(&(dense - &split)) < 1e-13);
        assert_eq!(split[(0, 1)], ZERO);
    }

    #[test]
    fn exp_of_pauli_x() {
        // exp(-i σx t) = cos t I − i sin t σx
        let sx = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let u = HermitianEigen::new(&sx).exp_i(0.3);
        assert!((u[(0, 0)] - real(libm::cos(0.3))).norm() < 1e-14);
        assert!((u[(0, 1)] - Complex64::new(0.0, -libm::sin(0.3))).norm() < 1e-14);
        assert!(unitarity_defect(&u) < 1e-14);
    }
}
