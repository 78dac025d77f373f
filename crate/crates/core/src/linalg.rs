//! Fixed-size dense complex LU factorisation with partial pivoting.

use num_traits::Zero;

use crate::num::{Real, C};

pub type Matrix<T, const N: usize> = [[C<T>; N]; N];
pub type Vector<T, const N: usize> = [C<T>; N];

#[derive(Debug, Clone)]
pub struct Lu<T, const N: usize> {
    lu: Matrix<T, N>,
    perm: [usize; N],
    norm1: T,
    singular: bool,
}

/// |re| + |im|, the pivoting magnitude used by LAPACK's zgetrf.
#[inline]
fn abs1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}

fn norm1<T: Real, const N: usize>(a: &Matrix<T, N>) -> T {
    (0..N)
        .map(|j| (0..N).fold(T::zero(), |s, i| s + a[i][j].norm()))
        .fold(T::zero(), T::max)
}

impl<T: Real, const N: usize> Lu<T, N> {
    pub fn factor(a: &Matrix<T, N>) -> Self {
        let mut lu = *a;
        let mut perm: [usize; N] = std::array::from_fn(|i| i);
        let mut singular = false;
        for k in 0..N {
            let p = (k..N)
                .max_by(|&i, &j| abs1(lu[i][k]).partial_cmp(&abs1(lu[j][k])).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(k);
            if lu[p][k].is_zero() || !abs1(lu[p][k]).is_finite() {
                singular = true;
                continue;
            }
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[k][k];
            for i in (k + 1)..N {
                let f = lu[i][k] / pivot;
                lu[i][k] = f;
                for j in (k + 1)..N {
                    let u = lu[k][j];
                    lu[i][j] -= f * u;
                }
            }
        }
        Self { lu, perm, norm1: norm1(a), singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn solve(&self, b: &Vector<T, N>) -> Vector<T, N> {
        let mut x: Vector<T, N> = std::array::from_fn(|i| b[self.perm[i]]);
        for i in 0..N {
            for j in 0..i {
                let l = self.lu[i][j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..N).rev() {
            for j in (i + 1)..N {
                let u = self.lu[i][j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] = x[i] / self.lu[i][i];
        }
        x
    }

    /// 1-norm condition number, computed exactly from the explicit inverse.
    pub fn condition(&self) -> T {
        if self.singular {
            return T::infinity();
        }
        let mut inv_norm = T::zero();
        for j in 0..N {
            let mut e = [C::new(T::zero(), T::zero()); N];
            e[j] = C::new(T::one(), T::zero());
            let col = self.solve(&e);
            let s = col.iter().fold(T::zero(), |s, z| s + z.norm());
            if !s.is_finite() {
                return T::infinity();
            }
            inv_norm = inv_norm.max(s);
        }
        self.norm1 * inv_norm
    }
}

pub fn mat_vec<T: Real, const N: usize>(a: &Matrix<T, N>, x: &Vector<T, N>) -> Vector<T, N> {
    std::array::from_fn(|i| (0..N).fold(C::zero(), |s, j| s + a[i][j] * x[j]))
}
