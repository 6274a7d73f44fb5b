//! Dense complex linear algebra for Newton steps.

use num_traits::Zero;

use crate::scalar::{Real, C};

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Vec<Vec<C<T>>>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// `None` when a pivot vanishes exactly or the input is not finite.
    #[allow(clippy::needless_range_loop)] // rows i and k of one matrix
    pub fn factor(mut a: Vec<Vec<C<T>>>) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, a[i][k].norm()))
                .fold(
                    (k, -T::one()),
                    |acc, cur| if cur.1 > acc.1 { cur } else { acc },
                );
            if !(best > T::zero()) || !best.is_finite() {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            let pivot = a[k][k];
            for i in k + 1..n {
                let m = a[i][k] / pivot;
                a[i][k] = m;
                if m.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = a[k][j];
                    a[i][j] = a[i][j] - m * u;
                }
            }
        }
        Some(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.lu.len();
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i][j];
                x[i] = x[i] - l * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i][j];
                x[i] = x[i] - u * x[j];
            }
            x[i] = x[i] / self.lu[i][i];
        }
        x
    }

    pub fn inverse(&self) -> Vec<Vec<C<T>>> {
        let n = self.lu.len();
        let cols: Vec<Vec<C<T>>> = (0..n)
            .map(|j| {
                let mut e = vec![C::new(T::zero(), T::zero()); n];
                e[j] = C::new(T::one(), T::zero());
                self.solve(&e)
            })
            .collect();
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect()
    }
}

/// Solves `A x = b`; `None` when `A` is singular.
pub fn solve<T: Real>(a: Vec<Vec<C<T>>>, b: &[C<T>]) -> Option<Vec<C<T>>> {
    Lu::factor(a).map(|lu| lu.solve(b))
}

fn one_norm<T: Real>(a: &[Vec<C<T>>]) -> T {
    let n = a.first().map_or(0, Vec::len);
    (0..n)
        .map(|j| a.iter().fold(T::zero(), |s, r| s + r[j].norm()))
        .fold(T::zero(), T::max)
}

/// 1-norm condition number of `A` after scaling each row to unit max-modulus.
/// Infinite for singular matrices.
pub fn condition_estimate<T: Real>(a: &[Vec<C<T>>]) -> T {
    let scaled: Vec<Vec<C<T>>> = a
        .iter()
        .map(|r| {
            let m = r.iter().fold(T::zero(), |m, z| m.max(z.norm()));
            if m > T::zero() {
                r.iter().map(|z| z / m).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    match Lu::factor(scaled.clone()) {
        Some(lu) => {
            let c = one_norm(&scaled) * one_norm(&lu.inverse());
            if c.is_finite() {
                c
            } else {
                T::infinity()
            }
        }
        None => T::infinity(),
    }
}
