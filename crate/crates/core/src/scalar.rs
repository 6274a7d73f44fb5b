//! Scalar traits shared by the exact and the floating-point layers.

use std::fmt::Debug;

use num_complex::Complex;
use num_integer::Integer;
use num_traits::{Float, FromPrimitive, Signed, ToPrimitive};

/// Integer type used for exact lattice and polytope arithmetic.
///
/// `BigInt` is the default; fixed-width types work as long as the inputs are
/// small enough that determinants do not overflow.
pub trait ExactInt:
    Integer + Signed + Clone + Debug + From<i64> + ToPrimitive + Send + Sync + 'static
{
}

impl<T> ExactInt for T where
    T: Integer + Signed + Clone + Debug + From<i64> + ToPrimitive + Send + Sync + 'static
{
}

/// Real scalar used by the numerical layer.
pub trait Real: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Newton tolerance that this precision can actually reach.
    fn default_newton_tol() -> Self;
    /// Smallest admissible coordinate modulus on the torus.
    fn default_torus_floor() -> Self;
    /// Convergence threshold for the corrector inside a path.
    fn default_corrector_tol() -> Self;
    /// Smallest step in `t` before a path is abandoned.
    fn default_min_step() -> Self;

    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }
}

impl Real for f64 {
    fn default_newton_tol() -> Self {
        1e-12
    }
    fn default_torus_floor() -> Self {
        1e-14
    }
    fn default_corrector_tol() -> Self {
        1e-9
    }
    fn default_min_step() -> Self {
        1e-13
    }
}

impl Real for f32 {
    fn default_newton_tol() -> Self {
        1e-5
    }
    fn default_torus_floor() -> Self {
        1e-7
    }
    fn default_corrector_tol() -> Self {
        1e-4
    }
    fn default_min_step() -> Self {
        1e-6
    }
}

pub type C<T> = Complex<T>;

/// Max-modulus norm of a complex vector.
pub fn norm_inf<T: Real>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |m, z| m.max(z.norm()))
}

/// Integer power by repeated squaring; negative exponents invert first.
pub fn cpowi<T: Real>(z: C<T>, e: i64) -> C<T> {
    let mut base = if e < 0 { z.inv() } else { z };
    let mut k = e.unsigned_abs();
    let mut acc = C::new(T::one(), T::zero());
    while k > 0 {
        if k & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        k >>= 1;
    }
    acc
}

/// Compensated (Kahan) sum of complex numbers.
pub fn kahan_sum<T: Real, I: IntoIterator<Item = C<T>>>(items: I) -> C<T> {
    let mut sum = C::new(T::zero(), T::zero());
    let mut comp = C::new(T::zero(), T::zero());
    for z in items {
        let y = z - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}
