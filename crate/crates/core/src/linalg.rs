//! Complex 2x2 matrices, the structural matrices of the block operator, and
//! the `Block` abstraction that lets the propagator run on 2x2 matrices or
//! on plain complex scalars.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative singularity threshold used by [`mat_inv`].
pub const SINGULAR_TOL: f64 = 1e-13;

#[derive(Clone, Copy, PartialEq, Default)]
pub struct Mat2C {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl fmt::Debug for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.a11, self.a12, self.a21, self.a22
        )
    }
}

impl Mat2C {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Mat2C { a11, a12, a21, a22 }
    }

    pub fn real(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2C::new(a11.into(), a12.into(), a21.into(), a22.into())
    }

    pub const fn zero() -> Self {
        Mat2C::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Mat2C::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Mat2C::new(d1, ZERO, ZERO, d2)
    }

    pub fn scalar(c: Complex64) -> Self {
        Mat2C::diag(c, c)
    }

    /// The involution `[[0,1],[1,0]]`.
    pub const fn eps() -> Self {
        Mat2C::new(ZERO, ONE, ONE, ZERO)
    }

    /// `diag(1, -1)`; anticommutes with `eps`.
    pub fn xi() -> Self {
        Mat2C::real(1.0, 0.0, 0.0, -1.0)
    }

    /// Projection onto the `+1` eigenspace of `eps`.
    pub fn p_plus() -> Self {
        Mat2C::real(0.5, 0.5, 0.5, 0.5)
    }

    /// Projection onto the `-1` eigenspace of `eps`.
    pub fn p_minus() -> Self {
        Mat2C::real(0.5, -0.5, -0.5, 0.5)
    }

    pub fn scale(self, c: Complex64) -> Self {
        Mat2C::new(self.a11 * c, self.a12 * c, self.a21 * c, self.a22 * c)
    }

    pub fn scale_re(self, c: f64) -> Self {
        Mat2C::new(self.a11 * c, self.a12 * c, self.a21 * c, self.a22 * c)
    }

    pub fn adjoint(self) -> Self {
        Mat2C::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn transpose(self) -> Self {
        Mat2C::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn conj(self) -> Self {
        Mat2C::new(self.a11.conj(), self.a12.conj(), self.a21.conj(), self.a22.conj())
    }

    pub fn det(self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(self) -> Complex64 {
        self.a11 + self.a22
    }

    /// Frobenius norm.
    pub fn norm(self) -> f64 {
        (self.a11.norm_sqr() + self.a12.norm_sqr() + self.a21.norm_sqr() + self.a22.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(self) -> f64 {
        self.a11
            .norm()
            .max(self.a12.norm())
            .max(self.a21.norm())
            .max(self.a22.norm())
    }

    /// `(m + m*)/2`
    pub fn herm_re(self) -> Self {
        (self + self.adjoint()).scale_re(0.5)
    }

    pub fn is_finite(self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_hermitian(self, tol: f64) -> bool {
        (self - self.adjoint()).norm() <= tol * (1.0 + self.norm())
    }

    /// Eigenvalues `(min, max)` of the Hermitian part of `self`.
    pub fn eig_hermitian(self) -> (f64, f64) {
        let h = self.herm_re();
        let a = h.a11.re;
        let d = h.a22.re;
        let b = h.a12.norm();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn is_psd(self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.eig_hermitian().0 >= -tol * (1.0 + self.norm())
    }

    pub fn is_nonsingular(self, tol: f64) -> bool {
        let n = self.norm();
        n > 0.0 && self.det().norm() > tol * n * n
    }

    /// Singular values `(min, max)`.
    pub fn singular_values(self) -> (f64, f64) {
        let (lo, hi) = (self.adjoint() * self).eig_hermitian();
        (lo.max(0.0).sqrt(), hi.max(0.0).sqrt())
    }

    /// Upper triangular `r` with `r* r = self`, for Hermitian positive definite input.
    pub fn cholesky_upper(self) -> Option<Self> {
        let a = self.a11.re;
        if !(a > 0.0) {
            return None;
        }
        let r11 = a.sqrt();
        let r12 = self.a12 / r11;
        let s = self.a22.re - r12.norm_sqr();
        if !(s > 0.0) {
            return None;
        }
        Some(Mat2C::new(r11.into(), r12, ZERO, s.sqrt().into()))
    }

    pub fn apply(self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl AddAssign for Mat2C {
    fn add_assign(&mut self, o: Mat2C) {
        *self = *self + o;
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, o: Mat2C) -> Mat2C {
        Mat2C::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        Mat2C::new(-self.a11, -self.a12, -self.a21, -self.a22)
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, b: Mat2C) -> Mat2C {
        mat_mul(self, b)
    }
}

impl Mul<Complex64> for Mat2C {
    type Output = Mat2C;
    fn mul(self, c: Complex64) -> Mat2C {
        self.scale(c)
    }
}

impl Mul<f64> for Mat2C {
    type Output = Mat2C;
    fn mul(self, c: f64) -> Mat2C {
        self.scale_re(c)
    }
}

pub fn mat_mul(a: Mat2C, b: Mat2C) -> Mat2C {
    Mat2C::new(
        a.a11 * b.a11 + a.a12 * b.a21,
        a.a11 * b.a12 + a.a12 * b.a22,
        a.a21 * b.a11 + a.a22 * b.a21,
        a.a21 * b.a12 + a.a22 * b.a22,
    )
}

/// Inverse, failing when `|det a| <= SINGULAR_TOL * ||a||^2`.
pub fn mat_inv(a: Mat2C) -> Result<Mat2C, Error> {
    let d = a.det();
    let n = a.norm();
    if !(d.norm() > SINGULAR_TOL * n * n) {
        return Err(Error::SingularMatrix);
    }
    let r = d.inv();
    Ok(Mat2C::new(a.a22 * r, -a.a12 * r, -a.a21 * r, a.a11 * r))
}

/// `(m - m*)/(2i)`
pub fn herglotz_im(m: Mat2C) -> Mat2C {
    (m - m.adjoint()).scale(Complex64::new(0.0, -0.5))
}

/// Left boundary parameter, a point of the extended complex plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryParam {
    Finite(Complex64),
    Infinity,
}

impl BoundaryParam {
    pub fn finite(re: f64, im: f64) -> Self {
        BoundaryParam::Finite(Complex64::new(re, im))
    }

    pub fn conj(self) -> Self {
        match self {
            BoundaryParam::Finite(a) => BoundaryParam::Finite(a.conj()),
            BoundaryParam::Infinity => BoundaryParam::Infinity,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, BoundaryParam::Infinity)
    }

    /// `A = diag(conj(a), a)`, absent for the infinite parameter.
    pub fn matrix(self) -> Option<Mat2C> {
        match self {
            BoundaryParam::Finite(a) => Some(Mat2C::diag(a.conj(), a)),
            BoundaryParam::Infinity => None,
        }
    }
}

/// `(S, C, A)` for a boundary parameter.
pub fn boundary_matrices(alpha: BoundaryParam) -> (Mat2C, Mat2C, Option<Mat2C>) {
    match alpha {
        BoundaryParam::Finite(a) => {
            let am = Mat2C::diag(a.conj(), a);
            let w = 1.0 / (1.0 + a.norm_sqr()).sqrt();
            (Mat2C::identity().scale_re(w), (Mat2C::eps() * am).scale_re(w), Some(am))
        }
        BoundaryParam::Infinity => (Mat2C::zero(), Mat2C::eps(), None),
    }
}

/// Arithmetic needed by the propagator. Implemented for [`Mat2C`] (the block
/// operator) and for [`Complex64`] (the scalar Schrodinger operator).
pub trait Block:
    Copy
    + Send
    + Sync
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const DIM: usize;
    fn zero() -> Self;
    fn identity() -> Self;
    /// The metric in front of the second derivative.
    fn metric() -> Self;
    fn scale(self, c: Complex64) -> Self;
    fn scale_re(self, c: f64) -> Self;
    fn adjoint(self) -> Self;
    fn inverse(self) -> Result<Self, Error>;
    fn norm(self) -> f64;
    /// Extreme eigenvalues of the Hermitian part.
    fn eig_hermitian(self) -> (f64, f64);
    fn cholesky_upper(self) -> Option<Self>;
}

impl Block for Mat2C {
    const DIM: usize = 2;
    fn zero() -> Self {
        Mat2C::zero()
    }
    fn identity() -> Self {
        Mat2C::identity()
    }
    fn metric() -> Self {
        Mat2C::eps()
    }
    fn scale(self, c: Complex64) -> Self {
        Mat2C::scale(self, c)
    }
    fn scale_re(self, c: f64) -> Self {
        Mat2C::scale_re(self, c)
    }
    fn adjoint(self) -> Self {
        Mat2C::adjoint(self)
    }
    fn inverse(self) -> Result<Self, Error> {
        mat_inv(self)
    }
    fn norm(self) -> f64 {
        Mat2C::norm(self)
    }
    fn eig_hermitian(self) -> (f64, f64) {
        Mat2C::eig_hermitian(self)
    }
    fn cholesky_upper(self) -> Option<Self> {
        Mat2C::cholesky_upper(self)
    }
}

impl Block for Complex64 {
    const DIM: usize = 1;
    fn zero() -> Self {
        ZERO
    }
    fn identity() -> Self {
        ONE
    }
    fn metric() -> Self {
        ONE
    }
    fn scale(self, c: Complex64) -> Self {
        self * c
    }
    fn scale_re(self, c: f64) -> Self {
        self * c
    }
    fn adjoint(self) -> Self {
        self.conj()
    }
    fn inverse(self) -> Result<Self, Error> {
        if self.norm() == 0.0 || !self.norm().is_finite() {
            Err(Error::SingularMatrix)
        } else {
            Ok(self.inv())
        }
    }
    fn norm(self) -> f64 {
        Complex64::norm(self)
    }
    fn eig_hermitian(self) -> (f64, f64) {
        (self.re, self.re)
    }
    fn cholesky_upper(self) -> Option<Self> {
        if self.re > 0.0 {
            Some(self.re.sqrt().into())
        } else {
            None
        }
    }
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square root with `Re >= 0, Im >= 0` for `Im z >= 0`, conjugated below the axis.
pub fn sqrt_first_quadrant(z: Complex64) -> Complex64 {
    let k = z.sqrt();
    let k = if k.re < 0.0 { -k } else { k };
    if z.im >= 0.0 {
        Complex64::new(k.re.abs(), k.im.abs())
    } else {
        Complex64::new(k.re.abs(), -k.im.abs())
    }
}

pub(crate) fn i_unit() -> Complex64 {
    I
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Mat2C, b: Mat2C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn structural_products() {
        let e = Mat2C::eps();
        assert!(close(e * e, Mat2C::identity(), 0.0));
        assert!(close(Mat2C::p_plus() * Mat2C::p_minus(), Mat2C::zero(), 0.0));
        assert!(close(e * Mat2C::p_plus(), Mat2C::p_plus(), 1e-15));
        assert!(close(Mat2C::p_plus() * e, Mat2C::p_plus(), 1e-15));
        assert!(close(e * Mat2C::p_minus(), -Mat2C::p_minus(), 1e-15));
        assert!(close(Mat2C::p_plus() + Mat2C::p_minus(), Mat2C::identity(), 0.0));
        let x = Mat2C::xi();
        assert!(close(x * e * x, -e, 0.0));
    }

    #[test]
    fn inverses() {
        assert_eq!(mat_inv(Mat2C::identity()).unwrap(), Mat2C::identity());
        assert!(close(mat_inv(Mat2C::eps()).unwrap(), Mat2C::eps(), 0.0));
        let d = Mat2C::diag(c(2.0, 0.0), c(0.0, -1.0));
        assert!(close(mat_inv(d).unwrap(), Mat2C::diag(c(0.5, 0.0), c(0.0, 1.0)), 1e-16));
        assert!(matches!(mat_inv(Mat2C::p_plus()), Err(Error::SingularMatrix)));
        // scale invariance of the singularity test
        assert!(mat_inv(Mat2C::identity().scale_re(1e-30)).is_ok());
        assert!(mat_inv(Mat2C::identity().scale_re(1e30)).is_ok());
    }

    #[test]
    fn herglotz_im_examples() {
        assert_eq!(herglotz_im(Mat2C::identity()), Mat2C::zero());
        assert!(close(herglotz_im(Mat2C::scalar(c(0.0, 1.0))), Mat2C::identity(), 0.0));
        // (m - m*)/(2i) with m - m* = [[0, i], [i, 0]]
        let m = Mat2C::new(ZERO, c(0.0, 1.0), ZERO, ZERO);
        let want = Mat2C::new(ZERO, c(0.5, 0.0), c(0.5, 0.0), ZERO);
        assert!(close(herglotz_im(m), want, 1e-16));
    }

    #[test]
    fn boundary_matrix_examples() {
        let (s, cc, a) = boundary_matrices(BoundaryParam::finite(0.0, 0.0));
        assert_eq!(s, Mat2C::identity());
        assert_eq!(cc, Mat2C::zero());
        assert_eq!(a, Some(Mat2C::zero()));
        let (s, cc, a) = boundary_matrices(BoundaryParam::Infinity);
        assert_eq!((s, cc, a), (Mat2C::zero(), Mat2C::eps(), None));
        let (s, cc, _) = boundary_matrices(BoundaryParam::finite(1.0, 0.0));
        let r = 1.0 / 2f64.sqrt();
        assert!(close(s, Mat2C::identity().scale_re(r), 1e-16));
        assert!(close(cc, Mat2C::eps().scale_re(r), 1e-16));
    }

    #[test]
    fn cholesky_and_eigen() {
        let h = Mat2C::new(c(4.0, 0.0), c(1.0, 2.0), c(1.0, -2.0), c(3.0, 0.0));
        let r = h.cholesky_upper().unwrap();
        assert!(close(r.adjoint() * r, h, 1e-14));
        let (lo, hi) = h.eig_hermitian();
        assert!((lo + hi - 7.0).abs() < 1e-14);
        assert!((lo * hi - (12.0 - 5.0)).abs() < 1e-13);
    }

    #[test]
    fn branch_of_root() {
        let k = sqrt_first_quadrant(c(-1.0, 1e-300));
        assert!(k.re >= 0.0 && k.im > 0.99);
        let k = sqrt_first_quadrant(c(4.0, 0.0));
        assert!((k - c(2.0, 0.0)).norm() < 1e-15);
        let k = sqrt_first_quadrant(c(0.0, -2.0));
        assert!((k - c(1.0, -1.0)).norm() < 1e-15);
    }

    fn cplx() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| c(a, b))
    }

    fn mat() -> impl Strategy<Value = Mat2C> {
        (cplx(), cplx(), cplx(), cplx()).prop_map(|(a, b, c2, d)| Mat2C::new(a, b, c2, d))
    }

    proptest! {
        #[test]
        fn s_and_c_identities(re in -5.0f64..5.0, im in -5.0f64..5.0, inf in 0u8..8) {
            let alpha = if inf == 0 { BoundaryParam::Infinity } else { BoundaryParam::finite(re, im) };
            let (s, cc, _) = boundary_matrices(alpha);
            prop_assert!(close(s * s + cc * cc, Mat2C::identity(), 1e-14));
            prop_assert!(close(s * cc, cc * s, 1e-14));
        }

        #[test]
        fn herglotz_im_is_hermitian(m in mat()) {
            let h = herglotz_im(m);
            prop_assert!((h - h.adjoint()).norm() <= 1e-14 * (1.0 + m.norm()));
        }

        #[test]
        fn inverse_round_trip(m in mat()) {
            let (smin, smax) = m.singular_values();
            prop_assume!(smin > 1e-3 * smax);
            let cond = smax / smin;
            let inv = mat_inv(m).unwrap();
            prop_assert!(close(m * inv, Mat2C::identity(), 1e-12 * cond));
        }
    }
}
