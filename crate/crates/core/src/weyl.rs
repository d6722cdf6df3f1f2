//! M-functions on truncated intervals, Weyl disk certificates, the limit-point
//! M-function and the resolvent kernel.
//!
//! The truncated M-function is evaluated from a backward frame of solutions
//! satisfying the right boundary condition, which is stable however long the
//! interval. The disk certificate comes from `A11 = int_0^b Phi* Phi`: the disk
//! is `{M : (M - c)* A11 (M - c) <= (4 eta^2)^{-1} A11(conj lambda)^{-1}}`,
//! a matrix ball with radius `||A11^{-1}||^{1/2} ||A11(conj lambda)^{-1}||^{1/2} / (2|eta|)`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::linalg::{i_unit, mat_inv, sqrt_first_quadrant, Block, BoundaryParam, Mat2C};
use crate::model::Problem;
use crate::propagator::{
    backward_frame, backward_profile, propagate_grid, GrowthFrame, Pair, RightBc,
    System,
};
use crate::{Error, Result};

/// Default certificate tolerance for limit evaluations.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MFunctionValue {
    pub lambda: Complex64,
    pub m: Mat2C,
    /// Certified Frobenius bound on `|M_b - M|`.
    pub disk_radius: f64,
    pub b_used: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeylDisk {
    pub b: f64,
    pub lambda: Complex64,
    /// Dirichlet-truncated M-function, a point of the disk boundary.
    pub center_estimate: Mat2C,
    pub radius: f64,
}

fn require_nonreal(lambda: Complex64) -> Result<()> {
    if lambda.im == 0.0 || !lambda.im.is_finite() || !lambda.re.is_finite() {
        return Err(Error::InvalidProblem(format!("lambda = {lambda} must be non-real")));
    }
    Ok(())
}

/// `(M, G)` from the right solutions `Y` at 0, where `Theta - Phi M = Y G`.
pub fn m_from_frame<B: Block>(s: B, c: B, y: Pair<B>) -> Result<(B, B)> {
    let e = B::metric();
    let g = (c * y.f + s * e * y.df).inverse()?;
    let m = (c * e * y.df - s * y.f) * g;
    Ok((m, g))
}

pub fn m_finite_sys<S: System>(sys: &S, lambda: Complex64, b: f64, bc: RightBc<S::B>) -> Result<S::B> {
    let (y, _) = backward_frame(sys, lambda, b, bc)?;
    let (s, c) = sys.left_bc();
    let (m, _) = m_from_frame(s, c, y)?;
    if !m.norm().is_finite() {
        return Err(Error::SingularMatrix);
    }
    Ok(m)
}

/// `M(b; lambda)` with the right condition `F'(b) + B F(b) = 0` (`F(b) = 0`
/// for the infinite parameter).
pub fn m_finite(p: &Problem, lambda: Complex64, b: f64, right_bc: BoundaryParam) -> Result<Mat2C> {
    p.validate()?;
    m_finite_sys(p, lambda, b, p.robin(right_bc))
}

/// Radius from forward frames at `lambda` and (if needed) `conj lambda`.
fn radius_from<S: System>(
    f: &GrowthFrame<S>,
    fc: Option<&GrowthFrame<S>>,
    lambda: Complex64,
) -> Result<f64> {
    let (m1, l1) = f.inv_gram_norm()?;
    let (m2, l2) = match fc {
        Some(g) => g.inv_gram_norm()?,
        None => (m1, l1),
    };
    let pre = (S::B::DIM as f64).sqrt() / lambda.im.abs();
    Ok(pre * (m1 * m2).sqrt() * (0.5 * (l1 + l2)).exp())
}

/// Certified Frobenius bound on the distance from `M(b)` (any right
/// condition) to every point of the disk at `b`, in particular to the limit.
pub fn disk_radius_sys<S: System>(sys: &S, lambda: Complex64, b: f64) -> Result<f64> {
    require_nonreal(lambda)?;
    let mut f = GrowthFrame::new(sys, lambda);
    f.advance_to(b)?;
    if sys.conj_symmetric() {
        radius_from(&f, None, lambda)
    } else {
        let mut g = GrowthFrame::new(sys, lambda.conj());
        g.advance_to(b)?;
        radius_from(&f, Some(&g), lambda)
    }
}

pub fn disk_radius(p: &Problem, lambda: Complex64, b: f64) -> Result<f64> {
    p.validate()?;
    disk_radius_sys(p, lambda, b)
}

pub fn weyl_disk(p: &Problem, lambda: Complex64, b: f64) -> Result<WeylDisk> {
    let radius = disk_radius(p, lambda, b)?;
    let center_estimate = m_finite(p, lambda, b, BoundaryParam::Infinity)?;
    Ok(WeylDisk {
        b,
        lambda,
        center_estimate,
        radius,
    })
}

/// `(M, certificate, b)`; on a finite interval the right condition of the
/// system is used and the certificate is 0.
pub fn m_limit_sys<S: System>(sys: &S, lambda: Complex64, tol: f64) -> Result<(S::B, f64, f64)> {
    require_nonreal(lambda)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidProblem("tolerance must be positive".into()));
    }
    if let Some(l) = sys.length() {
        let bc = sys.robin(sys.right_param().unwrap_or(BoundaryParam::Infinity));
        return Ok((m_finite_sys(sys, lambda, l, bc)?, 0.0, l));
    }
    let t = sys.truncation();
    let mut f = GrowthFrame::new(sys, lambda);
    let mut fc = if sys.conj_symmetric() {
        None
    } else {
        Some(GrowthFrame::new(sys, lambda.conj()))
    };
    let mut b = t.b_min;
    loop {
        f.advance_to(b)?;
        if let Some(g) = fc.as_mut() {
            g.advance_to(b)?;
        }
        let r = radius_from(&f, fc.as_ref(), lambda)?;
        if r <= tol {
            let m = m_finite_sys(sys, lambda, b, RightBc::Dirichlet)?;
            return Ok((m, r, b));
        }
        if b >= t.b_max {
            return Err(Error::NoConvergence { b, radius: r });
        }
        b = (b * t.growth).min(t.b_max);
    }
}

/// Limit-point M-function, truncating at geometrically growing `b` until the
/// disk certificate is below `tol`.
pub fn m_limit(p: &Problem, lambda: Complex64, tol: f64) -> Result<MFunctionValue> {
    p.validate()?;
    let (m, disk_radius, b_used) = m_limit_sys(p, lambda, tol)?;
    Ok(MFunctionValue {
        lambda,
        m,
        disk_radius,
        b_used,
    })
}

/// `M_alpha = (eps A + M0)(I - eps A M0)^{-1}`, and `-eps M0^{-1} eps` for the
/// infinite parameter.
pub fn m_transform_alpha(m0: Mat2C, alpha: BoundaryParam) -> Result<Mat2C> {
    let e = Mat2C::eps();
    match alpha.matrix() {
        None => Ok(-(e * mat_inv(m0)? * e)),
        Some(a) => {
            let ea = e * a;
            Ok((ea + m0) * mat_inv(Mat2C::identity() - ea * m0)?)
        }
    }
}

/// Large `lambda` expansion without remainder: three terms through `k^{-2}`
/// for finite `alpha`, `k (i P+ + P-)` for the infinite one. Values below the
/// axis follow from `M(conj lambda) = M(lambda)*`.
pub fn m_asymptotic(alpha: BoundaryParam, lambda: Complex64) -> Mat2C {
    if lambda.im < 0.0 {
        return m_asymptotic(alpha, lambda.conj()).adjoint();
    }
    let k = sqrt_first_quadrant(lambda);
    let i = i_unit();
    let (pp, pm) = (Mat2C::p_plus(), Mat2C::p_minus());
    match alpha.matrix() {
        None => (pp.scale(i) + pm).scale(k),
        Some(a) => {
            let ea = Mat2C::eps() * a;
            let u = pp.scale(i) - pm;
            let w = 1.0 + a.a22.norm_sqr();
            ea + u.scale(w / k) + (u * ea * u).scale(w / (k * k))
        }
    }
}

/// `X = Theta - Phi M` at each `xs`, from a Dirichlet truncation beyond the
/// certified `b` (or the finite interval itself).
pub fn x_solution_grid(p: &Problem, lambda: Complex64, xs: &[f64], tol: f64) -> Result<Vec<Mat2C>> {
    let mv = m_limit(p, lambda, tol)?;
    let xmax = xs.iter().copied().fold(0.0, f64::max);
    let (b, bc) = match p.length {
        Some(l) => (l, p.robin(p.beta.unwrap_or(BoundaryParam::Infinity))),
        None => (mv.b_used + xmax, RightBc::Dirichlet),
    };
    let (y0, _, ys) = backward_profile(p, lambda, b, bc, xs)?;
    let (s, c) = p.left_bc();
    let (_, g) = m_from_frame(s, c, y0)?;
    Ok(ys.into_iter().map(|y| y.f * g).collect())
}

/// `X_b` on `[0, b]` for the Dirichlet truncation: `(M_b, X_b(0), X_b'(0), int X_b* X_b)`.
pub fn x_b_data(p: &Problem, lambda: Complex64, b: f64) -> Result<(Mat2C, Pair<Mat2C>, Mat2C)> {
    let (y, gram) = backward_frame(p, lambda, b, RightBc::Dirichlet)?;
    let (s, c) = p.left_bc();
    let (m, g) = m_from_frame(s, c, y)?;
    Ok((m, y.mul_right(g), g.adjoint() * gram * g))
}

/// Resolvent kernel: `-X(x, lambda) Phi(y, conj lambda)*` for `x >= y`,
/// `-Phi(x, lambda) X(y, conj lambda)*` otherwise.
pub fn resolvent_kernel(p: &Problem, lambda: Complex64, x: f64, y: f64) -> Result<Mat2C> {
    require_nonreal(lambda)?;
    p.validate()?;
    let lc = lambda.conj();
    if x >= y {
        let xv = x_solution_grid(p, lambda, &[x], DEFAULT_TOL)?[0];
        let ph = propagate_grid(p, lc, &[y])?[0].phi;
        Ok(-(xv * ph.adjoint()))
    } else {
        let ph = propagate_grid(p, lambda, &[x])?[0].phi;
        let xv = x_solution_grid(p, lc, &[y], DEFAULT_TOL)?[0];
        Ok(-(ph * xv.adjoint()))
    }
}

/// `Re M(i)`, computed on first use and shared afterwards.
pub struct ReferenceM {
    problem: Problem,
    tol: f64,
    cell: OnceLock<Result<Mat2C>>,
}

impl ReferenceM {
    pub fn new(problem: Problem, tol: f64) -> Self {
        ReferenceM {
            problem,
            tol,
            cell: OnceLock::new(),
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn re_m_i(&self) -> Result<Mat2C> {
        self.cell
            .get_or_init(|| m_limit(&self.problem, i_unit(), self.tol).map(|v| v.m.herm_re()))
            .clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, herglotz_im};
    use crate::model::{Potential, StepPolicy};
    use crate::oracles::free_m;
    use crate::propagator::propagate;
    use proptest::prelude::*;

    fn fin(re: f64, im: f64) -> BoundaryParam {
        BoundaryParam::finite(re, im)
    }

    fn neumann_at_i() -> Mat2C {
        let w = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
        (Mat2C::p_plus().scale(i_unit()) - Mat2C::p_minus()).scale(w)
    }

    #[test]
    fn free_neumann_limit_at_i() {
        let v = m_limit(&Problem::free(fin(0.0, 0.0)), i_unit(), 1e-10).unwrap();
        assert!((v.m - neumann_at_i()).norm() < 1e-7, "{:?}", v.m);
        assert!(v.disk_radius <= 1e-10);
    }

    #[test]
    fn free_limits_match_closed_forms() {
        let lams = [c(0.0, 1.0), c(3.0, 2.0), c(-2.0, 0.5), c(1.0, -1.5)];
        for alpha in [fin(1.0, 1.0), BoundaryParam::Infinity, fin(1.0, 0.0), fin(0.0, 3.0)] {
            for &l in &lams {
                let v = m_limit(&Problem::free(alpha), l, 1e-9).unwrap();
                let d = (v.m - free_m(alpha, l)).norm();
                assert!(d < 1e-6, "{alpha:?} {l}: {d:e}");
            }
        }
    }

    #[test]
    fn near_axis_free_limit() {
        let alpha = fin(1.0, 1.0);
        let l = c(4.0, 0.01);
        let tol = 1e-7;
        let v = m_limit(&Problem::free(alpha), l, tol).unwrap();
        let d = (v.m - free_m(alpha, l)).norm();
        assert!(d < 1e-6, "{d:e} (b = {})", v.b_used);
    }

    #[test]
    fn truncated_matches_forward_quotient() {
        let q = Potential::exp_decay(1.0, 1.0, 1.0);
        let p = Problem::half_line(q, fin(0.5, -0.3));
        let lam = c(1.5, 0.7);
        let b = 3.0;
        let st = propagate(&p, lam, b).unwrap();
        let want = mat_inv(st.phi).unwrap() * st.theta;
        let m = m_finite(&p, lam, b, BoundaryParam::Infinity).unwrap();
        assert!((m - want).norm() < 1e-9 * want.norm());
        // Robin right end: X_b' + B X_b = 0
        let beta = fin(0.7, 0.2);
        let bm = beta.matrix().unwrap();
        let m = m_finite(&p, lam, b, beta).unwrap();
        let x = st.theta - st.phi * m;
        let dx = st.dtheta - st.dphi * m;
        assert!((dx + bm * x).norm() < 1e-9 * (1.0 + st.phi.norm()));
    }

    #[test]
    fn real_eigenvalue_of_truncation_is_singular() {
        // Dirichlet-Dirichlet eigenvalue pi^2 of the free interval [0, 1]
        let p = Problem::free(BoundaryParam::Infinity);
        let lam = c(std::f64::consts::PI.powi(2), 0.0);
        let r = m_finite(&p, lam, 1.0, BoundaryParam::Infinity);
        match r {
            Err(Error::SingularMatrix) => {}
            Ok(m) => assert!(m.norm() > 1e6, "{m:?}"),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn certificate_bounds_true_error() {
        for alpha in [fin(0.0, 0.0), fin(1.0, 1.0), BoundaryParam::Infinity] {
            let p = Problem::free(alpha);
            for (l, b) in [(c(1.0, 0.3), 15.0), (c(-2.0, 0.2), 20.0), (c(0.5, 1.0), 5.0)] {
                let r = disk_radius(&p, l, b).unwrap();
                let m = m_finite(&p, l, b, BoundaryParam::Infinity).unwrap();
                let m2 = m_finite(&p, l, b, fin(0.3, -1.0)).unwrap();
                let exact = free_m(alpha, l);
                assert!((m - exact).norm() <= r * (1.0 + 1e-6) + 1e-9, "{alpha:?} {l} {b}");
                assert!((m2 - exact).norm() <= r * (1.0 + 1e-6) + 1e-9);
            }
        }
    }

    #[test]
    fn radius_decays_exponentially_for_free_case() {
        let p = Problem::free(fin(0.0, 0.0));
        let bs = [2.0, 4.0, 8.0, 16.0];
        let rs: Vec<f64> = bs.iter().map(|&b| disk_radius(&p, i_unit(), b).unwrap()).collect();
        for w in rs.windows(2) {
            assert!(w[1] < w[0]);
        }
        // exp(-2 Im k b) with Im k = 1/sqrt 2
        let rate = (rs[2] / rs[3]).ln() / 8.0;
        assert!((rate - 2.0f64.sqrt()).abs() < 0.05, "{rate}");
    }

    #[test]
    fn radius_monotone_and_shrinks_with_im_lambda() {
        let q = Potential::indicator(0.5, 2.5, c(1.3, -0.8));
        let p = Problem::half_line(q, fin(-0.4, 0.9));
        let mut last = f64::INFINITY;
        for b in [1.0, 2.0, 3.0, 5.0, 8.0, 13.0] {
            let r = disk_radius(&p, c(0.8, 0.4), b).unwrap();
            assert!(r <= last * (1.0 + 1e-9));
            last = r;
            let r2 = disk_radius(&p, c(0.8, 0.8), b).unwrap();
            assert!(r2 < r, "b = {b}: {r2} vs {r}");
        }
    }

    #[test]
    fn constant_imaginary_potential_self_consistent() {
        let p = Problem::half_line(Potential::constant(0.0, 0.3), fin(0.0, 0.0));
        let l = c(0.0, 2.0);
        let r40 = disk_radius(&p, l, 40.0).unwrap();
        let m40 = m_finite(&p, l, 40.0, BoundaryParam::Infinity).unwrap();
        let m80 = m_finite(&p, l, 80.0, BoundaryParam::Infinity).unwrap();
        assert!((m40 - m80).norm() <= r40 + 1e-12);
    }

    #[test]
    fn exp_decay_reference_value() {
        let p = Problem::half_line(Potential::exp_decay(1.0, 1.0, 1.0), fin(0.0, 0.0));
        let v = m_limit(&p, c(1.0, 1.0), 1e-10).unwrap();
        let want = Mat2C::new(
            c(-0.014504532, 0.420512138),
            c(0.482798345, 0.359159373),
            c(0.741858412, 0.059260881),
            c(-0.014504532, 0.420512138),
        );
        assert!((v.m - want).norm() < 1e-6, "{:?}", v.m);
    }

    #[test]
    fn im_m_is_gram_of_x() {
        let q = Potential::exp_decay(0.7, -1.2, 0.5);
        let p = Problem::half_line(q, fin(0.3, 0.4));
        let l = c(2.0, 0.6);
        let (m, _, g) = x_b_data(&p, l, 12.0).unwrap();
        let lhs = herglotz_im(m).scale_re(1.0 / l.im);
        assert!((lhs - g).norm() < 1e-7 * g.norm(), "{lhs:?} {g:?}");
    }

    #[test]
    fn transform_examples() {
        let l = c(0.3, 1.7);
        let m0 = free_m(fin(0.0, 0.0), l);
        assert!((m_transform_alpha(m0, fin(0.0, 0.0)).unwrap() - m0).norm() < 1e-15);
        for alpha in [fin(1.0, 1.0), fin(2.0, 0.0), fin(0.0, -3.0), BoundaryParam::Infinity] {
            let t = m_transform_alpha(m0, alpha).unwrap();
            assert!((t - free_m(alpha, l)).norm() < 1e-12, "{alpha:?}");
        }
    }

    #[test]
    fn transform_commutes_with_limit() {
        let q = Potential::exp_decay(1.0, 0.5, 1.0);
        let l = c(0.5, 1.0);
        let v0 = m_limit(&Problem::half_line(q.clone(), fin(0.0, 0.0)), l, 1e-10).unwrap();
        for alpha in [fin(1.0, -1.0), BoundaryParam::Infinity] {
            let va = m_limit(&Problem::half_line(q.clone(), alpha), l, 1e-10).unwrap();
            let t = m_transform_alpha(v0.m, alpha).unwrap();
            assert!((t - va.m).norm() < 1e-6, "{alpha:?}");
        }
    }

    #[test]
    fn asymptotic_examples() {
        let l = c(-30.0, 40.0);
        let k = sqrt_first_quadrant(l);
        let u = Mat2C::p_plus().scale(i_unit()) - Mat2C::p_minus();
        assert!((m_asymptotic(fin(0.0, 0.0), l) - u.scale(1.0 / k)).norm() < 1e-15);
        let want = (Mat2C::p_plus().scale(i_unit()) + Mat2C::p_minus()).scale(k);
        assert!((m_asymptotic(BoundaryParam::Infinity, l) - want).norm() < 1e-13);
        // terms of the finite-alpha expansion
        let (a, b) = (1.5, -0.5);
        let alpha = fin(a, b);
        let big = c(0.0, 1e12);
        let kb = sqrt_first_quadrant(big);
        let ea = Mat2C::new(c(0.0, 0.0), c(a, b), c(a, -b), c(0.0, 0.0));
        assert!((m_asymptotic(alpha, big) - ea).norm() < 1e-5);
        let w = 1.0 + a * a + b * b;
        let first = (m_asymptotic(alpha, big) - ea) * kb;
        assert!((first - u.scale_re(w)).norm() < 1e-5);
        let coeff = (m_asymptotic(alpha, l) - ea - u.scale(w / k)).scale(k * k / w);
        let want = -Mat2C::real(a, -b, b, a);
        assert!((coeff - want).norm() < 1e-12, "{coeff:?}");
    }

    #[test]
    fn asymptotic_remainder_is_third_order_in_free_case() {
        let alpha = fin(1.0, 1.0);
        let mut scaled = vec![];
        for kk in [10.0f64, 20.0, 40.0, 80.0] {
            let l = c(0.0, kk * kk);
            scaled.push((free_m(alpha, l) - m_asymptotic(alpha, l)).norm() * kk.powi(3));
        }
        for w in scaled.windows(2) {
            let r = w[1] / w[0];
            assert!((0.5..2.0).contains(&r), "{scaled:?}");
        }
    }

    #[test]
    fn resolvent_diagonal_symmetry_and_decay() {
        let q = Potential::exp_decay(1.0, 1.0, 1.0);
        let p = Problem::half_line(q, fin(0.5, 0.0));
        let l = c(1.0, 2.0);
        let a = 0.7;
        let xa = x_solution_grid(&p, l, &[a], 1e-10).unwrap()[0];
        let xc = x_solution_grid(&p, l.conj(), &[a], 1e-10).unwrap()[0];
        let pa = propagate_grid(&p, l, &[a]).unwrap()[0].phi;
        let pc = propagate_grid(&p, l.conj(), &[a]).unwrap()[0].phi;
        assert!((xa * pc.adjoint() - pa * xc.adjoint()).norm() < 1e-8);
        let r_hi = resolvent_kernel(&p, l, a + 1e-9, a).unwrap();
        let r_lo = resolvent_kernel(&p, l, a, a + 1e-9).unwrap();
        assert!((r_hi - r_lo).norm() < 1e-7);
        let l0 = Complex64::from_polar(1.0, 1.0);
        let norms: Vec<f64> = [4.0, 16.0, 64.0, 256.0]
            .iter()
            .map(|&r| resolvent_kernel(&p, l0 * r, a, a).unwrap().norm())
            .collect();
        // |R(a, a)| ~ |lambda|^{-1/2}
        for w in norms.windows(2) {
            assert!((0.4..0.65).contains(&(w[1] / w[0])), "{norms:?}");
        }
    }

    #[test]
    fn reference_is_computed_once() {
        let r = ReferenceM::new(Problem::free(fin(0.0, 0.0)), 1e-10);
        let a = r.re_m_i().unwrap();
        let b = r.re_m_i().unwrap();
        assert_eq!(a, b);
        assert!((a - neumann_at_i().herm_re()).norm() < 1e-7);
    }

    #[test]
    fn non_real_lambda_required() {
        let p = Problem::free(fin(0.0, 0.0));
        assert!(m_limit(&p, c(1.0, 0.0), 1e-8).is_err());
        assert!(disk_radius(&p, c(1.0, 0.0), 3.0).is_err());
        assert!(m_limit(&p, c(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn slow_convergence_is_reported() {
        let p = Problem::free(fin(0.0, 0.0)).with_truncation(crate::model::Truncation {
            b_min: 5.0,
            b_max: 20.0,
            growth: 2.0,
        });
        match m_limit(&p, c(4.0, 1e-3), 1e-10) {
            Err(Error::NoConvergence { b, radius }) => assert!(b == 20.0 && radius > 1e-10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn finite_interval_limit_uses_right_condition() {
        let p = Problem::interval(Potential::constant(0.2, 0.1), fin(1.0, 0.0), 4.0, fin(0.0, 1.0));
        let v = m_limit(&p, c(1.0, 1.0), 1e-8).unwrap();
        assert_eq!(v.disk_radius, 0.0);
        assert_eq!(v.b_used, 4.0);
        let m = m_finite(&p, c(1.0, 1.0), 4.0, fin(0.0, 1.0)).unwrap();
        assert!((v.m - m).norm() < 1e-14);
    }

    #[test]
    fn fine_step_converges() {
        let q = Potential::exp_decay(1.0, 1.0, 1.0);
        let l = c(1.0, 1.0);
        let p = Problem::half_line(q, fin(0.0, 0.0));
        let a = m_limit(&p, l, 1e-10).unwrap().m;
        let b = m_limit(&p.clone().with_step(StepPolicy::default().refined(2.0)), l, 1e-10)
            .unwrap()
            .m;
        assert!((a - b).norm() < 1e-7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn herglotz_and_symmetries(
            re in -5.0f64..5.0, im in 0.2f64..4.0,
            qr in -1.0f64..1.0, qi in -1.0f64..1.0,
            ar in -2.0f64..2.0, dirichlet in proptest::bool::ANY,
        ) {
            let alpha = if dirichlet { BoundaryParam::Infinity } else { fin(ar, 0.0) };
            let p = Problem::half_line(Potential::exp_decay(qr, qi, 1.0), alpha);
            let l = c(re, im);
            let v = m_limit(&p, l, 1e-9).unwrap();
            let (lo, _) = herglotz_im(v.m).eig_hermitian();
            prop_assert!(lo > 0.0);
            let vc = m_limit(&p, l.conj(), 1e-9).unwrap();
            prop_assert!((vc.m - v.m.adjoint()).norm() <= 2.0 * (v.disk_radius + vc.disk_radius) + 1e-7);
            let e = Mat2C::eps();
            prop_assert!((v.m - e * v.m.transpose() * e).norm() < 1e-7 * (1.0 + v.m.norm()));
            let xi = Mat2C::xi();
            let vm = m_limit(&p, -l, 1e-9).unwrap();
            prop_assert!((v.m + xi * vm.m * xi).norm() < 1e-7 * (1.0 + v.m.norm()));
        }
    }
}
