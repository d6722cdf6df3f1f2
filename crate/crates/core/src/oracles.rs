//! Closed forms for the free operator and the scalar m-function of a real
//! potential, used as references for the matrix pipeline.

use num_complex::Complex64;

use crate::linalg::{i_unit, sqrt_first_quadrant, BoundaryParam, Mat2C};
use crate::model::{Potential, Problem, StepPolicy, Truncation};
use crate::propagator::{RightBc, System};
use crate::spectral::{richardson, M_TOL, Atom, SampleFlag, SpectralSample};
use crate::weyl::{m_limit_sys, DEFAULT_TOL};
use crate::{Error, Result};

/// `alpha` with the two roots `k+-` of the denominator of the free M-function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeCaseParams {
    pub alpha: BoundaryParam,
    pub k_plus: Option<Complex64>,
    pub k_minus: Option<Complex64>,
}

impl FreeCaseParams {
    pub fn new(alpha: BoundaryParam) -> Self {
        match alpha {
            BoundaryParam::Finite(a) if a != Complex64::new(0.0, 0.0) => {
                let w = Complex64::new(0.5, 0.5);
                let r = (a.re * a.re + 2.0 * a.im * a.im).sqrt();
                FreeCaseParams {
                    alpha,
                    k_plus: Some(w * Complex64::new(a.re, r)),
                    k_minus: Some(w * Complex64::new(a.re, -r)),
                }
            }
            _ => FreeCaseParams {
                alpha,
                k_plus: None,
                k_minus: None,
            },
        }
    }
}

/// M-function of `q = 0`.
pub fn free_m(alpha: BoundaryParam, lambda: Complex64) -> Mat2C {
    if lambda.im < 0.0 {
        return free_m(alpha, lambda.conj()).adjoint();
    }
    let k = sqrt_first_quadrant(lambda);
    let i = i_unit();
    let (pp, pm) = (Mat2C::p_plus(), Mat2C::p_minus());
    let a = match alpha.matrix() {
        None => return (pp.scale(i) + pm).scale(k),
        Some(a) => a,
    };
    let fp = FreeCaseParams::new(alpha);
    let den = match (fp.k_plus, fp.k_minus) {
        (Some(kp), Some(km)) => (k - kp) * (k - km),
        _ => k * k,
    };
    let u = pp + pm.scale(i);
    let inner = Mat2C::identity().scale(k * k) - (u * a).scale(k) - Mat2C::identity().scale(i);
    (Mat2C::eps() * a * inner + u.scale(i * k)).scale(1.0 / den)
}

/// Spectral pair of `q = 0` at `lambda > 0`, with the atom when `lambda` is
/// the eigenvalue `alpha^2` of a positive real `alpha`.
pub fn free_pair(alpha: BoundaryParam, lambda: f64) -> (SpectralSample, Option<Atom>) {
    let sq = lambda.sqrt();
    let (nu, psi) = match alpha {
        BoundaryParam::Infinity => (sq / (2.0 * std::f64::consts::PI), Complex64::new(1.0, 0.0)),
        BoundaryParam::Finite(a) => {
            let a2 = a.norm_sqr();
            let num = (1.0 + a2) * sq * (sq - a).norm_sqr();
            let den = (sq * a.re - a2).powi(2) + lambda * (sq - a.re).powi(2);
            let nu = num / (2.0 * std::f64::consts::PI * den);
            (nu, (sq - a) / (sq - a.conj()))
        }
    };
    let atom = match alpha {
        BoundaryParam::Finite(a) if a.im == 0.0 && a.re > 0.0 => {
            let e = a.re * a.re;
            ((lambda - e).abs() <= 1e-12 * e).then(|| Atom {
                location: e,
                nu_mass: a.re * (1.0 + e),
                psi_value: Complex64::new(-1.0, 0.0),
            })
        }
        _ => None,
    };
    (
        SpectralSample {
            s: lambda,
            nu_density: nu,
            psi,
            err_est: 0.0,
            flag: SampleFlag::Ok,
        },
        atom,
    )
}

/// `-f'' + q f = lambda f` with real `q`, `f(0) = sin g`, `f'(0) = -cos g`,
/// where `sin g = 1/sqrt(1 + alpha^2)`, `cos g = alpha/sqrt(1 + alpha^2)`.
#[derive(Clone, Debug)]
pub struct ScalarProblem {
    pub potential: Potential,
    pub alpha: BoundaryParam,
    pub beta: Option<BoundaryParam>,
    pub length: Option<f64>,
    pub truncation: Truncation,
    pub step: StepPolicy,
}

impl ScalarProblem {
    pub fn new(potential: Potential, alpha: BoundaryParam) -> Result<Self> {
        let p = ScalarProblem {
            potential,
            alpha,
            beta: None,
            length: None,
            truncation: Truncation::default(),
            step: StepPolicy::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// The scalar counterpart of a matrix problem with real data.
    pub fn from_problem(p: &Problem) -> Result<Self> {
        let s = ScalarProblem {
            potential: p.potential.clone(),
            alpha: p.alpha,
            beta: p.beta,
            length: p.length,
            truncation: p.truncation,
            step: p.step,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        self.potential.validate()?;
        if !self.potential.is_real() {
            return Err(Error::InvalidProblem("scalar oracle needs a real potential".into()));
        }
        for b in std::iter::once(self.alpha).chain(self.beta) {
            if let BoundaryParam::Finite(a) = b {
                if a.im != 0.0 {
                    return Err(Error::InvalidProblem("scalar oracle needs real boundary parameters".into()));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self, lambda: Complex64, tol: f64) -> Result<Complex64> {
        Ok(m_limit_sys(self, lambda, tol)?.0)
    }
}

impl System for ScalarProblem {
    type B = Complex64;
    fn coeff(&self, x: f64) -> Complex64 {
        self.potential.scalar_at(x).unwrap_or_default()
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.potential.breakpoints()
    }
    fn left_bc(&self) -> (Complex64, Complex64) {
        match self.alpha {
            BoundaryParam::Infinity => (0.0.into(), 1.0.into()),
            BoundaryParam::Finite(a) => {
                let w = 1.0 / (1.0 + a.re * a.re).sqrt();
                (w.into(), (a.re * w).into())
            }
        }
    }
    fn robin(&self, beta: BoundaryParam) -> RightBc<Complex64> {
        match beta {
            BoundaryParam::Finite(b) => RightBc::Robin(b),
            BoundaryParam::Infinity => RightBc::Dirichlet,
        }
    }
    fn length(&self) -> Option<f64> {
        self.length
    }
    fn right_param(&self) -> Option<BoundaryParam> {
        self.beta
    }
    fn step_policy(&self) -> StepPolicy {
        self.step
    }
    fn truncation(&self) -> Truncation {
        self.truncation
    }
    fn conj_symmetric(&self) -> bool {
        true
    }
}

/// Scalar Titchmarsh-Weyl m-function of a real potential.
pub fn scalar_m(q_real: &Potential, alpha: BoundaryParam, lambda: Complex64) -> Result<Complex64> {
    ScalarProblem::new(q_real.clone(), alpha)?.m(lambda, DEFAULT_TOL)
}

/// Density of the scalar spectral measure, `(1/pi) Im m(lambda + i eps)`
/// extrapolated to `eps -> 0` along `eps_seq`; returns `(density, err_est)`.
pub fn scalar_sigma_density(
    q_real: &Potential,
    alpha: BoundaryParam,
    lambda: f64,
    eps_seq: &[f64],
) -> Result<(f64, f64)> {
    let sp = ScalarProblem::new(q_real.clone(), alpha)?;
    scalar_sigma_density_of(&sp, lambda, eps_seq)
}

pub fn scalar_sigma_density_of(sp: &ScalarProblem, lambda: f64, eps_seq: &[f64]) -> Result<(f64, f64)> {
    let (d, err) = richardson(eps_seq, |e| {
        let m = sp.m(Complex64::new(lambda, e), M_TOL)?;
        Ok(m.im / std::f64::consts::PI)
    })?;
    Ok((d, err))
}
