//! Potentials, boundary data and truncation policy of a problem.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::linalg::{BoundaryParam, Mat2C};
use crate::Error;

/// Piece of a step potential: `value` on `[lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub value: Complex64,
}

pub type HermitianFn = Arc<dyn Fn(f64) -> Mat2C + Send + Sync>;

#[derive(Clone)]
pub enum Potential {
    Zero,
    Constant(Complex64),
    /// Zero outside the listed segments.
    Step(Vec<Segment>),
    /// `amplitude * exp(-rate x)`
    ExpDecay { amplitude: Complex64, rate: f64 },
    /// Piecewise linear through `(x, q)` samples, held constant outside.
    Table(Vec<(f64, Complex64)>),
    Sum(Vec<Potential>),
    /// A bounded Hermitian matrix potential not of the hermitised form.
    GeneralHermitian {
        q: HermitianFn,
        bound: f64,
        breakpoints: Vec<f64>,
    },
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Constant(c) => write!(f, "Constant({c})"),
            Potential::Step(s) => write!(f, "Step({s:?})"),
            Potential::ExpDecay { amplitude, rate } => {
                write!(f, "ExpDecay({amplitude}, {rate})")
            }
            Potential::Table(t) => write!(f, "Table({} samples)", t.len()),
            Potential::Sum(t) => write!(f, "Sum({t:?})"),
            Potential::GeneralHermitian { bound, .. } => write!(f, "GeneralHermitian(|Q|<={bound})"),
        }
    }
}

fn hermitian_of(q: Complex64) -> Mat2C {
    Mat2C::new(Complex64::new(0.0, 0.0), q, q.conj(), Complex64::new(0.0, 0.0))
}

impl Potential {
    pub fn constant(re: f64, im: f64) -> Self {
        Potential::Constant(Complex64::new(re, im))
    }

    pub fn exp_decay(re: f64, im: f64, rate: f64) -> Self {
        Potential::ExpDecay {
            amplitude: Complex64::new(re, im),
            rate,
        }
    }

    /// Indicator of `[lo, hi)` times `value`.
    pub fn indicator(lo: f64, hi: f64, value: Complex64) -> Self {
        Potential::Step(vec![Segment { lo, hi, value }])
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, Potential::GeneralHermitian { .. })
            && match self {
                Potential::Sum(t) => t.iter().all(|p| p.is_scalar()),
                _ => true,
            }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Constant(c) => *c == Complex64::new(0.0, 0.0),
            Potential::Sum(t) => t.iter().all(|p| p.is_zero()),
            _ => false,
        }
    }

    /// Scalar value `q(x)`, `None` for general Hermitian potentials.
    pub fn scalar_at(&self, x: f64) -> Option<Complex64> {
        Some(match self {
            Potential::Zero => Complex64::new(0.0, 0.0),
            Potential::Constant(c) => *c,
            Potential::Step(segs) => segs
                .iter()
                .find(|s| x >= s.lo && x < s.hi)
                .map(|s| s.value)
                .unwrap_or_default(),
            Potential::ExpDecay { amplitude, rate } => *amplitude * (-rate * x).exp(),
            Potential::Table(t) => table_interp(t, x),
            Potential::Sum(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for p in terms {
                    acc += p.scalar_at(x)?;
                }
                acc
            }
            Potential::GeneralHermitian { .. } => return None,
        })
    }

    /// The Hermitian matrix potential at `x` (no domain check).
    pub fn matrix_at(&self, x: f64) -> Mat2C {
        match self {
            Potential::GeneralHermitian { q, .. } => q(x),
            Potential::Sum(terms) if !self.is_scalar() => {
                terms.iter().fold(Mat2C::zero(), |acc, p| acc + p.matrix_at(x))
            }
            _ => hermitian_of(self.scalar_at(x).unwrap_or_default()),
        }
    }

    /// Declared bound on the Frobenius norm of `Q(x)`.
    pub fn sup_norm(&self) -> f64 {
        let r2 = std::f64::consts::SQRT_2;
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(c) => r2 * c.norm(),
            Potential::Step(s) => r2 * s.iter().map(|s| s.value.norm()).fold(0.0, f64::max),
            Potential::ExpDecay { amplitude, .. } => r2 * amplitude.norm(),
            Potential::Table(t) => r2 * t.iter().map(|s| s.1.norm()).fold(0.0, f64::max),
            Potential::Sum(terms) => terms.iter().map(|p| p.sup_norm()).sum(),
            Potential::GeneralHermitian { bound, .. } => *bound,
        }
    }

    /// Points where the potential may jump or kink; grids are snapped to these.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = match self {
            Potential::Step(segs) => segs.iter().flat_map(|s| [s.lo, s.hi]).collect(),
            Potential::Table(t) => t.iter().map(|s| s.0).collect(),
            Potential::Sum(terms) => terms.iter().flat_map(|p| p.breakpoints()).collect(),
            Potential::GeneralHermitian { breakpoints, .. } => breakpoints.clone(),
            _ => Vec::new(),
        };
        v.retain(|x| x.is_finite() && *x > 0.0);
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }

    /// True when `q` is real valued.
    pub fn is_real(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Constant(c) => c.im == 0.0,
            Potential::Step(s) => s.iter().all(|s| s.value.im == 0.0),
            Potential::ExpDecay { amplitude, .. } => amplitude.im == 0.0,
            Potential::Table(t) => t.iter().all(|s| s.1.im == 0.0),
            Potential::Sum(terms) => terms.iter().all(|p| p.is_real()),
            Potential::GeneralHermitian { .. } => false,
        }
    }

    /// The potential `conj(q)`; `None` for general Hermitian potentials.
    pub fn conj(&self) -> Option<Potential> {
        Some(match self {
            Potential::Zero => Potential::Zero,
            Potential::Constant(c) => Potential::Constant(c.conj()),
            Potential::Step(s) => Potential::Step(
                s.iter()
                    .map(|s| Segment {
                        value: s.value.conj(),
                        ..*s
                    })
                    .collect(),
            ),
            Potential::ExpDecay { amplitude, rate } => Potential::ExpDecay {
                amplitude: amplitude.conj(),
                rate: *rate,
            },
            Potential::Table(t) => Potential::Table(t.iter().map(|(x, q)| (*x, q.conj())).collect()),
            Potential::Sum(terms) => {
                Potential::Sum(terms.iter().map(|p| p.conj()).collect::<Option<Vec<_>>>()?)
            }
            Potential::GeneralHermitian { .. } => return None,
        })
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            Potential::Step(segs) => {
                for s in segs {
                    if !(s.lo >= 0.0 && s.hi > s.lo) {
                        return Err(Error::InvalidProblem(format!("bad step segment {s:?}")));
                    }
                }
                for w in segs.windows(2) {
                    if w[1].lo < w[0].hi {
                        return Err(Error::InvalidProblem(
                            "step segments must be disjoint and ordered".into(),
                        ));
                    }
                }
            }
            Potential::Table(t) => {
                if t.is_empty() {
                    return Err(Error::InvalidProblem("empty table".into()));
                }
                if t.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::InvalidProblem(
                        "table abscissae must be strictly increasing".into(),
                    ));
                }
            }
            Potential::ExpDecay { rate, .. } if !(*rate > 0.0) => {
                return Err(Error::InvalidProblem("exp_decay rate must be positive".into()));
            }
            Potential::Sum(terms) => {
                for p in terms {
                    p.validate()?;
                }
            }
            Potential::GeneralHermitian { bound, .. } if !bound.is_finite() => {
                return Err(Error::InvalidProblem("unbounded Hermitian potential".into()));
            }
            _ => {}
        }
        Ok(())
    }
}

fn table_interp(t: &[(f64, Complex64)], x: f64) -> Complex64 {
    let n = t.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if x <= t[0].0 {
        return t[0].1;
    }
    if x >= t[n - 1].0 {
        return t[n - 1].1;
    }
    let j = t.partition_point(|s| s.0 <= x);
    let (x0, q0) = t[j - 1];
    let (x1, q1) = t[j];
    let w = (x - x0) / (x1 - x0);
    q0 * (1.0 - w) + q1 * w
}

/// Hermitised form `[[0, q], [conj q, 0]]` of a scalar potential.
pub fn hermitise(p: &Potential) -> Result<Potential, Error> {
    if !p.is_scalar() {
        return Err(Error::InvalidProblem("potential is already a matrix".into()));
    }
    let bound = p.sup_norm();
    let breakpoints = p.breakpoints();
    let inner = p.clone();
    Ok(Potential::GeneralHermitian {
        q: Arc::new(move |x| hermitian_of(inner.scalar_at(x).unwrap_or_default())),
        bound,
        breakpoints,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub b_min: f64,
    pub b_max: f64,
    pub growth: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            b_min: 10.0,
            b_max: 2.0e5,
            growth: 1.6,
        }
    }
}

/// RK4 step `h = min(h_max, c / (1 + sqrt|lambda|))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPolicy {
    pub h_max: f64,
    pub c: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy { h_max: 1e-2, c: 0.1 }
    }
}

impl StepPolicy {
    pub fn step(&self, lambda: Complex64) -> f64 {
        self.h_max.min(self.c / (1.0 + lambda.norm().sqrt()))
    }

    pub fn refined(self, factor: f64) -> Self {
        StepPolicy {
            h_max: self.h_max / factor,
            c: self.c / factor,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub potential: Potential,
    pub alpha: BoundaryParam,
    /// Right boundary parameter on a finite interval.
    pub beta: Option<BoundaryParam>,
    /// Interval length, `None` for the half-line.
    pub length: Option<f64>,
    pub truncation: Truncation,
    pub step: StepPolicy,
}

impl Problem {
    pub fn half_line(potential: Potential, alpha: BoundaryParam) -> Self {
        Problem {
            potential,
            alpha,
            beta: None,
            length: None,
            truncation: Truncation::default(),
            step: StepPolicy::default(),
        }
    }

    pub fn interval(potential: Potential, alpha: BoundaryParam, length: f64, beta: BoundaryParam) -> Self {
        Problem {
            beta: Some(beta),
            length: Some(length),
            ..Problem::half_line(potential, alpha)
        }
    }

    pub fn free(alpha: BoundaryParam) -> Self {
        Problem::half_line(Potential::Zero, alpha)
    }

    pub fn with_step(mut self, step: StepPolicy) -> Self {
        self.step = step;
        self
    }

    pub fn with_truncation(mut self, t: Truncation) -> Self {
        self.truncation = t;
        self
    }

    /// The problem `(conj q, conj alpha)`.
    pub fn adjoint(&self) -> Option<Problem> {
        Some(Problem {
            potential: self.potential.conj()?,
            alpha: self.alpha.conj(),
            beta: self.beta.map(|b| b.conj()),
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.potential.validate()?;
        let t = &self.truncation;
        if !(t.b_min > 0.0 && t.b_min < t.b_max && t.growth > 1.0) {
            return Err(Error::InvalidProblem(format!("bad truncation policy {t:?}")));
        }
        if !(self.step.h_max > 0.0 && self.step.c > 0.0) {
            return Err(Error::InvalidProblem("step policy must be positive".into()));
        }
        match (self.length, self.beta) {
            (Some(l), Some(_)) if l > 0.0 && l.is_finite() => {}
            (None, None) => {}
            _ => {
                return Err(Error::InvalidProblem(
                    "a right boundary parameter is required exactly for finite intervals".into(),
                ))
            }
        }
        if let BoundaryParam::Finite(a) = self.alpha {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidProblem("alpha must be finite or 'inf'".into()));
            }
        }
        Ok(())
    }

    /// `Q(x)`, checked against the domain.
    pub fn eval_q(&self, x: f64) -> Result<Mat2C, Error> {
        eval_q(self, x)
    }
}

pub fn eval_q(p: &Problem, x: f64) -> Result<Mat2C, Error> {
    let inside = x >= 0.0 && x.is_finite() && p.length.map_or(true, |l| x <= l);
    if !inside {
        return Err(Error::OutOfDomain(x));
    }
    Ok(p.potential.matrix_at(x))
}
