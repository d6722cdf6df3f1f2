//! RK4 propagation of the fundamental system `Phi`, `Theta` of
//! `-eps F'' + Q F = lambda F`, stabilised frames for long intervals, and the
//! Gronwall bounds for the Volterra form of the equation.

use num_complex::Complex64;

use crate::linalg::{boundary_matrices, Block, BoundaryParam, Mat2C};
use crate::model::{Problem, StepPolicy, Truncation};
use crate::{Error, Result};

/// A block solution together with its derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pair<B> {
    pub f: B,
    pub df: B,
}

impl<B: Block> Pair<B> {
    pub fn new(f: B, df: B) -> Self {
        Pair { f, df }
    }

    pub fn mul_right(self, r: B) -> Self {
        Pair::new(self.f * r, self.df * r)
    }

    pub fn scale_re(self, s: f64) -> Self {
        Pair::new(self.f.scale_re(s), self.df.scale_re(s))
    }

    /// `f* f + df* df`
    pub fn gram(self) -> B {
        self.f.adjoint() * self.f + self.df.adjoint() * self.df
    }
}

/// Right end condition on a truncated or finite interval: `F(b) = 0`, or
/// `F'(b) + B F(b) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RightBc<B> {
    Dirichlet,
    Robin(B),
}

/// A second order system `-metric F'' + coeff(x) F = lambda F` on `[0, L]` or
/// the half-line, with left data `(S, C)`.
pub trait System: Sync {
    type B: Block;
    fn coeff(&self, x: f64) -> Self::B;
    fn breakpoints(&self) -> Vec<f64>;
    fn left_bc(&self) -> (Self::B, Self::B);
    fn robin(&self, beta: BoundaryParam) -> RightBc<Self::B>;
    fn length(&self) -> Option<f64>;
    fn right_param(&self) -> Option<BoundaryParam>;
    fn step_policy(&self) -> StepPolicy;
    fn truncation(&self) -> Truncation;
    /// True when the solutions at `conj lambda` are unitarily equivalent to the
    /// conjugated solutions at `lambda`.
    fn conj_symmetric(&self) -> bool;
}

impl System for Problem {
    type B = Mat2C;
    fn coeff(&self, x: f64) -> Mat2C {
        self.potential.matrix_at(x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.potential.breakpoints()
    }
    fn left_bc(&self) -> (Mat2C, Mat2C) {
        let (s, c, _) = boundary_matrices(self.alpha);
        (s, c)
    }
    fn robin(&self, beta: BoundaryParam) -> RightBc<Mat2C> {
        match beta.matrix() {
            Some(b) => RightBc::Robin(b),
            None => RightBc::Dirichlet,
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
        self.potential.is_scalar()
    }
}

#[inline(always)]
fn kmat<S: System>(sys: &S, x: f64, lambda: Complex64) -> S::B {
    let m = S::B::metric();
    m * sys.coeff(x) - m.scale(lambda)
}

#[inline(always)]
fn rk4_pair<B: Block>(p: Pair<B>, k0: B, kh: B, k1: B, h: f64) -> Pair<B> {
    let (f, g) = (p.f, p.df);
    let hh = 0.5 * h;
    let a1 = k0 * f;
    let f2 = f + g.scale_re(hh);
    let g2 = g + a1.scale_re(hh);
    let a2 = kh * f2;
    let f3 = f + g2.scale_re(hh);
    let g3 = g + a2.scale_re(hh);
    let a3 = kh * f3;
    let f4 = f + g3.scale_re(h);
    let g4 = g + a3.scale_re(h);
    let a4 = k1 * f4;
    let s = h / 6.0;
    Pair {
        f: f + (g + (g2 + g3).scale_re(2.0) + g4).scale_re(s),
        df: g + (a1 + (a2 + a3).scale_re(2.0) + a4).scale_re(s),
    }
}

/// Simpson increment of `int f* f` over a step, midpoint by cubic Hermite.
#[inline(always)]
fn simpson_gram<B: Block>(a: Pair<B>, b: Pair<B>, h: f64) -> B {
    let fm = (a.f + b.f).scale_re(0.5) + (a.df - b.df).scale_re(h / 8.0);
    (a.f.adjoint() * a.f + (fm.adjoint() * fm).scale_re(4.0) + b.f.adjoint() * b.f)
        .scale_re(h.abs() / 6.0)
}

/// Integration knots from `x0` to `x1` (either direction) including the
/// breakpoints strictly between them.
fn knots(bps: &[f64], x0: f64, x1: f64) -> Vec<f64> {
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    let mut v = vec![x0];
    let inner: Vec<f64> = bps.iter().copied().filter(|&b| b > lo && b < hi).collect();
    if x0 < x1 {
        v.extend(inner);
    } else {
        v.extend(inner.into_iter().rev());
    }
    v.push(x1);
    v
}

/// Drives RK4 over `[x0, x1]` calling `step(h, k0, kh, k1)` for each step,
/// with coefficients evaluated one-sidedly inside each step.
fn drive<S: System, F: FnMut(f64, S::B, S::B, S::B)>(
    sys: &S,
    lambda: Complex64,
    x0: f64,
    x1: f64,
    h: f64,
    mut step: F,
) {
    if x0 == x1 {
        return;
    }
    let bps = sys.breakpoints();
    let ks = knots(&bps, x0, x1);
    for w in ks.windows(2) {
        let len = w[1] - w[0];
        let n = ((len.abs() / h).ceil() as usize).max(1);
        let dx = len / n as f64;
        let nudge = 1e-13 * (1.0 + w[0].abs().max(w[1].abs())) * dx.signum();
        let mut k0 = kmat(sys, w[0] + nudge, lambda);
        for i in 0..n {
            let xa = w[0] + i as f64 * dx;
            let xb = if i + 1 == n { w[1] } else { w[0] + (i + 1) as f64 * dx };
            let hs = xb - xa;
            let kh = kmat(sys, xa + 0.5 * hs, lambda);
            let k1 = kmat(sys, xb - nudge, lambda);
            step(hs, k0, kh, k1);
            k0 = k1;
        }
    }
}

fn step_for<S: System>(sys: &S, lambda: Complex64) -> f64 {
    sys.step_policy().step(lambda)
}

/// `(Phi, Theta)` at `x = 0`.
pub fn initial_pairs<S: System>(sys: &S) -> (Pair<S::B>, Pair<S::B>) {
    let (s, c) = sys.left_bc();
    let m = S::B::metric();
    (Pair::new(s, -(m * c)), Pair::new(c, m * s))
}

/// Cauchy data of the fundamental system at `x`; the stored blocks equal the
/// true ones times `exp(-log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalState {
    pub x: f64,
    pub lambda: Complex64,
    pub phi: Mat2C,
    pub dphi: Mat2C,
    pub theta: Mat2C,
    pub dtheta: Mat2C,
    pub log_scale: f64,
}

impl FundamentalState {
    fn from_pairs(x: f64, lambda: Complex64, p: Pair<Mat2C>, t: Pair<Mat2C>, log_scale: f64) -> Self {
        FundamentalState {
            x,
            lambda,
            phi: p.f,
            dphi: p.df,
            theta: t.f,
            dtheta: t.df,
            log_scale,
        }
    }

    /// The blocks without the scale factor (may overflow for large growth).
    pub fn unscaled(&self) -> (Mat2C, Mat2C, Mat2C, Mat2C) {
        let s = self.log_scale.exp();
        (
            self.phi.scale_re(s),
            self.dphi.scale_re(s),
            self.theta.scale_re(s),
            self.dtheta.scale_re(s),
        )
    }
}

/// Fundamental system at `x = 0` for the boundary parameter `alpha`.
pub fn initial_state(alpha: BoundaryParam, lambda: Complex64) -> FundamentalState {
    let (s, c, _) = boundary_matrices(alpha);
    let e = Mat2C::eps();
    FundamentalState {
        x: 0.0,
        lambda,
        phi: s,
        dphi: -(e * c),
        theta: c,
        dtheta: e * s,
        log_scale: 0.0,
    }
}

const RESCALE_AT: f64 = 1e60;

/// Propagates block solutions from 0 to `x`, returning them with a common
/// log-scale factor.
pub fn propagate_pairs<S: System, const N: usize>(
    sys: &S,
    lambda: Complex64,
    init: [Pair<S::B>; N],
    x: f64,
) -> Result<([Pair<S::B>; N], f64)> {
    check_domain(sys, x)?;
    let h = step_for(sys, lambda);
    let mut y = init;
    let mut log_scale = 0.0;
    let mut bad = None;
    let mut pos = 0.0;
    drive(sys, lambda, 0.0, x, h, |hs, k0, kh, k1| {
        for p in y.iter_mut() {
            *p = rk4_pair(*p, k0, kh, k1, hs);
        }
        pos += hs;
        let n = y.iter().map(|p| p.f.norm().max(p.df.norm())).fold(0.0, f64::max);
        if !n.is_finite() {
            bad.get_or_insert(pos);
        } else if n > RESCALE_AT {
            for p in y.iter_mut() {
                *p = p.scale_re(1.0 / n);
            }
            log_scale += n.ln();
        }
    });
    if let Some(at) = bad {
        return Err(Error::StepUnderflow(at));
    }
    Ok((y, log_scale))
}

fn check_domain<S: System>(sys: &S, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) || sys.length().map_or(false, |l| x > l * (1.0 + 1e-14)) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(())
}

/// `Phi, Phi', Theta, Theta'` at `x_target`.
pub fn propagate(p: &Problem, lambda: Complex64, x_target: f64) -> Result<FundamentalState> {
    let (ph, th) = initial_pairs(p);
    let ([ph, th], s) = propagate_pairs(p, lambda, [ph, th], x_target)?;
    Ok(FundamentalState::from_pairs(x_target, lambda, ph, th, s))
}

/// Fundamental system at each of the increasing points `xs`, unscaled.
pub fn propagate_grid(p: &Problem, lambda: Complex64, xs: &[f64]) -> Result<Vec<FundamentalState>> {
    let h = step_for(p, lambda);
    let (mut ph, mut th) = initial_pairs(p);
    let mut out = Vec::with_capacity(xs.len());
    let mut at = 0.0;
    for &x in xs {
        check_domain(p, x)?;
        if x < at {
            return Err(Error::InvalidProblem("grid must be increasing".into()));
        }
        drive(p, lambda, at, x, h, |hs, k0, kh, k1| {
            ph = rk4_pair(ph, k0, kh, k1, hs);
            th = rk4_pair(th, k0, kh, k1, hs);
        });
        at = x;
        out.push(FundamentalState::from_pairs(x, lambda, ph, th, 0.0));
    }
    Ok(out)
}

/// `[U, V] = U eps V' - U' eps V` for `U` given by its adjoint pair.
pub fn bracket<B: Block>(u: Pair<B>, v: Pair<B>) -> B {
    let m = B::metric();
    u.f * m * v.df - u.df * m * v.f
}

pub fn adjoint_pair<B: Block>(p: Pair<B>) -> Pair<B> {
    Pair::new(p.f.adjoint(), p.df.adjoint())
}

/// Forward frame spanning the columns of `Phi`, kept orthonormal by
/// triangular renormalisation, with `int Phi* Phi` carried in frame
/// coordinates.
///
/// `Phi = W U` with `U^{-1} = exp(-log_s) V`, and `int_0^x Phi* Phi = U* G U`.
pub struct GrowthFrame<'a, S: System> {
    sys: &'a S,
    lambda: Complex64,
    h: f64,
    x: f64,
    w: Pair<S::B>,
    g: S::B,
    v: S::B,
    log_s: f64,
}

const RENORM_EVERY: usize = 8;

impl<'a, S: System> GrowthFrame<'a, S> {
    pub fn new(sys: &'a S, lambda: Complex64) -> Self {
        let (ph, _) = initial_pairs(sys);
        GrowthFrame {
            sys,
            lambda,
            h: step_for(sys, lambda),
            x: 0.0,
            w: ph,
            g: S::B::zero(),
            v: S::B::identity(),
            log_s: 0.0,
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    fn renormalise(&mut self) -> Result<()> {
        let r = self.w.gram().cholesky_upper().ok_or(Error::StepUnderflow(self.x))?;
        let ri = r.inverse()?;
        self.w = self.w.mul_right(ri);
        self.g = ri.adjoint() * self.g * ri;
        self.v = self.v * ri;
        let n = self.v.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::StepUnderflow(self.x));
        }
        self.v = self.v.scale_re(1.0 / n);
        self.log_s -= n.ln();
        Ok(())
    }

    pub fn advance_to(&mut self, x1: f64) -> Result<()> {
        check_domain(self.sys, x1)?;
        if x1 <= self.x {
            return Ok(());
        }
        let (sys, lambda, h) = (self.sys, self.lambda, self.h);
        let mut count = 0usize;
        let mut err = None;
        let mut pos = self.x;
        drive(sys, lambda, self.x, x1, h, |hs, k0, kh, k1| {
            if err.is_some() {
                return;
            }
            let next = rk4_pair(self.w, k0, kh, k1, hs);
            self.g = self.g + simpson_gram(self.w, next, hs);
            self.w = next;
            pos += hs;
            count += 1;
            if count % RENORM_EVERY == 0 {
                self.x = pos;
                if let Err(e) = self.renormalise() {
                    err = Some(e);
                }
            }
        });
        self.x = x1;
        if let Some(e) = err {
            return Err(e);
        }
        self.renormalise()
    }

    /// `(mantissa, log)` with `||A11^{-1}||_2 = mantissa * exp(log)`, where
    /// `A11 = int_0^x Phi* Phi`.
    pub fn inv_gram_norm(&self) -> Result<(f64, f64)> {
        let gi = self.g.inverse()?;
        let t = self.v * gi * self.v.adjoint();
        Ok((t.eig_hermitian().1.max(0.0), -2.0 * self.log_s))
    }
}

/// Backward frame of solutions satisfying the right condition at `b`,
/// evaluated at `x = 0`, with the Gram `int_0^b Y* Y` in the same frame.
pub fn backward_frame<S: System>(
    sys: &S,
    lambda: Complex64,
    b: f64,
    bc: RightBc<S::B>,
) -> Result<(Pair<S::B>, S::B)> {
    let (y0, gram, _) = backward_profile(sys, lambda, b, bc, &[])?;
    Ok((y0, gram))
}

/// As [`backward_frame`], also returning the frame at each point of `xs`
/// expressed in the coordinates of the returned frame at 0, so that a fixed
/// right factor applies to all of them.
pub fn backward_profile<S: System>(
    sys: &S,
    lambda: Complex64,
    b: f64,
    bc: RightBc<S::B>,
    xs: &[f64],
) -> Result<(Pair<S::B>, S::B, Vec<Pair<S::B>>)> {
    check_domain(sys, b)?;
    for &x in xs {
        if !(0.0..=b).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[j].total_cmp(&xs[i]));
    let mut y = match bc {
        RightBc::Dirichlet => Pair::new(S::B::zero(), S::B::identity()),
        RightBc::Robin(bm) => Pair::new(S::B::identity(), -bm),
    };
    let h = step_for(sys, lambda);
    let mut gram = S::B::zero();
    let mut count = 0usize;
    let mut err = None;
    // (saved frame, right factor, log of its scale)
    let mut saved: Vec<(Pair<S::B>, S::B, f64)> = Vec::with_capacity(xs.len());
    let mut at = b;
    let mut targets: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    targets.push(0.0);
    for (n, &t) in targets.iter().enumerate() {
        drive(sys, lambda, at, t, h, |hs, k0, kh, k1| {
            if err.is_some() {
                return;
            }
            let next = rk4_pair(y, k0, kh, k1, hs);
            gram = gram + simpson_gram(y, next, hs);
            y = next;
            count += 1;
            if count % RENORM_EVERY == 0 {
                match y.gram().cholesky_upper().and_then(|r| r.inverse().ok()) {
                    Some(ri) => {
                        y = y.mul_right(ri);
                        gram = ri.adjoint() * gram * ri;
                        for s in saved.iter_mut() {
                            let t = s.1 * ri;
                            let nt = t.norm();
                            s.1 = t.scale_re(1.0 / nt);
                            s.2 += nt.ln();
                        }
                    }
                    None => err = Some(Error::StepUnderflow(b)),
                }
            }
        });
        at = t;
        if n < order.len() {
            saved.push((y, S::B::identity(), 0.0));
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    let mut out = vec![Pair::new(S::B::zero(), S::B::zero()); xs.len()];
    for (k, &i) in order.iter().enumerate() {
        let (p, t, l) = saved[k];
        out[i] = p.mul_right(t).scale_re(l.exp());
    }
    Ok((y, gram, out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GronwallCase {
    /// `F'(0) = 0`
    FixedValue,
    /// `F(0) = 0`
    FixedDerivative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GronwallBound {
    pub x: f64,
    pub bound: f64,
}

/// Largest defect of the Wronskian identities at `x`: `[Phi(conj l)*, Phi] = 0`,
/// `[Phi(conj l)*, Theta] = I`, `[Theta(conj l)*, Theta] = 0` and
/// `Theta' Phi(conj l)* - Phi' Theta(conj l)* = eps`.
pub fn wronskian_defect(p: &Problem, lambda: Complex64, x: f64) -> Result<f64> {
    let (ph, dph, th, dth) = propagate(p, lambda, x)?.unscaled();
    let (phb, dphb, thb, dthb) = propagate(p, lambda.conj(), x)?.unscaled();
    let phs = Pair::new(phb.adjoint(), dphb.adjoint());
    let ths = Pair::new(thb.adjoint(), dthb.adjoint());
    let w1 = bracket(phs, Pair::new(ph, dph)).norm();
    let w2 = (bracket(phs, Pair::new(th, dth)) - Mat2C::identity()).norm();
    let w3 = bracket(ths, Pair::new(th, dth)).norm();
    let x4 = (dth * phb.adjoint() - dph * thb.adjoint() - Mat2C::eps()).norm();
    Ok(w1.max(w2).max(w3).max(x4))
}

/// A-priori bound on `||F(x) - F0(x)||` from the Volterra form of the
/// equation at `lambda = k^2`; `q_integral` is `int_0^x ||Q||`.
pub fn gronwall_bound(
    case: GronwallCase,
    k: Complex64,
    norm_f0: f64,
    q_integral: f64,
    x: f64,
) -> Result<GronwallBound> {
    let ak = k.norm();
    if ak == 0.0 {
        return Err(Error::ZeroK);
    }
    let kappa = k.re.abs().max(k.im.abs());
    let growth = ((2.0 / ak) * q_integral).exp_m1();
    let pre = match case {
        GronwallCase::FixedValue => 2.0 * norm_f0,
        GronwallCase::FixedDerivative => 2.0 * norm_f0 / ak,
    };
    Ok(GronwallBound {
        x,
        bound: pre * (kappa * x).exp() * growth,
    })
}

/// Unperturbed solution compared against in the Gronwall estimates.
pub fn gronwall_reference(case: GronwallCase, k: Complex64, data: Mat2C, x: f64) -> Mat2C {
    let (pp, pm) = (Mat2C::p_plus(), Mat2C::p_minus());
    let kx = k * x;
    match case {
        GronwallCase::FixedValue => (pp * data).scale(kx.cos()) + (pm * data).scale(kx.cosh()),
        GronwallCase::FixedDerivative => {
            (pp * data).scale(kx.sin() / k) + (pm * data).scale(kx.sinh() / k)
        }
    }
}

/// Relative deviation of `exp(-kappa x) Phi(x, 2 i kappa^2)` from its large
/// `kappa` form.
pub fn verify_large_kappa(p: &Problem, kappa: f64, x: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidProblem("kappa must be positive".into()));
    }
    let lambda = Complex64::new(0.0, 2.0 * kappa * kappa);
    let k = Complex64::new(kappa, kappa);
    let st = propagate(p, lambda, x)?;
    let lhs = st.phi.scale_re((st.log_scale - kappa * x).exp());
    let (s, c, _) = boundary_matrices(p.alpha);
    let em = Complex64::new(0.0, -kappa * x).exp();
    let ep = Complex64::new(0.0, kappa * x).exp();
    let (pp, pm) = (Mat2C::p_plus(), Mat2C::p_minus());
    let i = Complex64::new(0.0, 1.0);
    let lead = (pp.scale(em) + pm.scale(ep)).scale_re(0.5) * s;
    let corr = (pp.scale(i * em) - pm.scale(ep)).scale(1.0 / (2.0 * k)) * c;
    let want = lead - corr;
    Ok((lhs - want).norm() / want.norm())
}
