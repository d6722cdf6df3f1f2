//! Simple singular values of H and the distinguished solution of the
//! antilinear equation `-e'' + q e = lambda conj(e)`.
//!
//! With `e = u + i v` the equation is the real system
//! `u'' = (Re q - lambda) u - (Im q) v`, `v'' = (Im q) u + (Re q + lambda) v`,
//! integrated backward from the right end in the state `(u, u', v, v')`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::BoundaryParam;
use crate::model::{Potential, Problem};
use crate::spectral::Atom;
use crate::{Error, Result};

/// Scan step in `lambda`.
pub const SCAN_STEP: f64 = 0.05;
/// Mismatch accepted as an eigenvalue (relative to `1 + |alpha|`).
pub const ACCEPT: f64 = 1e-6;
/// Tail-to-head norm ratio required on the half-line.
pub const DECAY: f64 = 1e-6;
/// Upper limit for the half-line truncation.
pub const B_CAP: f64 = 1e4;
const ELL_FLOOR: f64 = 1e-10;

type State = [f64; 4];

#[derive(Clone, Debug, PartialEq)]
pub struct DistinguishedSolution {
    pub lambda: f64,
    /// `(x, e(x))`
    pub samples: Vec<(f64, Complex64)>,
    /// `e'` at the sample points.
    pub de: Vec<Complex64>,
    /// Indices of the nodes where the integration grid has a breakpoint.
    pub breaks: Vec<usize>,
    pub norm_defect: f64,
    pub ell: Complex64,
}

/// Integration grid: uniform inside each smooth piece of `q`.
struct Grid {
    x: Vec<f64>,
    /// For every interval `j -> j+1`, the piece it belongs to.
    piece: Vec<(f64, f64)>,
    breaks: Vec<usize>,
}

fn grid(q: &Potential, end: f64, h: f64) -> Grid {
    let mut cuts = vec![0.0];
    cuts.extend(q.breakpoints().into_iter().filter(|&x| x < end));
    cuts.push(end);
    let mut g = Grid { x: vec![0.0], piece: Vec::new(), breaks: vec![0] };
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let n = ((hi - lo) / h).ceil().max(1.0) as usize;
        for j in 1..=n {
            g.x.push(if j == n { hi } else { lo + (hi - lo) * j as f64 / n as f64 });
            g.piece.push((lo, hi));
        }
        g.breaks.push(g.x.len() - 1);
    }
    g
}

/// `q` evaluated inside the piece `(lo, hi)`.
fn q_in(q: &Potential, x: f64, (lo, hi): (f64, f64)) -> Complex64 {
    let pad = 1e-12 * (1.0 + x.abs());
    q.scalar_at(x.clamp(lo + pad, hi - pad)).unwrap_or_default()
}

fn rhs(q: Complex64, lambda: f64, y: &State) -> State {
    [
        y[1],
        (q.re - lambda) * y[0] - q.im * y[2],
        y[3],
        q.im * y[0] + (q.re + lambda) * y[2],
    ]
}

fn axpy(y: &State, a: f64, k: &State) -> State {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]]
}

/// One RK4 step from `x0` to `x1` (either direction).
fn rk4(q: &Potential, lambda: f64, piece: (f64, f64), x0: f64, x1: f64, y: &State) -> State {
    let h = x1 - x0;
    let (q0, qm, q1) = (
        q_in(q, x0, piece),
        q_in(q, 0.5 * (x0 + x1), piece),
        q_in(q, x1, piece),
    );
    let k1 = rhs(q0, lambda, y);
    let k2 = rhs(qm, lambda, &axpy(y, 0.5 * h, &k1));
    let k3 = rhs(qm, lambda, &axpy(y, 0.5 * h, &k2));
    let k4 = rhs(q1, lambda, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn dot(a: &State, b: &State) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt; returns the orthonormal frame and the upper triangular factor.
fn qr(cols: &[State]) -> (Vec<State>, [[f64; 2]; 2]) {
    let mut r = [[0.0; 2]; 2];
    let mut q: Vec<State> = Vec::with_capacity(cols.len());
    for (j, c) in cols.iter().enumerate() {
        let mut v = *c;
        for (i, qi) in q.iter().enumerate() {
            let p = dot(qi, &v);
            r[i][j] = p;
            v = axpy(&v, -p, qi);
        }
        let n = dot(&v, &v).sqrt();
        r[j][j] = n;
        q.push(v.map(|t| t / n));
    }
    (q, r)
}

/// Decaying solutions at the right end, as states, with the slowest decay rate.
fn decaying_data(q_inf: Complex64, lambda: f64) -> (Vec<State>, f64) {
    let (a, b) = (q_inf.re, q_inf.im);
    let disc = lambda * lambda - b * b;
    let state = |w: [Complex64; 2], mu: Complex64| -> [Complex64; 4] { [w[0], -mu * w[0], w[1], -mu * w[1]] };
    let eigvec = |kappa: Complex64| -> [Complex64; 2] {
        let r1 = [Complex64::new(b, 0.0), a - lambda - kappa];
        let r2 = [a + lambda - kappa, Complex64::new(-b, 0.0)];
        let n = |w: &[Complex64; 2]| w[0].norm() + w[1].norm();
        if n(&r1) >= n(&r2) { r1 } else { r2 }
    };
    let mut cols = Vec::new();
    let mut rate = f64::INFINITY;
    if disc >= 0.0 {
        for kappa in [a + disc.sqrt(), a - disc.sqrt()] {
            if kappa > 0.0 {
                let mu = Complex64::new(kappa.sqrt(), 0.0);
                let z = state(eigvec(Complex64::new(kappa, 0.0)), mu);
                cols.push(z.map(|t| t.re));
                rate = rate.min(mu.re);
            }
        }
    } else {
        let kappa = Complex64::new(a, (-disc).sqrt());
        let mu = kappa.sqrt();
        let z = state(eigvec(kappa), mu);
        cols.push(z.map(|t| t.re));
        cols.push(z.map(|t| t.im));
        rate = mu.re;
    }
    (cols, rate)
}

/// Basis of states satisfying the right condition on a finite interval.
fn right_data(beta: BoundaryParam) -> Vec<State> {
    match beta {
        BoundaryParam::Infinity => vec![[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        BoundaryParam::Finite(b) => vec![[1.0, -b.re, 0.0, -b.im], [0.0, b.im, 1.0, -b.re]],
    }
}

/// Real and imaginary parts of `e'(0) + alpha e(0)` (or `e(0)`).
fn left_rows(alpha: BoundaryParam) -> [State; 2] {
    match alpha {
        BoundaryParam::Infinity => [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
        BoundaryParam::Finite(a) => [[a.re, 1.0, -a.im, 0.0], [a.im, 0.0, a.re, 1.0]],
    }
}

fn alpha_scale(alpha: BoundaryParam) -> f64 {
    match alpha {
        BoundaryParam::Finite(a) => 1.0 + a.norm(),
        BoundaryParam::Infinity => 1.0,
    }
}

fn check(p: &Problem) -> Result<()> {
    p.validate()?;
    if !p.potential.is_scalar() {
        return Err(Error::InvalidProblem("the eigensolver needs a scalar potential".into()));
    }
    Ok(())
}

/// Right end, integration grid and starting frame for a given `lambda`.
fn setup(p: &Problem, lambda: f64) -> Option<(Grid, Vec<State>)> {
    let h = 0.5 * p.step.step(Complex64::new(lambda, 0.0));
    match (p.length, p.beta) {
        (Some(l), Some(beta)) => Some((grid(&p.potential, l, h), right_data(beta))),
        _ => {
            let last = p.potential.breakpoints().last().copied().unwrap_or(0.0);
            let q_far = p.potential.scalar_at(last.max(p.truncation.b_min) + 1e3)?;
            let (cols, rate) = decaying_data(q_far, lambda);
            if cols.is_empty() {
                return None;
            }
            let b = (last + 40.0 / rate).max(p.truncation.b_min).min(B_CAP);
            let q_b = p.potential.scalar_at(b).unwrap_or(q_far);
            let (cols, _) = decaying_data(q_b, lambda);
            Some((grid(&p.potential, b, h), cols))
        }
    }
}

/// Backward sweep; frame at 0 and, if requested, the frames and QR factors at every node.
struct Sweep {
    frame0: Vec<State>,
    frames: Vec<Vec<State>>,
    factors: Vec<[[f64; 2]; 2]>,
}

fn sweep(p: &Problem, lambda: f64, g: &Grid, start: Vec<State>, record: bool) -> Sweep {
    let n = g.x.len() - 1;
    let (mut f, _) = qr(&start);
    let mut frames = Vec::new();
    let mut factors = Vec::new();
    if record {
        frames = vec![Vec::new(); n + 1];
        factors = vec![[[0.0; 2]; 2]; n];
        frames[n] = f.clone();
    }
    for j in (0..n).rev() {
        let cols: Vec<State> = f
            .iter()
            .map(|y| rk4(&p.potential, lambda, g.piece[j], g.x[j + 1], g.x[j], y))
            .collect();
        let (fq, r) = qr(&cols);
        f = fq;
        if record {
            frames[j] = f.clone();
            factors[j] = r;
        }
    }
    Sweep { frame0: f, frames, factors }
}

/// Boundary mismatch at 0: `2 x d` matrix in the orthonormal frame.
fn mismatch(p: &Problem, frame0: &[State]) -> Vec<[f64; 2]> {
    let rows = left_rows(p.alpha);
    frame0.iter().map(|y| [dot(&rows[0], y), dot(&rows[1], y)]).collect()
}

/// Singular values (descending) and the right singular vector of the smallest.
fn svd_cols(m: &[[f64; 2]]) -> (f64, f64, Vec<f64>) {
    match m {
        [c] => {
            let n = (c[0] * c[0] + c[1] * c[1]).sqrt();
            (n, n, vec![1.0])
        }
        [c0, c1] => {
            // Gram matrix of the columns
            let g00 = c0[0] * c0[0] + c0[1] * c0[1];
            let g11 = c1[0] * c1[0] + c1[1] * c1[1];
            let g01 = c0[0] * c1[0] + c0[1] * c1[1];
            let tr = 0.5 * (g00 + g11);
            let disc = (0.25 * (g00 - g11).powi(2) + g01 * g01).sqrt();
            let (hi, lo) = (tr + disc, (tr - disc).max(0.0));
            // eigenvector of the Gram matrix for `lo`
            let v = if (g00 - lo).abs() + g01.abs() >= (g11 - lo).abs() + g01.abs() {
                [-g01, g00 - lo]
            } else {
                [g11 - lo, -g01]
            };
            let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
            let v = if n > 0.0 { vec![v[0] / n, v[1] / n] } else { vec![1.0, 0.0] };
            (hi.sqrt(), lo.sqrt(), v)
        }
        _ => (0.0, 0.0, Vec::new()),
    }
}

#[derive(Clone, Copy, Debug)]
struct Probe {
    lambda: f64,
    d: usize,
    /// smallest singular value of the mismatch
    sigma: f64,
    sigma_max: f64,
    det: f64,
}

fn probe(p: &Problem, lambda: f64) -> Option<Probe> {
    let (g, start) = setup(p, lambda)?;
    let s = sweep(p, lambda, &g, start, false);
    let m = mismatch(p, &s.frame0);
    let (hi, lo, _) = svd_cols(&m);
    let det = if m.len() == 2 { m[0][0] * m[1][1] - m[0][1] * m[1][0] } else { 0.0 };
    Some(Probe { lambda, d: m.len(), sigma: lo, sigma_max: hi, det })
}

fn golden(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-13 * (1.0 + a.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn bisect(mut a: f64, mut fa: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    while (b - a).abs() > 1e-14 * (1.0 + a.abs()) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Simple singular values of H in `(lo, hi)`, ascending.
pub fn find_simple_singular_values(p: &Problem, search_interval: (f64, f64)) -> Result<Vec<f64>> {
    check(p)?;
    let (lo, hi) = search_interval;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
        return Err(Error::InvalidProblem(format!("bad search interval ({lo}, {hi})")));
    }
    let n = ((hi - lo) / SCAN_STEP).ceil().max(2.0) as usize;
    let lambdas: Vec<f64> = (0..=n).map(|j| lo + (hi - lo) * j as f64 / n as f64).filter(|&l| l > 0.0).collect();
    let probes: Vec<Option<Probe>> = lambdas.par_iter().map(|&l| probe(p, l)).collect();
    let tol = ACCEPT * alpha_scale(p.alpha);
    let sigma = |l: f64| probe(p, l).map_or(f64::INFINITY, |pr| pr.sigma);
    let mut found = Vec::new();
    for j in 0..probes.len() {
        let Some(c) = probes[j] else { continue };
        if c.d == 1 {
            // interior minima of |mismatch|
            let (Some(Some(a)), Some(Some(b))) = (j.checked_sub(1).map(|i| probes[i]), probes.get(j + 1).copied())
            else {
                continue;
            };
            if a.d == 1 && b.d == 1 && c.sigma <= a.sigma && c.sigma < b.sigma {
                let l = golden(a.lambda, b.lambda, sigma);
                if sigma(l) < tol {
                    found.push(l);
                }
            }
        } else if c.d == 2 {
            let Some(Some(b)) = probes.get(j + 1).copied() else { continue };
            if b.d != 2 || c.det.signum() == b.det.signum() {
                continue;
            }
            let det = |l: f64| probe(p, l).map_or(0.0, |pr| pr.det);
            let l = bisect(c.lambda, c.det, b.lambda, det);
            if let Some(pr) = probe(p, l) {
                if pr.sigma_max < tol {
                    return Err(Error::Degenerate(l));
                }
                if pr.sigma < tol {
                    found.push(l);
                }
            }
        }
    }
    found.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + b.abs()));
    Ok(found)
}

/// `l_alpha(f)` from `f(0)` and `f'(0)`.
pub fn ell_alpha(alpha: BoundaryParam, f0: Complex64, df0: Complex64) -> Complex64 {
    match alpha {
        BoundaryParam::Infinity => df0,
        BoundaryParam::Finite(a) => (a.conj() * df0 - f0) / (1.0 + a.norm_sqr()).sqrt(),
    }
}

/// `int |e|^2` on the nodes by the cubic Hermite rule.
fn hermite_norm2(xs: &[f64], e: &[Complex64], de: &[Complex64], range: std::ops::Range<usize>) -> f64 {
    range
        .map(|j| {
            let h = xs[j + 1] - xs[j];
            let f0 = e[j].norm_sqr();
            let f1 = e[j + 1].norm_sqr();
            let d0 = 2.0 * (e[j].conj() * de[j]).re;
            let d1 = 2.0 * (e[j + 1].conj() * de[j + 1]).re;
            0.5 * h * (f0 + f1) + h * h / 12.0 * (d0 - d1)
        })
        .sum()
}

/// Normalise, fix the sign and package.
fn finish(
    p: &Problem,
    lambda: f64,
    xs: Vec<f64>,
    mut e: Vec<Complex64>,
    mut de: Vec<Complex64>,
    breaks: Vec<usize>,
) -> Result<DistinguishedSolution> {
    let n = xs.len() - 1;
    let total = hermite_norm2(&xs, &e, &de, 0..n);
    let trap: f64 = (0..n).map(|j| 0.5 * (xs[j + 1] - xs[j]) * (e[j].norm_sqr() + e[j + 1].norm_sqr())).sum();
    let mut tail_defect = 0.0;
    if p.length.is_none() {
        let mid = xs.partition_point(|&x| x < 0.5 * xs[n]);
        let head = hermite_norm2(&xs, &e, &de, 0..mid);
        let tail = (total - head).max(0.0);
        if !(head > 0.0) || (tail / head).sqrt() > DECAY {
            return Err(Error::NotAnEigenvalue(lambda));
        }
        tail_defect = tail / total;
    }
    let scale = 1.0 / total.sqrt();
    e.iter_mut().chain(de.iter_mut()).for_each(|z| *z *= scale);
    // the Hermite rule is exact for cubics; its distance to the trapezoid rule bounds the quadrature error generously
    let norm_defect = ((total - trap) / total).abs() * 1e-2 + tail_defect + 1e-12;
    let mut ell = ell_alpha(p.alpha, e[0], de[0]);
    if ell.norm() < ELL_FLOOR {
        return Err(Error::ZeroEll);
    }
    let zero_re = ell.re.abs() <= 1e-9 * ell.norm();
    if (!zero_re && ell.re < 0.0) || (zero_re && ell.im < 0.0) {
        e.iter_mut().chain(de.iter_mut()).for_each(|z| *z = -*z);
        ell = -ell;
    }
    Ok(DistinguishedSolution {
        lambda,
        samples: xs.into_iter().zip(e).collect(),
        de,
        breaks,
        norm_defect,
        ell,
    })
}

/// Kernel of the mismatch at `lambda`, or the reason there is none.
fn kernel(p: &Problem, lambda: f64, m: &[[f64; 2]]) -> Result<Vec<f64>> {
    let tol = ACCEPT * alpha_scale(p.alpha);
    let (hi, lo, v) = svd_cols(m);
    if m.len() == 2 && hi < tol {
        return Err(Error::Degenerate(lambda));
    }
    if m.is_empty() || lo >= tol {
        return Err(Error::NotAnEigenvalue(lambda));
    }
    Ok(v)
}

/// The normalised solution `e` at a simple singular value `lambda`.
pub fn distinguished_solution(p: &Problem, lambda: f64) -> Result<DistinguishedSolution> {
    check(p)?;
    let (g, start) = setup(p, lambda).ok_or(Error::NotAnEigenvalue(lambda))?;
    let s = sweep(p, lambda, &g, start, true);
    let c = kernel(p, lambda, &mismatch(p, &s.frame0))?;
    // w_0 = c, w_j = R_{j-1}^{-1} w_{j-1}; solution at node j is F_j w_j
    let n = g.x.len() - 1;
    let mut w = c;
    let mut e = Vec::with_capacity(n + 1);
    let mut de = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            let r = s.factors[j - 1];
            if w.len() == 2 {
                let w1 = w[1] / r[1][1];
                w = vec![(w[0] - r[0][1] * w1) / r[0][0], w1];
            } else {
                w[0] /= r[0][0];
            }
        }
        let mut y = [0.0; 4];
        for (col, wk) in s.frames[j].iter().zip(&w) {
            y = axpy(&y, *wk, col);
        }
        e.push(Complex64::new(y[0], y[2]));
        de.push(Complex64::new(y[1], y[3]));
    }
    finish(p, lambda, g.x, e, de, g.breaks)
}

/// Same solution from a single unrenormalised shot of the complex equation
/// `e'' = q e - lambda conj(e)`; independent check of the realified sweep.
pub fn distinguished_solution_complex(p: &Problem, lambda: f64) -> Result<DistinguishedSolution> {
    check(p)?;
    let (g, start) = setup(p, lambda).ok_or(Error::NotAnEigenvalue(lambda))?;
    let n = g.x.len() - 1;
    let f = |q: Complex64, z: [Complex64; 2]| [z[1], q * z[0] - lambda * z[0].conj()];
    let shots: Vec<Vec<[Complex64; 2]>> = start
        .iter()
        .map(|y| {
            let mut z = [Complex64::new(y[0], y[2]), Complex64::new(y[1], y[3])];
            let mut out = vec![z; n + 1];
            for j in (0..n).rev() {
                let (x0, x1, piece) = (g.x[j + 1], g.x[j], g.piece[j]);
                let h = x1 - x0;
                let (q0, qm, q1) = (
                    q_in(&p.potential, x0, piece),
                    q_in(&p.potential, 0.5 * (x0 + x1), piece),
                    q_in(&p.potential, x1, piece),
                );
                let add = |z: [Complex64; 2], a: f64, k: [Complex64; 2]| [z[0] + k[0] * a, z[1] + k[1] * a];
                let k1 = f(q0, z);
                let k2 = f(qm, add(z, 0.5 * h, k1));
                let k3 = f(qm, add(z, 0.5 * h, k2));
                let k4 = f(q1, add(z, h, k3));
                z = [
                    z[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
                    z[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
                ];
                out[j] = z;
            }
            out
        })
        .collect();
    // mismatch of each shot, columns normalised
    let norms: Vec<f64> = shots.iter().map(|s| (s[0][0].norm_sqr() + s[0][1].norm_sqr()).sqrt()).collect();
    let rows = left_rows(p.alpha);
    let m: Vec<[f64; 2]> = shots
        .iter()
        .zip(&norms)
        .map(|(s, nrm)| {
            let y = [s[0][0].re, s[0][1].re, s[0][0].im, s[0][1].im].map(|t| t / nrm);
            [dot(&rows[0], &y), dot(&rows[1], &y)]
        })
        .collect();
    let c = kernel(p, lambda, &m)?;
    let mut e = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut de = e.clone();
    for ((s, nrm), ck) in shots.iter().zip(&norms).zip(&c) {
        for j in 0..=n {
            e[j] += s[j][0] * (ck / nrm);
            de[j] += s[j][1] * (ck / nrm);
        }
    }
    finish(p, lambda, g.x, e, de, g.breaks)
}

/// `nu({lambda}) = |l|^2 / 2`, `psi(lambda) = conj(l^2) / |l|^2`.
pub fn pair_at_eigenvalue(d: &DistinguishedSolution) -> Result<Atom> {
    let n2 = d.ell.norm_sqr();
    if !(d.ell.norm() >= ELL_FLOOR) {
        return Err(Error::ZeroEll);
    }
    let psi = (d.ell * d.ell).conj() / n2;
    Ok(Atom {
        location: d.lambda,
        nu_mass: 0.5 * n2,
        psi_value: psi / psi.norm(),
    })
}

/// Max of `|-e'' + q e - lambda conj(e)|` on nodes with two uniform neighbours on each side.
pub fn antilinear_residual(p: &Problem, d: &DistinguishedSolution) -> f64 {
    let n = d.samples.len();
    let near_break = |j: usize| d.breaks.iter().any(|&b| j.abs_diff(b) < 2);
    let mut worst: f64 = 0.0;
    for j in 2..n.saturating_sub(2) {
        if near_break(j) {
            continue;
        }
        let h = d.samples[j + 1].0 - d.samples[j].0;
        // fourth-order central difference of e'
        let dde = (-d.de[j + 2] + d.de[j + 1] * 8.0 - d.de[j - 1] * 8.0 + d.de[j - 2]) / (12.0 * h);
        let (x, e) = d.samples[j];
        let q = p.potential.scalar_at(x).unwrap_or_default();
        worst = worst.max((-dde + q * e - e.conj() * d.lambda).norm());
    }
    worst
}

/// Left boundary defect `|e'(0) + alpha e(0)|` (or `|e(0)|`).
pub fn boundary_defect(p: &Problem, d: &DistinguishedSolution) -> f64 {
    let (e0, de0) = (d.samples[0].1, d.de[0]);
    match p.alpha {
        BoundaryParam::Infinity => e0.norm(),
        BoundaryParam::Finite(a) => (de0 + a * e0).norm(),
    }
}

/// `int |e|^2` of a solution by the cubic Hermite rule.
pub fn norm2(d: &DistinguishedSolution) -> f64 {
    let xs: Vec<f64> = d.samples.iter().map(|s| s.0).collect();
    let e: Vec<Complex64> = d.samples.iter().map(|s| s.1).collect();
    hermite_norm2(&xs, &e, &d.de, 0..xs.len() - 1)
}
