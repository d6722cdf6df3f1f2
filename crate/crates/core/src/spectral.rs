//! Spectral measure of the block operator from boundary values of M: densities
//! by Stieltjes inversion, atoms, the pair `(nu, psi)`, integrated masses and
//! the relations for real and normal potentials.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::linalg::{herglotz_im, i_unit, BoundaryParam, Mat2C};
use crate::model::Problem;
use crate::oracles::{scalar_sigma_density_of, ScalarProblem};
use crate::weyl::m_limit;
use crate::{Error, Result};

/// Default `eps` (and `delta`) schedule.
pub const DEFAULT_EPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];
/// Certificate tolerance used for boundary values of M.
pub const M_TOL: f64 = 1e-9;
/// Extrapolated `-i delta M` traces below this are leakage, not atoms.
pub const ATOM_FLOOR: f64 = 1e-4;
/// Half-width of the atom exclusion window in units of the largest `eps`.
pub const EXCLUSION: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFlag {
    Ok,
    /// `nu` density below the noise floor, `psi` left undefined.
    ZeroDensity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSample {
    pub s: f64,
    pub nu_density: f64,
    pub psi: Complex64,
    pub err_est: f64,
    pub flag: SampleFlag,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub nu_mass: f64,
    pub psi_value: Complex64,
}

impl Atom {
    /// `nu [[1, psi], [conj psi, 1]]`
    pub fn mass_matrix(&self) -> Mat2C {
        let n = Complex64::new(self.nu_mass, 0.0);
        Mat2C::new(n, self.psi_value * self.nu_mass, self.psi_value.conj() * self.nu_mass, n)
    }
}

/// Values that can be extrapolated linearly.
pub trait Extrapolate: Copy {
    fn combine(a: Self, wa: f64, b: Self, wb: f64) -> Self;
    fn dist(a: Self, b: Self) -> f64;
}

impl Extrapolate for f64 {
    fn combine(a: f64, wa: f64, b: f64, wb: f64) -> f64 {
        wa * a + wb * b
    }
    fn dist(a: f64, b: f64) -> f64 {
        (a - b).abs()
    }
}

impl Extrapolate for Mat2C {
    fn combine(a: Mat2C, wa: f64, b: Mat2C, wb: f64) -> Mat2C {
        a.scale_re(wa) + b.scale_re(wb)
    }
    fn dist(a: Mat2C, b: Mat2C) -> f64 {
        (a - b).norm()
    }
}

/// Limit at `eps -> 0` of a quantity linear in `eps`, from consecutive pairs
/// of `eps_seq`; the error estimate is the spread of the last two
/// extrapolants (or the last step for two entries).
pub fn richardson<T: Extrapolate>(eps_seq: &[f64], f: impl Fn(f64) -> Result<T>) -> Result<(T, f64)> {
    if eps_seq.len() < 2 {
        return Err(Error::InvalidProblem("need at least two eps values".into()));
    }
    for w in eps_seq.windows(2) {
        if !(w[0] > w[1] && w[1] > 0.0) {
            return Err(Error::InvalidProblem("eps schedule must be positive and decreasing".into()));
        }
    }
    let vals = eps_seq.iter().map(|&e| f(e)).collect::<Result<Vec<T>>>()?;
    let ext: Vec<T> = (0..vals.len() - 1)
        .map(|j| {
            let (a, b) = (eps_seq[j], eps_seq[j + 1]);
            T::combine(vals[j + 1], a / (a - b), vals[j], -b / (a - b))
        })
        .collect();
    let n = ext.len();
    let err = if n >= 2 {
        T::dist(ext[n - 1], ext[n - 2])
    } else {
        T::dist(ext[0], vals[1])
    };
    Ok((ext[n - 1], err))
}

fn poisson(atoms: &[Atom], lambda: f64, eps: f64) -> Mat2C {
    atoms.iter().fold(Mat2C::zero(), |acc, a| {
        let d = lambda - a.location;
        acc + a.mass_matrix().scale_re(eps / (PI * (d * d + eps * eps)))
    })
}

/// `(1/pi) Im M(lambda + i eps)` extrapolated to `eps -> 0`, with the error
/// estimate.
pub fn stieltjes_density(p: &Problem, lambda: f64, eps_seq: &[f64]) -> Result<(Mat2C, f64)> {
    stieltjes_density_excluding(p, lambda, eps_seq, &[])
}

/// As [`stieltjes_density`] with the Poisson kernels of known atoms removed
/// before extrapolation.
pub fn stieltjes_density_excluding(
    p: &Problem,
    lambda: f64,
    eps_seq: &[f64],
    atoms: &[Atom],
) -> Result<(Mat2C, f64)> {
    let cert = std::cell::Cell::new(0.0f64);
    let (d, err) = richardson(eps_seq, |e| {
        let mv = m_limit(p, Complex64::new(lambda, e), M_TOL)?;
        cert.set(cert.get().max(mv.disk_radius));
        Ok(herglotz_im(mv.m).scale_re(1.0 / PI) - poisson(atoms, lambda, e))
    })?;
    Ok((d, err + 3.0 * cert.get() / PI))
}

/// `(nu density, psi)` from a density matrix `nu [[1, psi], [conj psi, 1]]`.
pub fn decompose_pair(density: Mat2C) -> Result<(f64, Complex64)> {
    let scale = density.a11.norm() + density.a22.norm();
    decompose_pair_tol(density, 1e-6 * (1.0 + scale))
}

/// [`decompose_pair`] with an absolute tolerance for the diagonal mismatch,
/// which also serves as the noise floor for `nu`.
pub fn decompose_pair_tol(density: Mat2C, tol: f64) -> Result<(f64, Complex64)> {
    let (d11, d22) = (density.a11.re, density.a22.re);
    let mismatch = (d11 - d22).abs();
    if mismatch > tol {
        return Err(Error::AsymmetricDensity(mismatch));
    }
    let nu = 0.5 * (d11 + d22);
    if nu <= tol.max(1e-12) {
        return Err(Error::ZeroDensity);
    }
    let off = 0.5 * (density.a12 + density.a21.conj());
    Ok((nu, off / nu))
}

/// Pair sample at `s`, with known atoms removed from the density.
pub fn sample_pair(p: &Problem, s: f64, eps_seq: &[f64], atoms: &[Atom]) -> Result<SpectralSample> {
    let (d, err) = stieltjes_density_excluding(p, s, eps_seq, atoms)?;
    let tol = 4.0 * err + 1e-9 * (1.0 + d.norm());
    match decompose_pair_tol(d, tol) {
        Ok((nu, psi)) => Ok(SpectralSample {
            s,
            nu_density: nu,
            psi,
            err_est: err / nu.max(1e-300) + err,
            flag: SampleFlag::Ok,
        }),
        Err(Error::ZeroDensity) => Ok(SpectralSample {
            s,
            nu_density: 0.5 * (d.a11.re + d.a22.re),
            psi: Complex64::new(0.0, 0.0),
            err_est: err,
            flag: SampleFlag::ZeroDensity,
        }),
        Err(e) => Err(e),
    }
}

/// Point mass of the spectral measure at `lambda` from `-i delta M(lambda + i delta)`.
pub fn detect_atom(p: &Problem, lambda: f64, delta_seq: &[f64]) -> Result<Option<Atom>> {
    let tol = 1e-3 * delta_seq.last().copied().unwrap_or(1e-3);
    let (w, _) = richardson(delta_seq, |d| {
        let mv = m_limit(p, Complex64::new(lambda, d), tol)?;
        Ok(mv.m.scale(Complex64::new(0.0, -d)))
    })?;
    let w = w.herm_re();
    let tr = w.trace().re;
    if tr <= ATOM_FLOOR {
        return Ok(None);
    }
    let nu = 0.5 * tr;
    Ok(Some(Atom {
        location: lambda,
        nu_mass: nu,
        psi_value: w.a12 / nu,
    }))
}

/// Rejects samples inside the exclusion window of any atom.
pub fn outside_windows(lambda: f64, atoms: &[Atom], eps_max: f64) -> bool {
    atoms
        .iter()
        .all(|a| (lambda - a.location).abs() >= EXCLUSION * eps_max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Largest `r` accepted by [`distribution_ratio`].
pub const MAX_RATIO_R: f64 = 1e6;

/// `Sigma((0, r))` or `Sigma((-r, 0))` by integrating M over the upper
/// half circle on that interval; the endpoints must not carry atoms.
pub fn spectral_mass(p: &Problem, r: f64, sign: Sign) -> Result<Mat2C> {
    if !(r > 0.0 && r <= MAX_RATIO_R) {
        return Err(Error::Budget(format!("r = {r} outside (0, {MAX_RATIO_R}]")));
    }
    let rad = 0.5 * r;
    let i = i_unit();
    // z(t) with z(0) = 0 and z(1) = +-r, graded quadratically at 0.
    let path = |t: f64| -> (Complex64, Complex64) {
        let (c, th, dth) = match sign {
            Sign::Plus => (rad, PI * (1.0 - t * t), -2.0 * PI * t),
            Sign::Minus => (-rad, PI * t * t, 2.0 * PI * t),
        };
        let e = Complex64::from_polar(rad, th);
        (c + e, i * e * dth)
    };
    let rule = GaussLegendre::new(16.try_into().unwrap());
    let nodes: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
    let integrate = |panels: usize| -> Result<Mat2C> {
        let pts: Vec<(f64, f64)> = (0..panels)
            .flat_map(|j| {
                let (a, b) = (j as f64 / panels as f64, (j + 1) as f64 / panels as f64);
                nodes
                    .iter()
                    .map(move |&(x, w)| (0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w))
            })
            .collect();
        let parts = pts
            .par_iter()
            .map(|&(t, w)| {
                let (z, dz) = path(t);
                let tol = 1e-9 * (1.0 + z.norm().sqrt());
                Ok(m_limit(p, z, tol)?.m.scale(dz * w))
            })
            .collect::<Result<Vec<Mat2C>>>()?;
        Ok(parts.into_iter().fold(Mat2C::zero(), |a, b| a + b))
    };
    let mut panels = 4;
    let mut prev = integrate(panels)?;
    loop {
        panels *= 2;
        let cur = integrate(panels)?;
        let diff = (cur - prev).norm();
        if diff <= 1e-7 * (1.0 + cur.norm()) {
            prev = cur;
            break;
        }
        if panels >= 64 {
            return Err(Error::Budget(format!(
                "mass quadrature did not settle (change {diff:e})"
            )));
        }
        prev = cur;
    }
    // integral from 0 to the far end; orient as an integral from left to right
    let z = match sign {
        Sign::Plus => prev,
        Sign::Minus => -prev,
    };
    Ok((z - z.adjoint()).scale(Complex64::new(0.0, -1.0 / (2.0 * PI))))
}

/// `Sigma((0, r))/r^{1/2}` for finite `alpha`, `/r^{3/2}` for the infinite one
/// (mirrored interval for the minus sign).
pub fn distribution_ratio(p: &Problem, r: f64, sign: Sign) -> Result<Mat2C> {
    let mass = spectral_mass(p, r, sign)?;
    let pw = if p.alpha.is_infinite() { 1.5 } else { 0.5 };
    Ok(mass.scale_re(r.powf(-pw)))
}

/// Value of a scalar spectral measure at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaValue {
    Density(f64),
    Atom(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaPoint {
    pub lambda: f64,
    pub value: SigmaValue,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PairPoint {
    Sample(SpectralSample),
    Atom(Atom),
}

/// Pair of `H + i omega` from the spectral measure `sigma` of a self-adjoint
/// `H`, at `s = sqrt(lambda^2 + omega^2)` for each `|lambda|` present in
/// `points`; `sigma(-lambda)` is taken from the point at `-lambda` (zero if
/// absent). Densities are per unit `s`.
pub fn scalar_to_pair_shift(points: &[SigmaPoint], omega: f64) -> Vec<PairPoint> {
    let key = |x: f64| x.abs().to_bits();
    let mut mags: Vec<f64> = points.iter().map(|p| p.lambda.abs()).collect();
    mags.sort_by(f64::total_cmp);
    mags.dedup_by_key(|x| key(*x));
    let find = |lam: f64, atom: bool| -> f64 {
        points
            .iter()
            .filter(|p| p.lambda.to_bits() == lam.to_bits() || (lam == 0.0 && p.lambda == 0.0))
            .map(|p| match (p.value, atom) {
                (SigmaValue::Density(d), false) => d,
                (SigmaValue::Atom(m), true) => m,
                _ => 0.0,
            })
            .sum()
    };
    let mut out = Vec::new();
    for lam in mags {
        let s = (lam * lam + omega * omega).sqrt();
        let (zp, zm) = (Complex64::new(lam, omega), Complex64::new(lam, -omega));
        let (mp, mm) = (find(lam, true), if lam > 0.0 { find(-lam, true) } else { 0.0 });
        if mp > 0.0 || mm > 0.0 {
            let nu = 0.5 * (mp + mm);
            let pn = (zp * mp - zm * mm) / (2.0 * s);
            out.push(PairPoint::Atom(Atom {
                location: s,
                nu_mass: nu,
                psi_value: pn / nu,
            }));
        }
        let (dp, dm) = (find(lam, false), if lam > 0.0 { find(-lam, false) } else { 0.0 });
        let has_density = points
            .iter()
            .any(|p| p.lambda.abs() == lam && matches!(p.value, SigmaValue::Density(_)));
        if !has_density {
            continue;
        }
        if lam == 0.0 && omega != 0.0 {
            // d lambda / d s is unbounded at the band edge
            out.push(PairPoint::Sample(SpectralSample {
                s,
                nu_density: f64::INFINITY,
                psi: Complex64::new(0.0, 0.0),
                err_est: 0.0,
                flag: SampleFlag::ZeroDensity,
            }));
            continue;
        }
        let jac = if lam == 0.0 { 1.0 } else { s / lam };
        let nu = 0.5 * (dp + dm) * jac;
        let pn = (zp * dp - zm * dm) / (2.0 * s) * jac;
        let (psi, flag) = if nu > 0.0 {
            (pn / nu, SampleFlag::Ok)
        } else {
            (Complex64::new(0.0, 0.0), SampleFlag::ZeroDensity)
        };
        out.push(PairPoint::Sample(SpectralSample {
            s,
            nu_density: nu,
            psi,
            err_est: 0.0,
            flag,
        }));
    }
    out
}

/// Largest `|sigma density - (1 + psi) nu density|` over `grid`, for real `q`
/// and real or infinite `alpha`.
pub fn selfadjoint_check(p: &Problem, grid: &[f64]) -> Result<f64> {
    if let BoundaryParam::Finite(a) = p.alpha {
        if a.im != 0.0 {
            return Err(Error::InvalidProblem("alpha must be real".into()));
        }
    }
    let sp = ScalarProblem::from_problem(p)?;
    let defects = grid
        .par_iter()
        .map(|&s| {
            let (sigma, _) = scalar_sigma_density_of(&sp, s, &DEFAULT_EPS)?;
            let (d, err) = stieltjes_density(p, s, &DEFAULT_EPS)?;
            let rhs = match decompose_pair_tol(d, 4.0 * err + 1e-9) {
                Ok((nu, psi)) => (1.0 + psi) * nu,
                Err(Error::ZeroDensity) => Complex64::new(0.0, 0.0),
                Err(e) => return Err(e),
            };
            Ok((sigma - rhs).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::model::Potential;
    use crate::oracles::free_pair;

    fn fin(re: f64, im: f64) -> BoundaryParam {
        BoundaryParam::finite(re, im)
    }

    #[test]
    fn richardson_is_exact_on_linear_data() {
        let (v, err) = richardson(&DEFAULT_EPS, |e| Ok(3.0 - 7.0 * e)).unwrap();
        assert!((v - 3.0).abs() < 1e-14 && err < 1e-14);
        let (v, err) = richardson(&DEFAULT_EPS, |e| Ok(1.0 + e + 50.0 * e * e)).unwrap();
        assert!((v - 1.0).abs() < 1e-3 && err >= (v - 1.0).abs());
        assert!(richardson(&[1e-2], |e| Ok(e)).is_err());
        assert!(richardson(&[1e-2, 2e-2], |e| Ok(e)).is_err());
    }

    #[test]
    fn decompose_examples() {
        let k = 1.5 / PI;
        let d = Mat2C::new(c(k, 0.0), c(0.0, -k), c(0.0, k), c(k, 0.0));
        let (nu, psi) = decompose_pair(d).unwrap();
        assert!((nu - k).abs() < 1e-15 && (psi - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(decompose_pair(Mat2C::identity()).unwrap(), (1.0, c(0.0, 0.0)));
        assert_eq!(decompose_pair(Mat2C::real(1.0, 1.0, 1.0, 1.0)).unwrap(), (1.0, c(1.0, 0.0)));
        assert!(matches!(
            decompose_pair(Mat2C::real(1.0, 0.0, 0.0, 1.1)),
            Err(Error::AsymmetricDensity(_))
        ));
        assert!(matches!(decompose_pair(Mat2C::zero()), Err(Error::ZeroDensity)));
    }

    #[test]
    fn free_densities() {
        let (d, err) = stieltjes_density(&Problem::free(BoundaryParam::Infinity), 4.0, &DEFAULT_EPS).unwrap();
        assert!((d - Mat2C::real(1.0, 1.0, 1.0, 1.0).scale_re(1.0 / PI)).norm() < 1e-5, "{d:?}");
        assert!(err < 1e-4);
        let s = sample_pair(&Problem::free(fin(1.0, 1.0)), 4.0, &DEFAULT_EPS, &[]).unwrap();
        assert!((s.nu_density - 1.5 / PI).abs() < 1e-5);
        assert!((s.psi - c(0.0, -1.0)).norm() < 1e-4);
        assert!(s.psi.norm() <= 1.0 + s.err_est);
    }

    #[test]
    fn negative_half_line_is_mirrored() {
        // nu is even and psi odd: at -4 the Dirichlet density is (1/(2 pi)) [[1, -1], [-1, 1]] * 2
        let p = Problem::free(BoundaryParam::Infinity);
        let s = sample_pair(&p, -4.0, &DEFAULT_EPS, &[]).unwrap();
        assert!((s.nu_density - 1.0 / PI).abs() < 1e-5);
        assert!((s.psi + 1.0).norm() < 1e-4);
    }

    #[test]
    fn gap_of_the_normal_operator() {
        // q = i: nu vanishes on (-1, 1)
        let p = Problem::half_line(Potential::constant(0.0, 1.0), BoundaryParam::Infinity);
        let s = sample_pair(&p, 0.5, &DEFAULT_EPS, &[]).unwrap();
        assert_eq!(s.flag, SampleFlag::ZeroDensity);
        assert!(s.nu_density.abs() < 1e-6);
    }

    #[test]
    fn atoms_of_the_free_operator() {
        let a = detect_atom(&Problem::free(fin(1.0, 0.0)), 1.0, &DEFAULT_EPS).unwrap().unwrap();
        assert!((a.nu_mass - 2.0).abs() < 1e-3, "{a:?}");
        assert!((a.psi_value + 1.0).norm() < 1e-3);
        // the mirrored atom
        let a = detect_atom(&Problem::free(fin(1.0, 0.0)), -1.0, &DEFAULT_EPS).unwrap().unwrap();
        assert!((a.nu_mass - 2.0).abs() < 1e-3 && (a.psi_value - 1.0).norm() < 1e-3);
        assert!(detect_atom(&Problem::free(fin(1.0, 1.0)), 2.0, &DEFAULT_EPS).unwrap().is_none());
        assert!(detect_atom(&Problem::free(BoundaryParam::Infinity), 1.0, &DEFAULT_EPS).unwrap().is_none());
    }

    #[test]
    fn poisson_removal_near_an_atom() {
        let p = Problem::free(fin(1.0, 0.0));
        let (_, atom) = free_pair(fin(1.0, 0.0), 1.0);
        let atom = atom.unwrap();
        let s = 1.05;
        let got = sample_pair(&p, s, &DEFAULT_EPS, &[atom]).unwrap();
        let (want, _) = free_pair(fin(1.0, 0.0), s);
        assert!((got.nu_density - want.nu_density).abs() < 1e-4 * (1.0 + want.nu_density));
        assert!(!outside_windows(s, &[atom], DEFAULT_EPS[0]));
        assert!(outside_windows(1.2, &[atom], DEFAULT_EPS[0]));
    }

    #[test]
    fn free_masses() {
        let one = Mat2C::real(1.0, 1.0, 1.0, 1.0);
        let r = distribution_ratio(&Problem::free(BoundaryParam::Infinity), 100.0, Sign::Plus).unwrap();
        assert!((r - one.scale_re(1.0 / (3.0 * PI))).norm() < 1e-6, "{r:?}");
        // alpha = 0: nu density 1/(2 pi sqrt s), so the ratio is exact for every r
        let r = distribution_ratio(&Problem::free(fin(0.0, 0.0)), 100.0, Sign::Plus).unwrap();
        assert!((r - one.scale_re(1.0 / PI)).norm() < 1e-6, "{r:?}");
        let r = distribution_ratio(&Problem::free(fin(0.0, 0.0)), 100.0, Sign::Minus).unwrap();
        let mirrored = Mat2C::real(1.0, -1.0, -1.0, 1.0);
        assert!((r - mirrored.scale_re(1.0 / PI)).norm() < 1e-6, "{r:?}");
        assert!(matches!(
            distribution_ratio(&Problem::free(fin(0.0, 0.0)), 1e9, Sign::Plus),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn interior_atoms_are_included_in_masses() {
        // alpha = 1: nu((0, 4)) = int of the a.c. density + atom of mass 2 at 1
        let p = Problem::free(fin(1.0, 0.0));
        let m = spectral_mass(&p, 4.0, Sign::Plus).unwrap();
        let n = 2000;
        let ac: f64 = (0..n)
            .map(|j| {
                // midpoint rule in t = sqrt(s)
                let t = 2.0 * (j as f64 + 0.5) / n as f64;
                free_pair(fin(1.0, 0.0), t * t).0.nu_density * 2.0 * t * (2.0 / n as f64)
            })
            .sum();
        let nu = 0.5 * m.trace().re;
        assert!((nu - (ac + 2.0)).abs() < 1e-4, "{nu} vs {}", ac + 2.0);
    }

    #[test]
    fn shift_examples() {
        // omega = 0 reduces to (sigma + sigma*)/2 and (sigma - sigma*)/2
        let pts = [
            SigmaPoint { lambda: 2.0, value: SigmaValue::Density(0.3) },
            SigmaPoint { lambda: -2.0, value: SigmaValue::Density(0.1) },
        ];
        match scalar_to_pair_shift(&pts, 0.0)[..] {
            [PairPoint::Sample(s)] => {
                assert!((s.s - 2.0).abs() < 1e-15 && (s.nu_density - 0.2).abs() < 1e-15);
                assert!((s.psi - c(0.5, 0.0)).norm() < 1e-15);
            }
            ref other => panic!("{other:?}"),
        }
        // free Dirichlet at lambda = sqrt 3, omega = 1
        let l = 3.0f64.sqrt();
        let pts = [SigmaPoint { lambda: l, value: SigmaValue::Density(l.sqrt() / PI) }];
        match scalar_to_pair_shift(&pts, 1.0)[..] {
            [PairPoint::Sample(s)] => {
                assert!((s.s - 2.0).abs() < 1e-15);
                assert!((s.nu_density - 3.0f64.powf(-0.25) / PI).abs() < 1e-14);
                assert!((s.psi.im - 0.5).abs() < 1e-14);
            }
            ref other => panic!("{other:?}"),
        }
        let pts = [SigmaPoint { lambda: 1.0, value: SigmaValue::Atom(0.8) }];
        match scalar_to_pair_shift(&pts, 0.0)[..] {
            [PairPoint::Atom(a)] => {
                assert_eq!((a.location, a.nu_mass, a.psi_value), (1.0, 0.4, c(1.0, 0.0)));
            }
            ref other => panic!("{other:?}"),
        }
    }

    #[test]
    fn selfadjoint_free_cases() {
        let grid = [0.5, 3.0, 12.0, 50.0];
        let d = selfadjoint_check(&Problem::free(BoundaryParam::Infinity), &grid).unwrap();
        assert!(d < 1e-4, "{d}");
        let d = selfadjoint_check(&Problem::free(fin(0.0, 0.0)), &grid).unwrap();
        assert!(d < 1e-4, "{d}");
        assert!(selfadjoint_check(&Problem::free(fin(0.0, 1.0)), &grid).is_err());
    }

    #[test]
    fn selfadjoint_step_potential() {
        let q = Potential::indicator(0.0, 1.0, c(1.0, 0.0));
        let p = Problem::half_line(q, BoundaryParam::Infinity);
        let d = selfadjoint_check(&p, &[2.0, 7.0, 20.0, 50.0]).unwrap();
        assert!(d < 1e-3, "{d}");
    }
}
