//! Constant-modulus manifold `{x : |x_i| = 1/sqrt(N_t)}` and the Riemannian
//! conjugate-gradient method used to design the analog precoder.
//!
//! Tangent vectors at `x` satisfy `Re[z_i x_i*] = 0`. With modulus
//! `r = 1/sqrt(N_t)` the orthogonal projection is
//! `z = d - Re[d ∘ x*] ∘ x / r^2`; the `1/r^2 = N_t` factor makes the
//! projection exact on this manifold (the unit-modulus formula would leave a
//! radial residual).

use std::io::Write;
use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::CMatrix;
use crate::scalar::{norm_sqr, Real};

/// Point on the manifold: `vec[W]` (column-major) for an `N_t x N_RF` analog
/// precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint<T> {
    x: Vec<Complex<T>>,
    n_t: usize,
}

impl<T: Real> ManifoldPoint<T> {
    /// Checks the modulus of every entry.
    pub fn new(x: Vec<Complex<T>>, n_t: usize) -> Result<Self> {
        if n_t == 0 || x.is_empty() {
            return Err(Error::Dimension("empty manifold point".into()));
        }
        let r = modulus::<T>(n_t);
        let tol = T::modulus_tolerance();
        for (i, z) in x.iter().enumerate() {
            let m = z.norm();
            if !((m - r).abs() < tol) {
                return Err(Error::OffManifold { index: i, modulus: m.to_f64_lossy() });
            }
        }
        Ok(Self { x, n_t })
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn modulus(&self) -> T {
        modulus(self.n_t)
    }

    /// Largest `| |x_i| - 1/sqrt(N_t) |`.
    pub fn max_modulus_error(&self) -> T {
        let r = self.modulus();
        self.x.iter().map(|z| (z.norm() - r).abs()).fold(T::zero(), T::max)
    }
}

#[inline]
fn modulus<T: Real>(n_t: usize) -> T {
    T::one() / T::lit(n_t as f64).sqrt()
}

/// `x = vec[W]`, column-major.
pub fn vec_precoder<T: Real>(w: &CMatrix<T>) -> Result<ManifoldPoint<T>> {
    ManifoldPoint::new(w.to_column_major(), w.rows())
}

/// Inverse of [`vec_precoder`].
pub fn unvec<T: Real>(x: &ManifoldPoint<T>) -> CMatrix<T> {
    let n_t = x.n_t;
    CMatrix::from_column_major(n_t, x.len() / n_t, &x.x).expect("length is a multiple of N_t")
}

/// Orthogonal projection of `d` onto the tangent space at `x`.
pub fn project_tangent<T: Real>(x: &ManifoldPoint<T>, d: &[Complex<T>]) -> Vec<Complex<T>> {
    assert_eq!(d.len(), x.len(), "direction length");
    let scale = T::lit(x.n_t as f64);
    x.x.iter()
        .zip(d)
        .map(|(xi, di)| {
            let radial = (*di * xi.conj()).re * scale;
            *di - *xi * radial
        })
        .collect()
}

/// `R(x)_i = x_i / (|x_i| sqrt(N_t))`.
pub fn retract<T: Real>(raw: &[Complex<T>], n_t: usize) -> Result<ManifoldPoint<T>> {
    let r = modulus::<T>(n_t);
    let floor = T::lit(1e-300).max(T::min_positive_value());
    let mut x = Vec::with_capacity(raw.len());
    for (i, z) in raw.iter().enumerate() {
        let m = z.norm();
        if !(m > floor) || !m.is_finite() {
            return Err(Error::DegenerateStep { index: i });
        }
        x.push(*z * (r / m));
    }
    Ok(ManifoldPoint { x, n_t })
}

/// Largest `|Re[z_i x_i*]|`; zero for an exactly tangent `z`.
pub fn tangency_residual<T: Real>(x: &ManifoldPoint<T>, z: &[Complex<T>]) -> T {
    x.x.iter().zip(z).map(|(xi, zi)| (*zi * xi.conj()).re.abs()).fold(T::zero(), T::max)
}

/// Real inner product `Re[aᴴ b]`.
fn inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).map(|(x, y)| (x.conj() * *y).re).sum()
}

fn norm<T: Real>(a: &[Complex<T>]) -> T {
    a.iter().map(|z| norm_sqr(*z)).sum::<T>().sqrt()
}

/// Objective maximized by [`riemannian_cg`].
pub trait CostFunction<T: Real> {
    fn value(&self, x: &ManifoldPoint<T>) -> Result<T>;

    /// Euclidean Wirtinger gradient `df/dx*`.
    fn gradient(&self, x: &ManifoldPoint<T>) -> Result<Vec<Complex<T>>>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CgSettings {
    /// Step length `s`; the raw step is `s / ||d_t||`.
    pub step_scale: f64,
    /// Relative improvement threshold `epsilon_1`.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Armijo backtracking (halving, sufficient increase 1e-4) starting from
    /// `s / ||d_t||`. Off reproduces the plain fixed normalized step.
    pub backtracking: bool,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self { step_scale: 0.1, tolerance: 1e-4, max_iter: 200, backtracking: true }
    }
}

impl CgSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            return Err(Error::invalid("step_scale", "must be positive"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

const ARMIJO_FACTOR: f64 = 0.5;
const ARMIJO_SUFFICIENT: f64 = 1e-4;
const MAX_HALVINGS: usize = 20;
const BETA_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Relative improvement fell to the tolerance or below.
    Converged,
    /// Riemannian gradient or search direction vanished.
    Stationary,
    MaxIterations,
    /// Backtracking found no acceptable step.
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub step: f64,
    pub grad_norm: f64,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

impl OptTrace {
    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }

    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iteration)
    }

    /// Writes `iter,objective,step,grad_norm,millis` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,objective,step,grad_norm,millis")?;
        for r in &self.records {
            writeln!(out, "{},{:e},{:e},{:e},{:.3}", r.iteration, r.objective, r.step, r.grad_norm, r.millis)?;
        }
        Ok(())
    }
}

/// State exposed to [`riemannian_cg_observed`] after every accepted iterate.
pub struct IterateView<'a, T> {
    pub iteration: usize,
    pub point: &'a ManifoldPoint<T>,
    pub gradient: &'a [Complex<T>],
    pub direction: &'a [Complex<T>],
    pub objective: T,
}

/// Maximizes `f` over the manifold by Riemannian conjugate gradient with
/// Polak-Ribière updates.
pub fn riemannian_cg<T: Real, F: CostFunction<T> + ?Sized>(
    f: &F,
    x0: ManifoldPoint<T>,
    settings: &CgSettings,
) -> Result<(ManifoldPoint<T>, OptTrace)> {
    riemannian_cg_observed(f, x0, settings, |_| {})
}

pub fn riemannian_cg_observed<T: Real, F: CostFunction<T> + ?Sized>(
    f: &F,
    x0: ManifoldPoint<T>,
    settings: &CgSettings,
    mut observe: impl FnMut(&IterateView<'_, T>),
) -> Result<(ManifoldPoint<T>, OptTrace)> {
    settings.validate()?;
    let start = Instant::now();
    let elapsed = || start.elapsed().as_secs_f64() * 1e3;
    let s = T::lit(settings.step_scale);
    let eps1 = T::lit(settings.tolerance);
    let n_t = x0.n_t;

    let mut x = x0;
    let mut fx = finite(f.value(&x)?, "objective")?;
    let mut f_prev = T::zero();
    let mut g = project_tangent(&x, &f.gradient(&x)?);
    let mut d = g.clone();
    let mut records = vec![TraceRecord {
        iteration: 0,
        objective: fx.to_f64_lossy(),
        step: 0.0,
        grad_norm: norm(&g).to_f64_lossy(),
        millis: elapsed(),
    }];
    observe(&IterateView { iteration: 0, point: &x, gradient: &g, direction: &d, objective: fx });

    let mut t = 0usize;
    let termination = loop {
        if t >= settings.max_iter {
            break Termination::MaxIterations;
        }
        // The first pass always runs; afterwards continue only while the
        // last step improved f by more than eps1 relative to its size.
        if t > 0 {
            let scale = fx.abs().max(f_prev.abs()).max(T::min_positive_value());
            if !(fx - f_prev > eps1 * scale) {
                break Termination::Converged;
            }
        }
        let mut d_norm = norm(&d);
        if !(d_norm > T::zero()) || !(norm(&g) > T::zero()) {
            break Termination::Stationary;
        }

        // Directional derivative of f along d is 2 Re[gᴴ d].
        let mut slope = T::lit(2.0) * inner(&g, &d);
        if settings.backtracking && !(slope > T::zero()) {
            d = g.clone();
            d_norm = norm(&d);
            slope = T::lit(2.0) * inner(&g, &g);
        }

        let mut alpha = s / d_norm;
        let mut accepted = None;
        let mut degenerate = None;
        for _ in 0..=MAX_HALVINGS {
            let raw: Vec<_> = x.x.iter().zip(&d).map(|(xi, di)| *xi + *di * alpha).collect();
            match retract(&raw, n_t) {
                Ok(candidate) => {
                    degenerate = None;
                    let fc = f.value(&candidate)?;
                    let ok = fc.is_finite()
                        && (!settings.backtracking || fc >= fx + T::lit(ARMIJO_SUFFICIENT) * alpha * slope);
                    if ok {
                        accepted = Some((candidate, fc));
                        break;
                    }
                }
                Err(e @ Error::DegenerateStep { .. }) => degenerate = Some(e),
                Err(e) => return Err(e),
            }
            alpha = alpha * T::lit(ARMIJO_FACTOR);
        }
        let Some((x_next, f_next)) = accepted else {
            if let Some(e) = degenerate {
                return Err(e);
            }
            break Termination::LineSearchFailed;
        };

        let g_next = project_tangent(&x_next, &f.gradient(&x_next)?);
        let g_moved = project_tangent(&x_next, &g);
        let d_moved = project_tangent(&x_next, &d);
        let denom = inner(&g_moved, &g_moved);
        let beta = if denom.sqrt() < T::lit(BETA_GUARD) {
            T::zero()
        } else {
            let diff: Vec<_> = g_next.iter().zip(&g_moved).map(|(a, b)| *a - *b).collect();
            inner(&g_next, &diff) / denom
        };
        let beta = if beta.is_finite() { beta } else { T::zero() };
        d = g_next.iter().zip(&d_moved).map(|(gi, di)| *gi + *di * beta).collect();

        f_prev = fx;
        fx = f_next;
        x = x_next;
        g = g_next;
        t += 1;
        records.push(TraceRecord {
            iteration: t,
            objective: fx.to_f64_lossy(),
            step: alpha.to_f64_lossy(),
            grad_norm: norm(&g).to_f64_lossy(),
            millis: elapsed(),
        });
        observe(&IterateView { iteration: t, point: &x, gradient: &g, direction: &d, objective: fx });
    };

    Ok((x, OptTrace { records, termination }))
}

fn finite<T: Real>(v: T, what: &'static str) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}
