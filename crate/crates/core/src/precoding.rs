//! Zero-forcing digital precoding and the hybrid precoder pipelines.
//!
//! The digital precoder of subcarrier `k` is the right pseudo-inverse of
//! the effective channel `He[k] = H[k] W`, so `He[k] F[k] = I`, followed by
//! per-column normalization `||W f_u[k]|| = 1` (one stream per user).

use std::io::Write;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::ici::{none_profile, IciProfile};
use crate::manifold::{riemannian_cg, unvec, vec_precoder, CgSettings, CostFunction, ManifoldPoint, OptTrace};
use crate::mathcore::{right_pseudo_inverse, CMatrix, RngStream};
use crate::objectives::{grad_interference, grad_objective_fd, objective_value, ObjectiveKind, DEFAULT_FD_STEP};
use crate::scalar::{cis, norm_sqr, Real};

/// Analog matrix `W` (`N_t x N_RF`, constant modulus) plus one digital
/// matrix `F[k]` (`N_RF x U`) per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder<T> {
    pub analog: CMatrix<T>,
    pub digital: Vec<CMatrix<T>>,
}

impl<T: Real> HybridPrecoder<T> {
    /// Largest deviation of `|W_nm|` from `1/sqrt(N_t)`.
    pub fn modulus_error(&self) -> T {
        let r = T::one() / T::lit(self.analog.rows() as f64).sqrt();
        self.analog.as_slice().iter().map(|z| (z.norm() - r).abs()).fold(T::zero(), T::max)
    }

    /// Largest deviation of `||W f_u[k]||` from one.
    pub fn power_error(&self) -> Result<T> {
        let mut worst = T::zero();
        for fk in &self.digital {
            let wf = self.analog.matmul(fk)?;
            for u in 0..wf.cols() {
                let n = wf.column(u).iter().map(|z| norm_sqr(*z)).sum::<T>().sqrt();
                worst = worst.max((n - T::one()).abs());
            }
        }
        Ok(worst)
    }

    /// Writes `matrix,subcarrier,row,col,re,im` rows; `W` rows carry an
    /// empty subcarrier field.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "matrix,subcarrier,row,col,re,im")?;
        for r in 0..self.analog.rows() {
            for c in 0..self.analog.cols() {
                let z = self.analog[(r, c)];
                writeln!(out, "W,,{r},{c},{:e},{:e}", z.re.to_f64_lossy(), z.im.to_f64_lossy())?;
            }
        }
        for (k, fk) in self.digital.iter().enumerate() {
            for r in 0..fk.rows() {
                for c in 0..fk.cols() {
                    let z = fk[(r, c)];
                    writeln!(out, "F,{k},{r},{c},{:e},{:e}", z.re.to_f64_lossy(), z.im.to_f64_lossy())?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Alternate ZF and rate-maximizing analog design (finite-difference
    /// rate gradient) until the rate stops improving.
    ConventionalRate,
    /// Minimize interference over `W` (analytic gradient), then ZF once.
    ReducedInterference,
    /// `ConventionalRate` run against the unit-impulse ICI profile.
    NoIciBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSettings {
    pub rf_chains: usize,
    /// Outer loop stops once the rate improves by this much or less (bps/Hz).
    pub outer_tolerance: f64,
    pub max_outer_iterations: usize,
    pub cg: CgSettings,
    pub method: Method,
    /// Finite-difference step for the rate gradient.
    pub fd_step: f64,
    /// Repeat the two reduced-complexity stages until the rate settles
    /// instead of running them once.
    pub reduced_alternating: bool,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            rf_chains: 4,
            outer_tolerance: 1e-3,
            max_outer_iterations: 20,
            cg: CgSettings::default(),
            method: Method::ReducedInterference,
            fd_step: DEFAULT_FD_STEP,
            reduced_alternating: false,
        }
    }
}

impl PipelineSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tolerance > 0.0) {
            return Err(Error::invalid("outer_tolerance", "must be positive"));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::invalid("max_outer_iterations", "must be at least 1"));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::invalid("fd_step", "must be positive"));
        }
        self.cg.validate()
    }

    fn check_dimensions<T: Real>(&self, h: &ChannelRealization<T>) -> Result<()> {
        let (u, n_rf, n_t) = (h.num_users(), self.rf_chains, h.num_antennas());
        if !(u <= n_rf && n_rf <= n_t) {
            return Err(Error::invalid("rf_chains", format!("need U <= N_RF <= N_t, got {u} <= {n_rf} <= {n_t}")));
        }
        Ok(())
    }
}

/// `W_nm = exp(j theta) / sqrt(N_t)` with i.i.d. uniform phases.
pub fn init_analog<T: Real>(n_t: usize, n_rf: usize, stream: &RngStream) -> CMatrix<T> {
    let mut rng = stream.rng();
    let r = T::one() / T::lit(n_t as f64).sqrt();
    CMatrix::from_fn(n_t, n_rf, |_, _| cis(T::lit(2.0 * std::f64::consts::PI * rng.random::<f64>())) * r)
}

/// `He[k] = H[k] W`, users along rows.
pub fn effective_channel<T: Real>(hk: &CMatrix<T>, w: &CMatrix<T>) -> Result<CMatrix<T>> {
    hk.matmul(w)
}

/// `F[k] = He[k]ᴴ (He[k] He[k]ᴴ)⁻¹`.
pub fn zf_digital<T: Real>(he: &CMatrix<T>) -> Result<CMatrix<T>> {
    right_pseudo_inverse(he)
}

/// Scales each column so that `||W f_u[k]|| = 1`.
pub fn normalize_digital<T: Real>(w: &CMatrix<T>, fk: &CMatrix<T>) -> Result<CMatrix<T>> {
    normalize_at(w, fk, 0)
}

fn normalize_at<T: Real>(w: &CMatrix<T>, fk: &CMatrix<T>, subcarrier: usize) -> Result<CMatrix<T>> {
    let wf = w.matmul(fk)?;
    let mut out = fk.clone();
    for u in 0..fk.cols() {
        let n = wf.column(u).iter().map(|z| norm_sqr(*z)).sum::<T>().sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::ZeroColumn { subcarrier, column: u });
        }
        let scaled: Vec<_> = fk.column(u).iter().map(|z| *z / n).collect();
        out.set_column(u, &scaled);
    }
    Ok(out)
}

/// Effective channel, ZF and normalization for every subcarrier.
pub fn digital_stage<T: Real>(h: &ChannelRealization<T>, w: &CMatrix<T>) -> Result<Vec<CMatrix<T>>> {
    h.subcarriers()
        .iter()
        .enumerate()
        .map(|(k, hk)| {
            let he = effective_channel(hk, w)?;
            normalize_at(w, &zf_digital(&he)?, k)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientSource {
    /// Closed form; available for the interference objective only.
    Analytic,
    FiniteDifference { step: f64 },
}

/// An objective of `W` with the digital precoders held fixed.
pub struct AnalogObjective<'a, T> {
    pub kind: ObjectiveKind,
    pub channel: &'a ChannelRealization<T>,
    pub digital: &'a [CMatrix<T>],
    pub ici: &'a IciProfile<T>,
    pub psi: T,
    pub gradient: GradientSource,
}

impl<T: Real> CostFunction<T> for AnalogObjective<'_, T> {
    fn value(&self, x: &ManifoldPoint<T>) -> Result<T> {
        objective_value(self.kind, self.channel, &unvec(x), self.digital, self.ici, self.psi)
    }

    fn gradient(&self, x: &ManifoldPoint<T>) -> Result<Vec<Complex<T>>> {
        let w = unvec(x);
        let g = match (self.gradient, self.kind) {
            (GradientSource::Analytic, ObjectiveKind::NegativeInterference) => {
                grad_interference(self.channel, &w, self.digital, self.ici)?.scale(Complex::new(-T::one(), T::zero()))
            }
            (GradientSource::Analytic, kind) => {
                return Err(Error::invalid("gradient", format!("no analytic gradient for {kind:?}")));
            }
            (GradientSource::FiniteDifference { step }, kind) => {
                grad_objective_fd(kind, self.channel, &w, self.digital, self.ici, self.psi, T::lit(step))?
            }
        };
        Ok(g.to_column_major())
    }
}

fn append_trace(total: &mut Option<OptTrace>, next: OptTrace) {
    match total {
        None => *total = Some(next),
        Some(t) => {
            let offset = t.iterations();
            t.records.extend(next.records.into_iter().map(|mut r| {
                r.iteration += offset;
                r
            }));
            t.termination = next.termination;
        }
    }
}

fn optimize_analog<T: Real>(
    objective: &AnalogObjective<'_, T>,
    w: &CMatrix<T>,
    cg: &CgSettings,
) -> Result<(CMatrix<T>, OptTrace)> {
    let (x, trace) = riemannian_cg(objective, vec_precoder(w)?, cg)?;
    Ok((unvec(&x), trace))
}

/// Alternating ZF / rate-maximizing analog design. The best `(W, F)` pair
/// seen by the outer loop is returned, so the result never falls below the
/// random-initialization ZF rate.
pub fn run_conventional<T: Real>(
    h: &ChannelRealization<T>,
    ici: &IciProfile<T>,
    psi: T,
    settings: &PipelineSettings,
    stream: &RngStream,
) -> Result<(HybridPrecoder<T>, OptTrace)> {
    settings.validate()?;
    settings.check_dimensions(h)?;
    let eps = T::lit(settings.outer_tolerance);
    let mut w = init_analog(h.num_antennas(), settings.rf_chains, stream);
    let mut best: Option<(HybridPrecoder<T>, T)> = None;
    let mut previous: Option<T> = None;
    let mut trace = None;

    for outer in 0..=settings.max_outer_iterations {
        let f = digital_stage(h, &w)?;
        let rate = objective_value(ObjectiveKind::SumRateWithIci, h, &w, &f, ici, psi)?;
        if best.as_ref().is_none_or(|(_, r)| rate > *r) {
            best = Some((HybridPrecoder { analog: w.clone(), digital: f.clone() }, rate));
        }
        if previous.is_some_and(|p| !(rate - p > eps)) || outer == settings.max_outer_iterations {
            break;
        }
        previous = Some(rate);

        let objective = AnalogObjective {
            kind: ObjectiveKind::SumRateWithIci,
            channel: h,
            digital: &f,
            ici,
            psi,
            gradient: GradientSource::FiniteDifference { step: settings.fd_step },
        };
        let (w_next, t) = optimize_analog(&objective, &w, &settings.cg)?;
        append_trace(&mut trace, t);
        w = w_next;
    }
    let (precoder, _) = best.expect("outer loop runs at least once");
    Ok((precoder, trace.unwrap_or_else(empty_trace)))
}

/// Stage 1 minimizes interference over `W` with the digital precoders of
/// the initial ZF pass held fixed; stage 2 recomputes ZF for the optimized
/// `W`.
pub fn run_reduced<T: Real>(
    h: &ChannelRealization<T>,
    ici: &IciProfile<T>,
    psi: T,
    settings: &PipelineSettings,
    stream: &RngStream,
) -> Result<(HybridPrecoder<T>, OptTrace)> {
    settings.validate()?;
    settings.check_dimensions(h)?;
    let mut w = init_analog(h.num_antennas(), settings.rf_chains, stream);
    let mut f = digital_stage(h, &w)?;
    let mut trace = None;
    let rounds = if settings.reduced_alternating { settings.max_outer_iterations } else { 1 };
    let eps = T::lit(settings.outer_tolerance);
    let mut rate = objective_value(ObjectiveKind::SumRateWithIci, h, &w, &f, ici, psi)?;

    for _ in 0..rounds {
        let objective = AnalogObjective {
            kind: ObjectiveKind::NegativeInterference,
            channel: h,
            digital: &f,
            ici,
            psi,
            gradient: GradientSource::Analytic,
        };
        let (w_next, t) = optimize_analog(&objective, &w, &settings.cg)?;
        append_trace(&mut trace, t);
        let f_next = digital_stage(h, &w_next)?;
        let rate_next = objective_value(ObjectiveKind::SumRateWithIci, h, &w_next, &f_next, ici, psi)?;
        if settings.reduced_alternating && !(rate_next > rate) {
            break;
        }
        let gain = rate_next - rate;
        w = w_next;
        f = f_next;
        rate = rate_next;
        if settings.reduced_alternating && !(gain > eps) {
            break;
        }
    }
    Ok((HybridPrecoder { analog: w, digital: f }, trace.unwrap_or_else(empty_trace)))
}

/// [`run_conventional`] with ICI ignored during design.
pub fn run_no_ici_baseline<T: Real>(
    h: &ChannelRealization<T>,
    psi: T,
    settings: &PipelineSettings,
    stream: &RngStream,
) -> Result<(HybridPrecoder<T>, OptTrace)> {
    let impulse = none_profile(h.num_subcarriers())?;
    run_conventional(h, &impulse, psi, settings, stream)
}

/// Dispatches on `settings.method`.
pub fn run_pipeline<T: Real>(
    h: &ChannelRealization<T>,
    ici: &IciProfile<T>,
    psi: T,
    settings: &PipelineSettings,
    stream: &RngStream,
) -> Result<(HybridPrecoder<T>, OptTrace)> {
    match settings.method {
        Method::ConventionalRate => run_conventional(h, ici, psi, settings, stream),
        Method::ReducedInterference => run_reduced(h, ici, psi, settings, stream),
        Method::NoIciBaseline => run_no_ici_baseline(h, psi, settings, stream),
    }
}

fn empty_trace() -> OptTrace {
    OptTrace { records: Vec::new(), termination: crate::manifold::Termination::Stationary }
}
