//! Rate and interference objectives of the ICI-impaired downlink, and their
//! gradients with respect to the analog precoder `W`.
//!
//! Notation: `h_q[i]` is user `q`'s channel row on subcarrier `i`, `f_u[i]`
//! is column `u` of `F[i]`, and `c(q, i, u) = h_q[i] W f_u[i]` is the
//! complex link gain from stream `u` on subcarrier `i` to user `q`.
//!
//! The interference seen by user `q` on subcarrier `k` sums
//! `|S_{i-k}|^2 |c(q, i, u)|^2` over every `(u, i)` except `(q, k)`: the
//! user's own stream on other subcarriers and every other user's stream on
//! all subcarriers, including `k`.
//!
//! Gradients follow the Wirtinger convention: for a real `f`, the returned
//! matrix is `df/dW*`, which is half of `df/dRe(W) + j df/dIm(W)` and is an
//! ascent direction.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::ici::{none_profile, IciProfile};
use crate::mathcore::CMatrix;
use crate::scalar::{norm_sqr, Real};

/// Noise-to-signal power ratio `psi = sigma_n^2 / P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    psi: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(psi: T) -> Result<Self> {
        if !(psi > T::zero()) || !psi.is_finite() {
            return Err(Error::invalid("psi", "must be positive and finite"));
        }
        Ok(Self { psi })
    }

    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(T::lit(10f64.powf(-snr_db / 10.0)))
    }

    pub fn psi(&self) -> T {
        self.psi
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.psi.to_f64_lossy().log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObjectiveKind {
    /// System rate under the supplied ICI profile.
    SumRateWithIci,
    /// System rate with the ICI profile replaced by the unit impulse.
    SumRateNoIci,
    /// Minus the total interference power, so maximizing it minimizes
    /// interference.
    NegativeInterference,
}

/// All link gains `c(q, i, u)` of one precoder on one channel.
#[derive(Debug, Clone)]
pub struct LinkGains<T> {
    users: usize,
    subcarriers: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> LinkGains<T> {
    pub fn compute(h: &ChannelRealization<T>, w: &CMatrix<T>, f: &[CMatrix<T>]) -> Result<Self> {
        check_shapes(h, w, f)?;
        let (u_count, k_count) = (h.num_users(), h.num_subcarriers());
        let mut data = Vec::with_capacity(u_count * k_count * u_count);
        for q in 0..u_count {
            for i in 0..k_count {
                let hw = w.left_mul_row(h.user_row(q, i))?;
                let fi = &f[i];
                for u in 0..u_count {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (m, x) in hw.iter().enumerate() {
                        acc = acc + *x * fi[(m, u)];
                    }
                    data.push(acc);
                }
            }
        }
        Ok(Self { users: u_count, subcarriers: k_count, data })
    }

    #[inline]
    pub fn get(&self, q: usize, i: usize, u: usize) -> Complex<T> {
        self.data[self.slot(q, i, u)]
    }

    #[inline]
    fn slot(&self, q: usize, i: usize, u: usize) -> usize {
        (q * self.subcarriers + i) * self.users + u
    }

    /// `(signal, interference)` of cell `(q, k)`.
    pub fn cell(&self, ici: &IciProfile<T>, q: usize, k: usize) -> (T, T) {
        let signal = ici.weight(0) * norm_sqr(self.get(q, k, q));
        let mut interference = T::zero();
        for u in 0..self.users {
            for i in 0..self.subcarriers {
                if u == q && i == k {
                    continue;
                }
                let w = ici.weight(i as isize - k as isize);
                if w != T::zero() {
                    interference = interference + w * norm_sqr(self.get(q, i, u));
                }
            }
        }
        (signal, interference)
    }

    pub fn sum_rate(&self, ici: &IciProfile<T>, psi: T) -> T {
        let mut total = T::zero();
        for q in 0..self.users {
            for k in 0..self.subcarriers {
                let (s, i) = self.cell(ici, q, k);
                total = total + (T::one() + s / (i + psi)).log2();
            }
        }
        total / T::lit(self.users as f64)
    }

    pub fn interference_power(&self, ici: &IciProfile<T>) -> T {
        let mut total = T::zero();
        for q in 0..self.users {
            for k in 0..self.subcarriers {
                total = total + self.cell(ici, q, k).1;
            }
        }
        total
    }
}

fn check_shapes<T: Real>(h: &ChannelRealization<T>, w: &CMatrix<T>, f: &[CMatrix<T>]) -> Result<()> {
    let (u, n_t, k) = (h.num_users(), h.num_antennas(), h.num_subcarriers());
    if w.rows() != n_t {
        return Err(Error::Dimension(format!("W has {} rows but the array has {n_t} antennas", w.rows())));
    }
    if f.len() != k {
        return Err(Error::Dimension(format!("{} digital precoders for {k} subcarriers", f.len())));
    }
    for (i, fk) in f.iter().enumerate() {
        if fk.shape() != (w.cols(), u) {
            return Err(Error::Dimension(format!(
                "F[{i}] is {:?}, expected {}x{u}",
                fk.shape(),
                w.cols()
            )));
        }
    }
    Ok(())
}

fn check_ici<T: Real>(h: &ChannelRealization<T>, ici: &IciProfile<T>) -> Result<()> {
    if ici.num_subcarriers() != h.num_subcarriers() {
        return Err(Error::Dimension(format!(
            "ICI profile built for K = {} but channel has {} subcarriers",
            ici.num_subcarriers(),
            h.num_subcarriers()
        )));
    }
    Ok(())
}

fn check_cell<T: Real>(h: &ChannelRealization<T>, q: usize, k: usize) -> Result<()> {
    if q >= h.num_users() || k >= h.num_subcarriers() {
        return Err(Error::Dimension(format!("cell ({q}, {k}) outside channel")));
    }
    Ok(())
}

/// Signal-to-interference-plus-noise ratio of user `q` on subcarrier `k`.
pub fn sinr<T: Real>(
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
    psi: T,
    q: usize,
    k: usize,
) -> Result<T> {
    check_ici(h, ici)?;
    check_cell(h, q, k)?;
    let (s, i) = LinkGains::compute(h, w, f)?.cell(ici, q, k);
    Ok(s / (i + psi))
}

/// `log2(1 + sinr)` of user `q` on subcarrier `k`, in bps/Hz.
pub fn per_user_rate<T: Real>(
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
    psi: T,
    q: usize,
    k: usize,
) -> Result<T> {
    Ok((T::one() + sinr(h, w, f, ici, psi, q, k)?).log2())
}

/// `(1/U) sum_q sum_k rate(q, k)`.
pub fn sum_rate<T: Real>(
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
    psi: T,
) -> Result<T> {
    check_ici(h, ici)?;
    Ok(LinkGains::compute(h, w, f)?.sum_rate(ici, psi))
}

/// Total interference power over all `(q, k)` cells.
pub fn interference_power<T: Real>(
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
) -> Result<T> {
    check_ici(h, ici)?;
    Ok(LinkGains::compute(h, w, f)?.interference_power(ici))
}

pub fn objective_value<T: Real>(
    kind: ObjectiveKind,
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
    psi: T,
) -> Result<T> {
    check_ici(h, ici)?;
    let gains = LinkGains::compute(h, w, f)?;
    let impulse = none_profile(h.num_subcarriers())?;
    Ok(evaluate(kind, &gains, ici, &impulse, psi))
}

fn evaluate<T: Real>(kind: ObjectiveKind, gains: &LinkGains<T>, ici: &IciProfile<T>, impulse: &IciProfile<T>, psi: T) -> T {
    match kind {
        ObjectiveKind::SumRateWithIci => gains.sum_rate(ici, psi),
        ObjectiveKind::SumRateNoIci => gains.sum_rate(impulse, psi),
        ObjectiveKind::NegativeInterference => -gains.interference_power(ici),
    }
}

/// Analytic `d(interference_power)/dW*`:
/// `sum |S_{i-k}|^2 c(q, i, u) h_q[i]ᴴ f_u[i]ᴴ` over the interference index set.
pub fn grad_interference<T: Real>(
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
) -> Result<CMatrix<T>> {
    check_ici(h, ici)?;
    let gains = LinkGains::compute(h, w, f)?;
    let (u_count, k_count) = (h.num_users(), h.num_subcarriers());
    let mut grad = CMatrix::zeros(w.rows(), w.cols());
    for q in 0..u_count {
        for i in 0..k_count {
            let h_row = h.user_row(q, i);
            for u in 0..u_count {
                // Total leakage weight of link (q, i, u) across all cells k.
                let mut omega = T::zero();
                for k in 0..k_count {
                    if u == q && i == k {
                        continue;
                    }
                    omega = omega + ici.weight(i as isize - k as isize);
                }
                if omega == T::zero() {
                    continue;
                }
                let coeff = gains.get(q, i, u) * omega;
                let fu = f[i].column(u);
                for (n, hn) in h_row.iter().enumerate() {
                    let left = coeff * hn.conj();
                    for (m, fm) in fu.iter().enumerate() {
                        grad[(n, m)] = grad[(n, m)] + left * fm.conj();
                    }
                }
            }
        }
    }
    Ok(grad)
}

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Central-difference Wirtinger gradient of `kind` with respect to `W*`.
///
/// Entry `(n, m)` is perturbed by `±t` and `±j t` with
/// `t = h_step * |W_nm|` (or `h_step` for a zero entry). Each perturbation
/// moves every link gain by a rank-one term, so the objective is
/// re-evaluated from updated gains rather than from scratch.
pub fn grad_objective_fd<T: Real>(
    kind: ObjectiveKind,
    h: &ChannelRealization<T>,
    w: &CMatrix<T>,
    f: &[CMatrix<T>],
    ici: &IciProfile<T>,
    psi: T,
    h_step: T,
) -> Result<CMatrix<T>> {
    if !(h_step > T::zero()) {
        return Err(Error::invalid("h_step", "must be positive"));
    }
    check_ici(h, ici)?;
    let base = LinkGains::compute(h, w, f)?;
    let impulse = none_profile(h.num_subcarriers())?;
    let (u_count, k_count) = (h.num_users(), h.num_subcarriers());
    let mut probe = base.clone();
    let mut grad = CMatrix::zeros(w.rows(), w.cols());
    let two = T::lit(2.0);

    // sensitivity[(q, i, u)] of c to W_nm is h_q[i][n] * F[i][m, u]
    let mut eval = |delta: Complex<T>, n: usize, m: usize| -> T {
        for q in 0..u_count {
            for i in 0..k_count {
                let hn = h.user_row(q, i)[n];
                for u in 0..u_count {
                    let s = base.slot(q, i, u);
                    probe.data[s] = base.data[s] + delta * hn * f[i][(m, u)];
                }
            }
        }
        evaluate(kind, &probe, ici, &impulse, psi)
    };

    for n in 0..w.rows() {
        for m in 0..w.cols() {
            let mag = w[(n, m)].norm();
            let t = if mag > T::zero() { h_step * mag } else { h_step };
            let re = (eval(Complex::new(t, T::zero()), n, m) - eval(Complex::new(-t, T::zero()), n, m)) / (two * t);
            let im = (eval(Complex::new(T::zero(), t), n, m) - eval(Complex::new(T::zero(), -t), n, m)) / (two * t);
            grad[(n, m)] = Complex::new(re, im) / two;
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ici::{cfo_profile, scalar_profile};

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn scalar_case(k: usize, gains: &[f64]) -> (ChannelRealization<f64>, CMatrix<f64>, Vec<CMatrix<f64>>) {
        let h = ChannelRealization::from_subcarriers(
            gains.iter().map(|g| CMatrix::from_row_major(1, 1, vec![c(*g)]).unwrap()).collect(),
        )
        .unwrap();
        assert_eq!(h.num_subcarriers(), k);
        (h, CMatrix::identity(1), vec![CMatrix::identity(1); k])
    }

    #[test]
    fn scalar_link_without_interference() {
        let (h, w, f) = scalar_case(1, &[1.0]);
        let none = none_profile(1).unwrap();
        assert_eq!(per_user_rate(&h, &w, &f, &none, 1.0, 0, 0).unwrap(), 1.0);
        assert_eq!(sum_rate(&h, &w, &f, &none, 1.0).unwrap(), 1.0);
        assert_eq!(interference_power(&h, &w, &f, &none).unwrap(), 0.0);
    }

    #[test]
    fn two_subcarrier_hand_value() {
        // log2(1 + 1 / (0.01 + 0.1))
        let (h, w, f) = scalar_case(2, &[1.0, 1.0]);
        let ici = scalar_profile(2, 0.1).unwrap();
        let r = per_user_rate(&h, &w, &f, &ici, 0.1, 0, 0).unwrap();
        let expected = (1.0f64 + 1.0 / 0.11).log2();
        assert!((r - expected).abs() < 1e-12);
        assert!((r - 3.33).abs() < 0.01);
        assert!((interference_power(&h, &w, &f, &ici).unwrap() - 2.0 * 0.01).abs() < 1e-15);
    }

    #[test]
    fn zero_channel_has_zero_rate_and_gradient() {
        let h = ChannelRealization::from_subcarriers(vec![CMatrix::<f64>::zeros(2, 4); 3]).unwrap();
        let w = CMatrix::from_fn(4, 2, |_, _| c(0.5));
        let f = vec![CMatrix::identity(2); 3];
        let ici = scalar_profile(3, 0.2).unwrap();
        assert_eq!(sum_rate(&h, &w, &f, &ici, 0.1).unwrap(), 0.0);
        let g = grad_objective_fd(ObjectiveKind::SumRateWithIci, &h, &w, &f, &ici, 0.1, 1e-5).unwrap();
        assert_eq!(g.max_abs(), 0.0);
        assert_eq!(grad_interference(&h, &w, &f, &ici).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn zero_cfo_profile_gives_interference_free_rate() {
        let (h, w, f) = scalar_case(3, &[1.0, 0.5, 2.0]);
        let psi = 0.3;
        let zero_cfo = cfo_profile(3, 0.0).unwrap();
        for k in 0..3 {
            let g = h.user_row(0, k)[0].norm_sqr();
            let expected = (1.0 + g / psi).log2();
            assert_eq!(per_user_rate(&h, &w, &f, &zero_cfo, psi, 0, k).unwrap(), expected);
        }
    }

    #[test]
    fn dimension_errors() {
        let (h, w, f) = scalar_case(2, &[1.0, 1.0]);
        let ici = none_profile(3).unwrap();
        assert!(matches!(sum_rate(&h, &w, &f, &ici, 1.0), Err(Error::Dimension(_))));
        let ici = none_profile(2).unwrap();
        assert!(sum_rate(&h, &w, &f[..1], &ici, 1.0).is_err());
        assert!(sum_rate(&h, &CMatrix::identity(2), &f, &ici, 1.0).is_err());
        assert!(per_user_rate(&h, &w, &f, &ici, 1.0, 1, 0).is_err());
    }

    #[test]
    fn wirtinger_convention_on_modulus_squared() {
        // f(W) = |h W f|^2 with h = f = 1 is |w|^2 -> gradient w
        let (h, _, f) = scalar_case(2, &[1.0, 0.0]);
        let ici = scalar_profile(2, 0.5).unwrap();
        // only cell (0, 1) sees |S_1|^2 |w|^2 from subcarrier 0
        let w = CMatrix::from_row_major(1, 1, vec![Complex::new(0.3, -0.7)]).unwrap();
        let fd = grad_objective_fd(ObjectiveKind::NegativeInterference, &h, &w, &f, &ici, 1.0, 1e-5).unwrap();
        let expected = -w[(0, 0)] * 0.25;
        assert!((fd[(0, 0)] - expected).norm() < 1e-10, "{}", fd[(0, 0)]);
        let analytic = grad_interference(&h, &w, &f, &ici).unwrap();
        assert!((analytic[(0, 0)] + expected).norm() < 1e-15);
    }

    #[test]
    fn noise_model_conversions() {
        let n = NoiseModel::<f64>::from_snr_db(20.0).unwrap();
        assert!((n.psi() - 0.01).abs() < 1e-15);
        assert!((n.snr_db() - 20.0).abs() < 1e-12);
        assert!(NoiseModel::new(0.0f64).is_err());
    }
}
