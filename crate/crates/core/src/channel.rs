//! Clustered (Saleh-Valenzuela style) THz channel generation.
//!
//! Each user sees `N_c` clusters of `N_ray` rays leaving a square planar
//! array of `N_t` antennas. Ray power follows the spreading and molecular
//! absorption path gain; ray phase is uniform. Antenna gains `G_t`, `G_r`
//! are given in dBi and enter the amplitude as `10^(G/20)` each.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{sample_gmm, CMatrix, GmmParams, RngStream};
use crate::scalar::Real;

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Version tag written at the top of channel dumps.
pub const CHANNEL_DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub carrier_frequency_hz: f64,
    pub link_distance_m: f64,
    pub absorption_per_m: f64,
    /// Not given by the reference parameter table; 5 is a placeholder.
    pub num_clusters: usize,
    pub rays_per_cluster: usize,
    /// Must be a perfect square.
    pub tx_antennas: usize,
    pub spacing_over_wavelength: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub num_users: usize,
    pub num_subcarriers: usize,
    pub gmm: GmmParams,
    /// When set, subcarrier `k` (0-based) uses `f + (k - (K-1)/2) * spacing`
    /// for its path gain. When unset every subcarrier shares the carrier
    /// frequency and the realization is frequency flat.
    pub subcarrier_spacing_hz: Option<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 0.35e12,
            link_distance_m: 5.0,
            absorption_per_m: 0.0033,
            num_clusters: 5,
            rays_per_cluster: 10,
            tx_antennas: 64,
            spacing_over_wavelength: 0.5,
            tx_gain_dbi: 20.0,
            rx_gain_dbi: 20.0,
            num_users: 2,
            num_subcarriers: 64,
            gmm: GmmParams::default(),
            subcarrier_spacing_hz: None,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("link_distance_m", self.link_distance_m)?;
        if !(self.absorption_per_m >= 0.0 && self.absorption_per_m.is_finite()) {
            return Err(Error::invalid("absorption_per_m", "must be finite and >= 0"));
        }
        for (name, n) in [
            ("num_clusters", self.num_clusters),
            ("rays_per_cluster", self.rays_per_cluster),
            ("num_users", self.num_users),
            ("num_subcarriers", self.num_subcarriers),
            ("tx_antennas", self.tx_antennas),
        ] {
            if n == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        array_side(self.tx_antennas)?;
        if !self.spacing_over_wavelength.is_finite() {
            return Err(Error::invalid("spacing_over_wavelength", "must be finite"));
        }
        if !self.tx_gain_dbi.is_finite() || !self.rx_gain_dbi.is_finite() {
            return Err(Error::invalid("gain_dbi", "must be finite"));
        }
        if let Some(df) = self.subcarrier_spacing_hz {
            positive("subcarrier_spacing_hz", df)?;
            let lowest = self.subcarrier_frequency(0);
            if !(lowest > 0.0) {
                return Err(Error::invalid("subcarrier_spacing_hz", "lowest subcarrier frequency is not positive"));
            }
        }
        self.gmm.validate()
    }

    /// Frequency used for subcarrier `k` (0-based).
    pub fn subcarrier_frequency(&self, k: usize) -> f64 {
        match self.subcarrier_spacing_hz {
            Some(df) => self.carrier_frequency_hz + (k as f64 - (self.num_subcarriers as f64 - 1.0) / 2.0) * df,
            None => self.carrier_frequency_hz,
        }
    }

    /// `g_t * g_r` in amplitude.
    pub fn amplitude_gain(&self) -> f64 {
        10f64.powf(self.tx_gain_dbi / 20.0) * 10f64.powf(self.rx_gain_dbi / 20.0)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive, got {v}")))
    }
}

fn array_side(n_t: usize) -> Result<usize> {
    let side = (n_t as f64).sqrt().round() as usize;
    if side * side != n_t || n_t == 0 {
        return Err(Error::invalid("tx_antennas", format!("{n_t} is not a perfect square")));
    }
    Ok(side)
}

/// Linear power gain `(c / (4 pi f d))^2 * exp(-k_abs d)`.
pub fn path_gain(frequency_hz: f64, distance_m: f64, absorption_per_m: f64) -> Result<f64> {
    positive("frequency", frequency_hz)?;
    positive("distance", distance_m)?;
    if !(absorption_per_m >= 0.0) {
        return Err(Error::invalid("absorption", "must be >= 0"));
    }
    let spreading = (SPEED_OF_LIGHT / (4.0 * PI * frequency_hz * distance_m)).powi(2);
    Ok(spreading * (-absorption_per_m * distance_m).exp())
}

/// Unit-norm response of a square planar array.
///
/// Entry `p * side + q` is
/// `exp(j 2 pi (d/lambda) (p sin(phi) sin(theta) + q cos(theta))) / sqrt(N_t)`
/// with `p` the horizontal and `q` the vertical index.
pub fn array_response<T: Real>(
    azimuth: f64,
    elevation: f64,
    n_t: usize,
    spacing_over_wavelength: f64,
) -> Result<Vec<Complex<T>>> {
    let side = array_side(n_t)?;
    let amp = 1.0 / (n_t as f64).sqrt();
    let u = azimuth.sin() * elevation.sin();
    let v = elevation.cos();
    let mut out = Vec::with_capacity(n_t);
    for p in 0..side {
        for q in 0..side {
            let phase = 2.0 * PI * spacing_over_wavelength * (p as f64 * u + q as f64 * v);
            out.push(Complex::new(T::lit(amp * phase.cos()), T::lit(amp * phase.sin())));
        }
    }
    Ok(out)
}

/// Angles of departure for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAngles {
    /// Cluster azimuth, uniform on (-pi, pi].
    pub cluster_azimuth: Vec<f64>,
    /// Cluster elevation, uniform on [-pi/2, pi/2].
    pub cluster_elevation: Vec<f64>,
    /// `[cluster][ray]` offsets from the mixture sampler.
    pub ray_azimuth_offset: Vec<Vec<f64>>,
    pub ray_elevation_offset: Vec<Vec<f64>>,
}

impl ClusterAngles {
    pub fn num_clusters(&self) -> usize {
        self.cluster_azimuth.len()
    }

    pub fn rays_per_cluster(&self) -> usize {
        self.ray_azimuth_offset.first().map_or(0, Vec::len)
    }

    pub fn total_azimuth(&self, cluster: usize, ray: usize) -> f64 {
        self.cluster_azimuth[cluster] + self.ray_azimuth_offset[cluster][ray]
    }

    pub fn total_elevation(&self, cluster: usize, ray: usize) -> f64 {
        self.cluster_elevation[cluster] + self.ray_elevation_offset[cluster][ray]
    }
}

pub fn sample_angles<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> Result<ClusterAngles> {
    let nc = cfg.num_clusters;
    let nr = cfg.rays_per_cluster;
    // pi - 2 pi u with u in [0, 1) lands in (-pi, pi]
    let cluster_azimuth: Vec<f64> = (0..nc).map(|_| PI - 2.0 * PI * rng.random::<f64>()).collect();
    let cluster_elevation: Vec<f64> = (0..nc).map(|_| -PI / 2.0 + PI * rng.random::<f64>()).collect();
    let mut ray_azimuth_offset = Vec::with_capacity(nc);
    let mut ray_elevation_offset = Vec::with_capacity(nc);
    for _ in 0..nc {
        ray_azimuth_offset.push((0..nr).map(|_| sample_gmm(&cfg.gmm, rng)).collect::<Result<Vec<_>>>()?);
        ray_elevation_offset.push((0..nr).map(|_| sample_gmm(&cfg.gmm, rng)).collect::<Result<Vec<_>>>()?);
    }
    Ok(ClusterAngles { cluster_azimuth, cluster_elevation, ray_azimuth_offset, ray_elevation_offset })
}

/// Random quantities drawn for one user: angles and per-ray gain phases.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDraw {
    pub angles: ClusterAngles,
    /// `[cluster][ray]`, uniform on [0, 2 pi).
    pub phases: Vec<Vec<f64>>,
}

pub fn sample_user<R: Rng + ?Sized>(cfg: &ChannelConfig, rng: &mut R) -> Result<UserDraw> {
    let angles = sample_angles(cfg, rng)?;
    let phases = (0..cfg.num_clusters)
        .map(|_| (0..cfg.rays_per_cluster).map(|_| 2.0 * PI * rng.random::<f64>()).collect())
        .collect();
    Ok(UserDraw { angles, phases })
}

/// Frequency-domain multiuser channel: one `U x N_t` matrix per subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    subcarriers: Vec<CMatrix<T>>,
    pub config: Option<ChannelConfig>,
    pub stream_id: Option<u64>,
}

impl<T: Real> ChannelRealization<T> {
    /// Wraps explicit per-subcarrier matrices (all `U x N_t`).
    pub fn from_subcarriers(subcarriers: Vec<CMatrix<T>>) -> Result<Self> {
        let first = subcarriers.first().ok_or_else(|| Error::Dimension("channel needs at least one subcarrier".into()))?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::Dimension("channel matrices must be non-empty".into()));
        }
        if subcarriers.iter().any(|m| m.shape() != shape) {
            return Err(Error::Dimension("all subcarrier matrices must share one shape".into()));
        }
        if subcarriers.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("channel"));
        }
        Ok(Self { subcarriers, config: None, stream_id: None })
    }

    pub fn num_users(&self) -> usize {
        self.subcarriers[0].rows()
    }

    pub fn num_antennas(&self) -> usize {
        self.subcarriers[0].cols()
    }

    pub fn num_subcarriers(&self) -> usize {
        self.subcarriers.len()
    }

    /// `H[k]`.
    pub fn subcarrier(&self, k: usize) -> &CMatrix<T> {
        &self.subcarriers[k]
    }

    pub fn subcarriers(&self) -> &[CMatrix<T>] {
        &self.subcarriers
    }

    /// `h_q[k]`, the `1 x N_t` row of user `q`.
    pub fn user_row(&self, q: usize, k: usize) -> &[Complex<T>] {
        self.subcarriers[k].row(q)
    }

    /// Same realization with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        let s = Complex::new(factor, T::zero());
        Self {
            subcarriers: self.subcarriers.iter().map(|m| m.scale(s)).collect(),
            config: self.config.clone(),
            stream_id: self.stream_id,
        }
    }

    /// Keeps only the listed users, in the given order.
    pub fn select_users(&self, users: &[usize]) -> Result<Self> {
        if users.is_empty() || users.iter().any(|&u| u >= self.num_users()) {
            return Err(Error::Dimension(format!("invalid user selection {users:?}")));
        }
        let subcarriers = self
            .subcarriers
            .iter()
            .map(|m| CMatrix::from_fn(users.len(), m.cols(), |r, c| m[(users[r], c)]))
            .collect();
        Ok(Self { subcarriers, config: None, stream_id: self.stream_id })
    }

    /// CSV dump: a `# hybridbf channel v1 ...` comment line followed by
    /// `user,subcarrier,antenna,re,im` rows (0-based indices).
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# hybridbf channel v{CHANNEL_DUMP_VERSION} users={} subcarriers={} antennas={}",
            self.num_users(),
            self.num_subcarriers(),
            self.num_antennas()
        )?;
        writeln!(out, "user,subcarrier,antenna,re,im")?;
        for q in 0..self.num_users() {
            for k in 0..self.num_subcarriers() {
                for (n, h) in self.user_row(q, k).iter().enumerate() {
                    writeln!(out, "{q},{k},{n},{:e},{:e}", h.re.to_f64_lossy(), h.im.to_f64_lossy())?;
                }
            }
        }
        Ok(())
    }

    pub fn to_dump(&self) -> ChannelDump {
        let mut entries = Vec::with_capacity(self.num_users() * self.num_subcarriers() * self.num_antennas());
        for q in 0..self.num_users() {
            for k in 0..self.num_subcarriers() {
                for (n, h) in self.user_row(q, k).iter().enumerate() {
                    entries.push(ChannelEntry { user: q, subcarrier: k, antenna: n, re: h.re.to_f64_lossy(), im: h.im.to_f64_lossy() });
                }
            }
        }
        ChannelDump {
            version: CHANNEL_DUMP_VERSION,
            users: self.num_users(),
            subcarriers: self.num_subcarriers(),
            antennas: self.num_antennas(),
            stream_id: self.stream_id,
            config: self.config.clone(),
            entries,
        }
    }

    pub fn from_dump(dump: &ChannelDump) -> Result<Self> {
        if dump.version != CHANNEL_DUMP_VERSION {
            return Err(Error::invalid("version", format!("unsupported channel dump version {}", dump.version)));
        }
        let (u, kc, n) = (dump.users, dump.subcarriers, dump.antennas);
        if dump.entries.len() != u * kc * n {
            return Err(Error::Dimension(format!("dump holds {} entries, expected {}", dump.entries.len(), u * kc * n)));
        }
        let mut subcarriers = vec![CMatrix::zeros(u, n); kc];
        for e in &dump.entries {
            if e.user >= u || e.subcarrier >= kc || e.antenna >= n {
                return Err(Error::Dimension(format!("entry index out of range: {e:?}")));
            }
            subcarriers[e.subcarrier][(e.user, e.antenna)] = Complex::new(T::lit(e.re), T::lit(e.im));
        }
        let mut h = Self::from_subcarriers(subcarriers)?;
        h.config = dump.config.clone();
        h.stream_id = dump.stream_id;
        Ok(h)
    }
}

/// JSON form of a channel dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDump {
    pub version: u32,
    pub users: usize,
    pub subcarriers: usize,
    pub antennas: usize,
    pub stream_id: Option<u64>,
    pub config: Option<ChannelConfig>,
    pub entries: Vec<ChannelEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelEntry {
    pub user: usize,
    pub subcarrier: usize,
    pub antenna: usize,
    pub re: f64,
    pub im: f64,
}

/// Draws a realization: angles and phases are sampled per user, in user
/// order, from `stream`.
pub fn generate_channel<T: Real>(cfg: &ChannelConfig, stream: &RngStream) -> Result<ChannelRealization<T>> {
    cfg.validate()?;
    let mut rng = stream.rng();
    let draws = (0..cfg.num_users).map(|_| sample_user(cfg, &mut rng)).collect::<Result<Vec<_>>>()?;
    let mut h = assemble_channel(cfg, &draws)?;
    h.stream_id = Some(stream.stream_id);
    Ok(h)
}

/// Evaluates
/// `h_q[k] = sqrt(N_t / (N_c N_ray)) * g_t g_r * sum_ij alpha_ij(f_k) a(phi_ij, theta_ij)`
/// for given per-user draws.
pub fn assemble_channel<T: Real>(cfg: &ChannelConfig, draws: &[UserDraw]) -> Result<ChannelRealization<T>> {
    cfg.validate()?;
    if draws.len() != cfg.num_users {
        return Err(Error::Dimension(format!("{} user draws for {} users", draws.len(), cfg.num_users)));
    }
    let n_t = cfg.tx_antennas;
    let (nc, nr) = (cfg.num_clusters, cfg.rays_per_cluster);
    let prefactor = (n_t as f64 / (nc * nr) as f64).sqrt() * cfg.amplitude_gain();

    // Array responses depend only on angles, so they are shared by all
    // subcarriers of a user.
    let mut responses = Vec::with_capacity(draws.len());
    for d in draws {
        if d.angles.num_clusters() != nc || d.angles.rays_per_cluster() != nr || d.phases.len() != nc {
            return Err(Error::Dimension("user draw does not match cluster/ray counts".into()));
        }
        let mut per_user = Vec::with_capacity(nc * nr);
        for i in 0..nc {
            for j in 0..nr {
                per_user.push(array_response::<f64>(
                    d.angles.total_azimuth(i, j),
                    d.angles.total_elevation(i, j),
                    n_t,
                    cfg.spacing_over_wavelength,
                )?);
            }
        }
        responses.push(per_user);
    }

    let mut subcarriers: Vec<CMatrix<T>> = Vec::with_capacity(cfg.num_subcarriers);
    for k in 0..cfg.num_subcarriers {
        if cfg.subcarrier_spacing_hz.is_none() && k > 0 {
            subcarriers.push(subcarriers[0].clone());
            continue;
        }
        let amplitude = path_gain(cfg.subcarrier_frequency(k), cfg.link_distance_m, cfg.absorption_per_m)?.sqrt();
        let mut hk = CMatrix::zeros(cfg.num_users, n_t);
        for (q, d) in draws.iter().enumerate() {
            let mut row = vec![Complex::new(0.0f64, 0.0); n_t];
            for i in 0..nc {
                for j in 0..nr {
                    let alpha = Complex::from_polar(amplitude, d.phases[i][j]);
                    for (acc, a) in row.iter_mut().zip(&responses[q][i * nr + j]) {
                        *acc += alpha * a;
                    }
                }
            }
            for (n, v) in row.into_iter().enumerate() {
                let v = v * prefactor;
                hk[(q, n)] = Complex::new(T::lit(v.re), T::lit(v.im));
            }
        }
        subcarriers.push(hk);
    }
    let mut h = ChannelRealization::from_subcarriers(subcarriers)?;
    h.config = Some(cfg.clone());
    Ok(h)
}
