#![allow(dead_code)]

use hybridbf::channel::ChannelRealization;
use hybridbf::precoding::{digital_stage, init_analog};
use hybridbf::{derive_stream, CMatrix, Complex};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix<f64> {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Frequency-selective random channel with i.i.d. complex Gaussian entries.
pub fn random_channel(users: usize, antennas: usize, subcarriers: usize, seed: u64) -> ChannelRealization<f64> {
    let mut rng = derive_stream(seed, 0).rng();
    let hs = (0..subcarriers).map(|_| gaussian_matrix(users, antennas, &mut rng)).collect();
    ChannelRealization::from_subcarriers(hs).unwrap()
}

pub struct Instance {
    pub h: ChannelRealization<f64>,
    pub w: CMatrix<f64>,
    pub f: Vec<CMatrix<f64>>,
}

/// Random channel, random constant-modulus `W`, random (non-ZF) digital stack.
pub fn random_instance(users: usize, antennas: usize, rf: usize, subcarriers: usize, seed: u64) -> Instance {
    let h = random_channel(users, antennas, subcarriers, seed);
    let w = init_analog(antennas, rf, &derive_stream(seed, 1));
    let mut rng = derive_stream(seed, 2).rng();
    let f = (0..subcarriers).map(|_| gaussian_matrix(rf, users, &mut rng)).collect();
    Instance { h, w, f }
}

/// Same as [`random_instance`] but with the ZF digital stage.
pub fn zf_instance(users: usize, antennas: usize, rf: usize, subcarriers: usize, seed: u64) -> Instance {
    let mut inst = random_instance(users, antennas, rf, subcarriers, seed);
    inst.f = digital_stage(&inst.h, &inst.w).unwrap();
    inst
}
