//! Monte Carlo checks of the generated channel.

use hybridbf::channel::{generate_channel, ChannelConfig};
use hybridbf::derive_stream;

#[test]
fn mean_entry_power_matches_path_gain_times_antenna_gain() {
    let cfg = ChannelConfig { tx_antennas: 16, num_users: 1, num_subcarriers: 1, ..Default::default() };
    let n = 1000;
    let mut total = 0.0;
    for r in 0..n {
        let h = generate_channel::<f64>(&cfg, &derive_stream(11, r)).unwrap();
        total += h.user_row(0, 0).iter().map(|z| z.norm_sqr()).sum::<f64>() / 16.0;
    }
    let mean = total / n as f64;
    // independent evaluation: (c / (4 pi f d))^2 exp(-k d) * 10^(40/10)
    let expected = 1.8280148586518012e-6;
    assert!((mean / expected - 1.0).abs() < 0.1, "mean {mean:e}");
}

#[test]
fn realizations_depend_only_on_stream() {
    let cfg = ChannelConfig { tx_antennas: 16, num_subcarriers: 4, ..Default::default() };
    let a = generate_channel::<f64>(&cfg, &derive_stream(3, 9)).unwrap();
    let b = std::thread::spawn(move || generate_channel::<f64>(&cfg, &derive_stream(3, 9)).unwrap()).join().unwrap();
    assert_eq!(a, b);
}
