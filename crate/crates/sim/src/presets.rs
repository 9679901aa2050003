//! Built-in experiments, one per study, each at two scales.
//!
//! `full` presets use the reference scenario (K = 64, 0.35 THz, up to 225
//! antennas and 9 users). `desk` presets shrink to K = 16, N_t <= 64 and
//! U <= 4 so that a sweep finishes in minutes.
//!
//! Some reference parameter sets are infeasible, so the full presets deviate:
//! - 8 RF chains for 9 users in the ICI studies becomes 9 RF chains.
//! - An upper antenna count of 255 is not a square array. 225 is used.
//! - The user study stops at 9 users because it has 9 RF chains.

use hybridbf::channel::ChannelConfig;
use hybridbf::ici::IciMode;
use hybridbf::precoding::PipelineSettings;

use crate::config::{ExperimentConfig, MethodName, Sweep, SweepAxis};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

impl Scale {
    fn as_str(self) -> &'static str {
        match self {
            Self::Desk => "desk",
            Self::Full => "full",
        }
    }
}

/// Study identifiers, with a one-line description each.
pub const STUDIES: [(&str, &str); 12] = [
    ("performance", "conventional vs reduced over SNR"),
    ("timing", "design time of conventional vs reduced"),
    ("ici-gap", "reduced design vs an ICI-free system over SNR"),
    ("ici-coefficient", "reduced design over the ICI coefficient S"),
    ("antennas", "transmit antenna count"),
    ("rf-chains", "RF chain count"),
    ("users", "user count"),
    ("cases-ici", "three ICI cases over S"),
    ("cases-antennas", "three ICI cases over transmit antennas"),
    ("cases-rf-chains", "three ICI cases over RF chains"),
    ("cases-users", "three ICI cases over users"),
    ("distance", "three ICI cases over link distance"),
];

const THREE_CASES: [MethodName; 3] = [MethodName::Conventional, MethodName::NoIci, MethodName::NoIciIdeal];

/// All preset names, `<study>-desk` and `<study>-full`.
pub fn preset_names() -> Vec<String> {
    STUDIES
        .iter()
        .flat_map(|(f, _)| [Scale::Desk, Scale::Full].map(|s| format!("{f}-{}", s.as_str())))
        .collect()
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let (study, scale) = match name.rsplit_once('-')? {
        (f, "desk") => (f, Scale::Desk),
        (f, "full") => (f, Scale::Full),
        _ => return None,
    };
    study_preset(study, scale)
}

fn base(scale: Scale, n_t: usize, users: usize, rf: usize) -> ExperimentConfig {
    let desk = scale == Scale::Desk;
    ExperimentConfig {
        channel: ChannelConfig {
            tx_antennas: n_t,
            num_users: users,
            num_subcarriers: if desk { 16 } else { 64 },
            ..Default::default()
        },
        snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
        ici: IciMode::Scalar { s: 0.3 },
        methods: vec![MethodName::Reduced],
        sweep: None,
        realizations: 20,
        seed: 1,
        pipeline: PipelineSettings { rf_chains: rf, ..Default::default() },
        output: None,
        timing: false,
        fixed_precoders: false,
    }
}

fn sweep(axis: SweepAxis, values: &[f64]) -> Option<Sweep> {
    Some(Sweep { axis, values: values.to_vec() })
}

fn study_preset(study: &str, scale: Scale) -> Option<ExperimentConfig> {
    let desk = scale == Scale::Desk;
    // (N_t, U, N_RF) of the full scenario, or the desk stand-in
    let pick = |full: (usize, usize, usize)| if desk { base(scale, 64, 2, 4) } else { base(scale, full.0, full.1, full.2) };
    let cfg = match study {
        "performance" => ExperimentConfig {
            methods: vec![MethodName::Conventional, MethodName::Reduced],
            ..pick((64, 9, 10))
        },
        "timing" => ExperimentConfig {
            snr_db: vec![10.0],
            methods: vec![MethodName::Conventional, MethodName::Reduced],
            timing: true,
            ..pick((64, 9, 10))
        },
        "ici-gap" => ExperimentConfig { methods: vec![MethodName::Reduced, MethodName::NoIciIdeal], ..pick((169, 9, 9)) },
        "ici-coefficient" => ExperimentConfig { sweep: sweep(SweepAxis::IciS, &[0.1, 0.2, 0.3]), ..pick((169, 9, 9)) },
        "antennas" => {
            let values: &[f64] = if desk { &[16.0, 36.0, 64.0] } else { &[81.0, 121.0, 169.0, 225.0] };
            ExperimentConfig {
                sweep: sweep(SweepAxis::NT, values),
                methods: vec![MethodName::Conventional, MethodName::Reduced],
                ..pick((81, 9, 9))
            }
        }
        "rf-chains" => {
            let values: &[f64] = if desk { &[2.0, 3.0, 4.0] } else { &[9.0, 11.0, 13.0, 15.0] };
            ExperimentConfig {
                sweep: sweep(SweepAxis::NRf, values),
                methods: vec![MethodName::Conventional, MethodName::Reduced],
                ..pick((81, 9, 9))
            }
        }
        "users" => {
            let values: &[f64] = if desk { &[1.0, 2.0, 4.0] } else { &[1.0, 4.0, 9.0] };
            ExperimentConfig {
                sweep: sweep(SweepAxis::Users, values),
                methods: vec![MethodName::Conventional, MethodName::Reduced],
                ..pick((81, 9, 9))
            }
        }
        "cases-ici" => ExperimentConfig {
            sweep: sweep(SweepAxis::IciS, &[0.0, 0.1, 0.2, 0.3]),
            methods: THREE_CASES.to_vec(),
            ..pick((64, 9, 15))
        },
        "cases-antennas" => {
            let values: &[f64] = if desk { &[16.0, 36.0, 64.0] } else { &[25.0, 49.0, 81.0, 121.0, 169.0] };
            ExperimentConfig { sweep: sweep(SweepAxis::NT, values), methods: THREE_CASES.to_vec(), ..pick((64, 9, 10)) }
        }
        "cases-rf-chains" => {
            let values: &[f64] = if desk { &[2.0, 3.0, 4.0] } else { &[10.0, 11.0, 12.0, 13.0, 14.0, 15.0] };
            ExperimentConfig { sweep: sweep(SweepAxis::NRf, values), methods: THREE_CASES.to_vec(), ..pick((64, 9, 10)) }
        }
        "cases-users" => {
            let values: Vec<f64> = if desk { vec![1.0, 2.0, 3.0, 4.0] } else { (1..=9).map(f64::from).collect() };
            ExperimentConfig { sweep: sweep(SweepAxis::Users, &values), methods: THREE_CASES.to_vec(), ..pick((64, 9, 10)) }
        }
        "distance" => {
            let values: Vec<f64> = if desk { vec![1.0, 3.0, 5.0, 10.0] } else { (1..=10).map(f64::from).collect() };
            ExperimentConfig {
                snr_db: vec![15.0],
                sweep: sweep(SweepAxis::Distance, &values),
                methods: THREE_CASES.to_vec(),
                ..pick((64, 9, 10))
            }
        }
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in preset_names() {
            let cfg = preset(&name).unwrap_or_else(|| panic!("{name} missing"));
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert_eq!(preset_names().len(), 2 * STUDIES.len());
    }

    #[test]
    fn desk_presets_stay_small() {
        for (study, _) in STUDIES {
            let cfg = preset(&format!("{study}-desk")).unwrap();
            assert_eq!(cfg.channel.num_subcarriers, 16);
            assert!(cfg.realizations >= 20);
            for p in cfg.points().unwrap() {
                assert!(p.channel.tx_antennas <= 64 && p.channel.num_users <= 4);
            }
        }
    }

    #[test]
    fn unknown_names() {
        assert!(preset("antennas").is_none());
        assert!(preset("antennas-huge").is_none());
        assert!(preset("nothing-desk").is_none());
    }
}
