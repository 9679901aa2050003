//! Objective values against a naive, independently written reference.

mod common;

use common::{random_instance, Instance};
use hybridbf::ici::{cfo_profile, none_profile, scalar_profile, IciProfile};
use hybridbf::objectives::{interference_power, per_user_rate, sum_rate};
use hybridbf::{CMatrix, Complex};
use std::f64::consts::PI;

#[derive(Clone, Copy)]
enum Leak {
    None,
    Scalar(f64),
    Cfo(f64),
}

fn leak_weight(leak: Leak, offset: i64, k: usize) -> f64 {
    match leak {
        Leak::None => (offset == 0) as u8 as f64,
        Leak::Scalar(s) => {
            if offset == 0 {
                1.0
            } else {
                s * s
            }
        }
        Leak::Cfo(eps) => {
            let x = offset as f64 + eps;
            let den = (k as f64) * (PI * x / k as f64).sin();
            if den.abs() < 1e-12 {
                1.0
            } else {
                ((PI * x).sin() / den).powi(2)
            }
        }
    }
}

fn profile(leak: Leak, k: usize) -> IciProfile<f64> {
    match leak {
        Leak::None => none_profile(k).unwrap(),
        Leak::Scalar(s) => scalar_profile(k, s).unwrap(),
        Leak::Cfo(e) => cfo_profile(k, e).unwrap(),
    }
}

fn link(inst: &Instance, q: usize, i: usize, u: usize) -> Complex<f64> {
    let (w, f) = (&inst.w, &inst.f[i]);
    let h = inst.h.subcarrier(i);
    let mut acc = Complex::new(0.0, 0.0);
    for n in 0..w.rows() {
        for m in 0..w.cols() {
            acc += h[(q, n)] * w[(n, m)] * f[(m, u)];
        }
    }
    acc
}

fn naive_cell(inst: &Instance, leak: Leak, q: usize, k: usize) -> (f64, f64) {
    let (uc, kc) = (inst.h.num_users(), inst.h.num_subcarriers());
    let signal = leak_weight(leak, 0, kc) * link(inst, q, k, q).norm_sqr();
    let mut interference = 0.0;
    for u in 0..uc {
        for i in 0..kc {
            if u == q && i == k {
                continue;
            }
            interference += leak_weight(leak, i as i64 - k as i64, kc) * link(inst, q, i, u).norm_sqr();
        }
    }
    (signal, interference)
}

fn naive_rate(inst: &Instance, leak: Leak, psi: f64, q: usize, k: usize) -> f64 {
    let (s, i) = naive_cell(inst, leak, q, k);
    (1.0 + s / (i + psi)).log2()
}

fn naive_sum_rate(inst: &Instance, leak: Leak, psi: f64) -> f64 {
    let (uc, kc) = (inst.h.num_users(), inst.h.num_subcarriers());
    let mut total = 0.0;
    for q in 0..uc {
        for k in 0..kc {
            total += naive_rate(inst, leak, psi, q, k);
        }
    }
    total / uc as f64
}

fn naive_interference(inst: &Instance, leak: Leak) -> f64 {
    let (uc, kc) = (inst.h.num_users(), inst.h.num_subcarriers());
    let mut total = 0.0;
    for q in 0..uc {
        for k in 0..kc {
            total += naive_cell(inst, leak, q, k).1;
        }
    }
    total
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn objectives_match_naive_reference_on_small_instances() {
    let leaks = [Leak::None, Leak::Scalar(0.2), Leak::Cfo(0.15)];
    let mut seed = 100;
    let mut checked = 0;
    for users in 1..=2 {
        for subcarriers in 1..=4 {
            for antennas in [1, 4] {
                for rf in users..=antennas.min(2).max(users) {
                    if rf > antennas {
                        continue;
                    }
                    seed += 1;
                    let inst = random_instance(users, antennas, rf, subcarriers, seed);
                    for leak in leaks {
                        let ici = profile(leak, subcarriers);
                        for psi in [0.1, 2.0] {
                            let got = sum_rate(&inst.h, &inst.w, &inst.f, &ici, psi).unwrap();
                            assert!(close(got, naive_sum_rate(&inst, leak, psi), 1e-12));
                            for q in 0..users {
                                for k in 0..subcarriers {
                                    let r = per_user_rate(&inst.h, &inst.w, &inst.f, &ici, psi, q, k).unwrap();
                                    assert!(close(r, naive_rate(&inst, leak, psi, q, k), 1e-12));
                                }
                            }
                        }
                        let got = interference_power(&inst.h, &inst.w, &inst.f, &ici).unwrap();
                        assert!(close(got, naive_interference(&inst, leak), 1e-12));
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked >= 30);
}

#[test]
fn zero_offset_profiles_give_identical_rates() {
    for seed in 0..10 {
        let inst = random_instance(2, 9, 3, 4, 500 + seed);
        let psi = 0.3;
        let none = sum_rate(&inst.h, &inst.w, &inst.f, &none_profile(4).unwrap(), psi).unwrap();
        let cfo = sum_rate(&inst.h, &inst.w, &inst.f, &cfo_profile(4, 0.0).unwrap(), psi).unwrap();
        let scalar = sum_rate(&inst.h, &inst.w, &inst.f, &scalar_profile(4, 0.0).unwrap(), psi).unwrap();
        assert!((none - cfo).abs() < 1e-12 && (none - scalar).abs() < 1e-12);
    }
}

#[test]
fn sum_rate_is_invariant_under_user_relabeling() {
    for seed in 0..5 {
        let inst = random_instance(3, 9, 4, 3, 700 + seed);
        let ici = scalar_profile(3, 0.25).unwrap();
        let before = sum_rate(&inst.h, &inst.w, &inst.f, &ici, 0.5).unwrap();
        let perm = [2, 0, 1];
        let h = inst.h.select_users(&perm).unwrap();
        let f: Vec<CMatrix<f64>> = inst
            .f
            .iter()
            .map(|fk| CMatrix::from_fn(fk.rows(), fk.cols(), |r, c| fk[(r, perm[c])]))
            .collect();
        let after = sum_rate(&h, &inst.w, &f, &ici, 0.5).unwrap();
        assert!((before - after).abs() < 1e-12 * before.max(1.0));
    }
}

#[test]
fn interference_grows_with_leakage_magnitude() {
    for seed in 0..10 {
        let inst = random_instance(2, 4, 2, 4, 900 + seed);
        let low = interference_power(&inst.h, &inst.w, &inst.f, &scalar_profile(4, 0.1).unwrap()).unwrap();
        let high = interference_power(&inst.h, &inst.w, &inst.f, &scalar_profile(4, 0.3).unwrap()).unwrap();
        assert!(high > low);
    }
}
