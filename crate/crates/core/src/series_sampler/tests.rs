use super::*;
use crate::error::Error;
use crate::levy_measure::{Atom, DirectionalTail, LevyMeasureModel, SubordinatorTail};
use crate::mpp::TimeMarking;
use crate::rng::mix;

fn sub05() -> SubordinatorTail {
    SubordinatorTail::new(0.5, 1.0).unwrap()
}

fn hand_driver() -> PoissonDriver {
    PoissonDriver::from_levels(vec![1.0, 2.0, 3.0], vec![0.5, 0.2, 0.9]).unwrap()
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn two_axis(b1: f64, b2: f64) -> LevyMeasureModel {
    let mut atoms = Vec::new();
    let mut tails = Vec::new();
    for (axis, beta) in [(0usize, b1), (1, b2)] {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; 2];
            dir[axis] = sign;
            atoms.push(Atom {
                direction: dir,
                weight: 0.25,
            });
            tails.push(DirectionalTail::new(1.0, beta).unwrap());
        }
    }
    LevyMeasureModel::from_atoms(atoms, tails).unwrap()
}

#[test]
fn subordinator_series_by_hand() {
    let d = subordinator_path(&hand_driver(), 1.0, &sub05()).unwrap();
    assert!(rel_close(d.value1(0.5).unwrap(), 1.25));
    assert_eq!(d.value1(0.1).unwrap(), 0.0);
    assert!(rel_close(d.value1(1.0).unwrap(), 1.0 + 0.25 + 1.0 / 9.0));
    assert!((d.value1(1.0).unwrap() - 1.361111).abs() < 1e-6);
    assert_eq!(hitting_time(&d, 0.3).unwrap(), 0.5);
}

#[test]
fn operator_series_by_hand() {
    let model = LevyMeasureModel::from_atoms(
        vec![Atom {
            direction: vec![1.0],
            weight: 1.0,
        }],
        vec![DirectionalTail::new(1.0, 0.5).unwrap()],
    )
    .unwrap();
    let driver = PoissonDriver::from_levels(vec![1.0, 2.0], vec![0.3, 0.6]).unwrap();
    let a = operator_levy_path(&driver, 1.0, &model, 0.0).unwrap();
    assert!(rel_close(a.value1(0.4).unwrap(), 1.0));
    assert!(rel_close(a.value1(1.0).unwrap(), 1.25));
    let a = operator_levy_path(&driver, 1.0, &model, 2.0).unwrap();
    assert_eq!(a.value1(1.0).unwrap(), 0.0);
}

#[test]
fn eps_zero_rejected_above_one() {
    let model = two_axis(1.3, 1.6);
    let driver = sample_driver(10, 1, model.spectral()).unwrap();
    assert!(matches!(
        operator_levy_path(&driver, 1.0, &model, 0.0),
        Err(Error::Domain(_))
    ));
    assert!(operator_levy_path(&driver, 1.0, &model, 1e-6).is_ok());
}

#[test]
fn tight_limits_by_hand() {
    let coupling = LimitCoupling::tight(sub05());
    let drivers = LimitDrivers::Shared(hand_driver());
    let pos = limit_positions(&coupling, &drivers, 1.0, 0.3, 0.0).unwrap();
    assert!(rel_close(pos.backward[0], 0.25));
    assert!(rel_close(pos.forward[0], 1.25));
    assert!(rel_close(pos.forward[0] - pos.backward[0], 1.0));
    assert_eq!(pos.hitting_time, 0.5);
    assert_eq!(
        backward_limit(&coupling, &drivers, 1.0, 0.0, 0.0).unwrap(),
        vec![0.0]
    );
    assert!(matches!(
        forward_limit(&coupling, &drivers, 1.0, 2.0, 0.0),
        Err(Error::TruncationExhausted { .. })
    ));
}

#[test]
fn antirank_flip_by_hand() {
    let tails = [
        DirectionalTail::new(1.0, 0.5).unwrap(),
        DirectionalTail::new(1.0, 1.5).unwrap(),
    ];
    let driver = PoissonDriver::from_parts(
        vec![1.5, 2.0],
        vec![0.25, 0.75],
        vec![0, 1],
        vec![1.0, 0.0, 0.0, 1.0],
        2,
    )
    .unwrap();
    let seq = limit_residual_order_stats(&driver, 1.0, &tails, 2).unwrap();
    assert_eq!(seq.dhat, vec![2, 1]);
    assert_eq!(seq.ranks, vec![2, 1]);
    assert!(rel_close(seq.magnitudes[0], 0.5f64.powf(2.0 / 3.0)));
    assert!(rel_close(seq.magnitudes[1], 1.0 / 2.25));
    assert!((seq.magnitudes[0] - 0.6300).abs() < 1e-4);
    assert!((seq.magnitudes[1] - 0.4444).abs() < 1e-4);

    let single = PoissonDriver::from_levels(vec![0.7], vec![0.4]).unwrap();
    let seq = limit_residual_order_stats(&single, 1.0, &tails[..1], 1).unwrap();
    assert_eq!(seq.dhat, vec![1]);
    assert!(limit_residual_order_stats(&single, 1.0, &tails[..1], 2).is_err());
}

#[test]
fn uniform_sphere_marks_follow_arrival_order() {
    let tail = DirectionalTail::new(1.3, 0.7).unwrap();
    let model = LevyMeasureModel::uniform_sphere(3, tail).unwrap();
    for r in 0..200 {
        let driver = sample_driver(100, mix(17, r), model.spectral()).unwrap();
        let seq = limit_residual_order_stats(&driver, 2.0, model.tails(), 100).unwrap();
        for k in 0..100 {
            assert_eq!(seq.dhat[k], k + 1);
            let expected = (1.3 * 2.0 / driver.gammas()[k]).powf(1.0 / 0.7);
            assert!(rel_close(seq.magnitudes[k], expected));
            let norm: f64 = seq.mark(k).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(rel_close(norm, seq.magnitudes[k]));
        }
    }
}

/// Positions computed straight from the definitions: build D and A as step
/// paths and sum the spatial jumps whose D-value (or left limit) is `≤ t`.
fn definitional(
    coupling: &LimitCoupling,
    drivers: &LimitDrivers,
    horizon: f64,
    t: f64,
    eps: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let (temporal, spatial) = match drivers {
        LimitDrivers::Shared(p) => (p, p),
        LimitDrivers::Independent { temporal, spatial } => (temporal, spatial),
    };
    let d = subordinator_path(temporal, horizon, coupling.sub()).unwrap();
    let a = operator_levy_path(spatial, horizon, coupling.model(), eps).unwrap();
    let e = hitting_time(&d, t).unwrap();
    let dim = a.dimension();
    let mut back = vec![0.0; dim];
    let mut fwd = vec![0.0; dim];
    for (i, &x) in a.locations().iter().enumerate() {
        if d.value1(x).unwrap() <= t {
            back.iter_mut().zip(a.jump(i)).for_each(|(b, j)| *b += j);
        }
        if d.left_limit1(x).unwrap() <= t {
            fwd.iter_mut().zip(a.jump(i)).for_each(|(f, j)| *f += j);
        }
    }
    (e, back, fwd)
}

#[test]
fn fast_scan_matches_definitions() {
    let sub = SubordinatorTail::new(0.6, 1.2).unwrap();
    let cases = [
        LimitCoupling::new(LimitMode::Uncoupled, two_axis(0.6, 0.8), sub).unwrap(),
        LimitCoupling::new(LimitMode::CommonGamma, two_axis(0.6, 0.8), sub).unwrap(),
        LimitCoupling::tight(sub),
    ];
    for coupling in &cases {
        for r in 0..300 {
            let drivers = coupling.sample_drivers(300, mix(3, r)).unwrap();
            let t = 0.05 + (r % 7) as f64 * 0.1;
            let fast = match limit_positions(coupling, &drivers, 2.0, t, 0.0) {
                Ok(p) => p,
                Err(Error::TruncationExhausted { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let (e, back, fwd) = definitional(coupling, &drivers, 2.0, t, 0.0);
            assert_eq!(fast.hitting_time, e);
            assert_eq!(fast.backward, back, "{:?}", coupling.mode());
            assert_eq!(fast.forward, fwd, "{:?}", coupling.mode());
        }
    }
}

#[test]
fn pathwise_identities() {
    let sub = sub05();
    let tight = LimitCoupling::tight(sub);
    let common = LimitCoupling::new(LimitMode::CommonGamma, two_axis(0.6, 0.8), sub).unwrap();
    let unc = LimitCoupling::new(LimitMode::Uncoupled, two_axis(0.7, 0.9), sub).unwrap();
    for r in 0..300 {
        let seed = mix(29, r);
        for coupling in [&tight, &common, &unc] {
            let drivers = coupling.sample_drivers(400, seed).unwrap();
            let pos = limit_positions(coupling, &drivers, 3.0, 1.0, 0.0).unwrap();
            // Inversion sandwich.
            let temporal = match &drivers {
                LimitDrivers::Shared(p) => p,
                LimitDrivers::Independent { temporal, .. } => temporal,
            };
            let d = subordinator_path(temporal, 3.0, &sub).unwrap();
            let e = hitting_time(&d, 1.0).unwrap();
            assert!(d.value1(e).unwrap() > 1.0);
            assert!(d.left_limit1(e).unwrap() <= 1.0);
            assert_eq!(pos.d_left, d.left_limit1(e).unwrap());
            assert_eq!(pos.d_right, d.value1(e).unwrap());
            match coupling.mode() {
                LimitMode::Tight => {
                    assert_eq!(pos.backward[0], pos.d_left);
                    assert_eq!(pos.forward[0], pos.d_right);
                }
                LimitMode::CommonGamma => {
                    let LimitDrivers::Shared(p) = &drivers else {
                        unreachable!()
                    };
                    let k = (0..p.depth()).find(|&k| 3.0 * p.taus()[k] == e).unwrap();
                    let tail = coupling.model().tails()[p.atoms()[k] as usize];
                    let m = tail.inverse_tail(p.gammas()[k] / 3.0).unwrap();
                    for i in 0..2 {
                        let gap = pos.forward[i] - pos.backward[i];
                        let want = m * p.direction(k)[i];
                        assert!((gap - want).abs() <= 1e-12 * (pos.forward[i].abs() + m).max(1.0));
                    }
                }
                LimitMode::Uncoupled => assert_eq!(pos.forward, pos.backward),
            }
        }
    }
}

#[test]
fn deeper_truncation_only_shrinks_the_index_set() {
    let sub = sub05();
    let model = two_axis(0.6, 0.8);
    for r in 0..100 {
        let deep = sample_driver(400, mix(41, r), model.spectral()).unwrap();
        let shallow = deep.truncated(200).unwrap();
        let d_deep = subordinator_path(&deep, 1.0, &sub).unwrap();
        let d_shallow = subordinator_path(&shallow, 1.0, &sub).unwrap();
        let a_deep = operator_levy_path(&deep, 1.0, &model, 0.0).unwrap();
        let a_shallow = operator_levy_path(&shallow, 1.0, &model, 0.0).unwrap();
        for (i, &x) in a_shallow.locations().iter().enumerate() {
            let j = a_deep.locations().iter().position(|&y| y == x).unwrap();
            assert_eq!(a_shallow.jump(i), a_deep.jump(j));
        }
        for k in 0..200 {
            let x = shallow.taus()[k];
            let t = 0.6;
            if d_deep.value1(x).unwrap() <= t {
                assert!(d_shallow.value1(x).unwrap() <= t);
            }
        }
    }
}

#[test]
fn marked_points_share_marks_across_markings() {
    let sub = sub05();
    let common = LimitCoupling::new(LimitMode::CommonGamma, two_axis(0.6, 0.8), sub).unwrap();
    let unc = LimitCoupling::new(LimitMode::Uncoupled, two_axis(0.6, 0.8), sub).unwrap();
    for coupling in [&common, &unc] {
        for r in 0..50 {
            let drivers = coupling.sample_drivers(4000, mix(8, r)).unwrap();
            let b =
                limit_marked_points(coupling, &drivers, 1.0, 0.05, TimeMarking::Backward).unwrap();
            let f =
                limit_marked_points(coupling, &drivers, 1.0, 0.05, TimeMarking::Forward).unwrap();
            assert_eq!(b.len(), f.len());
            for (pb, pf) in b.iter().zip(&f) {
                assert_eq!(pb.mark, pf.mark);
                assert!(pf.time <= pb.time);
                if coupling.mode() == LimitMode::Uncoupled {
                    assert_eq!(pf.time, pb.time);
                }
            }
            assert!(b.windows(2).all(|w| w[0].time <= w[1].time));
        }
    }
    let drivers = common.sample_drivers(10, 1).unwrap();
    assert!(matches!(
        limit_marked_points(&common, &drivers, 1.0, 0.05, TimeMarking::Backward),
        Err(Error::IncompleteSeries { .. })
    ));
}

#[test]
fn undershoot_follows_the_arcsine_law() {
    // For α = 1/2, D(E(1)-) has distribution function (2/π)·asin(√x) on [0, 1].
    let coupling = LimitCoupling::tight(sub05());
    let n = 4000;
    let mut under: Vec<f64> = (0..n)
        .map(|r| {
            let drivers = coupling.sample_drivers(20_000, mix(2024, r)).unwrap();
            limit_positions(&coupling, &drivers, 4.0, 1.0, 0.0)
                .unwrap()
                .d_left
        })
        .collect();
    under.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for (i, &x) in under.iter().enumerate() {
        let f = 2.0 / std::f64::consts::PI * x.sqrt().asin();
        ks = ks.max((f - i as f64 / n as f64).abs());
        ks = ks.max(((i + 1) as f64 / n as f64 - f).abs());
    }
    // 99.9% one-sample critical value is about 1.95/√n ≈ 0.031.
    assert!(ks < 0.031, "KS distance {ks}");
}
