mod support;

use plrnet_core::couplings::ModelKind;
use plrnet_core::datagen::bessel::{bessel_j, bessel_jy_all};
use plrnet_core::tensor::{matrix_chain_contract, multi_mode_contract, ring_contract};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

const TOL: f64 = 1e-12;

#[test]
fn multi_mode_contract_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let order = rng.random_range(1..6);
        let shape: Vec<usize> = (0..order).map(|_| rng.random_range(1..5)).collect();
        let core = random_tensor(&mut rng, &shape);
        let factors: Vec<Vec<f64>> = shape.iter().map(|&n| random_vec(&mut rng, n)).collect();
        let fast = multi_mode_contract(&core, &factors).unwrap();
        let slow = naive_full_contract(&core, &factors);
        assert!(rel_err(fast, slow) <= TOL, "{shape:?}: {fast} vs {slow}");
    }
}

#[test]
fn chain_and_ring_match_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let n = rng.random_range(1..7);
        let mut bonds: Vec<usize> = (0..=n).map(|_| rng.random_range(1..5)).collect();
        let mut train = bonds.clone();
        train[0] = 1;
        train[n] = 1;
        bonds[n] = bonds[0];
        let tt: Vec<_> = train.windows(2).map(|w| random_matrix(&mut rng, w[0], w[1])).collect();
        let tr: Vec<_> = bonds.windows(2).map(|w| random_matrix(&mut rng, w[0], w[1])).collect();
        let tt_slow = naive_chain(&tt.iter().map(rows_of).collect::<Vec<_>>())[0][0];
        let tr_slow = naive_trace(&naive_chain(&tr.iter().map(rows_of).collect::<Vec<_>>()));
        assert!(rel_err(matrix_chain_contract(&tt).unwrap(), tt_slow) <= TOL);
        assert!(rel_err(ring_contract(&tr).unwrap(), tr_slow) <= TOL);
    }
}

#[test]
fn forwards_match_reference_for_every_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for kind in ModelKind::ALL {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let n = rng.random_range(2..6);
            let spec = random_spec(&mut rng, kind, n, &[2, 3, 4]);
            let model = random_model(&mut rng, spec);
            let x = random_vec(&mut rng, n);
            let fast = model.predict(&x).unwrap();
            let (taped, _) = model.forward(&x).unwrap();
            assert_eq!(fast.to_bits(), taped.to_bits());
            let (slow, scale) = naive_forward_with_scale(&model, &x);
            worst = worst.max(scaled_rel_err(fast, slow, scale));
        }
        assert!(worst <= TOL, "{kind}: worst relative gap {worst:e}");
    }
}

#[test]
fn bessel_values_match_power_series() {
    let mut worst = (0.0f64, 0, 0.0);
    for &x in &BESSEL_POINTS {
        let (j, y) = bessel_jy_all(30, x).unwrap();
        for &n in &BESSEL_ORDERS {
            let nj = rel_err(j[n as usize], bessel_j_series(n, x));
            let ny = rel_err(y[n as usize], bessel_y_series(n, x));
            for e in [nj, ny] {
                if e > worst.0 {
                    worst = (e, n, x);
                }
            }
        }
    }
    assert!(worst.0 <= 1e-10, "worst {:e} at n = {}, x = {}", worst.0, worst.1, worst.2);
    assert_eq!(bessel_j(4, 2.9).unwrap(), bessel_jy_all(4, 2.9).unwrap().0[4]);
}
