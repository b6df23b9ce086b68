use dacos::pauli::PauliString;
use dacos::rates::{
    epp_map, grid, hashing_bound, n_w, rains_bound, rate_curve, rate_ls, rate_sh, undetected_prob,
    undetected_prob_closed, BellDiag, IcebergMap, R_MAX,
};
use num_rational::Ratio;

fn commutes_with_iceberg(e: &PauliString) -> bool {
    let n = e.n();
    let xs: PauliString = "X".repeat(n).parse().unwrap();
    let zs: PauliString = "Z".repeat(n).parse().unwrap();
    e.commutes(&xs).unwrap() && e.commutes(&zs).unwrap()
}

#[test]
fn n_w_counts_by_enumeration() {
    for n in [4usize, 6] {
        let mut counts = vec![0u128; n + 1];
        for e in PauliString::all(n).filter(commutes_with_iceberg) {
            counts[e.weight()] += 1;
        }
        for (w, &c) in counts.iter().enumerate() {
            assert_eq!(n_w(n as u64, w as u64), c, "n={n} w={w}");
        }
    }
    assert_eq!(n_w(4, 2), 18);
}

#[test]
fn n_w_identity_in_exact_arithmetic() {
    // p = 1/2: 1 - 3p/4 = 5/8, p/4 = 1/8
    for n in (4u64..=20).step_by(2) {
        let sum: Ratio<i128> = (0..=n)
            .map(|w| {
                Ratio::from_integer(n_w(n, w) as i128)
                    * Ratio::new(5, 8).pow((n - w) as i32)
                    * Ratio::new(1, 8).pow(w as i32)
            })
            .sum();
        let closed = (Ratio::from_integer(1) + Ratio::from_integer(3) * Ratio::new(1, 2).pow(n as i32)) / 4;
        assert_eq!(sum, closed, "n={n}");
    }
}

#[test]
fn undetected_sum_matches_closed_form() {
    for n in [4, 6, 8, 10] {
        for i in 0..50 {
            let p = i as f64 / 49.0;
            assert!((undetected_prob(n, p).unwrap() - undetected_prob_closed(n, p)).abs() <= 1e-12);
        }
    }
}

#[test]
fn marginals_are_identical() {
    // IcebergMap::apply asserts agreement to 1e-12; this drives it over a grid and odd inputs
    for n in [4, 6, 8, 10] {
        let map = IcebergMap::new(n).unwrap();
        for p in [0.0, 0.1, 0.37, 0.66, 1.0] {
            map.apply(&BellDiag::isotropic(p));
        }
        map.apply(&BellDiag::new(0.6, 0.25, 0.1, 0.05).unwrap());
    }
}

#[test]
fn every_rate_is_below_rains() {
    let ps = grid(0.8, 81);
    let curve = rate_curve(&ps, &[4, 6], R_MAX).unwrap();
    for (name, col) in &curve.columns {
        for (i, &v) in col.iter().enumerate() {
            assert!(v.is_finite() && v >= 0.0, "{name} at {}", ps[i]);
            if name != "Rains" {
                assert!(v <= rains_bound(ps[i]) + 1e-12, "{name}={v} above Rains at p={}", ps[i]);
            }
        }
    }
}

#[test]
fn shuffled_rates_are_continuous() {
    let ps: Vec<f64> = (0..400).map(|i| i as f64 / 400.0 * (2.0 / 3.0)).collect();
    for n in [4, 6] {
        for r in 0..5 {
            let vals: Vec<f64> = ps.iter().map(|&p| rate_sh(r, n, p).unwrap()).collect();
            assert!(vals.iter().all(|v| v.is_finite()));
            for w in vals.windows(2) {
                assert!((w[1] - w[0]).abs() < 0.05, "jump in D_Sh(r={r}, n={n})");
            }
        }
    }
}

#[test]
fn trivial_and_ordering_facts() {
    for p in grid(0.8, 33) {
        assert!((rate_sh(0, 4, p).unwrap() - hashing_bound(p)).abs() <= 1e-12);
        assert!((rate_sh(0, 6, p).unwrap() - hashing_bound(p)).abs() <= 1e-12);
    }
    assert_eq!(hashing_bound(0.0), 1.0);
    assert!((rate_ls(4, 0.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((rate_ls(6, 0.0).unwrap() - 4.0 / 6.0).abs() < 1e-15);
    assert!(rate_ls(6, 0.2).unwrap() < rate_ls(4, 0.2).unwrap());
    assert!(epp_map(12, &BellDiag::perfect()).is_err());
}
