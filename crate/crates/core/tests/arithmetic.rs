use nyman_core::arithmetic::*;
use nyman_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::sync::OnceLock;

fn big_table() -> &'static MobiusTable {
    static T: OnceLock<MobiusTable> = OnceLock::new();
    T.get_or_init(|| mobius_table(9_000_000).unwrap())
}

/// μ(n) by trial division.
fn mobius_naive(mut n: u64) -> i8 {
    let mut sign = 1i8;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        -sign
    } else {
        sign
    }
}

#[test]
fn mertens_known_values() {
    let t = mobius_table(1_000_000).unwrap();
    let known = [(1, 1), (10, -1), (100, 1), (1000, 2), (10_000, -23), (100_000, -48), (1_000_000, 212)];
    for (x, m) in known {
        assert_eq!(t.mertens(x), m, "M({x})");
    }
}

#[test]
fn segmented_sieve_matches_trial_division() {
    // crosses the sieve block boundary at 2^20
    let t = mobius_table((1 << 20) + 5000).unwrap();
    for n in (1..2000).chain((1 << 20) - 2000..(1 << 20) + 5000) {
        assert_eq!(t.mu(n), mobius_naive(n), "mu({n})");
    }
}

#[test]
fn mertens_file_round_trip() {
    let t = mobius_table(5000).unwrap();
    let dir = std::env::temp_dir().join(format!("mertens-rt-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.bin");
    t.write_mertens(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], b"MERTENS1");
    assert_eq!(i64::from_le_bytes(bytes[8..16].try_into().unwrap()), 5000);
    let back = read_mertens(&path).unwrap();
    assert_eq!(back.len(), 5000);
    assert!((1..=5000u64).all(|n| back[(n - 1) as usize] == t.mertens(n)));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn von_mangoldt_chebyshev_psi() {
    let lam = von_mangoldt_table(1000).unwrap();
    assert!((lam.lambda(8) - 2f64.ln()).abs() < 1e-15);
    assert_eq!(lam.lambda(12), 0.0);
    // ψ(100) = log lcm(1, …, 100)
    assert!((lam.psi(100) - 94.045_311_229_357_39).abs() < 1e-10);
}

#[test]
fn dirichlet_sum_at_two_tends_to_inverse_zeta() {
    let t = mobius_table(100_000).unwrap();
    let s = t.partial_sum(100_000, Complex64::new(2.0, 0.0)).unwrap();
    let want = 6.0 / std::f64::consts::PI.powi(2);
    assert!((s.re - want).abs() < 2e-5);
}

#[test]
fn chebyshev_constant_digits() {
    assert_eq!(format!("{:.8}", chebyshev_constant()), "0.92129202");
}

#[test]
fn sandwich_holds_exactly_on_random_rationals() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for _ in 0..10_000 {
        let q: i128 = rng.gen_range(1..=997);
        let p: i128 = rng.gen_range(1..10_000 * q);
        let r = chebyshev_sandwich_exact(Rational::new(p, q));
        assert!(r.holds, "fails at {p}/{q}");
    }
}

#[test]
fn phi_vanishes_below_one() {
    for k in 1..1000 {
        let x = Rational::new(k, 1000);
        assert_eq!(chebyshev_phi_exact(x), Rational::from_integer(0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn mobius_is_multiplicative(a in 1u64..3000, b in 1u64..3000) {
        let t = big_table();
        let g = { let (mut x, mut y) = (a, b); while y != 0 { (x, y) = (y, x % y); } x };
        if g == 1 {
            prop_assert_eq!(t.mu(a * b), t.mu(a) * t.mu(b));
        }
    }

    #[test]
    fn float_sandwich_agrees_with_exact(num in 1u32..2_000_000, den in 1u32..200) {
        let x = f64::from(num) / f64::from(den);
        let f = chebyshev_sandwich(x, None);
        let e = chebyshev_sandwich_exact(Rational::new(i128::from(num), i128::from(den)));
        prop_assert!(f.holds && e.holds);
        prop_assert_eq!(f.chi, e.chi);
    }

    #[test]
    fn divisor_sum_of_mobius_vanishes(n in 2u64..20_000) {
        let t = big_table();
        let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| i64::from(t.mu(d))).sum();
        prop_assert_eq!(s, 0);
    }
}
