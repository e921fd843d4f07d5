//! Laguerre polynomials against exact rational arithmetic.

use ensemble_info::specfun::{assoc_laguerre, laguerre};
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Terms of `Σ_k C(n+α, n-k) (-x)^k / k!`, exact for rational `α` and `x`.
fn exact_terms(n: u32, alpha: &BigRational, x: &BigRational) -> Vec<BigRational> {
    let n_big = BigRational::from_integer(BigInt::from(n));
    (0..=n)
        .map(|k| {
            // C(n+α, n-k) = Π_{j<n-k} (n+α-j) / (n-k)!
            let m = n - k;
            let mut binom = BigRational::one();
            for j in 0..m {
                binom *= (&n_big + alpha - BigRational::from_integer(BigInt::from(j)))
                    / BigRational::from_integer(BigInt::from(j + 1));
            }
            let mut pow = BigRational::one();
            for i in 0..k {
                pow *= -x / BigRational::from_integer(BigInt::from(i + 1));
            }
            binom * pow
        })
        .collect()
}

fn check(n: u32, alpha: (i64, i64), x: (i64, i64)) {
    let (a, xv) = (rational(alpha.0, alpha.1), rational(x.0, x.1));
    let terms = exact_terms(n, &a, &xv);
    let exact: BigRational = terms.iter().fold(BigRational::zero(), |s, t| s + t);
    let magnitude: BigRational = terms.iter().fold(BigRational::zero(), |s, t| s + t.abs());
    let exact = exact.to_f64().unwrap();
    // The recurrence loses at most a few ulps of the largest term.
    let scale = magnitude.to_f64().unwrap().max(1.0);
    let got = assoc_laguerre(n, alpha.0 as f64 / alpha.1 as f64, x.0 as f64 / x.1 as f64).unwrap();
    assert!(
        (got - exact).abs() <= 1e-13 * scale,
        "L_{n}^({}/{})({}/{}) = {got}, exact {exact}",
        alpha.0,
        alpha.1,
        x.0,
        x.1
    );
    if alpha.0 == 0 {
        assert_eq!(laguerre(n, x.0 as f64 / x.1 as f64).unwrap(), got);
    }
}

#[test]
fn integer_and_half_integer_orders() {
    for n in 0..=30 {
        for alpha in [(0, 1), (1, 2), (3, 2), (5, 2), (-1, 2), (7, 3)] {
            for x in [(0, 1), (1, 8), (13, 10), (5, 1), (50, 1)] {
                check(n, alpha, x);
            }
        }
    }
}

#[test]
fn spot_values() {
    // L_2(x) = 1 - 2x + x²/2
    let got = laguerre(2, 1.5).unwrap();
    assert!((got - (1.0 - 3.0 + 1.125)).abs() < 1e-15);
    check(5, (0, 1), (13, 10));
    check(4, (3, 2), (4, 5));
}
