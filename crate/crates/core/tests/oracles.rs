use rsl::catalog::{power_lambda, power_threshold, power_upper_threshold};
use rsl::gelfand::{bv_energy_condition, shoot_first_zero};
use rsl::radial::quad::integrate_weighted;
use rsl::{Grid64, GridKind, Nonlinearity64};

// Emden-Fowler in τ = ln s with v = s w':  w' = v,  v' = -(N-2) v - s² g(w).
fn rk4(g: &dyn Fn(f64) -> f64, n: f64, tau: f64, y: [f64; 2], h: f64) -> [f64; 2] {
    let rhs = |t: f64, y: [f64; 2]| [y[1], -(n - 2.0) * y[1] - (2.0 * t).exp() * g(y[0])];
    let add = |y: [f64; 2], k: [f64; 2], c: f64| [y[0] + c * k[0], y[1] + c * k[1]];
    let k1 = rhs(tau, y);
    let k2 = rhs(tau + h / 2.0, add(y, k1, h / 2.0));
    let k3 = rhs(tau + h / 2.0, add(y, k2, h / 2.0));
    let k4 = rhs(tau + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// First zero of the regular solution with `w(0) = m`.
fn first_zero_rk4(g: &dyn Fn(f64) -> f64, dimension: usize, m: f64) -> f64 {
    let n = dimension as f64;
    let s0: f64 = 1e-5;
    let mut tau = s0.ln();
    let mut y = [m - g(m) * s0 * s0 / (2.0 * n), -g(m) * s0 * s0 / n];
    let h = 2e-4;
    loop {
        let next = rk4(g, n, tau, y, h);
        if next[0] <= 0.0 {
            // secant on the length of the last step
            let (mut a, mut b) = (0.0, h);
            let (mut wa, mut wb) = (y[0], next[0]);
            for _ in 0..60 {
                let c = b - wb * (b - a) / (wb - wa);
                let wc = rk4(g, n, tau, y, c)[0];
                (a, wa, b, wb) = (b, wb, c, wc);
                if wc.abs() < 1e-15 {
                    break;
                }
            }
            return (tau + b).exp();
        }
        tau += h;
        y = next;
        assert!(tau < 20.0, "no zero found");
    }
}

fn grid() -> Grid64 {
    Grid64::build(GridKind::Logarithmic, 1024, 1e-6).unwrap()
}

// Frozen from the RK4 oracle above.
const EXP_N3_M1_ZERO: f64 = 1.745276812247;
const POWER2_N3_M1_ZERO: f64 = 1.479317137258;

#[test]
fn rk4_oracle_matches_frozen_zeros() {
    let e = first_zero_rk4(&|w: f64| w.exp(), 3, 1.0);
    let p = first_zero_rk4(&|w: f64| (1.0 + w).powi(2), 3, 1.0);
    assert!((e - EXP_N3_M1_ZERO).abs() < 1e-11, "{e}");
    assert!((p - POWER2_N3_M1_ZERO).abs() < 1e-11, "{p}");
}

#[test]
fn shots_agree_with_rk4_oracle() {
    let grid = grid();
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    let shot = shoot_first_zero(&exp, 1.0, 3, &grid).unwrap();
    assert!((shot.r_zero / EXP_N3_M1_ZERO - 1.0).abs() < 1e-8, "{}", shot.r_zero);
    assert!((shot.lambda - EXP_N3_M1_ZERO.powi(2)).abs() < 1e-7);

    let power = Nonlinearity64::Power { p: 2.0, lambda: 1.0 };
    let shot = shoot_first_zero(&power, 1.0, 3, &grid).unwrap();
    assert!((shot.r_zero / POWER2_N3_M1_ZERO - 1.0).abs() < 1e-8, "{}", shot.r_zero);

    for (g, n, m) in [(&exp, 10usize, 3.0), (&exp, 2, 0.4), (&power, 5, 2.5)] {
        let oracle = match g {
            Nonlinearity64::Exponential { .. } => first_zero_rk4(&|w: f64| w.exp(), n, m),
            _ => first_zero_rk4(&|w: f64| (1.0 + w).powi(2), n, m),
        };
        let shot = shoot_first_zero(g, m, n, &grid).unwrap();
        assert!((shot.r_zero / oracle - 1.0).abs() < 1e-8, "N={n} m={m}: {} vs {oracle}", shot.r_zero);
    }
}

#[test]
fn planar_exponential_shots_land_on_both_liouville_branches() {
    // λ = 8b/(1+b)² is invariant under b -> 1/b, with m = 2 ln(1+b)
    let grid = grid();
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    for b in [1.0 / 3.0, 3.0, 1.0, 0.05] {
        let m = 2.0 * f64::ln_1p(b);
        let shot = shoot_first_zero(&exp, m, 2, &grid).unwrap();
        let lambda = 8.0 * b / ((1.0 + b) * (1.0 + b));
        assert!((shot.lambda - lambda).abs() < 1e-8, "b={b}: {}", shot.lambda);
    }
}

#[test]
fn weighted_integral_of_inverse_square_gradient() {
    // u = r^{-6}: u_r^{-2} = r^14/36, integral over [r/2, r] is (1 - 2^-15) r^15 / 540
    let error = |n: usize, r: f64| {
        let grid = Grid64::build(GridKind::Logarithmic, n, 1e-6).unwrap();
        let samples: Vec<f64> = grid.nodes().iter().map(|r| r.powi(14) / 36.0).collect();
        let got = integrate_weighted(&grid, &samples, 0.0, r / 2.0, r).unwrap();
        got / ((1.0 - 2f64.powi(-15)) * r.powi(15) / 540.0) - 1.0
    };
    for r in [0.01, 0.1, 0.5] {
        let (coarse, fine) = (error(4096, r), error(8192, r));
        assert!(coarse.abs() < 5e-4, "r={r}: {coarse}");
        let order = (coarse / fine).log2();
        assert!((order - 2.0).abs() < 0.1, "r={r}: order {order}");
    }
    let grid = Grid64::build(GridKind::Logarithmic, 4096, 1e-6).unwrap();
    // weight r^{N-1} on a constant: (1 - (1/2)^N)/N for N = 3
    let ones = vec![1.0; grid.len()];
    let got = integrate_weighted(&grid, &ones, 2.0, 0.5, 1.0).unwrap();
    assert!((got - 7.0 / 24.0).abs() < 1e-6, "{}", got - 7.0 / 24.0);
}

#[test]
fn energy_condition_on_standard_sources() {
    let probe: Vec<f64> = (1..=400).map(|k| k as f64).collect();
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    assert!(bv_energy_condition(&exp, &probe).unwrap().satisfied);
    let cubic = Nonlinearity64::Power { p: 3.0, lambda: 1.0 };
    let c = bv_energy_condition(&cubic, &probe).unwrap();
    assert!(c.satisfied);
    // u p/(1+u) tends to p from below
    assert!(c.liminf_estimate < 3.0 && c.liminf_estimate > 2.9);
    let affine = Nonlinearity64::Power { p: 1.0, lambda: 1.0 };
    assert!(!bv_energy_condition(&affine, &probe).unwrap().satisfied);
}

fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    let at_lo = pred(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn power_thresholds_solve_the_hardy_comparison() {
    // semi-stability of the singular power solution reads λ_p p <= (N-2)²/4
    for n in 3..=20usize {
        let hardy = ((n - 2) * (n - 2)) as f64 / 4.0;
        let stable = |p: f64| power_lambda(n, p) * p <= hardy;
        let lower = bisect(n as f64 / (n as f64 - 2.0) + 1e-9, 50.0, stable);
        match power_upper_threshold(n) {
            None => {
                assert!(n <= 10, "N={n}");
                assert!((lower - power_threshold(n)).abs() < 1e-9, "N={n}: {lower}");
            }
            Some(upper) => {
                assert!(n >= 11, "N={n}");
                let lower = bisect(n as f64 / (n as f64 - 2.0) + 1e-9, upper - 1e-6, stable);
                let back = bisect(lower + 1e-6, upper + 10.0, |p| !stable(p));
                assert!((lower - power_threshold(n)).abs() < 1e-8, "N={n}: {lower}");
                assert!((back - upper).abs() < 1e-8, "N={n}: {back} vs {upper}");
            }
        }
    }
}
