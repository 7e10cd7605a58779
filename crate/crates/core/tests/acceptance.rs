//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//! Runs under `cargo test` with its own harness so the lines are always printed.

use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;
use rsl::catalog::{self, alpha_threshold, make_alpha_family, power_family, power_threshold, standard_catalog, CatalogEntry, Growth};
use rsl::estimates::estimate_report;
use rsl::gelfand::{default_m_grid, geometric_grid, lambda_star, minimal_branch, shoot_first_zero};
use rsl::radial::{Constants, Table};
use rsl::stability::eigen::extrapolated_critical_coupling;
use rsl::stability::{count_ur_zeros, hardy_criterion, semistability_verdict, StabilityVerdict};
use rsl::verify::verify_catalog;
use rsl::weak::{classify_weak_solution, is_bounded_near_origin, power_solution_weakness, verify_integral_representation};
use rsl::{Grid64, GridKind, Nonlinearity64, Profile64};

const GRID_N: usize = 4096;
const R_MIN: f64 = 1e-6;

const BOUNDARY_TOL: f64 = 1e-6;
const COUPLING_REL_TOL: f64 = 0.02;
const LAMBDA_STAR_10: (f64, f64) = (16.0, 0.2);
const LAMBDA_STAR_2: (f64, f64) = (2.0, 0.02);
/// Shooting against the closed-form planar branch, relative in `λ`.
const LIOUVILLE_REL_TOL: f64 = 1e-6;
const GROWTH_REL_TOL: f64 = 0.01;
/// Local slope of `log|u_r|` against the sharp gradient exponent.
const GRADIENT_EXPONENT_TOL: f64 = 1e-6;
const REPRESENTATION_TOL: f64 = 1e-6;

fn grid() -> Grid64 {
    Grid64::build(GridKind::Logarithmic, GRID_N, R_MIN).unwrap()
}

/// Flip point between `yes` (where `semi` holds) and `no` (where it fails).
fn bisect(mut yes: f64, mut no: f64, semi: impl Fn(f64) -> bool) -> f64 {
    assert!(semi(yes) && !semi(no), "bracket [{yes}, {no}] does not straddle the flip");
    while (no - yes).abs() > 1e-10 {
        let mid = 0.5 * (yes + no);
        if semi(mid) {
            yes = mid;
        } else {
            no = mid;
        }
    }
    0.5 * (yes + no)
}

fn hardy_boundary(g: &Grid64) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3, 6, 10] {
        let target = alpha_threshold(n);
        let semi = |a: f64| {
            let e = make_alpha_family(n, a, g).unwrap();
            hardy_criterion(&e.profile, &e.nl).passes()
        };
        let flip = bisect(target - 1.0, target + 0.5, semi);
        let err = (flip - target).abs();
        pass &= err <= BOUNDARY_TOL;
        parts.push(format!("N={n} flip {flip:.9} vs {target:.9} (err {err:.1e})"));
    }
    (pass, parts.join(", "))
}

fn coupling_flip(g: &Grid64) -> (bool, String) {
    let radii = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3, 10] {
        let h = Constants::<f64>::new(n).hardy_constant;
        let fit = extrapolated_critical_coupling(g, n, &radii).unwrap();
        let rel = (fit.c_inf - h).abs() / h;
        pass &= rel <= COUPLING_REL_TOL;
        parts.push(format!("N={n} c_inf {:.5} vs {h} (rel {rel:.1e})", fit.c_inf));
    }
    (pass, parts.join(", "))
}

fn gelfand_lambda_star(g: &Grid64) -> (bool, String) {
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    let ms = default_m_grid();
    let d10 = minimal_branch(&exp, 10, &ms, g).unwrap();
    let s10 = lambda_star(&d10).unwrap();
    let d2 = minimal_branch(&exp, 2, &ms, g).unwrap();
    let s2 = lambda_star(&d2).unwrap();
    let mut oracle = 0.0f64;
    for p in d2.points.iter().filter(|p| p.resolved) {
        let b = (0.5 * p.m).exp() - 1.0;
        let exact = 8.0 * b / ((1.0 + b) * (1.0 + b));
        oracle = oracle.max((p.lambda - exact).abs() / exact);
    }
    let pass = (s10.estimate - LAMBDA_STAR_10.0).abs() <= LAMBDA_STAR_10.1
        && (s2.estimate - LAMBDA_STAR_2.0).abs() <= LAMBDA_STAR_2.1
        && oracle <= LIOUVILLE_REL_TOL;
    let detail = format!(
        "N=10 {:.6} (monotone {}), N=2 {:.6} (fold {}), planar branch vs closed form rel {oracle:.1e}",
        s10.estimate, s10.monotone, s2.estimate, s2.fold
    );
    (pass, detail)
}

fn weak_table(g: &Grid64) -> (bool, String) {
    let ps = [1.1, 1.5, 2.0, 3.0, 4.0, 6.0, 10.0];
    let cases: Vec<(usize, f64)> = (2..=10).flat_map(|n| ps.iter().map(move |&p| (n, p))).collect();
    let results: Vec<(usize, f64, bool, bool)> = cases
        .par_iter()
        .map(|&(n, p)| {
            let e = power_family(n, p, g).unwrap();
            let c = classify_weak_solution(&e.profile, &e.nl).unwrap();
            (n, p, c.verdict.is_weak(), power_solution_weakness(n, p).unwrap())
        })
        .collect();
    let bad: Vec<String> = results
        .iter()
        .filter(|r| r.2 != r.3)
        .map(|r| format!("N={},p={} numeric {} closed {}", r.0, r.1, r.2, r.3))
        .collect();
    let weak = results.iter().filter(|r| r.3).count();
    (bad.is_empty(), format!("{} pairs, {weak} weak, {} disagreements {:?}", results.len(), bad.len(), bad))
}

fn stable(e: &CatalogEntry<f64>) -> bool {
    semistability_verdict(&e.profile, &e.nl).unwrap().verdict == StabilityVerdict::SemiStable
}

fn sharp_estimates(entries: &[CatalogEntry<f64>]) -> (bool, String) {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut bad = Vec::new();
    for e in entries.iter().filter(|e| e.expected.stability == StabilityVerdict::SemiStable && e.expected.non_energy) {
        used += 1;
        let r = estimate_report(&e.profile, &e.nl, stable(e)).unwrap();
        let checks = r.lemma24.is_some_and(|c| c.pass) && r.lemma25.is_some_and(|c| c.pass) && r.thm11.pass;
        let rel = match e.growth {
            Growth::Power { exponent } => r.growth_exponent.map_or(f64::INFINITY, |b| ((b - exponent) / exponent).abs()),
            Growth::Logarithmic { coefficient } => r.log_coefficient.map_or(f64::INFINITY, |c| ((c - coefficient) / coefficient).abs()),
            Growth::Bounded => f64::INFINITY,
        };
        worst = worst.max(rel);
        if !checks || rel > GROWTH_REL_TOL {
            pass = false;
            bad.push(e.id.clone());
        }
    }
    (pass && used > 0, format!("{used} entries, worst growth rel err {worst:.1e}, failing {bad:?}"))
}

fn gradient_bounds(g: &Grid64, entries: &[CatalogEntry<f64>]) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [3, 4, 6, 10] {
        let a = alpha_threshold(n);
        let e = make_alpha_family(n, a, g).unwrap();
        let r = estimate_report(&e.profile, &e.nl, stable(&e)).unwrap();
        let t = r.thm12.expect("gradient bounds apply at the sharp exponent");
        let positive = t.m1_fit.is_some_and(|m| m > 0.0) && t.m2_fit.is_some_and(|m| m > 0.0);
        // Local exponent of |u_r| between the last two dyadic radii inside r0.
        let (r1, r2) = (1e-4, 2e-4);
        let slope = (e.profile.u_r_at(r2).abs().ln() - e.profile.u_r_at(r1).abs().ln()) / (r2 / r1).ln();
        let sharp = Constants::<f64>::new(n).gradient_exponent;
        let err = (slope - sharp).abs();
        pass &= t.pass && positive && err <= GRADIENT_EXPONENT_TOL;
        parts.push(format!("N={n} M1 {:.3e} M2 {:.3e} exponent err {err:.1e}", t.m1_fit.unwrap_or(f64::NAN), t.m2_fit.unwrap_or(f64::NAN)));
    }
    let planar: Vec<&CatalogEntry<f64>> = entries
        .iter()
        .filter(|e| e.profile.dimension() == 2 && e.expected.non_energy && e.nl.is_nonnegative_on(-1e3, 1e3))
        .collect();
    for e in &planar {
        let r = estimate_report(&e.profile, &e.nl, stable(e)).unwrap();
        let a = r.thm12.and_then(|t| t.alpha_2d).unwrap_or(f64::NAN);
        pass &= a > 0.0 && a.is_finite();
        parts.push(format!("{} alpha_2d {a:.6}", e.id));
    }
    (pass && !planar.is_empty(), parts.join(", "))
}

/// `u = log(1 - log r)` in the plane: unbounded, weak, with `f ≥ 0` tabulated from
/// `r = exp(1 - e^u)`, `f = e^{-2u} e^{2(e^u - 1)}`.
fn loglog_entry(g: &Grid64) -> (String, Profile64, Nonlinearity64) {
    let profile = Profile64::closed_form(2, g.clone(), |r: f64| (1.0 - r.ln()).ln(), |r: f64| -1.0 / (r * (1.0 - r.ln()))).unwrap();
    let s: Vec<f64> = (0..=4000).map(|i| -0.05 + 3.0 * i as f64 / 4000.0).collect();
    let f: Vec<f64> = s.iter().map(|&u| (-2.0 * u + 2.0 * (u.exp() - 1.0)).exp()).collect();
    let df: Vec<f64> = s.iter().zip(&f).map(|(&u, &fv)| fv * (2.0 * u.exp() - 2.0)).collect();
    ("adversarial log(1-log r)".into(), profile, Nonlinearity64::Tabulated(Table::new(s, f, df).unwrap()))
}

fn planar_corpus(g: &Grid64, entries: &[CatalogEntry<f64>]) -> Vec<(String, Profile64, Nonlinearity64)> {
    let mut out: Vec<_> = entries
        .iter()
        .filter(|e| e.profile.dimension() == 2)
        .map(|e| (e.id.clone(), e.profile.clone(), e.nl.clone()))
        .collect();
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    for m in geometric_grid(0.05, 4.0, 8).unwrap() {
        let s = shoot_first_zero(&exp, m, 2, g).unwrap();
        out.push((format!("branch m={m:.3}"), s.profile, exp.scaled(s.lambda).unwrap()));
    }
    for a in [-0.01, -0.5, -2.0, -5.0] {
        let e = make_alpha_family(2, a, g).unwrap();
        out.push((e.id, e.profile, e.nl));
    }
    for p in [1.5, 3.0] {
        let e = power_family(2, p, g).unwrap();
        out.push((e.id, e.profile, e.nl));
    }
    for c in [0.1, 10.0] {
        let prof = Profile64::closed_form(2, g.clone(), move |r: f64| -c * r.ln(), move |r: f64| -c / r).unwrap();
        out.push((format!("{c} log(1/r)"), prof, Nonlinearity64::Zero));
    }
    out.push(loglog_entry(g));
    out
}

fn planar_regularity(corpus: &[(String, Profile64, Nonlinearity64)]) -> (bool, String) {
    let hits: Vec<String> = corpus
        .par_iter()
        .filter_map(|(id, p, nl)| {
            let weak = classify_weak_solution(p, nl).is_ok_and(|c| c.verdict.is_weak());
            let semi = semistability_verdict(p, nl).is_ok_and(|s| s.verdict == StabilityVerdict::SemiStable);
            let growth = !is_bounded_near_origin(p) && estimate_report(p, nl, semi).is_ok_and(|r| r.thm11.pass);
            (weak && semi && growth).then(|| id.clone())
        })
        .collect();
    (hits.is_empty(), format!("{} planar profiles, {} weak+semi-stable+unbounded {:?}", corpus.len(), hits.len(), hits))
}

fn zero_count(g: &Grid64, entries: &[CatalogEntry<f64>]) -> (bool, String) {
    let mut corpus: Vec<(String, Profile64, Nonlinearity64)> =
        entries.iter().map(|e| (e.id.clone(), e.profile.clone(), e.nl.clone())).collect();
    corpus.extend(planar_corpus(g, &[]));
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    for n in [3, 10] {
        for m in geometric_grid(0.05, 20.0, 6).unwrap() {
            let s = shoot_first_zero(&exp, m, n, g).unwrap();
            corpus.push((format!("branch N={n} m={m:.3}"), s.profile, exp.scaled(s.lambda).unwrap()));
        }
    }
    let stats: Vec<(String, bool, usize)> = corpus
        .par_iter()
        .map(|(id, p, nl)| {
            let semi = semistability_verdict(p, nl).is_ok_and(|s| s.verdict == StabilityVerdict::SemiStable);
            (id.clone(), semi, count_ur_zeros(p))
        })
        .collect();
    let semi = stats.iter().filter(|s| s.1).count();
    let bad: Vec<&String> = stats.iter().filter(|s| s.1 && s.2 > 1).map(|s| &s.0).collect();
    (bad.is_empty() && semi > 0, format!("{semi} semi-stable of {}, violations {bad:?}", stats.len()))
}

fn power_boundary(g: &Grid64) -> (bool, String) {
    let target = power_threshold(10);
    let semi = |p: f64| {
        let e = power_family(10, p, g).unwrap();
        hardy_criterion(&e.profile, &e.nl).passes()
    };
    let flip = bisect(1.26, 1.5, semi);
    let err = (flip - target).abs();
    let lp = catalog::power_lambda(10, flip) * flip;
    (err <= BOUNDARY_TOL, format!("N=10 flip {flip:.9} vs {target:.9} (err {err:.1e}), lambda p {lp:.6}"))
}

fn representation(g: &Grid64, entries: &[CatalogEntry<f64>]) -> (bool, String) {
    let mut cases: Vec<(String, Profile64, Nonlinearity64)> = entries
        .iter()
        .filter(|e| classify_weak_solution(&e.profile, &e.nl).is_ok_and(|c| c.verdict.is_weak()))
        .map(|e| (e.id.clone(), e.profile.clone(), e.nl.clone()))
        .collect();
    let weak_entries = cases.len();
    let exp = Nonlinearity64::Exponential { lambda: 1.0 };
    for n in [2, 3, 10] {
        let diagram = minimal_branch(&exp, n, &geometric_grid(0.05, 8.0, 6).unwrap(), g).unwrap();
        for p in &diagram.points {
            let s = shoot_first_zero(&exp, p.m, n, g).unwrap();
            cases.push((format!("branch N={n} m={:.3}", p.m), s.profile, exp.scaled(s.lambda).unwrap()));
        }
    }
    let devs: Vec<(String, f64)> = cases
        .par_iter()
        .map(|(id, p, nl)| (id.clone(), verify_integral_representation(p, nl).map_or(f64::INFINITY, |r| r.deviation)))
        .collect();
    let worst = devs.iter().cloned().fold((String::new(), 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let pass = devs.iter().all(|d| d.1 <= REPRESENTATION_TOL);
    (pass, format!("{weak_entries} weak entries + {} branch solutions, worst {:.1e} ({})", cases.len() - weak_entries, worst.1, worst.0))
}

fn verify_all(g: &Grid64) -> (bool, String) {
    let m = verify_catalog(g, None, &Default::default()).unwrap();
    let stability = |id: &str| {
        m.rows
            .iter()
            .find(|r| r.id == id)
            .and_then(|r| r.checks.iter().find(|c| c.name == "stability"))
            .map(|c| c.computed.clone())
            .unwrap_or_default()
    };
    let (s9, s10) = (stability("exp:N=9"), stability("exp:N=10"));
    let pass = m.all_pass() && s9 == "unstable" && s10 == "semi-stable";
    (pass, format!("{} entries, {} mismatched, exp:N=9 {s9}, exp:N=10 {s10}", m.rows.len(), m.mismatches()))
}

fn main() -> ExitCode {
    // Only run under `cargo test`; listing or filtering requests get no tests.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let g = grid();
    let entries = standard_catalog(&g).unwrap();
    let planar = planar_corpus(&g, &entries);
    let criteria: Vec<(&str, Box<dyn Fn() -> (bool, String) + '_>)> = vec![
        ("hardy boundary in alpha", Box::new(|| hardy_boundary(&g))),
        ("c/r^2 eigenvalue flip", Box::new(|| coupling_flip(&g))),
        ("gelfand lambda_star", Box::new(|| gelfand_lambda_star(&g))),
        ("power-solution weakness table", Box::new(|| weak_table(&g))),
        ("sharp-estimate suite", Box::new(|| sharp_estimates(&entries))),
        ("gradient bounds", Box::new(|| gradient_bounds(&g, &entries))),
        ("planar regularity corpus", Box::new(|| planar_regularity(&planar))),
        ("u_r zero count", Box::new(|| zero_count(&g, &entries))),
        ("power stability boundary", Box::new(|| power_boundary(&g))),
        ("integral representation", Box::new(|| representation(&g, &entries))),
        ("verify-all", Box::new(|| verify_all(&g))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = run();
        failed += usize::from(!pass);
        println!(
            "acceptance {:>2} {:<30} {}  {detail}  [{:.1}s]",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
