//! Numerical and cross-module checks for the Siegel-unit machinery.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_integer::Integer;

use num_complex::Complex64;
use torsion_census::congruence::Mat2;
use torsion_census::field::FiniteField;
use torsion_census::pointcount::{count_points_with_classes, enumerate_curve_classes};
use torsion_census::units::{
    row_multiplier, search_exact_degree, search_min_degree, siegel_order_matrix, verify_candidate, SearchOptions,
    SiegelIndex,
};
use torsion_census::{Invariants, SubgroupSpec};

/// `g_a(τ) = −q^{B₂(a₁)/2} e^{πi a₂(a₁−1)} (1 − q_z) ∏ (1 − qⁿq_z)(1 − qⁿ/q_z)`.
fn siegel(a1: f64, a2: f64, tau: Complex64, terms: usize) -> Complex64 {
    let i = Complex64::i();
    let q = (2.0 * PI * i * tau).exp();
    let qz = (2.0 * PI * i * (a1 * tau + a2)).exp();
    let b2 = a1 * a1 - a1 + 1.0 / 6.0;
    let mut value = -(PI * i * tau * b2).exp() * (PI * i * a2 * (a1 - 1.0)).exp() * (1.0 - qz);
    let mut qn = Complex64::new(1.0, 0.0);
    for _ in 1..terms {
        qn *= q;
        value *= (1.0 - qn * qz) * (1.0 - qn / qz);
    }
    value
}

fn moebius(g: &[i64; 4], tau: Complex64) -> Complex64 {
    let [a, b, c, d] = g.map(|x| x as f64);
    (a * tau + b) / (c * tau + d)
}

/// `F_O(γτ) / F_O(τ)` evaluated numerically.
fn row_ratio(orbit: &[SiegelIndex], m: u64, g: &[i64; 4], tau: Complex64) -> Complex64 {
    let gt = moebius(g, tau);
    let m = m as f64;
    orbit
        .iter()
        .map(|a| {
            let (a1, a2) = (a.a1 as f64 / m, a.a2 as f64 / m);
            siegel(a1, a2, gt, 400) / siegel(a1, a2, tau, 400)
        })
        .product()
}

/// Elements of the group, each paired with a point `τ` at which both `τ`
/// and `γτ` have imaginary part about `1/c`, so the q-products converge.
fn sample_elements(spec: SubgroupSpec) -> Vec<([i64; 4], Complex64)> {
    let m = spec.level() as i64;
    let image: HashSet<Mat2> = spec.image().into_iter().collect();
    let inside = |g: &[i64; 4]| image.contains(&Mat2::new(g[0], g[1], g[2], g[3], m as u64));
    let mut out = vec![([1, 2, 0, 1], Complex64::new(0.11, 0.83))];
    out.retain(|(g, _)| inside(g));
    for c in [m, 2 * m, 3 * m] {
        for d in -2 * m..=2 * m {
            if d == 0 || c.gcd(&d) != 1 {
                continue;
            }
            let a = (1..c).find(|a| (a * d).rem_euclid(c) == 1).unwrap_or(1);
            let g = [a, (a * d - 1) / c, c, d];
            if inside(&g) {
                let tau = Complex64::new(-d as f64 / c as f64 + 0.013, 1.0 / c as f64);
                out.push((g, tau));
            }
        }
    }
    out.truncate(12);
    out
}

#[test]
fn multipliers_match_the_q_product() {
    for n in [3, 5, 9] {
        let spec = SubgroupSpec::gamma1_2(n).unwrap();
        let matrix = siegel_order_matrix(spec).unwrap();
        let samples = sample_elements(spec);
        assert!(samples.len() >= 6, "{spec}: too few elements to test");
        for (g, tau) in &samples {
            for orbit in &matrix.rows {
                let chi = row_multiplier(orbit, spec.level(), g).unwrap();
                let expected = (2.0 * PI * Complex64::i() * (*chi.numer() as f64 / *chi.denom() as f64)).exp();
                let got = row_ratio(orbit, spec.level(), g, *tau);
                assert!((got - expected).norm() < 1e-8, "{spec}, {g:?}: {got} vs {expected}");
            }
        }
    }
}

#[test]
fn degree_seven_units_are_invariant_functions() {
    for n in [9, 10] {
        let spec = SubgroupSpec::gamma1_2(n).unwrap();
        let matrix = siegel_order_matrix(spec).unwrap();
        let unit = search_exact_degree(&matrix, 7, SearchOptions::default()).unwrap().candidate.unwrap();
        assert!(verify_candidate(&unit, &matrix));
        assert_eq!(unit.degree, 7);
        for (g, tau) in sample_elements(spec) {
            let ratio: Complex64 = matrix
                .rows
                .iter()
                .zip(&unit.exponents)
                .map(|(orbit, &e)| row_ratio(orbit, spec.level(), &g, tau).powi(e as i32))
                .product();
            assert!((ratio - 1.0).norm() < 1e-7, "{spec}, {g:?}: ratio {ratio}");
        }
    }
}

#[test]
fn least_degrees_respect_genus() {
    for n in 1..=10 {
        let spec = SubgroupSpec::gamma1_2(n).unwrap();
        let genus = Invariants::compute(spec).unwrap().genus;
        let matrix = siegel_order_matrix(spec).unwrap();
        let unit = search_min_degree(&matrix, 7, SearchOptions::default()).unwrap().candidate.unwrap();
        // Degree one forces genus zero, and a genus-g curve has gonality at most g + 1.
        assert_eq!(unit.degree == 1, genus == 0, "{spec}");
        if genus == 1 {
            assert_eq!(unit.degree, 2, "{spec}");
        }
    }
}

/// A degree-`d` map to the line bounds `#X(𝔽_q) ≤ d(q + 1)` at good primes.
#[test]
fn least_degrees_bound_point_counts() {
    for q in [3u64, 5, 7, 11, 13] {
        let f = FiniteField::new(q).unwrap();
        let classes = enumerate_curve_classes(&f).unwrap();
        for n in 3..=10 {
            let spec = SubgroupSpec::gamma1_2(n).unwrap();
            if spec.level() % q == 0 {
                continue;
            }
            let matrix = siegel_order_matrix(spec).unwrap();
            let unit = search_min_degree(&matrix, 7, SearchOptions::default()).unwrap().candidate.unwrap();
            let total = count_points_with_classes(spec, &f, &classes).unwrap().total;
            assert!(total <= unit.degree * (q + 1), "{spec} over F_{q}: {total} points, degree {}", unit.degree);
        }
    }
}

#[test]
fn search_is_deterministic() {
    let spec = SubgroupSpec::gamma1_2(9).unwrap();
    let matrix = siegel_order_matrix(spec).unwrap();
    let a = search_exact_degree(&matrix, 7, SearchOptions::default()).unwrap();
    let b = search_exact_degree(&matrix, 7, SearchOptions::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cyclic_curves_are_supported() {
    let spec = SubgroupSpec::gamma1(13).unwrap();
    let matrix = siegel_order_matrix(spec).unwrap();
    let unit = search_min_degree(&matrix, 7, SearchOptions::default()).unwrap().candidate.unwrap();
    // X₁(13) has genus two and no rational map of degree one.
    assert_eq!(unit.degree, 2);
}
