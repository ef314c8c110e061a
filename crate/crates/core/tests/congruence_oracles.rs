//! Congruence-subgroup invariants against brute force and classical formulas.

use proptest::prelude::*;
use torsion_census::arith::{divisors, euler_phi, gcd, int, rat};
use torsion_census::congruence::{coset_table, galois_action_on_cusps, index_closed_form};
use torsion_census::{Invariants, SubgroupSpec};

/// `|SL₂(ℤ/M)| / |H|` by listing matrices, with `H` the matrices congruent to
/// `±[[1,b],[0,1]]` (and `b` even for `Γ₁(2,2n)`); `±` collapses in `PSL₂`.
fn brute_index(spec: SubgroupSpec) -> u64 {
    let m = spec.level() as i64;
    let mut sl2 = 0u64;
    let mut h = 0u64;
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    if (a * d - b * c - 1).rem_euclid(m) != 0 {
                        continue;
                    }
                    sl2 += 1;
                    let unipotent = |s: i64| {
                        (a - s).rem_euclid(m) == 0 && c % m == 0 && (d - s).rem_euclid(m) == 0
                            && (spec.half_level().is_none() || b.rem_euclid(m) % 2 == 0)
                    };
                    if unipotent(1) || unipotent(-1) {
                        h += 1;
                    }
                }
            }
        }
    }
    sl2 / h
}

#[test]
fn index_matches_brute_force() {
    for level in 1..=16 {
        let spec = SubgroupSpec::gamma1(level).unwrap();
        assert_eq!(index_closed_form(spec), brute_index(spec), "{spec}");
    }
    for n in 1..=8 {
        let spec = SubgroupSpec::gamma1_2(n).unwrap();
        assert_eq!(index_closed_form(spec), brute_index(spec), "{spec}");
    }
}

#[test]
fn closed_form_examples() {
    let g1 = |n| index_closed_form(SubgroupSpec::gamma1(n).unwrap());
    let g2 = |n| index_closed_form(SubgroupSpec::gamma1_2(n).unwrap());
    assert_eq!((g1(1), g1(30), g2(15)), (1, 288, 576));
    // 968 · 3/4 · 120/121 = 720.
    assert_eq!(int(968) * rat(3, 4) * rat(120, 121), int(720));
    assert_eq!((g1(44), g2(22)), (720, 1440));
    assert_eq!(coset_table(SubgroupSpec::gamma1_2(16).unwrap()).unwrap().len(), 768);
}

/// `#cusps(X₁(N)) = ½ Σ_{d|N} φ(d)φ(N/d)` for `N ≥ 5`.
#[test]
fn gamma1_cusp_counts_match_the_classical_sum() {
    for n in 5..=60u64 {
        let sum: u64 = divisors(n).iter().map(|&d| euler_phi(d) * euler_phi(n / d)).sum();
        let inv = Invariants::compute(SubgroupSpec::gamma1(n).unwrap()).unwrap();
        assert_eq!(inv.cusps.len() as u64, sum / 2, "N = {n}");
    }
}

#[test]
fn known_genera() {
    let g1 = |n| Invariants::compute(SubgroupSpec::gamma1(n).unwrap()).unwrap().genus;
    let g2 = |n| Invariants::compute(SubgroupSpec::gamma1_2(n).unwrap()).unwrap().genus;
    // Classical genera of X₁(N).
    for (n, g) in [(10, 0), (11, 1), (12, 0), (13, 2), (14, 1), (15, 1), (16, 2), (17, 5), (18, 2), (23, 12), (30, 9)] {
        assert_eq!(g1(n), g, "X1({n})");
    }
    for (n, g) in [(1, 0), (2, 0), (3, 0), (4, 0), (5, 1), (6, 1), (15, 25)] {
        assert_eq!(g2(n), g, "X1(2,{})", 2 * n);
    }
    assert_eq!(Invariants::compute(SubgroupSpec::gamma1(1).unwrap()).unwrap().nu2, 1);
}

#[test]
fn index_exceeds_the_euler_product_bound() {
    // index(Γ₁(2n)) = 2n² ∏_{p|2n}(1 − p⁻²) > (6/π²)·2n² > 1.2158·n².
    for n in 2..=1000 {
        let idx = index_closed_form(SubgroupSpec::gamma1(2 * n).unwrap());
        assert!(int(idx as i64) > rat(6079, 5000) * int((n * n) as i64), "n = {n}");
    }
}

fn spec_strategy() -> impl Strategy<Value = SubgroupSpec> {
    prop_oneof![
        (1u64..=60).prop_map(|n| SubgroupSpec::gamma1(n).unwrap()),
        (1u64..=30).prop_map(|n| SubgroupSpec::gamma1_2(n).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn widths_sum_to_index_and_genus_is_integral(spec in spec_strategy()) {
        let inv = Invariants::compute(spec).unwrap();
        prop_assert_eq!(inv.cusps.iter().map(|c| c.width).sum::<u64>(), inv.index);
        let twelve_g = 12 + inv.index as i64 - 3 * inv.nu2 as i64 - 4 * inv.nu3 as i64 - 6 * inv.cusps.len() as i64;
        prop_assert_eq!(twelve_g, 12 * inv.genus as i64);
    }

    #[test]
    fn galois_action_is_a_homomorphism(spec in spec_strategy(), q in 1u64..500, r in 1u64..500) {
        let m = spec.level();
        prop_assume!(gcd(q as i64, m as i64) == 1 && gcd(r as i64, m as i64) == 1);
        let table = coset_table(spec).unwrap();
        let pq = galois_action_on_cusps(&table, q % m).unwrap();
        let pr = galois_action_on_cusps(&table, r % m).unwrap();
        let pqr = galois_action_on_cusps(&table, (q * r) % m).unwrap();
        let composed: Vec<usize> = (0..pq.len()).map(|i| pq[pr[i]]).collect();
        prop_assert_eq!(composed, pqr);
        let one = galois_action_on_cusps(&table, 1 % m.max(2)).unwrap();
        prop_assert!(one.iter().enumerate().all(|(i, &j)| i == j));
    }

    #[test]
    fn index_doubles(n in 2u64..=50) {
        let two = SubgroupSpec::gamma1_2(n).unwrap();
        let one = SubgroupSpec::gamma1(2 * n).unwrap();
        prop_assert_eq!(index_closed_form(two), 2 * index_closed_form(one));
        prop_assert_eq!(coset_table(two).unwrap().len() as u64, index_closed_form(two));
    }

    #[test]
    fn curve_syntax_round_trips(spec in spec_strategy()) {
        let text = spec.to_string();
        prop_assert_eq!(text.parse::<SubgroupSpec>().unwrap(), spec);
    }
}
