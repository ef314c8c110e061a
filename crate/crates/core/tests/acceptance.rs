//! Acceptance criteria 1–9, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines reach the terminal under a
//! plain `cargo test`. Exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use torsion_census::arith::int;
use torsion_census::bounds::{
    abramovich_lower, asymptotic_nonmember_threshold, castelnuovo_severi, Quantity, Relation,
};
use torsion_census::census::{classify, default_facts, verify_trace, CensusOptions, Fact, Status, TorsionGroup};
use torsion_census::congruence::{coset_table, index_closed_form};
use torsion_census::field::FiniteField;
use torsion_census::pointcount::{count_points_with_classes, enumerate_curve_classes, gonality_lower_from_count, mass};
use torsion_census::units::{search_exact_degree, search_min_degree, siegel_order_matrix, verify_candidate, SearchOptions};
use torsion_census::{Invariants, SubgroupSpec};

fn x1(n: u64) -> SubgroupSpec {
    SubgroupSpec::gamma1(n).unwrap()
}

fn x12(n: u64) -> SubgroupSpec {
    SubgroupSpec::gamma1_2(n).unwrap()
}

fn group(m: u64, n: u64) -> TorsionGroup {
    TorsionGroup::new(m, n).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.1}s of {}s", e.as_secs_f64(), limit.as_secs()))
}

fn genus(spec: SubgroupSpec) -> u64 {
    Invariants::compute(spec).unwrap().genus
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let (g30, g2_30) = (genus(x1(30)), genus(x12(15)));
    let small: Vec<u64> = (1..=8).map(|n| genus(x12(n))).collect();
    let (fast, time) = within(t, Duration::from_secs(10));
    let pass = g30 == 9 && g2_30 == 25 && small.iter().all(|&g| g <= 6) && fast;
    outcome(pass, format!("g(X1(30)) = {g30}, g(X1(2,30)) = {g2_30}, g(X1(2,2n)) for n <= 8: {small:?}; {time}"))
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    for n in 2..=50 {
        let (two, one) = (x12(n), x1(2 * n));
        let closed = index_closed_form(two);
        let counted = coset_table(two).map(|c| c.len() as u64).unwrap_or(0);
        let cyclic = coset_table(one).map(|c| c.len() as u64).unwrap_or(0);
        if closed != 2 * index_closed_form(one) || closed != counted || cyclic != index_closed_form(one) {
            bad.push(n);
        }
    }
    let (fast, time) = within(t, Duration::from_secs(60));
    outcome(bad.is_empty() && fast, format!("index doubling and coset counts for 2 <= n <= 50, failures {bad:?}; {time}"))
}

fn criterion_3() -> Outcome {
    let exceeds = |n: u64, t: i64| abramovich_lower(x12(n), index_closed_form(x12(n))).bound.implies_gt(int(t));
    let mid = (16..=21).all(|n| exceeds(n, 7));
    let high = (22..=60).all(|n| exceeds(n, 14));
    let th = asymptotic_nonmember_threshold();
    let crude = (25..=1000).all(|n| th.crude_route_holds(n)) && !th.crude_route_holds(24);
    outcome(
        mid && high && crude && th.n0 == 25,
        format!("> 7 on 16..=21: {mid}; > 14 on 22..=60: {high}; crude route from n0 = {} (checked to 1000): {crude}", th.n0),
    )
}

fn criterion_4() -> Outcome {
    let b = castelnuovo_severi(x12(15), 25, 9, 2, 5).unwrap().bound;
    let pass = b.quantity == Quantity::GonQ && b.relation == Relation::Ge && b.value == int(8);
    outcome(pass, format!("(25, 9, 2, 5) gives {b}"))
}

/// Hand-written copy of the septic classification.
fn expected_members() -> Vec<TorsionGroup> {
    let mut out: Vec<TorsionGroup> = (1..=30).filter(|n| *n != 25 && *n != 29).map(|n| group(1, n)).collect();
    out.extend((1..=10).map(|n| group(2, 2 * n)));
    out
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let report = match classify(&default_facts(), &CensusOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("census failed: {e}")),
    };
    let verified = verify_trace(&report).ok();
    let (fast, time) = within(t, Duration::from_secs(15 * 60));
    let same = report.members() == expected_members();
    outcome(
        same && report.is_complete() && verified && fast,
        format!(
            "{} members, equal to the expected set: {same}, complete: {}, trace verified: {verified}; {time}",
            report.members().len(),
            report.is_complete()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in [9, 10] {
        let t = Instant::now();
        let matrix = siegel_order_matrix(x12(n)).unwrap();
        let found = search_exact_degree(&matrix, 7, SearchOptions::default()).unwrap().candidate;
        let ok = found.as_ref().is_some_and(|c| c.degree <= 7 && verify_candidate(c, &matrix));
        let (fast, time) = within(t, Duration::from_secs(600));
        pass &= ok && fast;
        parts.push(format!("X1(2,{}): unit {}, {time}", 2 * n, if ok { "found" } else { "missing" }));
    }
    for n in 1..=8 {
        if genus(x12(n)) == 0 {
            let matrix = siegel_order_matrix(x12(n)).unwrap();
            let d = search_min_degree(&matrix, 7, SearchOptions::default()).unwrap().candidate.map(|c| c.degree);
            pass &= d == Some(1);
            parts.push(format!("X1(2,{}) degree {d:?}", 2 * n));
        }
    }
    outcome(pass, parts.join("; "))
}

/// Counts of `X₁(2,2n)` for `n = 11..=15` over `𝔽_{p^k}`, `p ∈ {3,7}`, `k ≤ 4`,
/// at good primes, as `(n, q, total, count-derived 𝔽_p bound)`.
fn family_counts() -> Result<Vec<(u64, u64, u64, u64)>, String> {
    let mut rows = Vec::new();
    for p in [3u64, 7] {
        for k in 1..=4 {
            let q = p.pow(k);
            let f = FiniteField::new(q).map_err(|e| e.to_string())?;
            let classes = enumerate_curve_classes(&f).map_err(|e| e.to_string())?;
            for n in 11..=15 {
                if (2 * n) % p == 0 {
                    continue;
                }
                let rec = count_points_with_classes(x12(n), &f, &classes).map_err(|e| e.to_string())?;
                if !rec.satisfies_weil_bound() {
                    return Err(format!("Weil bound fails for n = {n}, q = {q}"));
                }
                let b = gonality_lower_from_count(&rec).bound.value.to_integer() as u64;
                rows.push((n, q, rec.total, b));
            }
        }
    }
    Ok(rows)
}

fn criterion_7(counts: &Result<Vec<(u64, u64, u64, u64)>, String>, counting: Duration) -> Outcome {
    let t = Instant::now() - counting;
    let masses = [3u64, 5, 7, 9, 81].iter().all(|&q| {
        let f = FiniteField::new(q).unwrap();
        mass(&enumerate_curve_classes(&f).unwrap()) == int(q as i64)
    });
    let f3 = FiniteField::new(3).unwrap();
    let zero = count_points_with_classes(x12(11), &f3, &enumerate_curve_classes(&f3).unwrap()).unwrap().noncuspidal == 0;
    match counts {
        Ok(rows) => {
            let (fast, time) = within(t, Duration::from_secs(20 * 60));
            outcome(
                masses && zero && fast,
                format!("mass formula: {masses}; Weil bound on {} counts; X1(2,22)(F_3) non-cuspidal = 0: {zero}; {time}", rows.len()),
            )
        }
        Err(e) => outcome(false, e.clone()),
    }
}

fn criterion_8(counts: &Result<Vec<(u64, u64, u64, u64)>, String>) -> Outcome {
    // External finite-field gonalities for n = 11..=15; the counts below can
    // only ever bound them from below.
    let certified = |n: u64| match n {
        13 | 14 => 12,
        _ => 8,
    };
    let mut controls = true;
    for q in [3u64, 5, 7, 9, 11, 13, 25, 27, 49] {
        let f = FiniteField::new(q).unwrap();
        let classes = enumerate_curve_classes(&f).unwrap();
        for (n, true_gon) in [(3u64, 1), (4, 1), (5, 2), (6, 2)] {
            if (2 * n) % f.p() == 0 {
                continue;
            }
            let rec = count_points_with_classes(x12(n), &f, &classes).unwrap();
            let g = rec.genus;
            let b = gonality_lower_from_count(&rec).bound.value;
            controls &= (g == 0 && true_gon == 1 || g == 1 && true_gon == 2) && b <= int(true_gon);
        }
    }
    let (consistent, best) = match counts {
        Ok(rows) => {
            let ok = rows.iter().all(|&(n, _, _, b)| b <= certified(n));
            let best: Vec<String> = (11..=15)
                .map(|n| format!("n={n}: {}", rows.iter().filter(|r| r.0 == n).map(|r| r.3).max().unwrap_or(0)))
                .collect();
            (ok, best.join(", "))
        }
        Err(e) => (false, e.clone()),
    };
    outcome(
        controls && consistent,
        format!(
            "exact finite-field gonalities are taken as certificates, not recomputed; controls within 1 and 2: {controls}; best count bounds {best}, none above the certified values: {consistent}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let opts = CensusOptions::default();
    let facts = default_facts();
    let full = classify(&facts, &opts).unwrap();
    let cert = |f: &Fact, ns: &[u64]| {
        matches!(f, Fact::Bound(b) if matches!(b.quantity, Quantity::GonFp { .. })
            && b.curve.half_level().is_some_and(|n| ns.contains(&n)))
    };
    let no_certs: Vec<_> = facts.iter().filter(|e| !cert(&e.fact, &[11, 12, 13, 14])).cloned().collect();
    let r = classify(&no_certs, &opts).unwrap();
    let want: Vec<TorsionGroup> = (11..=14).map(|n| group(2, 2 * n)).collect();
    let undecided_ok = r.undecided() == want;
    let nothing_flipped = r
        .verdicts
        .iter()
        .zip(&full.verdicts)
        .all(|(a, b)| a.group == b.group && (want.contains(&a.group) || a.status == b.status));

    let no_ranks: Vec<_> = facts
        .iter()
        .filter(|e| !matches!(e.fact, Fact::RankZero { curve } if curve.half_level().is_some_and(|n| (16..=21).contains(&n))))
        .cloned()
        .collect();
    let r2 = classify(&no_ranks, &opts).unwrap();
    let explicit = r2
        .verdicts
        .iter()
        .filter(|v| v.group.m == 2 && v.group.n >= 44)
        .all(|v| v.status == Status::NonMember);
    let family = r2.families.iter().any(|f| f.from.m == 2 && f.from.n <= 50);
    let pass = undecided_ok && nothing_flipped && explicit && family && verify_trace(&r).ok() && verify_trace(&r2).ok();
    outcome(
        pass,
        format!(
            "without n=11..14 certificates undecided = {:?}, others unchanged: {nothing_flipped}; without ranks for 16..21, n >= 22 non-members: {}",
            r.undecided().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            explicit && family
        ),
    )
}

fn main() {
    let t = Instant::now();
    let c = Instant::now();
    let counts = family_counts();
    let counting = c.elapsed();
    let results = [
        ("genus reproduction", criterion_1()),
        ("index identity", criterion_2()),
        ("Abramovich routes", criterion_3()),
        ("Castelnuovo-Severi", criterion_4()),
        ("end-to-end census", criterion_5()),
        ("modular units", criterion_6()),
        ("point counting", criterion_7(&counts, counting)),
        ("finite-field gonality substitute", criterion_8(&counts)),
        ("trace robustness", criterion_9()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("criterion {} ({name}): {} | {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of {} criteria pass in {:.1}s", results.len() - failed, results.len(), t.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
