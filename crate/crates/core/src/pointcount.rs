//! Point counts of `X₁(2,2n)` over small finite fields.
//!
//! Non-cuspidal points over `𝔽_q` are `𝔽_q`-isomorphism classes of triples
//! `(E, P, Q)` with `P` of order 2, `Q` of order `2n` and `⟨P⟩ ∩ ⟨Q⟩ = 0`.
//! They are counted by enumerating one curve per `𝔽_q`-isomorphism class and
//! splitting the admissible pairs into orbits under `Aut_{𝔽_q}(E)`. Cusps are
//! counted as fixed points of Frobenius acting through the cusp Galois action.
//!
//! Only odd characteristic is supported: good reduction of `X₁(2,2n)` excludes
//! `p = 2` anyway. Curves are written `y² = x³ + a₂x² + a₄x + a₆`, and an
//! isomorphism is `(x, y) = (u²x' + r, u³y')`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, prime_factors};
use crate::bounds::{Bound, BoundFact, Provenance, Quantity, Relation};
use crate::congruence::{coset_table, galois_action_on_cusps, Invariants, SubgroupKind, SubgroupSpec};
use crate::error::{Error, Result};
use crate::field::{El, FiniteField, FiniteFieldSpec};

/// `y² = x³ + a₂x² + a₄x + a₆`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Curve {
    pub a2: El,
    pub a4: El,
    pub a6: El,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Infinity,
    Affine(El, El),
}

/// An automorphism `(x, y) ↦ ((x − r)/u², y/u³)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Automorphism {
    pub u: El,
    pub r: El,
}

impl Curve {
    pub fn new(a2: El, a4: El, a6: El) -> Self {
        Self { a2, a4, a6 }
    }

    pub fn rhs(&self, f: &FiniteField, x: El) -> El {
        let x2 = f.mul(x, x);
        let t = f.add(f.mul(x2, x), f.mul(self.a2, x2));
        f.add(t, f.add(f.mul(self.a4, x), self.a6))
    }

    /// Discriminant of the cubic `x³ + a₂x² + a₄x + a₆`.
    pub fn cubic_discriminant(&self, f: &FiniteField) -> El {
        let (a, b, c) = (self.a2, self.a4, self.a6);
        let m = |x: El, y: El| f.mul(x, y);
        let terms = [
            m(m(a, a), m(b, b)),
            f.scale(-4, m(m(b, b), b)),
            f.scale(-4, m(m(m(a, a), a), c)),
            f.scale(-27, m(c, c)),
            f.scale(18, m(m(a, b), c)),
        ];
        terms.into_iter().fold(f.zero(), |acc, t| f.add(acc, t))
    }

    pub fn is_smooth(&self, f: &FiniteField) -> bool {
        !f.is_zero(self.cubic_discriminant(f))
    }

    pub fn j_invariant(&self, f: &FiniteField) -> El {
        // b2 = 4a2, b4 = 2a4, b6 = 4a6; c4 = b2² − 24b4; Δ = 16·disc
        let b2 = f.scale(4, self.a2);
        let b4 = f.scale(2, self.a4);
        let c4 = f.sub(f.mul(b2, b2), f.scale(24, b4));
        let delta = f.scale(16, self.cubic_discriminant(f));
        f.div(f.mul(f.mul(c4, c4), c4), delta).expect("smooth curve")
    }

    /// Coefficients after substituting `x = u²x' + r`, `y = u³y'`.
    pub fn transform(&self, f: &FiniteField, u: El, r: El) -> Curve {
        let r2 = f.mul(r, r);
        let a2 = f.add(self.a2, f.scale(3, r));
        let a4 = f.add(f.add(self.a4, f.scale(2, f.mul(self.a2, r))), f.scale(3, r2));
        let a6 = f.add(
            f.add(self.a6, f.mul(self.a4, r)),
            f.add(f.mul(self.a2, r2), f.mul(r2, r)),
        );
        let u2 = f.mul(u, u);
        let u4 = f.mul(u2, u2);
        let u6 = f.mul(u4, u2);
        Curve::new(
            f.div(a2, u2).unwrap(),
            f.div(a4, u4).unwrap(),
            f.div(a6, u6).unwrap(),
        )
    }

    /// Quadratic twist by `d`.
    pub fn twist(&self, f: &FiniteField, d: El) -> Curve {
        let d2 = f.mul(d, d);
        Curve::new(f.mul(self.a2, d), f.mul(self.a4, d2), f.mul(self.a6, f.mul(d2, d)))
    }

    /// `Aut_{𝔽_q}(E)`, found by solving for `(u, r)` with `u¹² = 1`.
    pub fn automorphisms(&self, f: &FiniteField) -> Vec<Automorphism> {
        let roots_of_unity: Vec<El> = f
            .elements()
            .filter(|&u| !f.is_zero(u) && f.pow(u, 12) == f.one())
            .collect();
        let mut out = Vec::new();
        for &u in &roots_of_unity {
            let candidates: Vec<El> = if f.p() != 3 {
                // a₂' = (a₂ + 3r)/u² pins r down
                let u2 = f.mul(u, u);
                let r = f.div(f.sub(f.mul(self.a2, u2), self.a2), f.from_int(3)).unwrap();
                vec![r]
            } else if !f.is_zero(self.a2) {
                // a₄' = (a₄ + 2a₂r)/u⁴
                let u4 = f.pow(u, 4);
                let r = f.div(f.sub(f.mul(self.a4, u4), self.a4), f.scale(2, self.a2)).unwrap();
                vec![r]
            } else {
                f.elements().collect()
            };
            for r in candidates {
                if self.transform(f, u, r) == *self {
                    out.push(Automorphism { u, r });
                }
            }
        }
        out
    }

    pub fn apply(&self, f: &FiniteField, a: Automorphism, p: Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                let u2 = f.mul(a.u, a.u);
                let u3 = f.mul(u2, a.u);
                Point::Affine(f.div(f.sub(x, a.r), u2).unwrap(), f.div(y, u3).unwrap())
            }
        }
    }

    pub fn neg(&self, f: &FiniteField, p: Point) -> Point {
        match p {
            Point::Infinity => p,
            Point::Affine(x, y) => Point::Affine(x, f.neg(y)),
        }
    }

    pub fn add(&self, f: &FiniteField, p: Point, q: Point) -> Point {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Infinity, _) => return q,
            (_, Point::Infinity) => return p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => (x1, y1, x2, y2),
        };
        let lambda = if x1 == x2 {
            if f.is_zero(f.add(y1, y2)) {
                return Point::Infinity;
            }
            let num = f.add(
                f.add(f.scale(3, f.mul(x1, x1)), f.scale(2, f.mul(self.a2, x1))),
                self.a4,
            );
            f.div(num, f.scale(2, y1)).unwrap()
        } else {
            f.div(f.sub(y2, y1), f.sub(x2, x1)).unwrap()
        };
        let x3 = f.sub(f.sub(f.sub(f.mul(lambda, lambda), self.a2), x1), x2);
        let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
        Point::Affine(x3, y3)
    }

    pub fn mul(&self, f: &FiniteField, p: Point, mut k: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = p;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(f, acc, base);
            }
            base = self.add(f, base, base);
            k >>= 1;
        }
        acc
    }

    /// `#E(𝔽_q) = q + 1 + Σ_x χ(f(x))`.
    pub fn point_count(&self, f: &FiniteField) -> u64 {
        let s: i64 = f.elements().map(|x| f.chi(self.rhs(f, x))).sum();
        (f.q() as i64 + 1 + s) as u64
    }

    /// All rational points, `∞` first, then by encoding of `x` and `y`.
    pub fn points(&self, f: &FiniteField) -> Vec<Point> {
        let mut out = vec![Point::Infinity];
        for x in f.elements() {
            if let Some(y) = f.sqrt(self.rhs(f, x)) {
                if f.is_zero(y) {
                    out.push(Point::Affine(x, y));
                } else {
                    let (y1, y2) = (y, f.neg(y));
                    let (lo, hi) = if f.to_int(y1) < f.to_int(y2) { (y1, y2) } else { (y2, y1) };
                    out.push(Point::Affine(x, lo));
                    out.push(Point::Affine(x, hi));
                }
            }
        }
        out
    }

    /// Order of `p` in a group of order `n`.
    pub fn point_order(&self, f: &FiniteField, p: Point, n: u64) -> u64 {
        let mut order = n;
        for l in prime_factors(n) {
            while order % l == 0 && self.mul(f, p, order / l) == Point::Infinity {
                order /= l;
            }
        }
        order
    }

    /// `(d₁, d₂)` with `E(𝔽_q) ≅ ℤ/d₁ × ℤ/d₂`, `d₁ | d₂`.
    ///
    /// The exponent is the lcm of point orders; scanning stops as soon as it
    /// is the only exponent compatible with `d₁ | gcd(d₂, q − 1)`.
    pub fn group_structure(&self, f: &FiniteField) -> (u64, u64) {
        let n = self.point_count(f);
        let q1 = f.q() - 1;
        let determined = |l: u64| {
            crate::arith::divisors(n / l)
                .into_iter()
                .filter(|&t| {
                    let e = l * t;
                    let d1 = n / e;
                    e % d1 == 0 && q1 % d1 == 0
                })
                .count()
                == 1
        };
        let mut lcm = 1u64;
        for x in f.elements() {
            let Some(y) = f.sqrt(self.rhs(f, x)) else { continue };
            let o = self.point_order(f, Point::Affine(x, y), n);
            lcm = lcm / gcd(lcm as i64, o as i64) as u64 * o;
            if determined(lcm) {
                break;
            }
        }
        (n / lcm, lcm)
    }
}

/// One `𝔽_q`-isomorphism class of elliptic curves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClassRecord {
    /// `[a₁, a₂, a₃, a₄, a₆]` in base-`p` encoding.
    pub coefficients: [u64; 5],
    pub j_invariant: u64,
    pub automorphisms: u64,
    pub order: u64,
    /// `(d₁, d₂)` with `d₁ | d₂`.
    pub group_structure: (u64, u64),
}

impl CurveClassRecord {
    pub fn curve(&self, f: &FiniteField) -> Curve {
        let c = self.coefficients;
        Curve::new(f.from_int(c[1]), f.from_int(c[3]), f.from_int(c[4]))
    }

    fn build(f: &FiniteField, e: Curve) -> Self {
        let group_structure = e.group_structure(f);
        Self {
            coefficients: [0, f.to_int(e.a2), 0, f.to_int(e.a4), f.to_int(e.a6)],
            j_invariant: f.to_int(e.j_invariant(f)),
            automorphisms: e.automorphisms(f).len() as u64,
            order: group_structure.0 * group_structure.1,
            group_structure,
        }
    }
}

/// Representatives of the `a₆` orbits under `a₆ ↦ (a₆ + a₄r + r³)/u⁶`, `u⁴ = 1`,
/// on the supersingular locus in characteristic 3.
fn char3_j0_a6_orbits(f: &FiniteField, a4: El) -> Vec<El> {
    let units: Vec<El> = f.elements().filter(|&u| !f.is_zero(u) && f.pow(u, 4) == f.one()).collect();
    let shifts: HashSet<El> = f
        .elements()
        .map(|r| f.add(f.mul(a4, r), f.mul(f.mul(r, r), r)))
        .collect();
    let mut seen: HashSet<El> = HashSet::new();
    let mut reps = Vec::new();
    for a6 in f.elements() {
        if seen.contains(&a6) {
            continue;
        }
        reps.push(a6);
        for &u in &units {
            let u6 = f.pow(u, 6);
            for &w in &shifts {
                seen.insert(f.div(f.add(a6, w), u6).unwrap());
            }
        }
    }
    reps
}

/// One representative per `𝔽_q`-isomorphism class, built from the `j`-line
/// and its twists; sorted by `j` and then coefficients.
fn class_representatives(f: &FiniteField) -> Result<Vec<Curve>> {
    let q = f.q();
    let p = f.p();
    if p == 2 {
        return Err(Error::Unsupported("characteristic 2 (never a good prime for X1(2,2n))".into()));
    }
    let nu = f.non_square();
    let zero = f.zero();
    let mut reps = Vec::new();
    if p == 3 {
        for j in f.elements().filter(|&j| !f.is_zero(j)) {
            for a2 in [f.one(), nu] {
                let a6 = f.neg(f.div(f.mul(f.mul(a2, a2), a2), j).unwrap());
                reps.push(Curve::new(a2, zero, a6));
            }
        }
        let k4 = gcd(4, (q - 1) as i64) as u64;
        for i in 0..k4 {
            let a4 = f.gen_pow(i);
            for a6 in char3_j0_a6_orbits(f, a4) {
                reps.push(Curve::new(zero, a4, a6));
            }
        }
    } else {
        let j1728 = f.from_int(1728 % p);
        for j in f.elements().filter(|&j| !f.is_zero(j) && j != j1728) {
            let k = f.div(j, f.sub(j1728, j)).unwrap();
            let e = Curve::new(zero, f.scale(3, k), f.scale(2, k));
            reps.push(e);
            reps.push(e.twist(f, nu));
        }
        for i in 0..gcd(6, (q - 1) as i64) as u64 {
            reps.push(Curve::new(zero, zero, f.gen_pow(i)));
        }
        for i in 0..gcd(4, (q - 1) as i64) as u64 {
            reps.push(Curve::new(zero, f.gen_pow(i), zero));
        }
    }
    debug_assert!(reps.iter().all(|e| e.is_smooth(f)));
    reps.sort_by_key(|e| (f.to_int(e.j_invariant(f)), f.to_int(e.a2), f.to_int(e.a4), f.to_int(e.a6)));
    Ok(reps)
}

/// All `𝔽_q`-isomorphism classes of elliptic curves with their automorphism
/// groups and group structures.
pub fn enumerate_curve_classes(f: &FiniteField) -> Result<Vec<CurveClassRecord>> {
    let reps = class_representatives(f)?;
    Ok(reps.par_iter().map(|&e| CurveClassRecord::build(f, e)).collect())
}

/// `Σ 1/|Aut|` over the classes, as an exact fraction.
pub fn mass(classes: &[CurveClassRecord]) -> crate::arith::Rational {
    classes
        .iter()
        .map(|c| crate::arith::rat(1, c.automorphisms as i64))
        .fold(crate::arith::int(0), |a, b| a + b)
}

/// Orbits under `Aut(E)` of pairs `(P, Q)` with `ord P = 2`, `ord Q = 2n`,
/// `⟨P⟩ ∩ ⟨Q⟩ = 0`.
pub fn torsion_pair_orbits(f: &FiniteField, record: &CurveClassRecord, n: u64) -> u64 {
    assert!(n >= 2, "level structure needs n ≥ 2");
    if record.order % (4 * n) != 0 || record.group_structure.0 % 2 != 0 {
        return 0;
    }
    let e = record.curve(f);
    let points = e.points(f);
    let two_torsion: Vec<Point> = points
        .iter()
        .copied()
        .filter(|p| matches!(p, Point::Affine(_, y) if f.is_zero(*y)))
        .collect();
    let m = 2 * n;
    let primes = prime_factors(m);
    let pairs: Vec<(Point, Point)> = points
        .iter()
        .copied()
        .filter(|&qt| {
            e.mul(f, qt, m) == Point::Infinity
                && primes.iter().all(|&l| e.mul(f, qt, m / l) != Point::Infinity)
        })
        .flat_map(|qt| {
            let nq = e.mul(f, qt, n);
            two_torsion.iter().copied().filter(move |&pt| pt != nq).map(move |pt| (pt, qt))
        })
        .collect();
    let auts = e.automorphisms(f);
    let index: HashMap<(Point, Point), usize> = pairs.iter().enumerate().map(|(i, &pq)| (pq, i)).collect();
    let mut seen = vec![false; pairs.len()];
    let mut orbits = 0;
    for start in 0..pairs.len() {
        if seen[start] {
            continue;
        }
        orbits += 1;
        let (pt, qt) = pairs[start];
        for &a in &auts {
            let image = (e.apply(f, a, pt), e.apply(f, a, qt));
            seen[index[&image]] = true;
        }
    }
    orbits
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCountRecord {
    pub spec: SubgroupSpec,
    pub field: FiniteFieldSpec,
    pub noncuspidal: u64,
    pub cuspidal: u64,
    pub total: u64,
    pub genus: u64,
}

impl PointCountRecord {
    /// `(total − q − 1)² ≤ 4g²q`.
    pub fn satisfies_weil_bound(&self) -> bool {
        let dev = self.total as i128 - self.field.q as i128 - 1;
        let g = self.genus as i128;
        dev * dev <= 4 * g * g * self.field.q as i128
    }
}

fn check_count_preconditions(spec: SubgroupSpec, f: &FiniteField) -> Result<u64> {
    let n = spec
        .half_level()
        .filter(|_| spec.kind() == SubgroupKind::Gamma1Two)
        .ok_or_else(|| Error::Unsupported(format!("point counts are implemented for X1(2,2n), not {spec}")))?;
    if 2 * n < 5 {
        return Err(Error::Unsupported(format!("{spec} is not a fine moduli curve")));
    }
    if spec.level() % f.p() == 0 {
        return Err(Error::BadReduction { p: f.p(), level: spec.level() });
    }
    Ok(n)
}

/// Number of `𝔽_q`-rational cusps: fixed points of the `q`-power Frobenius.
pub fn rational_cusps(spec: SubgroupSpec, q: u64) -> Result<u64> {
    let table = coset_table(spec)?;
    let perm = galois_action_on_cusps(&table, q % spec.level())?;
    Ok(perm.iter().enumerate().filter(|(i, &j)| *i == j).count() as u64)
}

/// `#X₁(2,2n)(𝔽_q)` from precomputed curve classes of the same field.
pub fn count_points_with_classes(
    spec: SubgroupSpec,
    f: &FiniteField,
    classes: &[CurveClassRecord],
) -> Result<PointCountRecord> {
    let n = check_count_preconditions(spec, f)?;
    let genus = Invariants::compute(spec)?.genus;
    let noncuspidal = classes.par_iter().map(|c| torsion_pair_orbits(f, c, n)).sum();
    let cuspidal = rational_cusps(spec, f.q())?;
    let record = PointCountRecord {
        spec,
        field: f.spec(),
        noncuspidal,
        cuspidal,
        total: noncuspidal + cuspidal,
        genus,
    };
    if !record.satisfies_weil_bound() {
        return Err(Error::WeilBound {
            curve: spec.to_string(),
            q: f.q(),
            total: record.total,
            genus,
        });
    }
    Ok(record)
}

pub fn count_points(spec: SubgroupSpec, f: &FiniteField) -> Result<PointCountRecord> {
    check_count_preconditions(spec, f)?;
    let classes = enumerate_curve_classes(f)?;
    count_points_with_classes(spec, f, &classes)
}

/// `gon_{𝔽_p} ≥ ⌈#X(𝔽_q)/(q+1)⌉`: a degree-`d` map to `ℙ¹` has at most
/// `d(q+1)` rational points in its fibres, and gonality only drops in extensions.
pub fn gonality_lower_from_count(record: &PointCountRecord) -> BoundFact {
    let q = record.field.q;
    let value = record.total.div_ceil(q + 1).max(1);
    BoundFact::new(
        Bound::new(
            record.spec,
            Quantity::GonFp { p: record.field.p },
            Relation::Ge,
            crate::arith::int(value as i64),
        ),
        Provenance::new(
            "point_count",
            vec![format!("#{}(F_{}) = {}", record.spec, q, record.total)],
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::int;

    #[test]
    fn mass_formula_small_fields() {
        for q in [3, 5, 7, 9, 11, 13, 25, 27, 49] {
            let f = FiniteField::new(q).unwrap();
            let classes = enumerate_curve_classes(&f).unwrap();
            assert_eq!(mass(&classes), int(q as i64), "q = {q}");
        }
    }

    #[test]
    fn hasse_interval_over_f3() {
        let f = FiniteField::new(3).unwrap();
        for c in enumerate_curve_classes(&f).unwrap() {
            assert!((1..=8).contains(&c.order), "{c:?}");
            let (d1, d2) = c.group_structure;
            assert_eq!(d1 * d2, c.order);
            assert_eq!(d2 % d1, 0);
        }
    }

    #[test]
    fn characteristic_two_is_rejected() {
        let f = FiniteField::new(4).unwrap();
        assert!(matches!(enumerate_curve_classes(&f), Err(Error::Unsupported(_))));
    }

    #[test]
    fn lagrange_filter() {
        let f = FiniteField::new(7).unwrap();
        for c in enumerate_curve_classes(&f).unwrap() {
            for n in 2..6 {
                if c.order % (4 * n) != 0 {
                    assert_eq!(torsion_pair_orbits(&f, &c, n), 0);
                }
            }
        }
    }

    #[test]
    fn hasse_forces_no_noncuspidal_points_on_x1_2_22_over_f3() {
        let f = FiniteField::new(3).unwrap();
        let rec = count_points(SubgroupSpec::gamma1_2(11).unwrap(), &f).unwrap();
        assert_eq!(rec.noncuspidal, 0);
        assert_eq!(rec.total, rec.cuspidal);
        assert_eq!(rec.cuspidal, rational_cusps(SubgroupSpec::gamma1_2(11).unwrap(), 3).unwrap());
    }

    #[test]
    fn count_bound_examples() {
        let spec = SubgroupSpec::gamma1_2(11).unwrap();
        let rec = |total, q, p| PointCountRecord {
            spec,
            field: FiniteFieldSpec { p, k: 1, q },
            noncuspidal: 0,
            cuspidal: total,
            total,
            genus: 16,
        };
        assert_eq!(gonality_lower_from_count(&rec(4, 3, 3)).bound.value, int(1));
        assert_eq!(gonality_lower_from_count(&rec(30, 3, 3)).bound.value, int(8));
    }

    #[test]
    fn bad_reduction_and_small_levels_are_rejected() {
        let f3 = FiniteField::new(3).unwrap();
        assert!(matches!(
            count_points(SubgroupSpec::gamma1_2(12).unwrap(), &f3),
            Err(Error::BadReduction { p: 3, level: 24 })
        ));
        assert!(count_points(SubgroupSpec::gamma1_2(2).unwrap(), &f3).is_err());
        assert!(count_points(SubgroupSpec::gamma1(11).unwrap(), &f3).is_err());
    }
}
