//! Congruence subgroups `Γ₁(N)` and `Γ₁(2,2n) = Γ₁(2n) ∩ Γ(2)`.
//!
//! Everything here works in `PSL₂(ℤ/M)`: the subgroup image always has `−I`
//! adjoined, so cosets, cusp widths and elliptic points are the projective
//! ones and `[PSL₂(ℤ):H]` is the index reported throughout the crate.
//!
//! Cosets are right cosets `H̄g`. The standard generators act on them by
//! right multiplication, cusps are the orbits of `T`, and the Galois action
//! on cusps comes from twisting a coset representative by `diag(1, q)`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{euler_phi, inv_mod, prime_factors, rat, Rational};
use crate::error::{Error, Result};

/// Largest level for which `PSL₂(ℤ/M)` is enumerated.
pub const ENUMERATION_CEILING: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubgroupKind {
    /// `Γ₁(N)`.
    Gamma1,
    /// `Γ₁(2n) ∩ Γ(2)`, parametrising `ℤ/2 × ℤ/2n` level structures.
    Gamma1Two,
}

/// A congruence subgroup from one of the two supported families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupSpec {
    kind: SubgroupKind,
    level: u64,
}

impl SubgroupSpec {
    pub fn gamma1(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLevel("Γ₁(N) needs N ≥ 1".into()));
        }
        Ok(Self { kind: SubgroupKind::Gamma1, level: n })
    }

    /// `Γ₁(2,2n)`, given `n`.
    pub fn gamma1_2(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidLevel("Γ₁(2,2n) needs n ≥ 1".into()));
        }
        Ok(Self { kind: SubgroupKind::Gamma1Two, level: 2 * n })
    }

    pub fn kind(&self) -> SubgroupKind {
        self.kind
    }

    /// The level `M`: `N` for `Γ₁(N)`, `2n` for `Γ₁(2,2n)`.
    pub fn level(&self) -> u64 {
        self.level
    }

    /// `n` for `Γ₁(2,2n)`.
    pub fn half_level(&self) -> Option<u64> {
        (self.kind == SubgroupKind::Gamma1Two).then_some(self.level / 2)
    }

    /// Does `±[[1,b],[0,1]]` lie in the image of the subgroup?
    fn contains_translation(&self, b: u64) -> bool {
        match self.kind {
            SubgroupKind::Gamma1 => true,
            SubgroupKind::Gamma1Two => b % 2 == 0,
        }
    }

    /// The subgroup image `±H` in `SL₂(ℤ/M)`, deduplicated.
    pub fn image(&self) -> Vec<Mat2> {
        let m = self.level;
        let mut out: Vec<Mat2> = (0..m)
            .filter(|&b| self.contains_translation(b))
            .flat_map(|b| {
                let h = Mat2::new(1, b as i64, 0, 1, m);
                [h, h.neg(m)]
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SubgroupKind::Gamma1 => write!(f, "X1({})", self.level),
            SubgroupKind::Gamma1Two => write!(f, "X1(2,{})", self.level),
        }
    }
}

impl FromStr for SubgroupSpec {
    type Err = Error;

    /// Accepts `X1(N)` and `X1(2,2n)`.
    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::CurveSyntax(text.to_string());
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix("X1(")
            .or_else(|| compact.strip_prefix("X_1("))
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(bad)?;
        let parts: Vec<&str> = inner.split(',').collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad());
        match parts.as_slice() {
            [n] => SubgroupSpec::gamma1(num(n)?).map_err(|_| bad()),
            [two, m] => {
                let m = num(m)?;
                if num(two)? != 2 || m % 2 == 1 || m < 2 {
                    return Err(bad());
                }
                SubgroupSpec::gamma1_2(m / 2)
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for SubgroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubgroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A 2×2 matrix with entries reduced modulo the ambient level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64, m: u64) -> Self {
        let m = m as i64;
        Self {
            a: a.rem_euclid(m),
            b: b.rem_euclid(m),
            c: c.rem_euclid(m),
            d: d.rem_euclid(m),
        }
    }

    pub fn identity(m: u64) -> Self {
        Self::new(1, 0, 0, 1, m)
    }

    pub fn mul(&self, o: &Mat2, m: u64) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
            m,
        )
    }

    pub fn neg(&self, m: u64) -> Mat2 {
        Mat2::new(-self.a, -self.b, -self.c, -self.d, m)
    }

    pub fn det(&self, m: u64) -> i64 {
        (self.a * self.d - self.b * self.c).rem_euclid(m as i64)
    }

    /// Representative of `±self` used for PSL equality.
    pub fn projective(&self, m: u64) -> Mat2 {
        (*self).min(self.neg(m))
    }

    pub fn t(m: u64) -> Mat2 {
        Mat2::new(1, 1, 0, 1, m)
    }

    pub fn s(m: u64) -> Mat2 {
        Mat2::new(0, -1, 1, 0, m)
    }
}

/// Right cosets of the subgroup image in `PSL₂(ℤ/M)` with the `S`/`T` action.
#[derive(Debug, Clone)]
pub struct CosetTable {
    spec: SubgroupSpec,
    /// Canonical representative (minimal element of the coset), sorted.
    pub cosets: Vec<Mat2>,
    /// `t_perm[i]` is the coset `H̄ g_i T`.
    pub t_perm: Vec<usize>,
    /// `s_perm[i]` is the coset `H̄ g_i S`.
    pub s_perm: Vec<usize>,
    lookup: HashMap<Mat2, usize>,
    image: Vec<Mat2>,
}

impl CosetTable {
    pub fn spec(&self) -> SubgroupSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    fn canonical(image: &[Mat2], g: &Mat2, m: u64) -> Mat2 {
        image.iter().map(|h| h.mul(g, m)).min().expect("image contains the identity")
    }

    /// Index of the coset containing `g` (any element of `SL₂(ℤ/M)`).
    pub fn coset_of(&self, g: &Mat2) -> usize {
        let key = Self::canonical(&self.image, g, self.spec.level);
        self.lookup[&key]
    }

    pub fn identity(&self) -> usize {
        self.coset_of(&Mat2::identity(self.spec.level))
    }

    /// Permutation induced by right multiplication with `ST` (order 3 in PSL).
    pub fn st_perm(&self) -> Vec<usize> {
        self.s_perm.iter().map(|&j| self.t_perm[j]).collect()
    }

    /// Integer lifts in `SL₂(ℤ)` of one representative per coset, built
    /// along a breadth-first spanning tree in the generators `S`, `T`.
    pub fn integer_representatives(&self) -> Vec<[i64; 4]> {
        let mut reps: Vec<Option<[i64; 4]>> = vec![None; self.len()];
        let start = self.identity();
        reps[start] = Some([1, 0, 0, 1]);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let g = reps[i].expect("visited");
            for (perm, gen) in [(&self.t_perm, [1, 1, 0, 1]), (&self.s_perm, [0, -1, 1, 0])] {
                let j = perm[i];
                if reps[j].is_none() {
                    reps[j] = Some(mul_int(&g, &gen));
                    queue.push_back(j);
                }
            }
        }
        reps.into_iter().map(|r| r.expect("action is transitive")).collect()
    }

    /// Schreier generators of the preimage of the subgroup in `SL₂(ℤ)`.
    pub fn schreier_generators(&self) -> Vec<[i64; 4]> {
        let reps = self.integer_representatives();
        let mut gens = Vec::new();
        for i in 0..self.len() {
            for (perm, gen) in [(&self.t_perm, [1, 1, 0, 1]), (&self.s_perm, [0, -1, 1, 0])] {
                let j = perm[i];
                let g = mul_int(&mul_int(&reps[i], &gen), &inv_int(&reps[j]));
                if g != [1, 0, 0, 1] {
                    gens.push(g);
                }
            }
        }
        gens.sort_unstable();
        gens.dedup();
        gens
    }
}

pub(crate) fn mul_int(x: &[i64; 4], y: &[i64; 4]) -> [i64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

pub(crate) fn inv_int(x: &[i64; 4]) -> [i64; 4] {
    [x[3], -x[1], -x[2], x[0]]
}

/// `[PSL₂(ℤ) : H]` from the Euler product, evaluated exactly.
pub fn index_closed_form(spec: SubgroupSpec) -> u64 {
    fn gamma1(n: u64) -> u64 {
        match n {
            1 => 1,
            2 => 3,
            _ => {
                let prod = prime_factors(n)
                    .into_iter()
                    .fold(rat(1, 1), |acc, p| acc * (Rational::from_integer(1) - rat(1, (p * p) as i64)));
                let v = Rational::from_integer((n * n) as i64) / 2 * prod;
                debug_assert!(v.is_integer());
                v.to_integer() as u64
            }
        }
    }
    match spec.kind {
        SubgroupKind::Gamma1 => gamma1(spec.level),
        SubgroupKind::Gamma1Two => 2 * gamma1(spec.level),
    }
}

/// Enumerates the right cosets by breadth-first search from the identity.
pub fn coset_table(spec: SubgroupSpec) -> Result<CosetTable> {
    let m = spec.level;
    if m > ENUMERATION_CEILING {
        return Err(Error::LevelTooLarge { level: m, ceiling: ENUMERATION_CEILING });
    }
    let image = spec.image();
    let (t, s) = (Mat2::t(m), Mat2::s(m));
    let mut keys: Vec<Mat2> = Vec::new();
    let mut reps: Vec<Mat2> = Vec::new();
    let mut lookup: HashMap<Mat2, usize> = HashMap::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();

    let mut intern = |g: Mat2, keys: &mut Vec<Mat2>, reps: &mut Vec<Mat2>| -> (usize, bool) {
        let key = CosetTable::canonical(&image, &g, m);
        if let Some(&i) = lookup.get(&key) {
            return (i, false);
        }
        let i = keys.len();
        lookup.insert(key, i);
        keys.push(key);
        reps.push(g);
        (i, true)
    };

    intern(Mat2::identity(m), &mut keys, &mut reps);
    let mut next = 0;
    while next < reps.len() {
        let g = reps[next];
        let (ti, _) = intern(g.mul(&t, m), &mut keys, &mut reps);
        let (si, _) = intern(g.mul(&s, m), &mut keys, &mut reps);
        edges.push([ti, si]);
        next += 1;
    }

    // Canonical ordering by minimal representative.
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by_key(|&i| keys[i]);
    let mut rank = vec![0; keys.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let cosets: Vec<Mat2> = order.iter().map(|&i| keys[i]).collect();
    let t_perm = order.iter().map(|&i| rank[edges[i][0]]).collect();
    let s_perm = order.iter().map(|&i| rank[edges[i][1]]).collect();
    let lookup = cosets.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    Ok(CosetTable { spec, cosets, t_perm, s_perm, lookup, image })
}

/// A cusp: a `T`-orbit of cosets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuspClass {
    /// Smallest coset index in the orbit.
    pub representative: usize,
    pub width: u64,
    /// Label of the Galois orbit (smallest cusp index in it).
    pub galois_orbit: usize,
}

fn orbits(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            orbit.push(i);
            i = perm[i];
        }
        out.push(orbit);
    }
    out
}

/// Cusp of every coset, plus the orbits themselves (ordered by least member).
pub fn cusp_partition(table: &CosetTable) -> (Vec<usize>, Vec<Vec<usize>>) {
    let orbs = orbits(&table.t_perm);
    let mut cusp_of = vec![0; table.len()];
    for (k, orbit) in orbs.iter().enumerate() {
        for &i in orbit {
            cusp_of[i] = k;
        }
    }
    (cusp_of, orbs)
}

/// Permutation of cusps induced by the Galois element `ζ_M ↦ ζ_M^q`.
///
/// A coset `H̄g` is sent to `H̄ diag(1,q)⁻¹ g diag(1,q)`, i.e. `g` is
/// multiplied on the right by `diag(1,q)` and brought back to determinant one
/// by an element of the extended group `{[[1,*],[0,*]]}`.
pub fn galois_action_on_cusps(table: &CosetTable, q: u64) -> Result<Vec<usize>> {
    let m = table.spec.level;
    let qi = inv_mod(q as i64, m as i64).ok_or(Error::NotCoprime { value: q, level: m })?;
    let q = q as i64;
    let (cusp_of, orbs) = cusp_partition(table);
    Ok(orbs
        .iter()
        .map(|orbit| {
            let g = table.cosets[orbit[0]];
            let twisted = Mat2::new(g.a, g.b * q, g.c * qi, g.d, m);
            cusp_of[table.coset_of(&twisted)]
        })
        .collect())
}

/// Cusp classes with widths and Galois-orbit labels.
pub fn cusp_classes(table: &CosetTable) -> Vec<CuspClass> {
    let m = table.spec.level;
    let (_, orbs) = cusp_partition(table);
    let n = orbs.len();
    // Union of all Galois permutations for units d mod M.
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while label[r] != r {
            r = label[r];
        }
        label[i] = r;
        r
    }
    for d in (1..m.max(2)).filter(|&d| num_integer::gcd(d, m) == 1) {
        let perm = galois_action_on_cusps(table, d).expect("d is a unit");
        for (i, &j) in perm.iter().enumerate() {
            let (ri, rj) = (find(&mut label, i), find(&mut label, j));
            if ri != rj {
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    orbs.iter()
        .enumerate()
        .map(|(k, orbit)| CuspClass {
            representative: orbit[0],
            width: orbit.len() as u64,
            galois_orbit: find(&mut label, k),
        })
        .collect()
}

/// `(ν₂, ν₃)`: cosets fixed by `S` and by `ST`.
pub fn elliptic_counts(table: &CosetTable) -> (u64, u64) {
    let nu2 = table.s_perm.iter().enumerate().filter(|(i, &j)| *i == j).count();
    let nu3 = table.st_perm().iter().enumerate().filter(|(i, &j)| *i == j).count();
    (nu2 as u64, nu3 as u64)
}

/// `1 + μ/12 − ν₂/4 − ν₃/3 − ν∞/2`, which must be a non-negative integer.
pub fn genus_formula(index: u64, nu2: u64, nu3: u64, cusps: u64) -> Result<u64> {
    let g = Rational::from_integer(1) + rat(index as i64, 12)
        - rat(nu2 as i64, 4)
        - rat(nu3 as i64, 3)
        - rat(cusps as i64, 2);
    if !g.is_integer() || g < Rational::from_integer(0) {
        return Err(Error::Inconsistent(format!(
            "genus formula gives {g} for index {index}, ν₂={nu2}, ν₃={nu3}, {cusps} cusps"
        )));
    }
    Ok(g.to_integer() as u64)
}

/// All invariants of `X_H`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invariants {
    pub spec: SubgroupSpec,
    pub index: u64,
    pub nu2: u64,
    pub nu3: u64,
    pub cusps: Vec<CuspClass>,
    pub genus: u64,
}

impl Invariants {
    pub fn compute(spec: SubgroupSpec) -> Result<Self> {
        let table = coset_table(spec)?;
        Self::from_table(&table)
    }

    pub fn from_table(table: &CosetTable) -> Result<Self> {
        let spec = table.spec;
        let index = index_closed_form(spec);
        if index != table.len() as u64 {
            return Err(Error::Inconsistent(format!(
                "{spec}: closed-form index {index} but {} cosets",
                table.len()
            )));
        }
        let (nu2, nu3) = elliptic_counts(table);
        let cusps = cusp_classes(table);
        let genus = genus_formula(index, nu2, nu3, cusps.len() as u64)?;
        Ok(Self { spec, index, nu2, nu3, cusps, genus })
    }

    pub fn galois_orbit_count(&self) -> usize {
        let mut labels: Vec<usize> = self.cusps.iter().map(|c| c.galois_orbit).collect();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }
}

/// Genus of `spec`.
pub fn genus(spec: SubgroupSpec) -> Result<u64> {
    Ok(Invariants::compute(spec)?.genus)
}

/// Number of cusps of `Γ₁(N)` from `½ Σ_{d|N} φ(d) φ(N/d)` (valid for `N ≥ 5`).
pub fn gamma1_cusp_count_formula(n: u64) -> u64 {
    crate::arith::divisors(n)
        .into_iter()
        .map(|d| euler_phi(d) * euler_phi(n / d))
        .sum::<u64>()
        / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_modular_group() {
        let spec = SubgroupSpec::gamma1(1).unwrap();
        let table = coset_table(spec).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.t_perm, vec![0]);
        assert_eq!(table.s_perm, vec![0]);
        let inv = Invariants::from_table(&table).unwrap();
        assert_eq!((inv.nu2, inv.nu3), (1, 1));
        assert_eq!(inv.cusps.len(), 1);
        assert_eq!(inv.cusps[0].width, 1);
        assert_eq!(inv.genus, 0);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(index_closed_form(SubgroupSpec::gamma1(1).unwrap()), 1);
        assert_eq!(index_closed_form(SubgroupSpec::gamma1(2).unwrap()), 3);
        assert_eq!(index_closed_form(SubgroupSpec::gamma1(3).unwrap()), 4);
        assert_eq!(index_closed_form(SubgroupSpec::gamma1(30).unwrap()), 288);
        assert_eq!(index_closed_form(SubgroupSpec::gamma1_2(15).unwrap()), 576);
        assert_eq!(index_closed_form(SubgroupSpec::gamma1(44).unwrap()), 720);
        assert_eq!(index_closed_form(SubgroupSpec::gamma1_2(22).unwrap()), 1440);
    }

    #[test]
    fn level_two_is_gamma_two() {
        let inv = Invariants::compute(SubgroupSpec::gamma1_2(1).unwrap()).unwrap();
        assert_eq!(inv.index, 6);
        assert_eq!(inv.cusps.len(), 3);
        assert!(inv.cusps.iter().all(|c| c.width == 2));
        assert_eq!(inv.genus, 0);
    }

    #[test]
    fn coset_counts_match_closed_form() {
        assert_eq!(coset_table(SubgroupSpec::gamma1(30).unwrap()).unwrap().len(), 288);
        assert_eq!(coset_table(SubgroupSpec::gamma1_2(16).unwrap()).unwrap().len(), 768);
    }

    #[test]
    fn cusps_of_x1_30() {
        let inv = Invariants::compute(SubgroupSpec::gamma1(30).unwrap()).unwrap();
        assert_eq!(inv.cusps.len() as u64, gamma1_cusp_count_formula(30));
        assert_eq!(inv.cusps.len(), 32);
        assert_eq!((inv.nu2, inv.nu3), (0, 0));
        assert_eq!(inv.genus, 9);
        let x = Invariants::compute(SubgroupSpec::gamma1_2(15).unwrap()).unwrap();
        assert_eq!(x.cusps.iter().map(|c| c.width).sum::<u64>(), 576);
        assert_eq!(x.genus, 25);
    }

    #[test]
    fn elliptic_points_vanish_for_gamma1_2_22() {
        let table = coset_table(SubgroupSpec::gamma1_2(11).unwrap()).unwrap();
        assert_eq!(elliptic_counts(&table), (0, 0));
    }

    #[test]
    fn ceiling_is_enforced() {
        let err = coset_table(SubgroupSpec::gamma1(101).unwrap()).unwrap_err();
        assert!(matches!(err, Error::LevelTooLarge { level: 101, .. }));
    }

    #[test]
    fn galois_action_identity_and_composition() {
        let table = coset_table(SubgroupSpec::gamma1_2(11).unwrap()).unwrap();
        let id = galois_action_on_cusps(&table, 23).unwrap();
        assert!(id.iter().enumerate().all(|(i, &j)| i == j));
        let p3 = galois_action_on_cusps(&table, 3).unwrap();
        let p7 = galois_action_on_cusps(&table, 7).unwrap();
        let p21 = galois_action_on_cusps(&table, 21).unwrap();
        let composed: Vec<usize> = (0..p3.len()).map(|i| p7[p3[i]]).collect();
        assert_eq!(composed, p21);
        assert!(galois_action_on_cusps(&table, 11).is_err());
    }

    #[test]
    fn curve_syntax() {
        let x: SubgroupSpec = "X1(2,30)".parse().unwrap();
        assert_eq!(x, SubgroupSpec::gamma1_2(15).unwrap());
        assert_eq!(x.to_string(), "X1(2,30)");
        assert!("X1(2,7)".parse::<SubgroupSpec>().is_err());
        assert!("X1(3,9)".parse::<SubgroupSpec>().is_err());
        assert!("X0(11)".parse::<SubgroupSpec>().is_err());
        assert_eq!("X1(1)".parse::<SubgroupSpec>().unwrap(), SubgroupSpec::gamma1(1).unwrap());
    }

    #[test]
    fn schreier_generators_lie_in_the_subgroup() {
        let spec = SubgroupSpec::gamma1_2(5).unwrap();
        let table = coset_table(spec).unwrap();
        let image = spec.image();
        let m = spec.level();
        for g in table.schreier_generators() {
            assert_eq!(g[0] * g[3] - g[1] * g[2], 1);
            let r = Mat2::new(g[0], g[1], g[2], g[3], m);
            assert!(image.contains(&r), "{g:?}");
        }
    }
}
