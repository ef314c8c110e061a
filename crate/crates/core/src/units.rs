//! Modular units built from Siegel functions, and a search for units of
//! small degree.
//!
//! A row of the [`CuspOrderMatrix`] is the product `F_O = ∏_{a ∈ O} g_a` of
//! Siegel functions over an orbit `O` of `(ℤ/M)² ∖ 0` (modulo `±1`) under the
//! subgroup image together with the diagonal matrices `diag(1, d)`. Each
//! `F_O` is invariant under the subgroup up to a character, and its divisor is
//! stable under the Galois action on cusps. An exponent vector `e` gives a
//! function on the curve over `ℚ` (after scaling by a constant) exactly when
//! the characters cancel, which is decided from the exact transformation law of
//! Klein forms on Schreier generators.
//!
//! The order of `g_a` at the cusp `γ∞` of width `w`, in the local parameter
//! `q^{1/w}`, is `w/2 · B₂(⟨(aγ)₁/M⟩)`.

use std::time::{Duration, Instant};

use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{bernoulli2, dedekind_sum, frac, int, rat, serde_rational_vec, Rational};
use crate::bounds::{Bound, BoundFact, InfinitelyManyPoints, Provenance, Quantity, Relation};
use crate::congruence::{coset_table, cusp_classes, CuspClass, Mat2, SubgroupSpec};
use crate::error::{Error, Result};

pub const UNIT_LEVEL_CEILING: u64 = 60;
pub const DEFAULT_BOX: i64 = 12;
pub const DEFAULT_BUDGET: Duration = Duration::from_secs(600);

/// `a = (a₁, a₂) ∈ (ℤ/M)² ∖ 0` modulo `±1`, stored as the lexicographically
/// smaller of `a` and `−a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiegelIndex {
    pub a1: i64,
    pub a2: i64,
}

impl SiegelIndex {
    pub fn new(a1: i64, a2: i64, m: u64) -> Option<Self> {
        let m = m as i64;
        let (x1, x2) = (a1.rem_euclid(m), a2.rem_euclid(m));
        if x1 == 0 && x2 == 0 {
            return None;
        }
        let (y1, y2) = ((-x1).rem_euclid(m), (-x2).rem_euclid(m));
        let (a1, a2) = (x1, x2).min((y1, y2));
        Some(Self { a1, a2 })
    }

    /// The row vector `a · g`.
    pub fn act(&self, g: &Mat2, m: u64) -> Self {
        Self::new(self.a1 * g.a + self.a2 * g.c, self.a1 * g.b + self.a2 * g.d, m).expect("g is invertible")
    }
}

/// Orders of vanishing of the orbit products `F_O` at every cusp.
#[derive(Debug, Clone)]
pub struct CuspOrderMatrix {
    pub spec: SubgroupSpec,
    /// One orbit per row, sorted.
    pub rows: Vec<Vec<SiegelIndex>>,
    pub cusps: Vec<CuspClass>,
    /// `entries[row][cusp]`.
    pub entries: Vec<Vec<Rational>>,
    /// Generators of the subgroup in `SL₂(ℤ)`.
    pub generators: Vec<[i64; 4]>,
    /// `multipliers[row][gen]`: `F_O(γτ) = exp(2πi·χ) F_O(τ)`, with `χ ∈ [0, 1)`.
    pub multipliers: Vec<Vec<Rational>>,
}

/// A product `∏ F_O^{e_O}` with its divisor on the cusps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitCandidate {
    pub curve: SubgroupSpec,
    pub exponents: Vec<i64>,
    #[serde(with = "serde_rational_vec")]
    pub divisor: Vec<Rational>,
    pub degree: u64,
}

/// Phase of `ε_γ²` in `η(γτ)² = ε_γ² (cτ + d) η(τ)²`, in turns.
pub fn eta_squared_phase(g: &[i64; 4]) -> Rational {
    let [a, b, c, d] = *g;
    let phase = if c == 0 {
        if d == 1 {
            rat(b, 12)
        } else {
            rat(1, 2) - rat(b, 12)
        }
    } else if c < 0 {
        eta_squared_phase(&[-a, -b, -c, -d]) + rat(1, 2)
    } else {
        rat(a + d, 12 * c) - dedekind_sum(d, c) - rat(1, 4)
    };
    frac(phase)
}

/// Phase of `ε(a, b)` in `𝔨_{a+b} = ε(a, b) 𝔨_a` for integral `b`, in turns.
fn klein_shift_phase(a: (Rational, Rational), b: (i64, i64)) -> Rational {
    let (b1, b2) = b;
    rat(b1 * b2 + b1 + b2, 2) - (a.1 * b1 - a.0 * b2) / 2
}

/// `χ` with `F_O(γτ) = exp(2πiχ) F_O(τ)` for `γ` preserving the orbit.
pub fn row_multiplier(orbit: &[SiegelIndex], m: u64, g: &[i64; 4]) -> Result<Rational> {
    let [p, q, r, s] = *g;
    let mi = m as i64;
    let mut total = eta_squared_phase(g) * int(orbit.len() as i64);
    for a in orbit {
        let x1 = a.a1 * p + a.a2 * r;
        let x2 = a.a1 * q + a.a2 * s;
        let c = SiegelIndex::new(x1, x2, m).expect("nonzero");
        if orbit.binary_search(&c).is_err() {
            return Err(Error::Inconsistent(format!("{g:?} does not preserve the Siegel orbit of {a:?}")));
        }
        let positive = (x1 - c.a1).rem_euclid(mi) == 0 && (x2 - c.a2).rem_euclid(mi) == 0;
        let sign = if positive { 1 } else { -1 };
        let b = ((x1 - sign * c.a1) / mi, (x2 - sign * c.a2) / mi);
        let base = (rat(sign * c.a1, mi), rat(sign * c.a2, mi));
        total += klein_shift_phase(base, b);
        if sign < 0 {
            total += rat(1, 2);
        }
    }
    Ok(frac(total))
}

fn siegel_orbits(spec: SubgroupSpec) -> Vec<Vec<SiegelIndex>> {
    let m = spec.level();
    let mut group = spec.image();
    group.extend(
        (1..m)
            .filter(|&d| d.gcd(&m) == 1)
            .map(|d| Mat2::new(1, 0, 0, d as i64, m)),
    );
    let mut all: Vec<SiegelIndex> = (0..m as i64)
        .flat_map(|a1| (0..m as i64).filter_map(move |a2| SiegelIndex::new(a1, a2, m)))
        .collect();
    all.sort();
    all.dedup();
    let mut seen = std::collections::HashSet::new();
    let mut rows = Vec::new();
    for a in all {
        if !seen.insert(a) {
            continue;
        }
        let mut orbit = vec![a];
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i];
            for g in &group {
                let y = x.act(g, m);
                if seen.insert(y) {
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit.sort();
        rows.push(orbit);
    }
    rows
}

/// Builds the order matrix, the Schreier generators and the row multipliers.
pub fn siegel_order_matrix(spec: SubgroupSpec) -> Result<CuspOrderMatrix> {
    let m = spec.level();
    if m > UNIT_LEVEL_CEILING {
        return Err(Error::LevelTooLarge { level: m, ceiling: UNIT_LEVEL_CEILING });
    }
    if m < 2 {
        return Err(Error::Unsupported(format!("Siegel units need level at least 2, got {spec}")));
    }
    let table = coset_table(spec)?;
    let cusps = cusp_classes(&table);
    let rows = siegel_orbits(spec);
    let entries = rows
        .iter()
        .map(|orbit| {
            cusps
                .iter()
                .map(|cusp| {
                    let g = table.cosets[cusp.representative];
                    let sum = orbit
                        .iter()
                        .map(|a| bernoulli2(rat((a.a1 * g.a + a.a2 * g.c).rem_euclid(m as i64), m as i64)))
                        .fold(Rational::zero(), |x, y| x + y);
                    sum * rat(cusp.width as i64, 2)
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>();
    let generators: Vec<[i64; 4]> = table
        .schreier_generators()
        .into_iter()
        .filter(|g| *g != [-1, 0, 0, -1])
        .collect();
    let multipliers = rows
        .iter()
        .map(|orbit| generators.iter().map(|g| row_multiplier(orbit, m, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let matrix = CuspOrderMatrix { spec, rows, cusps, entries, generators, multipliers };
    for (i, row) in matrix.entries.iter().enumerate() {
        if !row.iter().fold(Rational::zero(), |a, &b| a + b).is_zero() {
            return Err(Error::Inconsistent(format!("row {i} of the order matrix of {spec} has nonzero degree")));
        }
        if !matrix.is_galois_stable(row) {
            return Err(Error::Inconsistent(format!("row {i} of the order matrix of {spec} is not Galois stable")));
        }
    }
    Ok(matrix)
}

impl CuspOrderMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cusps.len())
    }

    /// `eᵀ · entries`.
    pub fn divisor(&self, exponents: &[i64]) -> Vec<Rational> {
        (0..self.cusps.len())
            .map(|c| {
                exponents
                    .iter()
                    .zip(&self.entries)
                    .map(|(&e, row)| row[c] * e)
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// `Σ e_O χ_O(γ)` for every generator `γ`.
    pub fn multiplier(&self, exponents: &[i64]) -> Vec<Rational> {
        (0..self.generators.len())
            .map(|j| {
                let total = exponents
                    .iter()
                    .zip(&self.multipliers)
                    .map(|(&e, row)| row[j] * e)
                    .fold(Rational::zero(), |a, b| a + b);
                frac(total)
            })
            .collect()
    }

    fn is_galois_stable(&self, divisor: &[Rational]) -> bool {
        self.cusps.iter().zip(divisor).all(|(c, v)| divisor[c.galois_orbit] == *v)
    }

    /// Cusp indices that label a Galois orbit, with the orbit sizes.
    fn galois_orbits(&self) -> (Vec<usize>, Vec<i128>) {
        let labels: Vec<usize> = (0..self.cusps.len()).filter(|&c| self.cusps[c].galois_orbit == c).collect();
        let sizes = labels
            .iter()
            .map(|&l| self.cusps.iter().filter(|c| c.galois_orbit == l).count() as i128)
            .collect();
        (labels, sizes)
    }
}

fn degree_of(divisor: &[Rational]) -> Rational {
    divisor.iter().filter(|v| v.is_positive()).fold(Rational::zero(), |a, &b| a + b)
}

/// Checks every claim a candidate makes against the matrix: the divisor is
/// `eᵀ·entries`, integral, of degree zero and Galois stable, the recorded
/// degree is its positive part, `e ≠ 0`, and the characters cancel.
pub fn verify_candidate(candidate: &UnitCandidate, matrix: &CuspOrderMatrix) -> bool {
    if candidate.curve != matrix.spec
        || candidate.exponents.len() != matrix.rows.len()
        || candidate.exponents.iter().all(|&e| e == 0)
    {
        return false;
    }
    let divisor = matrix.divisor(&candidate.exponents);
    divisor == candidate.divisor
        && divisor.iter().all(|v| v.is_integer())
        && divisor.iter().fold(Rational::zero(), |a, &b| a + b).is_zero()
        && matrix.is_galois_stable(&divisor)
        && candidate.degree >= 1
        && degree_of(&divisor) == int(candidate.degree as i64)
        && matrix.multiplier(&candidate.exponents).iter().all(|x| x.is_zero())
}

/// A verified unit of degree `d` is a degree-`d` map to `ℙ¹` over `ℚ`, so the
/// curve has infinitely many degree-`d` points and `gon_ℚ ≤ d`.
pub fn unit_to_bound(candidate: &UnitCandidate, matrix: &CuspOrderMatrix) -> Result<(InfinitelyManyPoints, BoundFact)> {
    if !verify_candidate(candidate, matrix) {
        return Err(Error::UnverifiedUnit(format!(
            "{} with exponents {:?}",
            candidate.curve, candidate.exponents
        )));
    }
    let degree = candidate.degree;
    let fact = BoundFact::new(
        Bound::new(candidate.curve, Quantity::GonQ, Relation::Le, int(degree as i64)),
        Provenance::new(
            "modular_unit",
            vec![format!("unit of degree {degree} on {} with exponents {:?}", candidate.curve, candidate.exponents)],
        ),
    );
    Ok((InfinitelyManyPoints { curve: candidate.curve, degree }, fact))
}

fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1, mut s0, mut s1, mut t0, mut t1) = (a, b, 1i128, 0i128, 0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Upper-triangular basis of a full-rank lattice containing `d·ℤʳ`, with
/// entries reduced modulo `d` during elimination.
fn hnf_mod(gens: Vec<Vec<i128>>, d: i128, r: usize) -> Vec<Vec<i128>> {
    let mut work = gens;
    for j in 0..r {
        let mut v = vec![0; r];
        v[j] = d;
        work.push(v);
    }
    let reduce = |v: &mut Vec<i128>, from: usize| {
        for x in v.iter_mut().skip(from) {
            *x = x.rem_euclid(d);
        }
    };
    let mut basis: Vec<Vec<i128>> = Vec::with_capacity(r);
    for j in 0..r {
        let mut pivot: Option<Vec<i128>> = None;
        let mut rest = Vec::with_capacity(work.len());
        for row in work {
            if row[j] == 0 {
                rest.push(row);
                continue;
            }
            match pivot.take() {
                None => pivot = Some(row),
                Some(p) => {
                    let (g, x, y) = xgcd(p[j], row[j]);
                    let (a, b) = (p[j] / g, row[j] / g);
                    let mut np: Vec<i128> = p.iter().zip(&row).map(|(&u, &v)| x * u + y * v).collect();
                    let mut nr: Vec<i128> = p.iter().zip(&row).map(|(&u, &v)| a * v - b * u).collect();
                    reduce(&mut np, j + 1);
                    reduce(&mut nr, j + 1);
                    if nr.iter().any(|&z| z != 0) {
                        rest.push(nr);
                    }
                    pivot = Some(np);
                }
            }
        }
        let mut p = pivot.expect("d·e_j is in the lattice");
        if p[j] < 0 {
            p.iter_mut().for_each(|z| *z = -*z);
        }
        reduce(&mut p, j + 1);
        basis.push(p);
        work = rest;
    }
    // Size-reduce above the pivots. Since d·ℤʳ lies in the lattice, entries
    // right of the current column may be taken modulo d to keep them small.
    for i in (0..r).rev() {
        for j in i + 1..r {
            let q = basis[i][j].div_euclid(basis[j][j]);
            if q != 0 {
                let bj = basis[j].clone();
                basis[i].iter_mut().zip(&bj).for_each(|(u, &v)| *u -= q * v);
                reduce(&mut basis[i], j + 1);
            }
        }
    }
    basis
}

/// Echelon basis of the lattice of principal Galois-stable divisors, on
/// Galois-orbit coordinates, each with an exponent vector realizing it.
#[derive(Debug, Clone)]
struct DivisorLattice {
    /// `(divisor on orbits, exponents)`; pivots strictly increase.
    echelon: Vec<(Vec<i128>, Vec<i128>)>,
    pivots: Vec<usize>,
    /// Exponent vectors of constant functions.
    kernel: Vec<Vec<i128>>,
    weights: Vec<i128>,
}

fn lcm_of_denominators<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> i128 {
    xs.into_iter().fold(1i128, |acc, x| acc.lcm(&(*x.denom() as i128)))
}

const MODULUS_LIMIT: i128 = 1 << 48;

fn divisor_lattice(matrix: &CuspOrderMatrix) -> Result<DivisorLattice> {
    let r = matrix.rows.len();
    let mut columns: Vec<Vec<Rational>> = (0..matrix.generators.len())
        .map(|j| matrix.multipliers.iter().map(|row| row[j]).collect())
        .collect();
    columns.extend((0..matrix.cusps.len()).map(|c| matrix.entries.iter().map(|row| row[c]).collect()));
    columns.retain(|col| col.iter().any(|x| !x.is_integer()));
    let d = lcm_of_denominators(columns.iter().flatten());
    if d > MODULUS_LIMIT {
        return Err(Error::Unsupported(format!("denominator {d} of the unit constraints is too large")));
    }
    let columns: Vec<Vec<i128>> = columns
        .iter()
        .map(|col| col.iter().map(|x| (*x.numer() as i128 * (d / *x.denom() as i128)).rem_euclid(d)).collect())
        .collect();
    let mut basis: Vec<Vec<i128>> = (0..r)
        .map(|i| (0..r).map(|j| i128::from(i == j)).collect())
        .collect();
    for col in &columns {
        let vals: Vec<i128> = basis
            .iter()
            .map(|b| b.iter().zip(col).map(|(&u, &v)| (u * v).rem_euclid(d)).sum::<i128>().rem_euclid(d))
            .collect();
        if vals.iter().all(|&v| v == 0) {
            continue;
        }
        let mut gens = Vec::with_capacity(r);
        let mut pivot: Option<(Vec<i128>, i128)> = None;
        for (b, v) in basis.into_iter().zip(vals) {
            if v == 0 {
                gens.push(b);
                continue;
            }
            match pivot.take() {
                None => pivot = Some((b, v)),
                Some((p, pv)) => {
                    let (g, x, y) = xgcd(pv, v);
                    let (a, c) = (pv / g, v / g);
                    gens.push(p.iter().zip(&b).map(|(&u, &w)| (a * w - c * u).rem_euclid(d)).collect());
                    pivot = Some((p.iter().zip(&b).map(|(&u, &w)| (x * u + y * w).rem_euclid(d)).collect(), g));
                }
            }
        }
        let (p, pv) = pivot.expect("some value is nonzero");
        let scale = d / pv.gcd(&d);
        gens.push(p.iter().map(|&u| u * scale).collect());
        basis = hnf_mod(gens, d, r);
    }

    let (labels, weights) = matrix.galois_orbits();
    let mut rows: Vec<(Vec<i128>, Vec<i128>)> = Vec::with_capacity(r);
    for b in &basis {
        let image: Vec<i128> = labels
            .iter()
            .map(|&c| {
                let v = b
                    .iter()
                    .zip(&matrix.entries)
                    .map(|(&e, row)| row[c] * Rational::from_integer(e as i64))
                    .fold(Rational::zero(), |a, x| a + x);
                v.is_integer()
                    .then(|| *v.numer() as i128)
                    .ok_or_else(|| Error::Inconsistent("non-integral divisor in the unit lattice".into()))
            })
            .collect::<Result<_>>()?;
        rows.push((image, b.clone()));
    }
    let width = labels.len();
    let mut echelon = Vec::new();
    let mut pivots = Vec::new();
    let mut kernel = Vec::new();
    for col in 0..width {
        let (mut nonzero, zero): (Vec<_>, Vec<_>) = rows.into_iter().partition(|(v, _)| v[col] != 0);
        rows = zero;
        while nonzero.len() > 1 {
            nonzero.sort_by_key(|(v, _)| v[col].abs());
            let (pv, pe) = nonzero[0].clone();
            let mut next = vec![(pv.clone(), pe.clone())];
            for (v, e) in nonzero.into_iter().skip(1) {
                let q = v[col].div_euclid(pv[col]);
                let nv: Vec<i128> = v.iter().zip(&pv).map(|(&a, &b)| a - q * b).collect();
                let ne: Vec<i128> = e.iter().zip(&pe).map(|(&a, &b)| a - q * b).collect();
                if nv[col] == 0 {
                    rows.push((nv, ne));
                } else {
                    next.push((nv, ne));
                }
            }
            nonzero = next;
        }
        if let Some((mut v, mut e)) = nonzero.pop() {
            if v[col] < 0 {
                v.iter_mut().for_each(|z| *z = -*z);
                e.iter_mut().for_each(|z| *z = -*z);
            }
            echelon.push((v, e));
            pivots.push(col);
        }
        if rows.iter().flat_map(|(v, e)| v.iter().chain(e)).any(|z| z.abs() > MODULUS_LIMIT * MODULUS_LIMIT) {
            return Err(Error::Unsupported("coefficient growth in the divisor lattice".into()));
        }
    }
    // Centre the entries above each pivot so echelon coordinates stay small.
    for k in 0..echelon.len() {
        let col = pivots[k];
        let (pv, pe) = echelon[k].clone();
        for (v, e) in echelon.iter_mut().take(k) {
            let q = (2 * v[col] + pv[col]).div_euclid(2 * pv[col]);
            if q != 0 {
                v.iter_mut().zip(&pv).for_each(|(a, &b)| *a -= q * b);
                e.iter_mut().zip(&pe).for_each(|(a, &b)| *a -= q * b);
            }
        }
    }
    kernel.extend(rows.into_iter().map(|(_, e)| e).filter(|e| e.iter().any(|&z| z != 0)));
    let kernel = lll(kernel);
    Ok(DivisorLattice { echelon, pivots, kernel, weights })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Bound on each coordinate in the echelon basis of the divisor lattice.
    pub box_bound: i64,
    pub budget: Duration,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { box_bound: DEFAULT_BOX, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Minimal { max_degree: u64 },
    Exact { degree: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub candidate: Option<UnitCandidate>,
    pub nodes: u64,
    /// False when the time budget cut the search short.
    pub complete: bool,
}

struct Search<'a> {
    lattice: &'a DivisorLattice,
    target: Target,
    box_bound: i128,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
    /// Smallest degree not yet excluded (minimal) or the target degree plus one (exact).
    limit: i128,
    best: Option<Vec<i128>>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.timed_out || matches!(self.target, Target::Exact { .. }) && self.best.is_some()
    }

    fn visit(&mut self, k: usize, coords: &mut Vec<i128>, current: &[i128]) {
        self.nodes += 1;
        if self.nodes % 4096 == 0 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.done() {
            return;
        }
        let l = self.lattice;
        let fixed = l.pivots.get(k).copied().unwrap_or(current.len());
        let (mut pos, mut neg) = (0i128, 0i128);
        for c in 0..fixed {
            let v = current[c] * l.weights[c];
            if v > 0 {
                pos += v;
            } else {
                neg -= v;
            }
        }
        if pos.max(neg) >= self.limit {
            return;
        }
        if k == l.echelon.len() {
            if current.iter().any(|&z| z != 0) && pos == neg {
                let accept = match self.target {
                    Target::Minimal { .. } => true,
                    Target::Exact { degree } => pos == degree as i128,
                };
                if accept {
                    self.best = Some(coords.clone());
                    if let Target::Minimal { .. } = self.target {
                        self.limit = pos;
                    }
                }
            }
            return;
        }
        let col = l.pivots[k];
        let (v, _) = &l.echelon[k];
        let piv = v[col];
        let w = l.weights[col];
        let c0 = current[col];
        // c0 + x·piv must satisfy w·(c0 + x·piv) < limit − pos and w·(−c0 − x·piv) < limit − neg.
        let hi_val = (self.limit - pos - 1).div_euclid(w);
        let lo_val = -((self.limit - neg - 1).div_euclid(w));
        let lo = (lo_val - c0).div_euclid(piv) + i128::from((lo_val - c0).rem_euclid(piv) != 0);
        let hi = (hi_val - c0).div_euclid(piv);
        let (lo, hi) = (lo.max(-self.box_bound), hi.min(self.box_bound));
        if lo > hi {
            return;
        }
        let mut xs: Vec<i128> = (lo..=hi).collect();
        xs.sort_by_key(|&x| (x.abs(), x < 0));
        for x in xs {
            let next: Vec<i128> = current.iter().zip(v).map(|(&a, &b)| a + x * b).collect();
            coords.push(x);
            self.visit(k + 1, coords, &next);
            coords.pop();
            if self.done() {
                return;
            }
        }
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn gram_schmidt(basis: &[Vec<i128>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = basis.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let bi: Vec<f64> = basis[i].iter().map(|&z| z as f64).collect();
        let mut v = bi.clone();
        for j in 0..i {
            let nj = dot(&star[j], &star[j]);
            mu[i][j] = if nj > 0.0 { dot(&bi, &star[j]) / nj } else { 0.0 };
            v.iter_mut().zip(&star[j]).for_each(|(a, b)| *a -= mu[i][j] * b);
        }
        star.push(v);
    }
    (star, mu)
}

/// LLL reduction with `δ = 0.99`, floating-point Gram–Schmidt.
fn lll(mut basis: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
    let n = basis.len();
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(&basis);
            let q = mu[k][j].round() as i128;
            if q != 0 {
                let bj = basis[j].clone();
                basis[k].iter_mut().zip(&bj).for_each(|(a, &b)| *a -= q * b);
            }
        }
        let (star, mu) = gram_schmidt(&basis);
        let lhs = dot(&star[k], &star[k]);
        let rhs = (0.99 - mu[k][k - 1] * mu[k][k - 1]) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    basis
}

fn l1(v: &[i128]) -> i128 {
    v.iter().map(|z| z.abs()).sum()
}

/// Shortens an exponent vector by relations among the rows: nearest plane
/// on an LLL-reduced relation basis, then greedy single steps.
fn reduce_exponents(mut e: Vec<i128>, relations: &[Vec<i128>]) -> Vec<i128> {
    if relations.is_empty() {
        return e;
    }
    let (star, _) = gram_schmidt(relations);
    for i in (0..relations.len()).rev() {
        let ef: Vec<f64> = e.iter().map(|&z| z as f64).collect();
        let norm = dot(&star[i], &star[i]);
        if norm == 0.0 {
            continue;
        }
        let c = (dot(&ef, &star[i]) / norm).round() as i128;
        if c != 0 {
            e.iter_mut().zip(&relations[i]).for_each(|(a, &b)| *a -= c * b);
        }
    }
    loop {
        let mut improved = false;
        for kv in relations {
            for sign in [1, -1] {
                let trial: Vec<i128> = e.iter().zip(kv).map(|(&a, &b)| a - sign * b).collect();
                if l1(&trial) < l1(&e) {
                    e = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            return e;
        }
    }
}

fn run_search(matrix: &CuspOrderMatrix, target: Target, opts: SearchOptions) -> Result<SearchReport> {
    let lattice = divisor_lattice(matrix)?;
    let limit = match target {
        Target::Minimal { max_degree } => max_degree as i128 + 1,
        Target::Exact { degree } => degree as i128 + 1,
    };
    let mut search = Search {
        lattice: &lattice,
        target,
        box_bound: opts.box_bound.max(0) as i128,
        deadline: Instant::now() + opts.budget,
        nodes: 0,
        timed_out: false,
        limit,
        best: None,
    };
    let width = lattice.weights.len();
    search.visit(0, &mut Vec::new(), &vec![0; width]);
    let (nodes, complete) = (search.nodes, !search.timed_out);
    let candidate = match search.best {
        None => None,
        Some(coords) => {
            let mut e = vec![0i128; matrix.rows.len()];
            for (x, (_, ev)) in coords.iter().zip(&lattice.echelon) {
                e.iter_mut().zip(ev).for_each(|(a, &b)| *a += x * b);
            }
            let e = reduce_exponents(e, &lattice.kernel);
            let exponents = e
                .iter()
                .map(|&z| i64::try_from(z))
                .collect::<std::result::Result<Vec<i64>, _>>()
                .map_err(|_| Error::Unsupported("unit exponents overflow i64".into()))?;
            let divisor = matrix.divisor(&exponents);
            let degree = degree_of(&divisor).to_integer() as u64;
            let candidate = UnitCandidate { curve: matrix.spec, exponents, divisor, degree };
            if !verify_candidate(&candidate, matrix) {
                return Err(Error::UnverifiedUnit(format!("search produced an invalid unit on {}", matrix.spec)));
            }
            Some(candidate)
        }
    };
    Ok(SearchReport { candidate, nodes, complete })
}

/// Branch and bound for a unit of least degree `≤ max_degree`. Coordinates are
/// explored in a fixed order and ties keep the first unit found, so the result
/// is deterministic. The bound at a node is the larger of the zero and pole
/// degrees already fixed by the echelon shape.
pub fn search_min_degree(matrix: &CuspOrderMatrix, max_degree: u64, opts: SearchOptions) -> Result<SearchReport> {
    run_search(matrix, Target::Minimal { max_degree }, opts)
}

/// The first unit of degree exactly `degree` in the same exploration order.
pub fn search_exact_degree(matrix: &CuspOrderMatrix, degree: u64, opts: SearchOptions) -> Result<SearchReport> {
    run_search(matrix, Target::Exact { degree }, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u64) -> SubgroupSpec {
        SubgroupSpec::gamma1_2(n).unwrap()
    }

    #[test]
    fn siegel_index_is_sign_invariant() {
        let a = SiegelIndex::new(3, 7, 10).unwrap();
        assert_eq!(SiegelIndex::new(-3, -7, 10), Some(a));
        assert_eq!(a, SiegelIndex { a1: 3, a2: 7 });
        assert_eq!(SiegelIndex::new(10, 20, 10), None);
    }

    #[test]
    fn eta_phase_of_translations_and_minus_identity() {
        assert_eq!(eta_squared_phase(&[1, 1, 0, 1]), rat(1, 12));
        assert_eq!(eta_squared_phase(&[-1, 0, 0, -1]), rat(1, 2));
        // η(−1/τ)² = −iτ η(τ)², so ε_S² = −i.
        assert_eq!(eta_squared_phase(&[0, -1, 1, 0]), rat(3, 4));
    }

    #[test]
    fn rows_have_degree_zero_and_shape_matches_cusps() {
        for n in [3, 6, 18] {
            let m = siegel_order_matrix(spec(n)).unwrap();
            let inv = crate::Invariants::compute(spec(n)).unwrap();
            assert_eq!(m.shape().1, inv.cusps.len());
            for row in &m.entries {
                assert!(row.iter().fold(Rational::zero(), |a, &b| a + b).is_zero());
            }
        }
    }

    #[test]
    fn hnf_mod_spans_the_expected_lattice() {
        // {e ∈ ℤ² : e₁ + e₂ ≡ 0 mod 4}
        let b = hnf_mod(vec![vec![1, 3], vec![0, 4]], 4, 2);
        assert_eq!(b, vec![vec![1, 3], vec![0, 4]]);
        let b = hnf_mod(vec![vec![2, 2], vec![1, 3]], 4, 2);
        assert_eq!(b, vec![vec![1, 3], vec![0, 4]]);
    }

    #[test]
    fn genus_zero_curves_have_degree_one_units() {
        for n in 1..=4 {
            let m = siegel_order_matrix(spec(n)).unwrap();
            let r = search_min_degree(&m, 7, SearchOptions::default()).unwrap();
            let c = r.candidate.unwrap();
            assert_eq!(c.degree, 1, "n = {n}");
            assert!(verify_candidate(&c, &m));
        }
    }

    #[test]
    fn tampering_breaks_verification() {
        let m = siegel_order_matrix(spec(4)).unwrap();
        let c = search_min_degree(&m, 7, SearchOptions::default()).unwrap().candidate.unwrap();
        let mut bad = c.clone();
        bad.exponents[0] += 1;
        assert!(!verify_candidate(&bad, &m));
        let mut bad = c.clone();
        bad.divisor[0] += rat(1, 2);
        bad.divisor[1] -= rat(1, 2);
        assert!(!verify_candidate(&bad, &m));
        let zero = UnitCandidate { exponents: vec![0; m.rows.len()], divisor: vec![int(0); m.cusps.len()], degree: 0, ..c };
        assert!(!verify_candidate(&zero, &m));
    }

    #[test]
    fn unit_to_bound_requires_verification() {
        let m = siegel_order_matrix(spec(3)).unwrap();
        let c = search_min_degree(&m, 7, SearchOptions::default()).unwrap().candidate.unwrap();
        let (inf, bound) = unit_to_bound(&c, &m).unwrap();
        assert_eq!(inf.degree, 1);
        assert_eq!(bound.bound.relation, Relation::Le);
        let mut bad = c;
        bad.degree = 2;
        assert!(matches!(unit_to_bound(&bad, &m), Err(Error::UnverifiedUnit(_))));
    }
}
