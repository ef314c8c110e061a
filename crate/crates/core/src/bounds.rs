//! Gonality and density-degree bounds in exact rational arithmetic.
//!
//! A [`BoundFact`] is an inequality about one integer-valued quantity of a
//! curve. The operations here are the individual inference steps; the
//! census module chains them.

use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::arith::{ceil_rat, floor_rat, format_rational, int, is_prime, rat, serde_rational, Rational};
use crate::congruence::{index_closed_form, SubgroupSpec};
use crate::error::{Error, Result};

/// The constant in Abramovich's gonality bound, `325 / 2¹⁵`.
pub fn abramovich_constant() -> Rational {
    rat(325, 1 << 15)
}

/// Rational lower bound for `12/π²`, certified by `π < 355/113`.
pub fn twelve_over_pi_sq_lower() -> Rational {
    rat(12157, 10000)
}

/// Rational upper bound for `π` used to certify [`twelve_over_pi_sq_lower`].
pub fn pi_upper() -> Rational {
    rat(355, 113)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Quantity {
    /// Gonality over `ℂ`.
    GonC,
    /// Gonality over `ℚ`.
    GonQ,
    /// Gonality over `𝔽_p` of the reduction at a good prime.
    GonFp { p: u64 },
    /// Minimum density degree over `ℚ`.
    Delta,
    Genus,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::GonC => write!(f, "gon_C"),
            Quantity::GonQ => write!(f, "gon_Q"),
            Quantity::GonFp { p } => write!(f, "gon_F{p}"),
            Quantity::Delta => write!(f, "delta"),
            Quantity::Genus => write!(f, "genus"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn is_lower(self) -> bool {
        matches!(self, Relation::Ge | Relation::Gt | Relation::Eq)
    }

    pub fn is_upper(self) -> bool {
        matches!(self, Relation::Le | Relation::Eq)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
            Relation::Le => "<=",
        }
    }
}

/// `quantity(curve) relation value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bound {
    pub curve: SubgroupSpec,
    pub quantity: Quantity,
    pub relation: Relation,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

impl Bound {
    pub fn new(curve: SubgroupSpec, quantity: Quantity, relation: Relation, value: Rational) -> Self {
        Self { curve, quantity, relation, value }
    }

    /// Does this bound force `quantity > t`?
    pub fn implies_gt(&self, t: Rational) -> bool {
        match self.relation {
            Relation::Gt => self.value >= t,
            Relation::Ge | Relation::Eq => self.value > t,
            Relation::Le => false,
        }
    }

    /// Does this bound force `quantity ≤ t`?
    pub fn implies_le(&self, t: Rational) -> bool {
        self.relation.is_upper() && self.value <= t
    }

    /// Is this bound incompatible with `other` on the same quantity?
    pub fn contradicts(&self, other: &Bound) -> bool {
        if self.curve != other.curve || self.quantity != other.quantity {
            return false;
        }
        let clash = |lo: &Bound, hi: &Bound| {
            lo.relation.is_lower() && hi.relation.is_upper() && {
                if lo.relation == Relation::Gt {
                    lo.value >= hi.value
                } else {
                    lo.value > hi.value
                }
            }
        };
        clash(self, other) || clash(other, self)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}({}) {} {}",
            self.quantity,
            self.curve,
            self.relation.symbol(),
            format_rational(&self.value)
        )
    }
}

/// How a bound was obtained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub rule: String,
    pub premises: Vec<String>,
}

impl Provenance {
    pub fn new(rule: &str, premises: Vec<String>) -> Self {
        Self { rule: rule.to_string(), premises }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundFact {
    #[serde(flatten)]
    pub bound: Bound,
    pub provenance: Provenance,
}

impl BoundFact {
    pub fn new(bound: Bound, provenance: Provenance) -> Self {
        Self { bound, provenance }
    }
}

/// `gon_ℂ X_H > 325/2¹⁵ · [PSL₂(ℤ):H]`.
pub fn abramovich_lower(curve: SubgroupSpec, index: u64) -> BoundFact {
    BoundFact::new(
        Bound::new(curve, Quantity::GonC, Relation::Gt, abramovich_constant() * int(index as i64)),
        Provenance::new("abramovich", vec![format!("index({curve}) = {index}")]),
    )
}

/// Transports a lower bound over `ℂ` or a good-reduction `𝔽_p` to `ℚ`.
pub fn monotonicity(fact: &BoundFact) -> Result<BoundFact> {
    let b = &fact.bound;
    if !b.relation.is_lower() {
        return Err(Error::Unsupported(format!("monotonicity needs a lower bound, got {b}")));
    }
    let relation = if b.relation == Relation::Eq { Relation::Ge } else { b.relation };
    let rule = match b.quantity {
        Quantity::GonC => "monotonicity_c",
        Quantity::GonFp { p } => {
            if b.curve.level() % p == 0 {
                return Err(Error::BadReduction { p, level: b.curve.level() });
            }
            "monotonicity_fp"
        }
        q => return Err(Error::Unsupported(format!("monotonicity does not apply to {q}"))),
    };
    Ok(BoundFact::new(
        Bound::new(b.curve, Quantity::GonQ, relation, b.value),
        Provenance::new(rule, vec![b.to_string()]),
    ))
}

/// Turns a lower bound on `gon_ℚ` into one on the density degree: equal when
/// the Jacobian has rank zero, halved otherwise.
pub fn delta_rules(gon_q: &BoundFact, rank_zero: bool) -> Result<BoundFact> {
    let b = &gon_q.bound;
    if b.quantity != Quantity::GonQ || !b.relation.is_lower() {
        return Err(Error::Unsupported(format!("delta rules need a lower bound on gon_Q, got {b}")));
    }
    let relation = if b.relation == Relation::Eq { Relation::Ge } else { b.relation };
    let (value, rule) = if rank_zero {
        (b.value, "delta_rank_zero")
    } else {
        (b.value / 2, "delta_half")
    };
    Ok(BoundFact::new(
        Bound::new(b.curve, Quantity::Delta, relation, value),
        Provenance::new(rule, vec![b.to_string()]),
    ))
}

/// Rewrites a lower bound on an integer-valued quantity in the other
/// strictness: `≥ v` becomes `> ⌈v⌉ − 1` and `> v` becomes `≥ ⌊v⌋ + 1`.
pub fn integrality_promotion(fact: &BoundFact) -> Option<BoundFact> {
    let b = &fact.bound;
    let (relation, value) = match b.relation {
        Relation::Ge => (Relation::Gt, int(ceil_rat(b.value) - 1)),
        Relation::Gt => (Relation::Ge, int(floor_rat(b.value) + 1)),
        _ => return None,
    };
    Some(BoundFact::new(
        Bound::new(b.curve, b.quantity, relation, value),
        Provenance::new("integrality", vec![b.to_string()]),
    ))
}

/// Castelnuovo–Severi for a degree-`m` cover `X → Y` over `ℚ` with `m` prime:
/// a map `X → ℙ¹` of degree `d` either factors through `Y` (so `d ≥ m·gon(Y)`)
/// or `g(X) ≤ m·g(Y) + (m−1)(d−1)`.
pub fn castelnuovo_severi(
    curve: SubgroupSpec,
    genus_x: u64,
    genus_y: u64,
    cover_degree: u64,
    gon_y_lower: u64,
) -> Result<BoundFact> {
    if cover_degree < 2 {
        return Err(Error::Unsupported(format!("cover degree {cover_degree} < 2")));
    }
    if !is_prime(cover_degree) {
        return Err(Error::Unsupported(format!(
            "the factorisation dichotomy needs a prime cover degree, got {cover_degree}"
        )));
    }
    let m = cover_degree as i64;
    let independent = rat(genus_x as i64 - m * genus_y as i64, m - 1) + Rational::one();
    let independent = ceil_rat(independent);
    let factored = m * gon_y_lower as i64;
    let value = independent.min(factored).max(1);
    Ok(BoundFact::new(
        Bound::new(curve, Quantity::GonQ, Relation::Ge, int(value)),
        Provenance::new(
            "castelnuovo_severi",
            vec![
                format!("genus({curve}) = {genus_x}"),
                format!("genus(Y) = {genus_y}"),
                format!("cover degree {cover_degree}"),
                format!("gon_Q(Y) >= {gon_y_lower}"),
            ],
        ),
    ))
}

/// A curve with infinitely many points of the given degree over `ℚ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InfinitelyManyPoints {
    pub curve: SubgroupSpec,
    pub degree: u64,
}

/// Riemann–Roch plus Hilbert irreducibility: `d ≥ g + 1` gives infinitely many degree-`d` points.
pub fn genus_infinitude(curve: SubgroupSpec, genus: u64, degree: u64) -> Option<InfinitelyManyPoints> {
    (degree >= genus + 1).then_some(InfinitelyManyPoints { curve, degree })
}

/// `2 · (12157/10000) · n²`, a lower bound for `[PSL₂(ℤ) : Γ₁(2,2n)]`.
pub fn crude_index_lower(n: u64) -> Rational {
    int(2) * twelve_over_pi_sq_lower() * int((n * n) as i64)
}

/// Certificate that `12/π² > 12157/10000`, given `π < 355/113`.
pub fn pi_certificate_holds() -> bool {
    let pi = pi_upper();
    int(12) / (pi * pi) > twelve_over_pi_sq_lower()
}

/// Result of the asymptotic Abramovich argument for `X₁(2,2n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticThreshold {
    /// Least `n` from which the crude index bound alone forces `gon_ℂ > target`.
    pub n0: u64,
    #[serde(with = "serde_rational")]
    pub target: Rational,
    #[serde(with = "serde_rational")]
    pub twelve_over_pi_sq_lower: Rational,
    #[serde(with = "serde_rational")]
    pub pi_upper: Rational,
}

impl AsymptoticThreshold {
    /// Does the crude bound give `gon_ℂ X₁(2,2n) > target`?
    pub fn crude_route_holds(&self, n: u64) -> bool {
        crude_index_lower(n) * abramovich_constant() > self.target
    }

    /// Does the exact index give `gon_ℂ X₁(2,2n) > target`?
    pub fn exact_route_holds(&self, n: u64) -> bool {
        let spec = SubgroupSpec::gamma1_2(n).expect("n ≥ 1");
        abramovich_lower(spec, index_closed_form(spec)).bound.implies_gt(self.target)
    }
}

/// Threshold for an arbitrary gonality target (the crude bound is increasing in `n`).
pub fn asymptotic_threshold_for(target: Rational) -> AsymptoticThreshold {
    assert!(pi_certificate_holds());
    let per_n2 = int(2) * twelve_over_pi_sq_lower() * abramovich_constant();
    let mut n0 = 1;
    while per_n2 * int((n0 * n0) as i64) <= target {
        n0 += 1;
    }
    AsymptoticThreshold {
        n0,
        target,
        twelve_over_pi_sq_lower: twelve_over_pi_sq_lower(),
        pi_upper: pi_upper(),
    }
}

/// The septic case: `gon_ℂ > 14` forces `δ > 7` without any rank input.
pub fn asymptotic_nonmember_threshold() -> AsymptoticThreshold {
    asymptotic_threshold_for(int(14))
}

/// `(12157/40000) · N²`, a lower bound for `[PSL₂(ℤ) : Γ₁(N)]`: for `N ≥ 3`
/// the index is `N²/2 · ∏_{p|N}(1 − p⁻²) ≥ 3N²/π²`, and `N ≤ 2` is checked directly.
pub fn crude_cyclic_index_lower(n: u64) -> Rational {
    twelve_over_pi_sq_lower() / int(4) * int((n * n) as i64)
}

/// Least `N` from which the crude bound alone forces `gon_ℂ X₁(N) > target`.
pub fn cyclic_threshold_for(target: Rational) -> u64 {
    assert!(pi_certificate_holds());
    let mut n = 1;
    while crude_cyclic_index_lower(n) * abramovich_constant() <= target {
        n += 1;
    }
    n
}
