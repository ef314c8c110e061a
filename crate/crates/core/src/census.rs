//! Forward-chaining census of `Φ^∞(d)`.
//!
//! Axioms come from a facts file; everything else is computed (indices,
//! genera, point counts, modular units) or inferred by a fixed list of rules.
//! Every fact is a [`Step`] of the trace, and [`verify_trace`] replays the
//! trace without trusting the engine.
//!
//! Rule labels:
//!
//! | label | rule |
//! |---|---|
//! | R1 | `abramovich` |
//! | R2, R3 | `monotonicity_c`, `monotonicity_fp` |
//! | R4, R5 | `delta_rank_zero`, `delta_half` |
//! | R6 | `non_membership`, `family_instance` |
//! | R7 | `genus_infinitude` |
//! | R8 | `unit_search`, `unit_points`, `unit_gonality` |
//! | R9 | `membership_bridge` |
//! | R10 | `castelnuovo_severi` |
//! | R11 | `integrality` |
//! | R12 | `asymptotic` |

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{ceil_rat, euler_phi, floor_rat, int, is_prime, prime_power};
use crate::bounds::{
    abramovich_lower, asymptotic_threshold_for, castelnuovo_severi, cyclic_threshold_for, delta_rules,
    genus_infinitude, integrality_promotion, monotonicity, Bound, BoundFact, Provenance, Quantity, Relation,
};
use crate::congruence::{Invariants, SubgroupKind, SubgroupSpec};
use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::pointcount::{count_points_with_classes, enumerate_curve_classes, gonality_lower_from_count, PointCountRecord};
use crate::units::{search_exact_degree, siegel_order_matrix, verify_candidate, SearchOptions, UnitCandidate};

/// The default facts file, also shipped as `facts/default.json`.
pub const DEFAULT_FACTS: &str = include_str!("../../../facts/default.json");

/// The torsion group `ℤ/m × ℤ/n`, written `(m,n)`, with `m | n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionGroup {
    pub m: u64,
    pub n: u64,
}

impl TorsionGroup {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n == 0 || n % m != 0 {
            return Err(Error::Facts(format!("({m},{n}) is not a torsion shape")));
        }
        Ok(Self { m, n })
    }

    /// The modular curve whose non-cuspidal points parametrise this structure.
    pub fn curve(&self) -> Result<SubgroupSpec> {
        match self.m {
            1 => SubgroupSpec::gamma1(self.n),
            2 => SubgroupSpec::gamma1_2(self.n / 2),
            m => Err(Error::Unsupported(format!("curves for m = {m}"))),
        }
    }

    pub fn of_curve(curve: SubgroupSpec) -> Self {
        match curve.kind() {
            SubgroupKind::Gamma1 => Self { m: 1, n: curve.level() },
            SubgroupKind::Gamma1Two => Self { m: 2, n: curve.level() },
        }
    }

    /// Is `self` in the family `{(m, n') : n' ≥ from.n}`?
    pub fn in_family_from(&self, from: &TorsionGroup) -> bool {
        self.m == from.m && self.n >= from.n
    }
}

impl fmt::Display for TorsionGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

impl FromStr for TorsionGroup {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Facts(format!("malformed torsion group {text:?}"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(bad)?;
        let (m, n) = inner.split_once(',').ok_or_else(bad)?;
        TorsionGroup::new(m.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?)
    }
}

impl Serialize for TorsionGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TorsionGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fact {
    Member { group: TorsionGroup, degree: u64 },
    NonMember { group: TorsionGroup, degree: u64 },
    /// No `(m, n')` with `n' ≥ n` lies in `Φ^∞(degree)`.
    NonMemberFrom { group: TorsionGroup, degree: u64 },
    RankZero { curve: SubgroupSpec },
    InfManyPts { curve: SubgroupSpec, degree: u64 },
    Index { curve: SubgroupSpec, index: u64 },
    Bound(Bound),
    PointCount { record: PointCountRecord },
    ModularUnit { candidate: UnitCandidate },
}

impl Fact {
    fn key(&self) -> String {
        serde_json::to_string(self).expect("facts serialise")
    }

    fn bound(&self) -> Option<&Bound> {
        match self {
            Fact::Bound(b) => Some(b),
            _ => None,
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Member { group, degree } => write!(f, "{group} in Phi^inf({degree})"),
            Fact::NonMember { group, degree } => write!(f, "{group} not in Phi^inf({degree})"),
            Fact::NonMemberFrom { group, degree } => {
                write!(f, "({},n) not in Phi^inf({degree}) for n >= {}", group.m, group.n)
            }
            Fact::RankZero { curve } => write!(f, "rk J({curve})(Q) = 0"),
            Fact::InfManyPts { curve, degree } => write!(f, "{curve} has infinitely many points of degree {degree}"),
            Fact::Index { curve, index } => write!(f, "index({curve}) = {index}"),
            Fact::Bound(b) => write!(f, "{b}"),
            Fact::PointCount { record } => {
                write!(f, "#{}(F_{}) = {}", record.spec, record.field.q, record.total)
            }
            Fact::ModularUnit { candidate } => {
                write!(f, "modular unit of degree {} on {}", candidate.degree, candidate.curve)
            }
        }
    }
}

/// Where an axiom comes from: a bibliographic reference and the
/// mathematical statement taken from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    #[serde(rename = "ref")]
    pub reference: String,
    pub statement: String,
}

/// One entry of a facts file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactEntry {
    #[serde(flatten)]
    pub fact: Fact,
    pub source: Source,
    /// Entries the census can do without; informational only.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub optional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Axiom,
    Index,
    Genus,
    PointCount,
    CountBound,
    Abramovich,
    MonotonicityC,
    MonotonicityFp,
    CastelnuovoSeveri,
    Integrality,
    DeltaRankZero,
    DeltaHalf,
    NonMembership,
    FamilyInstance,
    GenusInfinitude,
    UnitSearch,
    UnitPoints,
    UnitGonality,
    MembershipBridge,
    Asymptotic,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = serde_json::to_string(self).expect("rules serialise");
        f.write_str(text.trim_matches('"'))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub id: usize,
    pub rule: Rule,
    pub premises: Vec<usize>,
    pub conclusion: Fact,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub steps: Vec<Step>,
}

impl ProofTrace {
    /// The step and all its ancestors, in trace order.
    pub fn chain(&self, id: usize) -> Vec<&Step> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(i) = stack.pop() {
            if i < self.steps.len() && seen.insert(i) {
                stack.extend(&self.steps[i].premises);
            }
        }
        seen.into_iter().map(|i| &self.steps[i]).collect()
    }

    pub fn render_chain(&self, id: usize) -> String {
        self.chain(id)
            .iter()
            .map(|s| format!("  [{}] {} {:?}: {}", s.id, s.rule, s.premises, s.conclusion))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Member,
    NonMember,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub group: TorsionGroup,
    pub status: Status,
    /// The step concluding the verdict.
    pub step: Option<usize>,
}

/// A nonmember family `{(m, n') : n' ≥ from.n}` and the step proving it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub from: TorsionGroup,
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub degree: u64,
    /// All `m` with `φ(m) | d`.
    pub admissible_m: Vec<u64>,
    /// Admissible `m` without a supported family of modular curves.
    pub unsupported_m: Vec<u64>,
    /// One verdict per shape below the asymptotic cutoffs.
    pub verdicts: Vec<Verdict>,
    pub families: Vec<FamilyVerdict>,
    pub notes: Vec<String>,
    pub trace: ProofTrace,
}

impl CensusReport {
    fn with_status(&self, status: Status) -> Vec<TorsionGroup> {
        self.verdicts.iter().filter(|v| v.status == status).map(|v| v.group).collect()
    }

    pub fn members(&self) -> Vec<TorsionGroup> {
        self.with_status(Status::Member)
    }

    pub fn nonmembers(&self) -> Vec<TorsionGroup> {
        self.with_status(Status::NonMember)
    }

    pub fn undecided(&self) -> Vec<TorsionGroup> {
        self.with_status(Status::Undecided)
    }

    /// Is every supported shape decided, either explicitly or by a family?
    pub fn is_complete(&self) -> bool {
        self.unsupported_m.is_empty()
            && self.undecided().is_empty()
            && self.admissible_m.iter().all(|&m| self.families.iter().any(|f| f.from.m == m))
    }

    /// Members in canonical form, e.g. `{(1,1), (1,2), …}`.
    pub fn members_canonical(&self) -> String {
        let items: Vec<String> = self.members().iter().map(|g| g.to_string()).collect();
        format!("{{{}}}", items.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusOptions {
    pub degree: u64,
    /// Undecided `X₁(2,2n)` of at most this level get a modular-unit search.
    pub unit_max_level: u64,
    pub search: SearchOptions,
    /// Fields `𝔽_q` whose point counts feed `gon_{𝔽_p}` bounds for undecided shapes.
    pub count_fields: Vec<u64>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self { degree: 7, unit_max_level: 20, search: SearchOptions::default(), count_fields: vec![9, 49] }
    }
}

/// All `m` such that `(m,m)` can be torsion over a degree-`d` field, i.e. `φ(m) | d`.
pub fn admissible_shapes(d: u64) -> Vec<u64> {
    // φ(m) ≥ √(m/2), so φ(m) | d forces m ≤ 2d².
    (1..=2 * d * d + 2).filter(|&m| d % euler_phi(m) == 0).collect()
}

pub fn parse_facts(text: &str) -> Result<Vec<FactEntry>> {
    let entries: Vec<FactEntry> = serde_json::from_str(text).map_err(|e| Error::Facts(e.to_string()))?;
    for (i, e) in entries.iter().enumerate() {
        validate_axiom(e).map_err(|msg| Error::Facts(format!("entry {i}: {msg}")))?;
    }
    Ok(entries)
}

pub fn load_facts(path: &Path) -> Result<Vec<FactEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Facts(format!("{}: {e}", path.display())))?;
    parse_facts(&text)
}

pub fn default_facts() -> Vec<FactEntry> {
    parse_facts(DEFAULT_FACTS).expect("the shipped facts file is valid")
}

fn validate_axiom(e: &FactEntry) -> std::result::Result<(), String> {
    if e.source.reference.trim().is_empty() || e.source.statement.trim().is_empty() {
        return Err("missing citation".into());
    }
    match &e.fact {
        Fact::Member { group, degree } | Fact::NonMember { group, degree } | Fact::NonMemberFrom { group, degree } => {
            if *degree == 0 || group.m > 2 {
                return Err(format!("bad membership fact {}", e.fact));
            }
        }
        Fact::RankZero { .. } | Fact::InfManyPts { .. } => {}
        Fact::Bound(b) => {
            if !matches!(b.quantity, Quantity::GonC | Quantity::GonQ | Quantity::GonFp { .. }) || !b.relation.is_lower() {
                return Err(format!("only gonality lower bounds may be axioms, got {b}"));
            }
            if let Quantity::GonFp { p } = b.quantity {
                if !is_prime(p) || b.curve.level() % p == 0 {
                    return Err(format!("{p} is not a prime of good reduction for {}", b.curve));
                }
            }
        }
        other => return Err(format!("{other} must be computed, not assumed")),
    }
    Ok(())
}

/// Lower bound on an integer quantity as an integer, if `b` is a lower bound.
fn integer_lower(b: &Bound) -> Option<u64> {
    let v = match b.relation {
        Relation::Ge | Relation::Eq => ceil_rat(b.value),
        Relation::Gt => floor_rat(b.value) + 1,
        Relation::Le => return None,
    };
    Some(v.max(0) as u64)
}

fn genus_of(f: &Fact, curve: SubgroupSpec) -> Option<u64> {
    match f {
        Fact::Bound(b) if b.curve == curve && b.quantity == Quantity::Genus && b.relation == Relation::Eq => {
            b.value.is_integer().then(|| *b.value.numer() as u64)
        }
        _ => None,
    }
}

fn lift(b: BoundFact) -> Fact {
    Fact::Bound(b.bound)
}

/// The conclusion of an inference rule from its premises, or `None` if the
/// rule does not apply. Computed rules and `family_instance` are not handled here.
fn infer(rule: Rule, premises: &[&Fact], degree: u64) -> Option<Fact> {
    let no_prov = |b: &Bound| BoundFact::new(b.clone(), Provenance::new("premise", vec![]));
    match (rule, premises) {
        (Rule::Abramovich, [Fact::Index { curve, index }]) => Some(lift(abramovich_lower(*curve, *index))),
        (Rule::MonotonicityC, [Fact::Bound(b)]) if b.quantity == Quantity::GonC => {
            monotonicity(&no_prov(b)).ok().map(lift)
        }
        (Rule::MonotonicityFp, [Fact::Bound(b)]) if matches!(b.quantity, Quantity::GonFp { .. }) => {
            monotonicity(&no_prov(b)).ok().map(lift)
        }
        (Rule::Integrality, [Fact::Bound(b)])
            if matches!(b.quantity, Quantity::GonQ | Quantity::Delta) && b.relation == Relation::Ge =>
        {
            integrality_promotion(&no_prov(b)).map(lift)
        }
        (Rule::DeltaRankZero, [Fact::Bound(b), Fact::RankZero { curve }]) if b.curve == *curve => {
            delta_rules(&no_prov(b), true).ok().map(lift)
        }
        (Rule::DeltaHalf, [Fact::Bound(b)]) => delta_rules(&no_prov(b), false).ok().map(lift),
        (Rule::CastelnuovoSeveri, [gx, gy, Fact::Bound(gon_y)]) => {
            let x = match gx {
                Fact::Bound(b) => b.curve,
                _ => return None,
            };
            let n = x.half_level()?;
            let y = SubgroupSpec::gamma1(2 * n).ok()?;
            if gon_y.curve != y || gon_y.quantity != Quantity::GonQ {
                return None;
            }
            let (genus_x, genus_y) = (genus_of(gx, x)?, genus_of(gy, y)?);
            castelnuovo_severi(x, genus_x, genus_y, 2, integer_lower(gon_y)?).ok().map(lift)
        }
        (Rule::NonMembership, [Fact::Bound(b)])
            if b.quantity == Quantity::Delta && b.relation == Relation::Gt && b.value >= int(degree as i64) =>
        {
            Some(Fact::NonMember { group: TorsionGroup::of_curve(b.curve), degree })
        }
        (Rule::GenusInfinitude, [f @ Fact::Bound(b)]) => {
            let g = genus_of(f, b.curve)?;
            genus_infinitude(b.curve, g, degree).map(|p| Fact::InfManyPts { curve: p.curve, degree: p.degree })
        }
        (Rule::CountBound, [Fact::PointCount { record }]) => Some(lift(gonality_lower_from_count(record))),
        (Rule::UnitPoints, [Fact::ModularUnit { candidate }]) => {
            Some(Fact::InfManyPts { curve: candidate.curve, degree: candidate.degree })
        }
        (Rule::UnitGonality, [Fact::ModularUnit { candidate }]) => Some(Fact::Bound(Bound::new(
            candidate.curve,
            Quantity::GonQ,
            Relation::Le,
            int(candidate.degree as i64),
        ))),
        (Rule::MembershipBridge, [Fact::InfManyPts { curve, degree: d }]) if *d == degree => {
            Some(Fact::Member { group: TorsionGroup::of_curve(*curve), degree })
        }
        _ => None,
    }
}

/// Start of the nonmember family for `m` found by the crude Abramovich bound:
/// `gon_ℂ > 2d` gives `δ ≥ gon_ℚ/2 > d` with no rank input.
fn asymptotic_start(m: u64, degree: u64) -> Option<TorsionGroup> {
    let target = int(2 * degree as i64);
    match m {
        1 => Some(TorsionGroup { m: 1, n: cyclic_threshold_for(target) }),
        2 => Some(TorsionGroup { m: 2, n: 2 * asymptotic_threshold_for(target).n0 }),
        _ => None,
    }
}

struct Engine {
    degree: u64,
    steps: Vec<Step>,
    keys: HashMap<String, usize>,
}

impl Engine {
    fn add(&mut self, rule: Rule, premises: Vec<usize>, conclusion: Fact, source: Option<Source>) -> (usize, bool) {
        let key = conclusion.key();
        if let Some(&id) = self.keys.get(&key) {
            return (id, false);
        }
        let id = self.steps.len();
        self.keys.insert(key, id);
        self.steps.push(Step { id, rule, premises, conclusion, source });
        (id, true)
    }

    fn derive(&mut self, rule: Rule, premises: &[usize]) -> bool {
        let facts: Vec<&Fact> = premises.iter().map(|&i| &self.steps[i].conclusion).collect();
        match infer(rule, &facts, self.degree) {
            Some(f) => self.add(rule, premises.to_vec(), f, None).1,
            None => false,
        }
    }

    fn find(&self, pred: impl Fn(&Fact) -> bool) -> Option<usize> {
        self.steps.iter().position(|s| pred(&s.conclusion))
    }

    fn genus_step(&self, curve: SubgroupSpec) -> Option<usize> {
        self.find(|f| genus_of(f, curve).is_some())
    }

    /// One pass of every rule over the current steps; true if anything was added.
    fn pass(&mut self, explicit: &[TorsionGroup]) -> bool {
        let mut changed = false;
        let len = self.steps.len();
        for i in 0..len {
            let fact = self.steps[i].conclusion.clone();
            match &fact {
                Fact::Index { .. } => changed |= self.derive(Rule::Abramovich, &[i]),
                Fact::PointCount { .. } => changed |= self.derive(Rule::CountBound, &[i]),
                Fact::ModularUnit { .. } => {
                    changed |= self.derive(Rule::UnitPoints, &[i]);
                    changed |= self.derive(Rule::UnitGonality, &[i]);
                }
                Fact::InfManyPts { .. } => changed |= self.derive(Rule::MembershipBridge, &[i]),
                Fact::NonMemberFrom { group, degree } if *degree == self.degree => {
                    for g in explicit.iter().filter(|g| g.in_family_from(group)) {
                        let f = Fact::NonMember { group: *g, degree: self.degree };
                        changed |= self.add(Rule::FamilyInstance, vec![i], f, None).1;
                    }
                }
                Fact::Bound(b) => {
                    changed |= self.derive(Rule::MonotonicityC, &[i]);
                    changed |= self.derive(Rule::MonotonicityFp, &[i]);
                    changed |= self.derive(Rule::Integrality, &[i]);
                    changed |= self.derive(Rule::NonMembership, &[i]);
                    changed |= self.derive(Rule::GenusInfinitude, &[i]);
                    if b.quantity == Quantity::GonQ && b.relation.is_lower() {
                        changed |= self.derive(Rule::DeltaHalf, &[i]);
                        let curve = b.curve;
                        if let Some(r) = self.find(|f| *f == Fact::RankZero { curve }) {
                            changed |= self.derive(Rule::DeltaRankZero, &[i, r]);
                        }
                        if curve.kind() == SubgroupKind::Gamma1 && curve.level() % 2 == 0 {
                            let x = SubgroupSpec::gamma1_2(curve.level() / 2).expect("n ≥ 1");
                            if let (Some(gx), Some(gy)) = (self.genus_step(x), self.genus_step(curve)) {
                                changed |= self.derive(Rule::CastelnuovoSeveri, &[gx, gy, i]);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        changed
    }

    fn saturate(&mut self, explicit: &[TorsionGroup]) {
        while self.pass(explicit) {}
    }

    fn verdict(&self, group: TorsionGroup) -> Verdict {
        let d = self.degree;
        let member = self.find(|f| *f == Fact::Member { group, degree: d });
        let non = self.find(|f| *f == Fact::NonMember { group, degree: d });
        match (member, non) {
            (Some(s), None) => Verdict { group, status: Status::Member, step: Some(s) },
            (None, Some(s)) => Verdict { group, status: Status::NonMember, step: Some(s) },
            _ => Verdict { group, status: Status::Undecided, step: None },
        }
    }

    fn trace(&self) -> ProofTrace {
        ProofTrace { steps: self.steps.clone() }
    }

    /// Hard failure on `Member` vs `NonMember`, or on clashing bounds.
    fn check_consistency(&self) -> Result<()> {
        let trace = self.trace();
        let d = self.degree;
        let mut members: BTreeMap<TorsionGroup, usize> = BTreeMap::new();
        let mut nons: Vec<(TorsionGroup, bool, usize)> = Vec::new();
        for s in &self.steps {
            match &s.conclusion {
                Fact::Member { group, degree } if *degree == d => {
                    members.insert(*group, s.id);
                }
                Fact::NonMember { group, degree } if *degree == d => nons.push((*group, false, s.id)),
                Fact::NonMemberFrom { group, degree } if *degree == d => nons.push((*group, true, s.id)),
                _ => {}
            }
        }
        for (g, family, id) in nons {
            let clash = members
                .iter()
                .find(|(m, _)| if family { m.in_family_from(&g) } else { **m == g });
            if let Some((_, &mid)) = clash {
                return Err(Error::Contradiction(format!(
                    "membership and non-membership both derived:\n{}\n---\n{}",
                    trace.render_chain(mid),
                    trace.render_chain(id)
                )));
            }
        }
        let bounds: Vec<(usize, &Bound)> =
            self.steps.iter().filter_map(|s| s.conclusion.bound().map(|b| (s.id, b))).collect();
        for (i, &(a, ba)) in bounds.iter().enumerate() {
            for &(b, bb) in &bounds[i + 1..] {
                if ba.contradicts(bb) {
                    return Err(Error::Contradiction(format!(
                        "{ba} and {bb}:\n{}\n---\n{}",
                        trace.render_chain(a),
                        trace.render_chain(b)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Decides membership in `Φ^∞(d)` for every admissible shape.
///
/// Shapes below the asymptotic cutoffs are decided one by one; beyond them
/// a single family step covers all remaining shapes of each `m`.
pub fn classify(facts: &[FactEntry], opts: &CensusOptions) -> Result<CensusReport> {
    let d = opts.degree;
    if d == 0 {
        return Err(Error::Unsupported("degree 0".into()));
    }
    let admissible_m = admissible_shapes(d);
    let unsupported_m: Vec<u64> = admissible_m.iter().copied().filter(|&m| m > 2).collect();
    let mut engine = Engine { degree: d, steps: Vec::new(), keys: HashMap::new() };
    let mut notes = Vec::new();

    for e in facts {
        validate_axiom(e).map_err(Error::Facts)?;
        engine.add(Rule::Axiom, vec![], e.fact.clone(), Some(e.source.clone()));
    }

    let mut explicit = Vec::new();
    for m in admissible_m.iter().copied().filter(|&m| m <= 2) {
        let start = asymptotic_start(m, d).expect("m ≤ 2");
        engine.add(Rule::Asymptotic, vec![], Fact::NonMemberFrom { group: start, degree: d }, None);
        explicit.extend((1..start.n / m).map(|k| TorsionGroup { m, n: m * k }));
    }

    let curves: Vec<SubgroupSpec> = explicit.iter().map(|g| g.curve()).collect::<Result<_>>()?;
    let invariants: Vec<Invariants> = curves.par_iter().map(|&c| Invariants::compute(c)).collect::<Result<_>>()?;
    for inv in &invariants {
        engine.add(Rule::Index, vec![], Fact::Index { curve: inv.spec, index: inv.index }, None);
        let genus = Bound::new(inv.spec, Quantity::Genus, Relation::Eq, int(inv.genus as i64));
        engine.add(Rule::Genus, vec![], Fact::Bound(genus), None);
    }
    engine.saturate(&explicit);

    let undecided = |engine: &Engine| -> Vec<(TorsionGroup, SubgroupSpec)> {
        explicit
            .iter()
            .zip(&curves)
            .filter(|(g, _)| g.m == 2 && engine.verdict(**g).status == Status::Undecided)
            .map(|(g, c)| (*g, *c))
            .collect()
    };

    for &q in &opts.count_fields {
        let (p, _) = prime_power(q).ok_or(Error::InvalidField(q))?;
        let todo: Vec<SubgroupSpec> = undecided(&engine)
            .into_iter()
            .map(|(_, c)| c)
            .filter(|c| c.level() >= 5 && c.level() % p != 0)
            .collect();
        if todo.is_empty() {
            continue;
        }
        let field = FiniteField::new(q)?;
        let classes = enumerate_curve_classes(&field)?;
        for c in todo {
            let record = count_points_with_classes(c, &field, &classes)?;
            engine.add(Rule::PointCount, vec![], Fact::PointCount { record }, None);
        }
    }
    engine.saturate(&explicit);

    for (g, c) in undecided(&engine) {
        if c.level() > opts.unit_max_level {
            continue;
        }
        let matrix = siegel_order_matrix(c)?;
        let report = search_exact_degree(&matrix, d, opts.search)?;
        match report.candidate {
            Some(candidate) if verify_candidate(&candidate, &matrix) => {
                engine.add(Rule::UnitSearch, vec![], Fact::ModularUnit { candidate }, None);
            }
            Some(_) => return Err(Error::UnverifiedUnit(format!("search on {c} returned a bad unit"))),
            None => notes.push(format!(
                "no modular unit of degree {d} found for {g} ({} nodes, {})",
                report.nodes,
                if report.complete { "box exhausted" } else { "budget exhausted" }
            )),
        }
    }
    engine.saturate(&explicit);
    engine.check_consistency()?;

    let verdicts = explicit.iter().map(|&g| engine.verdict(g)).collect();
    let families = engine
        .steps
        .iter()
        .filter_map(|s| match &s.conclusion {
            Fact::NonMemberFrom { group, degree } if *degree == d => Some(FamilyVerdict { from: *group, step: s.id }),
            _ => None,
        })
        .collect();
    for m in &unsupported_m {
        notes.push(format!("shapes ({m},{m}k) need curves X1({m},{m}k), which are not implemented"));
    }
    Ok(CensusReport { degree: d, admissible_m, unsupported_m, verdicts, families, notes, trace: engine.trace() })
}

/// Result of replaying a trace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    /// `(step id, reason)` for every step or verdict that fails to check.
    pub bad: Vec<(usize, String)>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.bad.is_empty()
    }
}

fn recompute(step: &Step, degree: u64) -> std::result::Result<(), String> {
    let err = |e: Error| e.to_string();
    match (&step.rule, &step.conclusion) {
        (Rule::Axiom, _) => {
            let source = step.source.clone().ok_or("axiom without a source")?;
            validate_axiom(&FactEntry { fact: step.conclusion.clone(), source, optional: false })
        }
        (Rule::Index, Fact::Index { curve, index }) => {
            let inv = Invariants::compute(*curve).map_err(err)?;
            (inv.index == *index).then_some(()).ok_or(format!("index is {}", inv.index))
        }
        (Rule::Genus, f @ Fact::Bound(b)) => {
            let inv = Invariants::compute(b.curve).map_err(err)?;
            (genus_of(f, b.curve) == Some(inv.genus)).then_some(()).ok_or(format!("genus is {}", inv.genus))
        }
        (Rule::Asymptotic, Fact::NonMemberFrom { group, degree: d }) => {
            (*d == degree && asymptotic_start(group.m, degree) == Some(*group))
                .then_some(())
                .ok_or("not the asymptotic cutoff".into())
        }
        (Rule::PointCount, Fact::PointCount { record }) => {
            let field = FiniteField::new(record.field.q).map_err(err)?;
            let classes = enumerate_curve_classes(&field).map_err(err)?;
            let fresh = count_points_with_classes(record.spec, &field, &classes).map_err(err)?;
            (fresh == *record).then_some(()).ok_or(format!("recount gives {}", fresh.total))
        }
        (Rule::UnitSearch, Fact::ModularUnit { candidate }) => {
            let matrix = siegel_order_matrix(candidate.curve).map_err(err)?;
            verify_candidate(candidate, &matrix).then_some(()).ok_or("unit does not verify".into())
        }
        (rule, _) => Err(format!("{rule} is not a computed rule for {}", step.conclusion)),
    }
}

/// Replays every step of the report's trace from its premises, recomputing
/// computed steps, and checks that the verdicts match the trace.
pub fn verify_trace(report: &CensusReport) -> Verification {
    let d = report.degree;
    let steps = &report.trace.steps;
    let mut v = Verification::default();
    let computed = [Rule::Axiom, Rule::Index, Rule::Genus, Rule::Asymptotic, Rule::PointCount, Rule::UnitSearch];
    for (pos, s) in steps.iter().enumerate() {
        if s.id != pos {
            v.bad.push((s.id, format!("out of order at position {pos}")));
            continue;
        }
        if let Some(&p) = s.premises.iter().find(|&&p| p >= s.id) {
            v.bad.push((s.id, format!("premise {p} does not precede the step")));
            continue;
        }
        if computed.contains(&s.rule) {
            if !s.premises.is_empty() {
                v.bad.push((s.id, "computed steps take no premises".into()));
            } else if let Err(msg) = recompute(s, d) {
                v.bad.push((s.id, msg));
            }
            continue;
        }
        let premises: Vec<&Fact> = s.premises.iter().map(|&p| &steps[p].conclusion).collect();
        let good = match (s.rule, premises.as_slice(), &s.conclusion) {
            (Rule::FamilyInstance, [Fact::NonMemberFrom { group: from, degree: d1 }], Fact::NonMember { group, degree: d2 }) => {
                d1 == d2 && group.in_family_from(from)
            }
            (Rule::FamilyInstance, _, _) => false,
            (rule, ps, c) => infer(rule, ps, d).as_ref() == Some(c),
        };
        if !good {
            v.bad.push((s.id, format!("{} does not follow by {}", s.conclusion, s.rule)));
        }
    }
    let concludes = |id: Option<usize>, want: &Fact| id.and_then(|i| steps.get(i)).map(|s| &s.conclusion) == Some(want);
    for verdict in &report.verdicts {
        let member = Fact::Member { group: verdict.group, degree: d };
        let non = Fact::NonMember { group: verdict.group, degree: d };
        let ok = match verdict.status {
            Status::Member => concludes(verdict.step, &member) && !steps.iter().any(|s| s.conclusion == non),
            Status::NonMember => concludes(verdict.step, &non) && !steps.iter().any(|s| s.conclusion == member),
            Status::Undecided => !steps.iter().any(|s| s.conclusion == member || s.conclusion == non),
        };
        if !ok {
            v.bad.push((verdict.step.unwrap_or(usize::MAX), format!("verdict for {} does not match the trace", verdict.group)));
        }
    }
    for f in &report.families {
        if !concludes(Some(f.step), &Fact::NonMemberFrom { group: f.from, degree: d }) {
            v.bad.push((f.step, format!("family from {} does not match the trace", f.from)));
        }
    }
    v
}
