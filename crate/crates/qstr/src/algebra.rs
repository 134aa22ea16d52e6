//! Core relation algebra: finite base-relation systems and the set
//! operations over their powerset, including converse and weak composition.
//!
//! A [`Calculus`] holds the base relations of one qualitative constraint
//! language together with its identity, converse permutation, and weak
//! composition table. A [`Relation`] is a subset of those base relations,
//! stored as one machine word of bits, so all set operations are O(1) and
//! composition is a pair of loops over set bits.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Upper bound on the number of base relations, so a relation fits in a u64.
pub const MAX_BASE_RELATIONS: usize = 64;

/// A qualitative calculus: jointly exhaustive, pairwise disjoint base
/// relations over some infinite domain, closed under converse, with a weak
/// composition table.
///
/// Instances are immutable after construction and are shared behind `Arc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calculus {
    name: String,
    domain_description: String,
    base_relations: Vec<String>,
    identity: usize,
    converse: Vec<usize>,
    /// Row-major |B| x |B| table; entry (b, b') is the bitset of b diamond b'.
    composition: Vec<u64>,
    atomic_closure_decides: bool,
}

impl Calculus {
    /// Builds a calculus after checking the structural requirements: between
    /// 1 and 64 uniquely named base relations, a converse permutation of the
    /// right size, and a total composition table. Law-level validation
    /// (involution, identity laws, duality) is a separate concern; see
    /// `calculi::validate_calculus`.
    pub fn new(
        name: impl Into<String>,
        domain_description: impl Into<String>,
        base_relations: Vec<String>,
        identity: usize,
        converse: Vec<usize>,
        composition: Vec<u64>,
        atomic_closure_decides: bool,
    ) -> Result<Self> {
        let n = base_relations.len();
        if n == 0 || n > MAX_BASE_RELATIONS {
            return Err(Error::InvalidCalculus(format!(
                "need between 1 and {MAX_BASE_RELATIONS} base relations, got {n}"
            )));
        }
        for (i, r) in base_relations.iter().enumerate() {
            if r.is_empty() || r.chars().any(|c| c.is_whitespace()) || r.contains(['(', ')', '#']) {
                return Err(Error::InvalidCalculus(format!("bad relation name `{r}`")));
            }
            if base_relations[..i].contains(r) {
                return Err(Error::InvalidCalculus(format!("duplicate relation name `{r}`")));
            }
        }
        if identity >= n {
            return Err(Error::InvalidCalculus("identity index out of range".into()));
        }
        if converse.len() != n || converse.iter().any(|&k| k >= n) {
            return Err(Error::InvalidCalculus("converse map has wrong shape".into()));
        }
        let mut seen = vec![false; n];
        for &k in &converse {
            if seen[k] {
                return Err(Error::InvalidCalculus("converse map is not a permutation".into()));
            }
            seen[k] = true;
        }
        if composition.len() != n * n {
            return Err(Error::InvalidCalculus(format!(
                "composition table has {} entries, expected {}",
                composition.len(),
                n * n
            )));
        }
        let mask = mask_for(n);
        if composition.iter().any(|&e| e & !mask != 0) {
            return Err(Error::InvalidCalculus("composition entry out of range".into()));
        }
        Ok(Calculus {
            name: name.into(),
            domain_description: domain_description.into(),
            base_relations,
            identity,
            converse,
            composition,
            atomic_closure_decides,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain_description(&self) -> &str {
        &self.domain_description
    }

    /// Number of base relations |B|.
    pub fn len(&self) -> usize {
        self.base_relations.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a calculus always has at least one base relation
    }

    pub fn base_relation_names(&self) -> &[String] {
        &self.base_relations
    }

    pub fn base_relation_name(&self, index: usize) -> &str {
        &self.base_relations[index]
    }

    pub fn base_relation_index(&self, name: &str) -> Option<usize> {
        self.base_relations.iter().position(|r| r == name)
    }

    /// Index of the identity relation Id.
    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Converse of a single base relation.
    pub fn converse_of(&self, index: usize) -> usize {
        self.converse[index]
    }

    /// Weak composition of two base relations, as a bitset.
    pub fn composition_entry(&self, b1: usize, b2: usize) -> u64 {
        self.composition[b1 * self.base_relations.len() + b2]
    }

    /// Whether algebraic closure of an atomic network decides satisfiability
    /// for this calculus. True for the built-ins; user-defined calculi
    /// default to false unless their definition says otherwise.
    pub fn atomic_closure_decides(&self) -> bool {
        self.atomic_closure_decides
    }

    /// Bitset with every base relation present.
    pub fn universal_bits(&self) -> u64 {
        mask_for(self.base_relations.len())
    }

    /// Converse lifted to relation bitsets: union of per-base converses.
    pub fn converse_bits(&self, bits: u64) -> u64 {
        let mut out = 0u64;
        let mut rest = bits;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1u64 << self.converse[i];
        }
        out
    }

    /// Weak composition lifted to relation bitsets: union of table entries
    /// over all base-relation pairs.
    pub fn compose_bits(&self, r: u64, s: u64) -> u64 {
        let n = self.base_relations.len();
        let mut out = 0u64;
        let mut a = r;
        while a != 0 {
            let i = a.trailing_zeros() as usize;
            a &= a - 1;
            let row = &self.composition[i * n..(i + 1) * n];
            let mut b = s;
            while b != 0 {
                let j = b.trailing_zeros() as usize;
                b &= b - 1;
                out |= row[j];
            }
        }
        out
    }

    /// Compares everything that defines the algebra itself, ignoring the
    /// `atomic_closure_decides` flag (which is metadata about the calculus,
    /// not part of its tables).
    pub fn same_algebra(&self, other: &Calculus) -> bool {
        self.name == other.name
            && self.base_relations == other.base_relations
            && self.identity == other.identity
            && self.converse == other.converse
            && self.composition == other.composition
    }

    /// Returns a copy with the `atomic_closure_decides` flag replaced.
    pub fn with_atomic_closure_decides(mut self, value: bool) -> Self {
        self.atomic_closure_decides = value;
        self
    }
}

fn mask_for(n: usize) -> u64 {
    if n == MAX_BASE_RELATIONS {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

pub(crate) fn check_same(a: &Arc<Calculus>, b: &Arc<Calculus>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::CalculusMismatch {
            left: a.name().to_string(),
            right: b.name().to_string(),
        })
    }
}

/// A relation of one calculus: a subset of its base relations. The empty
/// relation is legal and denotes an unsatisfiable constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    calculus: Arc<Calculus>,
    bits: u64,
}

impl Relation {
    /// The universal relation (all base relations; complete uncertainty).
    pub fn universal(calculus: &Arc<Calculus>) -> Self {
        Relation {
            calculus: Arc::clone(calculus),
            bits: calculus.universal_bits(),
        }
    }

    /// The empty relation.
    pub fn empty(calculus: &Arc<Calculus>) -> Self {
        Relation {
            calculus: Arc::clone(calculus),
            bits: 0,
        }
    }

    /// The singleton relation holding one base relation by index.
    pub fn single(calculus: &Arc<Calculus>, index: usize) -> Self {
        assert!(index < calculus.len(), "base relation index out of range");
        Relation {
            calculus: Arc::clone(calculus),
            bits: 1u64 << index,
        }
    }

    /// The identity relation {Id}.
    pub fn identity(calculus: &Arc<Calculus>) -> Self {
        Self::single(calculus, calculus.identity())
    }

    /// Builds a relation from base-relation names.
    pub fn from_names<'a>(
        calculus: &Arc<Calculus>,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut bits = 0u64;
        for name in names {
            let i = calculus
                .base_relation_index(name)
                .ok_or_else(|| Error::InvalidCalculus(format!(
                    "relation `{name}` is not part of calculus `{}`",
                    calculus.name()
                )))?;
            bits |= 1u64 << i;
        }
        Ok(Relation {
            calculus: Arc::clone(calculus),
            bits,
        })
    }

    /// Builds a relation directly from a bitset; bits outside the calculus
    /// are rejected.
    pub fn from_bits(calculus: &Arc<Calculus>, bits: u64) -> Result<Self> {
        if bits & !calculus.universal_bits() != 0 {
            return Err(Error::InvalidCalculus("relation bits out of range".into()));
        }
        Ok(Relation {
            calculus: Arc::clone(calculus),
            bits,
        })
    }

    pub fn calculus(&self) -> &Arc<Calculus> {
        &self.calculus
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_universal(&self) -> bool {
        self.bits == self.calculus.universal_bits()
    }

    /// True iff the relation holds exactly one base relation.
    pub fn is_atomic(&self) -> bool {
        self.bits.count_ones() == 1
    }

    /// Number of base relations present.
    pub fn cardinality(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.calculus.len() && self.bits & (1u64 << index) != 0
    }

    /// Indices of the base relations present, ascending.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..self.calculus.len()).filter(move |i| bits & (1u64 << i) != 0)
    }

    /// Names of the base relations present, in declaration order.
    pub fn names(&self) -> Vec<&str> {
        self.indices()
            .map(|i| self.calculus.base_relation_name(i))
            .collect()
    }

    /// Converse: the union of the converses of the members.
    pub fn converse(&self) -> Relation {
        Relation {
            calculus: Arc::clone(&self.calculus),
            bits: self.calculus.converse_bits(self.bits),
        }
    }

    /// Weak composition: the union of table entries over all base pairs.
    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        check_same(&self.calculus, &other.calculus)?;
        Ok(Relation {
            calculus: Arc::clone(&self.calculus),
            bits: self.calculus.compose_bits(self.bits, other.bits),
        })
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        check_same(&self.calculus, &other.calculus)?;
        Ok(Relation {
            calculus: Arc::clone(&self.calculus),
            bits: self.bits | other.bits,
        })
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        check_same(&self.calculus, &other.calculus)?;
        Ok(Relation {
            calculus: Arc::clone(&self.calculus),
            bits: self.bits & other.bits,
        })
    }

    pub fn complement(&self) -> Relation {
        Relation {
            calculus: Arc::clone(&self.calculus),
            bits: !self.bits & self.calculus.universal_bits(),
        }
    }

    pub fn is_subset_of(&self, other: &Relation) -> bool {
        self.bits & !other.bits == 0
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(" "))
    }
}
