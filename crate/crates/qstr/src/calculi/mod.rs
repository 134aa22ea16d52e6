//! Built-in calculi, the calculus-definition file loader, table validation,
//! and table-derivation oracles.
//!
//! The built-ins (point algebra `pa`, interval algebra `ia`, region
//! connection calculus `rcc8`) are shipped as data files in the same format
//! user calculi use, embedded at compile time and parsed once on first use.

mod ia_oracle;
mod loader;

pub use ia_oracle::{derive_ia_table, IA_ORACLE_ORDER};
pub use loader::{load_calculus, parse_calculus_str, validate_calculus, Violation, ViolationKind};

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::algebra::Calculus;
use crate::error::{Error, Result};

/// Shipped point-algebra definition.
pub const PA_DEFINITION: &str = include_str!("data/pa.cal");
/// Shipped interval-algebra definition.
pub const IA_DEFINITION: &str = include_str!("data/ia.cal");
/// Shipped region-connection-calculus definition.
pub const RCC8_DEFINITION: &str = include_str!("data/rcc8.cal");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["pa", "ia", "rcc8"];

/// Returns a built-in calculus by name: `pa`, `ia`, or `rcc8`.
///
/// Built-ins are parsed from the embedded definitions once and then shared.
/// All of them carry `atomic_closure_decides = true`, following the standard
/// closure results for these calculi.
pub fn builtin(name: &str) -> Result<Arc<Calculus>> {
    static PA: OnceLock<Arc<Calculus>> = OnceLock::new();
    static IA: OnceLock<Arc<Calculus>> = OnceLock::new();
    static RCC8: OnceLock<Arc<Calculus>> = OnceLock::new();
    let (cell, text) = match name {
        "pa" => (&PA, PA_DEFINITION),
        "ia" => (&IA, IA_DEFINITION),
        "rcc8" => (&RCC8, RCC8_DEFINITION),
        _ => return Err(Error::UnknownCalculus(name.to_string())),
    };
    Ok(Arc::clone(cell.get_or_init(|| {
        let cal = parse_calculus_str(text, "<builtin>")
            .unwrap_or_else(|e| panic!("shipped `{name}` definition failed to parse: {e}"))
            .with_atomic_closure_decides(true);
        Arc::new(cal)
    })))
}

/// One oriented-point relation at granularity m: each entity sees the other
/// in one of 4m angular sectors (sector 0 is straight ahead, odd sectors are
/// half-plane cones, even sectors are rays). When the two points coincide
/// only one sector is meaningful, the orientation of the second point as
/// seen from the first.
///
/// This is a representation only; there is no composition table and no
/// [`Calculus`] instance behind it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpraRelation {
    granularity: u32,
    sector_of_b_from_a: u32,
    sector_of_a_from_b: u32,
    same_position: bool,
}

impl OpraRelation {
    /// Relation between two distinct oriented points. Sectors must lie in
    /// `0..4m`.
    pub fn new(granularity: u32, sector_of_b_from_a: u32, sector_of_a_from_b: u32) -> Result<Self> {
        Self::check(granularity, &[sector_of_b_from_a, sector_of_a_from_b])?;
        Ok(OpraRelation {
            granularity,
            sector_of_b_from_a,
            sector_of_a_from_b,
            same_position: false,
        })
    }

    /// Relation between two coinciding oriented points; the single sector is
    /// stored in both fields so converse is the identity on it.
    pub fn same_position(granularity: u32, sector: u32) -> Result<Self> {
        Self::check(granularity, &[sector])?;
        Ok(OpraRelation {
            granularity,
            sector_of_b_from_a: sector,
            sector_of_a_from_b: sector,
            same_position: true,
        })
    }

    fn check(granularity: u32, sectors: &[u32]) -> Result<()> {
        if granularity == 0 {
            return Err(Error::InvalidCalculus("granularity must be positive".into()));
        }
        let bound = 4 * granularity;
        for &s in sectors {
            if s >= bound {
                return Err(Error::InvalidCalculus(format!(
                    "sector {s} out of range 0..{bound} at granularity {granularity}"
                )));
            }
        }
        Ok(())
    }

    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    /// Total number of sectors, 4m.
    pub fn sector_count(&self) -> u32 {
        4 * self.granularity
    }

    pub fn sector_of_b_from_a(&self) -> u32 {
        self.sector_of_b_from_a
    }

    pub fn sector_of_a_from_b(&self) -> u32 {
        self.sector_of_a_from_b
    }

    pub fn is_same_position(&self) -> bool {
        self.same_position
    }
}

impl fmt::Display for OpraRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.same_position {
            write!(f, "opra_{}(same, {})", self.granularity, self.sector_of_b_from_a)
        } else {
            write!(
                f,
                "opra_{}({}, {})",
                self.granularity, self.sector_of_b_from_a, self.sector_of_a_from_b
            )
        }
    }
}

/// Converse of an oriented-point relation: swaps the viewpoints. Involution;
/// a same-position relation keeps its single sector.
pub fn opra_converse(r: OpraRelation) -> OpraRelation {
    OpraRelation {
        sector_of_b_from_a: r.sector_of_a_from_b,
        sector_of_a_from_b: r.sector_of_b_from_a,
        ..r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_have_documented_shapes() {
        let ia = builtin("ia").unwrap();
        assert_eq!(ia.len(), 13);
        assert_eq!(ia.base_relation_name(ia.identity()), "eq");

        let rcc8 = builtin("rcc8").unwrap();
        assert_eq!(rcc8.len(), 8);
        assert_eq!(rcc8.identity(), rcc8.base_relation_index("EQ").unwrap());

        let pa = builtin("pa").unwrap();
        assert_eq!(pa.len(), 3);
        let lt = pa.base_relation_index("<").unwrap();
        let eq = pa.base_relation_index("=").unwrap();
        let gt = pa.base_relation_index(">").unwrap();
        assert_eq!(pa.converse_of(lt), gt);
        assert_eq!(pa.converse_of(eq), eq);
        assert_eq!(pa.identity(), eq);
    }

    #[test]
    fn builtin_instances_are_shared() {
        let a = builtin("rcc8").unwrap();
        let b = builtin("rcc8").unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn unknown_builtin_is_an_error() {
        assert!(matches!(builtin("allen"), Err(Error::UnknownCalculus(_))));
    }

    #[test]
    fn builtins_pass_validation() {
        for name in BUILTIN_NAMES {
            let cal = builtin(name).unwrap();
            let violations = validate_calculus(&cal);
            assert!(violations.is_empty(), "{name}: {violations:?}");
            assert!(cal.atomic_closure_decides());
        }
    }

    /// Independent check of the point-algebra table: relations between
    /// points are order comparisons, so compositions can be read off from
    /// all value assignments to three points. Three values suffice because
    /// only the order configuration matters.
    #[test]
    fn pa_table_matches_three_point_enumeration() {
        let pa = builtin("pa").unwrap();
        let classify = |a: i32, b: i32| match a.cmp(&b) {
            std::cmp::Ordering::Less => "<",
            std::cmp::Ordering::Equal => "=",
            std::cmp::Ordering::Greater => ">",
        };
        let mut table = std::collections::BTreeMap::new();
        for x in 0..3 {
            for z in 0..3 {
                for y in 0..3 {
                    let b1 = pa.base_relation_index(classify(x, z)).unwrap();
                    let b2 = pa.base_relation_index(classify(z, y)).unwrap();
                    let b3 = pa.base_relation_index(classify(x, y)).unwrap();
                    *table.entry((b1, b2)).or_insert(0u64) |= 1 << b3;
                }
            }
        }
        for b1 in 0..3 {
            for b2 in 0..3 {
                assert_eq!(
                    pa.composition_entry(b1, b2),
                    table[&(b1, b2)],
                    "entry ({}, {})",
                    pa.base_relation_name(b1),
                    pa.base_relation_name(b2)
                );
            }
        }
    }

    #[test]
    fn opra_converse_swaps_viewpoints() {
        let r = OpraRelation::new(4, 13, 3).unwrap();
        let c = opra_converse(r);
        assert_eq!(c.sector_of_b_from_a(), 3);
        assert_eq!(c.sector_of_a_from_b(), 13);
        assert_eq!(c.granularity(), 4);
        assert_eq!(opra_converse(c), r);
    }

    #[test]
    fn opra_same_position_is_symmetric() {
        let r = OpraRelation::same_position(2, 5).unwrap();
        assert_eq!(opra_converse(r), r);
        assert_eq!(r.sector_of_b_from_a(), 5);
    }

    #[test]
    fn opra_rejects_out_of_range_sectors() {
        assert!(OpraRelation::new(4, 16, 0).is_err());
        assert!(OpraRelation::new(0, 0, 0).is_err());
        assert!(OpraRelation::same_position(1, 4).is_err());
        assert!(OpraRelation::new(4, 15, 15).is_ok());
    }
}
