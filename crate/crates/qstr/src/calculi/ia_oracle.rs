//! Brute-force derivation of the interval-algebra composition table.
//!
//! The relation between two intervals is determined entirely by the order
//! configuration of their four endpoints. Composition entries can therefore
//! be read off by enumerating all order configurations of six endpoints
//! (three intervals): six values from {0..5} realize every weak ordering of
//! six points. This is an independent oracle for the shipped table, kept
//! free of any dependency on the parsed calculus.

/// Base-relation order the oracle reports in. Matches the shipped
/// declaration order, but the test suite maps entries by name rather than
/// relying on that.
pub const IA_ORACLE_ORDER: [&str; 13] = [
    "eq", "p", "pi", "m", "mi", "o", "oi", "s", "si", "d", "di", "f", "fi",
];

/// Classifies the relation of interval (a1, a2) to interval (b1, b2),
/// returning an index into [`IA_ORACLE_ORDER`]. Endpoints must satisfy
/// a1 < a2 and b1 < b2.
fn classify(a1: i8, a2: i8, b1: i8, b2: i8) -> usize {
    let rel = if a1 == b1 && a2 == b2 {
        "eq"
    } else if a2 < b1 {
        "p"
    } else if b2 < a1 {
        "pi"
    } else if a2 == b1 {
        "m"
    } else if b2 == a1 {
        "mi"
    } else if a1 == b1 {
        if a2 < b2 {
            "s"
        } else {
            "si"
        }
    } else if a2 == b2 {
        if b1 < a1 {
            "f"
        } else {
            "fi"
        }
    } else if b1 < a1 && a2 < b2 {
        "d"
    } else if a1 < b1 && b2 < a2 {
        "di"
    } else if a1 < b1 {
        "o"
    } else {
        "oi"
    };
    IA_ORACLE_ORDER.iter().position(|&r| r == rel).unwrap()
}

/// Derives all 13 x 13 weak-composition entries of the interval algebra by
/// endpoint enumeration. Returns the table row-major over
/// [`IA_ORACLE_ORDER`]: entry `(b, b')` at index `b * 13 + b'` is the bitset
/// of every relation realized between x and y in some configuration with
/// x b z and z b' y.
pub fn derive_ia_table() -> Vec<u64> {
    let mut table = vec![0u64; 13 * 13];
    for x1 in 0i8..6 {
        for x2 in x1 + 1..6 {
            for z1 in 0i8..6 {
                for z2 in z1 + 1..6 {
                    for y1 in 0i8..6 {
                        for y2 in y1 + 1..6 {
                            let b1 = classify(x1, x2, z1, z2);
                            let b2 = classify(z1, z2, y1, y2);
                            let b3 = classify(x1, x2, y1, y2);
                            table[b1 * 13 + b2] |= 1u64 << b3;
                        }
                    }
                }
            }
        }
    }
    table
}
