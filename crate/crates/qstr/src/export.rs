//! Text exports for answer-set-programming and neuro-symbolic consumers.
//!
//! Both exporters emit ground facts and comments only, never rules; the
//! encoding of constraints into a solving program is left to the consumer.
//!
//! Relation, variable, label, and network names are mangled into ASP-safe
//! identifiers: ASCII letters are lowercased, digits and underscores pass
//! through, `<` becomes `lt`, `>` becomes `gt`, `=` becomes `eq`, anything
//! else becomes `_`, and a name that would not start with a lowercase letter
//! gets an `r` prefix. Collisions within one namespace are resolved by
//! appending `_2`, `_3`, ... in declaration order, so the mapping is total
//! and injective.

use std::collections::HashSet;

use crate::algebra::Calculus;
use crate::network::Qcn;
use crate::probabilistic::ProbabilisticQcn;

/// A rendered fact file: header comments followed by atom lines. Comment
/// lines inside `atoms` carry their own `%` prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomDocument {
    pub header: Vec<String>,
    pub atoms: Vec<String>,
}

impl AtomDocument {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for line in &self.header {
            out.push_str("% ");
            out.push_str(line);
            out.push('\n');
        }
        for line in &self.atoms {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}

impl std::fmt::Display for AtomDocument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Mangle one name into an ASP-safe identifier. Not collision-free on its
/// own; use [`asp_unique_names`] for a whole namespace.
pub fn asp_identifier(raw: &str) -> String {
    let mut out = String::new();
    for c in raw.chars() {
        match c {
            'a'..='z' | '0'..='9' | '_' => out.push(c),
            'A'..='Z' => out.push(c.to_ascii_lowercase()),
            '<' => out.push_str("lt"),
            '>' => out.push_str("gt"),
            '=' => out.push_str("eq"),
            _ => out.push('_'),
        }
    }
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert(0, 'r');
    }
    out
}

/// Mangle a sequence of names, keeping order and resolving collisions with
/// numeric suffixes. The result has the same length as the input and no two
/// entries are equal.
pub fn asp_unique_names<'a>(raws: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut used: HashSet<String> = HashSet::new();
    let mut out = Vec::new();
    for raw in raws {
        let base = asp_identifier(raw);
        let name = if used.contains(&base) {
            let mut k = 2usize;
            loop {
                let candidate = format!("{base}_{k}");
                if !used.contains(&candidate) {
                    break candidate;
                }
                k += 1;
            }
        } else {
            base
        };
        used.insert(name.clone());
        out.push(name);
    }
    out
}

/// ASP identifiers for a calculus' base relations, in declaration order.
pub fn asp_relation_names(calculus: &Calculus) -> Vec<String> {
    asp_unique_names(calculus.base_relation_names().iter().map(|s| s.as_str()))
}

/// Plain ASP facts for a network: `var/1` for variables, `possible/3` for
/// every base relation a directed edge still admits, and `composition/3` for
/// the calculus' full weak-composition table. Integrity rules are left to
/// the consumer.
pub fn to_asp_facts(qcn: &Qcn, network_name: &str) -> AtomDocument {
    let cal = qcn.calculus();
    let rel_names = asp_relation_names(cal);
    let var_names = asp_unique_names(qcn.variables().iter().map(|s| s.as_str()));

    let header = vec![
        format!("network: {network_name}"),
        format!("calculus: {}", cal.name()),
    ];
    let mut atoms = Vec::new();
    for v in &var_names {
        atoms.push(format!("var({v})."));
    }
    let n = qcn.var_count();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for b in qcn.constraint(i, j).indices() {
                atoms.push(format!(
                    "possible({}, {}, {}).",
                    var_names[i], var_names[j], rel_names[b]
                ));
            }
        }
    }
    for b1 in 0..cal.len() {
        for b2 in 0..cal.len() {
            let entry = cal.composition_entry(b1, b2);
            for b3 in 0..cal.len() {
                if entry & (1u64 << b3) != 0 {
                    atoms.push(format!(
                        "composition({}, {}, {}).",
                        rel_names[b1], rel_names[b2], rel_names[b3]
                    ));
                }
            }
        }
    }
    AtomDocument { header, atoms }
}

/// Neural-network atoms for a probabilistic network, in the style consumed
/// by NeurASP-like systems: one `nn(region(1, V), [labels])` atom per
/// labeled variable with labels ordered by descending probability, one
/// `nn(network(M, Name), [true, false])` atom where `M` counts non-universal
/// constraints, and one comment per edge recording its probability map.
pub fn to_neurasp_atoms(pq: &ProbabilisticQcn, network_name: &str) -> AtomDocument {
    let qcn = pq.qcn();
    let cal = qcn.calculus();
    let var_names = asp_unique_names(qcn.variables().iter().map(|s| s.as_str()));

    let header = vec![
        format!("network: {network_name}"),
        format!("calculus: {}", cal.name()),
    ];
    let mut atoms = Vec::new();
    for (v, labels) in pq.label_dist().iter().enumerate() {
        if labels.is_empty() {
            continue;
        }
        let mut ordered: Vec<&(String, f64)> = labels.iter().collect();
        ordered.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        let names = asp_unique_names(ordered.iter().map(|(l, _)| l.as_str()));
        atoms.push(format!(
            "nn(region(1, {}), [{}]).",
            var_names[v],
            names.join(", ")
        ));
    }
    let constrained = qcn
        .unordered_pairs()
        .filter(|&(i, j)| !qcn.constraint(i, j).is_universal())
        .count();
    atoms.push(format!(
        "nn(network({constrained}, {}), [true, false]).",
        asp_identifier(network_name)
    ));
    for (i, j) in pq.edge_dist().edges().collect::<Vec<_>>() {
        let dense = pq.edge_dist().edge(i, j).unwrap();
        let entries: Vec<String> = dense
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(b, p)| format!("{}:{}", cal.base_relation_name(b), p))
            .collect();
        atoms.push(format!(
            "% prob {} {} {{ {} }}",
            qcn.variables()[i],
            qcn.variables()[j],
            entries.join(" ")
        ));
    }
    AtomDocument { header, atoms }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Relation;
    use crate::calculi::builtin;
    use crate::generator::{random_qcn, RandomModel};
    use crate::network::{parse_network_str, CalculusResolver};
    use std::collections::{BTreeMap, HashMap};

    fn yolk_egg() -> ProbabilisticQcn {
        let text = "network yolk_egg calculus rcc8\n\
                    vars x y\n\
                    x y ( NTPP PO )\n\
                    prob x y { NTPP:0.45 PO:0.55 }\n\
                    label x { yolk:0.95 }\n\
                    label y { egg:0.9 }\n";
        let doc = parse_network_str(text, "yolk_egg.net", &CalculusResolver::new()).unwrap();
        ProbabilisticQcn::from_document(&doc).unwrap()
    }

    #[test]
    fn mangling_examples() {
        assert_eq!(asp_identifier("TPPi"), "tppi");
        assert_eq!(asp_identifier("<"), "lt");
        assert_eq!(asp_identifier(">"), "gt");
        assert_eq!(asp_identifier("="), "eq");
        assert_eq!(asp_identifier("1x"), "r1x");
        assert_eq!(asp_identifier("≤"), "r_");
        assert_eq!(asp_identifier("NTPP"), "ntpp");
    }

    #[test]
    fn mangling_resolves_collisions_in_order() {
        let names = asp_unique_names(["A", "a", "a_2"]);
        assert_eq!(names, vec!["a", "a_2", "a_2_2"]);
    }

    #[test]
    fn builtin_relation_names_stay_injective() {
        for name in ["pa", "ia", "rcc8"] {
            let cal = builtin(name).unwrap();
            let mangled = asp_relation_names(&cal);
            let unique: HashSet<&String> = mangled.iter().collect();
            assert_eq!(unique.len(), cal.len(), "{name} mangling collided");
        }
        let pa = builtin("pa").unwrap();
        assert_eq!(asp_relation_names(&pa), vec!["lt", "eq", "gt"]);
    }

    #[test]
    fn neurasp_output_for_the_shipped_example() {
        let pq = yolk_egg();
        let doc = to_neurasp_atoms(&pq, "yolk_egg");
        let expected = "% network: yolk_egg\n\
                        % calculus: rcc8\n\
                        nn(region(1, x), [yolk]).\n\
                        nn(region(1, y), [egg]).\n\
                        nn(network(1, yolk_egg), [true, false]).\n\
                        % prob x y { PO:0.55 NTPP:0.45 }\n";
        assert_eq!(doc.to_text(), expected);
    }

    #[test]
    fn neurasp_counts_only_constrained_edges() {
        let cal = builtin("rcc8").unwrap();
        let vars = ["a".to_string(), "b".to_string(), "c".to_string()];
        let mut qcn = Qcn::new(&cal, &vars).unwrap();
        qcn.set_constraint(0, 1, Relation::from_names(&cal, ["EC"]).unwrap())
            .unwrap();
        let pq = ProbabilisticQcn::from_scenarios(&qcn).unwrap();
        let doc = to_neurasp_atoms(&pq, "partial");
        assert!(doc
            .atoms
            .iter()
            .any(|l| l == "nn(network(1, partial), [true, false])."));
    }

    #[test]
    fn neurasp_orders_labels_by_descending_probability() {
        let text = "network n calculus rcc8\n\
                    vars x y\n\
                    x y ( EC )\n\
                    label x { small:0.2 large:0.7 }\n";
        let doc = parse_network_str(text, "n.net", &CalculusResolver::new()).unwrap();
        let pq = ProbabilisticQcn::from_document(&doc).unwrap();
        let rendered = to_neurasp_atoms(&pq, "n");
        assert!(rendered
            .atoms
            .iter()
            .any(|l| l == "nn(region(1, x), [large, small])."));
        assert!(
            !rendered.atoms.iter().any(|l| l.contains("region(1, y)")),
            "unlabeled variables get no region atom"
        );
    }

    #[test]
    fn asp_facts_for_an_atomic_pair() {
        let cal = builtin("rcc8").unwrap();
        let mut qcn = Qcn::new(&cal, ["x", "y"]).unwrap();
        qcn.set_constraint(0, 1, Relation::from_names(&cal, ["NTPP"]).unwrap())
            .unwrap();
        let doc = to_asp_facts(&qcn, "pair");
        let possible: Vec<&String> = doc
            .atoms
            .iter()
            .filter(|l| l.starts_with("possible("))
            .collect();
        assert_eq!(
            possible,
            vec!["possible(x, y, ntpp).", "possible(y, x, ntppi)."]
        );
        assert!(doc.atoms.contains(&"var(x).".to_string()));
        assert!(doc.atoms.contains(&"var(y).".to_string()));
    }

    #[test]
    fn asp_facts_cover_the_whole_composition_table() {
        let cal = builtin("ia").unwrap();
        let qcn = Qcn::new(&cal, ["a", "b"]).unwrap();
        let doc = to_asp_facts(&qcn, "universal");
        let possible = doc
            .atoms
            .iter()
            .filter(|l| l.starts_with("possible("))
            .count();
        assert_eq!(possible, 26, "13 base relations per direction");
        let mut groups: HashSet<(String, String)> = HashSet::new();
        let mut facts = 0usize;
        for line in &doc.atoms {
            let Some(rest) = line.strip_prefix("composition(") else {
                continue;
            };
            let rest = rest.strip_suffix(").").unwrap();
            let parts: Vec<&str> = rest.split(", ").collect();
            assert_eq!(parts.len(), 3);
            groups.insert((parts[0].to_string(), parts[1].to_string()));
            facts += 1;
        }
        assert_eq!(groups.len(), 169, "one group per ordered relation pair");
        let expected_facts: usize = (0..cal.len())
            .flat_map(|b1| (0..cal.len()).map(move |b2| (b1, b2)))
            .map(|(b1, b2)| cal.composition_entry(b1, b2).count_ones() as usize)
            .sum();
        assert_eq!(facts, expected_facts);
    }

    #[test]
    fn exports_are_byte_stable() {
        let pq = yolk_egg();
        assert_eq!(
            to_neurasp_atoms(&pq, "yolk_egg").to_text(),
            to_neurasp_atoms(&pq, "yolk_egg").to_text()
        );
        assert_eq!(
            to_asp_facts(pq.qcn(), "yolk_egg").to_text(),
            to_asp_facts(pq.qcn(), "yolk_egg").to_text()
        );
    }

    #[test]
    fn possible_facts_reconstruct_the_network() {
        let cal = builtin("rcc8").unwrap();
        let model = RandomModel::new(5, 0.6, 4).unwrap();
        let qcn = random_qcn(&cal, &model, 7).unwrap();
        let doc = to_asp_facts(&qcn, "roundtrip");

        let rel_of: HashMap<String, usize> = asp_relation_names(&cal)
            .into_iter()
            .enumerate()
            .map(|(i, n)| (n, i))
            .collect();
        let var_of: HashMap<String, usize> =
            asp_unique_names(qcn.variables().iter().map(|s| s.as_str()))
                .into_iter()
                .enumerate()
                .map(|(i, n)| (n, i))
                .collect();

        let mut rebuilt: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for line in &doc.atoms {
            let Some(rest) = line.strip_prefix("possible(") else {
                continue;
            };
            let parts: Vec<&str> = rest.strip_suffix(").").unwrap().split(", ").collect();
            let i = var_of[parts[0]];
            let j = var_of[parts[1]];
            let b = rel_of[parts[2]];
            *rebuilt.entry((i, j)).or_insert(0) |= 1u64 << b;
        }
        for i in 0..qcn.var_count() {
            for j in 0..qcn.var_count() {
                if i == j {
                    continue;
                }
                assert_eq!(
                    rebuilt.get(&(i, j)).copied().unwrap_or(0),
                    qcn.constraint(i, j).bits(),
                    "edge ({i}, {j}) lost in translation"
                );
            }
        }
    }
}
