//! Release gate. Each test is one acceptance criterion and prints a single
//! PASS line when it holds; a failure message names what broke. Run with
//! `cargo test --test acceptance -- --nocapture` to see the lines.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num::rational::Ratio;
use num::{One, Zero};

use qstr::calculi::{builtin, derive_ia_table, validate_calculus, IA_ORACLE_ORDER};
use qstr::export::{to_asp_facts, to_neurasp_atoms};
use qstr::generator::{random_qcn, RandomModel};
use qstr::network::{parse_network, parse_network_str, CalculusResolver};
use qstr::probabilistic::{
    edge_probabilities_from_scenarios, max_robust_scenario, robustness, Prob, ProbabilisticQcn,
};
use qstr::solver::{enumerate_scenarios, solve};
use qstr::{a_closure, Calculus, Qcn, Relation};

fn samples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

fn sample(name: &str) -> PathBuf {
    samples_dir().join(name)
}

fn qstr_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qstr"))
}

// Criterion 1: the shipped calculi break none of the algebra laws, and the
// shipped interval-algebra composition table matches one derived from
// endpoint arithmetic, entry by entry.
#[test]
fn criterion_1_calculus_validation() {
    let started = Instant::now();
    for name in ["pa", "ia", "rcc8"] {
        let cal = builtin(name).unwrap();
        let violations = validate_calculus(&cal);
        assert!(
            violations.is_empty(),
            "FAIL: builtin `{name}` violates algebra laws: {violations:?}"
        );
    }
    let ia = builtin("ia").unwrap();
    let derived = derive_ia_table();
    let derived_order = IA_ORACLE_ORDER;
    let remap: Vec<usize> = derived_order
        .iter()
        .map(|n| ia.base_relation_index(n).unwrap())
        .collect();
    let mut checked = 0;
    for b1 in 0..13 {
        for b2 in 0..13 {
            let mut expected = 0u64;
            let derived_bits = derived[b1 * 13 + b2];
            for b3 in 0..13 {
                if derived_bits & (1 << b3) != 0 {
                    expected |= 1 << remap[b3];
                }
            }
            let got = ia.composition_entry(remap[b1], remap[b2]);
            assert_eq!(
                got, expected,
                "FAIL: IA composition entry ({}, {}) differs from the endpoint oracle",
                derived_order[b1], derived_order[b2]
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 169);
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(5),
        "FAIL: criterion 1 took {elapsed:?}, budget is 5 s"
    );
    println!("PASS criterion 1: calculus validation and IA table oracle ({elapsed:?})");
}

// Independent satisfiability oracle: assign base relations edge by edge over
// the ORIGINAL constraints and check every composition triangle.
fn brute_force_satisfiable(qcn: &Qcn) -> bool {
    let cal = qcn.calculus();
    let n = qcn.var_count();
    let pairs: Vec<(usize, usize)> = qcn.unordered_pairs().collect();
    let mut assigned: Vec<Vec<usize>> = vec![vec![usize::MAX; n]; n];
    for v in 0..n {
        assigned[v][v] = cal.identity();
    }

    fn consistent_so_far(
        cal: &Arc<Calculus>,
        assigned: &[Vec<usize>],
        pairs: &[(usize, usize)],
        depth: usize,
    ) -> bool {
        let (i, j) = pairs[depth];
        let b = assigned[i][j];
        for k in 0..assigned.len() {
            if k == i || k == j || assigned[i][k] == usize::MAX || assigned[k][j] == usize::MAX {
                continue;
            }
            let ik = assigned[i][k];
            let kj = assigned[k][j];
            // Every edge of the triangle (i, k, j) must be admitted by the
            // composition of the other two.
            if cal.composition_entry(ik, kj) & (1 << b) == 0 {
                return false;
            }
            if cal.composition_entry(b, cal.converse_of(kj)) & (1 << ik) == 0 {
                return false;
            }
            if cal.composition_entry(cal.converse_of(ik), b) & (1 << kj) == 0 {
                return false;
            }
        }
        true
    }

    fn dfs(
        cal: &Arc<Calculus>,
        qcn: &Qcn,
        pairs: &[(usize, usize)],
        assigned: &mut Vec<Vec<usize>>,
        depth: usize,
    ) -> bool {
        if depth == pairs.len() {
            return true;
        }
        let (i, j) = pairs[depth];
        for b in qcn.constraint(i, j).indices() {
            assigned[i][j] = b;
            assigned[j][i] = cal.converse_of(b);
            if consistent_so_far(cal, assigned, pairs, depth)
                && dfs(cal, qcn, pairs, assigned, depth + 1)
            {
                return true;
            }
        }
        assigned[i][j] = usize::MAX;
        assigned[j][i] = usize::MAX;
        false
    }

    if pairs.is_empty() {
        return true;
    }
    dfs(cal, qcn, &pairs, &mut assigned, 0)
}

// Criterion 2: on seeded random networks, the backtracking solver and the
// brute-force oracle agree about satisfiability, with zero disagreements.
#[test]
fn criterion_2_closure_oracle_equivalence() {
    let started = Instant::now();
    let mut total = 0usize;
    let mut sat = 0usize;
    for cal_name in ["ia", "rcc8"] {
        let cal = builtin(cal_name).unwrap();
        let configs = [
            (3usize, 0.9, 3usize, 70u64),
            (4, 0.8, 3, 70),
            (4, 0.5, 4, 35),
            (5, 0.9, 2, 45),
            (5, 0.7, 3, 35),
        ];
        for (vars, density, label, seeds) in configs {
            let model = RandomModel::new(vars, density, label).unwrap();
            for seed in 0..seeds {
                let qcn = random_qcn(&cal, &model, seed ^ 0x9e3779b9).unwrap();
                let engine = solve(&qcn).is_some();
                let oracle = brute_force_satisfiable(&qcn);
                assert_eq!(
                    engine, oracle,
                    "FAIL: solver and brute force disagree on {cal_name} n={vars} d={density} l={label} seed={seed}"
                );
                total += 1;
                if engine {
                    sat += 1;
                }
            }
        }
    }
    assert!(total >= 500, "FAIL: only {total} networks exercised");
    assert!(
        sat > 0 && sat < total,
        "FAIL: degenerate corpus, {sat}/{total} satisfiable"
    );
    let elapsed = started.elapsed();
    assert!(
        elapsed < Duration::from_secs(120),
        "FAIL: criterion 2 took {elapsed:?}, budget is 2 min"
    );
    println!(
        "PASS criterion 2: solver equals brute-force oracle on {total} networks, {sat} satisfiable ({elapsed:?})"
    );
}

fn criterion_3_instances() -> Vec<Qcn> {
    let mut out = Vec::new();
    for cal_name in ["ia", "rcc8"] {
        let cal = builtin(cal_name).unwrap();
        let model = RandomModel::new(4, 0.7, 3).unwrap();
        for seed in 0..90u64 {
            let qcn = random_qcn(&cal, &model, seed).unwrap();
            if solve(&qcn).is_some() {
                out.push(qcn);
            }
        }
        let small = RandomModel::new(3, 0.8, 4).unwrap();
        for seed in 0..30u64 {
            let qcn = random_qcn(&cal, &small, seed).unwrap();
            if solve(&qcn).is_some() {
                out.push(qcn);
            }
        }
    }
    out
}

// Criterion 3: engine robustness equals the hand formula on every scenario
// of the instance corpus; scenario-derived distributions sum to exactly 1
// per edge, honor the converse symmetry, and score atomic networks at 1.0.
#[test]
fn criterion_3_robustness_formula() {
    let instances = criterion_3_instances();
    assert!(
        instances.len() >= 100,
        "FAIL: only {} satisfiable instances generated",
        instances.len()
    );
    let mut scored = 0usize;
    for qcn in &instances {
        let cal = qcn.calculus();
        let dist = edge_probabilities_from_scenarios(qcn).unwrap();
        for (i, j) in qcn.unordered_pairs() {
            let mut sum = Ratio::<u64>::zero();
            for b in 0..cal.len() {
                let Some(Prob::Exact(p)) = dist.probability(i, j, b) else {
                    panic!("FAIL: scenario-derived probability is not exact");
                };
                let Some(back) = dist.probability(j, i, cal.converse_of(b)) else {
                    panic!("FAIL: reverse direction missing");
                };
                assert_eq!(
                    Prob::Exact(p),
                    back,
                    "FAIL: converse symmetry broken on edge ({i}, {j})"
                );
                sum += p;
            }
            assert!(
                sum.is_one(),
                "FAIL: edge ({i}, {j}) probabilities sum to {sum}, not exactly 1"
            );
        }
        let pair_count = qcn.unordered_pairs().count();
        for scenario in enumerate_scenarios(qcn, None) {
            let report = robustness(&dist, scenario.qcn()).unwrap();
            let mut hand = 0.0;
            for (i, j) in scenario.qcn().unordered_pairs() {
                let b = scenario.base_relation(i, j);
                hand += dist.probability(i, j, b).unwrap().as_f64();
            }
            let hand = hand / pair_count as f64;
            assert!(
                (report.robustness - hand).abs() <= 1e-12,
                "FAIL: robustness {} differs from hand formula {hand}",
                report.robustness
            );
            scored += 1;
        }
        // An atomic consistent network is its own sole scenario: certainty.
        let atomic = enumerate_scenarios(qcn, Some(1)).pop().unwrap().into_qcn();
        let atomic_dist = edge_probabilities_from_scenarios(&atomic).unwrap();
        let report = robustness(&atomic_dist, &atomic).unwrap();
        assert_eq!(
            report.robustness, 1.0,
            "FAIL: atomic network robustness is {}, not exactly 1.0",
            report.robustness
        );
    }
    println!(
        "PASS criterion 3: hand formula matches on {scored} scenarios across {} networks",
        instances.len()
    );
}

// Criterion 4: branch and bound returns exactly the exhaustive argmax, ties
// resolved toward the scenario enumeration order.
#[test]
fn criterion_4_branch_and_bound_optimality() {
    let instances = criterion_3_instances();
    assert!(instances.len() >= 100);
    let mut compared = 0usize;
    for qcn in &instances {
        let dist = edge_probabilities_from_scenarios(qcn).unwrap();
        let got = max_robust_scenario(qcn, &dist)
            .unwrap()
            .expect("FAIL: satisfiable instance lost its scenario");
        let mut best: Option<(f64, Qcn)> = None;
        for scenario in enumerate_scenarios(qcn, None) {
            let report = robustness(&dist, scenario.qcn()).unwrap();
            let better = best
                .as_ref()
                .map_or(true, |(score, _)| report.robustness > *score);
            if better {
                best = Some((report.robustness, scenario.into_qcn()));
            }
        }
        let (score, refinement) = best.unwrap();
        assert_eq!(
            got.robustness, score,
            "FAIL: branch and bound score differs from exhaustive argmax"
        );
        assert_eq!(
            got.refinement, refinement,
            "FAIL: branch and bound picked a different scenario than the tie rule"
        );
        compared += 1;
    }
    println!("PASS criterion 4: branch and bound equals exhaustive argmax on {compared} instances");
}

// Criterion 5: the yolk/egg pipeline end to end through the binary, compared
// byte-for-byte against committed golden JSON.
#[test]
fn criterion_5_yolk_egg_golden() {
    let rectify_out = qstr_bin()
        .args([
            "rectify",
            sample("yolk_egg.net").to_str().unwrap(),
            "--background",
            sample("yolk_egg_background.net").to_str().unwrap(),
            "--json",
        ])
        .output()
        .unwrap();
    assert!(
        rectify_out.status.success(),
        "FAIL: rectify exited with {:?}",
        rectify_out.status
    );
    let golden_rectify = include_str!("golden/rectify_yolk_egg.json");
    assert_eq!(
        String::from_utf8(rectify_out.stdout).unwrap(),
        golden_rectify,
        "FAIL: rectify JSON drifted from the golden file"
    );
    assert!(
        golden_rectify.contains("\"relation\": \"NTPP\"")
            && golden_rectify.contains("\"p\": 1.0"),
        "FAIL: golden rectify output no longer pins contained:1.0"
    );

    let maxrobust_out = qstr_bin()
        .args([
            "maxrobust",
            sample("yolk_egg.net").to_str().unwrap(),
            "--background",
            sample("yolk_egg_background.net").to_str().unwrap(),
            "--json",
        ])
        .output()
        .unwrap();
    assert!(
        maxrobust_out.status.success(),
        "FAIL: maxrobust exited with {:?}",
        maxrobust_out.status
    );
    let golden_max = include_str!("golden/maxrobust_yolk_egg.json");
    assert_eq!(
        String::from_utf8(maxrobust_out.stdout).unwrap(),
        golden_max,
        "FAIL: maxrobust JSON drifted from the golden file"
    );
    let parsed: serde_json::Value = serde_json::from_str(golden_max).unwrap();
    assert_eq!(
        parsed["scenario"]["edges"][0]["relation"], "NTPP",
        "FAIL: maxrobust no longer selects the contained relation"
    );
    println!("PASS criterion 5: yolk/egg rectification and maxrobust match golden JSON");
}

// Criterion 6: parse -> write -> parse identity over the fixture corpus, and
// byte-stable exports.
#[test]
fn criterion_6_round_trips_and_stable_exports() {
    let dir = samples_dir();
    let mut fixtures: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(false, |x| x == "net"))
        .collect();
    fixtures.sort();
    assert!(
        fixtures.len() >= 20,
        "FAIL: corpus has only {} fixtures",
        fixtures.len()
    );
    // The corpus must keep the three-task network whose A-to-C edge is left
    // open: A before or after B, B before C.
    let open_edge = parse_network(sample("ia_open_edge.net"))
        .expect("FAIL: corpus lost the open-edge three-task example");
    let cal = open_edge.qcn.calculus();
    let a = open_edge.qcn.variable_index("A").unwrap();
    let b = open_edge.qcn.variable_index("B").unwrap();
    let c = open_edge.qcn.variable_index("C").unwrap();
    assert_eq!(
        open_edge.qcn.constraint(a, b),
        &Relation::from_names(cal, ["p", "pi"]).unwrap(),
        "FAIL: open-edge example drifted"
    );
    assert_eq!(
        open_edge.qcn.constraint(b, c),
        &Relation::from_names(cal, ["p"]).unwrap(),
        "FAIL: open-edge example drifted"
    );
    assert!(
        open_edge.qcn.constraint(a, c).is_universal(),
        "FAIL: the A-to-C edge is supposed to stay open in the fixture"
    );
    let mut resolver = CalculusResolver::new();
    resolver.add_search_dir(&dir);
    for path in &fixtures {
        let doc = parse_network(path).unwrap();
        let written = doc.to_text();
        let reparsed = parse_network_str(&written, "rewritten.net", &resolver)
            .unwrap_or_else(|e| panic!("FAIL: rewritten {} no longer parses: {e}", path.display()));
        assert_eq!(
            reparsed.qcn, doc.qcn,
            "FAIL: constraints of {} changed across a write cycle",
            path.display()
        );
        assert_eq!(
            reparsed.name,
            doc.name,
            "FAIL: name of {} changed across a write cycle",
            path.display()
        );
        assert_eq!(
            reparsed.to_text(),
            written,
            "FAIL: canonical text of {} is not a fixed point",
            path.display()
        );

        let pq = ProbabilisticQcn::from_document(&doc).unwrap();
        assert_eq!(
            doc.qcn.to_dot(&doc.name),
            doc.qcn.to_dot(&doc.name),
            "FAIL: DOT export unstable for {}",
            path.display()
        );
        assert_eq!(
            to_asp_facts(&doc.qcn, &doc.name).to_text(),
            to_asp_facts(&doc.qcn, &doc.name).to_text(),
            "FAIL: ASP export unstable for {}",
            path.display()
        );
        assert_eq!(
            to_neurasp_atoms(&pq, &doc.name).to_text(),
            to_neurasp_atoms(&pq, &doc.name).to_text(),
            "FAIL: NeurASP export unstable for {}",
            path.display()
        );
    }
    // The same invocation twice through the binary must agree byte for byte.
    for format in ["dot", "asp", "neurasp"] {
        let run = || {
            qstr_bin()
                .args([
                    "export",
                    sample("yolk_egg.net").to_str().unwrap(),
                    "--format",
                    format,
                ])
                .output()
                .unwrap()
                .stdout
        };
        assert_eq!(run(), run(), "FAIL: {format} export differs between runs");
    }
    println!(
        "PASS criterion 6: round trips and stable exports on {} fixtures",
        fixtures.len()
    );
}

// Criterion 7: the two worked inference examples. Containment chains
// propagate through composition; an ordering cycle is refuted.
#[test]
fn criterion_7_inference_examples() {
    let chain = parse_network(sample("ntpp_chain.net")).unwrap();
    let closed = a_closure(&chain.qcn);
    assert!(closed.consistent, "FAIL: containment chain reported inconsistent");
    let cal = chain.qcn.calculus();
    let a = chain.qcn.variable_index("a").unwrap();
    let c = chain.qcn.variable_index("c").unwrap();
    let ntpp = Relation::from_names(cal, ["NTPP"]).unwrap();
    assert_eq!(
        closed.closed_network.constraint(a, c),
        &ntpp,
        "FAIL: open edge not tightened to NTPP"
    );

    let cycle = parse_network(sample("ia_chain_inconsistent.net")).unwrap();
    let closed = a_closure(&cycle.qcn);
    assert!(
        !closed.consistent,
        "FAIL: before/before/after cycle not refuted"
    );
    println!("PASS criterion 7: containment chain tightens to NTPP; ordering cycle refuted");
}
