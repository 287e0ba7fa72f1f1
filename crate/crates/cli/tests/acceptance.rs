//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion, non-zero exit
//! status if any criterion fails.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use zdist::analysis::stretch_constant;
use zdist::brute::{brute_solve, verify_assignment};
use zdist::endo::{
    classify_endomorphism, is_endomorphism, reduce_template, search_periodic_endomorphism, Drift,
    EndoKind, EndoSearch, PeriodicMapSpec,
};
use zdist::io::parse_template;
use zdist::polymorphism::{
    check_two_decomposable, default_d_max, default_decomposition_window, falsify_randomized,
    find_modular_median, modular_median, preserves_relation, Preservation,
};
use zdist::solver::{solve, Mode, SolveOptions, SolveStats, Verdict};
use zdist::{Constraint, Instance, RelationDef, Template};

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures_dir().join(name).to_string_lossy().into_owned()
}

fn load(name: &str) -> Template {
    parse_template(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

const FIXTURE_TEMPLATES: &[&str] = &[
    "dist1.json",
    "dist12.json",
    "dist13.json",
    "dist136_3.json",
    "steps.json",
    "box.json",
    "mixed.json",
];

#[derive(Default)]
struct Violations {
    bound: u64,
    budget: u64,
    runs: u64,
}

impl Violations {
    fn absorb(&mut self, s: &SolveStats) {
        self.bound += s.bound_violations;
        self.budget += s.budget_violations;
        self.runs += 1;
    }
}

type Outcome = Result<String, String>;

fn random_relation(rng: &mut StdRng, name: &str) -> RelationDef {
    if rng.gen_bool(0.8) {
        let size = rng.gen_range(1..=4);
        let offsets: BTreeSet<i64> = (0..size).map(|_| rng.gen_range(-4..=4)).collect();
        RelationDef::binary(name, offsets)
    } else {
        let size = rng.gen_range(1..=4);
        let tuples: Vec<Vec<i64>> = (0..size)
            .map(|_| vec![rng.gen_range(-4..=4), rng.gen_range(-4..=4)])
            .collect();
        RelationDef::from_tuples(name, 3, tuples).unwrap()
    }
}

fn random_template(rng: &mut StdRng) -> Template {
    let count = rng.gen_range(1..=2);
    let rels = (0..count)
        .map(|i| random_relation(rng, &format!("R{i}")))
        .collect();
    Template::new("random", rels).unwrap()
}

fn constraint_over(rng: &mut StdRng, t: &Template, must: [usize; 2], n: usize) -> Constraint {
    let rel = t.relations().choose(rng).unwrap();
    let mut args = must.to_vec();
    while args.len() < rel.arity() {
        args.push(rng.gen_range(0..n));
    }
    args.shuffle(rng);
    Constraint::new(rel.name(), args)
}

/// Spanning tree plus a few extra constraints; every tree edge lies in one constraint.
fn random_connected_instance(rng: &mut StdRng, t: &Template) -> Instance {
    let n = rng.gen_range(2..=7);
    let mut cs = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        cs.push(constraint_over(rng, t, [u, v], n));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        cs.push(constraint_over(rng, t, [u, v], n));
    }
    Instance::new(n, cs).unwrap()
}

fn random_instance(rng: &mut StdRng, t: &Template) -> Instance {
    let n = rng.gen_range(1..=7);
    let cs = (0..rng.gen_range(0..=2 * n))
        .map(|_| {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            constraint_over(rng, t, [u, v], n)
        })
        .collect();
    Instance::new(n, cs).unwrap()
}

fn consistency() -> SolveOptions {
    SolveOptions {
        mode: Mode::Consistency,
        ..Default::default()
    }
}

fn criterion_1(v: &mut Violations) -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let (mut pairs, mut attempts, mut sat, mut problems) = (0, 0, 0, Vec::new());
    while pairs < 500 && attempts < 50_000 {
        attempts += 1;
        let t = random_template(&mut rng);
        if find_modular_median(&t, default_d_max(&t)).is_none() {
            continue;
        }
        let inst = random_connected_instance(&mut rng, &t);
        pairs += 1;
        let oracle = brute_solve(&inst, &t).map_err(|e| e.to_string())?;
        match solve(&inst, &t, &consistency()) {
            Ok(out) => {
                v.absorb(&out.stats);
                match (&out.verdict, &oracle) {
                    (Verdict::Sat(_), Some(_)) => sat += 1,
                    (Verdict::Unsat, None) => {}
                    (verdict, _) => problems.push(format!(
                        "{t:?} {inst:?}: consistency {verdict:?}, brute {oracle:?}"
                    )),
                }
            }
            Err(e) => problems.push(format!("{t:?} {inst:?}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{pairs} pairs ({sat} sat) from {attempts} templates, {} disagreements/unknowns, {:.1}s",
        problems.len(),
        elapsed.as_secs_f64()
    );
    if pairs >= 500 && problems.is_empty() && elapsed < Duration::from_secs(120) {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", problems.first()))
    }
}

fn criterion_2(v: &mut Violations) -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    let (mut unsat, mut unknown, mut problems) = (0, 0, Vec::new());
    for _ in 0..600 {
        let t = random_template(&mut rng);
        let inst = if rng.gen_bool(0.5) {
            random_connected_instance(&mut rng, &t)
        } else {
            random_instance(&mut rng, &t)
        };
        match solve(&inst, &t, &consistency()) {
            Ok(out) => {
                v.absorb(&out.stats);
                match out.verdict {
                    Verdict::Unsat => {
                        unsat += 1;
                        if let Some(a) = brute_solve(&inst, &t).map_err(|e| e.to_string())? {
                            problems.push(format!("{t:?} {inst:?}: unsat but brute found {a:?}"));
                        }
                    }
                    Verdict::Unknown(_) => unknown += 1,
                    Verdict::Sat(_) => {}
                }
            }
            Err(e) => problems.push(format!("{t:?} {inst:?}: {e}")),
        }
    }
    let detail = format!(
        "600 pairs, {unsat} unsat all confirmed by brute, {unknown} unknown, {} violations",
        problems.len()
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", problems.first()))
    }
}

fn criterion_3(v: &mut Violations) -> Outcome {
    let t = load("dist12.json");
    let mut lines = Vec::new();
    for (name, expect_sat) in [("k3", true), ("c5", true), ("petersen", true), ("k4", false)] {
        let text = std::fs::read_to_string(fixture(&format!("{name}.json"))).unwrap();
        let inst = zdist::io::parse_instance(&text, &t).map_err(|d| d.to_string())?;
        let out = solve(&inst, &t, &SolveOptions::default()).map_err(|e| e.to_string())?;
        v.absorb(&out.stats);
        let got_sat = match &out.verdict {
            Verdict::Sat(a) => {
                if !verify_assignment(&inst, &t, a).unwrap().is_valid() {
                    return Err(format!("{name}: invalid witness"));
                }
                true
            }
            Verdict::Unsat => false,
            Verdict::Unknown(r) => return Err(format!("{name}: unknown ({r})")),
        };
        let start = Instant::now();
        let brute = brute_solve(&inst, &t).map_err(|e| e.to_string())?;
        let brute_time = start.elapsed();
        if got_sat != expect_sat || brute.is_some() != expect_sat {
            return Err(format!("{name}: auto sat={got_sat}, brute sat={}", brute.is_some()));
        }
        if brute_time >= Duration::from_secs(5) {
            return Err(format!("{name}: brute took {brute_time:?}"));
        }
        lines.push(format!(
            "{name}={} (brute {:.3}s)",
            if got_sat { "sat" } else { "unsat" },
            brute_time.as_secs_f64()
        ));
    }
    Ok(lines.join(", "))
}

fn criterion_4(v: &Violations) -> Outcome {
    let detail = format!(
        "{} solver runs, {} bound violations, {} budget violations, debug assertions {}",
        v.runs,
        v.bound,
        v.budget,
        if cfg!(debug_assertions) { "on" } else { "off" }
    );
    if v.bound == 0 && v.budget == 0 && v.runs > 0 && cfg!(debug_assertions) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Direct reading of the definition, independent of the library's case split.
fn median_oracle(d: i64, x: i64, y: i64, z: i64) -> i64 {
    let same = |a: i64, b: i64| (a - b).rem_euclid(d) == 0;
    if same(x, y) && same(y, z) {
        let mut v = [x, y, z];
        v.sort_unstable();
        v[1]
    } else if same(y, z) && !same(x, y) {
        y
    } else {
        x
    }
}

fn criterion_5() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let mut failures = 0u64;
    let mut evaluations = 0u64;
    for d in 1..=10u64 {
        for _ in 0..100_000 {
            let x = rng.gen_range(-1_000_000..=1_000_000);
            let y = rng.gen_range(-1_000_000..=1_000_000);
            let z = x + rng.gen_range(-30..=30);
            let s = rng.gen_range(-1_000_000..=1_000_000);
            let m = |a, b, c| modular_median(d, a, b, c);
            let majority = m(x, x, y) == x && m(x, y, x) == x && m(y, x, x) == x;
            let idempotent = m(x, x, x) == x;
            let shift = m(x + s, y + s, z + s) == m(x, y, z) + s
                && m(x + s, z + s, y + s) == m(x, z, y) + s;
            let oracle = m(x, z, y) == median_oracle(d as i64, x, z, y)
                && m(z, y, x) == median_oracle(d as i64, z, y, x);
            evaluations += 1;
            if !(majority && idempotent && shift && oracle) {
                failures += 1;
            }
        }
    }
    let detail = format!("{evaluations} evaluations per law over d=1..10, {failures} failures");
    if failures == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let (mut checks, mut preserved, mut problems) = (0, 0, Vec::new());
    for name in FIXTURE_TEMPLATES {
        let t = load(name);
        for d in 1..=default_d_max(&t) {
            for rel in t.relations() {
                checks += 1;
                match preserves_relation(d, rel) {
                    Preservation::Preserved { .. } => {
                        preserved += 1;
                        if let Some(c) = falsify_randomized(d, rel, 100_000, 1_000_000, &mut rng) {
                            problems.push(format!("{name} d={d}: window passed, random found {c:?}"));
                        }
                    }
                    Preservation::Violated(c) => {
                        let inputs_ok = c.inputs.iter().all(|i| rel.contains(i).unwrap());
                        let image: Vec<i64> = (0..rel.arity())
                            .map(|j| {
                                median_oracle(d as i64, c.inputs[0][j], c.inputs[1][j], c.inputs[2][j])
                            })
                            .collect();
                        if !inputs_ok || image != c.image || rel.contains(&image).unwrap() {
                            problems.push(format!("{name} d={d}: bogus counterexample {c:?}"));
                        }
                    }
                }
            }
        }
    }
    let detail = format!(
        "{checks} (template, d, relation) checks, {preserved} preserved and stress-tested with 1e5 trials, {} contradictions",
        problems.len()
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; first: {:?}", problems.first()))
    }
}

fn criterion_7() -> Outcome {
    let mut lines = Vec::new();
    for name in FIXTURE_TEMPLATES {
        let t = load(name);
        if find_modular_median(&t, default_d_max(&t)).is_none() {
            continue;
        }
        for rel in t.relations().iter().filter(|r| r.arity() == 3) {
            let start = Instant::now();
            let verdict = check_two_decomposable(rel, default_decomposition_window(rel))
                .map_err(|e| e.to_string())?;
            let elapsed = start.elapsed();
            if !verdict.holds() || elapsed >= Duration::from_secs(10) {
                return Err(format!("{name}/{}: {verdict:?} in {elapsed:?}", rel.name()));
            }
            lines.push(format!("{name}/{} ({:.3}s)", rel.name(), elapsed.as_secs_f64()));
        }
    }
    if lines.is_empty() {
        return Err("no fixture template with a median and a ternary relation".into());
    }
    Ok(format!("2-decomposable: {}", lines.join(", ")))
}

fn criterion_8() -> Outcome {
    let dist13 = load("dist13.json");
    let spec: PeriodicMapSpec = std::fs::read_to_string(fixture("endo1.spec"))
        .unwrap()
        .parse()
        .map_err(|e: zdist::Error| e.to_string())?;
    if let Some(v) = is_endomorphism(&spec, &dist13) {
        return Err(format!("endo1 rejected: {v:?}"));
    }
    let c = classify_endomorphism(&spec, &dist13).map_err(|e| e.to_string())?;
    let big_d = zdist::analysis::DistanceProfile::of(&dist13)
        .map_err(|e| e.to_string())?
        .max_distance();
    let divides = c.minimal_stable.is_some_and(|q| big_d % q == 0);
    if c.kind != (EndoKind::Periodic { direction: 1 }) || c.minimal_stable != Some(3) || !divides {
        return Err(format!("endo1 classified as {c:?}"));
    }
    if c.stable_numbers != [3, 6, 9] {
        return Err(format!("endo1 stable numbers {:?}", c.stable_numbers));
    }

    let t = load("dist136_3.json");
    let opts = EndoSearch {
        max_period: 4,
        value_window: 8,
        drifts: vec![Drift::Constant],
    };
    if let Some(found) = search_periodic_endomorphism(&t, &opts) {
        return Err(format!("unexpected drift-0 endomorphism {found}"));
    }

    let reduced = reduce_template(&t, 3).map_err(|e| e.to_string())?;
    let expected = Template::new(
        "dist136_3",
        vec![
            RelationDef::binary("R", [1, 2, -1, -2]),
            RelationDef::binary("S", [1, -1]),
        ],
    )
    .unwrap();
    if reduced != expected {
        return Err(format!("reduction gave {reduced:?}"));
    }
    Ok(format!("endo1 Periodic(+1), minimal stable 3 | D={big_d}; no drift-0 map within p<=4, |v|<=8; reduction by 3 exact"))
}

fn criterion_9() -> Outcome {
    let c13 = stretch_constant(&load("dist13.json")).map_err(|e| e.to_string())?;
    let c12 = stretch_constant(&load("dist12.json")).map_err(|e| e.to_string())?;
    if c13 != 6 || c12 != 2 {
        return Err(format!("stretch {{1,3}}={c13}, {{1,2}}={c12}"));
    }
    let spec: PeriodicMapSpec = "p=3; values=0,1,0; drift=+1".parse().unwrap();
    let mut rng = StdRng::seed_from_u64(0x5eed_0009);
    for _ in 0..10_000 {
        let x: i64 = rng.gen_range(-1_000_000..=1_000_000);
        let y = if rng.gen_bool(0.5) {
            x + rng.gen_range(-20..=20)
        } else {
            rng.gen_range(-1_000_000..=1_000_000)
        };
        if (spec.eval(x) - spec.eval(y)).abs() > (x - y).abs() + c13 as i64 {
            return Err(format!("orbit bound fails at x={x}, y={y}"));
        }
    }
    Ok(format!("stretch {{1,3}}={c13}, {{1,2}}={c12}; orbit bound on 1e4 pairs"))
}

fn fixture_commands() -> Vec<Vec<String>> {
    let mut cmds: Vec<Vec<&str>> = Vec::new();
    let templates: Vec<String> = FIXTURE_TEMPLATES.iter().map(|t| fixture(t)).collect();
    let mut owned = Vec::new();
    for t in &templates {
        owned.push(vec!["analyze".to_string(), t.clone()]);
        owned.push(vec!["poly".to_string(), t.clone()]);
        owned.push(vec!["endo".into(), "search".into(), t.clone()]);
        owned.push(vec!["endo".into(), "reduce".into(), t.clone(), "--q".into(), "3".into()]);
    }
    let dist12 = fixture("dist12.json");
    let dist13 = fixture("dist13.json");
    let steps = fixture("steps.json");
    let graphs: Vec<String> = ["k3", "c5", "petersen", "k4"]
        .iter()
        .map(|g| fixture(&format!("{g}.json")))
        .collect();
    for g in &graphs {
        for mode in ["auto", "consistency", "brute"] {
            cmds.push(vec!["solve", &dist12, g, "--mode", mode, "--stats", "--trace"]);
        }
    }
    let path13 = fixture("path13.json");
    let walk = fixture("walk.json");
    let spec = fixture("endo1.spec");
    cmds.push(vec!["solve", &dist13, &path13, "--trace", "--stats"]);
    cmds.push(vec!["solve", &steps, &walk, "--trace", "--stats", "--schedule", "lifo"]);
    cmds.push(vec!["endo", "check", &dist13, "--spec", &spec]);
    cmds.push(vec!["endo", "check", &dist12, "--spec", &spec]);
    cmds.push(vec!["poly", &dist13, "--trials", "1000"]);
    owned.extend(cmds.into_iter().map(|c| c.into_iter().map(String::from).collect()));
    owned
}

fn run_cli(args: &[String]) -> (i32, Vec<u8>, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("zdist".to_string()).chain(args.iter().cloned());
    let code = zdist_cli::run(argv, &mut out, &mut err);
    (code, out, err)
}

fn criterion_10() -> Outcome {
    let cmds = fixture_commands();
    for c in &cmds {
        let first = run_cli(c);
        let second = run_cli(c);
        if first != second {
            return Err(format!("reports differ for {c:?}"));
        }
        if first.0 >= 3 {
            return Err(format!("{c:?} exited {}: {}", first.0, String::from_utf8_lossy(&first.2)));
        }
    }
    Ok(format!("{} fixture commands, stdout/stderr/exit identical across two runs", cmds.len()))
}

fn main() -> ExitCode {
    let mut violations = Violations::default();
    let mut failed = 0;
    let mut report = |n: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {n:>2} {title}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {n:>2} {title}: {detail} [{secs:.2}s]");
            }
        }
    };
    report(1, "consistency agrees with brute force under a modular median", &mut || {
        criterion_1(&mut violations)
    });
    report(2, "consistency unsat is always confirmed", &mut || criterion_2(&mut violations));
    report(3, "3-coloring fixtures under Dist{1,2}", &mut || criterion_3(&mut violations));
    report(4, "pair window bound and replacement budget", &mut || criterion_4(&violations));
    report(5, "modular median laws", &mut criterion_5);
    report(6, "window verdicts survive randomized falsification", &mut criterion_6);
    report(7, "ternary relations are 2-decomposable", &mut criterion_7);
    report(8, "endomorphism fixtures", &mut criterion_8);
    report(9, "stretch constant and orbit bound", &mut criterion_9);
    report(10, "deterministic reports", &mut criterion_10);
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
