//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use agorad::algebra::{self, AggregatorTuple, RestrictionClass};
use agorad::blockedness;
use agorad::classify::{self, AnalyzeOptions, Decision};
use agorad::domain::Domain;
use agorad::fixtures;
use agorad::mcsp::{self, Constraint, LanguageRelation, McspInstance, SolveResult};
use agorad::search::{self, SearchBudget, SearchStatus};
use common::*;
use rand::Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, Duration, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn b() -> SearchBudget {
    SearchBudget::default()
}

fn report_line(r: &classify::AnalysisReport, key: &str, want: &str) -> Check {
    let got = r.get(key).unwrap_or_default();
    ensure!(got == want, "{key} = {got}, expected {want}");
    Ok(())
}

fn w_analysis() -> Check {
    let r = classify::analyze(&fixtures::w(), AnalyzeOptions::default()).map_err(|e| e.to_string())?;
    for (k, v) in [
        ("possibility", "no"),
        ("totally_blocked", "yes"),
        ("affine", "no"),
        ("bijunctive", "no"),
        ("upd", "no"),
        ("mcsp", "NP_COMPLETE"),
    ] {
        report_line(&r, k, v)?;
    }
    Ok(())
}

/// Closed, non-dictatorial, locally monomorphic and of class `want` on every
/// two-element subset.
fn ternary_witness(d: &Domain, o: &search::SearchOutcome, want: RestrictionClass) -> Check {
    ensure!(o.status == SearchStatus::Found, "status {}", o.status);
    let w = o.witness.as_ref().ok_or("no witness")?;
    ensure!(algebra::is_closed(d, w).unwrap().is_closed(), "not closed");
    ensure!(closed_oracle(d, w), "closure oracle disagrees");
    ensure!(algebra::is_dictatorial(d, w).unwrap().is_none(), "dictatorial");
    ensure!(algebra::is_locally_monomorphic(d, w).unwrap(), "not locally monomorphic");
    for (j, pair) in d.all_two_element_subsets() {
        let c = algebra::restriction_class(w.component(j), pair).unwrap();
        ensure!(c == want, "issue {} pair {:?} restricts to {c}", j + 1, pair);
    }
    Ok(())
}

fn example2_majority() -> Check {
    let d = fixtures::example2();
    ternary_witness(&d, &search::find_majority(&d, b()).unwrap(), RestrictionClass::Maj)
}

fn example3_minority() -> Check {
    let d = fixtures::example3();
    ternary_witness(&d, &search::find_minority(&d, b()).unwrap(), RestrictionClass::Xor3)
}

fn wxw_binary_aggregators() -> Check {
    let d = fixtures::wxw();
    let r = classify::analyze(&d, AnalyzeOptions::default()).unwrap();
    report_line(&r, "possibility", "yes")?;
    report_line(&r, "possibility_witness", "binary")?;
    report_line(&r, "upd", "no")?;
    let mut all = search::all_binary_aggregators(&d).map_err(|e| e.to_string())?;
    let mut expected: Vec<AggregatorTuple> = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .iter()
        .map(|&(a, c)| AggregatorTuple::projections(&d, 2, &[a, a, a, c, c, c]))
        .collect();
    all.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
    expected.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
    ensure!(all == expected, "{} binary aggregators, expected the 4 product projections", all.len());
    Ok(())
}

fn product_uniformity() -> Check {
    for name in ["y-horn", "z-affine", "yz-product"] {
        let d = fixtures::by_name(name).unwrap();
        let upd = classify::is_upd(&d, b(), true).unwrap();
        ensure!(upd.decision == Decision::Yes, "{name}: upd = {}", upd.decision);
    }
    let product = fixtures::y_horn().product(&fixtures::z_affine());
    ensure!(product == fixtures::yz_product(), "yz-product is not the product of its factors");
    let label = classify::classify_mcsp(&product, b()).unwrap();
    ensure!(label.as_str() == "TRACTABLE", "mcsp = {label}");
    Ok(())
}

fn seeded_domains(count: u64, salt: u64, gen: impl Fn(&mut TestRng) -> Domain) -> Vec<(String, Domain)> {
    let mut out = all_fixtures();
    out.extend((0..count).map(|i| (format!("random #{i}"), gen(&mut rng(salt ^ i)))));
    out
}

fn blocked_iff_no_binary() -> Check {
    let mut checked = 0;
    for (name, d) in seeded_domains(250, 0x6b1, |r| random_small(r, 3, 10)) {
        let Ok(oracle) = search::bruteforce_binary(&d) else {
            continue; // too large for plain enumeration
        };
        let (blocked, _) = blockedness::is_totally_blocked(&d).unwrap();
        ensure!(blocked == oracle.is_none(), "{name}: totally_blocked = {blocked}, oracle found {}", oracle.is_some());
        checked += 1;
    }
    ensure!(checked >= 200, "only {checked} domains checked");
    Ok(())
}

fn is_projection_tuple(f: &AggregatorTuple) -> bool {
    (0..f.arity()).any(|d| f.components().iter().all(|t| t.is_projection(d)))
}

fn boolean_ternary_disjunction() -> Check {
    let domains: Vec<(String, Domain)> = seeded_domains(220, 0xb001, |r| random_boolean(r, 3))
        .into_iter()
        .filter(|(_, d)| d.alphabets().iter().all(|a| a.len() == 2) && d.issue_count() <= 3)
        .collect();
    ensure!(domains.len() >= 200, "only {} Boolean domains", domains.len());
    for (name, d) in domains {
        let binary = search::find_binary_nondictatorial(&d, false, b()).unwrap().is_found();
        let maj = search::find_majority(&d, b()).unwrap().is_found();
        let min = search::find_minority(&d, b()).unwrap().is_found();
        let oracle = search::bruteforce_ternary_nontrivial(&d, |f| !is_projection_tuple(f)).unwrap();
        ensure!(
            (binary || maj || min) == oracle.is_some(),
            "{name}: binary {binary}, majority {maj}, minority {min}, oracle {}",
            oracle.is_some()
        );
    }
    Ok(())
}

fn uniform_witness_ok(d: &Domain, f: &AggregatorTuple) -> bool {
    search::satisfies_uniform_identities(d, f)
        && closed_oracle(d, f)
        && d.all_two_element_subsets()
            .iter()
            .all(|&(j, p)| algebra::restriction_class(f.component(j), p).unwrap().is_four_op())
}

fn uniform_routes_agree() -> Check {
    for (name, d) in seeded_domains(120, 0x0d1a, |r| random_small(r, 3, 10)) {
        let direct = search::find_uniform(&d, b()).unwrap();
        let fold = search::fold_diamond_cover(&d, b()).unwrap();
        ensure!(direct.status == fold.status, "{name}: search {} vs fold {}", direct.status, fold.status);
        for w in [&direct.witness, &fold.witness].into_iter().flatten() {
            ensure!(uniform_witness_ok(&d, w), "{name}: witness fails the uniform checks");
        }
    }
    Ok(())
}

fn boolean_ternary_classes() -> Check {
    use agorad::OperationTable;
    let mut four = Vec::new();
    for bits in 0u8..64 {
        let mut cells = vec![0u8, 0, 0, 0, 0, 0, 0, 1];
        for i in 0..6 {
            cells[i + 1] = bits >> i & 1;
        }
        let t = OperationTable::from_cells(0, 3, 2, cells).unwrap();
        let commutative = (0..8u8).all(|i| {
            let a = [i >> 2 & 1, i >> 1 & 1, i & 1];
            t.eval(&[a[1], a[0], a[2]]) == t.eval(&a) && t.eval(&[a[0], a[2], a[1]]) == t.eval(&a)
        });
        let class = algebra::restriction_class(&t, (0, 1)).unwrap();
        ensure!(commutative == class.is_four_op(), "table {bits:06b}: commutative {commutative}, class {class}");
        if class.is_four_op() {
            four.push(class.to_string());
        }
    }
    four.sort();
    ensure!(four == ["AND3", "MAJ", "OR3", "XOR3"], "four-op classes {four:?}");
    Ok(())
}

fn random_instance(r: &mut TestRng, d: Domain) -> McspInstance {
    let m = d.issue_count();
    let n = r.gen_range(1..=10);
    let vars: Vec<(String, usize)> = (0..n).map(|i| (format!("v{i}"), r.gen_range(0..m))).collect();
    let mut constraints = Vec::new();
    for _ in 0..r.gen_range(0..=4) {
        let scope: Option<Vec<usize>> = (0..m)
            .map(|s| {
                let of_sort: Vec<usize> = (0..n).filter(|&v| vars[v].1 == s).collect();
                (!of_sort.is_empty()).then(|| of_sort[r.gen_range(0..of_sort.len())])
            })
            .collect();
        if let Some(scope) = scope {
            constraints.push(Constraint { scope, relation: LanguageRelation::Domain });
        }
    }
    for _ in 0..r.gen_range(0..=n) {
        let v = r.gen_range(0..n);
        let sort = vars[v].1;
        let size = d.alphabet(sort).len();
        let mask = r.gen_range(1u32..(1 << size));
        let values = (0..size as u8).filter(|&c| mask >> c & 1 == 1).collect();
        constraints.push(Constraint { scope: vec![v], relation: LanguageRelation::Subset { sort, values } });
    }
    McspInstance::new(d, vars, constraints).unwrap()
}

fn enumerate_sat(inst: &McspInstance) -> bool {
    let d = inst.domain();
    let n = inst.variable_count();
    let sizes: Vec<usize> = (0..n).map(|v| d.alphabet(inst.sort(v)).len()).collect();
    let total: usize = sizes.iter().product();
    (0..total).any(|mut code| {
        let phi: Vec<u8> = sizes
            .iter()
            .rev()
            .map(|&s| {
                let c = (code % s) as u8;
                code /= s;
                c
            })
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        inst.constraints().iter().all(|c| match &c.relation {
            LanguageRelation::Domain => d.rows().iter().any(|row| c.scope.iter().zip(row).all(|(&v, &x)| phi[v] == x)),
            LanguageRelation::Subset { values, .. } => values.contains(&phi[c.scope[0]]),
        })
    })
}

fn mcsp_matches_enumeration() -> Check {
    let pool: Vec<Domain> = ["w", "example2", "example3", "y-horn", "z-affine"]
        .iter()
        .map(|n| fixtures::by_name(n).unwrap())
        .collect();
    let mut r = rng(0x5a7);
    let (mut sat, mut unsat) = (0, 0);
    for i in 0..150 {
        let d = pool[r.gen_range(0..pool.len())].clone();
        let inst = random_instance(&mut r, d);
        let want = enumerate_sat(&inst);
        match mcsp::solve(&inst, b()) {
            SolveResult::Sat(a) => {
                ensure!(want, "instance {i}: solver SAT, enumeration UNSAT");
                ensure!(mcsp::verify_assignment(&inst, &a), "instance {i}: certificate fails");
                sat += 1;
            }
            SolveResult::Unsat => {
                ensure!(!want, "instance {i}: solver UNSAT, enumeration SAT");
                unsat += 1;
            }
            SolveResult::Unknown => return Err(format!("instance {i}: budget exceeded")),
        }
    }
    ensure!(sat > 0 && unsat > 0, "degenerate sample: {sat} SAT, {unsat} UNSAT");
    Ok(())
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_agorad"))
        .env_remove("AGORAD_BUDGET_MS")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    match o.status.code() {
        Some(0) | Some(1) => Ok(o.stdout),
        c => Err(format!("`agorad {}` exited with {c:?}", args.join(" "))),
    }
}

fn cli_determinism() -> Check {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with(".dom"))
        .collect();
    names.sort();
    ensure!(names.len() >= 9, "only {} fixture files", names.len());
    for name in &names {
        let path = format!("{dir}/{name}");
        let commands: Vec<Vec<&str>> = vec![
            vec!["analyze", &path, "--dot", "--witnesses", "--validate"],
            vec!["graph", &path],
            vec!["graph", &path, "--format", "text"],
            vec!["witness", &path, "--kind", "binary"],
            vec!["witness", &path, "--kind", "binary", "--direct"],
            vec!["witness", &path, "--kind", "majority"],
            vec!["witness", &path, "--kind", "minority"],
            vec!["witness", &path, "--kind", "uniform"],
        ];
        for args in commands {
            let first = cli(&args)?;
            for jobs in ["1", "1", "3", "8"] {
                let mut with_jobs = vec!["--jobs", jobs];
                with_jobs.extend(&args);
                ensure!(cli(&with_jobs)? == first, "{name}: `{}` differs with --jobs {jobs}", args.join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("fixture W: impossibility, blocked, NP-complete", Duration::from_secs(1), w_analysis),
        ("example2: majority aggregator", Duration::from_secs(5), example2_majority),
        ("example3: minority aggregator", Duration::from_secs(5), example3_minority),
        ("wxw: binary aggregators are product projections", Duration::from_secs(60), wxw_binary_aggregators),
        ("product of uniform factors is uniform and tractable", Duration::from_secs(30), product_uniformity),
        ("total blockedness iff no binary aggregator", Duration::from_secs(600), blocked_iff_no_binary),
        ("Boolean: search disjunction iff ternary aggregator", Duration::from_secs(600), boolean_ternary_disjunction),
        ("uniform search agrees with diamond fold", Duration::from_secs(600), uniform_routes_agree),
        ("64 Boolean ternary tables: four commutative classes", Duration::from_secs(1), boolean_ternary_classes),
        ("MCSP solver agrees with enumeration", Duration::from_secs(300), mcsp_matches_enumeration),
        ("CLI output independent of repeats and --jobs", Duration::from_secs(600), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let took = started.elapsed();
        let result = result.and_then(|()| {
            if took > *limit {
                Err(format!("took {took:?}, limit {limit:?}"))
            } else {
                Ok(())
            }
        });
        match result {
            Ok(()) => println!("PASS {:>2} {name} ({} ms)", i + 1, took.as_millis()),
            Err(e) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({} ms): {e}", i + 1, took.as_millis());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
