use std::path::PathBuf;
use std::process::Command;

use lemlift::extract::Method;
use lemlift_cli::bench::{ratio_table, read_csv, write_csv, BenchRecord, Status};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_lemlift"));
    c.env_remove("LEMLIFT_BUDGET");
    c
}

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn run(args: &[&str]) -> (i32, String) {
    let o = bin().args(args).output().unwrap();
    (o.status.code().unwrap(), String::from_utf8(o.stdout).unwrap())
}

fn write_tmp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn solve_exit_codes() {
    let ex1 = corpus("example1.smt2");
    assert_eq!(run(&["solve", ex1.to_str().unwrap()]), (20, "unsat\n".into()));
    let dir = tempfile::tempdir().unwrap();
    let sat = write_tmp(&dir, "s.smt2", "(declare-fun y () Real) (assert (< y 0))");
    assert_eq!(run(&["solve", &sat]), (10, "sat\n".into()));
    assert_eq!(run(&["solve", "/no/such/file.smt2"]).0, 1);
    let bad = write_tmp(&dir, "b.smt2", "(assert (< y 0))");
    assert_eq!(run(&["solve", &bad]).0, 1);
}

#[test]
fn core_on_example1() {
    let ex1 = corpus("example1.smt2");
    let (code, out) = run(&["core", ex1.to_str().unwrap(), "--minimize", "--verify"]);
    assert_eq!(code, 20);
    let line = out.lines().find(|l| l.starts_with("core: ")).unwrap();
    assert!(line == "core: 1 2 3 4 5 6" || line == "core: 1 2 3 4 6 8", "{out}");
    assert!(out.contains("verified: yes"));
}

#[test]
fn core_written_as_script_reloads_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("core.smt2");
    let ex1 = corpus("example1.smt2");
    let (code, out) = run(&["core", ex1.to_str().unwrap(), "--method", "smt-selectors", "--out", out_path.to_str().unwrap()]);
    assert_eq!(code, 20);
    let size: usize = out.lines().find_map(|l| l.strip_prefix("size: ")).unwrap().split(' ').next().unwrap().parse().unwrap();
    let f = lemlift::frontend::load(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(f.len(), size);
    assert_eq!(run(&["solve", out_path.to_str().unwrap()]).0, 20);
}

#[test]
fn core_on_satisfiable_input() {
    let p = corpus("sat_unit.smt2");
    assert_eq!(run(&["core", p.to_str().unwrap()]), (10, "sat\n".into()));
}

#[test]
fn lift_external_with_self_matches_lift_proof() {
    let ex1 = corpus("example1.smt2");
    let cmd = format!("{} bool-core {{in}} {{out}}", env!("CARGO_BIN_EXE_lemlift"));
    let (c1, a) = run(&["core", ex1.to_str().unwrap(), "--method", "lift-external", "--extractor-cmd", &cmd]);
    let (c2, b) = run(&["core", ex1.to_str().unwrap()]);
    assert_eq!((c1, c2), (20, 20));
    let core = |s: &str| s.lines().find(|l| l.starts_with("core:")).unwrap().to_string();
    assert_eq!(core(&a), core(&b));
}

#[test]
fn broken_extractor_is_reported() {
    let ex1 = corpus("example1.smt2");
    let o = bin()
        .args(["core", ex1.to_str().unwrap(), "--method", "lift-external", "--extractor-cmd", "exit 4 # {in} {out}"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("exit status"), "{err}");
    let (code, _) = run(&["core", ex1.to_str().unwrap(), "--method", "lift-external"]);
    assert_eq!(code, 1);
}

#[test]
fn allmus_example1() {
    let ex1 = corpus("example1.smt2");
    let (code, out) = run(&["allmus", ex1.to_str().unwrap()]);
    assert_eq!(code, 20);
    assert_eq!(out, "unsat\nmcs 6\n1\n2\n3\n4\n5 8\n6\nmus 2\n1 2 3 4 5 6\n1 2 3 4 6 8\n");
}

#[test]
fn allmus_small_cases() {
    let dir = tempfile::tempdir().unwrap();
    let two = write_tmp(&dir, "two.smt2", "(declare-fun x () Real) (assert (= x 0)) (assert (not (= x 0)))");
    assert_eq!(run(&["allmus", &two]), (20, "unsat\nmcs 2\n1\n2\nmus 1\n1 2\n".into()));
    let sat = corpus("sat_unit.smt2");
    assert_eq!(run(&["allmus", sat.to_str().unwrap()]), (10, "sat\nmcs 0\nmus 0\n".into()));
    let ex1 = corpus("example1.smt2");
    let (code, out) = run(&["allmus", ex1.to_str().unwrap(), "--max-mcs", "2"]);
    assert_eq!(code, 2);
    assert!(out.starts_with("INCOMPLETE"));
}

#[test]
fn budget_from_environment() {
    let p = corpus("prop_pigeon.smt2");
    let o = bin().args(["solve", p.to_str().unwrap()]).env("LEMLIFT_BUDGET", "0").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "unknown\n");
    assert_eq!(run(&["core", p.to_str().unwrap(), "--budget", "0"]).0, 2);
}

#[test]
fn verify_command() {
    let dir = tempfile::tempdir().unwrap();
    let ex1 = corpus("example1.smt2");
    let good = write_tmp(&dir, "good", "1 2 3 4 5 6\n");
    assert_eq!(run(&["verify", ex1.to_str().unwrap(), &good]), (0, "ok\n".into()));
    let sat = write_tmp(&dir, "sat", "1\n2\n3\n4\n5\n7\n8\n9\n");
    assert_eq!(run(&["verify", ex1.to_str().unwrap(), &sat]), (1, "violation: the selected clauses are satisfiable\n".into()));
    let range = write_tmp(&dir, "range", "10\n");
    assert_eq!(run(&["verify", ex1.to_str().unwrap(), &range]).0, 1);
}

#[test]
fn lift_then_bool_core() {
    let dir = tempfile::tempdir().unwrap();
    let cnf = dir.path().join("lifted.cnf");
    let ex1 = corpus("example1.smt2");
    let (code, _) = run(&["lift", ex1.to_str().unwrap(), cnf.to_str().unwrap()]);
    assert_eq!(code, 20);
    let text = std::fs::read_to_string(&cnf).unwrap();
    assert!(text.starts_with("p cnf 10 12\n"), "{text}");
    let core = dir.path().join("core");
    assert_eq!(run(&["bool-core", cnf.to_str().unwrap(), core.to_str().unwrap()]).0, 20);
    let idx: Vec<usize> = std::fs::read_to_string(&core).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert!(idx.windows(2).all(|w| w[0] < w[1]) && idx.iter().all(|&i| (1..=12).contains(&i)));
    let sat_cnf = write_tmp(&dir, "sat.cnf", "p cnf 2 1\n1 2 0\n");
    assert_eq!(run(&["bool-core", &sat_cnf, core.to_str().unwrap()]).0, 10);
}

#[test]
fn bench_csv_and_table() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["example1.smt2", "example5.smt2", "sat_unit.smt2"] {
        std::fs::copy(corpus(name), dir.path().join(name)).unwrap();
    }
    std::fs::write(dir.path().join("broken.smt2"), "(assert").unwrap();
    let csv_path = dir.path().join("out.csv");
    let (code, out) = run(&[
        "bench",
        dir.path().to_str().unwrap(),
        "--methods",
        "lift-proof,smt-selectors",
        "--csv",
        csv_path.to_str().unwrap(),
        "--jobs",
        "3",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("1st quartile") && out.contains("3rd quartile"), "{out}");
    let recs = read_csv(std::fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(recs.len(), 8);
    let names: Vec<&str> = recs.iter().map(|r| r.instance.rsplit('/').next().unwrap()).collect();
    assert_eq!(names[0], "broken.smt2");
    assert_eq!(names[6], "sat_unit.smt2");
    assert_eq!(recs[0].verified, Status::Error);
    assert_eq!(recs[6].verified, Status::Sat);
    let ex5: Vec<_> = recs.iter().filter(|r| r.instance.ends_with("example5.smt2")).collect();
    assert_eq!(ex5[0].core_size, Some(4));
    assert_eq!(ex5[0].verified, Status::Yes);
    assert!(recs.iter().all(|r| r.time_ms >= 0.0 && r.core_size.is_none_or(|s| s <= r.clauses)));
}

fn rec(instance: &str, method: Method, size: Option<usize>, verified: Status) -> BenchRecord {
    BenchRecord { instance: instance.into(), clauses: 40, method, core_size: size, time_ms: 1.25, verified }
}

#[test]
fn csv_round_trip() {
    let recs = vec![
        rec("a, with comma.smt2", Method::LiftProof, Some(3), Status::Yes),
        rec("b\"q\".smt2", Method::SmtProof, None, Status::Budget),
        BenchRecord { time_ms: 0.1 + 0.2, ..rec("c", Method::LiftExternal, Some(7), Status::No) },
    ];
    let mut buf = Vec::new();
    write_csv(&recs, &mut buf).unwrap();
    assert!(String::from_utf8(buf.clone()).unwrap().starts_with("instance,clauses,method,core_size,time_ms,verified\n"));
    assert_eq!(read_csv(buf.as_slice()).unwrap(), recs);
}

#[test]
fn full_versus_half_gives_two() {
    let mut recs = Vec::new();
    for i in 0..5 {
        let name = format!("copy{i}");
        recs.push(rec(&name, Method::SmtProof, Some(20), Status::Yes));
        recs.push(rec(&name, Method::LiftProof, Some(10), Status::Yes));
    }
    let t = ratio_table(&recs, Method::LiftProof, &[Method::LiftProof, Method::SmtProof]);
    let own = t.rows[0].stats.unwrap();
    assert_eq!((own.q1, own.median, own.mean, own.q3), (1.0, 1.0, 1.0, 1.0));
    let s = t.rows[1].stats.unwrap();
    assert_eq!((s.q1, s.median, s.mean, s.q3, s.count), (2.0, 2.0, 2.0, 2.0, 5));
}

#[test]
fn single_instance_table() {
    let recs = vec![rec("x", Method::LiftProof, Some(4), Status::Yes), rec("x", Method::SmtProof, Some(5), Status::Yes)];
    let s = ratio_table(&recs, Method::LiftProof, &[Method::SmtProof]).rows[0].stats.unwrap();
    assert_eq!((s.q1, s.median, s.mean, s.q3), (1.25, 1.25, 1.25, 1.25));
}

fn status() -> impl proptest::strategy::Strategy<Value = Status> {
    proptest::sample::select(vec![Status::Yes, Status::No, Status::Sat, Status::Budget, Status::Error])
}

proptest::proptest! {
    #[test]
    fn csv_round_trips_arbitrary_records(
        rows in proptest::collection::vec(
            ("[ -~\n]{0,12}", 0usize..1000, 0usize..5, proptest::option::of(0usize..1000), 0.0f64..1e6, status()),
            0..8,
        ),
    ) {
        let recs: Vec<BenchRecord> = rows
            .into_iter()
            .map(|(instance, clauses, m, core_size, time_ms, verified)| BenchRecord {
                instance,
                clauses,
                method: Method::ALL[m],
                core_size,
                time_ms,
                verified,
            })
            .collect();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        proptest::prop_assert_eq!(read_csv(buf.as_slice()).unwrap(), recs);
    }
}
