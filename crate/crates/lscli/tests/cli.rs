//! End-to-end runs of the installed binary: every subcommand, the
//! machine-readable RESULT contract, exit codes, and rerun determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liftproj"))
}

fn work(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lscli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create work dir");
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn binary")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn assert_line(out: &Output, line: &str) {
    let text = stdout_of(out);
    assert!(
        text.lines().any(|l| l == line),
        "missing '{line}' in:\n{text}"
    );
}

#[test]
fn generation_and_exact_optimization() {
    let dir = work("gen-opt");
    let cone = dir.join("k.cone");
    let cone_s = cone.to_str().unwrap();
    let gen = run(&["gen", "majority", "--d", "4", "-o", cone_s]);
    assert_line(&gen, "RESULT d=4");
    assert_line(&gen, "RESULT rows=12");

    for (r, want) in [("0", "8/3"), ("1", "16/7"), ("2", "2")] {
        let out = run(&["optimize", "--cone", cone_s, "--op", "n", "--r", r, "--obj", "ones"]);
        assert_line(&out, &format!("RESULT value={want}"));
    }

    let a = run(&["optimize", "--cone", cone_s, "--op", "n", "--r", "1", "--obj", "ones"]);
    let b = run(&["optimize", "--cone", cone_s, "--op", "n", "--r", "1", "--obj", "ones"]);
    assert_eq!(a.stdout, b.stdout, "reruns must be byte-identical");

    let unit = run(&["optimize", "--cone", cone_s, "--op", "n0", "--r", "1", "--obj", "unit:2"]);
    assert_line(&unit, "RESULT value=1");
}

#[test]
fn semidefinite_membership_ladder() {
    let dir = work("member");
    let cone = dir.join("p.cone");
    let cone_s = cone.to_str().unwrap();
    run(&["gen", "cross", "--d", "3", "--p", "2", "-o", cone_s]);

    let inside = run(&["member", "--cone", cone_s, "--op", "nplus", "--r", "1", "--point", "center"]);
    assert_line(&inside, "RESULT member=true");
    let outside = run(&["member", "--cone", cone_s, "--op", "nplus", "--r", "3", "--point", "center"]);
    assert_line(&outside, "RESULT member=false");

    let tilde = run(&["member", "--cone", cone_s, "--op", "ntilde0", "--r", "2", "--point", "center"]);
    assert_line(&tilde, "RESULT member=true");
}

#[test]
fn certificate_roundtrips() {
    let dir = work("certs");
    let cone = dir.join("p.cone");
    let cone_s = cone.to_str().unwrap();
    run(&["gen", "cross", "--d", "3", "--p", "2", "-o", cone_s]);

    let lifted = dir.join("assignment.txt");
    let lifted_s = lifted.to_str().unwrap();
    let member = run(&[
        "member", "--cone", cone_s, "--op", "n", "--r", "1", "--point", "center",
        "--cert-out", lifted_s,
    ]);
    assert_line(&member, "RESULT member=true");
    let verify = run(&["verify", "--cone", cone_s, "--cert", lifted_s]);
    assert_line(&verify, "RESULT verified=true");
    assert_line(&verify, "RESULT kind=n");

    // A corrupted assignment is rejected with the numerical-failure code.
    let text = std::fs::read_to_string(&lifted).unwrap();
    let broken = dir.join("broken.txt");
    std::fs::write(&broken, text.replacen("1/2", "1/3", 1)).unwrap();
    let bad = bin()
        .args(["verify", "--cone", cone_s, "--cert", broken.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&bad.stderr));

    let psd = dir.join("replacement.txt");
    let psd_s = psd.to_str().unwrap();
    let certify = run(&["certify", "--cone", cone_s, "--point", "center", "-o", psd_s]);
    assert_line(&certify, "RESULT certificate=valid");
    let exact = run(&["verify", "--cone", cone_s, "--cert", psd_s, "--exact"]);
    assert_line(&exact, "RESULT verified=true");

    // Breaking the diagonal tie flips the verdict without erroring.
    let text = std::fs::read_to_string(&psd).unwrap();
    let tied = dir.join("untied.txt");
    std::fs::write(&tied, text.replacen("1/2 1/2 1/4", "1/2 2/3 1/4", 1)).unwrap();
    let flipped = run(&["verify", "--cone", cone_s, "--cert", tied.to_str().unwrap(), "--exact"]);
    assert_line(&flipped, "RESULT verified=false");
}

#[test]
fn rank_queries() {
    let dir = work("rank");
    let frac = dir.join("f4.cone");
    let frac_s = frac.to_str().unwrap();
    run(&["gen", "frac", "--n", "4", "-o", frac_s]);
    let clique = run(&["rank", "--cone", frac_s, "--op", "n", "--ineq", "1,1,1,1", "--rhs", "1"]);
    assert_line(&clique, "RESULT rank=2");

    let matching = dir.join("m4.cone");
    let matching_s = matching.to_str().unwrap();
    run(&["gen", "matching", "--n", "4", "-o", matching_s]);
    let blossom = run(&[
        "rank", "--cone", matching_s, "--op", "nplus", "--ineq", "1,1,0,1,0,0", "--rhs", "1",
        "--r", "1",
    ]);
    assert_line(&blossom, "RESULT certified=true");
}

#[test]
fn recurrence_outputs() {
    let summary = run(&["recurrence", "--d", "6"]);
    assert_line(&summary, "RESULT rank_n=4");
    assert_line(&summary, "RESULT rank_nplus=3");
    assert_line(&summary, "RESULT closed_form_ok=true");

    let dir = work("recurrence");
    let csv = dir.join("profile.csv");
    let csv_s = csv.to_str().unwrap();
    let profile = run(&["recurrence", "--d", "40", "--profile", "-o", csv_s]);
    assert_line(&profile, "RESULT rows=21");
    assert_line(&profile, "RESULT c_plus_final=1/2");
    let first = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(first.lines().count(), 22, "header plus one line per level");

    run(&["recurrence", "--d", "40", "--profile", "-o", csv_s]);
    let second = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(first, second, "profile reruns must be byte-identical");

    let checks = run(&["recurrence", "--d", "8", "--checks"]);
    assert_line(&checks, "RESULT violations=0");
}

#[test]
fn duality_pipeline() {
    let dir = work("duality");
    let frac = dir.join("f4.cone");
    let frac_s = frac.to_str().unwrap();
    run(&["gen", "frac", "--n", "4", "-o", frac_s]);

    let skew = run(&["duality", "skew", "--cone", frac_s]);
    assert_line(&skew, "RESULT skew=holds");

    let lift = dir.join("lift.txt");
    std::fs::write(
        &lift,
        "1 1/3 1/3 1/3 1/3\n1/3 1/3 0 0 0\n1/3 0 1/3 0 0\n1/3 0 0 1/3 0\n1/3 0 0 0 1/3\n",
    )
    .unwrap();
    let dm = run(&["duality", "dualmember", "--cone", frac_s, "--matrix", lift.to_str().unwrap()]);
    assert_line(&dm, "RESULT member=true");

    // Rank-one matrix of the all-ones incidence direction is separated.
    let probe = dir.join("probe.txt");
    std::fs::write(
        &probe,
        "1 -1 -1 -1 -1\n-1 1 1 1 1\n-1 1 1 1 1\n-1 1 1 1 1\n-1 1 1 1 1\n",
    )
    .unwrap();
    let sep = run(&["duality", "member", "--cone", frac_s, "--matrix", probe.to_str().unwrap()]);
    assert_line(&sep, "RESULT member=false");

    let inside = run(&["duality", "diag", "--cone", frac_s, "--s", "4/3,-1,-1,-1,-1"]);
    assert_line(&inside, "RESULT member=true");
    let outside = run(&["duality", "diag", "--cone", frac_s, "--s", "5/4,-1,-1,-1,-1"]);
    assert_line(&outside, "RESULT member=false");
}

#[test]
fn exit_codes() {
    let dir = work("exits");
    let cone = dir.join("k.cone");
    let cone_s = cone.to_str().unwrap();
    run(&["gen", "majority", "--d", "4", "-o", cone_s]);

    let usage = bin()
        .args(["optimize", "--cone", cone_s, "--op", "bogus", "--r", "1", "--obj", "ones"])
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(2));

    let missing = bin()
        .args(["optimize", "--cone", dir.join("absent.cone").to_str().unwrap(), "--op", "n", "--r", "1", "--obj", "ones"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let guarded = bin()
        .args(["optimize", "--cone", cone_s, "--op", "n", "--r", "2", "--obj", "ones"])
        .env("LIFTPROJ_PARAM_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(guarded.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&guarded.stderr));
}
