use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn infprim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infprim"))
        .args(args)
        .env("INFPRIM_OUT", out)
        .output()
        .expect("binary runs")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_is_reproducible_and_reparses() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(&infprim(&["gen", "--n", "6", "--count", "3", "--seed", "5"], a.path()));
    ok(&infprim(&["gen", "--n", "6", "--count", "3", "--seed", "5"], b.path()));
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 3);
    for name in names {
        let x = fs::read_to_string(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read_to_string(b.path().join(&name)).unwrap());
        let p = infprim::ising::parse_instance(&x).unwrap();
        assert_eq!(p.n(), 5);
        assert_eq!(infprim::ising::write_instance(&p), x);
    }
    assert!(!infprim(&["gen", "--n", "2"], a.path()).status.success());
}

#[test]
fn oracle_lists_both_ferromagnet_ground_states() {
    let d = tempfile::tempdir().unwrap();
    let inst = d.path().join("ferro.ising");
    fs::write(&inst, "ising v1 n=2\nJ 0 1 1\n").unwrap();
    ok(&infprim(&["oracle", "--instance", inst.to_str().unwrap()], d.path()));
    let first = fs::read_to_string(d.path().join("ferro.ground.csv")).unwrap();
    let rows: Vec<&str> = first.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, vec!["config,energy,s0,s1", "0,-1,1,1", "1,-1,-1,-1"]);
    ok(&infprim(&["oracle", "--instance", inst.to_str().unwrap()], d.path()));
    assert_eq!(first, fs::read_to_string(d.path().join("ferro.ground.csv")).unwrap());
}

fn protocol(dir: &Path, body: &str) -> String {
    let p = dir.join("protocol.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const PARAMS: &str = r#""anneal_params": {"temperature": 0.5, "tau": 5, "trotter_slices": 4, "reads": 9}"#;

#[test]
fn solve_traditional_writes_a_single_call_record() {
    let d = tempfile::tempdir().unwrap();
    ok(&infprim(&["gen", "--n", "7", "--seed", "1"], d.path()));
    let inst = d.path().join("sk_n7_0000.ising");
    let proto = protocol(d.path(), &format!(r#"{{"template": {{"kind": "traditional"}}, {PARAMS}}}"#));
    ok(&infprim(&["solve", "--instance", inst.to_str().unwrap(), "--protocol", &proto, "--seed", "4"], d.path()));
    let events = fs::read_to_string(d.path().join("sk_n7_0000.events.jsonl")).unwrap();
    assert_eq!(events.lines().filter(|l| l.contains(r#""event":"primitive""#)).count(), 1);
    assert!(events.lines().last().unwrap().contains(r#""event":"best""#));
    let summary = fs::read_to_string(d.path().join("sk_n7_0000.summary.csv")).unwrap();
    assert!(summary.starts_with("# {"));
    assert_eq!(summary.lines().nth(1).unwrap(), "round,member,T_eff,min_energy,event");
    let best = fs::read_to_string(d.path().join("sk_n7_0000.best.csv")).unwrap();
    assert_eq!(best.lines().count(), 2 + 6);

    // same seed, different worker count: identical data files
    let e = tempfile::tempdir().unwrap();
    ok(&infprim(
        &["solve", "--instance", inst.to_str().unwrap(), "--protocol", &proto, "--seed", "4", "--workers", "3"],
        e.path(),
    ));
    assert_eq!(events, fs::read_to_string(e.path().join("sk_n7_0000.events.jsonl")).unwrap());
}

#[test]
fn solve_rejects_invalid_protocols() {
    let d = tempfile::tempdir().unwrap();
    ok(&infprim(&["gen", "--n", "5"], d.path()));
    let inst = d.path().join("sk_n5_0000.ising");
    for body in [
        format!(r#"{{"template": {{"kind": "traditional"}}, "bogus": 1, {PARAMS}}}"#),
        format!(r#"{{"nodes": [{{"type": "primitive"}}], {PARAMS}}}"#),
        format!(r#"{{"pools": {{"kind": "population", "size": 1, "t_ladder": [1.0]}}, "rounds": 2, {PARAMS}}}"#),
    ] {
        let proto = protocol(d.path(), &body);
        let o = infprim(&["solve", "--instance", inst.to_str().unwrap(), "--protocol", &proto], d.path());
        assert!(!o.status.success(), "accepted {body}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn bp_on_field_free_instance_is_uninformative() {
    let d = tempfile::tempdir().unwrap();
    let inst = d.path().join("chain.ising");
    fs::write(&inst, "ising v1 n=3\nJ 0 1 0.7\nJ 1 2 -0.4\n").unwrap();
    ok(&infprim(&["bp", "--instance", inst.to_str().unwrap(), "--temperature", "1.0"], d.path()));
    let csv = fs::read_to_string(d.path().join("chain.marginals.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[1].contains("converged=true"));
    assert_eq!(lines[2], "bit,b_plus,b_minus,S,P");
    for row in &lines[3..] {
        assert!(row.ends_with(",0.5"), "{row}");
    }
}

#[test]
fn bp_on_tree_matches_enumeration() {
    let d = tempfile::tempdir().unwrap();
    let inst = d.path().join("tree.ising");
    fs::write(&inst, "ising v1 n=3\nh 0 0.3\nh 2 -0.2\nJ 0 1 0.5\nJ 1 2 0.8\n").unwrap();
    ok(&infprim(&["bp", "--instance", inst.to_str().unwrap(), "--temperature", "0.7"], d.path()));
    let csv = fs::read_to_string(d.path().join("tree.marginals.csv")).unwrap();
    let problem = infprim::ising::read_instance(&inst).unwrap();
    let mut z = 0.0;
    let mut plus = [0.0; 3];
    for mask in 0..8u64 {
        let c = infprim::SpinConfiguration::from_mask(3, mask);
        let w = (-problem.energy(&c).unwrap() / 0.7).exp();
        z += w;
        for (i, p) in plus.iter_mut().enumerate() {
            if c.get(i) == 1 {
                *p += w;
            }
        }
    }
    for (i, row) in csv.lines().skip(3).enumerate() {
        let b: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((b - plus[i] / z).abs() < 1e-8, "bit {i}: {b} vs {}", plus[i] / z);
    }
}

#[test]
fn fig2_small_run() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "fig2", "--instances", "2", "--n", "6", "--reads", "7", "--slices", "4", "--bins", "4", "--seed", "3",
    ];
    ok(&infprim(&args, d.path()));
    let csv = fs::read_to_string(d.path().join("fig2.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# {"));
    assert_eq!(lines[2], "bin,p_lo,p_hi,total,agree,disagree,error_fraction");
    let total: usize = lines[3..].iter().map(|l| l.split(',').nth(3).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, 10);
    ok(&infprim(&args, d.path()));
    assert_eq!(csv, fs::read_to_string(d.path().join("fig2.csv")).unwrap());
}
