use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netnorm_core::io::read_collection;

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Scratch {
        let p = std::env::temp_dir().join(format!("netnorm-cli-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&p);
        fs::create_dir_all(&p).unwrap();
        Scratch(p)
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.0.join(rel)
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn netnorm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netnorm"))
        .env_remove("NETNORM_SEED")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_then_stats_round_trip() {
    let dir = Scratch::new("sim");
    let sim = dir.path("sim");
    let o = netnorm(
        &[
            "--seed",
            "5",
            "simulate",
            "--model",
            "bernoulli",
            "--sizes",
            "20",
            "--replicates",
            "3",
        ],
        &sim,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let graphs = read_collection(&sim).unwrap();
    assert_eq!(graphs.len(), 3);
    assert_eq!(graphs[0].id, "bernoulli_n20_r0");

    // same seed through the environment gives the same files
    let again = dir.path("again");
    let o = Command::new(env!("CARGO_BIN_EXE_netnorm"))
        .env("NETNORM_SEED", "5")
        .arg("--out")
        .arg(&again)
        .args([
            "simulate",
            "--model",
            "bernoulli",
            "--sizes",
            "20",
            "--replicates",
            "3",
        ])
        .output()
        .unwrap();
    assert!(o.status.success());
    for g in &graphs {
        let name = format!("{}.edges", g.id);
        assert_eq!(
            fs::read(sim.join(&name)).unwrap(),
            fs::read(again.join(&name)).unwrap()
        );
    }

    let stats = dir.path("stats");
    let o = netnorm(&["stats", sim.to_str().unwrap()], &stats);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(stats.join("raw_stats.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 9);
}

#[test]
fn stats_of_complete_and_empty_graphs() {
    let dir = Scratch::new("stats");
    fs::write(
        dir.path("k4.edges"),
        "n 4\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n---\nn 5\n",
    )
    .unwrap();
    let o = netnorm(
        &["stats", dir.path("k4.edges").to_str().unwrap()],
        &dir.path("out"),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path("out/raw_stats.csv")).unwrap();
    assert!(csv.contains("k4,k4#0,4,density,1,true"), "{csv}");
    assert!(csv.contains("k4,k4#1,5,transitivity,NA,false"), "{csv}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = Scratch::new("usage");
    fs::write(dir.path("few.edges"), "n 3\n0 1\n---\nn 4\n1 2\n").unwrap();
    let few = dir.path("few.edges");

    let o = netnorm(
        &["adjust", few.to_str().unwrap(), "--n-m", "5"],
        &dir.path("a"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N_M"), "{}", stderr(&o));

    let o = netnorm(
        &["stats", dir.path("missing.edges").to_str().unwrap()],
        &dir.path("b"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.edges"));

    fs::write(dir.path("bad.edges"), "n 3\n0 1\n0 9\n").unwrap();
    let o = netnorm(
        &["stats", dir.path("bad.edges").to_str().unwrap()],
        &dir.path("c"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.edges:3"), "{}", stderr(&o));

    let o = netnorm(&["simulate", "--model", "nope"], &dir.path("d"));
    assert_eq!(o.status.code(), Some(2));

    let o = netnorm(&["frobnicate"], &dir.path("e"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_needs_two_sizes() {
    let dir = Scratch::new("compare");
    let sim = dir.path("sim");
    assert!(netnorm(
        &[
            "simulate",
            "--model",
            "erdos_renyi",
            "--sizes",
            "12,16",
            "--replicates",
            "6"
        ],
        &sim
    )
    .status
    .success());
    let stats = dir.path("stats");
    assert!(netnorm(&["stats", sim.to_str().unwrap()], &stats)
        .status
        .success());
    let csv = stats.join("raw_stats.csv");

    let o = netnorm(&["compare", csv.to_str().unwrap()], &dir.path("cmp"));
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path("cmp/report.csv")).unwrap();
    assert!(report.starts_with("statistic,n_i,n_j,ks,ad_stat,ad_raw,pearson_r"));
    assert!(dir.path("cmp/figures/ks_density.svg").exists());

    let one: String = fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .filter(|l| !l.contains(",16,"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(dir.path("one.csv"), one).unwrap();
    let o = netnorm(
        &["compare", dir.path("one.csv").to_str().unwrap()],
        &dir.path("cmp1"),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn adjust_writes_artifacts() {
    let dir = Scratch::new("adjust");
    let sim = dir.path("sim");
    assert!(netnorm(
        &[
            "simulate",
            "--model",
            "bernoulli",
            "--sizes",
            "15,25",
            "--replicates",
            "4"
        ],
        &sim
    )
    .status
    .success());
    let out = dir.path("adj");
    let o = netnorm(
        &[
            "adjust",
            sim.to_str().unwrap(),
            "--family",
            "bernoulli",
            "--n-m",
            "4",
            "--n-s",
            "40",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["components.json", "reference.csv", "adjusted.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let er = dir.path("er");
    let o = netnorm(
        &[
            "adjust",
            sim.to_str().unwrap(),
            "--family",
            "erdos_renyi",
            "--n-s",
            "40",
        ],
        &er,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!er.join("components.json").exists());
    assert!(er.join("adjusted.csv").exists());
}
