use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use seqsynth::manifest::RunManifest;

fn seqsynth(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqsynth"))
        .args(args)
        .current_dir(dir)
        .env_remove("SEQSYNTH_WORKERS")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = seqsynth(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &[&str]) -> String {
    let out = seqsynth(dir, args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

const CORPUS: &str = "home news sport\nnews sport home weather\nsport home news\nweather home\nhome news weather sport\n";

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("real.txt"), CORPUS).unwrap();
    ok(dir.path(), &["stats", "--corpus", "real.txt", "--out", "m"]);
    dir
}

#[test]
fn stats_writes_matrices_vocab_and_manifest() {
    let dir = setup();
    let d = dir.path();
    let ds = fs::read_to_string(d.join("m.ds.tsv")).unwrap();
    assert!(ds.starts_with("# kind=DS mode=per_stream n=4"));
    // home -> news occurs in three streams
    assert!(ds.lines().any(|l| l == "1\t0\t3"), "{ds}");
    assert_eq!(fs::read_to_string(d.join("m.vocab")).unwrap(), "home\nnews\nsport\nweather\n");
    let m = RunManifest::load(d.join("m.manifest")).unwrap();
    assert_eq!(m.get("command"), Some("stats"));
    assert_eq!(m.get("stat.streams"), Some("5"));
    assert_eq!(m.get("input.corpus.sha256").map(str::len), Some(64));
}

#[test]
fn generate_records_resolved_settings() {
    let dir = setup();
    let d = dir.path();
    ok(
        d,
        &["generate", "--ds", "m.ds.tsv", "--cvs", "m.cvs.tsv", "--vocab", "m.vocab", "--preset", "videolectures", "--stream-count", "50", "--out", "syn.txt"],
    );
    let m = RunManifest::load(d.join("syn.txt.manifest")).unwrap();
    assert_eq!(m.get("flag.memory"), Some("const:5"));
    assert_eq!(m.get("flag.length"), Some("geometric:0.1"));
    assert_eq!(m.get("flag.stream_count"), Some("50"));
    assert_eq!(m.get("flag.start"), Some("uniform"));
    assert_eq!(m.get("matrix.mode"), Some("per_stream"));
    assert_eq!(m.get("stat.memory_zero_possible"), Some("false"));
    assert!(m.get("stat.dead_end_fallbacks").is_some());
    let text = fs::read_to_string(d.join("syn.txt")).unwrap();
    assert_eq!(text.lines().count(), 50);
    for line in text.lines() {
        for tok in line.split(' ') {
            assert!(["home", "news", "sport", "weather"].contains(&tok));
        }
    }
}

#[test]
fn generate_with_corpus_defaults_to_empirical_and_fixed_start_works() {
    let dir = setup();
    let d = dir.path();
    let base = ["generate", "--ds", "m.ds.tsv", "--cvs", "m.cvs.tsv", "--vocab", "m.vocab"];
    ok(d, &[&base[..], &["--corpus", "real.txt", "--out", "a.txt"]].concat());
    let m = RunManifest::load(d.join("a.txt.manifest")).unwrap();
    assert_eq!(m.get("flag.length"), Some("empirical"));
    assert_eq!(m.get("flag.start"), Some("empirical"));
    assert_eq!(m.get("flag.stream_count"), Some("5"));

    ok(d, &[&base[..], &["--start", "item:weather", "--stream-count", "20", "--out", "b.txt"]].concat());
    let text = fs::read_to_string(d.join("b.txt")).unwrap();
    assert!(text.lines().all(|l| l.starts_with("weather")));

    let err = fails(d, &[&base[..], &["--start", "item:nope", "--out", "c.txt"]].concat());
    assert!(err.contains("nope"));
    let err = fails(d, &[&base[..], &["--length", "empirical", "--out", "c.txt"]].concat());
    assert!(err.contains("--corpus"));
    assert!(!d.join("c.txt").exists());
}

#[test]
fn explicit_flags_override_config_file() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("gen.conf"), "command=generate\nds=m.ds.tsv\ncvs=m.cvs.tsv\nvocab=m.vocab\nstream_count=7\nseed=3\n").unwrap();
    ok(d, &["generate", "--config", "gen.conf", "--out", "a.txt"]);
    ok(d, &["generate", "--config", "gen.conf", "--stream-count", "9", "--out", "b.txt"]);
    assert_eq!(fs::read_to_string(d.join("a.txt")).unwrap().lines().count(), 7);
    assert_eq!(fs::read_to_string(d.join("b.txt")).unwrap().lines().count(), 9);

    fs::write(d.join("wrong.conf"), "command=stats\n").unwrap();
    let err = fails(d, &["generate", "--config", "wrong.conf", "--out", "c.txt"]);
    assert!(err.contains("wrong.conf"), "{err}");
}

#[test]
fn errors_name_the_offending_file_and_leave_no_outputs() {
    let dir = setup();
    let d = dir.path();
    let err = fails(d, &["stats", "--corpus", "missing.txt", "--out", "x"]);
    assert!(err.contains("missing.txt"), "{err}");

    fs::write(d.join("bad.txt"), "a b\nc  d\n").unwrap();
    let err = fails(d, &["stats", "--corpus", "bad.txt", "--out", "x"]);
    assert!(err.contains("bad.txt:2"), "{err}");
    assert!(!d.join("x.ds.tsv").exists() && !d.join("x.manifest").exists());

    // DS and CVS swapped
    let err = fails(d, &["generate", "--ds", "m.cvs.tsv", "--cvs", "m.ds.tsv", "--vocab", "m.vocab", "--out", "s.txt"]);
    assert!(err.contains("DS"), "{err}");
    assert!(!d.join("s.txt").exists());

    let err = fails(d, &["filter", "--matrix", "m.ds.tsv", "--k", "0", "--out", "f.tsv"]);
    assert!(err.contains("--k"));

    // a split that cannot write its later outputs removes the earlier ones
    fs::write(d.join("short.txt"), "a\nb\nc\n").unwrap();
    fails(d, &["split", "--corpus", "short.txt", "--horizontal", "0.34", "--vertical", "0.5", "--seed", "1", "--out", "sp"]);
    let leftovers: Vec<_> = fs::read_dir(d)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("sp."))
        .collect();
    assert!(leftovers.is_empty(), "{leftovers:?}");
}

#[test]
fn filter_and_fidelity() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["filter", "--matrix", "m.cvs.tsv", "--k", "3", "--out", "f.tsv"]);
    let f = fs::read_to_string(d.join("f.tsv")).unwrap();
    assert!(f.starts_with("# kind=CVS"));
    for line in f.lines().skip(2) {
        let v: u64 = line.rsplit('\t').next().unwrap().parse().unwrap();
        assert!(v >= 3);
    }

    let stdout = ok(d, &["fidelity", "--real", "m.ds.tsv", "--syn-matrix", "m.ds.tsv", "--z", "10", "--out", "fid.tsv"]);
    assert!(stdout.contains("avg=1"), "{stdout}");
    let m = RunManifest::load(d.join("fid.tsv.manifest")).unwrap();
    assert_eq!(m.get("stat.avg"), Some("1"));

    ok(d, &["fidelity", "--real", "m.cvs.tsv", "--syn-corpus", "real.txt", "--vocab", "m.vocab", "--out", "fid2.tsv"]);
    let report = seqsynth::fidelity::FidelityReport::load(d.join("fid2.tsv")).unwrap();
    assert_eq!(report.per_row.len(), 4);
    assert!(report.avg.is_nan() || (report.avg - 1.0).abs() < 1e-12);

    let err = fails(d, &["fidelity", "--real", "m.ds.tsv", "--syn-matrix", "m.cvs.tsv", "--out", "fid3.tsv"]);
    assert!(err.contains("CVS"));
}

#[test]
fn split_writes_all_parts() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["split", "--corpus", "real.txt", "--horizontal", "0.4", "--vertical", "0.5", "--folds", "2", "--out", "sp"]);
    let train = fs::read_to_string(d.join("sp.train.txt")).unwrap();
    let test = fs::read_to_string(d.join("sp.test.txt")).unwrap();
    assert_eq!((train.lines().count(), test.lines().count()), (3, 2));
    let query = fs::read_to_string(d.join("sp.query.txt")).unwrap();
    let holdout = fs::read_to_string(d.join("sp.holdout.txt")).unwrap();
    for ((t, q), h) in test.lines().zip(query.lines()).zip(holdout.lines()) {
        assert_eq!(format!("{q} {h}"), t);
    }
    let plan = seqsynth::corpus::FoldPlan::load(d.join("sp.folds.tsv")).unwrap();
    assert_eq!(plan.fold_count(), 2);
    assert!(d.join("sp.manifest").exists());
}

#[test]
fn utility_reports_summary_lines() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let corpus = seqsynth::planted::planted_corpus(seqsynth::planted::PlantedConfig {
        items: 40,
        streams: 200,
        clusters: 4,
        ..Default::default()
    })
    .unwrap();
    fs::write(d.join("real.txt"), corpus.to_text()).unwrap();
    let stdout = ok(d, &["utility", "--corpus", "real.txt", "--folds", "3", "--out", "u.tsv"]);
    assert!(stdout.contains("map: syn beats rnd in"), "{stdout}");
    let tsv = fs::read_to_string(d.join("u.tsv")).unwrap();
    assert!(tsv.starts_with("fold\tmodel\tmap\tndcg\tp10\n"));
    assert_eq!(tsv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 3);
    let m = RunManifest::load(d.join("u.tsv.manifest")).unwrap();
    assert_eq!(m.get("flag.folds"), Some("3"));
    assert_eq!(m.get("flag.knn_k"), Some("15"));
}
