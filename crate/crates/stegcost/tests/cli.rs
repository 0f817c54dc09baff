use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use stegcost::binfmt::{decode_cost, decode_pattern};
use stegcost::oracle_file::read_oracle;
use stegcost::pgm::{load_pgm, save_pgm};
use stegcost::report::report_from_json;
use stegcost_core::{GrayImage, Oracle};

fn stegcost(dir: &Path, args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stegcost"))
        .current_dir(dir)
        .args(args.split_whitespace())
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &str) -> String {
    let out = stegcost(dir, args);
    assert!(out.status.success(), "{args}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(dir: &Path, args: &str, code: i32) -> String {
    let out = stegcost(dir, args);
    assert_eq!(out.status.code(), Some(code), "{args}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stderr).unwrap()
}

fn field<'a>(line: &'a str, key: &str) -> &'a str {
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {line}"))
}

#[test]
fn all_white_cover_is_entirely_wet() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), "synth --texture flat:255 --width 12 --height 10 --output white.pgm");
    let line = ok(dir.path(), "cost --input white.pgm --output cost.bin");
    assert_eq!(field(&line, "wet"), "120");
    assert_eq!(field(&line, "pixels"), "120");
    let rho = decode_cost(&fs::read(dir.path().join("cost.bin")).unwrap()).unwrap();
    assert!(rho.wet().iter().all(|&w| w));
}

#[test]
fn cost_is_reproducible_and_summarized() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, "synth --texture two-region --seed 3 --output c.pgm");
    let a = ok(d, "cost --input c.pgm --output a.bin --method hill");
    let b = ok(d, "cost --input c.pgm --output b.bin --method hill");
    assert_eq!(a, b);
    assert_eq!(fs::read(d.join("a.bin")).unwrap(), fs::read(d.join("b.bin")).unwrap());
    let line = ok(d, "cost --input c.pgm --output p.bin -k 5 --gain 0.1 --bias -1");
    assert_eq!(field(&line, "k"), "5");
    assert_eq!(field(&line, "oracle"), "filter-logit");
    assert_eq!(field(&line, "gain"), "0.1");
    assert!(field(&line, "min").parse::<f64>().unwrap() >= 1e-6);
}

#[test]
fn embed_with_zero_payload_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, "synth --texture smoothed-noise:3 --seed 1 --width 20 --height 20 --output c.pgm");
    let line = ok(d, "embed --input c.pgm --payload 0 --output s.pgm --pattern p.bin");
    assert_eq!(field(&line, "changes"), "0");
    assert_eq!(fs::read(d.join("c.pgm")).unwrap(), fs::read(d.join("s.pgm")).unwrap());
    assert_eq!(decode_pattern(&fs::read(d.join("p.bin")).unwrap()).unwrap().change_count(), 0);
}

#[test]
fn embed_is_reproducible_and_records_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, "synth --texture smoothed-noise:5 --seed 2 --width 32 --height 32 --output c.pgm");
    let cmd = "embed --input c.pgm --payload 0.4 --seed 7 --rule capped --output s.pgm --meta m.json";
    let first = ok(d, cmd);
    let meta1 = fs::read(d.join("m.json")).unwrap();
    assert_eq!(ok(d, cmd), first);
    assert_eq!(fs::read(d.join("m.json")).unwrap(), meta1);
    let meta: serde_json::Value = serde_json::from_slice(&meta1).unwrap();
    for key in ["lambda", "entropy", "expected_distortion", "change_count", "seed", "rule", "message_bits", "cost"] {
        assert!(meta.get(key).is_some(), "{key}");
    }
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["rule"], "capped");
    assert_eq!(meta["cost"]["k"], "13");
    let changes: usize = field(&first, "changes").parse().unwrap();
    let cover = load_pgm(&d.join("c.pgm")).unwrap();
    let stego = load_pgm(&d.join("s.pgm")).unwrap();
    let diff = cover.pixels().iter().zip(stego.pixels()).filter(|(a, b)| a != b).count();
    assert_eq!(diff, changes);
    assert!(changes > 0);
}

#[test]
fn infeasible_payload_exits_4_with_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, "synth --texture gradient --output c.pgm");
    let err = fails(d, "embed --input c.pgm --payload 1.7 --output s.pgm", 4);
    assert!(err.contains("max feasible payload is 1.58"), "{err}");
    assert!(!d.join("s.pgm").exists());
}

#[test]
fn error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, "synth --texture gradient --output c.pgm");
    // argument and configuration errors
    fails(d, "cost --input c.pgm", 2);
    fails(d, "cost --input c.pgm --output x.bin -k 4", 2);
    fails(d, "cost --input c.pgm --output x.bin --threads 0", 2);
    fails(d, "embed --input c.pgm --output s.pgm --payload 0.1 --rule hot", 2);
    fails(d, "cost --input c.pgm --output x.bin --oracle linear-residual", 2);
    let err = fails(d, "cost --input c.pgm --output x.bin --oracle linear-residual --weights nowhere.txt", 2);
    assert!(err.contains("nowhere.txt"), "{err}");
    fs::write(d.join("bad.txt"), "oracle v1 kind=linear-residual dims=14 T=3\n1 2\n").unwrap();
    fails(d, "cost --input c.pgm --output x.bin --weights bad.txt", 2);
    // I/O errors
    fails(d, "cost --input missing.pgm --output x.bin", 3);
    fs::write(d.join("junk.pgm"), b"P6\n5 5\n255\n").unwrap();
    let err = fails(d, "cost --input junk.pgm --output x.bin", 3);
    assert!(err.contains("byte 0"), "{err}");
    fails(d, "cost --input c.pgm --output no/such/dir/x.bin", 3);
}

fn write_sweep(d: &Path, name: &str, extra: &str) {
    let text = format!(
        r#"{{"covers": {{"kind": "synthetic", "count": 40, "size": 16, "seed": 1}},
            "oracle": {{"kind": "filter-logit"}},
            "detector": {{"epochs": 5}},
            "seeds": [1],
            {extra}}}"#
    );
    fs::write(d.join(name), text).unwrap();
}

#[test]
fn sweep_prints_a_table_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_sweep(d, "s.json", r#""methods": ["proposed"], "filter_sizes": [1, 3, 7, 13, 21], "payloads": [0.4]"#);
    let out = ok(d, "sweep --config s.json --output r1.json");
    let rows: Vec<&str> = out.lines().filter(|l| l.starts_with("proposed")).collect();
    assert_eq!(rows.len(), 5, "{out}");
    assert!(out.lines().next().unwrap().contains("a=0.4"));
    ok(d, "sweep --config s.json --output r2.json --threads 2");
    let r1 = fs::read_to_string(d.join("r1.json")).unwrap();
    assert_eq!(r1, fs::read_to_string(d.join("r2.json")).unwrap());
    let report = report_from_json(&r1).unwrap();
    assert_eq!(report.records.len(), 5);
    assert!(report.records.iter().all(|r| (0.0..=1.0).contains(&r.detection_error)));
}

#[test]
fn sweep_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_sweep(d, "empty.json", r#""payloads": []"#);
    fails(d, "sweep --config empty.json --output r.json", 2);
    fs::write(d.join("broken.json"), "{").unwrap();
    fails(d, "sweep --config broken.json --output r.json", 2);
    fails(d, "sweep --config absent.json --output r.json", 3);
    write_sweep(d, "few.json", r#""payloads": [0.1], "covers": {"kind": "synthetic", "count": 10, "size": 16, "seed": 1}"#);
    fails(d, "sweep --config few.json --output r.json", 2);
}

fn make_pairs(d: &Path, names: &[&str]) {
    fs::create_dir_all(d.join("c")).unwrap();
    fs::create_dir_all(d.join("s")).unwrap();
    for (i, n) in names.iter().enumerate() {
        let img = stegcost_core::synth_cover(stegcost_core::TextureSpec::SmoothedNoise { kernel: 9 }, 16, 16, i as u64).unwrap();
        let stego = GrayImage::from_fn(16, 16, |r, c| {
            let v = img.get(r, c) as i32 + if (r + c) % 2 == 0 { 1 } else { -1 };
            v.clamp(0, 255) as u8
        })
        .unwrap();
        save_pgm(&d.join("c").join(n), &img).unwrap();
        save_pgm(&d.join("s").join(n), &stego).unwrap();
    }
}

#[test]
fn train_oracle_writes_weights_and_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let names: Vec<String> = (0..12).map(|i| format!("img{i:02}.pgm")).collect();
    make_pairs(d, &names.iter().map(String::as_str).collect::<Vec<_>>());
    let line = ok(d, "train-oracle --covers c --stegos s --output w.txt --seed 3");
    let acc: f64 = field(&line, "accuracy").parse().unwrap();
    assert!(acc > 0.9, "{line}");
    assert_eq!(field(&line, "pairs"), "12");
    let first = fs::read(d.join("w.txt")).unwrap();
    ok(d, "train-oracle --covers c --stegos s --output w.txt --seed 3");
    assert_eq!(fs::read(d.join("w.txt")).unwrap(), first);
    // the weights drive the proposed cost
    ok(d, "cost --input c/img00.pgm --output cost.bin --oracle linear-residual --weights w.txt");

    ok(d, "train-oracle --covers c --stegos s --output zero.txt --epochs 0");
    match read_oracle(&fs::read_to_string(d.join("zero.txt")).unwrap()).unwrap() {
        Oracle::LinearResidual(o) => {
            assert!(o.weights().iter().all(|&w| w == 0.0));
            assert_eq!(o.bias(), 0.0);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn train_oracle_rejects_unmatched_directories() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    make_pairs(d, &["a.pgm", "b.pgm"]);
    fs::rename(d.join("s/b.pgm"), d.join("s/z.pgm")).unwrap();
    let err = fails(d, "train-oracle --covers c --stegos s --output w.txt", 2);
    assert!(err.contains("b.pgm"), "{err}");
}
