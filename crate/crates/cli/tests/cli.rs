use std::path::Path;
use std::process::{Command, Output};

use signpipe_core::pose::read_pose;

fn signpipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signpipe"))
        .args(args)
        .env_remove("SIGNPIPE_CONFIG")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = signpipe(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn text_to_pose_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("dict");
    let manifest = ok(&["gen-toy-dictionary", "-o", path(&dict), "--glosses", "60"]);
    let manifest = manifest.trim();
    let pose = dir.path().join("hw.pose");
    let s2s: serde_json::Value = serde_json::from_str(&ok(&[
        "translate", "--direction", "s2s", "--from", "auto", "--to", "asl", "--text", "Hello world, good friend!",
        "--dictionary", manifest, "-o", path(&pose),
    ]))
    .unwrap();
    assert_eq!(s2s["language"]["code"], "en");
    assert_eq!(s2s["sentences"][0]["glosses"], serde_json::json!(["HELLO", "WORLD", "GOOD", "FRIEND"]));
    let sts: serde_json::Value = serde_json::from_str(&ok(&[
        "translate", "--direction", "sts", "--from", "asl", "--to", "en", "--pose", path(&pose), "--dictionary", manifest,
    ]))
    .unwrap();
    assert_eq!(sts["text"], "hello world good friend.");

    let segments: serde_json::Value = serde_json::from_str(&ok(&["segment", path(&pose)])).unwrap();
    assert_eq!(segments["segments"].as_array().unwrap().len(), 4);
}

#[test]
fn stitch_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.pose");
    ok(&["translate", "--direction", "s2s", "--from", "en", "--to", "asl", "--text", "cat", "-o", path(&a)]);
    let frames = read_pose(&std::fs::read(&a).unwrap()).unwrap().frame_count();
    let out = dir.path().join("out.pose");
    ok(&["stitch", path(&a), path(&a), path(&a), "-o", path(&out), "-k", "5"]);
    assert_eq!(read_pose(&std::fs::read(&out).unwrap()).unwrap().frame_count(), 3 * frames - 10);

    let svg = dir.path().join("svg");
    ok(&["render", path(&a), "-o", path(&svg), "--width", "64", "--height", "64"]);
    let index: serde_json::Value = serde_json::from_slice(&std::fs::read(svg.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["frames"].as_array().unwrap().len(), frames);
    assert!(svg.join("000.svg").exists());
}

#[test]
fn fsw_commands() {
    let parsed: serde_json::Value =
        serde_json::from_str(&ok(&["fsw", "parse", "M518x529S14C20481x471  S38800464x496"])).unwrap();
    assert_eq!(parsed["canonical"], "M518x529S14c20481x471 S38800464x496");
    ok(&["fsw", "validate", "AS14c20M518x529S14c20481x471"]);
    let bad = signpipe(&["fsw", "validate", "M518x529S14c20481x4"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("byte 19"));
}

#[test]
fn serve_rejects_offline_violations() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"normalization":{"enabled":true,"endpoint":"http://127.0.0.1:9/n"},"server":{"port":0}}"#,
    )
    .unwrap();
    let out = signpipe(&["serve", "--config", path(&config), "--offline"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("offline"));
}

#[test]
fn train_langid_writes_a_loadable_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let out = signpipe(&["train-langid", "-o", path(&model)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&model).unwrap();
    let model: signpipe_core::text::NgramLangModel = serde_json::from_str(&text).unwrap();
    assert_eq!(model.detect("Das ist ein kleines Haus am See.").code, "de");
}
