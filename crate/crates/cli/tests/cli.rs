use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use descry_core::dictionary::DictionarySet;
use descry_core::eval::fixtures;

fn descry(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_descry"))
        .args(args)
        .env("RUST_LOG", "error")
        .env_remove("DESCRY_LLM_ENDPOINT")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = descry(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes the wedding fixture with the unedited dictionaries.
fn wedding_dir() -> (tempfile::TempDir, PathBuf, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let f = fixtures::wedding().unwrap();
    let (images, texts, dicts) = (
        dir.path().join("i.dscr"),
        dir.path().join("t.dscr"),
        dir.path().join("d.json"),
    );
    f.images.save(&images).unwrap();
    f.texts.save(&texts).unwrap();
    f.unedited.save(&dicts).unwrap();
    f.manifest.save(dir.path().join("wedding.jsonl")).unwrap();
    (dir, images, texts, dicts)
}

#[test]
fn generate_from_committed_cache() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("categories.txt");
    std::fs::write(&list, "# animals\nlemur\n").unwrap();
    let out = dir.path().join("dictionaries.json");
    let cache = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/llm_cache");
    ok(&[
        "generate",
        "--categories",
        s(&list),
        "--out",
        s(&out),
        "--cache-dir",
        s(&cache),
        "--offline",
    ]);
    let set = DictionarySet::load(&out).unwrap();
    assert_eq!(set.get("lemur").unwrap().descriptor_count(), 7);

    std::fs::write(&list, "lemur\nokapi\tokapi\n").unwrap();
    let failed = descry(&[
        "generate",
        "--categories",
        s(&list),
        "--out",
        s(&out),
        "--cache-dir",
        s(&cache),
        "--offline",
    ]);
    assert!(!failed.status.success());
    assert!(String::from_utf8_lossy(&failed.stderr).contains("okapi"));
    // partial output is kept
    assert!(DictionarySet::load(&out).unwrap().contains("lemur"));
}

#[test]
fn generate_online_needs_an_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let list = dir.path().join("c.txt");
    std::fs::write(&list, "lemur\n").unwrap();
    let out = descry(&[
        "generate",
        "--categories",
        s(&list),
        "--out",
        s(&dir.path().join("d.json")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("DESCRY_LLM_ENDPOINT"));
}

#[test]
fn texts_lists_what_to_embed() {
    let (_dir, _, texts, dicts) = wedding_dir();
    let all = ok(&["texts", "--dictionaries", s(&dicts)]);
    assert!(all.lines().any(|l| l == "wedding, which is a groom wearing a tuxedo"));
    assert!(ok(&["texts", "--dictionaries", s(&dicts), "--missing-from", s(&texts)]).is_empty());
    let missing = ok(&[
        "texts",
        "--dictionaries",
        s(&dicts),
        "--missing-from",
        s(&texts),
        "--baseline",
        "single",
    ]);
    assert!(missing.lines().any(|l| l == "a photo of a wedding"));
    assert_eq!(missing.lines().count(), DictionarySet::load(&dicts).unwrap().len());
}

#[test]
fn classify_and_explain_text_output() {
    let (_dir, images, texts, dicts) = wedding_dir();
    let common = [
        "--images",
        s(&images),
        "--texts",
        s(&texts),
        "--dictionaries",
        s(&dicts),
    ];
    let mut args = vec!["classify", "--image-id", "wedding_japanese_02"];
    args.extend(common);
    let text = ok(&args);
    assert!(text.starts_with("wedding_japanese_02: kimono\n"), "{text}");
    assert_eq!(text.lines().count(), 6);

    let mut args = vec!["explain", "--image-id", "wedding_japanese_02", "--contrast", "wedding"];
    args.extend(common);
    let text = ok(&args);
    assert!(text.contains("kimono"));
    assert!(text.contains("guests gathered to celebrate"));

    let mut args = vec!["explain", "--image-id", "wedding_japanese_02", "--json"];
    args.extend(common);
    let view: serde_json::Value = serde_json::from_str(&ok(&args)).unwrap();
    assert_eq!(view["panels"].as_array().unwrap().len(), 1);

    let mut args = vec!["classify", "--image-id", "missing"];
    args.extend(common);
    let out = descry(&args);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown image"));
}

#[test]
fn evaluate_and_retrieve() {
    let (dir, images, texts, _) = wedding_dir();
    let f = fixtures::wedding().unwrap();
    let edited = dir.path().join("edited.json");
    f.edited.save(&edited).unwrap();
    let manifest = dir.path().join("wedding.jsonl");
    let common = [
        "--images",
        s(&images),
        "--texts",
        s(&texts),
        "--dictionaries",
        s(&edited),
    ];

    // the class-name prompts are not embedded in this fixture
    let mut args = vec!["evaluate", "--manifest", s(&manifest), "--subgroups", "--json"];
    args.extend(common);
    let failed = descry(&args);
    assert!(!failed.status.success());
    assert!(String::from_utf8_lossy(&failed.stderr).contains("a photo of a wedding"));

    let relevant = dir.path().join("relevant.txt");
    std::fs::write(&relevant, "wedding_chinese_00\nwedding_chinese_01\n").unwrap();
    let mut args = vec![
        "retrieve",
        "--category",
        "wedding",
        "-k",
        "50",
        "--relevant",
        s(&relevant),
    ];
    args.extend(common);
    let text = ok(&args);
    assert!(text.ends_with("recall@50: 2/2 = 1.000\n"), "{text}");
}

#[test]
fn oracle_writes_a_complete_data_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["oracle", "--seed", "7", "--out", s(dir.path())]);
    assert!(out.starts_with("oracle accuracy: mean "));
    let p = |n: &str| dir.path().join(n);
    let report = ok(&[
        "evaluate",
        "--images",
        s(&p("images.dscr")),
        "--texts",
        s(&p("texts.dscr")),
        "--dictionaries",
        s(&p("dictionaries.json")),
        "--manifest",
        s(&p("manifest.jsonl")),
        "--json",
    ]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(report["n"], 100);
    assert_eq!(report["dataset"], "manifest");
    let answers: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("answers.json")).unwrap()).unwrap();
    let correct = answers
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["mean_ranking"][0] == a["gold"])
        .count();
    assert_eq!(report["method_correct"], correct);
}

#[cfg(unix)]
#[test]
fn serve_answers_and_saves_on_shutdown() {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpStream;
    use std::process::Stdio;

    let (_dir, images, texts, dicts) = wedding_dir();
    let mut child = Command::new(env!("CARGO_BIN_EXE_descry"))
        .args([
            "serve",
            "--port",
            "0",
            "--images",
            s(&images),
            "--texts",
            s(&texts),
            "--dictionaries",
            s(&dicts),
        ])
        .env("RUST_LOG", "info")
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let addr = loop {
        let mut line = String::new();
        assert!(stderr.read_line(&mut line).unwrap() > 0, "server exited early");
        if let Some(rest) = line.split("listening on ").nth(1) {
            break rest.trim().to_owned();
        }
    };

    let request = |raw: String| {
        let mut stream = TcpStream::connect(&addr).unwrap();
        stream.write_all(raw.as_bytes()).unwrap();
        let mut response = String::new();
        stream.read_to_string(&mut response).unwrap();
        response
    };
    let body = r#"["a bride wearing a white dress","guests gathered to celebrate"]"#;
    let response = request(format!(
        "PUT /categories/wedding/descriptors HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nIf-Match: \"1\"\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    ));
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.to_ascii_lowercase().contains("x-descry-version: 2"));

    let status = Command::new("kill")
        .args(["-TERM", &child.id().to_string()])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(child.wait().unwrap().success());
    let saved = DictionarySet::load(&dicts).unwrap();
    assert_eq!(saved.get("wedding").unwrap().descriptor_count(), 2);
}
