use polyce::fixtures::{constant_game, embedded_trap, unique_ce_quadratic};
use polyce::PolynomialGame;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn polyce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_game(dir: &TempDir, name: &str, game: &PolynomialGame) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, game.to_json()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_games_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games");
    for (file, want) in [
        ("quadratic.json", unique_ce_quadratic()),
        ("embedded.json", embedded_trap()),
        ("constant.json", constant_game(2, 1.0)),
    ] {
        let text = std::fs::read_to_string(root.join(file)).unwrap();
        assert_eq!(polyce::parse_game(&text).unwrap(), want, "{file}");
    }
}

#[test]
fn adaptive_prints_the_trace_table() {
    let dir = TempDir::new().unwrap();
    let game = write_game(&dir, "embedded.json", &embedded_trap());
    let trace = dir.path().join("trace.json");
    let o = polyce(&[
        "adaptive",
        "--game",
        s(&game),
        "--grid",
        "-1",
        "--out",
        s(&trace),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).take(3).collect();
    assert!(
        rows[0].trim_start().starts_with("0 |") && rows[0].contains("2.000000e0"),
        "{out}"
    );
    assert!(
        rows[1].contains("4.000000e0") && rows[1].contains("{0.0000}"),
        "{out}"
    );
    assert!(rows[2].contains("{1.0000}"), "{out}");
    assert!(out.contains("status: Converged"));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(json["iterations"].as_array().unwrap().len(), 3);

    // audit recomputes ε for every recorded distribution
    let o = polyce(&["audit", "--game", s(&game), "--dist", s(&trace)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("source,epsilon,eps_x,eps_y"));
    let eps: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eps.len(), 3);
    assert!(
        (eps[0] - 2.0).abs() < 1e-9 && (eps[1] - 4.0).abs() < 1e-6 && eps[2] < 1e-5,
        "{eps:?}"
    );
}

#[test]
fn degenerate_mode_stalls() {
    let dir = TempDir::new().unwrap();
    let game = write_game(&dir, "embedded.json", &embedded_trap());
    let o = polyce(&[
        "adaptive",
        "--game",
        s(&game),
        "--grid",
        "-1",
        "--degenerate",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    // header, k = 0..5, status
    let table: Vec<&str> = out
        .lines()
        .take_while(|l| !l.starts_with("status"))
        .collect();
    assert_eq!(table.len(), 7, "{out}");
    assert!(table[2..].iter().all(|l| l.contains("2.000000e0")), "{out}");
    assert!(out.contains("status: Stalled"));
}

#[test]
fn static_on_a_constant_game_is_exact() {
    let dir = TempDir::new().unwrap();
    let game = write_game(&dir, "constant.json", &constant_game(2, 1.0));
    let csv = dir.path().join("sweep.csv");
    let o = polyce(&[
        "static",
        "--game",
        s(&game),
        "--d",
        "1..3",
        "--out",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,epsilon,u_x,u_y"));
    for (d, line) in (1..=3).zip(lines) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], d.to_string());
        assert_eq!(f[1].parse::<f64>().unwrap(), 0.0);
    }
    assert!(dir.path().join("sweep.json").exists());

    let o = polyce(&[
        "audit",
        "--game",
        s(&game),
        "--dist",
        s(&dir.path().join("sweep.json")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn moments_write_boxes_and_region() {
    let dir = TempDir::new().unwrap();
    let game = write_game(&dir, "quadratic.json", &unique_ce_quadratic());
    let out = dir.path().join("moments");
    let o = polyce(&[
        "moments",
        "--game",
        s(&game),
        "--d",
        "0,2",
        "--directions",
        "4",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let boxes: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("boxes.json")).unwrap()).unwrap();
    assert_eq!(boxes.as_array().unwrap().len(), 2);
    let top = &boxes[1]["bounds"][0];
    assert!((top["min"].as_f64().unwrap() - 2.988).abs() < 1e-3);
    let region = std::fs::read_to_string(out.join("region.csv")).unwrap();
    assert_eq!(region.lines().next(), Some("d,r,w_x,w_y,u_x,u_y"));
    assert_eq!(region.lines().count(), 9);
}

#[test]
fn randgame_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = polyce(&["randgame", "--seed", "17", "--out", s(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let game = polyce::parse_game(&text).unwrap();
    assert_eq!(game.num_players(), 3);
    assert_eq!(game.utility(0).total_degree(), 4);

    let other = polyce(&[
        "randgame",
        "--seed",
        "18",
        "--players",
        "2",
        "--degree",
        "2",
    ]);
    assert!(other.status.success());
    assert_ne!(stdout(&other).trim(), text.trim());
}

#[test]
fn bad_input_exits_with_status_one() {
    let dir = TempDir::new().unwrap();
    let game = write_game(&dir, "quadratic.json", &unique_ce_quadratic());
    let broken = dir.path().join("broken.json");
    std::fs::write(
        &broken,
        r#"{"players":["x","y"],"utilities":[{"terms":[{"exp":[1],"coef":1.0}]},{"terms":[]}]}"#,
    )
    .unwrap();
    let missing = dir.path().join("missing.json");

    let cases: Vec<Vec<&str>> = vec![
        vec!["static", "--game", s(&broken)],
        vec!["static", "--game", s(&missing)],
        vec!["static", "--game", s(&game), "--d", "0"],
        vec!["adaptive", "--game", s(&game), "--alpha", "1"],
        vec![
            "adaptive",
            "--game",
            s(&game),
            "--alpha",
            "0.6",
            "--beta",
            "0.5",
        ],
        vec!["adaptive", "--game", s(&game), "--grid", "0;0;0"],
        vec!["adaptive", "--game", s(&game), "--grid", "2"],
        vec!["moments", "--game", s(&game), "--d", "1", "--r", "1"],
        vec![
            "moments",
            "--game",
            s(&game),
            "--d",
            "0",
            "--directions",
            "2",
        ],
        vec!["randgame", "--seed", "1", "--players", "0"],
        vec!["audit", "--game", s(&game), "--dist", s(&game)],
    ];
    for args in cases {
        let o = polyce(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error:"), "{args:?}: {}", stderr(&o));
    }
    let o = polyce(&["static", "--game", s(&broken)]);
    assert!(stderr(&o).contains("term 0"), "{}", stderr(&o));
}
