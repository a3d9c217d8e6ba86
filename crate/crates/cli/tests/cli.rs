use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use wicketsim::{HeadToHead, StandingsDistribution};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn wicketsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wicketsim"))
        .args(args)
        .env_remove("WICKETSIM_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = wicketsim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn cwc() -> String {
    fixtures().join("cwc12.json").display().to_string()
}

/// Body of a `# manifest:` headed file.
fn body(bytes: &[u8]) -> String {
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    let (head, rest) = text.split_once('\n').unwrap();
    assert!(head.starts_with("# manifest: {"), "{head}");
    rest.to_string()
}

fn write_dataset(dir: &Path, stats: &str) -> [String; 2] {
    let squad = |team: &str, first: &str| {
        let mut players = vec![serde_json::json!({"id": first, "name": first, "role": "bat"})];
        players.extend((1..11).map(|k| serde_json::json!({"id": format!("{team}-{k}"), "name": format!("{team} {k}"), "role": "wk"})));
        serde_json::json!({"id": team, "name": team, "players": players})
    };
    let teams = serde_json::json!([squad("HOME", "williamson"), squad("AWAY", "other")]);
    let (s, t) = (dir.join("stats.csv"), dir.join("teams.json"));
    std::fs::write(&s, stats).unwrap();
    std::fs::write(&t, teams.to_string()).unwrap();
    [s.display().to_string(), t.display().to_string()]
}

const HEADER: &str = "player_id,opponent_id,average,highest,innings,tier\n";

#[test]
fn fit_rows_pin_the_mean_and_rerun_identically() {
    let dir = tempfile::tempdir().unwrap();
    let stats = format!("{HEADER}williamson,AWAY,54.61,118,30,international\nother,*,9.5,40,12,international\n");
    let [s, t] = write_dataset(dir.path(), &stats);
    let args = ["fit", "--stats", &s, "--teams", &t];
    let first = ok(&args);
    assert_eq!(first, ok(&args));

    let rows: Vec<Vec<String>> = body(&first).lines().map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows[0].join(","), "player_id,opponent_id,alpha,beta,tier,flags");
    // header plus 11 players per side, each against the one opponent
    assert_eq!(rows.len(), 1 + 22);
    let w = rows.iter().find(|r| r[0] == "williamson").unwrap();
    assert_eq!((w[1].as_str(), w[4].as_str(), w[5].as_str()), ("AWAY", "international", ""));
    let (alpha, beta): (f64, f64) = (w[2].parse().unwrap(), w[3].parse().unwrap());
    assert!((alpha * beta - 54.61).abs() < 1e-9);
    let want = wicketsim::FitSettings::default().fit(54.61, 118).unwrap().params;
    assert_eq!((alpha, beta), (want.alpha(), want.beta()));
}

#[test]
fn fit_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("params.csv");
    let f = fixtures();
    let (stats, teams) = (f.join("cwc12_stats.csv"), f.join("cwc12_teams.json"));
    let o = out.display().to_string();
    assert!(ok(&["fit", "--stats", stats.to_str().unwrap(), "--teams", teams.to_str().unwrap(), "--out", &o]).is_empty());
    let text = std::fs::read(&out).unwrap();
    // 12 teams of 18 players, each against 11 opponents
    assert_eq!(body(&text).lines().count(), 1 + 12 * 18 * 11);
}

#[test]
fn empty_stats_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let [s, t] = write_dataset(dir.path(), HEADER);
    let out = wicketsim(&["fit", "--stats", &s, "--teams", &t]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no records"));
}

#[test]
fn zero_sims_is_a_usage_error() {
    let out = wicketsim(&["sim", "tournament", "--config", &cwc(), "--sims", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_data_source_is_a_validation_error() {
    assert_eq!(wicketsim(&["fit"]).status.code(), Some(2));
    assert_eq!(wicketsim(&["sim", "match"]).status.code(), Some(2));
    assert_eq!(wicketsim(&["sim", "match", "--config", "/no/such/config.json"]).status.code(), Some(1));
}

#[test]
fn tournament_output_is_reproducible_across_reruns_and_workers() {
    let c = cwc();
    let args = |w: &'static str| ["--workers", w, "sim", "tournament", "--config", c.as_str(), "--sims", "400", "--seed", "42"];
    let one = ok(&args("1"));
    assert_eq!(one, ok(&args("1")));
    assert_eq!(one, ok(&args("3")));

    let json: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(json["manifest"]["command"], "sim tournament");
    assert_eq!((json["manifest"]["seed"].as_u64(), json["manifest"]["sims"].as_u64()), (Some(42), Some(400)));
    let d: StandingsDistribution = serde_json::from_value(json).unwrap();
    assert_eq!(d.teams.len(), 12);
    for k in 0..12 {
        let col: f64 = d.positions.iter().map(|r| r[k]).sum();
        assert!((col - 1.0).abs() < 1e-9);
    }
}

#[test]
fn seed_comes_from_flag_then_env_then_config() {
    let c = cwc();
    let seed_of = |out: &[u8]| serde_json::from_slice::<serde_json::Value>(out).unwrap()["manifest"]["seed"].as_u64();
    let base = ["sim", "match", "--config", c.as_str(), "--sims", "50", "--team", "AUS", "--team", "IND"];
    assert_eq!(seed_of(&ok(&base)), Some(42));

    let run = |extra: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_wicketsim"))
            .args(base)
            .args(extra)
            .env("WICKETSIM_SEED", "7")
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(seed_of(&run(&[])), Some(7));
    assert_eq!(seed_of(&run(&["--seed", "9"])), Some(9));
    assert_eq!(run(&[]), ok(&[&base[..], &["--seed", "7"]].concat()));
}

#[test]
fn match_formats_agree() {
    let c = cwc();
    let base = ["sim", "match", "--config", c.as_str(), "--sims", "300", "--seed", "5", "--team", "AUS", "--team", "IND", "--team", "ENG"];
    let json = ok(&base);
    let h2h: HeadToHead = serde_json::from_slice(&json).unwrap();
    assert_eq!(h2h.entries.len(), 6);

    let csv = body(&ok(&[&base[..], &["--format", "csv"]].concat()));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "a,b,p_a,p_b,p_draw,n,seed");
    assert_eq!(lines.len(), 7);
    let e = &h2h.entries[0];
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!((cells[0], cells[1]), (e.a.as_str(), e.b.as_str()));
    let nums: Vec<f64> = cells[2..5].iter().map(|c| c.parse().unwrap()).collect();
    assert_eq!(nums, [e.p_a, e.p_b, e.p_draw]);
    assert_eq!((cells[5].parse::<u64>().unwrap(), cells[6].parse::<u64>().unwrap()), (e.n, e.seed));

    let human = body(&ok(&[&base[..], &["--format", "human"]].concat()));
    let aus = human.lines().find(|l| l.starts_with("AUS")).unwrap();
    let ind_cell = aus.split_whitespace().nth(2).unwrap();
    assert_eq!(ind_cell.parse::<f64>().unwrap(), (h2h.get("AUS", "IND").unwrap().p_a * 1000.0).round() / 10.0);
}

#[test]
fn density_tables() {
    let c = cwc();
    let out = ok(&["density", "--config", &c, "--player", "aus-bat-01", "--opponents", "IND,ENG"]);
    let text = body(&out);
    let rows: Vec<(String, f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].to_string(), v[1].parse().unwrap(), v[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2 * 512);
    assert!(rows[..512].iter().all(|r| r.0 == "IND") && rows[512..].iter().all(|r| r.0 == "ENG"));
    assert_eq!(rows[0].1, 0.0);
    // trapezoid mass over the grid
    let mass: f64 = rows[..512].windows(2).map(|w| 0.5 * (w[1].1 - w[0].1) * (w[0].2 + w[1].2)).sum();
    assert!(mass > 0.998 && mass < 1.001, "{mass}");
    assert_eq!(out, ok(&["density", "--config", &c, "--player", "aus-bat-01", "--opponents", "IND,ENG"]));

    assert_eq!(wicketsim(&["density", "--config", &c, "--player", "nobody"]).status.code(), Some(2));
    assert_eq!(wicketsim(&["density", "--config", &c, "--player", "aus-bat-01", "--opponents", "AUS"]).status.code(), Some(2));
}

#[test]
fn compare_against_observed_records() {
    let dir = tempfile::tempdir().unwrap();
    let actuals = dir.path().join("actuals.csv");
    std::fs::write(&actuals, "a,b,wins,games,pct\nAUS,IND,4,7,\nIND,AUS,,,43.0\nENG,PAK,0,0,\n").unwrap();
    let c = cwc();
    let a = actuals.display().to_string();
    let out = ok(&["compare", "--config", &c, "--actuals", &a, "--sims", "300"]);
    let json: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let aus = rows.iter().find(|r| r["a"] == "AUS" && r["b"] == "IND").unwrap();
    assert!((aus["actual_pct"].as_f64().unwrap() - 400.0 / 7.0).abs() < 1e-9);
    assert!(aus["ci_low_pct"].as_f64().unwrap() < aus["ci_high_pct"].as_f64().unwrap());
    assert!(rows.iter().any(|r| r["flag"] == "no data"));
    assert!(rows.iter().any(|r| r["flag"] == "no counts"));

    std::fs::write(&actuals, "a,b,wins,games,pct\nAUS,XYZ,1,2,\n").unwrap();
    assert_eq!(wicketsim(&["compare", "--config", &c, "--actuals", &a, "--sims", "10"]).status.code(), Some(2));
}

#[test]
fn serve_fails_before_binding_on_bad_data_and_on_a_busy_port() {
    let dir = tempfile::tempdir().unwrap();
    let [s, t] = write_dataset(dir.path(), HEADER);
    let out = wicketsim(&["serve", "--stats", &s, "--teams", &t, "--port", "0"]);
    assert_eq!(out.status.code(), Some(2));

    let busy = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let port = busy.local_addr().unwrap().port().to_string();
    let out = wicketsim(&["serve", "--config", &cwc(), "--port", &port]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot bind"));
}
