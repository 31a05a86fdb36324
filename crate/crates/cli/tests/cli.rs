use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rcrt(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_rcrt")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let run = rcrt(args);
    assert_eq!(run.code, 0, "{args:?}: {}", run.stderr);
    serde_json::from_str(&run.stdout).unwrap()
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

/// No JSON number anywhere: integers, rationals and floats are all strings.
fn assert_no_numbers(v: &Value) {
    match v {
        Value::Number(n) => panic!("bare number {n}"),
        Value::Array(items) => items.iter().for_each(assert_no_numbers),
        Value::Object(map) => map.values().for_each(assert_no_numbers),
        _ => {}
    }
}

#[test]
fn analyze_reproduces_the_staircase() {
    let out = json(&["analyze", "--moduli", "165,341,264"]);
    assert_eq!(out["result"]["lcm"], "40920");
    let steps: Vec<(String, String)> = out["result"]["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["K"].as_str().unwrap().into(), s["delta4"].as_str().unwrap().into()))
        .collect();
    let expected = [(165, 165), (341, 77), (1056, 66), (1364, 44), (4785, 33), (10571, 11)];
    assert_eq!(steps, expected.map(|(k, d)| (k.to_string(), d.to_string())));
    assert_no_numbers(&out);
}

#[test]
fn capacity_matches_a_window_scan() {
    // largest K such that every X in [7, K] has a residue of at least 3
    let scan = (7..70).take_while(|x| x % 10 >= 3 || x % 7 >= 3).last().unwrap();
    let out = json(&["capacity", "--moduli", "10,7", "--delta4", "3"]);
    assert_eq!(out["result"]["K"], scan.to_string());
}

#[test]
fn decode_multi_worked_example() {
    let out = json(&["decode-multi", "--moduli", "350,450,550,650", "--delta", "4", "--table", &data("worked_table.json")]);
    let r = &out["result"];
    assert_eq!(strings(&r["estimates"]), ["1110", "1996", "2016"]);
    assert_eq!(strings(&r["folding"]), ["22", "40", "40"]);
    assert_eq!(r["profile"]["s1"], "102");
    assert_eq!(r["profile"]["center"], "34");
    assert_eq!(strings(&r["profile"]["polynomial"]), ["1", "0", "-108", "432"]);
    assert_eq!(strings(&r["profile"]["roots"]), ["-12", "6", "6"]);
    assert_eq!(out["input"]["gamma"], "50");
    assert_eq!(strings(&out["input"]["coprime_parts"]), ["7", "9", "11", "13"]);
    assert_no_numbers(&out);
}

#[test]
fn inline_rows_and_factored_moduli_agree_with_the_file() {
    let file = json(&["decode-multi", "--moduli", "350,450,550,650", "--delta", "4", "--table", &data("worked_table.json")]);
    let inline = json(&[
        "decode-multi",
        "--gamma",
        "50",
        "--coprime-parts",
        "7,9,11,13",
        "--delta",
        "4",
        "--rows",
        "64,247,270;206,192,213;7,348,370;462,48,62",
    ]);
    assert_eq!(file["result"], inline["result"]);
}

#[test]
fn printed_table_is_refused() {
    let run = rcrt(&["decode-multi", "--moduli", "350,450,550,650", "--delta", "4", "--table", &data("printed_table.json")]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.starts_with("ambiguous residue matching:"), "{}", run.stderr);
    assert!(run.stdout.is_empty());
}

#[test]
fn decode_single_both_methods() {
    let closed = json(&["decode-single", "--gamma", "50", "--coprime-parts", "7,9,11,13", "--residues", "64,206,7,462"]);
    assert_eq!(closed["result"]["estimate"], "1110");
    // residues listed in the user's modulus order are realigned
    let search = json(&["decode-single", "--moduli", "14,9,11", "--residues", "0,2,6", "--method", "search", "--delta4", "5"]);
    let x: u64 = search["result"]["estimate"].as_str().unwrap().parse().unwrap();
    assert!((x as i64 - 28).abs() * 4 < 5, "{search}");
}

#[test]
fn error_list_file_round_trips() {
    let dir = std::env::temp_dir().join(format!("rcrt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("list.json");
    let path = path.to_str().unwrap();
    let written = json(&["build-error-list", "--moduli", "9,11,14", "--delta4", "9", "--output", path]);
    assert_eq!(written["result"]["tau"], "125");
    let args = ["decode-single", "--moduli", "9,11,14", "--residues", "0,7,8", "--method", "search"];
    let from_file = json(&[&args[..], &["--error-list", path]].concat());
    let built = json(&[&args[..], &["--delta4", "9"]].concat());
    assert_eq!(from_file["result"], built["result"]);
    let stdout = rcrt(&["build-error-list", "--moduli", "9,11,14", "--delta4", "9"]).stdout;
    assert_eq!(stdout.trim_end(), std::fs::read_to_string(path).unwrap());
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn randomized_commands_are_byte_identical_per_seed() {
    let select = ["select-moduli", "--beta", "10", "--count", "3", "--delta4", "4", "--k-target", "100000", "--trials", "60"];
    let a = rcrt(&[&select[..], &["--seed", "5"]].concat());
    let b = rcrt(&[&select[..], &["--seed", "5"]].concat());
    let c = rcrt(&[&select[..], &["--seed", "6"]].concat());
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let out: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(out["seed"], "5");
    assert_no_numbers(&out);

    let sim = [
        "simulate",
        "--freqs",
        "1110,1995,2016",
        "--gamma",
        "50",
        "--coprime-parts",
        "7,9,11,13",
        "--noise-mode",
        "perturbation",
        "--noise-bound",
        "4",
        "--delta",
        "4",
        "--trials",
        "8",
        "--seed",
        "21",
    ];
    let a = rcrt(&sim);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, rcrt(&sim).stdout);
    let out: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(out["seed"], "21");
    assert_eq!(out["result"]["metrics"].as_array().unwrap().len(), 8);
    assert_no_numbers(&out);
}

#[test]
fn simulate_csv_has_one_row_per_trial() {
    let run = rcrt(&[
        "simulate",
        "--freqs",
        "1110,1995,2016",
        "--gamma",
        "50",
        "--coprime-parts",
        "7,9,11,13",
        "--noise-mode",
        "pattern",
        "--errors",
        "4,-4,-3,2;2,-3,3,3;4,-3,4,-4",
        "--delta",
        "4",
        "--trials",
        "3",
        "--seed",
        "1",
        "--format",
        "csv",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let lines: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("master_seed,trial,seed,success"));
    for line in &lines[1..] {
        assert!(line.starts_with("1,"));
        assert!(line.contains(",true,1,1110 1996 2016,0 1 0,"), "{line}");
    }
}

#[test]
fn prob_bound_reports_both_bounds() {
    let out = json(&["prob-bound", "--beta", "12", "--count", "3", "--delta4", "8", "--k", "100000"]);
    assert_eq!(out["input"]["p_l"], "2053");
    let simple: f64 = out["result"]["bound_simple"]["value"].as_str().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&simple));
    assert_no_numbers(&out);
}

#[test]
fn exit_codes_and_prefixes() {
    let unknown = rcrt(&["analyze", "--moduli", "10,7", "--bogus"]);
    assert_eq!(unknown.code, 2);
    assert!(unknown.stderr.starts_with("usage error:"));

    let unseeded = rcrt(&["select-moduli", "--beta", "8", "--count", "2", "--delta4", "2", "--k-target", "100"]);
    assert_eq!(unseeded.code, 2);
    assert!(unseeded.stderr.contains("--seed"));

    let no_subcommand = rcrt(&[]);
    assert_eq!(no_subcommand.code, 2);

    let no_moduli = rcrt(&["analyze"]);
    assert_eq!(no_moduli.code, 2);

    let domain = rcrt(&["capacity", "--moduli", "10,7", "--delta4", "8"]);
    assert_eq!(domain.code, 1);
    assert!(domain.stderr.starts_with("domain error:"), "{}", domain.stderr);

    let shared = rcrt(&["decode-multi", "--gamma", "50", "--coprime-parts", "6,9", "--delta", "4", "--rows", "1;2"]);
    assert_eq!(shared.code, 1);
    assert!(shared.stderr.starts_with("invalid moduli:"), "{}", shared.stderr);

    let dir = std::env::temp_dir().join(format!("rcrt-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"rows\": [[1, 2]").unwrap();
    let malformed = rcrt(&["decode-multi", "--moduli", "350,450", "--delta", "4", "--table", bad.to_str().unwrap()]);
    assert_eq!(malformed.code, 1);
    assert!(malformed.stderr.starts_with("format error:"), "{}", malformed.stderr);
    std::fs::remove_dir_all(dir).unwrap();

    let budget = rcrt(&["analyze", "--moduli", "1000003,1000033,1000037", "--budget", "1000"]);
    assert_eq!(budget.code, 1);
    assert!(budget.stderr.starts_with("budget exceeded:"));

    let missing = rcrt(&["decode-multi", "--moduli", "350,450", "--delta", "4", "--table", "/nonexistent/table.json"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.starts_with("io error:"));
}

#[test]
fn library_entry_point_matches_the_binary() {
    let args = ["rcrt", "analyze", "--moduli", "10,7"];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(rcrt_cli::run(args, &mut out, &mut err), 0);
    assert_eq!(String::from_utf8(out).unwrap(), rcrt(&args[1..]).stdout);
}
