use std::path::{Path, PathBuf};
use std::process::Command;

use vibrakit_core::model::{parse_deck, write_deck, LoadCase};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn vk_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vibrakit"));
    cmd.args(args).current_dir(root()).env_remove("VIBRAKIT_MAX_DOF");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("run vibrakit");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn vk(args: &[&str]) -> Run {
    vk_env(args, &[])
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(Result::unwrap).collect()
}

/// Whitespace-separated cells of the text line starting with `first`.
fn text_row<'a>(text: &'a str, first: &str) -> Vec<&'a str> {
    text.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .find(|c| c.first() == Some(&first))
        .unwrap_or_else(|| panic!("no row {first} in\n{text}"))
}

fn rounded(cell: &str, decimals: usize) -> String {
    format!("{:.*}", decimals, cell.parse::<f64>().unwrap())
}

fn temp_deck(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".deck").tempfile().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

#[test]
fn modal_sdof_passes_low_floor() {
    let r = vk(&["modal", "--deck", "decks/sdof.deck", "--floor-hz", "0.5"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(text_row(&r.stdout, "1")[1], "1.0");
    assert!(r.stdout.contains("PASS"));
    // One free DOF caps the mode count below the default of 10.
    assert!(r.stdout.contains("Constraint BASE: 1 modes, total mass 1.000 kg"));
}

#[test]
fn modal_cantilever_fails_floor() {
    let r = vk(&["modal", "--deck", "decks/cantilever.deck"]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.lines().any(|l| l.starts_with("f1 = ") && l.contains("FAIL")), "{}", r.stdout);
}

#[test]
fn modal_two_constraints_have_delta_column() {
    let r = vk(&["modal", "--deck", "decks/frame12.deck", "--constraint", "ROOT", "--constraint", "ROOT", "--modes", "3"]);
    assert_eq!(r.stdout.matches("Constraint ROOT").count(), 2);
    assert_eq!(r.stdout.matches("Delta (%)").count(), 1);
    let deltas: Vec<&str> = r.stdout.lines().filter(|l| l.ends_with(" 0.00")).collect();
    assert_eq!(deltas.len(), 3, "{}", r.stdout);
}

#[test]
fn modal_requires_constraint_choice() {
    let r = vk(&["modal", "--deck", "decks/r4.deck"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--constraint"));
    assert_eq!(vk(&["modal", "--deck", "decks/r4.deck", "--constraint", "Q"]).code, 2);
}

#[test]
fn modal_mass_floor_hides_small_modes() {
    let all = vk(&["modal", "--deck", "decks/cantilever.deck", "--modes", "6", "--format", "csv"]);
    let some = vk(&["modal", "--deck", "decks/cantilever.deck", "--modes", "6", "--mass-floor", "0.2", "--format", "csv"]);
    let (a, s) = (csv_rows(&all.stdout), csv_rows(&some.stdout));
    assert_eq!(a.len(), 6);
    assert_eq!(s.len(), 4, "{}", some.stdout);
}

#[test]
fn modal_csv_matches_text() {
    let args = ["modal", "--deck", "decks/frame12.deck", "--modes", "4"];
    let text = vk(&args).stdout;
    let csv = vk(&[&args[..], &["--format", "csv"]].concat()).stdout;
    for rec in csv_rows(&csv) {
        let row = text_row(&text, &rec[1]);
        assert_eq!(row[1], rounded(&rec[2], 1));
        for k in 0..3 {
            assert_eq!(row[2 + k], rounded(&rec[3 + k], 3));
        }
        assert_eq!(row[5], &rec[6]);
    }
}

#[test]
fn static_override_reproduces_table_row() {
    let r = vk(&["static", "--smax", "68.8", "--case", "X7", "--fty", "385", "--ftu", "460"]);
    assert_eq!(r.code, 0);
    let row = text_row(&r.stdout, "X7");
    assert_eq!(row[1], "68.80");
    assert_eq!(&row[5..9], ["2.73", "2.34", "15.0", "pass"]);
}

#[test]
fn static_ratio_at_limit_fails() {
    // 138/460 is exactly 30%; the requirement is strict.
    let r = vk(&["static", "--smax", "138", "--fty", "385", "--ftu", "460"]);
    assert_eq!(r.code, 1);
    assert_eq!(text_row(&r.stdout, "S1")[8], "FAIL");
    assert_eq!(vk(&["static", "--smax", "68.8"]).code, 2);
}

#[test]
fn static_zero_g_is_unbounded() {
    let mut m = parse_deck(&std::fs::read_to_string(root().join("decks/cantilever.deck")).unwrap()).unwrap();
    m.load_cases = vec![LoadCase { name: "ZERO".into(), accel_g: [0.0; 3] }];
    let deck = temp_deck(&write_deck(&m));
    let r = vk(&["static", "--deck", deck.path().to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let row = text_row(&r.stdout, "ZERO");
    assert_eq!(row[1], "0.00");
    assert!(row.contains(&"unbounded"));
}

#[test]
fn static_csv_matches_text() {
    let args = ["static", "--deck", "decks/frame12.deck"];
    let text = vk(&args).stdout;
    let csv = vk(&[&args[..], &["--format", "csv"]].concat()).stdout;
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 3);
    for rec in rows {
        let row = text_row(&text, &rec[0]);
        assert_eq!(row[1], rounded(&rec[1], 2));
        assert_eq!(row[6], rounded(&rec[5], 2));
        assert_eq!(row[7], rounded(&rec[6], 2));
        assert_eq!(row[8], rounded(&rec[7], 1));
    }
}

#[test]
fn singular_model_is_a_solver_error() {
    let deck = temp_deck("UNITS,m,kg,N\nMAT,1,70,0.3,2.7,100,200\nNODE,1,0,0,0\nNODE,2,1,0,0\nBEAM,1,1,1,2,1e-4,1e-8,1e-8,2e-8,0,0,1\nSPCSET,S\nSPC,S,1,1\nACCEL,Z,0,0,1\n");
    let r = vk(&["static", "--deck", deck.path().to_str().unwrap()]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn bad_deck_is_an_input_error() {
    let deck = temp_deck("MAT,1,71.7,0.33,2.8,385,460\nFOO,1\n");
    let r = vk(&["modal", "--deck", deck.path().to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2") && r.stderr.contains("FOO"), "{}", r.stderr);
}

#[test]
fn dof_cap_is_enforced() {
    let r = vk_env(&["modal", "--deck", "decks/frame12.deck"], &[("VIBRAKIT_MAX_DOF", "10")]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("VIBRAKIT_MAX_DOF"));
    let ok = vk_env(&["modal", "--deck", "decks/sdof.deck", "--floor-hz", "0.5"], &[("VIBRAKIT_MAX_DOF", "10")]);
    assert_eq!(ok.code, 0);
    assert_eq!(vk_env(&["modal", "--deck", "decks/sdof.deck"], &[("VIBRAKIT_MAX_DOF", "many")]).code, 2);
}

const PUNCH: [&str; 6] = [
    "boltshear",
    "--punch",
    "fixtures/bolt_forces.pch",
    "--descriptor",
    "fixtures/beam_forces.desc",
    "--groups",
];

#[test]
fn boltshear_punch_fixture_matches_hand_maxima() {
    let r = vk(&[&PUNCH[..], &["fixtures/bolt_groups.txt", "--annotations", "fixtures/annotations.txt"]].concat());
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(text_row(&r.stdout, "G1")[1..], ["2", "10.0", "29.0"]);
    assert_eq!(text_row(&r.stdout, "G2")[1..], ["2", "13.0", "25.0", "L"]);
    assert_eq!(text_row(&r.stdout, "total")[1], "4");
    assert!(r.stdout.contains("risk ranking X7: G2 (13.0) > G1 (10.0)"));
}

#[test]
fn boltshear_empty_annotations_and_case_filter() {
    let r = vk(&[&PUNCH[..], &["fixtures/bolt_groups.txt", "--annotations", "fixtures/annotations_empty.txt", "--case", "Y7"]].concat());
    assert_eq!(r.code, 0);
    assert!(!r.stdout.contains(" L"));
    assert_eq!(text_row(&r.stdout, "G2")[1..], ["2", "25.0"]);
    let missing = vk(&[&PUNCH[..], &["fixtures/bolt_groups.txt", "--case", "Z7"]].concat());
    assert_eq!(missing.code, 2);
}

#[test]
fn boltshear_punch_needs_descriptor() {
    let r = vk(&["boltshear", "--punch", "fixtures/bolt_forces.pch", "--groups", "fixtures/bolt_groups.txt"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--descriptor"));
}

#[test]
fn boltshear_csv_matches_text() {
    let args = [&PUNCH[..], &["fixtures/bolt_groups.txt"]].concat();
    let text = vk(&args).stdout;
    let csv = vk(&[&args[..], &["--format", "csv"]].concat()).stdout;
    let rows = csv_rows(&csv);
    assert_eq!(rows.len(), 4);
    for rec in rows {
        let row = text_row(&text, &rec[0]);
        let col = if &rec[2] == "X7" { 2 } else { 3 };
        assert_eq!(row[col], rounded(&rec[3], 1));
    }
}

#[test]
fn randvib_commands() {
    let g = vk(&["randvib", "grms", "--psd", "fixtures/psd_flat.csv"]);
    assert!(g.stdout.contains("Grms = 4.4497\n"), "{}", g.stdout);
    let m = vk(&["randvib", "miles", "--psd", "fixtures/psd_flat.csv", "--fn", "100", "--q", "10"]);
    assert!(m.stdout.contains("3.963 Grms, 3σ = 11.890"), "{}", m.stdout);
    let out = vk(&["randvib", "miles", "--psd", "fixtures/psd_flat.csv", "--fn", "10"]);
    assert_eq!(out.code, 2);
    let mag = vk(&["randvib", "mag", "--sensor", "fixtures/sensor_xp.csv", "--reference", "fixtures/reference_jig.csv"]);
    assert_eq!(text_row(&mag.stdout, "sensor_xp")[1..], ["75.0", "0.3300", "0.1269", "2.6"]);
}

#[test]
fn randvib_csv_matches_text() {
    let g = csv_rows(&vk(&["randvib", "grms", "--psd", "fixtures/psd_flat.csv", "--format", "csv"]).stdout);
    assert_eq!(rounded(&g[0][2], 4), "4.4497");
    let args = ["randvib", "mag", "--sensor", "fixtures/sensor_xp.csv", "--sensor", "fixtures/sensor_zp.csv", "--reference", "fixtures/reference_jig.csv"];
    let text = vk(&args).stdout;
    for rec in csv_rows(&vk(&[&args[..], &["--format", "csv"]].concat()).stdout) {
        let row = text_row(&text, &rec[0]);
        assert_eq!(row[1], rounded(&rec[1], 1));
        assert_eq!(row[4], rounded(&rec[4], 1));
    }
}

#[test]
fn magnification_rejects_zero_reference() {
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.csv");
    std::fs::write(&zero, "20,0\n2000,0\n").unwrap();
    let r = vk(&["randvib", "mag", "--sensor", "fixtures/sensor_xp.csv", "--reference", zero.to_str().unwrap()]);
    assert_eq!(r.code, 2);
}

#[test]
fn boltcheck_rule() {
    let ok = vk(&["boltcheck", "fixtures/stackup_pass.txt"]);
    assert_eq!(ok.code, 0);
    let r = vk(&["boltcheck", "fixtures/stackup.txt"]);
    assert_eq!(r.code, 1);
    assert_eq!(text_row(&r.stdout, "RAIL-2")[6], "FAIL");
    assert!(r.stdout.contains("cannot be fully inserted"));
    let csv = csv_rows(&vk(&["boltcheck", "fixtures/stackup.txt", "--format", "csv"]).stdout);
    for rec in csv {
        assert_eq!(text_row(&r.stdout, &rec[0])[3], rounded(&rec[3], 2));
    }
}

#[test]
fn simplify_examples() {
    let yp = vk(&["simplify", "--real-mass", "1.329", "--component-mass", "0.415", "--area", "0.258", "--thickness", "0.0042"]);
    assert!(yp.stdout.lines().any(|l| l.contains("1.61") && l.ends_with("g/cm³")), "{}", yp.stdout);
    let unit = vk(&["simplify", "--real-mass", "1", "--component-mass", "1", "--area", "1", "--thickness", "1", "--format", "csv"]);
    let rows = csv_rows(&unit.stdout);
    let density = rows.iter().find(|r| &r[0] == "equivalent density" && &r[1] == "kg/m³").unwrap();
    assert_eq!(&density[2], "2");
    assert_eq!(vk(&["simplify", "--real-mass", "1", "--area", "0", "--thickness", "1"]).code, 2);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.txt");
    let r = vk(&["randvib", "grms", "--psd", "fixtures/psd_flat.csv", "--out", path.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("Grms = 4.4497"));
}
