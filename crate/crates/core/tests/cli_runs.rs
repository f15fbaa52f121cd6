use std::fs;
use std::path::Path;

use worldline_piston::cli::{run, EXIT_CONFIG, EXIT_IO};
use worldline_piston::estimator::ENERGY_CSV_HEADER;

fn piston(args: &[&str]) -> Result<(String, String), i32> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["piston"];
    full.extend_from_slice(args);
    run(full, &mut out, &mut err).map_err(|e| e.exit_code())?;
    Ok((String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap()))
}

fn generate(dir: &Path, name: &str, seed: &str) -> String {
    let path = dir.join(name).display().to_string();
    piston(&["generate", "--seed", seed, "--n-points", "1000", "--hulls", "60", "--cache", &path])
        .unwrap();
    path
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.wlhc", "11");
    let b = generate(dir.path(), "b.wlhc", "11");
    let c = generate(dir.path(), "c.wlhc", "12");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn sweep_csv_parses_and_ignores_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cache = generate(dir.path(), "h.wlhc", "5");
    let args = |threads: &'static str| {
        vec![
            "sweep",
            "--cache",
            cache.as_str(),
            "--a-over-r",
            "0.05,0.1",
            "--R-over-r",
            "1,1.02,flat",
            "--threads",
            threads,
        ]
    };
    let (one, _) = piston(&args("1")).unwrap();
    let (three, _) = piston(&args("3")).unwrap();
    assert_eq!(one, three);

    let mut reader = csv::Reader::from_reader(one.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ENERGY_CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let e: f64 = row[2].parse().unwrap();
        assert!(e <= 0.0);
        assert_eq!(&row[7], "60");
        assert_eq!(&row[8], "1000");
        assert_eq!(&row[9], "5");
    }
    assert_eq!(&rows[5][1], "inf");
    assert!(rows[5][1].parse::<f64>().unwrap().is_infinite());
}

#[test]
fn output_file_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cache = generate(dir.path(), "h.wlhc", "5");
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("e.csv");
    fs::write(
        &cfg,
        format!("# single point\ncache = {cache}\na_over_r = 0.1\nR_over_r = 1.25\nquad = fixed:48\n"),
    )
    .unwrap();
    let cfg_s = cfg.display().to_string();
    let out_s = out.display().to_string();
    let (stdout, _) = piston(&["energy", "--config", &cfg_s, "--out", &out_s]).unwrap();
    assert!(stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("0.1,1.25,"));
    // flags override the file
    let (stdout, _) = piston(&["energy", "--config", &cfg_s, "--flat-head"]).unwrap();
    assert!(stdout.lines().nth(1).unwrap().starts_with("0.1,inf,"));
}

#[test]
fn compare_table_leads_with_periodic_orbits() {
    let dir = tempfile::tempdir().unwrap();
    let cache = generate(dir.path(), "h.wlhc", "5");
    let (out, _) = piston(&["compare", "--cache", &cache]).unwrap();
    let mut lines = out.lines().skip(1);
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert!((first[1].parse::<f64>().unwrap() - 0.044239).abs() < 1e-6);
    assert_eq!(lines.count(), 3);
    assert_eq!(piston(&["compare", "--cache", &cache, "--flat-head"]), Err(EXIT_CONFIG));
}

#[test]
fn reference_and_moments_reports() {
    let (out, _) = piston(&["reference", "--a-over-r", "1", "--R-over-r", "1"]).unwrap();
    assert!(out.contains("semiclassical force = -3.3157"), "{out}");
    assert!(out.contains("periodic orbit energy = 4.42389"), "{out}");
    let (out, _) = piston(&["reference", "--a-over-r", "1", "--flat-head"]).unwrap();
    let value = |key: &str| {
        out.lines()
            .find(|l| l.starts_with(key))
            .and_then(|l| l.split('=').nth(1))
            .unwrap()
            .trim()
            .to_string()
    };
    assert_eq!(value("parallel plates"), value("PFA"));
    let (out, _) = piston(&["moments", "--n-points", "200", "--hulls", "500"]).unwrap();
    assert!(out.contains("continuum = 3.246970"));
    assert!(out.contains("z-score"));
}

#[test]
fn failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cache = generate(dir.path(), "h.wlhc", "5");
    assert_eq!(piston(&["energy", "--a-over-r", "-1"]), Err(EXIT_CONFIG));
    assert_eq!(piston(&["energy", "--quad", "gauss"]), Err(EXIT_CONFIG));
    assert_eq!(piston(&["bogus"]), Err(EXIT_CONFIG));
    assert_eq!(
        piston(&["energy", "--a-over-r", "0.1", "--cache", "/nonexistent/cache.wlhc"]),
        Err(EXIT_IO)
    );
    // cache and config disagree on n, on the seed, or on the hull count
    for extra in [["--n-points", "500"], ["--seed", "6"], ["--hulls", "61"]] {
        let mut args = vec!["energy", "--a-over-r", "0.1", "--cache", cache.as_str()];
        args.extend(extra);
        assert_eq!(piston(&args), Err(EXIT_CONFIG), "{extra:?}");
    }
    let bad = dir.path().join("bad.wlhc");
    fs::write(&bad, b"not a cache").unwrap();
    let bad_s = bad.display().to_string();
    assert_eq!(piston(&["energy", "--a-over-r", "0.1", "--cache", &bad_s]), Err(EXIT_IO));
    let missing = dir.path().join("missing.cfg").display().to_string();
    assert_eq!(piston(&["energy", "--config", &missing]), Err(EXIT_IO));
}

#[test]
fn empty_generate_warns_and_help_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.wlhc").display().to_string();
    let (_, err) = piston(&["generate", "--hulls", "0", "--n-points", "100", "--cache", &path]).unwrap();
    assert!(err.contains("warning"));
    assert_eq!(fs::read(&path).unwrap().len(), 28);
    assert!(piston(&["--help"]).unwrap().0.contains("sweep"));
}
