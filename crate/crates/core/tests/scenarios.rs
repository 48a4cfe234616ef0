use std::fs;
use std::path::Path;

use nhscatter::scenario::{
    list_presets, load_scenario, run_batch, Resolved, ScenarioConfig, PRESETS,
};
use nhscatter::Error;

fn out_override(dir: &Path) -> String {
    format!("outputs.directory=\"{}\"", dir.display())
}

#[test]
fn every_preset_resolves() {
    assert_eq!(list_presets().len(), PRESETS.len());
    for p in PRESETS {
        let s = load_scenario(p.name, &[]).unwrap_or_else(|e| panic!("{}: {e}", p.name));
        s.config
            .resolve(&s.base_dir)
            .unwrap_or_else(|e| panic!("{}: {e}", p.name));
        // round-trips through TOML
        let again = ScenarioConfig::from_toml_str(&s.config.to_toml_string()).unwrap();
        assert_eq!(again.to_toml_string(), s.config.to_toml_string());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let shrink = [
        "grid.n=1024",
        "plan.total_time=20.0",
        "grid.x_min=-256.0",
        "grid.x_max=256.0",
    ];
    let mut texts = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let mut o: Vec<String> = shrink.iter().map(|s| s.to_string()).collect();
        o.push(out_override(&dir));
        let report = load_scenario("fig2d", &o).unwrap().run().unwrap();
        let mut csvs: Vec<(String, Vec<u8>)> = report
            .files
            .iter()
            .filter(|f| f.extension().is_some_and(|e| e == "csv"))
            .map(|f| {
                (
                    f.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(f).unwrap(),
                )
            })
            .collect();
        csvs.sort();
        assert!(csvs.len() >= 2);
        texts.push(csvs);
    }
    assert_eq!(texts[0], texts[1]);
}

#[test]
fn time_domain_outputs_have_expected_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let o = [out_override(tmp.path()), "plan.total_time=4.0".into()];
    let report = load_scenario("fig3b", &o).unwrap().run().unwrap();
    let td = report.time_domain.as_ref().unwrap();
    assert_eq!(td.records, td.steps.div_ceil(2) + 1);
    assert!(!report.numerical_flag());

    let diag = fs::read_to_string(tmp.path().join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next().unwrap(), "time,norm,width,invisibility_error");
    assert_eq!(lines.count(), td.records);

    let intensity = fs::read_to_string(tmp.path().join("intensity.csv")).unwrap();
    let header = intensity.lines().next().unwrap();
    assert!(header.starts_with("t\\x,"));
    assert_eq!(header.split(',').count(), 1 + 4096 / 4);
    assert_eq!(intensity.lines().count(), 1 + td.records.div_ceil(10));

    let profile = fs::read_to_string(tmp.path().join("final_profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 1 + 4096);

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("metadata.json")).unwrap())
            .unwrap();
    assert_eq!(meta["preset"], "fig3b");
    assert_eq!(meta["config"]["modulation"]["omega"], 3.0);
    assert!(meta["time_domain"]["final_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn floquet_preset_reports_invisibility() {
    let tmp = tempfile::tempdir().unwrap();
    let o = [
        out_override(tmp.path()),
        "floquet.m_min=-12".into(),
        "floquet.m_max=12".into(),
        "floquet.n_x=2001".into(),
    ];
    let report = load_scenario("floquet-invisible", &o)
        .unwrap()
        .run()
        .unwrap();
    let fl = report.floquet.unwrap();
    assert!(fl.invisibility.invisible());
    assert!(fl.invisibility.transmission_error < 1e-6);

    let channels = fs::read_to_string(tmp.path().join("channels.csv")).unwrap();
    let mut lines = channels.lines();
    assert_eq!(
        lines.next().unwrap(),
        "m,omega_m,k_re,k_im,r_re,r_im,t_re,t_im"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 25);
    let zero = rows.iter().find(|r| r[0] == "0").unwrap();
    let t0: f64 = zero[6].parse().unwrap();
    assert!((t0 - 1.0).abs() < 1e-6);
}

#[test]
fn config_errors_name_the_field() {
    let err = load_scenario("fig2a", &["grid.bogus=1".into()]).unwrap_err();
    match err {
        Error::Config { path, .. } => assert_eq!(path, "grid.bogus"),
        other => panic!("unexpected {other}"),
    }
    let err = load_scenario("fig2a", &["grid.n=1000".into()])
        .unwrap()
        .config
        .resolve(Path::new("."))
        .unwrap_err();
    assert!(
        matches!(err, Error::Config { ref path, .. } if path.starts_with("grid")),
        "{err}"
    );
    assert!(load_scenario("no-such-preset", &[]).is_err());
    assert!(load_scenario("fig2a", &["noequals".into()]).is_err());
}

#[test]
fn sampled_potential_file_is_resolved_relative_to_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let n = 512;
    let (x0, dx) = (-64.0, 0.25);
    let mut csv = String::from("x,v\n");
    for j in 0..n {
        let x = x0 + j as f64 * dx;
        csv += &format!("{x},{}\n", 7.0 * (-x * x / 64.0f64).exp());
    }
    fs::write(tmp.path().join("well.csv"), csv).unwrap();
    let config = format!(
        r#"
mode = "time_domain"

[grid]
x_min = -64.0
x_max = 64.0
n = 512

[packet]
center = -20.0
width = 5.0

[potential]
type = "sampled"
file = "well.csv"

[modulation]
preset = "one_sided"
omega = 3.0

[plan]
total_time = 2.0

[outputs]
directory = "{}"
"#,
        tmp.path().join("out").display()
    );
    let path = tmp.path().join("scenario.toml");
    fs::write(&path, config).unwrap();
    let s = load_scenario(path.to_str().unwrap(), &[]).unwrap();
    assert!(matches!(
        s.config.resolve(&s.base_dir).unwrap(),
        Resolved::TimeDomain { .. }
    ));
    let report = s.run().unwrap();
    assert!(report.time_domain.unwrap().final_invisibility_error < 1e-2);
}

#[test]
fn batch_runs_each_preset_in_its_own_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let names = vec![
        "fig3a".to_string(),
        "fig3b".to_string(),
        "bogus".to_string(),
    ];
    let results = run_batch(&names, tmp.path(), &["plan.total_time=2.0".into()]);
    assert_eq!(results.len(), 3);
    for (name, result) in &results[..2] {
        let report = result.as_ref().unwrap();
        assert_eq!(report.directory, tmp.path().join(name));
        assert!(report.directory.join("diagnostics.csv").exists());
    }
    assert!(results[2].1.is_err());
}
