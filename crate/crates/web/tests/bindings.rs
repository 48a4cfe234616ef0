use nhscatter_web::{channel_table, drive, effective_curve, packet_run};

#[test]
fn unknown_drive_is_an_error() {
    assert!(drive("square", 1.0).is_err());
    assert!(packet_run("square", 0.9, 7.0, -80.0, 25.0, 0.5, 10.0).is_err());
}

#[test]
fn one_sided_packet_passes_unscattered() {
    let run = packet_run("one_sided", 0.9, 7.0, -80.0, 25.0, 0.5, 180.0).unwrap();
    assert_eq!(run.intensity.len(), run.times.len() * run.xs.len());
    assert!(run.intensity.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(!run.runaway);
    assert!(run.invisibility_error < 1e-2, "{}", run.invisibility_error);
    assert!((run.norm.last().unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn channel_table_shows_invisibility_and_reflection() {
    let inv = channel_table("one_sided", 0.9, 7.0, 0.25, 10, 1201).unwrap();
    assert!(inv.invisible);
    assert_eq!(inv.rows.len(), 21);
    let cos = channel_table("cos", 0.9, 7.0, 0.25, 10, 1201).unwrap();
    assert!(!cos.invisible);
    let r0 = cos.rows.iter().find(|r| r.m == 0).unwrap().r;
    assert!(r0[0].hypot(r0[1]) > 0.01);
    assert!((cos.flux - 1.0).abs() < 1e-4);
}

#[test]
fn effective_curve_vanishes_for_one_sided_drive() {
    let cos = effective_curve("cos", 0.9, 7.0).unwrap();
    assert!((cos.scale[0] - 1.0 / (2.0 * 0.81)).abs() < 1e-12);
    assert!(cos.re.iter().cloned().fold(0.0, f64::max) > 0.3);
    let one = effective_curve("one_sided", 0.9, 7.0).unwrap();
    assert!(one.re.iter().chain(&one.im).all(|v| v.abs() < 1e-14 * 49.0));
}
