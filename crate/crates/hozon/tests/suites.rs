use hozon::config::{BodyEntry, ExperimentConfig, Samples};
use hozon::spec::{BodySpec, QSpec, QType};
use hozon::suites;

fn entry(name: &str, body: BodySpec) -> BodyEntry {
    BodyEntry {
        name: name.into(),
        body: Some(body),
        path: None,
    }
}

fn small(bodies: Vec<BodyEntry>) -> ExperimentConfig {
    ExperimentConfig {
        bodies,
        samples: Samples {
            tuples: 20_000,
            directions: 20_000,
            chords: 8,
            radial: 5_000,
            volume: 50_000,
            star_directions: 20_000,
        },
        grid: Some(24),
        ..Default::default()
    }
}

fn triangle() -> BodyEntry {
    entry(
        "triangle",
        BodySpec::Simplex {
            dim: 2,
            vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        },
    )
}

#[test]
fn rogers_shephard_rows_for_a_triangle() {
    let cfg = ExperimentConfig {
        m: vec![1, 2],
        ..small(vec![triangle()])
    };
    let r = suites::verify_rs(&cfg).unwrap();
    // an inequality row and an equality row per m
    assert_eq!(r.verdicts.len(), 4);
    assert!(r.all_pass(), "{:?}", r.verdicts);
    assert_eq!(r.table.rows[0][4], "6");
    assert_eq!(r.table.rows[1][4], "15");
}

#[test]
fn ball_passes_the_main_comparison_with_equality() {
    let cfg = small(vec![entry(
        "disk",
        BodySpec::Ball {
            dim: 2,
            center: Some(vec![0.2, 0.1]),
            radius: 1.5,
        },
    )]);
    let r = suites::verify_main(&cfg).unwrap();
    assert!(r.all_pass(), "{:?}", r.verdicts);
    assert!(r
        .verdicts
        .iter()
        .any(|v| v.check.starts_with("ratio(K) = ratio(B)")));
}

#[test]
fn inclusion_rows_skip_projection_links_without_facets() {
    let cfg = small(vec![entry("ellipse", BodySpec::RandomEllipse { seed: 3 })]);
    let r = suites::verify_inclusions(&cfg).unwrap();
    assert!(r.all_pass(), "{:?}", r.verdicts);
    assert!(!r
        .verdicts
        .iter()
        .any(|v| v.check.contains("polar projection")));
    assert!(r.verdicts.iter().any(|v| v.check.starts_with("R_p in R_q")));
}

#[test]
fn bpc_rejects_higher_order() {
    let cfg = ExperimentConfig {
        m: vec![2],
        ..small(vec![triangle()])
    };
    assert!(suites::bpc_spotcheck(&cfg).is_err());
}

#[test]
fn bpc_ball_row_is_an_equality() {
    let cfg = ExperimentConfig {
        q: QSpec::new(QType::Ball),
        p: vec![2.0],
        ..small(vec![entry(
            "disk",
            BodySpec::Ball {
                dim: 2,
                center: None,
                radius: 1.0,
            },
        )])
    };
    let r = suites::bpc_spotcheck(&cfg).unwrap();
    assert!(r.all_pass(), "{:?}", r.verdicts);
    assert_eq!(r.verdicts.len(), 2);
}

#[test]
fn steiner_needs_planar_bodies() {
    let cfg = small(vec![entry(
        "ball",
        BodySpec::Ball {
            dim: 3,
            center: None,
            radius: 1.0,
        },
    )]);
    assert!(suites::steiner_run(&cfg).is_err());
}

#[test]
fn steiner_keeps_a_ball_a_ball() {
    let cfg = ExperimentConfig {
        rounds: 3,
        ..small(vec![entry(
            "disk",
            BodySpec::Ball {
                dim: 2,
                center: None,
                radius: 1.0,
            },
        )])
    };
    let r = suites::steiner_run(&cfg).unwrap();
    let stay = r
        .verdicts
        .iter()
        .find(|v| v.check.starts_with("stays a ball"))
        .unwrap();
    assert!(stay.pass, "{stay:?}");
    // round 0 plus three rounds
    assert_eq!(r.table.rows.len(), 4);
}
