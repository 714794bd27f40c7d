use std::fs;

use evennet::io::{load_dataset, Dataset, DatasetPaths};
use evennet::synth::{generate_csbm, CsbmParams};
use evennet::Error;

fn sample() -> Dataset {
    let draw = generate_csbm(&CsbmParams::new(40, 6, 4.0, 0.5).unwrap(), 2).unwrap();
    Dataset {
        graph: draw.graph,
        features: draw.features,
        labels: draw.labels,
    }
}

#[test]
fn csv_and_binary_round_trips() {
    let data = sample();
    for binary in [false, true] {
        let dir = tempfile::tempdir().unwrap();
        let paths = data.save(dir.path(), binary).unwrap();
        assert_eq!(paths, DatasetPaths::in_dir(dir.path()));
        let back = load_dataset(&paths).unwrap();
        assert_eq!(back.graph, data.graph);
        assert_eq!(back.labels, data.labels);
        assert_eq!(back.features, data.features);
        assert_eq!(back.summary(), data.summary());
    }
}

#[test]
fn malformed_rows_name_their_line() {
    let data = sample();
    let dir = tempfile::tempdir().unwrap();
    let paths = data.save(dir.path(), false).unwrap();
    let mut text = fs::read_to_string(&paths.features).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    lines[3] = "1.0,not-a-number".into();
    text = lines.join("\n");
    fs::write(&paths.features, text).unwrap();
    match load_dataset(&paths) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn edges_beyond_labeled_nodes_are_rejected() {
    let data = sample();
    let dir = tempfile::tempdir().unwrap();
    let paths = data.save(dir.path(), false).unwrap();
    let mut edges = fs::read_to_string(&paths.edges).unwrap();
    edges.push_str("0\t40\n");
    fs::write(&paths.edges, edges).unwrap();
    assert!(matches!(
        load_dataset(&paths),
        Err(Error::IndexOutOfRange { .. })
    ));
}
