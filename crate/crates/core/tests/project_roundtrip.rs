use effprop::case_study;
use effprop::project::{load_project, save_project, ProjectFile};
use proptest::prelude::*;

#[test]
fn case_study_round_trips_bit_exact() {
    let original = case_study::project().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.json");
    save_project(&original.file, &path).unwrap();
    let reloaded = load_project(&path).unwrap();
    assert_eq!(reloaded.file, original.file);
    assert_eq!(reloaded.ndim, original.ndim);
    assert_eq!(reloaded.nsig, original.nsig);
    // saving again gives identical bytes
    let again = dir.path().join("again.json");
    save_project(&reloaded.file, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn opinion_paths_resolve_relative_to_project() {
    let p = load_project(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/small.json")).unwrap();
    assert_eq!(p.dim.unwrap().0.to_rows()[1], vec![2.0, 0.0, 2.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn floats_survive_save_and_load(values in prop::collection::vec(1e-9f64..1.0, 3)) {
        let total: f64 = values.iter().sum();
        let nsig: Vec<f64> = values.iter().map(|v| v / total).collect();
        let text = format!(
            r#"{{"factors": [
                {{"id": "a", "accessible": true, "level": "I"}},
                {{"id": "b", "accessible": true, "level": "II"}},
                {{"id": "c", "accessible": false, "level": "III"}}],
              "nsig": {{"a": {:?}, "b": {:?}, "c": {:?}}},
              "dim": [[0, {:?}, 1], [1, 0, 1], [0, 0, 0]]}}"#,
            nsig[0], nsig[1], nsig[2], values[0]
        );
        let file: ProjectFile = serde_json::from_str(&text).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        save_project(&file, &path).unwrap();
        let back = load_project(&path);
        // normalization can be off by rounding, in which case validation rejects both
        if let Ok(back) = back {
            prop_assert_eq!(back.file, file);
        }
    }
}
