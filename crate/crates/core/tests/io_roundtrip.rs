use tara_core::datagen::{generate, Angles, GeneratorConfig, ModelConfig};
use tara_core::io::{
    read_dataset, read_generator_config, read_mapped_file, to_config_string, write_dataset, CalibrationModel, ColumnMapping,
    EnvelopeArtifact, Metadata,
};
use tara_core::tara_k::{calibrate_detector, CalibrateOptions};
use tara_core::{chsh_s, summarize};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn data_dir() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../data").to_string()
}

#[test]
fn dataset_round_trip_with_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let config = GeneratorConfig::new(ModelConfig::QuantumSinglet { visibility: 0.9, eta: 0.8, angles: Angles::default() }, 2500, 17);
    let cfg_path = dir.path().join("gen.toml");
    std::fs::write(&cfg_path, to_config_string(&config).unwrap()).unwrap();
    let config = read_generator_config(&cfg_path).unwrap();
    let data = generate(&config).unwrap();
    assert_eq!(data.records.len(), 10_000);

    let mut meta = Metadata::default();
    meta.insert("label", data.label);
    meta.config = Some(std::fs::read_to_string(&cfg_path).unwrap());
    let path = dir.path().join("d.csv");
    write_dataset(&path, &data.records, &meta).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.records, data.records);
    let echoed: GeneratorConfig = back.metadata.parse_config().unwrap().unwrap();
    assert_eq!(echoed, config);
    assert_eq!(generate(&echoed).unwrap().records, back.records);
}

#[test]
fn model_files_round_trip_exactly() {
    let lhv = ModelConfig::LhvMixture { weights: Default::default() };
    let records = generate(&GeneratorConfig::new(lhv, 24_000, 5)).unwrap().records;
    let options = CalibrateOptions { block_trials: Some(200), ..CalibrateOptions::default() };
    let art = calibrate_detector(&records, &options, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();

    let cal = CalibrationModel { scorer: art.scorer.clone(), reference_pvalues: art.reference_pvalues.clone() };
    let text = cal.to_toml().unwrap();
    let back = CalibrationModel::from_toml(&text).unwrap();
    assert_eq!(back, cal);
    assert_eq!(back.to_toml().unwrap(), text);

    let env = EnvelopeArtifact { subset: art.subset, envelope: art.envelope.unwrap() };
    let text = env.to_toml().unwrap();
    let back = EnvelopeArtifact::from_toml(&text).unwrap();
    assert_eq!(back, env);
}

#[test]
fn model_file_rejects_wrong_version_and_kind() {
    assert!(CalibrationModel::from_toml("schema_version = 2\nkind = \"calibration\"\n").is_err());
    let env = "schema_version = 1\nkind = \"calibration\"\nsubset = \"full\"\ntarget_fpr = 0.05\nthreshold = 1.0\nridge = 0.0\nlocation = [0.0]\nscale = [1.0]\ncenter = [0.0]\nprecision = [1.0]\n";
    assert!(EnvelopeArtifact::from_toml(env).is_err());
    let ok = env.replace("kind = \"calibration\"", "kind = \"envelope\"").replace("\"full\"", "\"s-only\"");
    assert!(EnvelopeArtifact::from_toml(&ok).is_ok());
}

#[test]
fn fixture_and_counts_adapter_agree() {
    let direct = read_dataset(format!("{}/ionq_equivalent.csv", data_dir())).unwrap().records;
    let mapping = ColumnMapping::read(format!("{}/ionq_counts.mapping.toml", data_dir())).unwrap();
    let mapped = read_mapped_file(format!("{}/ionq_counts.csv", data_dir()), &mapping).unwrap();
    let a = summarize::<f64>(&direct).unwrap();
    let b = summarize::<f64>(&mapped).unwrap();
    assert_eq!(a.correlators, b.correlators);
    assert_eq!(b.click_rates.p_empty, 0.0);
    assert_eq!(format!("{:.3}", chsh_s(&b)), "2.716");
}
