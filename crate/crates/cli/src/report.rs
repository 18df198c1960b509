use std::io::Write;

use tara_core::experiments::{ablation_study, hardware_report, leakage_experiment, AblationConfig, Detectors, LeakageConfig};
use tara_core::io::{read_config, read_dataset, read_mapped_file, to_config_string, CalibrationModel, ColumnMapping, EnvelopeArtifact};
use tara_core::tara_m::StreamConfig;
use tara_core::{BettingStrategy, Decision};

use crate::args::{ExperimentArgs, Global, HardwareArgs, OutputFormat};
use crate::output::{resolve_seed, verbose, write_pairs, CliError, Echo, Table};
use crate::Outcome;

fn f4(v: f64) -> String {
    format!("{v:.4}")
}

fn finish(table: &Table, global: &Global, csv_out: Option<&std::path::Path>) -> Result<(), CliError> {
    table.write(global.output_format, &mut std::io::stdout().lock())?;
    if let Some(path) = csv_out {
        table.save_csv(path)?;
    }
    Ok(())
}

pub fn roc(global: &Global, args: &ExperimentArgs) -> Result<Outcome, CliError> {
    let mut cfg: AblationConfig = read_config(&args.config)?;
    let seed = resolve_seed(global, Some(cfg.seed))?;
    cfg.seed = seed.0;
    cfg.shuffle_labels |= args.shuffle_labels;
    Echo::new("roc")
        .seed(seed)
        .add("config", args.config.display())
        .document(&to_config_string(&cfg)?)
        .print(&mut std::io::stdout().lock())?;

    verbose(global, "running feature ablation");
    let result = ablation_study(&cfg)?;
    let mut table = Table::new(vec!["subset", "auc", "auc_se", "tpr_at_1pct", "tpr_at_5pct", "n_quantum", "n_classical"]);
    for row in &result.rows {
        table.push(vec![
            row.subset.to_string(),
            f4(row.roc.auc),
            f4(row.auc_se),
            f4(row.roc.tpr_at_1),
            f4(row.roc.tpr_at_5),
            row.roc.n_quantum.to_string(),
            row.roc.n_classical.to_string(),
        ]);
    }
    finish(&table, global, args.csv_out.as_deref())?;
    Ok(Outcome::Done)
}

pub fn leakage(global: &Global, args: &ExperimentArgs) -> Result<Outcome, CliError> {
    let mut cfg: LeakageConfig = read_config(&args.config)?;
    let seed = resolve_seed(global, Some(cfg.seed))?;
    cfg.seed = seed.0;
    cfg.shuffle_labels |= args.shuffle_labels;
    Echo::new("leakage")
        .seed(seed)
        .add("config", args.config.display())
        .document(&to_config_string(&cfg)?)
        .print(&mut std::io::stdout().lock())?;

    verbose(global, "running leakage experiment");
    let r = leakage_experiment(&cfg)?;
    let mut table = Table::new(vec!["condition", "auc", "auc_se", "cohens_d", "tpr_at_5pct"]);
    for (name, c) in [("same", &r.same), ("cross", &r.cross)] {
        table.push(vec![name.to_string(), f4(c.roc.auc), f4(c.auc_se), f4(c.cohens_d), f4(c.roc.tpr_at_5)]);
    }
    table.push(vec!["inflation_pp".to_string(), format!("{:.1}", r.inflation), String::new(), String::new(), String::new()]);
    finish(&table, global, args.csv_out.as_deref())?;
    Ok(Outcome::Done)
}

pub fn hardware(global: &Global, args: &HardwareArgs) -> Result<Outcome, CliError> {
    let seed = resolve_seed(global, None)?;
    let mut stdout = std::io::stdout().lock();
    let mut echo = Echo::new("hardware-report");
    echo.seed(seed).add("input", args.input.display());
    if let Some(m) = &args.mapping {
        echo.add("mapping", m.display());
    }
    if let Some(c) = &args.calibration {
        echo.add("calibration", c.display())
            .add("alpha", args.alpha)
            .add("lambda", args.lambda)
            .add("set_alpha", args.set_alpha);
    }
    if let Some(m) = &args.model {
        echo.add("model", m.display());
    }
    echo.print(&mut stdout)?;

    let records = match &args.mapping {
        Some(m) => read_mapped_file(&args.input, &ColumnMapping::read(m)?)?,
        None => read_dataset(&args.input)?.records,
    };
    verbose(global, format!("read {} trials from {}", records.len(), args.input.display()));
    let cal = args.calibration.as_ref().map(CalibrationModel::read).transpose()?;
    let env = args.model.as_ref().map(EnvelopeArtifact::read).transpose()?;
    let detectors = cal.as_ref().map(|cal| Detectors {
        scorer: &cal.scorer,
        reference_pvalues: &cal.reference_pvalues,
        envelope: env.as_ref().map(|e| (&e.envelope, e.subset)),
        ks_alpha: args.alpha,
        set_alpha: args.set_alpha,
        stream: StreamConfig { alpha: args.alpha, lambda: args.lambda, strategy: BettingStrategy::SignOfHistory },
        seed: seed.0,
    });
    let report = hardware_report(&records, detectors.as_ref())?;
    match global.output_format {
        OutputFormat::Table => write!(stdout, "{}", report.render_table())?,
        OutputFormat::Csv => write_pairs(&report.rows(), OutputFormat::Csv, &mut stdout)?,
    }
    if let Some(path) = &args.csv_out {
        let mut t = Table::new(vec!["key", "value"]);
        for (k, v) in report.rows() {
            t.push(vec![k, v]);
        }
        t.save_csv(path)?;
    }
    let batch_quantum = report.batch.as_ref().is_some_and(|b| b.decision() == Decision::Quantum);
    let stream_quantum = report.stream.as_ref().is_some_and(|s| s.detected);
    Ok(match (&report.batch, batch_quantum || stream_quantum) {
        (None, _) => Outcome::Done,
        (Some(_), true) => Outcome::Quantum,
        (Some(_), false) => Outcome::Classical,
    })
}
