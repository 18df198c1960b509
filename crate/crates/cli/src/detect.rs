use std::fs::File;
use std::io::{BufRead, BufReader, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tara_core::conformal::TieBreaking;
use tara_core::datagen::derive_seed;
use tara_core::io::{read_dataset, CalibrationModel, EnvelopeArtifact, RecordReader};
use tara_core::tara_k::{calibrate_detector, extract_features, CalibrateOptions, EnvelopeConfig, FeatureSubset};
use tara_core::tara_m::MartingaleState;
use tara_core::{BettingStrategy, Decision, TaraError};

use crate::args::{CalibrateArgs, DetectBatchArgs, DetectStreamArgs, Global, OutputFormat, StrategyArg, SubsetArg};
use crate::output::{resolve_seed, verbose, write_pairs, CliError, Echo};
use crate::Outcome;

// Seed streams, one per subcommand that draws randomness.
const CALIBRATE_STREAM: u64 = 1;
const BATCH_STREAM: u64 = 2;
const STREAM_STREAM: u64 = 3;

pub const UNSAFE_DISCLAIMER: &str = "--unsafe-paper-kelly bets with the current p-value, so wealth never \
     decreases and the reported error control does not hold; use only to reproduce published trajectories";

pub fn subset(arg: SubsetArg) -> FeatureSubset {
    match arg {
        SubsetArg::Full => FeatureSubset::Full,
        SubsetArg::CpOnly => FeatureSubset::CpOnly,
        SubsetArg::SOnly => FeatureSubset::SOnly,
        SubsetArg::ClickOnly => FeatureSubset::ClickOnly,
    }
}

pub fn calibrate(global: &Global, args: &CalibrateArgs) -> Result<Outcome, CliError> {
    let seed = resolve_seed(global, None)?;
    let options = CalibrateOptions {
        pseudo_count: args.pseudo_count,
        set_alpha: args.set_alpha,
        block_trials: args.model_out.as_ref().map(|_| args.block_trials),
        subset: subset(args.subset),
        envelope: EnvelopeConfig { target_fpr: args.target_fpr, ..EnvelopeConfig::default() },
    };
    let mut stdout = std::io::stdout().lock();
    let mut echo = Echo::new("calibrate");
    echo.seed(seed)
        .add("input", args.input.display())
        .add("out", args.out.display())
        .add("pseudo_count", args.pseudo_count)
        .add("set_alpha", args.set_alpha);
    if let Some(m) = &args.model_out {
        echo.add("model_out", m.display())
            .add("block_trials", args.block_trials)
            .add("subset", options.subset)
            .add("target_fpr", args.target_fpr);
    }
    echo.print(&mut stdout)?;

    let data = read_dataset(&args.input)?;
    verbose(global, format!("read {} trials from {}", data.records.len(), args.input.display()));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed.0, CALIBRATE_STREAM, 0));
    let art = calibrate_detector(&data.records, &options, &mut rng)?;

    let mut pairs = vec![
        ("trials".to_string(), data.records.len().to_string()),
        ("reference_pvalues".to_string(), art.reference_pvalues.len().to_string()),
    ];
    CalibrationModel { scorer: art.scorer, reference_pvalues: art.reference_pvalues }.write(&args.out)?;
    if let (Some(path), Some(envelope)) = (&args.model_out, art.envelope) {
        pairs.push(("envelope_threshold".to_string(), envelope.threshold.to_string()));
        EnvelopeArtifact { subset: art.subset, envelope }.write(path)?;
    }
    write_pairs(&pairs, global.output_format, &mut stdout)?;
    Ok(Outcome::Done)
}

pub fn detect_batch(global: &Global, args: &DetectBatchArgs) -> Result<Outcome, CliError> {
    let seed = resolve_seed(global, None)?;
    let mut stdout = std::io::stdout().lock();
    Echo::new("detect-batch")
        .seed(seed)
        .add("model", args.model.display())
        .add("calibration", args.calibration.display())
        .add("input", args.input.display())
        .add("alpha", args.alpha)
        .add("set_alpha", args.set_alpha)
        .print(&mut stdout)?;

    let cal = CalibrationModel::read(&args.calibration)?;
    let env = EnvelopeArtifact::read(&args.model)?;
    let data = read_dataset(&args.input)?;
    verbose(global, format!("read {} trials from {}", data.records.len(), args.input.display()));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed.0, BATCH_STREAM, 0));
    let extracted = extract_features(&data.records, &cal.scorer, args.set_alpha, TieBreaking::Randomized, &mut rng)?;
    let report = tara_core::detect_batch(
        &env.envelope,
        env.subset,
        &cal.reference_pvalues,
        &extracted.features,
        &extracted.pvalues,
        args.alpha,
    )?;
    let pairs: Vec<(String, String)> = report.key_values().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    write_pairs(&pairs, global.output_format, &mut stdout)?;
    Ok(match report.decision {
        Decision::Quantum => Outcome::Quantum,
        Decision::Classical => Outcome::Classical,
    })
}

pub fn detect_stream(global: &Global, args: &DetectStreamArgs) -> Result<Outcome, CliError> {
    let seed = resolve_seed(global, None)?;
    let strategy = if args.unsafe_paper_kelly {
        BettingStrategy::UnsafePaperKelly
    } else {
        match args.strategy {
            StrategyArg::SignOfHistory => BettingStrategy::SignOfHistory,
            StrategyArg::Mixture => BettingStrategy::Mixture,
        }
    };
    let mut state = MartingaleState::new(args.lambda, args.alpha, strategy)?;
    let input = args.input.as_ref().map_or_else(|| "stdin".to_string(), |p| p.display().to_string());

    let mut stdout = std::io::stdout().lock();
    let mut echo = Echo::new("detect-stream");
    echo.seed(seed)
        .add("calibration", args.calibration.display())
        .add("input", &input)
        .add("alpha", args.alpha)
        .add("lambda", args.lambda)
        .add("strategy", strategy);
    if !strategy.is_valid() {
        echo.add("warning", UNSAFE_DISCLAIMER);
        eprintln!("warning: {UNSAFE_DISCLAIMER}");
    }
    echo.print(&mut stdout)?;

    let cal = CalibrationModel::read(&args.calibration)?;
    let reader: Box<dyn BufRead> = match &args.input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|source| TaraError::Io { path: p.display().to_string(), source })?,
        )),
        None => Box::new(std::io::stdin().lock()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed.0, STREAM_STREAM, 0));
    let sep = match global.output_format {
        OutputFormat::Table => " ",
        OutputFormat::Csv => ",",
    };
    writeln!(stdout, "t{sep}p{sep}beta{sep}log_wealth")?;
    for record in RecordReader::new(reader) {
        let p = cal.scorer.pvalue(&record?, TieBreaking::Randomized, &mut rng)?;
        let step = state.update(p)?;
        writeln!(stdout, "{}{sep}{:.6}{sep}{:+.4}{sep}{:.6}", step.t, step.p, step.beta, step.log_wealth)?;
        if state.crossed() {
            break;
        }
    }
    let detected = state.crossed();
    let decision = if detected { Decision::Quantum } else { Decision::Classical };
    let verdict = format!(
        "decision={decision} steps={} log_wealth={:.6} log_threshold={:.6} valid={}",
        state.t(),
        state.log_wealth(),
        state.log_threshold(),
        strategy.is_valid()
    );
    match global.output_format {
        OutputFormat::Table => writeln!(stdout, "{verdict}")?,
        OutputFormat::Csv => writeln!(stdout, "# {verdict}")?,
    }
    verbose(global, format!("processed {} trials from {input}", state.t()));
    Ok(if detected { Outcome::Quantum } else { Outcome::Classical })
}
