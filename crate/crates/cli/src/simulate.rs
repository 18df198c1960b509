use std::io::Write;

use tara_core::datagen::{generate, Angles, MixtureWeights, Schedule};
use tara_core::io::{read_config, to_config_string, write_dataset, Metadata};
use tara_core::{GeneratorConfig, ModelConfig};

use crate::args::{Global, ModelKind, ScheduleArg, SimulateArgs};
use crate::output::{resolve_seed, usage, verbose, CliError, Echo};
use crate::Outcome;

pub fn run(global: &Global, args: &SimulateArgs) -> Result<Outcome, CliError> {
    let mut config = match &args.config {
        Some(path) => {
            let mut cfg: GeneratorConfig = read_config(path)?;
            if let Some(t) = args.trials {
                cfg.trials_per_context = t;
            }
            cfg
        }
        None => {
            let model = model_from_flags(args)?;
            let schedule = match args.schedule {
                ScheduleArg::RoundRobin => Schedule::RoundRobin,
                ScheduleArg::Uniform => Schedule::Uniform,
            };
            GeneratorConfig { seed: None, trials_per_context: args.trials.unwrap_or(0), schedule, model }
        }
    };
    let seed = resolve_seed(global, config.seed)?;
    // A config file must carry its own seed unless the flag or TARA_SEED supplies one.
    if args.config.is_none() || seed.1 != "default" {
        config.seed = Some(seed.0);
    }
    config.validate()?;
    let resolved = to_config_string(&config)?;

    let mut stdout = std::io::stdout().lock();
    let mut echo = Echo::new("simulate");
    echo.seed(seed).add("out", args.out.display()).document(&resolved);
    echo.print(&mut stdout)?;

    verbose(global, format!("generating {} trials per context", config.trials_per_context));
    let data = generate(&config)?;
    let mut meta = Metadata::default();
    meta.insert("label", data.label);
    meta.insert("model", config.model.name());
    meta.insert("seed", seed.0);
    meta.config = Some(resolved);
    write_dataset(&args.out, &data.records, &meta)?;
    writeln!(stdout, "wrote {} trials ({}) to {}", data.records.len(), data.label, args.out.display())?;
    Ok(Outcome::Done)
}

fn model_from_flags(args: &SimulateArgs) -> Result<ModelConfig, CliError> {
    let kind = args.model.ok_or_else(|| usage("--model is required without --config"))?;
    let allowed: &[&str] = match kind {
        ModelKind::LhvDeterministic => &["strategy"],
        ModelKind::LhvMixture => &["bias"],
        ModelKind::LhvDetection => &["eta"],
        ModelKind::LhvMemory => &["bias", "order"],
        ModelKind::LhvCommunication => &["bias", "kappa"],
        ModelKind::QuantumSinglet => &["eta", "visibility"],
        ModelKind::PrBox => &[],
    };
    let given = [
        ("eta", args.eta.is_some()),
        ("kappa", args.kappa.is_some()),
        ("visibility", args.visibility.is_some()),
        ("bias", args.bias.is_some()),
        ("order", args.order.is_some()),
        ("strategy", args.strategy.is_some()),
    ];
    for (flag, present) in given {
        if present && !allowed.contains(&flag) {
            return Err(usage(format!("--{flag} does not apply to this model")));
        }
    }
    let weights = MixtureWeights::Biased { bias: args.bias.unwrap_or(1.0) };
    Ok(match kind {
        ModelKind::LhvDeterministic => {
            let s = args.strategy.clone().unwrap_or_else(|| vec![1, 1, 1, -1]);
            let strategy: [i8; 4] = s.try_into().map_err(|_| usage("--strategy needs four values a0,a1,b0,b1"))?;
            ModelConfig::LhvDeterministic { strategy }
        }
        ModelKind::LhvMixture => ModelConfig::LhvMixture { weights },
        ModelKind::LhvDetection => ModelConfig::LhvDetection { eta: args.eta.unwrap_or(1.0), angles: Angles::default() },
        ModelKind::LhvMemory => ModelConfig::LhvMemory { weights, order: args.order.unwrap_or(1) },
        ModelKind::LhvCommunication => ModelConfig::LhvCommunication { kappa: args.kappa.unwrap_or(0.0), weights },
        ModelKind::QuantumSinglet => ModelConfig::QuantumSinglet {
            visibility: args.visibility.unwrap_or(1.0),
            eta: args.eta.unwrap_or(1.0),
            angles: Angles::default(),
        },
        ModelKind::PrBox => ModelConfig::PrBox {},
    })
}
