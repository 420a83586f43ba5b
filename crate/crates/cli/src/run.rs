use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use pensemble_core::datagen::{
    gen_hyperplane, gen_sea, load_csv, scan_csv, write_csv, HyperplaneConfig, SeaConfig, SEA_FEATURES,
};
use pensemble_core::eval::{read_metrics, run_cv, run_holdout, write_metrics, EvalMode, EvalProtocol, RunMetrics};
use pensemble_core::{Error, Sample, StreamConfig};

use crate::args::{GenArgs, Generator, ReportArgs, RunArgs};

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

fn sea_config(n: Option<usize>, seed: u64, noise: f64, minority: Option<f64>) -> SeaConfig {
    let base = SeaConfig::default();
    SeaConfig {
        n_total: n.unwrap_or(base.n_total),
        minority_frac: match minority {
            Some(0.0) => None,
            Some(f) => Some(f),
            None => base.minority_frac,
        },
        noise_frac: noise,
        seed,
        ..base
    }
}

fn hyperplane_config(n: Option<usize>, d: Option<usize>, seed: u64, noise: f64) -> HyperplaneConfig {
    let base = HyperplaneConfig::default();
    let n_total = n.unwrap_or(base.n_total);
    HyperplaneConfig {
        n_total,
        d: d.unwrap_or(base.d),
        // keep the drift at the same relative position for shorter streams
        drift_start: if n_total == base.n_total {
            base.drift_start
        } else {
            n_total / 3
        },
        noise_frac: noise,
        seed,
        ..base
    }
}

pub fn gen(args: GenArgs) -> Result<()> {
    let samples: Box<dyn Iterator<Item = Sample>> = match args.kind {
        Generator::Sea => Box::new(gen_sea(&sea_config(args.n, args.seed, args.noise, args.minority))?),
        Generator::Hyperplane => Box::new(gen_hyperplane(&hyperplane_config(
            args.n, args.d, args.seed, args.noise,
        ))?),
    };
    let n = match &args.out {
        Some(path) => write_csv(BufWriter::new(File::create(path)?), samples)?,
        None => write_csv(io::stdout().lock(), samples)?,
    };
    if let Some(path) = &args.out {
        eprintln!("wrote {n} samples to {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct Timing {
    rt: f64,
}

pub fn timing_path(metrics: &Path) -> PathBuf {
    let mut name = metrics.as_os_str().to_owned();
    name.push(".timing.json");
    PathBuf::from(name)
}

enum Source {
    Csv { path: PathBuf, rows: usize },
    Generated { kind: Generator, data: Vec<Sample> },
}

pub fn run(args: RunArgs) -> Result<()> {
    let args = match &args.config {
        Some(path) => {
            let file = RunArgs::load_file(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            args.over(file)
        }
        None => args,
    };
    let seed = args.seed.unwrap_or(0);
    let noise = args.noise.unwrap_or(0.0);

    let (source, dim, n_classes) = match (&args.data, args.gen) {
        (Some(path), None) => {
            let shape = scan_csv(path)?;
            if shape.n_classes < 2 {
                return Err(Error::InsufficientData("data file needs at least two classes".into()).into());
            }
            (
                Source::Csv {
                    path: path.clone(),
                    rows: shape.rows,
                },
                shape.dim,
                shape.n_classes,
            )
        }
        // generated up front so rt excludes generation
        (None, Some(kind @ Generator::Sea)) => {
            let data = gen_sea(&sea_config(args.n, seed, noise, None))?.collect();
            (Source::Generated { kind, data }, SEA_FEATURES, 2)
        }
        (None, Some(kind @ Generator::Hyperplane)) => {
            let cfg = hyperplane_config(args.n, None, seed, noise);
            let data = gen_hyperplane(&cfg)?.collect();
            (Source::Generated { kind, data }, cfg.d, 2)
        }
        (Some(_), Some(_)) => return Err(config_err("--data and --gen are mutually exclusive")),
        (None, None) => return Err(config_err("one of --data or --gen is required")),
    };

    // protocol defaults per source: (chunk, stamps, train, test, mode)
    let (chunk, stamps, train, test, mode) = match &source {
        Source::Generated {
            kind: Generator::Sea, ..
        } => (250, 200, 250, 250, EvalMode::Holdout),
        Source::Generated {
            kind: Generator::Hyperplane,
            ..
        } => (1000, 100, 1000, 200, EvalMode::Holdout),
        Source::Csv { .. } => (250, 0, 250, 250, EvalMode::Cv),
    };
    let mode = args.mode.map(EvalMode::from).unwrap_or(mode);
    let mut cfg = StreamConfig::new(dim, n_classes);
    cfg.chunk_size = args.chunk.unwrap_or(chunk);
    cfg.theta = args.theta.unwrap_or(cfg.theta);
    cfg.delta_rel = args.delta_rel.unwrap_or(cfg.delta_rel);
    cfg.delta_abs = args.delta_abs;
    cfg.alpha_warn = args.alpha_warn.unwrap_or(cfg.alpha_warn);
    cfg.alpha_drift = args.alpha_drift.unwrap_or(cfg.alpha_drift);
    cfg.penalty = args.p.unwrap_or(cfg.penalty);
    cfg.ofs_b = args.ofs_b.unwrap_or(dim);
    cfg.al_conjunction = args.al_conjunction;
    cfg.seed = seed;
    if let Some(b) = args.base {
        cfg.base_kind = b.into();
    }
    cfg.validate()?;

    let train = args.train.unwrap_or(train);
    let test = args.test.unwrap_or(test);
    let protocol = match mode {
        EvalMode::Holdout => {
            let stamps = match (args.stamps, &source) {
                (Some(s), _) => s,
                (None, Source::Csv { rows, .. }) => rows / (train + test).max(1),
                (None, _) => stamps,
            };
            EvalProtocol::holdout(stamps, train, test)
        }
        EvalMode::Cv => EvalProtocol::cv(args.folds.unwrap_or(10)),
    };
    protocol.validate()?;

    let start = Instant::now();
    let metrics = match (mode, source) {
        (EvalMode::Holdout, Source::Generated { data, .. }) => run_holdout(data.into_iter().map(Ok), &cfg, &protocol)?,
        (EvalMode::Cv, Source::Generated { data, .. }) => run_cv(&data, &cfg, protocol.folds)?,
        (EvalMode::Holdout, Source::Csv { path, .. }) => {
            let stream = load_csv(&path)?.with_max_class(n_classes);
            run_holdout(stream, &cfg, &protocol)?
        }
        (EvalMode::Cv, Source::Csv { path, .. }) => {
            let data = load_csv(&path)?
                .with_max_class(n_classes)
                .collect::<pensemble_core::Result<Vec<_>>>()?;
            run_cv(&data, &cfg, protocol.folds)?
        }
    };
    let rt = start.elapsed().as_secs_f64();

    if let Some(path) = &args.metrics {
        write_metrics(BufWriter::new(File::create(path)?), &metrics)?;
        serde_json::to_writer(File::create(timing_path(path))?, &Timing { rt })?;
    }
    print_summary(&mut io::stdout().lock(), &metrics, Some(rt))?;
    Ok(())
}

pub fn print_summary<W: Write>(w: &mut W, m: &RunMetrics, rt: Option<f64>) -> io::Result<()> {
    writeln!(w, "mode     {}", m.mode)?;
    writeln!(w, "cr       {:.4} ± {:.4}", m.cr, m.cr_std)?;
    writeln!(w, "fr       {:.2} ± {:.2}", m.fr, m.fr_std)?;
    writeln!(w, "bc       {:.2} ± {:.2}", m.bc, m.bc_std)?;
    writeln!(w, "np       {:.1} ± {:.1}", m.np, m.np_std)?;
    writeln!(
        w,
        "ts       {:.1} ± {:.1} ({:.1}% of training samples)",
        m.ts,
        m.ts_std,
        100.0 * m.ts_frac
    )?;
    if let Some(rt) = rt {
        writeln!(w, "rt       {rt:.2} s")?;
    }
    writeln!(w, "samples  {}", m.samples)?;
    writeln!(w, "drifts   {}", m.drifts)?;
    writeln!(w, "merges   {}", m.merges)
}

pub fn report(args: ReportArgs) -> Result<()> {
    let m = read_metrics(BufReader::new(File::open(&args.metrics)?))?;
    let rt = File::open(timing_path(&args.metrics))
        .ok()
        .and_then(|f| serde_json::from_reader::<_, Timing>(BufReader::new(f)).ok())
        .map(|t| t.rt);
    let out = &mut io::stdout().lock();
    if !args.summary {
        writeln!(
            out,
            "{:>5} {:>5} {:>8} {:>6} {:>4} {:>4} {:>6} {:>5} {:>6} {:>6} {:>6}",
            "unit", "chunk", "pos", "cr", "fr", "bc", "np", "ts", "theta", "drift", "merge"
        )?;
        for c in &m.chunks {
            writeln!(
                out,
                "{:>5} {:>5} {:>8} {:>6.3} {:>4} {:>4} {:>6} {:>5} {:>6.3} {:>6} {:>6}",
                c.unit, c.chunk, c.stream_pos, c.cr, c.fr, c.bc, c.np, c.ts, c.theta_end, c.drifts, c.merges
            )?;
        }
        writeln!(out)?;
    }
    print_summary(out, &m, rt)?;
    Ok(())
}
