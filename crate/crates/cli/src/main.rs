use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use infprim::bp::{bp_run, marginal_to_belief, marginals_csv, BpParams};
use infprim::experiments::{fig2, fig2_csv, sk_fixed_family, Fig2Config};
use infprim::ising::{exhaustive_solve_capped, read_instance, save_instance, DEFAULT_EXHAUSTIVE_CAP};
use infprim::protocol::{parse_protocol, run_protocol_with_workers, to_document};
use infprim::{AnnealParams, ClusterSet};

#[derive(Parser)]
#[command(name = "infprim", version, about = "Hybrid annealing with inference primitives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = "INFPRIM_OUT", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate SK instances with the last spin fixed down.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutDir,
    },
    /// Run a protocol file on an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        protocol: PathBuf,
        /// Overrides the seed in the protocol file.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Calibration histogram: error rate of S_i against the exact ground state, binned by P_i.
    Fig2 {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 201)]
        reads: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.8246)]
        temperature: f64,
        #[arg(long, default_value_t = 20)]
        tau: usize,
        #[arg(long, default_value_t = 30)]
        slices: usize,
        /// 1500 instances, n = 17, 1001 reads; overrides the three flags above.
        #[arg(long)]
        full_scale: bool,
        #[command(flatten)]
        out: OutDir,
    },
    /// List every ground state of an instance by exhaustive search.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_CAP)]
        cap: usize,
        #[command(flatten)]
        out: OutDir,
    },
    /// Belief-propagation marginals and the beliefs derived from them.
    Bp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        temperature: f64,
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
        #[arg(long, default_value_t = 0.3)]
        damping: f64,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        #[command(flatten)]
        out: OutDir,
    },
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { n, count, seed, out } => {
            if n < 3 {
                bail!("n must be at least 3");
            }
            fs::create_dir_all(&out.out_dir)?;
            for (k, p) in sk_fixed_family(n, count, seed)?.iter().enumerate() {
                let path = out.out_dir.join(format!("sk_n{n}_{k:04}.ising"));
                save_instance(p, &path).with_context(|| format!("writing {}", path.display()))?;
            }
            eprintln!("wrote {count} instances to {}", out.out_dir.display());
        }
        Command::Solve {
            instance,
            protocol,
            seed,
            workers,
            out,
        } => {
            let problem = read_instance(&instance).with_context(|| format!("reading {}", instance.display()))?;
            let text = fs::read_to_string(&protocol).with_context(|| format!("reading {}", protocol.display()))?;
            let mut graph = parse_protocol(&text).with_context(|| format!("in {}", protocol.display()))?;
            if let Some(s) = seed {
                graph.seed = s;
            }
            let workers = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let record = run_protocol_with_workers(&graph, &problem, workers)?;
            let config: serde_json::Value = serde_json::from_str(&to_document(&graph))?;
            let base = stem(&instance);
            write(&out.out_dir, &format!("{base}.events.jsonl"), &record.to_jsonl())?;
            write(&out.out_dir, &format!("{base}.summary.csv"), &record.summary_csv(&config.to_string()))?;
            let mut best = String::new();
            let _ = writeln!(best, "# energy={} rounds={} seed={}", record.best_energy, record.rounds_run, graph.seed);
            best.push_str("bit,value\n");
            for (i, s) in record.best_config.as_slice().iter().enumerate() {
                let _ = writeln!(best, "{i},{s}");
            }
            write(&out.out_dir, &format!("{base}.best.csv"), &best)?;
            println!("best energy {}", record.best_energy);
        }
        Command::Fig2 {
            instances,
            n,
            reads,
            bins,
            seed,
            temperature,
            tau,
            slices,
            full_scale,
            out,
        } => {
            let mut config = Fig2Config {
                instances,
                n,
                bins,
                seed,
                anneal: AnnealParams {
                    temperature,
                    tau,
                    trotter_slices: slices,
                    reads,
                    seed: 0,
                    t_hot: None,
                },
            };
            if full_scale {
                let p = Fig2Config::full_scale();
                config.instances = p.instances;
                config.n = p.n;
                config.anneal.reads = p.anneal.reads;
            }
            let result = fig2(&config)?;
            let csv = fig2_csv(&result, &serde_json::to_string(&config)?);
            write(&out.out_dir, "fig2.csv", &csv)?;
            for b in &result.bins {
                println!(
                    "[{:.3}, {:.3}) total {:6} error {:.4}",
                    b.lo,
                    b.hi,
                    b.total,
                    b.error_fraction()
                );
            }
        }
        Command::Oracle { instance, cap, out } => {
            let problem = read_instance(&instance).with_context(|| format!("reading {}", instance.display()))?;
            let ground = exhaustive_solve_capped(&problem, cap)?;
            let mut csv = String::new();
            let _ = writeln!(
                csv,
                "# instance={} n={} ground_states={}",
                instance.display(),
                problem.n(),
                ground.configs.len()
            );
            csv.push_str("config,energy");
            for i in 0..problem.n() {
                let _ = write!(csv, ",s{i}");
            }
            csv.push('\n');
            for (k, c) in ground.configs.iter().enumerate() {
                let _ = write!(csv, "{k},{}", problem.energy(c)?);
                for s in c.as_slice() {
                    let _ = write!(csv, ",{s}");
                }
                csv.push('\n');
            }
            write(&out.out_dir, &format!("{}.ground.csv", stem(&instance)), &csv)?;
            println!("{} ground state(s) at energy {}", ground.configs.len(), ground.energy);
        }
        Command::Bp {
            instance,
            temperature,
            max_iters,
            damping,
            tolerance,
            out,
        } => {
            let problem = read_instance(&instance).with_context(|| format!("reading {}", instance.display()))?;
            let params = BpParams {
                temperature,
                max_iters,
                damping,
                tolerance,
            };
            let m = bp_run(&problem, &params)?;
            let belief = marginal_to_belief(&m, &ClusterSet::singletons(problem.n()))?;
            let comment = format!("instance={} {}", instance.display(), serde_json::to_string(&params)?);
            write(
                &out.out_dir,
                &format!("{}.marginals.csv", stem(&instance)),
                &marginals_csv(&m, &belief, &comment),
            )?;
            if !m.converged {
                eprintln!("warning: BP did not converge in {} iterations", m.iterations);
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
