use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;

use shufflecodec::dataset::{self, BenchmarkReport, CompressOptions, Corpus};
use shufflecodec::generate::{barabasi_albert, erdos_renyi, with_random_attrs};
use shufflecodec::params::{AttrsMode, ModelKind};

#[derive(Parser)]
#[command(name = "shufflecodec", version, about = "Compress unordered graph datasets with shuffle coding")]
struct Cli {
    /// Seed for the padding stream that supplies initial bits.
    #[arg(long, global = true, env = "SHUFFLECODEC_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Er,
    Pu,
}

#[derive(Clone, Copy, ValueEnum)]
enum Attrs {
    Auto,
    None,
    Uniform,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Er => ModelKind::Er,
            Model::Pu => ModelKind::Pu,
        }
    }
}

impl From<Attrs> for AttrsMode {
    fn from(a: Attrs) -> Self {
        match a {
            Attrs::Auto => AttrsMode::Auto,
            Attrs::None => AttrsMode::None,
            Attrs::Uniform => AttrsMode::Uniform,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compress a TU dataset directory into one file.
    Compress {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "er")]
        model: Model,
        #[arg(long, value_enum, default_value = "auto")]
        attrs: Attrs,
        /// Pólya urn: allow the second endpoint to redraw a neighbor.
        #[arg(long)]
        redraws: bool,
        /// Do not store the graph order; graphs come back largest first.
        #[arg(long)]
        no_order: bool,
        #[arg(long)]
        out: PathBuf,
        /// Write a JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Restore a compressed file as a TU dataset directory.
    Decompress {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dataset name used for the output files.
        #[arg(long, default_value = "DS")]
        name: String,
    },
    /// Compress and decompress with each model and report rates.
    Bench {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "er,pu")]
        models: Vec<Model>,
        #[arg(long, value_enum, default_value = "auto")]
        attrs: Attrs,
        #[arg(long)]
        redraws: bool,
        /// Print one JSON report per line instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Round-trip small synthetic corpora through every model.
    Selftest,
}

fn print_table(reports: &[BenchmarkReport]) {
    println!(
        "{:<16} {:<5} {:>8} {:>8} {:>8} {:>8} {:>9} {:>8} {:>9}",
        "dataset", "model", "ordered", "shuffle", "net", "initial", "discount%", "bytes", "canon%"
    );
    for r in reports {
        println!(
            "{:<16} {:<5} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>9.2} {:>8} {:>9.1}",
            r.dataset,
            format!("{:?}", r.model).to_lowercase(),
            r.ordered_bits_per_edge,
            r.shuffle_bits_per_edge,
            r.net_bits_per_edge,
            r.initial_bits_per_edge,
            r.discount_percent,
            r.compressed_bytes,
            100.0 * r.canonize_share,
        );
    }
}

fn selftest(seed: u64) -> shufflecodec::Result<()> {
    let mut rng = StdRng::seed_from_u64(seed);
    let plain = Corpus::new("er", (0..12).map(|k| erdos_renyi(4 + k % 9, 0.3, &mut rng)).collect());
    let ba = Corpus::new("ba", (0..6).map(|k| barabasi_albert(10 + 3 * k, 2, &mut rng)).collect());
    let attributed = Corpus::new("attr", plain.graphs.iter().map(|g| with_random_attrs(g, 4, 3, &mut rng)).collect());
    let mut reports = vec![];
    for corpus in [&plain, &ba, &attributed] {
        for model in [ModelKind::Er, ModelKind::Pu] {
            for keep_order in [true, false] {
                let opts = CompressOptions { model, attrs: AttrsMode::Auto, redraws: false, keep_order, seed };
                let r = dataset::bench(corpus, &opts)?;
                if keep_order {
                    reports.push(r);
                }
            }
        }
    }
    print_table(&reports);
    println!("selftest ok");
    Ok(())
}

fn run(cli: Cli) -> shufflecodec::Result<()> {
    match cli.command {
        Command::Compress { dataset, model, attrs, redraws, no_order, out, report } => {
            let corpus = dataset::load_tu_dataset(&dataset)?;
            let opts = CompressOptions { model: model.into(), attrs: attrs.into(), redraws, keep_order: !no_order, seed: cli.seed };
            let (bytes, r) = dataset::compress_corpus(&corpus, &opts)?;
            fs::write(&out, &bytes)?;
            if let Some(path) = report {
                fs::write(path, serde_json::to_string_pretty(&r).expect("report serializes"))?;
            }
            eprintln!(
                "{}: {} graphs, {} edges, {} bytes, {:.3} bits/edge",
                corpus.name, r.num_graphs, r.num_edges, r.compressed_bytes, r.shuffle_bits_per_edge
            );
        }
        Command::Decompress { input, out, name } => {
            let bytes = fs::read(&input)?;
            let corpus = dataset::decompress_corpus(&bytes, &name)?;
            dataset::write_tu_dataset(&corpus, &out)?;
            eprintln!("{}: {} graphs written to {}", name, corpus.graphs.len(), out.display());
        }
        Command::Bench { dataset, models, attrs, redraws, json } => {
            let corpus = dataset::load_tu_dataset(&dataset)?;
            let mut reports = vec![];
            for model in models {
                let opts = CompressOptions { model: model.into(), attrs: attrs.into(), redraws, keep_order: false, seed: cli.seed };
                reports.push(dataset::bench(&corpus, &opts)?);
            }
            if json {
                for r in &reports {
                    println!("{}", serde_json::to_string(r).expect("report serializes"));
                }
            } else {
                print_table(&reports);
            }
        }
        Command::Selftest => selftest(cli.seed)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
