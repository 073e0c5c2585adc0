use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use signpipe_core::pipeline::{Pipeline, SpokenToSignedRequest};
use signpipe_core::pose::{concatenate_stitch, read_pose, write_pose, PoseSequence};
use signpipe_core::render::{render_sequence, RenderStyle};
use signpipe_core::s2s::{load_dictionary, DEFAULT_CROSSFADE};
use signpipe_core::signwriting::{parse_fsw, serialize_fsw};
use signpipe_core::sts::{segment_signs, SegmenterParams, DEFAULT_TAU};
use signpipe_core::synth::{toy_dictionary, write_toy_dictionary, ToyConfig, TOY_WORDS};
use signpipe_core::text::langid::{bundled_corpus, split_train_test, DEFAULT_ALPHA};
use signpipe_core::text::{NgramLangModel, Normalizer};
use signpipe_service::{AppState, ServiceConfig};

#[derive(Parser)]
#[command(name = "signpipe", version, about = "Spoken and signed language translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        /// Config file; falls back to $SIGNPIPE_CONFIG.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        offline: bool,
    },
    /// Translate text to a pose or a pose to text.
    Translate(TranslateArgs),
    /// Print the sign and phrase-boundary segments of a pose file.
    Segment {
        pose: PathBuf,
        /// Segmenter parameters as JSON; missing fields take defaults.
        #[arg(long)]
        params: Option<String>,
    },
    /// Concatenate pose files with cross-faded seams.
    Stitch {
        #[arg(required = true, num_args = 2..)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(short, default_value_t = DEFAULT_CROSSFADE)]
        k: usize,
    },
    /// Formal SignWriting tools.
    Fsw {
        #[command(subcommand)]
        action: FswAction,
    },
    /// Render every frame of a pose file to SVG.
    Render {
        pose: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 512)]
        width: u32,
        #[arg(long, default_value_t = 512)]
        height: u32,
    },
    /// Write the synthetic toy dictionary (manifest plus pose files).
    GenToyDictionary {
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = TOY_WORDS.len())]
        glosses: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Omit the German text forms.
        #[arg(long)]
        english_only: bool,
    },
    /// Train a trigram language identifier and report held-out accuracy.
    TrainLangid {
        /// Directory of `<lang>.txt` files, one sentence per line; the
        /// bundled corpus otherwise.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
}

#[derive(Subcommand)]
enum FswAction {
    /// Print the parsed structure and canonical form.
    Parse { text: String },
    /// Exit non-zero unless the string is valid FSW.
    Validate { text: String },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    /// Spoken text to signed pose.
    S2s,
    /// Signed pose to spoken text.
    Sts,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long, value_enum)]
    direction: Direction,
    /// Source language; `auto` detects the spoken language.
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
    #[arg(long, conflicts_with = "pose")]
    text: Option<String>,
    #[arg(long)]
    pose: Option<PathBuf>,
    /// Where to write the stitched pose (spoken-to-signed).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Service config to take dictionaries and parameters from.
    #[arg(long, env = "SIGNPIPE_CONFIG", conflicts_with = "dictionary")]
    config: Option<PathBuf>,
    /// A single dictionary manifest instead of a config.
    #[arg(long)]
    dictionary: Option<PathBuf>,
}

fn main() -> std::process::ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    match run(Cli::parse().command) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Serve { config, port, offline } => serve(config, port, offline),
        Command::Translate(args) => translate(args),
        Command::Segment { pose, params } => {
            let params: SegmenterParams = match params {
                Some(p) => serde_json::from_str(&p).context("parsing --params")?,
                None => SegmenterParams::default(),
            };
            params.validate()?;
            let seq = read_pose_file(&pose)?;
            let segments = segment_signs(&seq, &params);
            print_json(&json!({
                "fps": seq.header().fps(),
                "frames": seq.frame_count(),
                "segments": segments,
            }))
        }
        Command::Stitch { inputs, output, k } => {
            let clips = inputs.iter().map(|p| read_pose_file(p)).collect::<Result<Vec<_>>>()?;
            let joined = concatenate_stitch(&clips, k)?;
            write_pose_file(&output, &joined)?;
            eprintln!("wrote {} frames to {}", joined.frame_count(), output.display());
            Ok(())
        }
        Command::Fsw { action } => match action {
            FswAction::Parse { text } => {
                let signs = parse_fsw(&text)?;
                print_json(&json!({ "canonical": serialize_fsw(&signs)?, "signs": signs }))
            }
            FswAction::Validate { text } => {
                let signs = parse_fsw(&text)?;
                println!("valid: {} sign(s)", signs.len());
                Ok(())
            }
        },
        Command::Render {
            pose,
            output,
            width,
            height,
        } => {
            let seq = read_pose_file(&pose)?;
            let style = RenderStyle {
                width,
                height,
                ..RenderStyle::default()
            };
            let index = render_sequence(&seq, &style, &output)?;
            eprintln!("rendered {} frame(s) to {}", index.frames.len(), output.display());
            Ok(())
        }
        Command::GenToyDictionary {
            output,
            glosses,
            seed,
            english_only,
        } => {
            let config = ToyConfig {
                glosses,
                seed,
                german: !english_only,
            };
            let manifest = write_toy_dictionary(&output, &config)?;
            println!("{}", manifest.display());
            Ok(())
        }
        Command::TrainLangid { corpus, output, alpha } => train_langid(corpus.as_deref(), &output, alpha),
    }
}

fn serve(config: Option<PathBuf>, port: Option<u16>, offline: bool) -> Result<()> {
    let mut config = ServiceConfig::load(config.as_deref())?;
    if let Some(port) = port {
        config.server.port = port;
    }
    config.offline |= offline;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(signpipe_service::run(config))?;
    Ok(())
}

fn load_pipeline(config: Option<&Path>, dictionary: Option<&Path>) -> Result<Arc<Pipeline>> {
    if let Some(config) = config {
        let config = ServiceConfig::load(Some(config))?;
        return Ok(AppState::from_config(&config)?.pipeline);
    }
    let dict = match dictionary {
        Some(path) => load_dictionary(path).with_context(|| format!("loading {}", path.display()))?,
        None => {
            tracing::info!("no config or dictionary given; using the built-in toy dictionary");
            toy_dictionary(&ToyConfig::default())
        }
    };
    let mut pipeline = Pipeline::new(Normalizer::offline());
    pipeline.add_dictionary(Arc::new(dict), DEFAULT_CROSSFADE, &SegmenterParams::default(), DEFAULT_TAU)?;
    Ok(Arc::new(pipeline))
}

fn translate(args: TranslateArgs) -> Result<()> {
    let pipeline = load_pipeline(args.config.as_deref(), args.dictionary.as_deref())?;
    match args.direction {
        Direction::S2s => {
            let Some(text) = args.text else {
                bail!("--text is required for s2s");
            };
            let request = SpokenToSignedRequest {
                text,
                spoken_lang: (args.from != "auto").then_some(args.from),
                signed_lang: args.to,
            };
            let result = pipeline.translate(&request)?;
            if let Some(out) = &args.output {
                write_pose_file(out, &result.pose)?;
            }
            print_json(&json!({
                "language": result.language,
                "normalized": result.normalized,
                "sentences": result.sentences,
                "frames": result.pose.frame_count(),
                "fps": result.pose.header().fps(),
                "provenance": result.provenance,
            }))
        }
        Direction::Sts => {
            let Some(path) = args.pose else {
                bail!("--pose is required for sts");
            };
            let seq = read_pose_file(&path)?;
            let result = pipeline.translate_pose(&seq, &args.from, &args.to)?;
            print_json(&serde_json::to_value(&result)?)
        }
    }
}

fn train_langid(corpus: Option<&Path>, output: &Path, alpha: f64) -> Result<()> {
    let corpus = match corpus {
        Some(dir) => read_corpus(dir)?,
        None => bundled_corpus(),
    };
    let (train, test) = split_train_test(&corpus);
    let held_out = NgramLangModel::train(&train, alpha)?;
    let scored: Vec<_> = test.iter().filter(|(_, t)| t.chars().count() >= 40).collect();
    let correct = scored.iter().filter(|(l, t)| held_out.detect(t).code == *l).count();
    eprintln!(
        "held-out accuracy on {} sentence(s) of >= 40 chars: {:.2}%",
        scored.len(),
        100.0 * correct as f64 / scored.len().max(1) as f64
    );
    let model = NgramLangModel::train(&corpus, alpha)?;
    std::fs::write(output, serde_json::to_vec(&model)?).with_context(|| format!("writing {}", output.display()))?;
    eprintln!("wrote model for {:?} to {}", model.languages(), output.display());
    Ok(())
}

fn read_corpus(dir: &Path) -> Result<Vec<(String, String)>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    let mut corpus = Vec::new();
    for file in files {
        let lang = file.file_stem().and_then(|s| s.to_str()).context("non-UTF-8 file name")?.to_owned();
        let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
        corpus.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(|l| (lang.clone(), l.to_owned())),
        );
    }
    if corpus.is_empty() {
        bail!("no sentences found in {}", dir.display());
    }
    Ok(corpus)
}

fn read_pose_file(path: &Path) -> Result<PoseSequence> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    read_pose(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write_pose_file(path: &Path, seq: &PoseSequence) -> Result<()> {
    std::fs::write(path, write_pose(seq)?).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}
