use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use knnfmt::corpus::{source_files, Corpus};
use knnfmt::eval::generator::{generate_corpus, Style};
use knnfmt::eval::{corpus_size_experiment, grammar_invariance, k_sweep, leave_one_out, write_csv, EvalParams};
use knnfmt::formatter::{check_vocabulary, format_document};
use knnfmt::model::{load_model, model_stats, save_model, train, FormattingModel, Predictor};
use knnfmt::syntax::{parse_document, provider_by_id, LineCommentOverride, TreeProvider, PROVIDER_IDS};
use knnfmt::{Error, Result};

#[derive(Parser)]
#[command(name = "knnfmt", version, about = "Formats source code the way a corpus of examples does")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model from a corpus and save it.
    Train {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 4)]
        indent: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Format files with a trained model.
    Format {
        #[arg(long, env = "KNNFMT_MODEL")]
        model: PathBuf,
        /// Override the language recorded in the model.
        #[arg(long)]
        language: Option<String>,
        #[arg(long)]
        comment_token: Option<String>,
        /// Rewrite the inputs instead of printing them.
        #[arg(long, conflicts_with = "out")]
        in_place: bool,
        /// Output file, or output directory when formatting several files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Only format files with this extension when walking directories.
        #[arg(long)]
        ext: Option<String>,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Leave-one-out evaluation of a corpus.
    Eval {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        comment_token: Option<String>,
        /// Per-file results as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Context uniqueness and ambiguity of a model.
    Stats {
        #[arg(long, env = "KNNFMT_MODEL")]
        model: PathBuf,
    },
    /// Parameter and grammar experiments, written as CSV.
    Experiment {
        #[command(subcommand)]
        kind: Experiment,
    },
    /// Write a synthetic, consistently formatted corpus.
    Generate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 15)]
        files: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        indent: usize,
        #[arg(long)]
        brace_next_line: bool,
        #[arg(long)]
        no_comments: bool,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Median error of a held-out file against models of growing size.
    CorpusSize {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-out median error for several k.
    KSweep {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,5,11,21,51")]
        ks: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Edit distance between outputs of two grammars for the same language.
    Invariance {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        other: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    language: String,
    #[arg(long)]
    corpus: PathBuf,
    /// Only use files with this extension.
    #[arg(long)]
    ext: Option<String>,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = 4)]
    indent: usize,
    #[arg(short, default_value_t = knnfmt::model::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = knnfmt::model::DEFAULT_THRESHOLD)]
    threshold: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<EvalParams> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter("threshold must lie in 0..=1".into()));
        }
        Ok(EvalParams {
            indent_size: self.indent,
            k: self.k,
            threshold: self.threshold,
        })
    }
}

fn provider(id: &str, comment_token: Option<&str>) -> Result<Box<dyn TreeProvider>> {
    let p = provider_by_id(id).ok_or_else(|| {
        Error::InvalidParameter(format!("unknown language {id}; known: {}", PROVIDER_IDS.join(", ")))
    })?;
    match comment_token {
        Some(name) => Ok(Box::new(LineCommentOverride::new(p, name)?)),
        None => Ok(p),
    }
}

fn load_corpus(args: &CorpusArgs, comment_token: Option<&str>) -> Result<(Box<dyn TreeProvider>, Corpus)> {
    let p = provider(&args.language, comment_token)?;
    let corpus = Corpus::load_dir(p.as_ref(), &args.corpus, args.ext.as_deref())?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((p, corpus))
}

fn read_model(path: &Path) -> Result<FormattingModel> {
    let f = File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    load_model(BufReader::new(f), None).map_err(|e| e.in_file(path))
}

/// Writes to `path`, or standard output when there is none.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::from(e).in_file(p))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { corpus, indent, out } => {
            if indent == 0 {
                return Err(Error::InvalidParameter("indent must be at least 1".into()));
            }
            let (p, c) = load_corpus(&corpus, None)?;
            let model = train(&c.docs, p.as_ref(), indent)?;
            let mut w = BufWriter::new(File::create(&out).map_err(|e| Error::from(e).in_file(&out))?);
            let bytes = save_model(&model, &mut w)?;
            w.flush()?;
            let tokens: usize = c.docs.iter().map(|d| d.len()).sum();
            println!(
                "{} files, {tokens} tokens, {} exemplars; wrote {bytes} bytes to {}",
                c.len(),
                model.exemplars.len(),
                out.display()
            );
        }
        Command::Format {
            model,
            language,
            comment_token,
            in_place,
            out,
            ext,
            inputs,
        } => {
            let m = read_model(&model)?;
            let p = provider(language.as_deref().unwrap_or(&m.provider_id), comment_token.as_deref())?;
            check_vocabulary(&m, p.as_ref())?;
            format_files(&m, p.as_ref(), &inputs, ext.as_deref(), in_place, out.as_deref())?;
        }
        Command::Eval {
            corpus,
            params,
            comment_token,
            csv,
        } => {
            let (p, c) = load_corpus(&corpus, comment_token.as_deref())?;
            let r = leave_one_out(&c, p.as_ref(), params.params()?)?;
            if let Some(path) = csv {
                write_csv(&r.docs, output(Some(&path))?)?;
            } else {
                write_csv(&r.docs, io::stdout().lock())?;
            }
            println!("median error rate {:.4}", r.median_error);
            println!("median edit distance {:.4}", r.median_edit_distance);
        }
        Command::Stats { model } => {
            let m = read_model(&model)?;
            println!("{}", model_stats(&m));
        }
        Command::Experiment { kind } => run_experiment(kind)?,
        Command::Generate {
            out,
            files,
            seed,
            indent,
            brace_next_line,
            no_comments,
        } => {
            let style = Style {
                indent,
                brace_next_line,
                comments: !no_comments,
                ..Style::default()
            };
            fs::create_dir_all(&out)?;
            for (name, text) in generate_corpus(&style, files, seed)? {
                let path = out.join(name);
                fs::write(&path, text).map_err(|e| Error::from(e).in_file(&path))?;
            }
            println!("wrote {files} files to {}", out.display());
        }
    }
    Ok(())
}

fn run_experiment(kind: Experiment) -> Result<()> {
    match kind {
        Experiment::CorpusSize {
            corpus,
            params,
            sizes,
            trials,
            seed,
            out,
        } => {
            let (p, c) = load_corpus(&corpus, None)?;
            let rows = corpus_size_experiment(&c, p.as_ref(), params.params()?, &sizes, trials, seed)?;
            write_csv(&rows, output(out.as_deref())?)
        }
        Experiment::KSweep { corpus, params, ks, out } => {
            let (p, c) = load_corpus(&corpus, None)?;
            let rows = k_sweep(&c, p.as_ref(), params.params()?, &ks)?;
            write_csv(&rows, output(out.as_deref())?)
        }
        Experiment::Invariance {
            corpus,
            params,
            other,
            out,
        } => {
            let a = provider(&corpus.language, None)?;
            let b = provider(&other, None)?;
            let texts = source_files(&corpus.corpus, corpus.ext.as_deref())?
                .into_iter()
                .map(|path| {
                    let text = fs::read_to_string(&path).map_err(|e| Error::from(e).in_file(&path))?;
                    let name = path.strip_prefix(&corpus.corpus).unwrap_or(&path).display().to_string();
                    Ok((name, text))
                })
                .collect::<Result<Vec<_>>>()?;
            let r = grammar_invariance(&texts, a.as_ref(), b.as_ref(), params.params()?)?;
            write_csv(&r.rows, output(out.as_deref())?)?;
            eprintln!("median normalized edit distance {:.4}", r.median);
            Ok(())
        }
    }
}

/// Expands directories into their source files, remembering each file's
/// path relative to the input it came from.
fn expand(inputs: &[PathBuf], ext: Option<&str>) -> Result<Vec<(PathBuf, PathBuf)>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for f in source_files(input, ext)? {
                let rel = f.strip_prefix(input).unwrap_or(&f).to_path_buf();
                files.push((f, rel));
            }
        } else {
            let rel = PathBuf::from(input.file_name().unwrap_or(input.as_os_str()));
            files.push((input.clone(), rel));
        }
    }
    Ok(files)
}

fn format_files(
    model: &FormattingModel,
    provider: &dyn TreeProvider,
    inputs: &[PathBuf],
    ext: Option<&str>,
    in_place: bool,
    out: Option<&Path>,
) -> Result<()> {
    let files = expand(inputs, ext)?;
    let single = files.len() == 1 && !inputs[0].is_dir();
    if !single && !in_place && out.is_none() {
        return Err(Error::InvalidParameter(
            "several files need --out DIR or --in-place".into(),
        ));
    }
    let predictor = Predictor::new(model)?;
    let formatted = files
        .par_iter()
        .map(|(path, _)| {
            let text = fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
            let doc = parse_document(provider, &text).map_err(|e| e.in_file(path))?;
            Ok(format_document(&predictor, &doc, provider).text)
        })
        .collect::<Result<Vec<String>>>()?;

    for ((path, rel), text) in files.iter().zip(formatted) {
        let target = match (in_place, out) {
            (true, _) => path.clone(),
            (false, Some(o)) if single => o.to_path_buf(),
            (false, Some(o)) => o.join(rel),
            (false, None) => {
                io::stdout().lock().write_all(text.as_bytes())?;
                continue;
            }
        };
        if let Some(dir) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(&target, text).map_err(|e| Error::from(e).in_file(&target))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(u8::from(usage));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("knnfmt: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
