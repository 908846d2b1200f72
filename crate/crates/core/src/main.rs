use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use jqq::bench::{bench_scaling, write_csv, BenchConfig, BenchMode};
use jqq::gen::{generate_instance, write_instance, InstanceSpec, Shape};
use jqq::oracle::{oracle_quantile, oracle_ranked};
use jqq::plan::classify_query;
use jqq::ratio::parse_fraction;
use jqq::{
    count_answers, load_database, parse_query, quantile, Aggregate, Database, Error, ExecMode, Instance,
    JoinQuery, QuantileRequest, Ranking, RankingSpec, ValueId,
};

#[derive(Parser)]
#[command(name = "jqq", version, about = "Quantiles over acyclic join queries")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(clap::Args)]
struct Input {
    /// Manifest of `<symbol>,<csv-path>` lines.
    #[arg(long)]
    db: PathBuf,
    /// Query spec (TOML or JSON).
    #[arg(long)]
    query: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// φ-quantile of the query answers.
    Quantile {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value = "0")]
        epsilon: String,
        /// Also report the oracle rank of the answer.
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        sequential: bool,
    },
    /// Number of query answers.
    Count {
        #[command(flatten)]
        input: Input,
    },
    /// Tractability of exact SUM quantiles for the query's weighted variables.
    Classify {
        #[arg(long)]
        query: PathBuf,
    },
    /// φ-quantile by materializing and sorting.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        phi: String,
    },
    /// Writes a generated instance (manifest, CSVs, query.toml).
    Gen {
        #[arg(long)]
        shape: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "sum")]
        agg: String,
        #[arg(long)]
        domain: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Times quantile queries over generated instances; CSV on stdout.
    Bench {
        #[arg(long)]
        shape: String,
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value = "exact")]
        mode: String,
        #[arg(long, default_value = "min")]
        agg: String,
        /// Comma-separated weighted variables; defaults to all.
        #[arg(long, value_delimiter = ',')]
        weighted: Option<Vec<String>>,
        #[arg(long, default_value = "0.5")]
        phi: String,
        #[arg(long, default_value = "0.1")]
        epsilon: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sequential: bool,
    },
}

fn load(input: &Input) -> Result<(JoinQuery, Database, RankingSpec), Error> {
    let text = fs::read_to_string(&input.query).map_err(|e| Error::Io {
        path: input.query.clone(),
        source: e,
    })?;
    let (q, r) = parse_query(&text)?;
    let d = load_database(&input.db)?;
    Ok((q, d, r))
}

fn render(d: &Database, vars: &[String], answer: &[ValueId]) -> Vec<(String, String)> {
    vars.iter()
        .zip(answer)
        .map(|(v, &id)| (v.clone(), d.dictionary().render(id)))
        .collect()
}

fn print_answer(format: Format, pairs: &[(String, String)], extra: serde_json::Value) {
    match format {
        Format::Text => {
            let assign: Vec<String> = pairs.iter().map(|(v, x)| format!("{v}={x}")).collect();
            println!("answer: {}", assign.join(" "));
            if let serde_json::Value::Object(map) = extra {
                for (k, v) in map {
                    match v {
                        serde_json::Value::String(s) => println!("{k}: {s}"),
                        other => println!("{k}: {other}"),
                    }
                }
            }
        }
        Format::Json => {
            let mut obj = json!({ "answer": pairs.iter().map(|(v, x)| (v.clone(), json!(x))).collect::<serde_json::Map<_, _>>() });
            if let (Some(o), serde_json::Value::Object(e)) = (obj.as_object_mut(), extra) {
                o.extend(e);
            }
            println!("{obj}");
        }
    }
}

fn exec_mode(sequential: bool) -> ExecMode {
    if sequential {
        ExecMode::Sequential
    } else {
        ExecMode::Parallel
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Quantile {
            input,
            phi,
            epsilon,
            verify,
            sequential,
        } => {
            let (q, d, r) = load(&input)?;
            let req = QuantileRequest::new(parse_fraction(&phi)?)
                .epsilon(parse_fraction(&epsilon)?)
                .exec(exec_mode(sequential));
            let ans = quantile(&q, &d, &r, &req)?;
            let mut extra = json!({
                "weight": ans.weight.to_string(),
                "answers": ans.total.to_string(),
                "target_index": ans.target.to_string(),
                "iterations": ans.stats.iterations,
            });
            if verify {
                let ranking = Ranking::bind(&r, &q, &d)?;
                let (less, equal) = oracle_ranked(&q, &d, &ranking, None)?.rank_of(&ans.weight)?;
                extra["oracle_rank"] = json!(format!("{less}..{}", less + equal));
            }
            print_answer(cli.format, &render(&d, &q.vars(), &ans.answer), extra);
        }
        Cmd::Count { input } => {
            let (q, d, _) = load(&input)?;
            let n = count_answers(&Instance::bind(&q, &d)?)?;
            match cli.format {
                Format::Text => println!("{n}"),
                Format::Json => println!("{}", json!({ "answers": n.to_string() })),
            }
        }
        Cmd::Classify { query } => {
            let text = fs::read_to_string(&query).map_err(|e| Error::Io { path: query.clone(), source: e })?;
            let (q, r) = parse_query(&text)?;
            let v = classify_query(&q, &r.weighted_vars)?;
            match cli.format {
                Format::Text => println!("{v}"),
                Format::Json => println!(
                    "{}",
                    json!({ "verdict": v.verdict.to_string(), "tractable": v.verdict.is_tractable(), "witness": v.witness })
                ),
            }
        }
        Cmd::Oracle { input, phi } => {
            let (q, d, r) = load(&input)?;
            let ranking = Ranking::bind(&r, &q, &d)?;
            let (answer, weight, k) = oracle_quantile(&q, &d, &ranking, &parse_fraction(&phi)?)?;
            let extra = json!({ "weight": weight.to_string(), "target_index": k.to_string() });
            print_answer(cli.format, &render(&d, &q.vars(), &answer), extra);
        }
        Cmd::Gen {
            shape,
            n,
            seed,
            agg,
            domain,
            out,
        } => {
            let shape: Shape = shape.parse()?;
            let mut spec = InstanceSpec::new(shape, n, seed).agg(agg.parse::<Aggregate>()?);
            if let Some(dom) = domain {
                spec = spec.domain(dom);
            }
            let (q, d, r) = generate_instance(&spec);
            write_instance(Path::new(&out), &q, &d, &r)?;
            eprintln!("wrote {} tuples to {}", d.size(), out.display());
        }
        Cmd::Bench {
            shape,
            sizes,
            mode,
            agg,
            weighted,
            phi,
            epsilon,
            seed,
            sequential,
        } => {
            let cfg = BenchConfig {
                shape: shape.parse()?,
                sizes,
                mode: mode.parse::<BenchMode>()?,
                agg: agg.parse()?,
                weighted,
                phi: parse_fraction(&phi)?,
                epsilon: parse_fraction(&epsilon)?,
                exec: exec_mode(sequential),
                seed,
            };
            let rows = bench_scaling(&cfg)?;
            write_csv(std::io::stdout().lock(), &rows)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
