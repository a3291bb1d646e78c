use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use jrme::data::{dataset_stats, parse_belief_file, tokenize_mention, ParseMode, ParseOutcome};
use jrme::evaluation::{candidate_scores, evaluate};
use jrme::persist::{load_model, save_model};
use jrme::training::{grid_search, train_hogwild, train_with_progress, EpochReport, HyperGrid};
use jrme::{Dataset, EvalReport, RelationId, Vocabulary};

use crate::failure::{CmdResult, Context, Failure};
use crate::manifest::{ConfigRecord, RunManifest};
use crate::{EvalArgs, GridArgs, PredictArgs, StatsArgs, TrainArgs};

fn report_rejections(path: &Path, outcome: &ParseOutcome) {
    if outcome.rejected() > 0 || outcome.dropped_words > 0 {
        eprintln!(
            "{}: kept {} beliefs, rejected {} lines with unknown entities or relations, dropped {} unknown mention words",
            path.display(),
            outcome.beliefs.len(),
            outcome.rejected(),
            outcome.dropped_words
        );
    }
}

/// Parses a training file and an optional held-out file against its vocabulary.
fn load_split(train: &Path, held_out: Option<&Path>) -> CmdResult<(Vocabulary, Vec<jrme::Belief>, Vec<jrme::Belief>)> {
    let mut vocab = Vocabulary::new();
    let train_set = parse_belief_file(train, &mut vocab, ParseMode::BuildVocab)?;
    if train_set.beliefs.is_empty() {
        return Err(Failure::data(anyhow::anyhow!("{}: no beliefs", train.display())));
    }
    let held = match held_out {
        Some(p) => {
            let out = parse_belief_file(p, &mut vocab, ParseMode::FrozenVocab)?;
            report_rejections(p, &out);
            out.beliefs
        }
        None => Vec::new(),
    };
    Ok((vocab, train_set.beliefs, held))
}

fn print_epoch(r: &EpochReport) {
    eprintln!("{r}");
}

pub fn train(args: TrainArgs) -> CmdResult {
    let config = args.training.config(args.dim, args.alpha, args.beta, args.gamma)?;
    let variant = args.training.variant;
    if args.threads == 0 {
        return Err(Failure::usage("--threads must be at least 1"));
    }
    if args.threads > 1 && !args.nondeterministic_ok {
        return Err(Failure::usage(
            "--threads above 1 makes results depend on scheduling; pass --nondeterministic-ok to accept that",
        ));
    }
    let (vocab, train, valid) = load_split(&args.train, args.valid.as_deref())?;
    let dataset = Dataset {
        train,
        valid,
        test: Vec::new(),
    };

    let mut manifest = RunManifest::new("train", variant, &config, args.threads);
    manifest.add_input("train", &args.train)?;
    if let Some(v) = &args.valid {
        manifest.add_input("valid", v)?;
    }

    let (table, _) = if args.threads == 1 {
        train_with_progress(&dataset, &vocab, &config, variant, print_epoch)?
    } else {
        train_hogwild(&dataset, &vocab, &config, variant, args.threads, print_epoch)?
    };
    save_model(&table, &vocab, &config, &args.out)?;
    manifest.outputs.push(args.out.clone());
    let manifest_path = manifest.write_next_to(&args.out)?;
    println!("model: {}", args.out.display());
    println!("manifest: {}", manifest_path.display());

    if !dataset.valid.is_empty() {
        let report = evaluate(&table, &dataset.valid, variant)?;
        print!("{}", EvalReport::render_table(&[(variant.name(), &report)]));
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> CmdResult {
    let (table, mut vocab, _) = load_model(&args.model)?;
    let outcome = parse_belief_file(&args.test, &mut vocab, ParseMode::FrozenVocab)?;
    report_rejections(&args.test, &outcome);
    if outcome.beliefs.is_empty() {
        return Err(Failure::data(anyhow::anyhow!(
            "{}: no usable beliefs ({} lines rejected)",
            args.test.display(),
            outcome.rejected()
        )));
    }
    let report = evaluate(&table, &outcome.beliefs, args.variant)?;
    let name = args.variant.name();
    print!("{}", EvalReport::render_table(&[(name, &report)]));
    println!();
    print!("{}", report.key_values(name));
    println!("rejected_lines={}", outcome.rejected());
    if let Some(path) = &args.ranks {
        fs::write(path, report.ranks_tsv()).context(format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn grid(args: GridArgs) -> CmdResult {
    let grid = HyperGrid {
        dims: args.dims,
        alphas: args.alphas,
        betas: args.betas,
        gammas: args.gammas,
    };
    if grid.is_empty() {
        return Err(Failure::usage("hyperparameter grid is empty"));
    }
    let variant = args.training.variant;
    let fixed = args
        .training
        .config(grid.dims[0], grid.alphas[0], grid.betas[0], grid.gammas[0])?;
    let (vocab, train, valid) = load_split(&args.train, Some(&args.valid))?;
    if valid.is_empty() {
        return Err(Failure::data(anyhow::anyhow!(
            "{}: no usable validation beliefs",
            args.valid.display()
        )));
    }
    let dataset = Dataset {
        train,
        valid,
        test: Vec::new(),
    };
    eprintln!("grid: {} points, variant {variant}", grid.len());
    let outcome = grid_search(&dataset, &vocab, &grid, &fixed, variant)?;

    let line = |c: &jrme::ModelConfig, r: &EvalReport| {
        format!(
            "dim={} alpha={} beta={} gamma={} avg_rank={:.4} hit_at_10={:.4} hit_at_1={:.4}",
            c.dim, c.alpha, c.beta, c.gamma, r.avg_rank, r.hit_at_10, r.hit_at_1
        )
    };
    for p in &outcome.points {
        println!("{}", line(&p.config, &p.report));
    }
    println!("best: {}", line(outcome.best_config(), outcome.best_report()));

    if let Some(out) = &args.out {
        let record = ConfigRecord::from(outcome.best_config());
        let mut text = serde_json::to_string_pretty(&record).map_err(Failure::data)?;
        text.push('\n');
        fs::write(out, text).context(format!("writing {}", out.display()))?;
        let mut manifest = RunManifest::new("grid", variant, outcome.best_config(), 1);
        manifest.add_input("train", &args.train)?;
        manifest.add_input("valid", &args.valid)?;
        manifest.outputs.push(out.clone());
        manifest.write_next_to(out)?;
    }
    Ok(())
}

pub fn predict(args: PredictArgs) -> CmdResult {
    if args.topk == 0 {
        return Err(Failure::usage("--topk must be at least 1"));
    }
    let (table, vocab, _) = load_model(&args.model)?;
    let file = File::open(&args.input).context(format!("opening {}", args.input.display()))?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let (mut scored, mut failed) = (0usize, 0usize);

    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.context(format!("reading {}", args.input.display()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) {
            writeln!(out, "#{line_no}\tERROR\texpected head<TAB>tail<TAB>mention")?;
            failed += 1;
            continue;
        }
        let (head, tail) = (cols[0], cols[1]);
        let (Some(h), Some(t)) = (vocab.entity(head), vocab.entity(tail)) else {
            let unknown = if vocab.entity(head).is_none() { head } else { tail };
            writeln!(out, "#{line_no}\tERROR\tunknown entity '{unknown}'")?;
            failed += 1;
            continue;
        };
        let mention: Vec<_> = cols
            .get(2)
            .map(|m| tokenize_mention(m))
            .unwrap_or_default()
            .iter()
            .filter_map(|w| vocab.word(w))
            .collect();
        let scores = candidate_scores(&table, h, t, &mention, args.variant)?;
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
        writeln!(out, "#{line_no}\t{head}\t{tail}")?;
        for (rank, &r) in order.iter().take(args.topk).enumerate() {
            let name = vocab.relation_name(RelationId::from_index(r)).unwrap_or("?");
            writeln!(out, "{}\t{name}\t{:.6}", rank + 1, scores[r])?;
        }
        scored += 1;
    }
    out.flush()?;
    if scored == 0 && failed > 0 {
        return Err(Failure::data(anyhow::anyhow!(
            "{}: no line could be scored",
            args.input.display()
        )));
    }
    Ok(())
}

pub fn stats(args: StatsArgs) -> CmdResult {
    let mut vocab = Vocabulary::new();
    let mut load = |path: Option<&Path>| -> CmdResult<Vec<jrme::Belief>> {
        match path {
            Some(p) => Ok(parse_belief_file(p, &mut vocab, ParseMode::BuildVocab)?.beliefs),
            None => Ok(Vec::new()),
        }
    };
    let dataset = Dataset {
        train: load(Some(&args.train))?,
        valid: load(args.valid.as_deref())?,
        test: load(args.test.as_deref())?,
    };
    print!("{}", dataset_stats(&dataset, &vocab));
    Ok(())
}
