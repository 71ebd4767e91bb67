//! Subcommand bodies. Each returns the process exit code.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sonolab::annotation::{serialize_tsv, write_wav, WavEncoding};
use sonolab::classify::{self, cross_validate, train};
use sonolab::stats::{fit_factorial, pairwise_contrasts, Dv, FactorialSpec};
use sonolab::synthkit::demo::{demo_tokens, render_token};
use sonolab::synthkit::RNG_ALGORITHM;

use crate::analyze::run_analyze;
use crate::config::RunConfig;
use crate::features::{read_features_file, write_features};
use crate::manifest::{Manifest, ManifestEntry};
use crate::{tables, CliError};

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_records(path: &Path) -> Result<Vec<sonolab::FeatureRecord>, CliError> {
    let records = read_features_file(path)?;
    if records.is_empty() {
        return Err(CliError::Empty(format!(
            "{} has no records",
            path.display()
        )));
    }
    Ok(records)
}

/// `features.csv` and `run_report.json` in the output directory.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<i32, CliError> {
    let manifest_path = cfg
        .manifest
        .as_ref()
        .ok_or_else(|| CliError::Config("no manifest given (run.manifest or --manifest)".into()))?;
    let manifest = Manifest::read(manifest_path)?;
    let (records, report) = run_analyze(&manifest, cfg);

    fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", cfg.output_dir.display())))?;
    let csv_path = cfg.output_dir.join("features.csv");
    let file = fs::File::create(&csv_path)
        .map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    write_features(std::io::BufWriter::new(file), &records)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write(&cfg.output_dir.join("run_report.json"), &json)?;

    let t = &report.totals;
    eprintln!(
        "analyzed {} of {} entries ({} skipped, {} failed), {} rows -> {}",
        t.analyzed,
        t.entries,
        t.skipped,
        t.failed,
        t.rows,
        csv_path.display()
    );
    for e in report.entries.iter().filter(|e| e.error.is_some()) {
        eprintln!(
            "  entry {}: {}",
            e.index + 1,
            e.error.as_deref().unwrap_or_default()
        );
    }
    Ok(report.exit_code())
}

pub fn cmd_summarize(
    features: &Path,
    cfg: &RunConfig,
    emit_plot_data: bool,
) -> Result<i32, CliError> {
    let records = load_records(features)?;
    let out = &cfg.output_dir;
    write(
        &out.join("summary_moments.tsv"),
        &tables::moment_summary(&records)?,
    )?;
    write(
        &out.join("summary_contours.tsv"),
        &tables::contour_summary(&records)?,
    )?;
    if emit_plot_data {
        for dv in Dv::all() {
            write(
                &out.join("plot").join(format!("{}.csv", dv.column())),
                &tables::plot_data(&records, dv)?,
            )?;
        }
    }
    eprintln!("summarized {} records -> {}", records.len(), out.display());
    Ok(0)
}

fn parse_dvs(names: &[String], default: impl Iterator<Item = Dv>) -> Result<Vec<Dv>, CliError> {
    if names.is_empty() {
        return Ok(default.collect());
    }
    names
        .iter()
        .map(|n| n.parse::<Dv>().map_err(CliError::Config))
        .collect()
}

pub fn cmd_model(features: &Path, cfg: &RunConfig, dvs: &[String]) -> Result<i32, CliError> {
    let dvs = parse_dvs(dvs, Dv::all())?;
    let records = load_records(features)?;
    let mut code = 0;
    for dv in dvs {
        let mut spec = FactorialSpec::new(dv, &cfg.scale);
        spec.center_by_speaker = cfg.center_by_speaker;
        match fit_factorial(&records, &spec) {
            Ok(fit) => {
                write(
                    &cfg.output_dir.join(format!("model_{}.csv", dv.column())),
                    &tables::model_csv(&fit),
                )?;
                write(
                    &cfg.output_dir.join(format!("model_{}.txt", dv.column())),
                    &tables::model_text(&fit),
                )?;
            }
            Err(e) => {
                eprintln!("{}: {e}", dv.label());
                code = 1;
            }
        }
    }
    Ok(code)
}

pub fn cmd_contrasts(features: &Path, cfg: &RunConfig, dvs: &[String]) -> Result<i32, CliError> {
    let dvs = parse_dvs(dvs, Dv::MOMENTS.into_iter())?;
    let records = load_records(features)?;
    for dv in dvs {
        let table = pairwise_contrasts(&records, dv, cfg.scale.scale_for(dv));
        write(
            &cfg.output_dir
                .join(format!("contrasts_{}.csv", dv.column())),
            &tables::contrasts_csv(&table),
        )?;
        write(
            &cfg.output_dir
                .join(format!("contrasts_{}.txt", dv.column())),
            &tables::contrasts_text(&table),
        )?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct SavedModel<'a> {
    rng: &'static str,
    seed: u64,
    folds: usize,
    l2_lambda: f64,
    tol: f64,
    max_iter: usize,
    iterations: usize,
    final_loss: f64,
    converged: bool,
    bias: f64,
    features: &'a [String],
    means: &'a [f64],
    sds: &'a [f64],
    weights: &'a [f64],
    cv: SavedCv<'a>,
}

#[derive(Serialize)]
struct SavedCv<'a> {
    mean_accuracy: f64,
    fold_accuracy: &'a [f64],
}

/// Trains on all records, cross-validates, and writes `classifier.toml` and `cv.csv`.
pub fn cmd_classify(features: &Path, cfg: &RunConfig) -> Result<i32, CliError> {
    let records = load_records(features)?;
    let model = train(&records, &cfg.features, &cfg.train)?;
    let cv = cross_validate(&records, &cfg.features, cfg.folds, cfg.seed, &cfg.train)?;
    let saved = SavedModel {
        rng: RNG_ALGORITHM,
        seed: cfg.seed,
        folds: cfg.folds,
        l2_lambda: model.l2_lambda,
        tol: cfg.train.tol,
        max_iter: cfg.train.max_iter,
        iterations: model.iterations,
        final_loss: model.final_loss,
        converged: model.converged,
        bias: model.bias,
        features: &model.features,
        means: &model.means,
        sds: &model.sds,
        weights: &model.weights,
        cv: SavedCv {
            mean_accuracy: cv.mean_accuracy,
            fold_accuracy: &cv.fold_accuracy,
        },
    };
    let text = toml::to_string(&saved).map_err(|e| CliError::Io(e.to_string()))?;
    write(&cfg.output_dir.join("classifier.toml"), &text)?;

    let mut csv = String::from("fold,n_test,accuracy\n");
    for (f, acc) in cv.fold_accuracy.iter().enumerate() {
        let n = cv.fold_of.iter().filter(|&&g| g == f).count();
        csv.push_str(&format!("{},{n},{}\n", f + 1, tables::fmt_num(*acc)));
    }
    csv.push_str(&format!(
        "mean,{},{}\n",
        records.len(),
        tables::fmt_num(cv.mean_accuracy)
    ));
    write(&cfg.output_dir.join("cv.csv"), &csv)?;
    if !model.converged {
        eprintln!(
            "warning: training stopped after {} iterations without converging",
            model.iterations
        );
    }
    eprintln!(
        "{}-fold accuracy {:.4} (seed {})",
        cfg.folds, cv.mean_accuracy, cfg.seed
    );
    Ok(0)
}

/// Renders demo tokens: `wav/`, `annotations/`, `truth/` and `manifest.csv` under the output directory.
pub fn cmd_synth(cfg: &RunConfig, max_tokens: Option<usize>) -> Result<i32, CliError> {
    let out = &cfg.output_dir;
    let mut tokens = demo_tokens(cfg.speakers_per_variety, cfg.sample_rate, cfg.seed);
    if let Some(n) = max_tokens {
        tokens.truncate(n);
    }
    let mut manifest = Manifest::default();
    for (i, tok) in tokens.iter().enumerate() {
        let stem = tok.stem(i);
        let rendered = render_token(tok, cfg.seed)
            .map_err(|e| CliError::Config(format!("token {stem}: {e}")))?;
        let wav = PathBuf::from("wav").join(format!("{stem}.wav"));
        let ann = PathBuf::from("annotations").join(format!("{stem}.tsv"));
        let truth = PathBuf::from("truth").join(format!("{stem}.toml"));
        fs::create_dir_all(out.join("wav")).map_err(|e| CliError::Io(e.to_string()))?;
        write_wav(out.join(&wav), &rendered.clip, WavEncoding::Float32)
            .map_err(|e| CliError::Io(e.to_string()))?;
        let tsv = format!(
            "# seed {} rng {}\n{}",
            cfg.seed,
            RNG_ALGORITHM,
            serialize_tsv(&rendered.segments)
        );
        write(&out.join(&ann), &tsv)?;
        let truth_text =
            toml::to_string(&rendered.truth).map_err(|e| CliError::Io(e.to_string()))?;
        write(&out.join(&truth), &truth_text)?;
        manifest.entries.push(ManifestEntry {
            wav,
            annotation: ann,
            speaker: tok.speaker.clone(),
            variety: tok.variety,
            notes: stem,
        });
    }
    write(&out.join("manifest.csv"), &manifest.to_csv())?;
    eprintln!("wrote {} tokens -> {}", tokens.len(), out.display());
    Ok(0)
}

/// Schema check of a features table and, optionally, a manifest and its files.
pub fn cmd_validate(features: Option<&Path>, manifest: Option<&Path>) -> Result<i32, CliError> {
    if features.is_none() && manifest.is_none() {
        return Err(CliError::Config(
            "nothing to validate: give a features file or --manifest".into(),
        ));
    }
    if let Some(p) = features {
        let records = read_features_file(p)?;
        println!("{}: ok, {} records", p.display(), records.len());
    }
    if let Some(p) = manifest {
        let m = Manifest::read(p)?;
        let missing: Vec<String> = m
            .entries
            .iter()
            .enumerate()
            .flat_map(|(i, e)| [(i, &e.wav), (i, &e.annotation)])
            .filter(|(_, f)| !f.exists())
            .map(|(i, f)| format!("line {}: {} does not exist", i + 2, f.display()))
            .collect();
        if !missing.is_empty() {
            return Err(CliError::Schema(missing.join("\n")));
        }
        println!("{}: ok, {} entries", p.display(), m.entries.len());
    }
    Ok(0)
}

impl From<classify::ClassifyError> for CliError {
    fn from(e: classify::ClassifyError) -> Self {
        CliError::Data(e.to_string())
    }
}
