use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ClassifierChoice, Scenario, ScenarioConfig};
use super::corpus::CorpusRecord;
use super::svg::{emit_svg, PlotPoint, PointKind};
use crate::classify::{
    decision_grid, evaluate, lda_fit, Bounds, KnnModel, LdaModel, Metrics, TreeModel, EDITED,
};
use crate::codec::MetadataString;
use crate::error::{Error, Result};
use crate::features::{fit_selection, SelectionMask, Standardizer, Vocabulary};

/// Label of files without a social-network label in the social scenario.
pub const OTHER: &str = "Other";
/// Tool label of files without one in the tool scenario.
pub const NATIVE: &str = "native";
pub const PRISTINE: &str = "pristine";

/// Stratified half split: in every class (visited in sorted order) the
/// members are shuffled with one seeded generator and the first
/// `floor(n / 2)` go to validation. Returns sorted `(train, validation)`
/// sample indices.
pub fn stratified_split(labels: &[String], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (label, mut members) in by_class {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        let half = members.len() / 2;
        validation.extend_from_slice(&members[..half]);
        train.extend_from_slice(&members[half..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok((train, validation))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FittedClassifier {
    /// Features are standardized with training statistics before LDA.
    LdaKnn {
        scaler: Standardizer,
        lda: LdaModel,
        knn: KnnModel,
    },
    Tree { tree: TreeModel },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub alpha: usize,
    pub beta: usize,
    pub lambda: usize,
    pub seed: u64,
    pub ridge_factor: f64,
}

/// Vocabulary, feature selection and classifier fitted on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub vocab_sha256: String,
    pub hyperparameters: Hyperparameters,
    pub vocabulary: Vocabulary,
    pub selection: SelectionMask,
    pub classifier: FittedClassifier,
}

fn vocab_hash(vocab: &Vocabulary) -> Result<String> {
    let digest = Sha256::digest(serde_json::to_vec(vocab)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl Pipeline {
    pub fn fit(train: &[&[MetadataString]], labels: &[String], config: &ScenarioConfig) -> Result<Self> {
        if train.len() != labels.len() {
            return Err(Error::LengthMismatch(train.len(), labels.len()));
        }
        let vocabulary = Vocabulary::build(train.iter().copied(), &config.continuous)?;
        if vocabulary.dim() == 0 {
            return Err(Error::EmptyVocabulary);
        }
        let vectors: Vec<_> = train
            .iter()
            .map(|s| {
                let (v, warnings) = vocabulary.vectorize(s);
                for w in warnings {
                    log::warn!("non-numeric value {:?} for continuous key {}", w.value, w.key);
                }
                v
            })
            .collect();
        let selection = fit_selection(&vectors, &config.selection())?;
        let rows: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| selection.apply(&v.values))
            .collect::<Result<_>>()?;

        let n_classes = labels.iter().collect::<BTreeSet<_>>().len();
        let use_tree = match config.classifier {
            ClassifierChoice::Auto => n_classes <= 2,
            ClassifierChoice::Tree => true,
            ClassifierChoice::LdaKnn => false,
        };
        let classifier = if use_tree {
            FittedClassifier::Tree {
                tree: TreeModel::fit(&rows, labels)?,
            }
        } else {
            let scaler = Standardizer::fit(&rows);
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| scaler.apply(r)).collect::<Result<_>>()?;
            let d = selection.retained.len();
            let x = nalgebra::DMatrix::from_fn(scaled.len(), d, |r, c| scaled[r][c]);
            let lda = lda_fit(&x, labels, config.ridge_factor)?;
            let points = lda.transform(&x)?;
            let knn = KnnModel::fit(points, labels, config.lambda)?;
            FittedClassifier::LdaKnn { scaler, lda, knn }
        };
        Ok(Pipeline {
            vocab_sha256: vocab_hash(&vocabulary)?,
            hyperparameters: Hyperparameters {
                alpha: selection.alpha,
                beta: config.beta,
                lambda: config.lambda,
                seed: config.seed,
                ridge_factor: config.ridge_factor,
            },
            vocabulary,
            selection,
            classifier,
        })
    }

    pub fn classes(&self) -> &[String] {
        match &self.classifier {
            FittedClassifier::LdaKnn { knn, .. } => &knn.classes,
            FittedClassifier::Tree { tree } => &tree.classes,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.classifier {
            FittedClassifier::LdaKnn { .. } => "lda-knn",
            FittedClassifier::Tree { .. } => "tree",
        }
    }

    /// Selected features of one file.
    pub fn features(&self, strings: &[MetadataString]) -> Result<Vec<f64>> {
        let (v, _) = self.vocabulary.vectorize(strings);
        self.selection.apply(&v.values)
    }

    /// Position in the discriminant plane; `None` for the tree.
    pub fn embed(&self, strings: &[MetadataString]) -> Result<Option<[f64; 2]>> {
        match &self.classifier {
            FittedClassifier::LdaKnn { scaler, lda, .. } => {
                Ok(Some(lda.transform_one(&scaler.apply(&self.features(strings)?)?)?))
            }
            FittedClassifier::Tree { .. } => Ok(None),
        }
    }

    pub fn predict(&self, strings: &[MetadataString]) -> Result<String> {
        let x = self.features(strings)?;
        let label = match &self.classifier {
            FittedClassifier::LdaKnn { scaler, lda, knn } => {
                knn.predict(lda.transform_one(&scaler.apply(&x)?)?)?
            }
            FittedClassifier::Tree { tree } => tree.predict(&x)?,
        };
        Ok(label.to_string())
    }
}

/// A corpus file prepared for one scenario.
#[derive(Clone, Debug)]
pub struct Sample {
    pub file: String,
    pub label: String,
    pub model_id: String,
    pub brand: String,
    pub strings: Vec<MetadataString>,
}

fn column<'r>(record: &'r CorpusRecord, name: &str) -> Result<&'r str> {
    match record.labels.get(name) {
        Some(v) => Ok(v),
        None if record.labels.is_empty() => Ok(&record.label),
        None => Err(Error::Manifest(format!("{}: no {name:?} label", record.file))),
    }
}

/// Filters and labels the corpus for a scenario.
pub fn scenario_samples(config: &ScenarioConfig, records: &[CorpusRecord]) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    for r in records {
        let social = || column(r, "social");
        let label = match config.scenario {
            Scenario::Brand | Scenario::BlindDevice => column(r, "brand")?.to_string(),
            Scenario::Tool => {
                if !social()?.is_empty() {
                    continue;
                }
                match column(r, "tool")? {
                    "" => NATIVE.to_string(),
                    t => t.to_string(),
                }
            }
            Scenario::Social => match social()? {
                "" => OTHER.to_string(),
                s => s.to_string(),
            },
            Scenario::ManipSocial | Scenario::ManipLocal => {
                let s = social()?;
                let keep = match config.scenario {
                    Scenario::ManipLocal => s.is_empty(),
                    _ => match &config.social_network {
                        Some(net) => s == net,
                        None => !s.is_empty(),
                    },
                };
                if !keep {
                    continue;
                }
                column(r, "edited")?.to_string()
            }
        };
        if label.is_empty() {
            return Err(Error::Manifest(format!("{}: empty label", r.file)));
        }
        out.push(Sample {
            file: r.file.clone(),
            label,
            model_id: r.labels.get("model_id").cloned().unwrap_or_default(),
            brand: r.labels.get("brand").cloned().unwrap_or_default(),
            strings: r.parsed_strings()?,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub holdout: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldReport {
    pub model_id: String,
    pub n_train: usize,
    pub n_test: usize,
    pub balanced_accuracy: f64,
    pub tpr: Option<f64>,
    pub tnr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkippedFold {
    pub model_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlindReport {
    pub holdout: String,
    pub true_label: String,
    pub n: usize,
    /// Share of held-out samples predicted as their true label.
    pub fraction_in_true_region: f64,
    pub predicted: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub classifier: String,
    pub config: ScenarioConfig,
    pub classes: Vec<String>,
    pub counts: BTreeMap<String, SplitCounts>,
    pub vocabulary_size: usize,
    pub selected_features: usize,
    pub metrics: Option<Metrics>,
    pub folds: Vec<FoldReport>,
    pub skipped_folds: Vec<SkippedFold>,
    pub mean_balanced_accuracy: Option<f64>,
    pub blind: Option<BlindReport>,
}

impl Report {
    fn new(config: &ScenarioConfig) -> Self {
        Report {
            scenario: config.scenario.to_string(),
            classifier: String::new(),
            config: config.clone(),
            classes: Vec::new(),
            counts: BTreeMap::new(),
            vocabulary_size: 0,
            selected_features: 0,
            metrics: None,
            folds: Vec::new(),
            skipped_folds: Vec::new(),
            mean_balanced_accuracy: None,
            blind: None,
        }
    }

    fn describe(&mut self, pipeline: &Pipeline) {
        self.classifier = pipeline.kind().to_string();
        self.classes = pipeline.classes().to_vec();
        self.vocabulary_size = pipeline.vocabulary.dim();
        self.selected_features = pipeline.selection.retained.len();
    }
}

/// Everything a scenario run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    /// Model of the single fit; `None` for leave-one-model-out.
    pub pipeline: Option<Pipeline>,
    pub svg: Option<String>,
}

/// Runs the configured scenario on a corpus.
pub fn run_scenario(config: &ScenarioConfig, records: &[CorpusRecord]) -> Result<RunOutput> {
    match config.scenario {
        Scenario::ManipLocal => run_leave_one_model_out(config, records),
        Scenario::BlindDevice => {
            let holdout = config.holdout.as_deref().ok_or_else(|| Error::Config {
                line: 0,
                reason: "blind-device needs a holdout device model id".into(),
            })?;
            run_blind_device(config, records, holdout)
        }
        _ => run_split(config, records),
    }
}

fn positive_label(config: &ScenarioConfig) -> Option<&'static str> {
    matches!(config.scenario, Scenario::ManipSocial | Scenario::ManipLocal).then_some(EDITED)
}

fn run_split(config: &ScenarioConfig, records: &[CorpusRecord]) -> Result<RunOutput> {
    let samples = scenario_samples(config, records)?;
    let labels: Vec<String> = samples.iter().map(|s| s.label.clone()).collect();
    let (train, validation) = stratified_split(&labels, config.seed)?;

    let train_strings: Vec<&[MetadataString]> = train.iter().map(|&i| samples[i].strings.as_slice()).collect();
    let train_labels: Vec<String> = train.iter().map(|&i| labels[i].clone()).collect();
    let pipeline = Pipeline::fit(&train_strings, &train_labels, config)?;

    let mut report = Report::new(config);
    report.describe(&pipeline);
    for &i in &train {
        report.counts.entry(labels[i].clone()).or_default().train += 1;
    }
    for &i in &validation {
        report.counts.entry(labels[i].clone()).or_default().validation += 1;
    }

    let predictions: Vec<String> = validation
        .iter()
        .map(|&i| pipeline.predict(&samples[i].strings))
        .collect::<Result<_>>()?;
    let truth: Vec<String> = validation.iter().map(|&i| labels[i].clone()).collect();
    report.metrics = Some(evaluate(pipeline.classes(), &truth, &predictions, positive_label(config))?);

    let svg = plot(config, &pipeline, &samples, &[(&train, PointKind::Train), (&validation, PointKind::Validation)])?;
    Ok(RunOutput {
        report,
        pipeline: Some(pipeline),
        svg,
    })
}

/// Scatter plot with decision regions for the LDA + kNN classifier.
fn plot(
    config: &ScenarioConfig,
    pipeline: &Pipeline,
    samples: &[Sample],
    groups: &[(&[usize], PointKind)],
) -> Result<Option<String>> {
    let FittedClassifier::LdaKnn { knn, .. } = &pipeline.classifier else {
        return Ok(None);
    };
    let classes = pipeline.classes();
    let mut points = Vec::new();
    for (indices, kind) in groups {
        for &i in indices.iter() {
            let xy = pipeline.embed(&samples[i].strings)?.expect("lda pipeline embeds");
            let label = match kind {
                PointKind::Holdout => &samples[i].brand,
                _ => &samples[i].label,
            };
            points.push(PlotPoint {
                xy,
                class: classes.iter().position(|c| c == label),
                kind: *kind,
            });
        }
    }
    let xy: Vec<[f64; 2]> = points.iter().map(|p| p.xy).collect();
    let bounds = Bounds::around(&xy, 0.05);
    let grid = decision_grid(knn, bounds, config.grid_resolution, config.grid_resolution);
    let title = format!("{} scenario", config.scenario);
    Ok(Some(emit_svg(&title, classes, &points, Some(&grid), bounds)))
}

/// Trains on every device model except `holdout` and reports where the
/// held-out samples land.
pub fn run_blind_device(config: &ScenarioConfig, records: &[CorpusRecord], holdout: &str) -> Result<RunOutput> {
    let mut config = config.clone();
    config.scenario = Scenario::BlindDevice;
    config.holdout = Some(holdout.to_string());
    let samples = scenario_samples(&config, records)?;
    let (held, train): (Vec<usize>, Vec<usize>) =
        (0..samples.len()).partition(|&i| samples[i].model_id == holdout);
    if held.is_empty() {
        return Err(Error::UnknownDeviceId(holdout.to_string()));
    }
    let train_strings: Vec<&[MetadataString]> = train.iter().map(|&i| samples[i].strings.as_slice()).collect();
    let train_labels: Vec<String> = train.iter().map(|&i| samples[i].label.clone()).collect();
    let pipeline = Pipeline::fit(&train_strings, &train_labels, &config)?;

    let mut report = Report::new(&config);
    report.describe(&pipeline);
    for &i in &train {
        report.counts.entry(samples[i].label.clone()).or_default().train += 1;
    }
    for &i in &held {
        report.counts.entry(samples[i].label.clone()).or_default().holdout += 1;
    }

    let mut predicted = BTreeMap::new();
    let mut hits = 0;
    for &i in &held {
        let p = pipeline.predict(&samples[i].strings)?;
        if p == samples[i].label {
            hits += 1;
        }
        *predicted.entry(p).or_insert(0) += 1;
    }
    let true_labels: BTreeSet<&str> = held.iter().map(|&i| samples[i].label.as_str()).collect();
    if !true_labels.iter().all(|l| pipeline.classes().iter().any(|c| c == l)) {
        log::warn!("held-out brand is absent from training; no sample can land in its region");
    }
    report.blind = Some(BlindReport {
        holdout: holdout.to_string(),
        true_label: true_labels.into_iter().collect::<Vec<_>>().join(","),
        n: held.len(),
        fraction_in_true_region: hits as f64 / held.len() as f64,
        predicted,
    });
    let svg = plot(&config, &pipeline, &samples, &[(&train, PointKind::Train), (&held, PointKind::Holdout)])?;
    Ok(RunOutput {
        report,
        pipeline: Some(pipeline),
        svg,
    })
}

/// One fold per device model: train on the others, score balanced
/// accuracy on the held-out model, average over folds.
pub fn run_leave_one_model_out(config: &ScenarioConfig, records: &[CorpusRecord]) -> Result<RunOutput> {
    let mut config = config.clone();
    config.scenario = Scenario::ManipLocal;
    let mut samples = scenario_samples(&config, records)?;

    if config.discard_single_model_brands {
        let mut models_per_brand: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for s in &samples {
            models_per_brand.entry(s.brand.clone()).or_default().insert(s.model_id.clone());
        }
        samples.retain(|s| {
            let keep = models_per_brand[&s.brand].len() > 1;
            if !keep {
                log::info!("discarding {} (only device model of brand {:?})", s.file, s.brand);
            }
            keep
        });
    }
    let models: BTreeSet<String> = samples.iter().map(|s| s.model_id.clone()).collect();
    if models.len() < 2 {
        return Err(Error::NotEnoughModels(models.len()));
    }

    let mut report = Report::new(&config);
    let classes: BTreeSet<String> = samples.iter().map(|s| s.label.clone()).collect();
    report.classes = classes.iter().cloned().collect();
    for s in &samples {
        report.counts.entry(s.label.clone()).or_default().train += 1;
    }
    for model in &models {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..samples.len()).partition(|&i| &samples[i].model_id == model);
        let train_labels: Vec<String> = train.iter().map(|&i| samples[i].label.clone()).collect();
        let present: BTreeSet<&String> = train_labels.iter().collect();
        if present.len() < classes.len() {
            report.skipped_folds.push(SkippedFold {
                model_id: model.clone(),
                reason: "a class is missing from the training folds".into(),
            });
            continue;
        }
        let train_strings: Vec<&[MetadataString]> = train.iter().map(|&i| samples[i].strings.as_slice()).collect();
        let pipeline = match Pipeline::fit(&train_strings, &train_labels, &config) {
            Ok(p) => p,
            Err(e) if e.is_data_error() => {
                report.skipped_folds.push(SkippedFold {
                    model_id: model.clone(),
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        report.classifier = pipeline.kind().to_string();
        let truth: Vec<String> = test.iter().map(|&i| samples[i].label.clone()).collect();
        let predictions: Vec<String> = test
            .iter()
            .map(|&i| pipeline.predict(&samples[i].strings))
            .collect::<Result<_>>()?;
        let m = evaluate(&report.classes, &truth, &predictions, Some(EDITED))?;
        report.folds.push(FoldReport {
            model_id: model.clone(),
            n_train: train.len(),
            n_test: test.len(),
            balanced_accuracy: m.balanced_accuracy,
            tpr: m.tpr,
            tnr: m.tnr,
        });
    }
    if report.folds.is_empty() {
        return Err(Error::NoFolds(format!("{} fold(s) skipped", report.skipped_folds.len())));
    }
    report.mean_balanced_accuracy =
        Some(report.folds.iter().map(|f| f.balanced_accuracy).sum::<f64>() / report.folds.len() as f64);
    Ok(RunOutput {
        report,
        pipeline: None,
        svg: None,
    })
}

/// Plain-text summary for the terminal.
pub fn format_table(report: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}  classifier: {}", report.scenario, report.classifier);
    if report.vocabulary_size > 0 {
        let _ = writeln!(
            s,
            "features: {} in vocabulary, {} selected",
            report.vocabulary_size, report.selected_features
        );
    }
    let width = report.classes.iter().map(String::len).max().unwrap_or(5).max(5);
    let _ = writeln!(s, "{:<width$}  {:>5}  {:>10}  {:>7}  {:>6}", "class", "train", "validation", "holdout", "F1");
    for (i, class) in report.classes.iter().enumerate() {
        let c = report.counts.get(class).cloned().unwrap_or_default();
        let f1 = report
            .metrics
            .as_ref()
            .map_or("-".to_string(), |m| format!("{:.2}", m.per_class_f1[i]));
        let _ = writeln!(
            s,
            "{class:<width$}  {:>5}  {:>10}  {:>7}  {f1:>6}",
            c.train, c.validation, c.holdout
        );
    }
    if let Some(m) = &report.metrics {
        let avg = m.per_class_f1.iter().sum::<f64>() / m.per_class_f1.len().max(1) as f64;
        let _ = writeln!(s, "average F1 {avg:.2}  accuracy {:.2}  balanced accuracy {:.2}", m.accuracy, m.balanced_accuracy);
        if let (Some(tpr), Some(tnr)) = (m.tpr, m.tnr) {
            let _ = writeln!(s, "TPR {tpr:.2}  TNR {tnr:.2}");
        }
        let _ = writeln!(s, "confusion (rows: truth, columns: prediction)");
        for (class, row) in report.classes.iter().zip(&m.confusion) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>5}")).collect();
            let _ = writeln!(s, "{class:<width$}  {}", cells.join(" "));
        }
    }
    for f in &report.folds {
        let _ = writeln!(s, "fold {:<12} n={:<5} balanced accuracy {:.2}", f.model_id, f.n_test, f.balanced_accuracy);
    }
    for f in &report.skipped_folds {
        let _ = writeln!(s, "fold {:<12} skipped: {}", f.model_id, f.reason);
    }
    if let Some(mean) = report.mean_balanced_accuracy {
        let _ = writeln!(s, "mean balanced accuracy over {} folds: {mean:.2}", report.folds.len());
    }
    if let Some(b) = &report.blind {
        let _ = writeln!(
            s,
            "held-out {} ({}): {} sample(s), {:.2} in the true region",
            b.holdout, b.true_label, b.n, b.fraction_in_true_region
        );
    }
    s
}

/// Writes `metrics.json`, `model.json` and `plot.svg` into `out_dir`.
pub fn write_outputs(out_dir: &Path, output: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = out_dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::io(path, e))
    };
    let mut metrics = serde_json::to_vec_pretty(&output.report)?;
    metrics.push(b'\n');
    write("metrics.json", &metrics)?;
    if let Some(p) = &output.pipeline {
        let mut model = serde_json::to_vec_pretty(p)?;
        model.push(b'\n');
        write("model.json", &model)?;
    }
    if let Some(svg) = &output.svg {
        write("plot.svg", svg.as_bytes())?;
    }
    Ok(())
}
