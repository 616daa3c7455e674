//! Robustness experiments: attack sweeps, detector-response runs, and the
//! aggregated report consumed by the CLI benchmark command.
//!
//! All runs are sequential and deterministic: images are processed in corpus
//! order, attacks in suite order, and every random draw comes from seeds
//! recorded in the output, so reruns are byte-identical (reports differ only
//! in their timestamp).

use crate::attack::{Attack, AttackError, AttackSpec};
use crate::corpus::NamedImage;
use crate::gray::GrayImage;
use crate::metrics::{correlation, psnr, DetectionResult};
use crate::watermark::{embed, extract, AlphaSchedule};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("duplicate corpus image name {0:?}")]
    DuplicateImageName(String),
    #[error("attack suite is empty")]
    EmptyAttackSuite,
    #[error("invalid sweep parameters: {0}")]
    BadSweepParams(String),
    #[error("candidate mark list is empty")]
    NoCandidates,
    #[error("true mark index {index} out of range for {count} candidates")]
    BadTrueIndex { index: usize, count: usize },
    #[error("candidate mark {index} is {width}x{height}, host is {host}x{host}")]
    CandidateShape { index: usize, width: usize, height: usize, host: usize },
    #[error("image {image:?}: {message}")]
    Cell { image: String, message: String },
}

fn cell_err(image: &str, err: impl ToString) -> HarnessError {
    HarnessError::Cell { image: image.to_string(), message: err.to_string() }
}

/// One aggregated sweep point: correlations over the corpus at one setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub mean_corr: f64,
    pub min_corr: f64,
    pub max_corr: f64,
}

/// Correlation-vs-parameter curve for one attack family, parameters in the
/// order they were requested (validated strictly increasing).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub attack_kind: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// CSV rendering, one row per point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,mean_corr,min_corr,max_corr\n");
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.param, p.mean_corr, p.min_corr, p.max_corr)
                .expect("writing to a String cannot fail");
        }
        out
    }
}

/// Correlation of one extracted mark against every candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorResponse {
    correlations: Vec<f64>,
    true_index: usize,
    argmax: usize,
}

impl DetectorResponse {
    fn new(correlations: Vec<f64>, true_index: usize) -> Self {
        debug_assert!(!correlations.is_empty());
        let argmax = correlations
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).expect("correlations are finite"))
            .map(|(i, _)| i)
            .expect("list is non-empty");
        DetectorResponse { correlations, true_index, argmax }
    }

    pub fn correlations(&self) -> &[f64] {
        &self.correlations
    }

    pub fn true_index(&self) -> usize {
        self.true_index
    }

    /// Index of the strongest response (first one on exact ties).
    pub fn argmax(&self) -> usize {
        self.argmax
    }

    pub fn peak(&self) -> f64 {
        self.correlations[self.argmax]
    }

    pub fn detected_at_true_index(&self) -> bool {
        self.argmax == self.true_index
    }
}

/// Outcome of one (image, attack) cell; failures are recorded, not fatal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellOutcome {
    Measured(DetectionResult),
    Failed { error: String },
}

/// One attack row of the report: the resolved attack and one cell per image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackRow {
    pub label: String,
    pub spec: AttackSpec,
    pub cells: BTreeMap<String, CellOutcome>,
}

/// Aggregated robustness evaluation, serialized as the benchmark's JSON
/// artifact. Reruns with the same inputs differ only in `timestamp_epoch_secs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub corpus_id: String,
    pub toolkit_version: String,
    pub seed: u64,
    pub threshold: f64,
    pub alpha: AlphaSchedule,
    pub embed_psnr_db: BTreeMap<String, f64>,
    pub attack_rows: Vec<AttackRow>,
    pub sweeps: Vec<SweepResult>,
    pub timestamp_epoch_secs: u64,
}

impl RobustnessReport {
    /// True when every cell in every attack row measured a detection.
    pub fn all_detected(&self) -> bool {
        self.attack_rows.iter().all(|row| {
            row.cells.values().all(|c| matches!(c, CellOutcome::Measured(d) if d.detected()))
        })
    }
}

/// Report identity fields that are not derivable from the inputs themselves.
#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub corpus_id: String,
    pub threshold: f64,
    pub seed: u64,
}

fn check_corpus(corpus: &[NamedImage]) -> Result<(), HarnessError> {
    if corpus.is_empty() {
        return Err(HarnessError::EmptyCorpus);
    }
    let mut seen = Vec::with_capacity(corpus.len());
    for img in corpus {
        if seen.contains(&img.name.as_str()) {
            return Err(HarnessError::DuplicateImageName(img.name.clone()));
        }
        seen.push(img.name.as_str());
    }
    Ok(())
}

/// Embed once per image, attack at each parameter, and aggregate
/// correlations per parameter over the corpus.
fn sweep<P: Copy + Into<f64>>(
    corpus: &[NamedImage],
    mark: &GrayImage,
    alpha: AlphaSchedule,
    attack_kind: &str,
    params: &[P],
    apply: impl Fn(&GrayImage, P) -> Result<GrayImage, AttackError>,
) -> Result<SweepResult, HarnessError> {
    check_corpus(corpus)?;
    let mut per_param: Vec<Vec<f64>> = vec![Vec::with_capacity(corpus.len()); params.len()];
    for img in corpus {
        let (wm, key) = embed(&img.image, mark, alpha).map_err(|e| cell_err(&img.name, e))?;
        for (slot, &p) in per_param.iter_mut().zip(params) {
            let attacked = apply(&wm, p).map_err(|e| cell_err(&img.name, e))?;
            let est = extract(&attacked, &key).map_err(|e| cell_err(&img.name, e))?;
            let c = correlation(mark, &est).map_err(|e| cell_err(&img.name, e))?;
            slot.push(c);
        }
    }
    let points = params
        .iter()
        .zip(&per_param)
        .map(|(&p, corrs)| {
            let mean = corrs.iter().sum::<f64>() / corrs.len() as f64;
            let min = corrs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = corrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            SweepPoint { param: p.into(), mean_corr: mean, min_corr: min, max_corr: max }
        })
        .collect();
    Ok(SweepResult { attack_kind: attack_kind.to_string(), points })
}

fn check_increasing<P: PartialOrd>(params: &[P], what: &str) -> Result<(), HarnessError> {
    if params.is_empty() {
        return Err(HarnessError::BadSweepParams(format!("{what} list is empty")));
    }
    if !params.windows(2).all(|w| w[0] < w[1]) {
        return Err(HarnessError::BadSweepParams(format!(
            "{what} values must be strictly increasing"
        )));
    }
    Ok(())
}

/// JPEG quality-factor sweep over the corpus.
pub fn run_qf_sweep(
    corpus: &[NamedImage],
    mark: &GrayImage,
    alpha: AlphaSchedule,
    qf_list: &[u32],
) -> Result<SweepResult, HarnessError> {
    check_increasing(qf_list, "qf")?;
    if let Some(&bad) = qf_list.iter().find(|&&q| !(1..=100).contains(&q)) {
        return Err(HarnessError::BadSweepParams(format!("qf {bad} outside [1, 100]")));
    }
    sweep(corpus, mark, alpha, "jpeg", qf_list, crate::attack::attack_jpeg)
}

/// Median window-size sweep over the corpus.
pub fn run_median_sweep(
    corpus: &[NamedImage],
    mark: &GrayImage,
    alpha: AlphaSchedule,
    windows: &[usize],
) -> Result<SweepResult, HarnessError> {
    check_increasing(windows, "window")?;
    if let Some(&bad) = windows.iter().find(|&&w| w < 3 || w % 2 == 0) {
        return Err(HarnessError::BadSweepParams(format!("window {bad} must be odd and >= 3")));
    }
    let p: Vec<u32> = windows.iter().map(|&w| w as u32).collect();
    sweep(corpus, mark, alpha, "median", &p, |img, w| {
        crate::attack::attack_median(img, w as usize)
    })
}

/// Embed the true mark, attack, extract, and correlate the extraction
/// against every candidate mark.
pub fn run_detector_response(
    host: &GrayImage,
    marks: &[GrayImage],
    true_index: usize,
    alpha: AlphaSchedule,
    attack: &Attack,
) -> Result<DetectorResponse, HarnessError> {
    if marks.is_empty() {
        return Err(HarnessError::NoCandidates);
    }
    if true_index >= marks.len() {
        return Err(HarnessError::BadTrueIndex { index: true_index, count: marks.len() });
    }
    for (i, m) in marks.iter().enumerate() {
        if m.width() != host.width() || m.height() != host.height() {
            return Err(HarnessError::CandidateShape {
                index: i,
                width: m.width(),
                height: m.height(),
                host: host.width(),
            });
        }
    }
    let host_name = "detector-host";
    let (wm, key) =
        embed(host, &marks[true_index], alpha).map_err(|e| cell_err(host_name, e))?;
    let attacked = attack.apply(&wm).map_err(|e| cell_err(host_name, e))?;
    let est = extract(&attacked, &key).map_err(|e| cell_err(host_name, e))?;
    let correlations = marks
        .iter()
        .map(|m| correlation(m, &est).map_err(|e| cell_err(host_name, e)))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(DetectorResponse::new(correlations, true_index))
}

/// Embed once per corpus image, run every attack on the watermarked image,
/// and record one detection cell per (attack, image). Per-cell failures are
/// recorded in the cell rather than aborting the run.
pub fn run_full_report(
    corpus: &[NamedImage],
    mark: &GrayImage,
    alpha: AlphaSchedule,
    attack_suite: &[Attack],
    config: &ReportConfig,
) -> Result<RobustnessReport, HarnessError> {
    check_corpus(corpus)?;
    if attack_suite.is_empty() {
        return Err(HarnessError::EmptyAttackSuite);
    }
    let mut embed_psnr_db = BTreeMap::new();
    let mut prepared = Vec::with_capacity(corpus.len());
    for img in corpus {
        match embed(&img.image, mark, alpha) {
            Ok((wm, key)) => {
                let p = psnr(&img.image, &wm).expect("embed preserves dimensions");
                embed_psnr_db.insert(img.name.clone(), p);
                prepared.push((img.name.clone(), Ok((wm, key))));
            }
            Err(e) => prepared.push((img.name.clone(), Err(e.to_string()))),
        }
    }
    let mut attack_rows = Vec::with_capacity(attack_suite.len());
    for attack in attack_suite {
        let mut cells = BTreeMap::new();
        for (name, embedded) in &prepared {
            let outcome = match embedded {
                Err(e) => CellOutcome::Failed { error: format!("embed: {e}") },
                Ok((wm, key)) => match run_cell(wm, key, mark, attack, config.threshold) {
                    Ok(d) => CellOutcome::Measured(d),
                    Err(e) => CellOutcome::Failed { error: e },
                },
            };
            cells.insert(name.clone(), outcome);
        }
        attack_rows.push(AttackRow { label: attack.label(), spec: attack.to_spec(), cells });
    }
    Ok(RobustnessReport {
        corpus_id: config.corpus_id.clone(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        threshold: config.threshold,
        alpha,
        embed_psnr_db,
        attack_rows,
        sweeps: Vec::new(),
        timestamp_epoch_secs: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    })
}

fn run_cell(
    wm: &GrayImage,
    key: &crate::watermark::WatermarkKey,
    mark: &GrayImage,
    attack: &Attack,
    threshold: f64,
) -> Result<DetectionResult, String> {
    let attacked = attack.apply(wm).map_err(|e| e.to_string())?;
    let est = extract(&attacked, key).map_err(|e| e.to_string())?;
    let c = correlation(mark, &est).map_err(|e| e.to_string())?;
    Ok(DetectionResult::new(c, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::NamedImage;
    use crate::metrics::DEFAULT_THRESHOLD;

    /// Small smooth corpus so harness plumbing tests stay fast; the full-size
    /// statistical claims live in the acceptance suite.
    fn mini_corpus(n: usize) -> Vec<NamedImage> {
        let mut out = Vec::new();
        for (idx, name) in ["a", "b"].iter().enumerate() {
            let img = crate::corpus::value_noise(n, &[n / 4, n / 2], &[1.0, 1.5], 50 + idx as u64);
            let mut px = Vec::with_capacity(n * n);
            for r in 0..n {
                for c in 0..n {
                    px.push((128.0 + 60.0 * img[(r, c)]).clamp(0.0, 255.0).round() as u8);
                }
            }
            out.push(NamedImage::new(*name, GrayImage::new(n, n, px).unwrap()));
        }
        out
    }

    fn mini_mark(n: usize, seed: u64) -> GrayImage {
        crate::corpus::synthetic_mark(seed, n)
    }

    #[test]
    fn qf_sweep_shape_and_validation() {
        let corpus = mini_corpus(32);
        let mark = mini_mark(32, 7);
        let alpha = AlphaSchedule::default();
        let r = run_qf_sweep(&corpus, &mark, alpha, &[50, 90]).unwrap();
        assert_eq!(r.attack_kind, "jpeg");
        assert_eq!(r.points.len(), 2);
        for p in &r.points {
            assert!(p.min_corr <= p.mean_corr && p.mean_corr <= p.max_corr);
            assert!(p.min_corr >= -1.0 && p.max_corr <= 1.0);
        }
        assert!(run_qf_sweep(&[], &mark, alpha, &[50]).is_err());
        assert!(run_qf_sweep(&corpus, &mark, alpha, &[]).is_err());
        assert!(run_qf_sweep(&corpus, &mark, alpha, &[50, 50]).is_err());
        assert!(run_qf_sweep(&corpus, &mark, alpha, &[0, 50]).is_err());
    }

    #[test]
    fn constant_mark_fails_with_image_named() {
        let corpus = mini_corpus(32);
        let mark = GrayImage::flat(32, 32, 128).unwrap();
        let err =
            run_qf_sweep(&corpus, &mark, AlphaSchedule::default(), &[90]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("\"a\""), "{msg}");
        assert!(msg.contains("constant"), "{msg}");
    }

    #[test]
    fn median_sweep_validates_windows() {
        let corpus = mini_corpus(32);
        let mark = mini_mark(32, 7);
        let alpha = AlphaSchedule::default();
        assert!(run_median_sweep(&corpus, &mark, alpha, &[3, 4]).is_err());
        assert!(run_median_sweep(&corpus, &mark, alpha, &[5, 3]).is_err());
        let r = run_median_sweep(&corpus, &mark, alpha, &[3]).unwrap();
        assert_eq!(r.points.len(), 1);
    }

    #[test]
    fn csv_has_contract_header() {
        let s = SweepResult {
            attack_kind: "jpeg".into(),
            points: vec![SweepPoint { param: 10.0, mean_corr: 0.5, min_corr: 0.25, max_corr: 1.0 }],
        };
        assert_eq!(s.to_csv(), "param,mean_corr,min_corr,max_corr\n10,0.5,0.25,1\n");
    }

    #[test]
    fn detector_response_peaks_at_true_mark_without_attack() {
        let n = 32;
        let host = mini_corpus(n).remove(0).image;
        let marks: Vec<GrayImage> = (0..6).map(|i| mini_mark(n, 100 + i)).collect();
        let resp = run_detector_response(
            &host,
            &marks,
            3,
            AlphaSchedule::default(),
            &Attack::ColorReduce { levels: 256 },
        )
        .unwrap();
        assert_eq!(resp.argmax(), 3);
        assert!(resp.detected_at_true_index());
        assert!(resp.peak() >= 0.9, "peak={}", resp.peak());
        assert_eq!(resp.correlations().len(), 6);
    }

    #[test]
    fn detector_response_validates_inputs() {
        let n = 32;
        let host = mini_corpus(n).remove(0).image;
        let marks: Vec<GrayImage> = (0..3).map(|i| mini_mark(n, 100 + i)).collect();
        let alpha = AlphaSchedule::default();
        let attack = Attack::HistEq;
        assert!(matches!(
            run_detector_response(&host, &[], 0, alpha, &attack).unwrap_err(),
            HarnessError::NoCandidates
        ));
        assert!(matches!(
            run_detector_response(&host, &marks, 3, alpha, &attack).unwrap_err(),
            HarnessError::BadTrueIndex { index: 3, count: 3 }
        ));
        let mut bad = marks.clone();
        bad[1] = mini_mark(16, 5);
        assert!(matches!(
            run_detector_response(&host, &bad, 0, alpha, &attack).unwrap_err(),
            HarnessError::CandidateShape { index: 1, .. }
        ));
    }

    #[test]
    fn full_report_covers_every_cell_and_roundtrips() {
        let corpus = mini_corpus(32);
        let mark = mini_mark(32, 7);
        let suite =
            vec![Attack::ColorReduce { levels: 256 }, Attack::SaltPepper { density: 0.01, seed: 1 }];
        let config = ReportConfig {
            corpus_id: "mini".into(),
            threshold: DEFAULT_THRESHOLD,
            seed: 42,
        };
        let report =
            run_full_report(&corpus, &mark, AlphaSchedule::default(), &suite, &config).unwrap();
        assert_eq!(report.attack_rows.len(), 2);
        for row in &report.attack_rows {
            assert_eq!(row.cells.len(), corpus.len());
            for img in &corpus {
                assert!(row.cells.contains_key(&img.name));
            }
        }
        assert_eq!(report.embed_psnr_db.len(), 2);
        assert!(report.all_detected());
        let json = serde_json::to_string_pretty(&report).unwrap();
        let back: RobustnessReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn full_report_records_cell_failures_non_fatally() {
        let corpus = mini_corpus(32);
        let mark = mini_mark(32, 7);
        // Border too large for 32x32: every cell in that row must report the
        // failure while the clean row still measures.
        let suite = vec![Attack::CropBorder { border: 16 }, Attack::HistEq];
        let config =
            ReportConfig { corpus_id: "mini".into(), threshold: DEFAULT_THRESHOLD, seed: 1 };
        let report =
            run_full_report(&corpus, &mark, AlphaSchedule::default(), &suite, &config).unwrap();
        assert!(!report.all_detected());
        for cell in report.attack_rows[0].cells.values() {
            assert!(matches!(cell, CellOutcome::Failed { .. }));
        }
        for cell in report.attack_rows[1].cells.values() {
            assert!(matches!(cell, CellOutcome::Measured(_)));
        }
    }

    #[test]
    fn full_report_rejects_bad_inputs() {
        let corpus = mini_corpus(32);
        let mark = mini_mark(32, 7);
        let config =
            ReportConfig { corpus_id: "x".into(), threshold: DEFAULT_THRESHOLD, seed: 1 };
        assert!(matches!(
            run_full_report(&[], &mark, AlphaSchedule::default(), &[Attack::HistEq], &config)
                .unwrap_err(),
            HarnessError::EmptyCorpus
        ));
        assert!(matches!(
            run_full_report(&corpus, &mark, AlphaSchedule::default(), &[], &config).unwrap_err(),
            HarnessError::EmptyAttackSuite
        ));
        let mut dup = mini_corpus(32);
        dup[1].name = dup[0].name.clone();
        assert!(matches!(
            run_full_report(&dup, &mark, AlphaSchedule::default(), &[Attack::HistEq], &config)
                .unwrap_err(),
            HarnessError::DuplicateImageName(_)
        ));
    }
}
