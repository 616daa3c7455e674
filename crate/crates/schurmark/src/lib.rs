//! Grayscale image watermarking toolkit built on a Schur-factor embedding in
//! the global DCT domain.
//!
//! The embedder takes a host image and an equally sized mark image, computes
//! the host's 2-D DCT and the mark's real Schur decomposition, adds the gained
//! triangular factor to the DCT coefficients, and inverts the transform. The
//! orthogonal Schur factor together with the original DCT grid forms the
//! extraction key. The crate also ships the deterministic attack suite,
//! quality/detection metrics, PGM image I/O, a synthetic benchmark corpus,
//! and the robustness evaluation harness used by the CLI.

pub mod attack;
pub mod corpus;
pub mod dct;
pub mod gray;
pub mod harness;
pub mod key;
pub mod matrix;
pub mod metrics;
pub mod pgm;
pub mod schur;
pub mod watermark;

pub use attack::{Attack, AttackError, AttackSpec};
pub use corpus::{
    candidate_marks, corpus, default_mark, sweep_corpus, synthetic_mark, NamedImage, CORPUS_ID,
    CORPUS_SIDE,
};
pub use dct::DctPlan;
pub use harness::{
    run_detector_response, run_full_report, run_median_sweep, run_qf_sweep, AttackRow,
    CellOutcome, DetectorResponse, HarnessError, ReportConfig, RobustnessReport, SweepPoint,
    SweepResult,
};
pub use gray::{GrayImage, ImageError};
pub use matrix::{Matrix, MatrixError};
pub use metrics::{correlation, mse, psnr, DetectionResult, MetricsError, DEFAULT_THRESHOLD};
pub use key::{read_key, write_key, write_key_json, KeyError};
pub use pgm::{read_pgm, write_pgm, PgmError};
pub use schur::{hessenberg, schur_decompose, schur_reconstruct, SchurFactors};
pub use watermark::{
    embed, embed_float, embed_tiled, extract, extract_float, AlphaSchedule, WatermarkError,
    WatermarkKey,
};
