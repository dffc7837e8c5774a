//! Scoring extracted tables against ground truth and comparing methods.

pub mod ablation;
pub mod ap;
pub mod matching;
pub mod report;

pub use ablation::{
    decode_outcome, detector_report, evaluate_variants, input_scene, run_ablation, truth_table,
    AblationRow, AblationTable, Source, Variant,
};
pub use ap::{detector_ap, pooled_ap, PrCurve, PrPoint};
pub use matching::{brute_force_max_matching, match_points, prf, MatchResult, MATCH_TOLERANCE};
pub use report::{
    evaluate_chart, summarize, ChartEval, ClassAp, CorpusSummary, EvalReport, Outcome, SUCCESS_F1,
};
