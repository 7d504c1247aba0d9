//! Prediction reports, safety verdicts, evaluation and the command layer.

mod commands;
mod evaluate;
mod plot;
mod predictor;
mod report;
mod scenarios;

pub use commands::{
    cmd_assess, cmd_evaluate, cmd_generate, cmd_predict, cmd_train, input_grid, material_condition, sidecar,
    EvaluateArgs, GenerateSummary, PredictArgs, PredictInput, TrainArgs, TrainSummary,
};
pub use evaluate::{evaluate, EvalMode, EvalReport, EvalRow, HoldoutRow, TableRow, WheelRow};
pub use plot::{bar_chart, slice_png};
pub use predictor::{NetworkPredictor, OraclePredictor, Predictor};
pub use report::{
    assess, assess_report, DeflectionMode, PredictionReport, ProbeDeflection, SafetyVerdict, DEFAULT_CLEARANCE,
    DEFAULT_THRESHOLD,
};
pub use scenarios::{
    bridge_config, foam_config, foam_wheels, safety_table, SafetyRow, WheelAssessment, WHEEL_LAYOUT,
};
