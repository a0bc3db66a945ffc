mod eval;
mod infer;
mod report;
mod synth;
mod train;

pub use eval::{run_eval, EvalArgs};
pub use infer::{run_infer, InferArgs};
pub use report::{run_report, ReportArgs};
pub use synth::{run_synth, SynthArgs};
pub use train::{run_train, TrainArgs};
