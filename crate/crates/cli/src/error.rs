use filament_core::acwe::AcweError;
use filament_core::baselines::BaselineError;
use filament_core::eval::EvalError;
use filament_core::io::IoError;
use filament_core::pipeline::PipelineError;
use filament_core::preprocess::PreprocessError;
use filament_core::synth::SynthError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_STAGE: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{stage}: {message}")]
    Stage { stage: String, message: String },
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Stage { .. } => EXIT_STAGE,
            CliError::Mismatch(_) => EXIT_MISMATCH,
        }
    }

    pub fn stage(stage: &str, err: impl std::fmt::Display) -> Self {
        CliError::Stage { stage: stage.to_owned(), message: err.to_string() }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Stage { stage, source } => CliError::stage(stage.name(), source),
            PipelineError::Baseline { method, source } => CliError::stage(method, source),
            PipelineError::Io(io) => CliError::Io(io),
            PipelineError::Config(msg) => CliError::Usage(format!("invalid configuration: {msg}")),
            PipelineError::Json(err) => CliError::Usage(format!("malformed JSON: {err}")),
            PipelineError::Eval(err) => err.into(),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Dimensions(d) => CliError::Mismatch(d.to_string()),
            other => CliError::stage("evaluate", other),
        }
    }
}

impl From<PreprocessError> for CliError {
    fn from(e: PreprocessError) -> Self {
        match e {
            PreprocessError::Config(msg) => CliError::Usage(format!("invalid inpainting configuration: {msg}")),
            other => CliError::stage("preprocess", other),
        }
    }
}

impl From<AcweError> for CliError {
    fn from(e: AcweError) -> Self {
        match e {
            AcweError::Config(msg) => CliError::Usage(format!("invalid ACWE configuration: {msg}")),
            other => CliError::stage("evolve", other),
        }
    }
}

impl From<BaselineError> for CliError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::Config(msg) => CliError::Usage(format!("invalid baseline configuration: {msg}")),
            other => CliError::stage("baseline", other),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Spec(msg) => CliError::Usage(format!("invalid synthetic spec: {msg}")),
            SynthError::Io(io) => CliError::Io(io),
            other => CliError::stage("synth", other),
        }
    }
}
