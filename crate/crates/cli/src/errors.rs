use nyman_core::arithmetic::ArithmeticError;
use nyman_core::contour::ContourError;
use nyman_core::hilbert::HilbertError;
use nyman_core::integrals::IntegralError;
use nyman_core::special_functions::SpecialFunctionError;
use nyman_core::zeros::ZeroError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Zeros(#[from] ZeroError),
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Leading identifier of a `Debug` rendering, i.e. the variant name.
fn variant<T: std::fmt::Debug>(e: &T) -> String {
    format!("{e:?}").chars().take_while(|c| c.is_alphanumeric() || *c == '_').collect()
}

fn special_code(e: &SpecialFunctionError) -> String {
    format!("special_functions.{}", variant(e))
}

fn arithmetic_code(e: &ArithmeticError) -> String {
    format!("arithmetic_tables.{}", variant(e))
}

fn zeros_code(e: &ZeroError) -> String {
    format!("zeros_and_typicality.{}", variant(e))
}

impl CliError {
    /// Module-qualified error code such as `perron_contour.KappaExceedsK`.
    pub fn code(&self) -> String {
        match self {
            CliError::Hilbert(HilbertError::Special(e)) => special_code(e),
            CliError::Hilbert(HilbertError::Arithmetic(e)) => arithmetic_code(e),
            CliError::Hilbert(e) => format!("hilbert_space.{}", variant(e)),
            CliError::Integral(IntegralError::Special(e)) => special_code(e),
            CliError::Integral(IntegralError::Arithmetic(e)) => arithmetic_code(e),
            CliError::Integral(e) => format!("criterion_integrals.{}", variant(e)),
            CliError::Contour(ContourError::Special(e)) => special_code(e),
            CliError::Contour(ContourError::Arithmetic(e)) => arithmetic_code(e),
            CliError::Contour(ContourError::Zeros(e)) => zeros_code(e),
            CliError::Contour(e) => format!("perron_contour.{}", variant(e)),
            CliError::Zeros(e) => zeros_code(e),
            CliError::Arithmetic(e) => arithmetic_code(e),
            CliError::Special(e) => special_code(e),
            CliError::Param(_) => "cli_runner.InvalidParameter".into(),
            CliError::Io(_) => "cli_runner.Io".into(),
            CliError::Json(_) => "cli_runner.Json".into(),
        }
    }
}
