use std::fs;
use std::path::Path;
use std::process::ExitCode;

use qms_core::io::ModelFile;
use qms_core::models::Fixture;
use qms_core::{GkslModel, QmsError, ToleranceOverrides, Tolerances};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Ok = 0,
    False = 1,
    Invalid = 2,
    Inconsistent = 3,
}

impl From<Code> for ExitCode {
    fn from(c: Code) -> Self {
        ExitCode::from(c as u8)
    }
}

#[derive(Debug)]
pub struct Failure {
    pub code: Code,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: Code::Invalid, message: message.into() }
    }
}

impl From<QmsError> for Failure {
    fn from(e: QmsError) -> Self {
        let code = if e.is_numerical() { Code::Inconsistent } else { Code::Invalid };
        Failure { code, message: e.to_string() }
    }
}

pub type Outcome = Result<Code, Failure>;

pub fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))
}

/// Defaults, then the model file's `tol` block, then command-line overrides.
fn resolve(file: Option<&ToleranceOverrides>, cli: &ToleranceOverrides) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Some(o) = file {
        tol = tol.with_overrides(o)?;
    }
    let tol = tol.with_overrides(cli)?;
    tol.validate()?;
    Ok(tol)
}

/// Loads a model from a file, or builds the named fixture when no such file
/// exists.
pub fn load_model(arg: &str, cli: &ToleranceOverrides) -> Result<(GkslModel, Tolerances, String), Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = read(path)?;
        let mut file: ModelFile = serde_json::from_str(&text)
            .map_err(|e| Failure::invalid(format!("{}: invalid model file: {e}", path.display())))?;
        let tol = resolve(file.tol.take().as_ref(), cli)?;
        let (model, _) = file.build(&tol)?;
        log::info!("loaded {}-level model with {} jumps from {}", model.dim(), model.jumps().len(), path.display());
        return Ok((model, tol, arg.to_string()));
    }
    match arg.parse::<Fixture>() {
        Ok(fixture) => {
            let tol = resolve(None, cli)?;
            log::info!("using fixture {fixture}");
            Ok((fixture.build()?, tol, fixture.to_string()))
        }
        Err(_) => Err(Failure::invalid(format!(
            "'{arg}' is neither a readable model file nor a fixture name ({})",
            Fixture::NAMES.join(", ")
        ))),
    }
}
