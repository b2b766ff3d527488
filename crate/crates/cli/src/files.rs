//! On-disk formats. Every file carries `"schema": 1`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use symext::io::SCHEMA_VERSION;
use symext::{DomainOperator, EmbeddedExtension, InstanceSpec, Tolerances};

use crate::CliError;

/// An operator or a parameter: both are partial maps given by a domain frame
/// and its images.
#[derive(Debug, Serialize, Deserialize)]
pub struct OperatorFile {
    pub schema: u32,
    pub operator: DomainOperator,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<InstanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExtensionFile {
    pub schema: u32,
    pub extension: EmbeddedExtension,
}

/// A resolvent or verify input: either an embedded extension or a plain
/// self-adjoint operator on the base space.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ExtensionInput {
    Embedded(ExtensionFile),
    Canonical(OperatorFile),
}

impl ExtensionInput {
    fn schema(&self) -> u32 {
        match self {
            ExtensionInput::Embedded(f) => f.schema,
            ExtensionInput::Canonical(f) => f.schema,
        }
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn check_schema(path: &Path, schema: u32) -> Result<(), CliError> {
    if schema == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{}: unsupported schema {schema} (expected {SCHEMA_VERSION})",
            path.display()
        )))
    }
}

pub fn read_operator(path: &Path, tols: &Tolerances) -> Result<DomainOperator, CliError> {
    let file: OperatorFile = read_json(path)?;
    check_schema(path, file.schema)?;
    Ok(file.operator.with_tol(tols.rank))
}

pub fn read_extension(path: &Path, tols: &Tolerances) -> Result<ExtensionInput, CliError> {
    let input: ExtensionInput = read_json(path)?;
    check_schema(path, input.schema())?;
    Ok(match input {
        ExtensionInput::Canonical(mut f) => {
            f.operator = f.operator.with_tol(tols.rank);
            ExtensionInput::Canonical(f)
        }
        other => other,
    })
}

/// Writes pretty JSON to `path`, or to stdout when no path is given.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    write_text(path, &text)
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
