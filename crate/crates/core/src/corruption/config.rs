use serde::de::DeserializeOwned;

use super::spec::{
    AccidentalTouchParams, AppMinimizationParams, CorruptionKind, CorruptionParams, CorruptionSpec, MarkParams,
    MultiAppsParams, NetworkErrorParams, PopUpParams, ResolutionParams, SubtitleParams, VerificationParams,
};
use super::CorruptionError;

/// Parses a corruption config document. Each top-level table names a
/// corruption kind (`[marks]`), or an array of tables (`[[marks]]`) for
/// several instances. Missing keys take their default values. Specs come
/// back in report column order, instances of one kind in document order.
pub fn parse_config(document: &str) -> Result<Vec<CorruptionSpec>, CorruptionError> {
    let table: toml::Table = toml::from_str(document).map_err(|e| {
        let line = e
            .span()
            .map(|s| document[..s.start.min(document.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        CorruptionError::Parse {
            line,
            message: e.message().to_string(),
        }
    })?;
    for key in table.keys() {
        if !CorruptionKind::ALL.iter().any(|k| k.table() == key) {
            return Err(CorruptionError::Parse {
                line: line_of(document, key),
                message: format!("unknown corruption kind '{key}'"),
            });
        }
    }
    let mut specs = Vec::new();
    for kind in CorruptionKind::ALL {
        let Some(value) = table.get(kind.table()) else {
            continue;
        };
        let blocks: Vec<toml::Value> = match value {
            toml::Value::Table(_) => vec![value.clone()],
            toml::Value::Array(items) => items.clone(),
            _ => {
                return Err(CorruptionError::Parse {
                    line: line_of(document, kind.table()),
                    message: format!("'{}' must be a table", kind.table()),
                })
            }
        };
        for block in blocks {
            let params = decode(kind, block).map_err(|message| CorruptionError::Parse {
                line: line_of(document, kind.table()),
                message,
            })?;
            specs.push(CorruptionSpec::new(params)?);
        }
    }
    Ok(specs)
}

fn decode(kind: CorruptionKind, block: toml::Value) -> Result<CorruptionParams, String> {
    fn de<T: DeserializeOwned>(v: toml::Value) -> Result<T, String> {
        v.try_into::<T>().map_err(|e| e.message().to_string())
    }
    if !block.is_table() {
        return Err(format!("'{}' entries must be tables", kind.table()));
    }
    Ok(match kind {
        CorruptionKind::PopUps => CorruptionParams::PopUps(de::<PopUpParams>(block)?),
        CorruptionKind::Resolution => CorruptionParams::Resolution(de::<ResolutionParams>(block)?),
        CorruptionKind::Marks => CorruptionParams::Marks(de::<MarkParams>(block)?),
        CorruptionKind::Subtitle => CorruptionParams::Subtitle(de::<SubtitleParams>(block)?),
        CorruptionKind::MultiApps => CorruptionParams::MultiApps(de::<MultiAppsParams>(block)?),
        CorruptionKind::AccidentalTouch => CorruptionParams::AccidentalTouch(de::<AccidentalTouchParams>(block)?),
        CorruptionKind::AppMinimization => CorruptionParams::AppMinimization(de::<AppMinimizationParams>(block)?),
        CorruptionKind::NetworkError => CorruptionParams::NetworkError(de::<NetworkErrorParams>(block)?),
        CorruptionKind::Verification => CorruptionParams::Verification(de::<VerificationParams>(block)?),
    })
}

/// Line of the first header or key mentioning `name`, 1-based; 0 if absent.
fn line_of(document: &str, name: &str) -> usize {
    document
        .lines()
        .position(|l| {
            let t = l.trim_start();
            t.starts_with(&format!("[{name}]"))
                || t.starts_with(&format!("[[{name}]]"))
                || t.starts_with(&format!("[{name}."))
                || t.split(['=', '.', ' ']).next() == Some(name)
        })
        .map_or(0, |i| i + 1)
}

/// Document with one empty block per kind; parses to all defaults.
pub fn all_defaults_document() -> String {
    CorruptionKind::ALL
        .iter()
        .map(|k| format!("[{}]\n", k.table()))
        .collect::<Vec<_>>()
        .join("\n")
}
