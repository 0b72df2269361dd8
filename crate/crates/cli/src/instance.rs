//! TOML instance files.
//!
//! ```toml
//! [metadata]
//! name = "fig1"
//!
//! [[classes]]
//! lambda = 1.0
//! mu = 160.0
//! weight = 1.0
//! ```
//!
//! Classes are listed fastest first (nonincreasing `mu`). Unknown keys are
//! rejected; every error names the file, line and column.

use std::ops::Range;
use std::path::Path;

use dps_core::{DpsError, SystemParams, WeightVector};
use serde::Deserialize;
use toml::Spanned;

use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    metadata: Option<RawMetadata>,
    classes: Spanned<Vec<RawClass>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetadata {
    name: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass {
    lambda: Spanned<f64>,
    mu: Spanned<f64>,
    weight: Spanned<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: Option<String>,
    pub params: SystemParams,
    pub weights: WeightVector,
}

pub fn load(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::parse(format!("{}: cannot read instance: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

/// Parses instance text; `origin` prefixes diagnostics.
pub fn parse(text: &str, origin: &str) -> Result<Instance, Failure> {
    let at = |span: Range<usize>, msg: String| {
        let (line, col) = line_col(text, span.start);
        Failure::parse(format!("{origin}:{line}:{col}: {msg}"))
    };

    let raw: RawInstance = toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_string();
        match e.span() {
            Some(span) => at(span, msg),
            None => Failure::parse(format!("{origin}: {msg}")),
        }
    })?;

    let classes_span = raw.classes.span();
    let classes = raw.classes.into_inner();
    if classes.is_empty() {
        return Err(at(classes_span, "instance declares no classes".into()));
    }
    for (k, c) in classes.iter().enumerate() {
        for (field, v) in [("lambda", &c.lambda), ("mu", &c.mu), ("weight", &c.weight)] {
            let x = *v.get_ref();
            if !(x.is_finite() && x > 0.0) {
                return Err(at(
                    v.span(),
                    format!("class {}: {field} must be positive and finite, got {x}", k + 1),
                ));
            }
        }
        if k > 0 {
            let (prev, cur) = (*classes[k - 1].mu.get_ref(), *c.mu.get_ref());
            if cur > prev {
                return Err(at(
                    c.mu.span(),
                    format!(
                        "class {}: mu = {cur} exceeds mu = {prev} of class {}; list classes fastest first",
                        k + 1,
                        k
                    ),
                ));
            }
        }
    }

    let lambda = classes.iter().map(|c| *c.lambda.get_ref()).collect();
    let mu = classes.iter().map(|c| *c.mu.get_ref()).collect();
    let weights = classes.iter().map(|c| *c.weight.get_ref()).collect();
    let params = SystemParams::new(lambda, mu).map_err(|e| in_origin(e, origin))?;
    let weights = WeightVector::new(weights).map_err(|e| in_origin(e, origin))?;
    Ok(Instance {
        name: raw.metadata.and_then(|m| m.name),
        params,
        weights,
    })
}

fn in_origin(err: DpsError, origin: &str) -> Failure {
    let mut f = Failure::from(err);
    f.message = format!("{origin}: {}", f.message);
    f
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, col)
}
