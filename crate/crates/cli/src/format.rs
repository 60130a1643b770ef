//! The system file format.
//!
//! A system file is line-oriented text with four sections, introduced by the
//! bare keywords `contents`, `contexts`, `supports`, and `bunches`:
//!
//! ```text
//! contents
//!   A
//!   B
//!
//! contexts
//!   roll : A B
//!
//! supports
//!   A @ roll : 0 1
//!   B @ roll : 0 1
//!
//! bunches
//!   roll
//!     0 0 : 1/3
//!     0 1 : 1/6
//!     1 0 : 1/6
//!     1 1 : 1/3
//! ```
//!
//! `#` starts a comment. Masses are exact fractions `p/q` (or integers);
//! floating-point literals are rejected outright. Identifiers and values use
//! ASCII letters, digits, `_`, `-`, and `+`. Within `bunches`, a line
//! without `:` names the context of the following tuple lines; omitted
//! tuples carry mass zero.
//!
//! [`print_system`] emits the canonical form: contents, contexts, and
//! supports sorted by id, complete bunch tables with tuples in declared
//! support order, every mass a reduced `p/q`. Parsing canonical output
//! reproduces the system byte for byte.

use std::collections::BTreeMap;
use std::fmt;

use couplecheck_core::rational::Rational;
use couplecheck_core::system::{System, SystemBuilder, ValidationError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

/// Where each declaration sits in the source, for locating validation
/// errors after parsing succeeds.
#[derive(Clone, Debug, Default)]
pub struct SourceLocations {
    pub sections: BTreeMap<&'static str, usize>,
    pub contents: BTreeMap<String, usize>,
    pub contexts: BTreeMap<String, usize>,
    pub supports: BTreeMap<(String, String), usize>,
    pub bunches: BTreeMap<String, usize>,
}

impl SourceLocations {
    /// Best-effort source position for a validation error: the declaration
    /// line of the context (or content) the error names.
    pub fn locate(&self, error: &ValidationError) -> Option<(&'static str, usize)> {
        use ValidationError::*;
        match error {
            MissingBunch { context }
            | ArityMismatch { context, .. }
            | UnknownValue { context, .. }
            | DuplicateTuple { context, .. }
            | NegativeMass { context, .. }
            | MassNotNormalized { context, .. } => self
                .bunches
                .get(context.as_str())
                .or_else(|| self.contexts.get(context.as_str()))
                .map(|line| ("bunches", *line)),
            DuplicateContext { context }
            | EmptyContext { context }
            | RepeatedMeasurement { context, .. }
            | UnknownContent { context, .. }
            | UnknownContext { context } => self
                .contexts
                .get(context.as_str())
                .or_else(|| self.bunches.get(context.as_str()))
                .map(|line| ("contexts", *line)),
            MissingSupport { content, context }
            | DuplicateSupport { content, context }
            | EmptySupport { content, context }
            | DuplicateValue {
                content, context, ..
            } => self
                .supports
                .get(&(content.as_str().into(), context.as_str().into()))
                .or_else(|| self.contexts.get(context.as_str()))
                .map(|line| ("supports", *line)),
            DuplicateContent { content } | UnmeasuredContent { content } => self
                .contents
                .get(content.as_str())
                .map(|line| ("contents", *line)),
        }
    }
}

/// Raw parts plus source positions; validation happens in a second step so
/// a file can report parse and validation problems separately.
#[derive(Debug)]
pub struct ParsedSystem {
    pub builder: SystemBuilder,
    pub locations: SourceLocations,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn token_column(raw: &str, token: &str) -> usize {
    raw.find(token).map(|i| i + 1).unwrap_or(1)
}

fn check_token(raw: &str, line: usize, token: &str) -> Result<(), ParseError> {
    let ok = !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '+'));
    if ok {
        Ok(())
    } else {
        Err(err(
            line,
            token_column(raw, token),
            format!("invalid identifier '{token}' (use letters, digits, '_', '-', '+')"),
        ))
    }
}

/// Parse an exact fraction: `p`, `p/q`, or `-p/q`. Anything resembling a
/// float is refused.
pub fn parse_fraction(token: &str) -> Result<Rational, String> {
    if token.contains('.') {
        return Err(format!(
            "'{token}' looks like a floating-point literal; fractions only"
        ));
    }
    let (numer, denom) = match token.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (token, None),
    };
    let parse_int = |s: &str| -> Result<num_bigint::BigInt, String> {
        let stripped = s.strip_prefix('-').unwrap_or(s);
        if stripped.is_empty() || !stripped.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("'{token}' is not a fraction p/q"));
        }
        s.parse().map_err(|_| format!("'{token}' is not a fraction p/q"))
    };
    let n = parse_int(numer)?;
    let d = match denom {
        Some(d) => {
            let d = parse_int(d)?;
            if d == num_bigint::BigInt::from(0) {
                return Err(format!("'{token}' has a zero denominator"));
            }
            d
        }
        None => num_bigint::BigInt::from(1),
    };
    Ok(Rational::new(n, d))
}

/// Reduced `p/q`, always with an explicit denominator.
pub fn format_fraction(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Contents,
    Contexts,
    Supports,
    Bunches,
}

pub fn parse_system_file(text: &str) -> Result<ParsedSystem, ParseError> {
    let mut builder = SystemBuilder::new();
    let mut locations = SourceLocations::default();
    let mut section: Option<Section> = None;
    let mut current_bunch: Option<String> = None;

    for (index, raw) in text.lines().enumerate() {
        let lineno = index + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }

        let header = match line {
            "contents" => Some(("contents", Section::Contents)),
            "contexts" => Some(("contexts", Section::Contexts)),
            "supports" => Some(("supports", Section::Supports)),
            "bunches" => Some(("bunches", Section::Bunches)),
            _ => None,
        };
        if let Some((name, kind)) = header {
            if locations.sections.contains_key(name) {
                return Err(err(lineno, 1, format!("duplicate section '{name}'")));
            }
            locations.sections.insert(name, lineno);
            section = Some(kind);
            current_bunch = None;
            continue;
        }

        match section {
            None => {
                return Err(err(
                    lineno,
                    1,
                    "expected a section header: contents, contexts, supports, or bunches",
                ));
            }
            Some(Section::Contents) => {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if tokens.len() != 1 {
                    return Err(err(lineno, 1, "expected one content id per line"));
                }
                check_token(raw, lineno, tokens[0])?;
                locations.contents.insert(tokens[0].to_string(), lineno);
                builder = builder.content(tokens[0]);
            }
            Some(Section::Contexts) => {
                let Some((id_part, measured_part)) = line.split_once(':') else {
                    return Err(err(lineno, 1, "expected '<context> : <content>...'"));
                };
                let id_tokens: Vec<&str> = id_part.split_whitespace().collect();
                if id_tokens.len() != 1 {
                    return Err(err(lineno, 1, "expected a single context id before ':'"));
                }
                check_token(raw, lineno, id_tokens[0])?;
                let measured: Vec<&str> = measured_part.split_whitespace().collect();
                if measured.is_empty() {
                    return Err(err(lineno, 1, "a context must measure at least one content"));
                }
                for token in &measured {
                    check_token(raw, lineno, token)?;
                }
                locations.contexts.insert(id_tokens[0].to_string(), lineno);
                builder = builder.context(id_tokens[0], measured);
            }
            Some(Section::Supports) => {
                let Some((lhs, values_part)) = line.split_once(':') else {
                    return Err(err(lineno, 1, "expected '<content> @ <context> : <value>...'"));
                };
                let Some((content_part, context_part)) = lhs.split_once('@') else {
                    return Err(err(lineno, 1, "expected '<content> @ <context>' before ':'"));
                };
                let content: Vec<&str> = content_part.split_whitespace().collect();
                let context: Vec<&str> = context_part.split_whitespace().collect();
                if content.len() != 1 || context.len() != 1 {
                    return Err(err(lineno, 1, "expected '<content> @ <context>' before ':'"));
                }
                check_token(raw, lineno, content[0])?;
                check_token(raw, lineno, context[0])?;
                let values: Vec<&str> = values_part.split_whitespace().collect();
                if values.is_empty() {
                    return Err(err(lineno, 1, "a support needs at least one value"));
                }
                for token in &values {
                    check_token(raw, lineno, token)?;
                }
                locations
                    .supports
                    .insert((content[0].to_string(), context[0].to_string()), lineno);
                builder = builder.support(content[0], context[0], values);
            }
            Some(Section::Bunches) => {
                if let Some((tuple_part, mass_part)) = line.split_once(':') {
                    let Some(context) = current_bunch.clone() else {
                        return Err(err(
                            lineno,
                            1,
                            "tuple line before any context header in 'bunches'",
                        ));
                    };
                    let tuple: Vec<&str> = tuple_part.split_whitespace().collect();
                    if tuple.is_empty() {
                        return Err(err(lineno, 1, "expected '<value>... : <p/q>'"));
                    }
                    for token in &tuple {
                        check_token(raw, lineno, token)?;
                    }
                    let mass_tokens: Vec<&str> = mass_part.split_whitespace().collect();
                    if mass_tokens.len() != 1 {
                        return Err(err(lineno, 1, "expected exactly one mass after ':'"));
                    }
                    let mass = parse_fraction(mass_tokens[0]).map_err(|message| {
                        err(lineno, token_column(raw, mass_tokens[0]), message)
                    })?;
                    builder = builder.mass(context, tuple, mass);
                } else {
                    let tokens: Vec<&str> = line.split_whitespace().collect();
                    if tokens.len() != 1 {
                        return Err(err(lineno, 1, "expected a context header or a tuple line"));
                    }
                    check_token(raw, lineno, tokens[0])?;
                    locations
                        .bunches
                        .entry(tokens[0].to_string())
                        .or_insert(lineno);
                    current_bunch = Some(tokens[0].to_string());
                }
            }
        }
    }

    for name in ["contents", "contexts", "supports", "bunches"] {
        if !locations.sections.contains_key(name) {
            return Err(err(
                text.lines().count().max(1),
                1,
                format!("missing section '{name}'"),
            ));
        }
    }

    Ok(ParsedSystem { builder, locations })
}

/// Canonical serialization: the unique fixed point of parse-then-print.
pub fn print_system(system: &System) -> String {
    let mut out = String::new();
    out.push_str("contents\n");
    for content in system.contents() {
        out.push_str(&format!("  {content}\n"));
    }
    out.push_str("\ncontexts\n");
    for context in system.contexts() {
        let measured: Vec<&str> = context.measured().iter().map(|c| c.as_str()).collect();
        out.push_str(&format!("  {} : {}\n", context.id(), measured.join(" ")));
    }
    out.push_str("\nsupports\n");
    for observable in system.observables() {
        let support = system
            .support_of(&observable)
            .expect("validated system declares every support");
        let values: Vec<&str> = support.iter().map(|v| v.as_str()).collect();
        out.push_str(&format!(
            "  {} @ {} : {}\n",
            observable.content,
            observable.context,
            values.join(" ")
        ));
    }
    out.push_str("\nbunches\n");
    for bunch in system.bunches() {
        out.push_str(&format!("  {}\n", bunch.context()));
        for (tuple, mass) in bunch.tuples() {
            let values: Vec<&str> = tuple.iter().map(|v| v.as_str()).collect();
            out.push_str(&format!(
                "    {} : {}\n",
                values.join(" "),
                format_fraction(mass)
            ));
        }
    }
    out
}

/// Targets file: one `<content> : <p/q>` line per connection target.
pub fn parse_targets_file(text: &str) -> Result<Vec<(String, Rational)>, ParseError> {
    let mut targets = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let lineno = index + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some((content_part, mass_part)) = line.split_once(':') else {
            return Err(err(lineno, 1, "expected '<content> : <p/q>'"));
        };
        let content: Vec<&str> = content_part.split_whitespace().collect();
        if content.len() != 1 {
            return Err(err(lineno, 1, "expected a single content id before ':'"));
        }
        check_token(raw, lineno, content[0])?;
        let mass_tokens: Vec<&str> = mass_part.split_whitespace().collect();
        if mass_tokens.len() != 1 {
            return Err(err(lineno, 1, "expected exactly one probability after ':'"));
        }
        let probability = parse_fraction(mass_tokens[0])
            .map_err(|message| err(lineno, token_column(raw, mass_tokens[0]), message))?;
        targets.push((content[0].to_string(), probability));
    }
    if targets.is_empty() {
        return Err(err(1, 1, "targets file lists no targets"));
    }
    Ok(targets)
}
