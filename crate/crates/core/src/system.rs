//! Context-content systems: what is measured, under which conditions, and
//! with what joint distributions.
//!
//! A *content* answers "what is measured", a *context* answers "under what
//! conditions". Measurements within one context are jointly distributed (a
//! [`Bunch`]); measurements of the same content in different contexts are
//! stochastically unrelated and form a [`Connection`]. A [`System`] is the
//! full family: every type here is immutable once validated.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::dist::{Distribution, Value};
use crate::rational::Rational;
use crate::tuples::MixedRadix;

/// Identifier of a content (the measured object).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContentId(String);

/// Identifier of a context (the measurement condition).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContextId(String);

macro_rules! id_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn new(id: impl Into<String>) -> Self {
                $ty(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($ty), "({})"), self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(id: &str) -> Self {
                $ty(id.to_string())
            }
        }
    };
}

id_impls!(ContentId);
id_impls!(ContextId);

/// One measurement: a content observed in a context.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observable {
    pub content: ContentId,
    pub context: ContextId,
}

impl Observable {
    pub fn new(content: impl Into<String>, context: impl Into<String>) -> Self {
        Observable {
            content: ContentId::new(content),
            context: ContextId::new(context),
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.content, self.context)
    }
}

/// A context together with the ordered list of contents it measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    id: ContextId,
    measured: Vec<ContentId>,
}

impl Context {
    pub fn id(&self) -> &ContextId {
        &self.id
    }

    pub fn measured(&self) -> &[ContentId] {
        &self.measured
    }
}

/// All measurements of one content, across distinct contexts.
///
/// Its members are pairwise stochastically unrelated: no bunch contains two
/// of them, so no joint distribution exists until a coupling imposes one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    content: ContentId,
    observables: Vec<Observable>,
}

impl Connection {
    pub fn content(&self) -> &ContentId {
        &self.content
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn arity(&self) -> usize {
        self.observables.len()
    }
}

/// Joint distribution of all measurements within one context.
///
/// The table is complete: one exact mass per tuple of the cartesian product
/// of the declared supports, tuples ordered mixed-radix with the first
/// measured content most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bunch {
    context: ContextId,
    measured: Vec<ContentId>,
    supports: Vec<Vec<Value>>,
    radix: MixedRadix,
    mass: Vec<Rational>,
}

/// A violation found while validating a system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationError {
    DuplicateContent { content: ContentId },
    DuplicateContext { context: ContextId },
    EmptyContext { context: ContextId },
    RepeatedMeasurement { context: ContextId, content: ContentId },
    UnknownContent { context: ContextId, content: ContentId },
    UnknownContext { context: ContextId },
    UnmeasuredContent { content: ContentId },
    MissingSupport { content: ContentId, context: ContextId },
    DuplicateSupport { content: ContentId, context: ContextId },
    EmptySupport { content: ContentId, context: ContextId },
    DuplicateValue { content: ContentId, context: ContextId, value: Value },
    MissingBunch { context: ContextId },
    ArityMismatch { context: ContextId, expected: usize, found: usize },
    UnknownValue { context: ContextId, content: ContentId, value: Value },
    DuplicateTuple { context: ContextId, tuple: Vec<Value> },
    NegativeMass { context: ContextId, tuple: Vec<Value> },
    MassNotNormalized { context: ContextId, total: Rational },
}

impl ValidationError {
    /// Context the violation points at, when there is one.
    pub fn context(&self) -> Option<&ContextId> {
        use ValidationError::*;
        match self {
            DuplicateContext { context }
            | EmptyContext { context }
            | RepeatedMeasurement { context, .. }
            | UnknownContent { context, .. }
            | UnknownContext { context }
            | MissingSupport { context, .. }
            | DuplicateSupport { context, .. }
            | EmptySupport { context, .. }
            | DuplicateValue { context, .. }
            | MissingBunch { context }
            | ArityMismatch { context, .. }
            | UnknownValue { context, .. }
            | DuplicateTuple { context, .. }
            | NegativeMass { context, .. }
            | MassNotNormalized { context, .. } => Some(context),
            DuplicateContent { .. } | UnmeasuredContent { .. } => None,
        }
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, tuple: &[Value]) -> fmt::Result {
    for (i, v) in tuple.iter().enumerate() {
        if i > 0 {
            f.write_str(" ")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationError::*;
        match self {
            DuplicateContent { content } => write!(f, "DuplicateContent: content '{content}' declared twice"),
            DuplicateContext { context } => write!(f, "DuplicateContext: context '{context}' declared twice"),
            EmptyContext { context } => write!(f, "EmptyContext: context '{context}' measures nothing"),
            RepeatedMeasurement { context, content } => write!(
                f,
                "RepeatedMeasurement: content '{content}' repeats within context '{context}'"
            ),
            UnknownContent { context, content } => write!(
                f,
                "UnknownContent: context '{context}' references undeclared content '{content}'"
            ),
            UnknownContext { context } => write!(f, "UnknownContext: context '{context}' is not declared"),
            UnmeasuredContent { content } => write!(
                f,
                "UnmeasuredContent: content '{content}' appears in no context"
            ),
            MissingSupport { content, context } => write!(
                f,
                "MissingSupport: no support declared for {content}@{context}"
            ),
            DuplicateSupport { content, context } => write!(
                f,
                "DuplicateSupport: support for {content}@{context} declared twice"
            ),
            EmptySupport { content, context } => write!(f, "EmptySupport: {content}@{context} has no values"),
            DuplicateValue { content, context, value } => write!(
                f,
                "DuplicateValue: value '{value}' repeats in the support of {content}@{context}"
            ),
            MissingBunch { context } => write!(f, "MissingBunch: context '{context}' has no joint masses"),
            ArityMismatch { context, expected, found } => write!(
                f,
                "ArityMismatch: context '{context}' expects tuples of arity {expected}, found {found}"
            ),
            UnknownValue { context, content, value } => write!(
                f,
                "UnknownValue: '{value}' is outside the support of {content}@{context}"
            ),
            DuplicateTuple { context, tuple } => {
                write!(f, "DuplicateTuple: context '{context}' lists tuple '")?;
                write_tuple(f, tuple)?;
                write!(f, "' twice")
            }
            NegativeMass { context, tuple } => {
                write!(f, "NegativeMass: context '{context}' tuple '")?;
                write_tuple(f, tuple)?;
                write!(f, "' has negative mass")
            }
            MassNotNormalized { context, total } => write!(
                f,
                "MassNotNormalized: context '{context}' masses sum to {total}, expected 1"
            ),
        }
    }
}

impl core::error::Error for ValidationError {}

/// Every violation found in one validation pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<ValidationError>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ValidationReport {}

/// Operation errors on already-validated data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemError {
    ContentNotInContext { content: ContentId, context: ContextId },
}

impl fmt::Display for SystemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemError::ContentNotInContext { content, context } => write!(
                f,
                "ContentNotInContext: content '{content}' is not measured in context '{context}'"
            ),
        }
    }
}

impl core::error::Error for SystemError {}

impl Bunch {
    pub fn context(&self) -> &ContextId {
        &self.context
    }

    pub fn measured(&self) -> &[ContentId] {
        &self.measured
    }

    pub fn arity(&self) -> usize {
        self.measured.len()
    }

    /// Declared support of one measured content.
    pub fn support_of(&self, content: &ContentId) -> Option<&[Value]> {
        self.coordinate(content).map(|i| self.supports[i].as_slice())
    }

    pub fn supports(&self) -> &[Vec<Value>] {
        &self.supports
    }

    fn coordinate(&self, content: &ContentId) -> Option<usize> {
        self.measured.iter().position(|c| c == content)
    }

    /// Number of tuples in the complete table.
    pub fn table_len(&self) -> usize {
        self.radix.len()
    }

    pub fn tuple_at(&self, index: usize) -> Vec<Value> {
        self.radix
            .decode(index)
            .iter()
            .enumerate()
            .map(|(pos, &digit)| self.supports[pos][digit].clone())
            .collect()
    }

    pub fn mass_at(&self, index: usize) -> &Rational {
        &self.mass[index]
    }

    /// Mass of a full tuple; `None` if the tuple is malformed.
    pub fn mass_of(&self, tuple: &[Value]) -> Option<&Rational> {
        if tuple.len() != self.arity() {
            return None;
        }
        let mut digits = Vec::with_capacity(tuple.len());
        for (pos, value) in tuple.iter().enumerate() {
            digits.push(self.supports[pos].iter().position(|v| v == value)?);
        }
        Some(&self.mass[self.radix.encode(&digits)])
    }

    pub fn tuples(&self) -> impl Iterator<Item = (Vec<Value>, &Rational)> {
        (0..self.table_len()).map(|i| (self.tuple_at(i), &self.mass[i]))
    }

    /// Distribution of one measured content, summing the joint over the rest.
    pub fn marginal(&self, content: &ContentId) -> Result<Distribution, SystemError> {
        let coord = self
            .coordinate(content)
            .ok_or_else(|| SystemError::ContentNotInContext {
                content: content.clone(),
                context: self.context.clone(),
            })?;
        let support = &self.supports[coord];
        let mut sums = alloc::vec![Rational::zero(); support.len()];
        for index in 0..self.table_len() {
            let digit = self.radix.decode(index)[coord];
            sums[digit] += &self.mass[index];
        }
        let pairs = support.iter().cloned().zip(sums).collect();
        Ok(Distribution::new(pairs).expect("marginal of a valid bunch is a valid distribution"))
    }

    /// Joint distribution of two measured contents, the rest summed out.
    /// Returned as (pairs of value indices into the two supports) -> mass.
    fn pair_table(&self, first: usize, second: usize) -> Vec<Vec<Rational>> {
        let mut table =
            alloc::vec![alloc::vec![Rational::zero(); self.supports[second].len()]; self.supports[first].len()];
        for index in 0..self.table_len() {
            let digits = self.radix.decode(index);
            table[digits[first]][digits[second]] += &self.mass[index];
        }
        table
    }

    /// Exact factorization test for every pair of measured contents.
    ///
    /// A pair is independent iff its two-variable marginal equals the product
    /// of the single-variable marginals at every value pair. With fewer than
    /// two measured contents there are no pairs and the result is empty.
    pub fn pairwise_independence(&self) -> Vec<PairIndependence> {
        let mut out = Vec::new();
        for first in 0..self.arity() {
            for second in first + 1..self.arity() {
                let m1 = self
                    .marginal(&self.measured[first])
                    .expect("measured content");
                let m2 = self
                    .marginal(&self.measured[second])
                    .expect("measured content");
                let table = self.pair_table(first, second);
                let independent = table.iter().enumerate().all(|(i, row)| {
                    row.iter()
                        .enumerate()
                        .all(|(j, joint)| *joint == m1.masses()[i].clone() * &m2.masses()[j])
                });
                out.push(PairIndependence {
                    first: self.measured[first].clone(),
                    second: self.measured[second].clone(),
                    independent,
                });
            }
        }
        out
    }
}

/// Outcome of the factorization test for one content pair of a bunch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairIndependence {
    pub first: ContentId,
    pub second: ContentId,
    pub independent: bool,
}

/// Raw, not-yet-validated description of a system.
///
/// `build` checks every invariant and reports *all* violations at once.
#[derive(Clone, Debug, Default)]
pub struct SystemBuilder {
    contents: Vec<ContentId>,
    contexts: Vec<(ContextId, Vec<ContentId>)>,
    supports: Vec<(ContentId, ContextId, Vec<Value>)>,
    masses: Vec<(ContextId, Vec<Value>, Rational)>,
}

impl SystemBuilder {
    pub fn new() -> Self {
        SystemBuilder::default()
    }

    pub fn content(mut self, id: impl Into<String>) -> Self {
        self.contents.push(ContentId::new(id));
        self
    }

    pub fn context<I, S>(mut self, id: impl Into<String>, measured: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.contexts.push((
            ContextId::new(id),
            measured.into_iter().map(ContentId::new).collect(),
        ));
        self
    }

    pub fn support<I, S>(mut self, content: impl Into<String>, context: impl Into<String>, values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.supports.push((
            ContentId::new(content),
            ContextId::new(context),
            values.into_iter().map(|v| Value::new(v.into())).collect(),
        ));
        self
    }

    pub fn mass<I, S>(mut self, context: impl Into<String>, tuple: I, mass: Rational) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.masses.push((
            ContextId::new(context),
            tuple.into_iter().map(|v| Value::new(v.into())).collect(),
            mass,
        ));
        self
    }

    /// Validate everything and assemble the system.
    pub fn build(self) -> Result<System, ValidationReport> {
        let mut errors = Vec::new();

        // Contents: unique, deduplicate for downstream checks.
        let mut contents: Vec<ContentId> = Vec::new();
        for content in &self.contents {
            if contents.contains(content) {
                errors.push(ValidationError::DuplicateContent {
                    content: content.clone(),
                });
            } else {
                contents.push(content.clone());
            }
        }

        // Contexts: unique ids, nonempty, no repeats, known contents.
        let mut contexts: Vec<Context> = Vec::new();
        for (id, measured) in &self.contexts {
            if contexts.iter().any(|c| &c.id == id) {
                errors.push(ValidationError::DuplicateContext { context: id.clone() });
                continue;
            }
            if measured.is_empty() {
                errors.push(ValidationError::EmptyContext { context: id.clone() });
            }
            let mut seen: Vec<&ContentId> = Vec::new();
            for content in measured {
                if seen.contains(&content) {
                    errors.push(ValidationError::RepeatedMeasurement {
                        context: id.clone(),
                        content: content.clone(),
                    });
                } else {
                    seen.push(content);
                }
                if !contents.contains(content) {
                    errors.push(ValidationError::UnknownContent {
                        context: id.clone(),
                        content: content.clone(),
                    });
                }
            }
            contexts.push(Context {
                id: id.clone(),
                measured: measured.clone(),
            });
        }
        contexts.sort_by(|a, b| a.id.cmp(&b.id));

        for content in &contents {
            if !contexts.iter().any(|c| c.measured.contains(content)) {
                errors.push(ValidationError::UnmeasuredContent {
                    content: content.clone(),
                });
            }
        }

        // Supports: one per observable, nonempty, distinct values.
        let mut supports: Vec<(ContentId, ContextId, Vec<Value>)> = Vec::new();
        for (content, context, values) in &self.supports {
            let Some(ctx) = contexts.iter().find(|c| &c.id == context) else {
                errors.push(ValidationError::UnknownContext {
                    context: context.clone(),
                });
                continue;
            };
            if !ctx.measured.contains(content) {
                errors.push(ValidationError::UnknownContent {
                    context: context.clone(),
                    content: content.clone(),
                });
                continue;
            }
            if supports
                .iter()
                .any(|(q, c, _)| q == content && c == context)
            {
                errors.push(ValidationError::DuplicateSupport {
                    content: content.clone(),
                    context: context.clone(),
                });
                continue;
            }
            if values.is_empty() {
                errors.push(ValidationError::EmptySupport {
                    content: content.clone(),
                    context: context.clone(),
                });
            }
            let mut seen: Vec<&Value> = Vec::new();
            for value in values {
                if seen.contains(&value) {
                    errors.push(ValidationError::DuplicateValue {
                        content: content.clone(),
                        context: context.clone(),
                        value: value.clone(),
                    });
                } else {
                    seen.push(value);
                }
            }
            supports.push((content.clone(), context.clone(), values.clone()));
        }

        // Assemble one complete mass table per context.
        let mut bunches: Vec<Bunch> = Vec::new();
        for ctx in &contexts {
            let mut column_supports: Vec<Vec<Value>> = Vec::new();
            let mut complete = true;
            for content in &ctx.measured {
                match supports
                    .iter()
                    .find(|(q, c, _)| q == content && c == &ctx.id)
                {
                    Some((_, _, values)) if !values.is_empty() => {
                        column_supports.push(values.clone())
                    }
                    Some(_) => complete = false,
                    None => {
                        errors.push(ValidationError::MissingSupport {
                            content: content.clone(),
                            context: ctx.id.clone(),
                        });
                        complete = false;
                    }
                }
            }
            if !complete || ctx.measured.is_empty() {
                continue;
            }

            let radix = MixedRadix::new(
                &column_supports
                    .iter()
                    .map(|s| s.len())
                    .collect::<Vec<_>>(),
            );
            let mut table = alloc::vec![None::<Rational>; radix.len()];
            let mut any_entry = false;
            for (context, tuple, mass) in &self.masses {
                if context != &ctx.id {
                    continue;
                }
                any_entry = true;
                if tuple.len() != ctx.measured.len() {
                    errors.push(ValidationError::ArityMismatch {
                        context: ctx.id.clone(),
                        expected: ctx.measured.len(),
                        found: tuple.len(),
                    });
                    continue;
                }
                let mut digits = Vec::with_capacity(tuple.len());
                let mut ok = true;
                for (pos, value) in tuple.iter().enumerate() {
                    match column_supports[pos].iter().position(|v| v == value) {
                        Some(d) => digits.push(d),
                        None => {
                            errors.push(ValidationError::UnknownValue {
                                context: ctx.id.clone(),
                                content: ctx.measured[pos].clone(),
                                value: value.clone(),
                            });
                            ok = false;
                        }
                    }
                }
                if !ok {
                    continue;
                }
                if mass.is_negative() {
                    errors.push(ValidationError::NegativeMass {
                        context: ctx.id.clone(),
                        tuple: tuple.clone(),
                    });
                    continue;
                }
                let slot = &mut table[radix.encode(&digits)];
                if slot.is_some() {
                    errors.push(ValidationError::DuplicateTuple {
                        context: ctx.id.clone(),
                        tuple: tuple.clone(),
                    });
                } else {
                    *slot = Some(mass.clone());
                }
            }
            if !any_entry {
                errors.push(ValidationError::MissingBunch {
                    context: ctx.id.clone(),
                });
                continue;
            }
            let mass: Vec<Rational> = table
                .into_iter()
                .map(|m| m.unwrap_or_else(Rational::zero))
                .collect();
            let total: Rational = mass.iter().sum();
            if !total.is_one() {
                errors.push(ValidationError::MassNotNormalized {
                    context: ctx.id.clone(),
                    total,
                });
                continue;
            }
            bunches.push(Bunch {
                context: ctx.id.clone(),
                measured: ctx.measured.clone(),
                supports: column_supports,
                radix,
                mass,
            });
        }

        // Mass entries for contexts that were never declared.
        for (context, _, _) in &self.masses {
            if !contexts.iter().any(|c| &c.id == context)
                && !errors
                    .iter()
                    .any(|e| matches!(e, ValidationError::UnknownContext { context: c } if c == context))
            {
                errors.push(ValidationError::UnknownContext {
                    context: context.clone(),
                });
            }
        }

        if !errors.is_empty() {
            return Err(ValidationReport { errors });
        }

        contents.sort();
        Ok(System {
            contents,
            contexts,
            bunches,
        })
    }
}

/// A validated context-content system.
///
/// Contents and contexts are kept sorted by id, so iteration order (and any
/// serialization built on it) is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    contents: Vec<ContentId>,
    contexts: Vec<Context>,
    bunches: Vec<Bunch>, // parallel to `contexts`
}

impl System {
    pub fn contents(&self) -> &[ContentId] {
        &self.contents
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn bunches(&self) -> &[Bunch] {
        &self.bunches
    }

    pub fn bunch(&self, context: &ContextId) -> Option<&Bunch> {
        let i = self.contexts.iter().position(|c| &c.id == context)?;
        Some(&self.bunches[i])
    }

    /// Every observable of the system in canonical order:
    /// sorted by (content id, context id).
    pub fn observables(&self) -> Vec<Observable> {
        let mut out = Vec::new();
        for context in &self.contexts {
            for content in &context.measured {
                out.push(Observable {
                    content: content.clone(),
                    context: context.id.clone(),
                });
            }
        }
        out.sort();
        out
    }

    /// Declared support of an observable.
    pub fn support_of(&self, observable: &Observable) -> Option<&[Value]> {
        self.bunch(&observable.context)?.support_of(&observable.content)
    }

    /// Marginal distribution of an observable within its bunch.
    pub fn observable_marginal(&self, observable: &Observable) -> Result<Distribution, SystemError> {
        match self.bunch(&observable.context) {
            Some(bunch) => bunch.marginal(&observable.content),
            None => Err(SystemError::ContentNotInContext {
                content: observable.content.clone(),
                context: observable.context.clone(),
            }),
        }
    }

    /// Group the observables by content. The groups partition the
    /// observables; single-member connections are included.
    pub fn connections(&self) -> Vec<Connection> {
        let observables = self.observables();
        self.contents
            .iter()
            .map(|content| Connection {
                content: content.clone(),
                observables: observables
                    .iter()
                    .filter(|o| &o.content == content)
                    .cloned()
                    .collect(),
            })
            .collect()
    }

    pub fn connection(&self, content: &ContentId) -> Option<Connection> {
        self.connections().into_iter().find(|c| &c.content == content)
    }

    /// Re-check every invariant. Validation is idempotent: a `System` can
    /// only be constructed through it, so this always succeeds and returns
    /// the same system unchanged in spirit.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        self.to_builder().build().map(|rebuilt| {
            debug_assert_eq!(&rebuilt, self);
        })
    }

    /// Decompose into the raw form accepted by [`SystemBuilder`].
    pub fn to_builder(&self) -> SystemBuilder {
        let mut builder = SystemBuilder::new();
        for content in &self.contents {
            builder.contents.push(content.clone());
        }
        for context in &self.contexts {
            builder
                .contexts
                .push((context.id.clone(), context.measured.clone()));
        }
        for bunch in &self.bunches {
            for (content, support) in bunch.measured.iter().zip(&bunch.supports) {
                builder
                    .supports
                    .push((content.clone(), bunch.context.clone(), support.clone()));
            }
            for (tuple, mass) in bunch.tuples() {
                builder
                    .masses
                    .push((bunch.context.clone(), tuple, mass.clone()));
            }
        }
        builder
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// Single die rolled once; two derived yes/no readings of it.
    /// `A` = outcome is even, `B` = outcome exceeds 3, both recorded in the
    /// same context, so their joint table is fully determined by the die.
    fn derived_pair_system(die_mass: [Rational; 6]) -> System {
        // P(A=a, B=b) sums the die mass over the outcomes mapping to (a, b).
        let cell = |a: bool, b: bool| -> Rational {
            (1..=6)
                .filter(|o| (o % 2 == 0) == a && (o > &3) == b)
                .map(|o| die_mass[o - 1].clone())
                .sum()
        };
        SystemBuilder::new()
            .content("A")
            .content("B")
            .context("roll", ["A", "B"])
            .support("A", "roll", ["0", "1"])
            .support("B", "roll", ["0", "1"])
            .mass("roll", ["0", "0"], cell(false, false))
            .mass("roll", ["0", "1"], cell(false, true))
            .mass("roll", ["1", "0"], cell(true, false))
            .mass("roll", ["1", "1"], cell(true, true))
            .build()
            .unwrap()
    }

    fn fair_die() -> [Rational; 6] {
        core::array::from_fn(|_| rat(1, 6))
    }

    fn rigged_die() -> [Rational; 6] {
        [rat(0, 1), rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4), rat(0, 1)]
    }

    #[test]
    fn validates_well_formed_epr_shape() {
        let mut builder = SystemBuilder::new()
            .content("a1")
            .content("a2")
            .content("b1")
            .content("b2");
        for (ctx, a, b) in [
            ("c11", "a1", "b1"),
            ("c12", "a1", "b2"),
            ("c21", "a2", "b1"),
            ("c22", "a2", "b2"),
        ] {
            builder = builder
                .context(ctx, [a, b])
                .support(a, ctx, ["+1", "-1"])
                .support(b, ctx, ["+1", "-1"]);
            for (x, y) in [("+1", "+1"), ("+1", "-1"), ("-1", "+1"), ("-1", "-1")] {
                builder = builder.mass(ctx, [x, y], rat(1, 4));
            }
        }
        let system = builder.build().unwrap();
        assert_eq!(system.contexts().len(), 4);
        assert_eq!(system.observables().len(), 8);
        assert!(system.validate().is_ok());
        let connections = system.connections();
        assert_eq!(connections.len(), 4);
        assert!(connections.iter().all(|c| c.arity() == 2));
        // Connections partition the observables.
        let total: usize = connections.iter().map(|c| c.arity()).sum();
        assert_eq!(total, system.observables().len());
    }

    #[test]
    fn reports_every_violation_at_once() {
        let report = SystemBuilder::new()
            .content("q")
            .content("q")
            .context("c", ["q"])
            .context("c", ["q"])
            .support("q", "c", ["x", "y"])
            .mass("c", ["x"], rat(1, 2))
            .mass("c", ["y"], rat(1, 3))
            .build()
            .unwrap_err();
        assert!(report.errors.contains(&ValidationError::DuplicateContent {
            content: ContentId::from("q")
        }));
        assert!(report.errors.contains(&ValidationError::DuplicateContext {
            context: ContextId::from("c")
        }));
        assert!(report.errors.contains(&ValidationError::MassNotNormalized {
            context: ContextId::from("c"),
            total: rat(5, 6),
        }));
    }

    #[test]
    fn rejects_arity_mismatch() {
        let report = SystemBuilder::new()
            .content("x")
            .content("y")
            .context("c", ["x", "y"])
            .support("x", "c", ["0", "1"])
            .support("y", "c", ["0", "1"])
            .mass("c", ["0", "0", "0"], rat(1, 1))
            .build()
            .unwrap_err();
        assert!(report.errors.contains(&ValidationError::ArityMismatch {
            context: ContextId::from("c"),
            expected: 2,
            found: 3,
        }));
    }

    #[test]
    fn rejects_unknown_content_and_negative_mass() {
        let report = SystemBuilder::new()
            .content("x")
            .context("c", ["x", "ghost"])
            .support("x", "c", ["0", "1"])
            .support("ghost", "c", ["0", "1"])
            .mass("c", ["0", "0"], rat(3, 2))
            .mass("c", ["1", "1"], rat(-1, 2))
            .build()
            .unwrap_err();
        assert!(report.errors.iter().any(|e| matches!(
            e,
            ValidationError::UnknownContent { content, .. } if content.as_str() == "ghost"
        )));
        assert!(report
            .errors
            .iter()
            .any(|e| matches!(e, ValidationError::NegativeMass { .. })));
    }

    #[test]
    fn marginal_of_derived_pair_bunch() {
        // Rigged die: P(A=1) = 1/4 + 1/4 + 0 = 1/2.
        let system = derived_pair_system(rigged_die());
        let bunch = system.bunch(&ContextId::from("roll")).unwrap();
        let marginal = bunch.marginal(&ContentId::from("A")).unwrap();
        assert_eq!(marginal.mass_of(&Value::from("1")), rat(1, 2));
        assert_eq!(marginal.mass_of(&Value::from("0")), rat(1, 2));

        let missing = bunch.marginal(&ContentId::from("C"));
        assert_eq!(
            missing,
            Err(SystemError::ContentNotInContext {
                content: ContentId::from("C"),
                context: ContextId::from("roll"),
            })
        );
    }

    #[test]
    fn derived_pair_independence_depends_on_the_die() {
        // Fair die: P(A=1 & B=1) = 1/3 but P(A=1) P(B=1) = 1/4.
        let fair = derived_pair_system(fair_die());
        let pairs = fair.bunches()[0].pairwise_independence();
        assert_eq!(pairs.len(), 1);
        assert!(!pairs[0].independent);
        let joint = fair.bunches()[0]
            .mass_of(&[Value::from("1"), Value::from("1")])
            .unwrap()
            .clone();
        assert_eq!(joint, rat(1, 3));

        let rigged = derived_pair_system(rigged_die());
        let pairs = rigged.bunches()[0].pairwise_independence();
        assert!(pairs[0].independent);
    }

    #[test]
    fn anticorrelated_dice_marginals_are_uniform() {
        // Mass 1/6 on each pair with x + y = 7.
        let labels: Vec<String> = (1..=6).map(|i| i.to_string()).collect();
        let mut builder = SystemBuilder::new()
            .content("L")
            .content("R")
            .context("throw", ["L", "R"])
            .support("L", "throw", labels.clone())
            .support("R", "throw", labels.clone());
        for x in 1..=6 {
            builder = builder.mass(
                "throw",
                [x.to_string(), (7 - x).to_string()],
                rat(1, 6),
            );
        }
        let system = builder.build().unwrap();
        let bunch = &system.bunches()[0];
        for content in ["L", "R"] {
            let marginal = bunch.marginal(&ContentId::from(content)).unwrap();
            for label in &labels {
                assert_eq!(marginal.mass_of(&Value::new(label.clone())), rat(1, 6));
            }
        }
    }

    #[test]
    fn single_observable_context_is_legal() {
        let system = SystemBuilder::new()
            .content("q")
            .context("c", ["q"])
            .support("q", "c", ["yes", "no"])
            .mass("c", ["yes"], rat(7, 10))
            .mass("c", ["no"], rat(3, 10))
            .build()
            .unwrap();
        assert_eq!(system.observables().len(), 1);
    }

    #[test]
    fn validation_round_trips() {
        let system = derived_pair_system(fair_die());
        let rebuilt = system.to_builder().build().unwrap();
        assert_eq!(system, rebuilt);
    }
}
