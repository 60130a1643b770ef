//! Contextuality verdicts for 2×2 binary systems.
//!
//! A cyclic 2×2 system has two binary "row" contents and two binary "column"
//! contents, one context per row/column pair. For these systems the
//! closed-form criteria (the CHSH expression and its marginal-corrected
//! bound) decide noncontextuality, and the decision must coincide with the
//! linear-programming route through [`coupling::maximally_connected`]: the
//! two are computed independently and cross-validated on every analysis.
//!
//! General systems have no closed form here; they get the LP route only.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::coupling::{self, ConnectionTarget};
use crate::dist::{Distribution, Value};
use crate::lp::{solve_feasibility, LinearSystem};
use crate::rational::{int, rat, Rational};
use crate::system::{ContentId, ContextId, Observable, System, SystemBuilder};

/// Why a system cannot be viewed as a cyclic 2×2 binary system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureError {
    /// No content is measured in more than one context, so no contextual
    /// question can even be posed.
    NoSharedContents,
    /// Shape mismatch: wrong counts, or the context/content incidence is
    /// not the full 2×2 cross.
    WrongShape { detail: String },
    /// Every observable must take exactly the values +1 and -1.
    NonBinarySupport { observable: Observable },
}

impl fmt::Display for StructureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StructureError::NoSharedContents => {
                write!(f, "system has no shared contents across contexts")
            }
            StructureError::WrongShape { detail } => {
                write!(f, "system is not a cyclic 2x2 design: {detail}")
            }
            StructureError::NonBinarySupport { observable } => {
                write!(f, "observable {observable} is not +1/-1 valued")
            }
        }
    }
}

impl core::error::Error for StructureError {}

/// Expectation over a `{+1, -1}` support demanded explicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonBinarySupport;

impl fmt::Display for NonBinarySupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NonBinarySupport: expectation requires values +1 and -1")
    }
}

impl core::error::Error for NonBinarySupport {}

/// The deterministic-mixture oracle needs identical marginals within every
/// connection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RequiresMarginalSelectivity;

impl fmt::Display for RequiresMarginalSelectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RequiresMarginalSelectivity: the mixture oracle only applies to marginally selective systems"
        )
    }
}

impl core::error::Error for RequiresMarginalSelectivity {}

/// `mass(+1) - mass(-1)` of a ±1-valued distribution.
pub fn sign_expectation(dist: &Distribution) -> Result<Rational, NonBinarySupport> {
    let plus = Value::from("+1");
    let minus = Value::from("-1");
    let mut support: Vec<&Value> = dist.support().iter().collect();
    support.sort();
    if support.len() != 2 || *support[0] != plus || *support[1] != minus {
        // "+1" < "-1" in byte order; sorting gives [+1, -1].
        return Err(NonBinarySupport);
    }
    Ok(dist.mass_of(&plus) - dist.mass_of(&minus))
}

fn value_sign(value: &Value) -> Rational {
    match value.as_str() {
        "+1" => int(1),
        "-1" => int(-1),
        other => unreachable!("validated cyclic system carries only +1/-1, found {other}"),
    }
}

/// A system recognized as a cyclic 2×2 binary design.
///
/// Row contents `a[0], a[1]` and column contents `b[0], b[1]` are assigned
/// by lexicographic order (the smallest content anchors the row side); all
/// verdicts are invariant under that choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicFourSystem {
    system: System,
    a: [ContentId; 2],
    b: [ContentId; 2],
    contexts: [[ContextId; 2]; 2],
}

impl CyclicFourSystem {
    /// Recognize the 2×2 structure or explain why it is absent.
    pub fn from_system(system: &System) -> Result<Self, StructureError> {
        if system
            .connections()
            .iter()
            .all(|connection| connection.arity() <= 1)
        {
            return Err(StructureError::NoSharedContents);
        }
        if system.contents().len() != 4 {
            return Err(StructureError::WrongShape {
                detail: alloc::format!("expected 4 contents, found {}", system.contents().len()),
            });
        }
        if system.contexts().len() != 4 {
            return Err(StructureError::WrongShape {
                detail: alloc::format!("expected 4 contexts, found {}", system.contexts().len()),
            });
        }
        for ctx in system.contexts() {
            if ctx.measured().len() != 2 {
                return Err(StructureError::WrongShape {
                    detail: alloc::format!(
                        "context '{}' measures {} contents, expected 2",
                        ctx.id(),
                        ctx.measured().len()
                    ),
                });
            }
        }
        for connection in system.connections() {
            if connection.arity() != 2 {
                return Err(StructureError::WrongShape {
                    detail: alloc::format!(
                        "content '{}' appears in {} contexts, expected 2",
                        connection.content(),
                        connection.arity()
                    ),
                });
            }
        }

        // Anchor the row side at the lexicographically first content; its
        // two context partners are the column contents.
        let a1 = system.contents()[0].clone();
        let partners: Vec<(ContextId, ContentId)> = system
            .contexts()
            .iter()
            .filter(|ctx| ctx.measured().contains(&a1))
            .map(|ctx| {
                let other = ctx
                    .measured()
                    .iter()
                    .find(|c| **c != a1)
                    .expect("two distinct contents per context")
                    .clone();
                (ctx.id().clone(), other)
            })
            .collect();
        debug_assert_eq!(partners.len(), 2);
        if partners[0].1 == partners[1].1 {
            return Err(StructureError::WrongShape {
                detail: alloc::format!(
                    "contents '{a1}' and '{}' are measured together twice",
                    partners[0].1
                ),
            });
        }
        let mut b = [partners[0].1.clone(), partners[1].1.clone()];
        b.sort();
        let a2 = system
            .contents()
            .iter()
            .find(|c| **c != a1 && **c != b[0] && **c != b[1])
            .expect("four distinct contents")
            .clone();
        let a = [a1, a2];

        let mut contexts: [[Option<ContextId>; 2]; 2] = Default::default();
        for ctx in system.contexts() {
            let row = a.iter().position(|q| ctx.measured().contains(q));
            let col = b.iter().position(|q| ctx.measured().contains(q));
            match (row, col) {
                (Some(i), Some(j)) if contexts[i][j].is_none() => {
                    contexts[i][j] = Some(ctx.id().clone());
                }
                _ => {
                    return Err(StructureError::WrongShape {
                        detail: alloc::format!(
                            "context '{}' does not pair one row content with one column content",
                            ctx.id()
                        ),
                    });
                }
            }
        }
        let contexts = contexts.map(|row| {
            row.map(|slot| slot.expect("all four row/column pairs are present"))
        });

        let cyclic = CyclicFourSystem {
            system: system.clone(),
            a,
            b,
            contexts,
        };
        for observable in system.observables() {
            let support = system.support_of(&observable).expect("validated system");
            let mut sorted: Vec<&Value> = support.iter().collect();
            sorted.sort();
            if sorted.len() != 2
                || sorted[0].as_str() != "+1"
                || sorted[1].as_str() != "-1"
            {
                return Err(StructureError::NonBinarySupport { observable });
            }
        }
        Ok(cyclic)
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn row_contents(&self) -> &[ContentId; 2] {
        &self.a
    }

    pub fn column_contents(&self) -> &[ContentId; 2] {
        &self.b
    }

    pub fn context_id(&self, i: usize, j: usize) -> &ContextId {
        &self.contexts[i][j]
    }

    /// Marginal of row content `i` in context `(i, j)`.
    pub fn row_marginal(&self, i: usize, j: usize) -> Distribution {
        self.system
            .bunch(&self.contexts[i][j])
            .expect("context exists")
            .marginal(&self.a[i])
            .expect("content measured in its context")
    }

    pub fn column_marginal(&self, i: usize, j: usize) -> Distribution {
        self.system
            .bunch(&self.contexts[i][j])
            .expect("context exists")
            .marginal(&self.b[j])
            .expect("content measured in its context")
    }

    /// Product expectation of the two observables in context `(i, j)`.
    pub fn correlation(&self, i: usize, j: usize) -> Rational {
        let bunch = self.system.bunch(&self.contexts[i][j]).expect("context exists");
        let row_coord = bunch
            .measured()
            .iter()
            .position(|c| c == &self.a[i])
            .expect("row content measured");
        let mut total = Rational::zero();
        for (tuple, mass) in bunch.tuples() {
            if mass.is_zero() {
                continue;
            }
            let signs = value_sign(&tuple[row_coord]) * value_sign(&tuple[1 - row_coord]);
            total += signs * mass;
        }
        total
    }
}

/// Per-connection outcome of the marginal-distribution comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectivityReport {
    pub holds: bool,
    /// `(content, the two contexts agree on its distribution)`,
    /// rows first then columns.
    pub per_content: Vec<(ContentId, bool)>,
}

/// Do all measurements of each content share one distribution?
///
/// Also called consistent connectedness: the distribution of a row content
/// may not change with the column setting, and vice versa.
pub fn marginal_selectivity(cyclic: &CyclicFourSystem) -> SelectivityReport {
    let mut per_content = Vec::with_capacity(4);
    for i in 0..2 {
        let equal = cyclic
            .row_marginal(i, 0)
            .same_measure(&cyclic.row_marginal(i, 1));
        per_content.push((cyclic.a[i].clone(), equal));
    }
    for j in 0..2 {
        let equal = cyclic
            .column_marginal(0, j)
            .same_measure(&cyclic.column_marginal(1, j));
        per_content.push((cyclic.b[j].clone(), equal));
    }
    SelectivityReport {
        holds: per_content.iter().all(|(_, ok)| *ok),
        per_content,
    }
}

/// The maximum over the four sign choices of
/// `|sum of the four correlations - 2 * (one correlation)|`.
pub fn chsh_value(cyclic: &CyclicFourSystem) -> Rational {
    let mut correlations = [[Rational::zero(), Rational::zero()], [
        Rational::zero(),
        Rational::zero(),
    ]];
    let mut total = Rational::zero();
    for i in 0..2 {
        for j in 0..2 {
            correlations[i][j] = cyclic.correlation(i, j);
            total += &correlations[i][j];
        }
    }
    let mut best = Rational::zero();
    for k in 0..2 {
        for l in 0..2 {
            let candidate = (&total - int(2) * &correlations[k][l]).abs();
            if candidate > best {
                best = candidate;
            }
        }
    }
    best
}

pub fn chsh_satisfied(cyclic: &CyclicFourSystem) -> bool {
    chsh_value(cyclic) <= int(2)
}

/// Both sides of the marginal-corrected inequality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedCheck {
    pub value: Rational,
    pub bound: Rational,
    pub noncontextual: bool,
}

/// Closed-form noncontextuality criterion: the CHSH expression is compared
/// against `2` plus the total distributional change within the connections.
/// Under marginal selectivity the correction vanishes and this reduces to
/// the plain CHSH test.
pub fn extended_noncontextuality(cyclic: &CyclicFourSystem) -> ExtendedCheck {
    let value = chsh_value(cyclic);
    let mut bound = int(2);
    for i in 0..2 {
        let e1 = sign_expectation(&cyclic.row_marginal(i, 0)).expect("binary support");
        let e2 = sign_expectation(&cyclic.row_marginal(i, 1)).expect("binary support");
        bound += (e1 - e2).abs();
    }
    for j in 0..2 {
        let e1 = sign_expectation(&cyclic.column_marginal(0, j)).expect("binary support");
        let e2 = sign_expectation(&cyclic.column_marginal(1, j)).expect("binary support");
        bound += (e1 - e2).abs();
    }
    let noncontextual = value <= bound;
    ExtendedCheck {
        value,
        bound,
        noncontextual,
    }
}

/// Linear-programming route: noncontextual iff a maximally connected
/// coupling exists.
pub fn is_noncontextual_lp(cyclic: &CyclicFourSystem) -> bool {
    coupling::maximally_connected(cyclic.system())
        .expect("cyclic systems have arity-2 connections")
        .is_some()
}

/// A coupling in which every connection agrees with probability 1, if any.
pub fn all_equalities_coupling(cyclic: &CyclicFourSystem) -> Option<crate::coupling::Coupling> {
    let targets: Vec<ConnectionTarget> = cyclic
        .a
        .iter()
        .chain(cyclic.b.iter())
        .map(|content| {
            ConnectionTarget::new(content.clone(), int(1)).expect("1 is a probability")
        })
        .collect();
    coupling::with_equality_targets(cyclic.system(), &targets)
        .expect("connections exist by construction")
}

/// Are the row responses influenced only by the row setting and the column
/// responses only by the column setting? Holds iff the connections can be
/// made to agree with probability 1, equivalently (Fine's criterion)
/// marginal selectivity plus the CHSH bound.
pub fn selective_influences(cyclic: &CyclicFourSystem) -> bool {
    let closed_form = marginal_selectivity(cyclic).holds && chsh_satisfied(cyclic);
    debug_assert_eq!(closed_form, all_equalities_coupling(cyclic).is_some());
    closed_form
}

/// Mixture-of-deterministic-strategies oracle.
///
/// A marginally selective system is noncontextual iff its four bunches are a
/// convex mixture of the 16 assignments of fixed ±1 values to the four
/// contents. The feasibility problem posed here has one unknown per
/// strategy, nothing shared with the coupling-atom construction.
pub fn deterministic_mixture_exists(
    cyclic: &CyclicFourSystem,
) -> Result<bool, RequiresMarginalSelectivity> {
    if !marginal_selectivity(cyclic).holds {
        return Err(RequiresMarginalSelectivity);
    }

    let labels = [Value::from("+1"), Value::from("-1")];

    // Strategy s assigns labels[digit] to (a1, a2, b1, b2); enumerate the 16
    // digit patterns with a1 most significant.
    let strategy_digit = |s: usize, coordinate: usize| (s >> (3 - coordinate)) & 1;

    let mut matrix = Vec::with_capacity(16);
    let mut rhs = Vec::with_capacity(16);
    for i in 0..2 {
        for j in 0..2 {
            let bunch = cyclic
                .system
                .bunch(cyclic.context_id(i, j))
                .expect("context exists");
            let row_first = bunch.measured()[0] == cyclic.a[i];
            for (a_digit, a_label) in labels.iter().enumerate() {
                for (b_digit, b_label) in labels.iter().enumerate() {
                    let mut row = alloc::vec![Rational::zero(); 16];
                    for (s, entry) in row.iter_mut().enumerate() {
                        if strategy_digit(s, i) == a_digit && strategy_digit(s, 2 + j) == b_digit {
                            *entry = int(1);
                        }
                    }
                    let tuple = if row_first {
                        [a_label.clone(), b_label.clone()]
                    } else {
                        [b_label.clone(), a_label.clone()]
                    };
                    matrix.push(row);
                    rhs.push(bunch.mass_of(&tuple).expect("binary tuple").clone());
                }
            }
        }
    }

    let names: Vec<String> = (0..16)
        .map(|s| {
            let digit = |c: usize| if strategy_digit(s, c) == 0 { "+1" } else { "-1" };
            alloc::format!("{},{},{},{}", digit(0), digit(1), digit(2), digit(3))
        })
        .collect();
    let problem = LinearSystem::new(matrix, rhs, names).expect("consistent dimensions");
    Ok(solve_feasibility(&problem).is_feasible())
}

/// Everything the library can say about one cyclic 2×2 system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub marginal_selectivity: SelectivityReport,
    pub chsh_value: Rational,
    pub chsh_satisfied: bool,
    pub extended_bound: Rational,
    pub noncontextual_closed_form: bool,
    pub noncontextual_lp: bool,
    pub selective_influences: bool,
    /// All independently computed routes agree. This is an invariant, not
    /// an input property: a `false` here is a defect in the library.
    pub oracle_agreement: bool,
}

impl AnalysisReport {
    pub fn noncontextual(&self) -> bool {
        self.noncontextual_closed_form
    }
}

/// Run every check and cross-validate the routes against each other.
pub fn analyze(cyclic: &CyclicFourSystem) -> AnalysisReport {
    let selectivity = marginal_selectivity(cyclic);
    let value = chsh_value(cyclic);
    let satisfied = value <= int(2);
    let extended = extended_noncontextuality(cyclic);
    let lp = is_noncontextual_lp(cyclic);
    let influences_closed_form = selectivity.holds && satisfied;
    let all_equal = all_equalities_coupling(cyclic).is_some();

    let mut agreement =
        extended.noncontextual == lp && influences_closed_form == all_equal;
    if selectivity.holds {
        let mixture =
            deterministic_mixture_exists(cyclic).expect("selectivity checked");
        agreement = agreement && mixture == influences_closed_form;
    }

    AnalysisReport {
        marginal_selectivity: selectivity,
        chsh_value: value,
        chsh_satisfied: satisfied,
        extended_bound: extended.bound,
        noncontextual_closed_form: extended.noncontextual,
        noncontextual_lp: lp,
        selective_influences: influences_closed_form,
        oracle_agreement: agreement,
    }
}

// ---------------------------------------------------------------------------
// Randomized instances for equivalence sweeps.

/// Masses for one binary-pair bunch: a uniformly random composition of 64
/// into four parts, i.e. a joint pmf on the 1/64 grid.
fn random_grid_bunch<R: Rng + ?Sized>(rng: &mut R) -> [Rational; 4] {
    let mut cuts = [0u32; 3];
    for cut in cuts.iter_mut() {
        *cut = rng.gen_range(0..=64);
    }
    cuts.sort_unstable();
    [
        rat(cuts[0] as i64, 64),
        rat((cuts[1] - cuts[0]) as i64, 64),
        rat((cuts[2] - cuts[1]) as i64, 64),
        rat((64 - cuts[2]) as i64, 64),
    ]
}

fn cyclic_system_from_tables(tables: [[Rational; 4]; 4]) -> System {
    let mut builder = SystemBuilder::new()
        .content("a1")
        .content("a2")
        .content("b1")
        .content("b2");
    let layout = [
        ("c11", "a1", "b1"),
        ("c12", "a1", "b2"),
        ("c21", "a2", "b1"),
        ("c22", "a2", "b2"),
    ];
    for (ctx_index, (ctx, a, b)) in layout.iter().enumerate() {
        builder = builder
            .context(*ctx, [*a, *b])
            .support(*a, *ctx, ["+1", "-1"])
            .support(*b, *ctx, ["+1", "-1"]);
        let tuples = [["+1", "+1"], ["+1", "-1"], ["-1", "+1"], ["-1", "-1"]];
        for (t, tuple) in tuples.iter().enumerate() {
            builder = builder.mass(*ctx, *tuple, tables[ctx_index][t].clone());
        }
    }
    builder.build().expect("grid tables are normalized and nonnegative")
}

/// Random cyclic 2×2 binary system with joint masses on the 1/64 grid.
/// Marginal selectivity is usually violated.
pub fn random_cyclic_system<R: Rng + ?Sized>(rng: &mut R) -> System {
    let tables = [
        random_grid_bunch(rng),
        random_grid_bunch(rng),
        random_grid_bunch(rng),
        random_grid_bunch(rng),
    ];
    cyclic_system_from_tables(tables)
}

/// Random marginally selective cyclic 2×2 system: marginal expectations are
/// drawn on the 1/16 grid and shared across contexts, then each context's
/// correlation is drawn within its exact attainable interval.
pub fn random_consistent_cyclic_system<R: Rng + ?Sized>(rng: &mut R) -> System {
    // Sixteenths: expectation x/16 for each content.
    let a: [i64; 2] = [rng.gen_range(-16..=16), rng.gen_range(-16..=16)];
    let b: [i64; 2] = [rng.gen_range(-16..=16), rng.gen_range(-16..=16)];
    let mut tables: [[Rational; 4]; 4] =
        core::array::from_fn(|_| core::array::from_fn(|_| Rational::zero()));
    for i in 0..2 {
        for j in 0..2 {
            // Joint mass (1 + s_a*x/16 + s_b*y/16 + s_a*s_b*e/16)/4 is
            // nonnegative for all four sign pairs iff e stays within
            // [|x + y| - 16, 16 - |x - y|] (sixteenths).
            let lo = (a[i] + b[j]).abs() - 16;
            let hi = 16 - (a[i] - b[j]).abs();
            debug_assert!(lo <= hi);
            let e = rng.gen_range(lo..=hi);
            for (t, (sa, sb)) in [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)]
                .into_iter()
                .enumerate()
            {
                tables[2 * i + j][t] = rat(16 + sa * a[i] + sb * b[j] + sa * sb * e, 64);
            }
        }
    }
    cyclic_system_from_tables(tables)
}
