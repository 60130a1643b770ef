//! Preset systems: worked examples serving as fixtures and CLI demos.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_traits::One;

use crate::rational::{int, is_probability, rat, Rational};
use crate::system::{System, SystemBuilder};

/// The closed list of built-in scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioId {
    /// One die, two derived yes/no readings (parity, exceeds 3) in a single
    /// context; with a fair die the readings are dependent.
    FairDieAB,
    /// Same two readings of a die with masses (0, 1/4, 1/4, 1/4, 1/4, 0);
    /// the readings factorize exactly.
    RiggedDieAB,
    /// Two marked fair dice thrown together: a 36-atom product bunch.
    TwoDiceMarked,
    /// Two binary observations recorded in unrelated places, success rates
    /// 7/10 and 1/2. No empirical pairing exists; couple them on paper.
    LuceTwoCities,
    /// Four survey questions, each asked of a different group: four
    /// single-observable contexts with no content shared.
    SurveyFourContexts,
    /// The same survey paired by couples: four contexts, one row question
    /// and one column question each.
    SurveyPairedContexts,
    /// Two questions asked in two orders, the question treated as the same
    /// content in both orders.
    QuestionOrderShared,
    /// Two questions asked in two orders, each (question, position) pair
    /// treated as its own content; no contextual question can be posed.
    QuestionOrderSplit,
    /// 2×2 binary design with uniform bunches: zero correlations.
    EprUniform,
    /// 2×2 binary design with three +1 and one -1 perfect correlations.
    PrBox,
    /// 2×2 binary design with correlation magnitude 7/10 (by default): a
    /// rational stand-in for super-classical but sub-algebraic correlation.
    TsirelsonRational,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 11] = [
        ScenarioId::FairDieAB,
        ScenarioId::RiggedDieAB,
        ScenarioId::TwoDiceMarked,
        ScenarioId::LuceTwoCities,
        ScenarioId::SurveyFourContexts,
        ScenarioId::SurveyPairedContexts,
        ScenarioId::QuestionOrderShared,
        ScenarioId::QuestionOrderSplit,
        ScenarioId::EprUniform,
        ScenarioId::PrBox,
        ScenarioId::TsirelsonRational,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioId::FairDieAB => "fair-die-AB",
            ScenarioId::RiggedDieAB => "rigged-die-AB",
            ScenarioId::TwoDiceMarked => "two-dice-marked",
            ScenarioId::LuceTwoCities => "luce-two-cities",
            ScenarioId::SurveyFourContexts => "survey-four-contexts",
            ScenarioId::SurveyPairedContexts => "survey-paired-contexts",
            ScenarioId::QuestionOrderShared => "question-order-shared",
            ScenarioId::QuestionOrderSplit => "question-order-split",
            ScenarioId::EprUniform => "epr-uniform",
            ScenarioId::PrBox => "pr-box",
            ScenarioId::TsirelsonRational => "tsirelson-rational",
        }
    }

    pub fn from_name(name: &str) -> Option<ScenarioId> {
        ScenarioId::ALL.iter().copied().find(|id| id.name() == name)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl core::str::FromStr for ScenarioId {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScenarioId::from_name(s).ok_or_else(|| ScenarioError::UnknownScenario {
            name: s.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScenarioError {
    UnknownScenario { name: String },
    BadParameter { detail: String },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::UnknownScenario { name } => write!(f, "UnknownScenario: '{name}'"),
            ScenarioError::BadParameter { detail } => write!(f, "BadParameter: {detail}"),
        }
    }
}

impl core::error::Error for ScenarioError {}

fn bad(detail: String) -> ScenarioError {
    ScenarioError::BadParameter { detail }
}

/// Build a preset. Parameters are scenario-specific:
///
/// * `tsirelson-rational`: optionally one correlation magnitude in `[0, 1]`
///   (default 7/10; any value above 1/2 violates the CHSH bound).
/// * `question-order-shared`: optionally 8 masses, the two 4-entry joint
///   tables for the contexts `a-b` then `b-a`, tuples ordered `+1 +1`,
///   `+1 -1`, `-1 +1`, `-1 -1` (default uniform; the source material names
///   this design without fixing numbers).
/// * `survey-paired-contexts`: optionally 16 masses, the four joint tables
///   for contexts `a1-b1`, `a1-b2`, `a2-b1`, `a2-b2` in the same tuple
///   order (default uniform, for the same reason).
///
/// All other scenarios take no parameters.
pub fn build(id: ScenarioId, params: &[Rational]) -> Result<System, ScenarioError> {
    match id {
        ScenarioId::FairDieAB => {
            no_params(id, params)?;
            let fair = core::array::from_fn(|_| rat(1, 6));
            Ok(derived_die_pair(fair))
        }
        ScenarioId::RiggedDieAB => {
            no_params(id, params)?;
            let rigged = [
                int(0),
                rat(1, 4),
                rat(1, 4),
                rat(1, 4),
                rat(1, 4),
                int(0),
            ];
            Ok(derived_die_pair(rigged))
        }
        ScenarioId::TwoDiceMarked => {
            no_params(id, params)?;
            Ok(two_dice_marked())
        }
        ScenarioId::LuceTwoCities => {
            no_params(id, params)?;
            Ok(luce_two_cities())
        }
        ScenarioId::SurveyFourContexts => {
            no_params(id, params)?;
            Ok(survey_four_contexts())
        }
        ScenarioId::SurveyPairedContexts => {
            let tables = joint_tables::<4>(id, params)?;
            Ok(paired_design(
                ["a1", "a2", "b1", "b2"],
                [
                    ("a1-b1", "a1", "b1"),
                    ("a1-b2", "a1", "b2"),
                    ("a2-b1", "a2", "b1"),
                    ("a2-b2", "a2", "b2"),
                ],
                tables,
            ))
        }
        ScenarioId::QuestionOrderShared => {
            let tables = joint_tables::<2>(id, params)?;
            Ok(question_order_shared(tables))
        }
        ScenarioId::QuestionOrderSplit => {
            no_params(id, params)?;
            Ok(paired_design(
                ["a1", "a2", "b1", "b2"],
                [("a1-b2", "a1", "b2"), ("b1-a2", "b1", "a2")],
                uniform_tables(),
            ))
        }
        ScenarioId::EprUniform => {
            no_params(id, params)?;
            Ok(correlated_design(int(0), int(0), int(0), int(0)))
        }
        ScenarioId::PrBox => {
            no_params(id, params)?;
            Ok(correlated_design(int(1), int(1), int(1), int(-1)))
        }
        ScenarioId::TsirelsonRational => {
            let magnitude = match params {
                [] => rat(7, 10),
                [value] => {
                    if !is_probability(value) {
                        return Err(bad(alloc::format!(
                            "correlation magnitude {value} is outside [0, 1]"
                        )));
                    }
                    value.clone()
                }
                more => {
                    return Err(bad(alloc::format!(
                        "tsirelson-rational takes at most 1 parameter, got {}",
                        more.len()
                    )))
                }
            };
            Ok(correlated_design(
                magnitude.clone(),
                magnitude.clone(),
                magnitude.clone(),
                -magnitude,
            ))
        }
    }
}

fn no_params(id: ScenarioId, params: &[Rational]) -> Result<(), ScenarioError> {
    if params.is_empty() {
        Ok(())
    } else {
        Err(bad(alloc::format!(
            "{} takes no parameters, got {}",
            id.name(),
            params.len()
        )))
    }
}

/// N joint tables of 4 masses each, or uniform when no parameters given.
fn joint_tables<const N: usize>(
    id: ScenarioId,
    params: &[Rational],
) -> Result<[[Rational; 4]; N], ScenarioError> {
    if params.is_empty() {
        return Ok(uniform_tables());
    }
    if params.len() != 4 * N {
        return Err(bad(alloc::format!(
            "{} takes 0 or {} parameters, got {}",
            id.name(),
            4 * N,
            params.len()
        )));
    }
    let mut tables: [[Rational; 4]; N] =
        core::array::from_fn(|_| core::array::from_fn(|_| int(0)));
    for (k, table) in tables.iter_mut().enumerate() {
        let chunk = &params[4 * k..4 * k + 4];
        let total: Rational = chunk.iter().sum();
        if !total.is_one() {
            return Err(bad(alloc::format!(
                "joint table {} sums to {total}, expected 1",
                k + 1
            )));
        }
        for (slot, mass) in table.iter_mut().zip(chunk) {
            if !is_probability(mass) {
                return Err(bad(alloc::format!("mass {mass} is outside [0, 1]")));
            }
            *slot = mass.clone();
        }
    }
    Ok(tables)
}

fn uniform_tables<const N: usize>() -> [[Rational; 4]; N] {
    core::array::from_fn(|_| core::array::from_fn(|_| rat(1, 4)))
}

/// One die rolled in one context, reported through two derived binary
/// readings: `A` = the outcome is even, `B` = the outcome exceeds 3.
fn derived_die_pair(die: [Rational; 6]) -> System {
    let cell = |a: bool, b: bool| -> Rational {
        (1usize..=6)
            .filter(|o| (o % 2 == 0) == a && (*o > 3) == b)
            .map(|o| die[o - 1].clone())
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
        .expect("die masses are normalized")
}

fn two_dice_marked() -> System {
    let labels: Vec<String> = (1..=6).map(|i| i.to_string()).collect();
    let mut builder = SystemBuilder::new()
        .content("left")
        .content("right")
        .context("throw", ["left", "right"])
        .support("left", "throw", labels.clone())
        .support("right", "throw", labels.clone());
    for x in &labels {
        for y in &labels {
            builder = builder.mass("throw", [x.clone(), y.clone()], rat(1, 36));
        }
    }
    builder.build().expect("product of fair dice")
}

fn luce_two_cities() -> System {
    SystemBuilder::new()
        .content("irvine")
        .content("lafayette")
        .context("tuesday", ["irvine"])
        .context("friday", ["lafayette"])
        .support("irvine", "tuesday", ["1", "0"])
        .support("lafayette", "friday", ["1", "0"])
        .mass("tuesday", ["1"], rat(7, 10))
        .mass("tuesday", ["0"], rat(3, 10))
        .mass("friday", ["1"], rat(1, 2))
        .mass("friday", ["0"], rat(1, 2))
        .build()
        .expect("two marginals")
}

fn survey_four_contexts() -> System {
    let mut builder = SystemBuilder::new();
    for q in ["a1", "a2", "b1", "b2"] {
        builder = builder
            .content(q)
            .context(q, [q])
            .support(q, q, ["+1", "-1"])
            .mass(q, ["+1"], rat(1, 2))
            .mass(q, ["-1"], rat(1, 2));
    }
    builder.build().expect("uniform marginals")
}

/// Contexts measuring one pair of contents each, with explicit joint tables
/// in tuple order (+1 +1), (+1 -1), (-1 +1), (-1 -1).
fn paired_design<const N: usize>(
    contents: [&str; 4],
    contexts: [(&str, &str, &str); N],
    tables: [[Rational; 4]; N],
) -> System {
    let mut builder = SystemBuilder::new();
    for q in contents {
        builder = builder.content(q);
    }
    for ((ctx, first, second), table) in contexts.into_iter().zip(tables) {
        builder = builder
            .context(ctx, [first, second])
            .support(first, ctx, ["+1", "-1"])
            .support(second, ctx, ["+1", "-1"]);
        let tuples = [["+1", "+1"], ["+1", "-1"], ["-1", "+1"], ["-1", "-1"]];
        for (tuple, mass) in tuples.into_iter().zip(table) {
            builder = builder.mass(ctx, tuple, mass);
        }
    }
    builder.build().expect("normalized tables")
}

fn question_order_shared(tables: [[Rational; 4]; 2]) -> System {
    let mut builder = SystemBuilder::new().content("a").content("b");
    // Measured order follows asking order: a first in `a-b`, b first in `b-a`.
    for ((ctx, first, second), table) in
        [("a-b", "a", "b"), ("b-a", "b", "a")].into_iter().zip(tables)
    {
        builder = builder
            .context(ctx, [first, second])
            .support(first, ctx, ["+1", "-1"])
            .support(second, ctx, ["+1", "-1"]);
        let tuples = [["+1", "+1"], ["+1", "-1"], ["-1", "+1"], ["-1", "-1"]];
        for (tuple, mass) in tuples.into_iter().zip(table) {
            builder = builder.mass(ctx, tuple, mass);
        }
    }
    builder.build().expect("normalized tables")
}

/// 2×2 binary design with uniform marginals and the given four product
/// expectations, contexts `c11`, `c12`, `c21`, `c22`.
fn correlated_design(e11: Rational, e12: Rational, e21: Rational, e22: Rational) -> System {
    let mut builder = SystemBuilder::new()
        .content("a1")
        .content("a2")
        .content("b1")
        .content("b2");
    let layout = [
        ("c11", "a1", "b1", e11),
        ("c12", "a1", "b2", e12),
        ("c21", "a2", "b1", e21),
        ("c22", "a2", "b2", e22),
    ];
    for (ctx, a, b, correlation) in layout {
        builder = builder
            .context(ctx, [a, b])
            .support(a, ctx, ["+1", "-1"])
            .support(b, ctx, ["+1", "-1"]);
        for (tuple, signs) in [
            (["+1", "+1"], 1i64),
            (["+1", "-1"], -1),
            (["-1", "+1"], -1),
            (["-1", "-1"], 1),
        ] {
            let mass = (int(1) + int(signs) * &correlation) / int(4);
            builder = builder.mass(ctx, tuple, mass);
        }
    }
    builder.build().expect("correlations lie in [-1, 1]")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::CyclicFourSystem;
    use crate::system::ContextId;

    #[test]
    fn every_preset_validates() {
        for id in ScenarioId::ALL {
            let system = build(id, &[]).unwrap();
            assert!(system.validate().is_ok(), "{id} failed validation");
        }
    }

    #[test]
    fn names_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(ScenarioId::from_name(id.name()), Some(id));
        }
        assert_eq!(ScenarioId::from_name("no-such-thing"), None);
    }

    #[test]
    fn dice_presets_differ_in_independence() {
        let fair = build(ScenarioId::FairDieAB, &[]).unwrap();
        let pairs = fair.bunches()[0].pairwise_independence();
        assert!(!pairs[0].independent);

        let rigged = build(ScenarioId::RiggedDieAB, &[]).unwrap();
        let pairs = rigged.bunches()[0].pairwise_independence();
        assert!(pairs[0].independent);
    }

    #[test]
    fn cyclic_recognition_per_preset() {
        for (id, recognizable) in [
            (ScenarioId::SurveyPairedContexts, true),
            (ScenarioId::EprUniform, true),
            (ScenarioId::PrBox, true),
            (ScenarioId::TsirelsonRational, true),
            (ScenarioId::SurveyFourContexts, false),
            (ScenarioId::QuestionOrderShared, false),
            (ScenarioId::QuestionOrderSplit, false),
            (ScenarioId::FairDieAB, false),
            (ScenarioId::TwoDiceMarked, false),
            (ScenarioId::LuceTwoCities, false),
        ] {
            let system = build(id, &[]).unwrap();
            assert_eq!(
                CyclicFourSystem::from_system(&system).is_ok(),
                recognizable,
                "{id}"
            );
        }
    }

    #[test]
    fn luce_masses_match_the_quoted_rates() {
        let system = build(ScenarioId::LuceTwoCities, &[]).unwrap();
        let tuesday = system.bunch(&ContextId::from("tuesday")).unwrap();
        let marginal = tuesday.marginal(&"irvine".into()).unwrap();
        assert_eq!(marginal.mass_of(&"1".into()), rat(7, 10));
    }

    #[test]
    fn parameter_validation() {
        assert!(build(ScenarioId::PrBox, &[int(1)]).is_err());
        assert!(build(ScenarioId::TsirelsonRational, &[rat(3, 2)]).is_err());
        assert!(build(ScenarioId::TsirelsonRational, &[rat(3, 5)]).is_ok());
        assert!(build(ScenarioId::QuestionOrderShared, &[rat(1, 2)]).is_err());
        let uniform8: Vec<Rational> = (0..8).map(|_| rat(1, 4)).collect();
        assert!(build(ScenarioId::QuestionOrderShared, &uniform8).is_ok());
        let lopsided: Vec<Rational> =
            [rat(1, 2), rat(1, 2), int(0), int(0), rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)]
                .to_vec();
        assert!(build(ScenarioId::QuestionOrderShared, &lopsided).is_ok());
        let broken: Vec<Rational> =
            [rat(1, 2), rat(1, 2), rat(1, 2), int(0), rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)]
                .to_vec();
        assert!(build(ScenarioId::QuestionOrderShared, &broken).is_err());
    }

    #[test]
    fn question_order_shared_couples_but_resists_closed_form() {
        // Two contents shared across two contexts: the pairwise coupling
        // machinery applies even though the 2x2 closed form does not.
        let system = build(ScenarioId::QuestionOrderShared, &[]).unwrap();
        let coupling = crate::coupling::maximally_connected(&system).unwrap();
        assert!(coupling.is_some());
        assert!(coupling.unwrap().verify().exact);
    }
}
