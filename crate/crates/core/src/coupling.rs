//! Couplings: joint distributions imposed on stochastically unrelated
//! bunches.
//!
//! A coupling of a system is a single probability mass over full tuples of
//! values, one coordinate per observable, whose restriction to each context
//! reproduces that context's bunch exactly. Couplings are generally not
//! unique, and none is privileged: the constructors here build the standard
//! ones (independent, identity, deterministic) directly, while
//! [`with_equality_targets`] and [`maximally_connected`] pose existence as an
//! exact linear-feasibility question.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::dist::{Distribution, Value};
use crate::lp::{solve_feasibility, LinearSystem};
use crate::rational::{is_probability, Rational};
use crate::system::{ContentId, ContextId, Observable, System, SystemBuilder};
use crate::tuples::MixedRadix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CouplingError {
    /// An identity coupling was requested for distributions that are not all
    /// identical, so no perfectly correlated coupling exists.
    DistributionsDiffer { detail: String },
    NotABijection { detail: String },
    /// The referenced content has no multi-context connection to constrain.
    UnknownConnection { content: ContentId },
    /// Maximal connectedness is only defined pairwise here.
    ConnectionArityUnsupported { content: ContentId, arity: usize },
    /// `identity_of_system` needs every context to hold a single observable.
    MultiObservableContext { context: ContextId },
    TargetOutOfRange { content: ContentId, probability: Rational },
    NothingToCouple,
}

impl fmt::Display for CouplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CouplingError::*;
        match self {
            DistributionsDiffer { detail } => write!(f, "DistributionsDiffer: {detail}"),
            NotABijection { detail } => write!(f, "NotABijection: {detail}"),
            UnknownConnection { content } => write!(
                f,
                "UnknownConnection: content '{content}' has no multi-context connection"
            ),
            ConnectionArityUnsupported { content, arity } => write!(
                f,
                "ConnectionArityUnsupported: connection of '{content}' spans {arity} contexts; only 2 are supported"
            ),
            MultiObservableContext { context } => write!(
                f,
                "MultiObservableContext: context '{context}' measures more than one content"
            ),
            TargetOutOfRange { content, probability } => write!(
                f,
                "TargetOutOfRange: target {probability} for '{content}' is not in [0, 1]"
            ),
            NothingToCouple => write!(f, "NothingToCouple: no distributions given"),
        }
    }
}

impl core::error::Error for CouplingError {}

/// Required probability that all measurements of one content agree under the
/// coupling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionTarget {
    content: ContentId,
    probability: Rational,
}

impl ConnectionTarget {
    pub fn new(content: ContentId, probability: Rational) -> Result<Self, CouplingError> {
        if !is_probability(&probability) {
            return Err(CouplingError::TargetOutOfRange {
                content,
                probability,
            });
        }
        Ok(ConnectionTarget {
            content,
            probability,
        })
    }

    pub fn content(&self) -> &ContentId {
        &self.content
    }

    pub fn probability(&self) -> &Rational {
        &self.probability
    }
}

/// One joint mass over all observables of a system.
///
/// Atoms are the tuples of the cartesian product of the observable supports,
/// with observables in canonical order (sorted by content, then context) and
/// tuples enumerated mixed-radix over the support orders. This fixes the
/// unknown ordering of every feasibility problem built from a system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling {
    system: System,
    observables: Vec<Observable>,
    supports: Vec<Vec<Value>>,
    radix: MixedRadix,
    mass: Vec<Rational>,
}

/// A bunch marginal the coupling failed to reproduce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingViolation {
    pub context: ContextId,
    pub tuple: Vec<Value>,
    pub expected: Rational,
    pub actual: Rational,
}

/// Result of checking every defining marginal condition of a coupling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CouplingVerification {
    pub exact: bool,
    pub violations: Vec<CouplingViolation>,
}

/// Positions of each context's measured coordinates inside the canonical
/// observable list.
fn context_slots(system: &System, observables: &[Observable]) -> Vec<Vec<usize>> {
    system
        .contexts()
        .iter()
        .map(|ctx| {
            ctx.measured()
                .iter()
                .map(|content| {
                    observables
                        .iter()
                        .position(|o| &o.content == content && &o.context == ctx.id())
                        .expect("validated system: every measured content is an observable")
                })
                .collect()
        })
        .collect()
}

fn atom_layout(system: &System) -> (Vec<Observable>, Vec<Vec<Value>>, MixedRadix) {
    let observables = system.observables();
    let supports: Vec<Vec<Value>> = observables
        .iter()
        .map(|o| {
            system
                .support_of(o)
                .expect("validated system: support declared")
                .to_vec()
        })
        .collect();
    let sizes: Vec<usize> = supports.iter().map(|s| s.len()).collect();
    let radix = MixedRadix::new(&sizes);
    (observables, supports, radix)
}

impl Coupling {
    fn from_mass(system: &System, mass: Vec<Rational>) -> Self {
        let (observables, supports, radix) = atom_layout(system);
        debug_assert_eq!(mass.len(), radix.len());
        Coupling {
            system: system.clone(),
            observables,
            supports,
            radix,
            mass,
        }
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn supports(&self) -> &[Vec<Value>] {
        &self.supports
    }

    pub fn atom_count(&self) -> usize {
        self.mass.len()
    }

    pub fn atom_at(&self, index: usize) -> Vec<Value> {
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

    /// All atoms in canonical order, including zero-mass ones.
    pub fn atoms(&self) -> impl Iterator<Item = (Vec<Value>, &Rational)> {
        (0..self.atom_count()).map(|i| (self.atom_at(i), &self.mass[i]))
    }

    pub fn mass_of(&self, tuple: &[Value]) -> Option<&Rational> {
        if tuple.len() != self.observables.len() {
            return None;
        }
        let mut digits = Vec::with_capacity(tuple.len());
        for (pos, value) in tuple.iter().enumerate() {
            digits.push(self.supports[pos].iter().position(|v| v == value)?);
        }
        Some(&self.mass[self.radix.encode(&digits)])
    }

    /// Probability that the atom assigns one shared value to every
    /// observable of the given content.
    pub fn equality_probability(&self, content: &ContentId) -> Result<Rational, CouplingError> {
        let positions: Vec<usize> = self
            .observables
            .iter()
            .enumerate()
            .filter(|(_, o)| &o.content == content)
            .map(|(p, _)| p)
            .collect();
        if positions.len() < 2 {
            return Err(CouplingError::UnknownConnection {
                content: content.clone(),
            });
        }
        let mut total = Rational::zero();
        for index in 0..self.atom_count() {
            if self.mass[index].is_zero() {
                continue;
            }
            let digits = self.radix.decode(index);
            let first = &self.supports[positions[0]][digits[positions[0]]];
            if positions[1..]
                .iter()
                .all(|&p| &self.supports[p][digits[p]] == first)
            {
                total += &self.mass[index];
            }
        }
        Ok(total)
    }

    /// Check the defining conditions: atoms sum to 1 and every bunch comes
    /// back exactly under marginalization. Violations name the context and
    /// tuple where the masses disagree.
    pub fn verify(&self) -> CouplingVerification {
        let mut violations = Vec::new();
        let slots = context_slots(&self.system, &self.observables);
        for (ctx_index, bunch) in self.system.bunches().iter().enumerate() {
            let bunch_radix = MixedRadix::new(
                &bunch.supports().iter().map(|s| s.len()).collect::<Vec<_>>(),
            );
            let mut sums = alloc::vec![Rational::zero(); bunch.table_len()];
            for index in 0..self.atom_count() {
                if self.mass[index].is_zero() {
                    continue;
                }
                let digits = self.radix.decode(index);
                let restricted: Vec<usize> =
                    slots[ctx_index].iter().map(|&p| digits[p]).collect();
                sums[bunch_radix.encode(&restricted)] += &self.mass[index];
            }
            for (i, expected) in bunch.tuples().map(|(t, m)| (t, m.clone())).enumerate() {
                let (tuple, expected) = expected;
                if sums[i] != expected {
                    violations.push(CouplingViolation {
                        context: bunch.context().clone(),
                        tuple,
                        expected,
                        actual: sums[i].clone(),
                    });
                }
            }
        }
        let total: Rational = self.mass.iter().sum();
        let exact = violations.is_empty() && total.is_one();
        CouplingVerification { exact, violations }
    }

    #[cfg(test)]
    pub(crate) fn perturb_for_test(mut self, index: usize, delta: Rational) -> Self {
        self.mass[index] += delta;
        self
    }
}

/// Product coupling: contexts are coupled as if independent, assigning each
/// atom the product of its per-context bunch masses.
pub fn independent(system: &System) -> Coupling {
    let (observables, supports, radix) = atom_layout(system);
    let slots = context_slots(system, &observables);
    let bunch_radixes: Vec<MixedRadix> = system
        .bunches()
        .iter()
        .map(|b| MixedRadix::new(&b.supports().iter().map(|s| s.len()).collect::<Vec<_>>()))
        .collect();

    let mut mass = Vec::with_capacity(radix.len());
    for index in 0..radix.len() {
        let digits = radix.decode(index);
        let mut product = Rational::one();
        for (ctx_index, bunch) in system.bunches().iter().enumerate() {
            let restricted: Vec<usize> = slots[ctx_index].iter().map(|&p| digits[p]).collect();
            product *= bunch.mass_at(bunch_radixes[ctx_index].encode(&restricted));
            if product.is_zero() {
                break;
            }
        }
        mass.push(product);
    }

    Coupling {
        system: system.clone(),
        observables,
        supports,
        radix,
        mass,
    }
}

fn describe_difference(first: &Distribution, second: &Distribution) -> String {
    if first.support() != second.support() {
        return String::from("supports differ");
    }
    for (value, mass) in first.iter() {
        let other = second.mass_of(value);
        if *mass != other {
            return alloc::format!("mass of '{value}': {mass} vs {other}");
        }
    }
    String::from("distributions differ")
}

/// Perfectly correlated coupling of identically distributed variables: all
/// mass sits on the diagonal tuples `(v, v, ..., v)`.
///
/// The variables are modeled as one content measured once per context, so
/// the result couples a single connection.
pub fn identity(dists: &[Distribution]) -> Result<Coupling, CouplingError> {
    if dists.is_empty() {
        return Err(CouplingError::NothingToCouple);
    }
    let mut builder = SystemBuilder::new().content("x");
    for (i, dist) in dists.iter().enumerate() {
        let ctx = alloc::format!("c{}", i + 1);
        builder = builder.support(
            "x",
            ctx.clone(),
            dist.support().iter().map(|v| String::from(v.as_str())),
        );
        builder = builder.context(ctx.clone(), ["x"]);
        for (value, mass) in dist.iter() {
            builder = builder.mass(ctx.clone(), [value.as_str()], mass.clone());
        }
    }
    let system = builder.build().expect("valid distributions form a valid system");
    identity_of_system(&system)
}

/// Diagonal coupling over an existing system of single-observable contexts.
///
/// Fails with [`CouplingError::DistributionsDiffer`] unless every context
/// carries the same distribution; a perfectly correlated coupling of
/// differently distributed variables does not exist.
pub fn identity_of_system(system: &System) -> Result<Coupling, CouplingError> {
    for ctx in system.contexts() {
        if ctx.measured().len() != 1 {
            return Err(CouplingError::MultiObservableContext {
                context: ctx.id().clone(),
            });
        }
    }
    let dists: Vec<Distribution> = system
        .bunches()
        .iter()
        .map(|b| b.marginal(&b.measured()[0]).expect("single observable"))
        .collect();
    let reference = &dists[0];
    for (i, dist) in dists.iter().enumerate().skip(1) {
        if dist != reference {
            return Err(CouplingError::DistributionsDiffer {
                detail: alloc::format!(
                    "context '{}' vs '{}': {}",
                    system.contexts()[0].id(),
                    system.contexts()[i].id(),
                    describe_difference(reference, dist)
                ),
            });
        }
    }

    let (observables, supports, radix) = atom_layout(system);
    let n = observables.len();
    let mut mass = alloc::vec![Rational::zero(); radix.len()];
    for (digit, value) in reference.support().iter().enumerate() {
        let digits = alloc::vec![digit; n];
        mass[radix.encode(&digits)] = reference.mass_of(value);
    }
    Ok(Coupling {
        system: system.clone(),
        observables,
        supports,
        radix,
        mass,
    })
}

/// Couple a distribution with its pushforward under a value bijection: mass
/// `d(v)` on each pair `(v, map(v))`.
///
/// The identity bijection recovers the identity coupling; for a fair die the
/// map `x -> 7 - x` yields the perfectly anticorrelated coupling.
pub fn deterministic(
    dist: &Distribution,
    map: &[(Value, Value)],
) -> Result<Coupling, CouplingError> {
    if map.len() != dist.support().len() {
        return Err(CouplingError::NotABijection {
            detail: alloc::format!(
                "map has {} pairs for a support of {} values",
                map.len(),
                dist.support().len()
            ),
        });
    }
    for value in dist.support() {
        if map.iter().filter(|(from, _)| from == value).count() != 1 {
            return Err(CouplingError::NotABijection {
                detail: alloc::format!("'{value}' must appear exactly once as a preimage"),
            });
        }
    }
    for (_, image) in map {
        if map.iter().filter(|(_, to)| to == image).count() != 1 {
            return Err(CouplingError::NotABijection {
                detail: alloc::format!("'{image}' is the image of two values"),
            });
        }
    }

    // Second support ordered by the image of the first, so the pushforward
    // table lines up with the source support.
    let image_of = |v: &Value| -> &Value {
        &map.iter().find(|(from, _)| from == v).expect("checked").1
    };
    let second_support: Vec<&Value> = dist.support().iter().map(image_of).collect();

    let mut builder = SystemBuilder::new()
        .content("x")
        .content("y")
        .context("c1", ["x"])
        .context("c2", ["y"])
        .support(
            "x",
            "c1",
            dist.support().iter().map(|v| String::from(v.as_str())),
        )
        .support(
            "y",
            "c2",
            second_support.iter().map(|v| String::from(v.as_str())),
        );
    for (value, mass) in dist.iter() {
        builder = builder.mass("c1", [value.as_str()], mass.clone());
        builder = builder.mass("c2", [image_of(value).as_str()], mass.clone());
    }
    let system = builder.build().expect("bijective pushforward forms a valid system");

    let (observables, supports, radix) = atom_layout(&system);
    // Canonical observable order is (x@c1, y@c2).
    debug_assert_eq!(observables[0].content, ContentId::from("x"));
    let mut mass = alloc::vec![Rational::zero(); radix.len()];
    for (i, value) in dist.support().iter().enumerate() {
        let image = image_of(value);
        let j = supports[1]
            .iter()
            .position(|v| v == image)
            .expect("image in second support");
        mass[radix.encode(&[i, j])] = dist.mass_of(value);
    }
    Ok(Coupling {
        system,
        observables,
        supports,
        radix,
        mass,
    })
}

/// Largest probability with which any coupling of `d1` and `d2` can make the
/// two variables equal: the mass overlap `sum_v min(d1(v), d2(v))`.
///
/// For binary distributions this equals `1 - |d1(v0) - d2(v0)|` for either
/// value `v0`.
pub fn max_equality_probability(d1: &Distribution, d2: &Distribution) -> Rational {
    let mut total = Rational::zero();
    for (value, mass) in d1.iter() {
        let other = d2.mass_of(value);
        total += if *mass <= other { mass.clone() } else { other };
    }
    total
}

/// Feasibility problem for a coupling of `system` whose connection equality
/// probabilities hit the given targets exactly.
///
/// Unknowns are the coupling atoms in canonical order. One equality row per
/// bunch tuple pins every marginal; one row per target pins the probability
/// of all-equal values across that content's connection.
pub fn equality_target_problem(
    system: &System,
    targets: &[ConnectionTarget],
) -> Result<LinearSystem, CouplingError> {
    let (observables, supports, radix) = atom_layout(system);
    let slots = context_slots(system, &observables);

    for target in targets {
        let spans_contexts = system
            .connection(&target.content)
            .is_some_and(|c| c.arity() >= 2);
        if !spans_contexts {
            return Err(CouplingError::UnknownConnection {
                content: target.content.clone(),
            });
        }
    }

    let names: Vec<String> = (0..radix.len())
        .map(|index| {
            let digits = radix.decode(index);
            let parts: Vec<&str> = digits
                .iter()
                .enumerate()
                .map(|(pos, &d)| supports[pos][d].as_str())
                .collect();
            parts.join(",")
        })
        .collect();

    let mut matrix: Vec<Vec<Rational>> = Vec::new();
    let mut rhs: Vec<Rational> = Vec::new();

    for (ctx_index, bunch) in system.bunches().iter().enumerate() {
        let bunch_radix =
            MixedRadix::new(&bunch.supports().iter().map(|s| s.len()).collect::<Vec<_>>());
        let mut rows =
            alloc::vec![alloc::vec![Rational::zero(); radix.len()]; bunch.table_len()];
        for index in 0..radix.len() {
            let digits = radix.decode(index);
            let restricted: Vec<usize> = slots[ctx_index].iter().map(|&p| digits[p]).collect();
            rows[bunch_radix.encode(&restricted)][index] = Rational::one();
        }
        for (i, row) in rows.into_iter().enumerate() {
            matrix.push(row);
            rhs.push(bunch.mass_at(i).clone());
        }
    }

    for target in targets {
        let positions: Vec<usize> = observables
            .iter()
            .enumerate()
            .filter(|(_, o)| o.content == target.content)
            .map(|(p, _)| p)
            .collect();
        let mut row = alloc::vec![Rational::zero(); radix.len()];
        for (index, entry) in row.iter_mut().enumerate() {
            let digits = radix.decode(index);
            let first = &supports[positions[0]][digits[positions[0]]];
            if positions[1..]
                .iter()
                .all(|&p| &supports[p][digits[p]] == first)
            {
                *entry = Rational::one();
            }
        }
        matrix.push(row);
        rhs.push(target.probability.clone());
    }

    Ok(LinearSystem::new(matrix, rhs, names).expect("constructed dimensions are consistent"))
}

/// Find a coupling whose equality probabilities match the targets exactly,
/// if one exists. The marginal constraints are always included; the witness
/// is whatever vertex the solver reaches first, no atom pattern is promised.
pub fn with_equality_targets(
    system: &System,
    targets: &[ConnectionTarget],
) -> Result<Option<Coupling>, CouplingError> {
    let problem = equality_target_problem(system, targets)?;
    match solve_feasibility(&problem) {
        crate::lp::FeasibilityResult::Feasible(witness) => {
            Ok(Some(Coupling::from_mass(system, witness)))
        }
        crate::lp::FeasibilityResult::Infeasible => Ok(None),
    }
}

/// Seek a coupling in which every two-context connection agrees with the
/// maximal probability its two marginal distributions allow.
///
/// The system is noncontextual exactly when such a coupling exists.
/// Connections spanning more than two contexts are rejected: no pairwise
/// notion of maximality applies to them.
pub fn maximally_connected(system: &System) -> Result<Option<Coupling>, CouplingError> {
    let mut targets = Vec::new();
    for connection in system.connections() {
        match connection.arity() {
            0 | 1 => continue,
            2 => {
                let first = system
                    .observable_marginal(&connection.observables()[0])
                    .expect("validated system");
                let second = system
                    .observable_marginal(&connection.observables()[1])
                    .expect("validated system");
                targets.push(
                    ConnectionTarget::new(
                        connection.content().clone(),
                        max_equality_probability(&first, &second),
                    )
                    .expect("overlap is a probability"),
                );
            }
            arity => {
                return Err(CouplingError::ConnectionArityUnsupported {
                    content: connection.content().clone(),
                    arity,
                })
            }
        }
    }
    with_equality_targets(system, &targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use alloc::string::ToString;

    fn die() -> Distribution {
        Distribution::uniform((1..=6).map(|i| Value::new(i.to_string())).collect()).unwrap()
    }

    fn bernoulli(p: Rational) -> Distribution {
        Distribution::new(alloc::vec![
            (Value::from("1"), p.clone()),
            (Value::from("0"), int(1) - p),
        ])
        .unwrap()
    }

    /// Two unrelated contexts, one die each.
    fn two_dice_system() -> System {
        let labels: Vec<String> = (1..=6).map(|i| i.to_string()).collect();
        let mut builder = SystemBuilder::new()
            .content("x")
            .content("y")
            .context("c1", ["x"])
            .context("c2", ["y"])
            .support("x", "c1", labels.clone())
            .support("y", "c2", labels.clone());
        for label in &labels {
            builder = builder
                .mass("c1", [label.clone()], rat(1, 6))
                .mass("c2", [label.clone()], rat(1, 6));
        }
        builder.build().unwrap()
    }

    #[test]
    fn independent_coupling_of_two_fair_dice() {
        let coupling = independent(&two_dice_system());
        assert_eq!(coupling.atom_count(), 36);
        assert!(coupling.atoms().all(|(_, m)| *m == rat(1, 36)));
        assert!(coupling.verify().exact);
    }

    #[test]
    fn independent_coupling_of_single_context_is_the_bunch() {
        let system = SystemBuilder::new()
            .content("a")
            .content("b")
            .context("c", ["a", "b"])
            .support("a", "c", ["0", "1"])
            .support("b", "c", ["0", "1"])
            .mass("c", ["0", "0"], rat(1, 2))
            .mass("c", ["1", "1"], rat(1, 2))
            .build()
            .unwrap();
        let coupling = independent(&system);
        let bunch = &system.bunches()[0];
        for (tuple, mass) in bunch.tuples() {
            assert_eq!(coupling.mass_of(&tuple).unwrap(), mass);
        }
        assert!(coupling.verify().exact);
    }

    #[test]
    fn independent_coupling_of_point_masses_is_one_atom() {
        let system = SystemBuilder::new()
            .content("x")
            .content("y")
            .context("c1", ["x"])
            .context("c2", ["y"])
            .support("x", "c1", ["a"])
            .support("y", "c2", ["b"])
            .mass("c1", ["a"], int(1))
            .mass("c2", ["b"], int(1))
            .build()
            .unwrap();
        let coupling = independent(&system);
        assert_eq!(coupling.atom_count(), 1);
        assert_eq!(*coupling.mass_at(0), int(1));
    }

    #[test]
    fn identity_coupling_of_fair_dice_is_diagonal() {
        let coupling = identity(&[die(), die()]).unwrap();
        assert!(coupling.verify().exact);
        let mut nonzero = 0;
        for (tuple, mass) in coupling.atoms() {
            if !mass.is_zero() {
                nonzero += 1;
                assert_eq!(tuple[0], tuple[1]);
                assert_eq!(*mass, rat(1, 6));
            }
        }
        assert_eq!(nonzero, 6);
    }

    #[test]
    fn identity_coupling_requires_identical_distributions() {
        let err = identity(&[bernoulli(rat(7, 10)), bernoulli(rat(1, 2))]).unwrap_err();
        assert!(matches!(err, CouplingError::DistributionsDiffer { .. }));
    }

    #[test]
    fn identity_coupling_of_one_distribution_is_itself() {
        let d = bernoulli(rat(7, 10));
        let coupling = identity(core::slice::from_ref(&d)).unwrap();
        assert_eq!(coupling.atom_count(), 2);
        assert_eq!(coupling.mass_of(&[Value::from("1")]).unwrap(), &rat(7, 10));
    }

    #[test]
    fn anticorrelated_dice_via_bijection() {
        let d = die();
        let map: Vec<(Value, Value)> = (1..=6)
            .map(|x| (Value::new(x.to_string()), Value::new((7 - x).to_string())))
            .collect();
        let coupling = deterministic(&d, &map).unwrap();
        assert!(coupling.verify().exact);
        for (tuple, mass) in coupling.atoms() {
            let x: i32 = tuple[0].as_str().parse().unwrap();
            let y: i32 = tuple[1].as_str().parse().unwrap();
            if x + y == 7 {
                assert_eq!(*mass, rat(1, 6));
            } else {
                assert!(mass.is_zero());
            }
        }
    }

    #[test]
    fn identity_bijection_matches_identity_coupling() {
        let d = die();
        let map: Vec<(Value, Value)> = d
            .support()
            .iter()
            .map(|v| (v.clone(), v.clone()))
            .collect();
        let coupling = deterministic(&d, &map).unwrap();
        for (tuple, mass) in coupling.atoms() {
            if !mass.is_zero() {
                assert_eq!(tuple[0], tuple[1]);
            }
        }
    }

    #[test]
    fn point_mass_coupling_is_simultaneously_everything() {
        // A die rigged to one outcome: the only coupling has a single atom,
        // and it is at once independent, perfectly correlated, and (under
        // any bijection) deterministic.
        let d = Distribution::point_mass(Value::from("3"));
        let map = alloc::vec![(Value::from("3"), Value::from("4"))];
        let coupling = deterministic(&d, &map).unwrap();
        assert_eq!(coupling.atom_count(), 1);
        assert_eq!(*coupling.mass_at(0), int(1));
    }

    #[test]
    fn rejects_non_bijections() {
        let d = bernoulli(rat(1, 2));
        // Both values map to the same image.
        let map = alloc::vec![
            (Value::from("1"), Value::from("a")),
            (Value::from("0"), Value::from("a")),
        ];
        assert!(matches!(
            deterministic(&d, &map).unwrap_err(),
            CouplingError::NotABijection { .. }
        ));
        // Missing preimage.
        let map = alloc::vec![(Value::from("1"), Value::from("a"))];
        assert!(matches!(
            deterministic(&d, &map).unwrap_err(),
            CouplingError::NotABijection { .. }
        ));
    }

    #[test]
    fn max_equality_probability_binary_identity() {
        let d1 = bernoulli(rat(7, 10));
        let d2 = bernoulli(rat(1, 2));
        assert_eq!(max_equality_probability(&d1, &d2), rat(4, 5));
        assert_eq!(max_equality_probability(&d1, &d1), int(1));

        let disjoint1 = Distribution::point_mass(Value::from("a"));
        let disjoint2 = Distribution::point_mass(Value::from("b"));
        assert_eq!(max_equality_probability(&disjoint1, &disjoint2), int(0));
    }

    /// One binary content measured in two contexts with the given masses.
    fn connection_system(p1: Rational, p2: Rational) -> System {
        SystemBuilder::new()
            .content("q")
            .context("c1", ["q"])
            .context("c2", ["q"])
            .support("q", "c1", ["1", "0"])
            .support("q", "c2", ["1", "0"])
            .mass("c1", ["1"], p1.clone())
            .mass("c1", ["0"], int(1) - p1)
            .mass("c2", ["1"], p2.clone())
            .mass("c2", ["0"], int(1) - p2)
            .build()
            .unwrap()
    }

    #[test]
    fn equality_target_at_overlap_is_feasible_and_above_is_not() {
        let system = connection_system(rat(7, 10), rat(1, 2));
        let max = rat(4, 5);
        let at = ConnectionTarget::new(ContentId::from("q"), max.clone()).unwrap();
        let coupling = with_equality_targets(&system, &[at]).unwrap().unwrap();
        assert!(coupling.verify().exact);
        assert_eq!(
            coupling.equality_probability(&ContentId::from("q")).unwrap(),
            max
        );

        let above = ConnectionTarget::new(ContentId::from("q"), rat(9, 10)).unwrap();
        assert!(with_equality_targets(&system, &[above]).unwrap().is_none());
    }

    #[test]
    fn unknown_connection_is_rejected() {
        let system = connection_system(rat(1, 2), rat(1, 2));
        let target = ConnectionTarget::new(ContentId::from("ghost"), int(1)).unwrap();
        assert_eq!(
            with_equality_targets(&system, &[target]).unwrap_err(),
            CouplingError::UnknownConnection {
                content: ContentId::from("ghost")
            }
        );
    }

    #[test]
    fn target_out_of_range_is_rejected() {
        assert!(matches!(
            ConnectionTarget::new(ContentId::from("q"), rat(3, 2)),
            Err(CouplingError::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn maximally_connected_coupling_of_consistent_connection() {
        let system = connection_system(rat(1, 2), rat(1, 2));
        let coupling = maximally_connected(&system).unwrap().unwrap();
        assert!(coupling.verify().exact);
        assert_eq!(
            coupling.equality_probability(&ContentId::from("q")).unwrap(),
            int(1)
        );
    }

    #[test]
    fn maximally_connected_coupling_of_single_context_is_the_bunch() {
        let system = SystemBuilder::new()
            .content("a")
            .context("c", ["a"])
            .support("a", "c", ["0", "1"])
            .mass("c", ["0"], rat(1, 3))
            .mass("c", ["1"], rat(2, 3))
            .build()
            .unwrap();
        let coupling = maximally_connected(&system).unwrap().unwrap();
        assert_eq!(coupling.mass_of(&[Value::from("0")]).unwrap(), &rat(1, 3));
    }

    #[test]
    fn connections_wider_than_two_contexts_are_rejected() {
        let mut builder = SystemBuilder::new().content("q");
        for i in 1..=3 {
            let ctx = alloc::format!("c{i}");
            builder = builder
                .context(ctx.clone(), ["q"])
                .support("q", ctx.clone(), ["0", "1"])
                .mass(ctx.clone(), ["0"], rat(1, 2))
                .mass(ctx, ["1"], rat(1, 2));
        }
        let system = builder.build().unwrap();
        assert_eq!(
            maximally_connected(&system).unwrap_err(),
            CouplingError::ConnectionArityUnsupported {
                content: ContentId::from("q"),
                arity: 3,
            }
        );
    }

    #[test]
    fn verify_detects_a_perturbed_atom() {
        let coupling = independent(&two_dice_system());
        let perturbed = coupling.perturb_for_test(0, rat(1, 1000));
        let verification = perturbed.verify();
        assert!(!verification.exact);
        assert!(!verification.violations.is_empty());
        assert_eq!(verification.violations[0].context, ContextId::from("c1"));
    }

    #[test]
    fn couplings_of_fair_dice_are_not_unique() {
        let system = two_dice_system();
        let ind = independent(&system);
        let ident = identity(&[die(), die()]).unwrap();
        let map: Vec<(Value, Value)> = (1..=6)
            .map(|x| (Value::new(x.to_string()), Value::new((7 - x).to_string())))
            .collect();
        let anti = deterministic(&die(), &map).unwrap();
        assert!(ind.verify().exact);
        assert!(ident.verify().exact);
        assert!(anti.verify().exact);
        // Same marginals, three different joint masses: probe the (1, 1)
        // atom, which each coupling weighs differently.
        let ones = [Value::from("1"), Value::from("1")];
        assert_eq!(ind.mass_of(&ones).unwrap(), &rat(1, 36));
        assert_eq!(ident.mass_of(&ones).unwrap(), &rat(1, 6));
        assert_eq!(anti.mass_of(&ones).unwrap(), &int(0));
    }
}
