//! Command implementations, pure over input text so tests can drive them
//! without touching the filesystem.

use couplecheck_core::analysis::{self, AnalysisReport, CyclicFourSystem, StructureError};
use couplecheck_core::coupling::{self, ConnectionTarget, Coupling, CouplingError};
use couplecheck_core::scenarios::{self, ScenarioId};
use couplecheck_core::system::{ContentId, System};

use crate::format::{self, ParsedSystem};

/// Success, or a noncontextual verdict.
pub const EXIT_OK: i32 = 0;
/// The input failed to parse or validate.
pub const EXIT_INVALID: i32 = 1;
/// The system is valid but lacks the structure the command needs.
pub const EXIT_STRUCTURE: i32 = 2;
/// A contextual verdict (including an infeasible maximal coupling).
pub const EXIT_CONTEXTUAL: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommandOutput {
    pub code: i32,
    pub text: String,
}

impl CommandOutput {
    fn new(code: i32, text: impl Into<String>) -> Self {
        CommandOutput {
            code,
            text: text.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Machine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoupleKind {
    Independent,
    Identity,
    Maximal,
    Targets,
}

fn parse_and_validate(input: &str) -> Result<System, CommandOutput> {
    let ParsedSystem { builder, locations } =
        format::parse_system_file(input).map_err(|e| CommandOutput::new(EXIT_INVALID, format!("{e}\n")))?;
    builder.build().map_err(|report| {
        let mut text = String::new();
        for error in &report.errors {
            match locations.locate(error) {
                Some((section, line)) => {
                    text.push_str(&format!("{section}, line {line}: {error}\n"))
                }
                None => text.push_str(&format!("{error}\n")),
            }
        }
        CommandOutput::new(EXIT_INVALID, text)
    })
}

pub fn run_validate(input: &str) -> CommandOutput {
    match parse_and_validate(input) {
        Ok(system) => CommandOutput::new(
            EXIT_OK,
            format!(
                "ok: {} contents, {} contexts, {} observables\n",
                system.contents().len(),
                system.contexts().len(),
                system.observables().len()
            ),
        ),
        Err(output) => output,
    }
}

fn bool_word(value: bool) -> &'static str {
    if value {
        "true"
    } else {
        "false"
    }
}

fn render_report(report: &AnalysisReport, format: ReportFormat) -> String {
    let verdict = if report.noncontextual() {
        "noncontextual"
    } else {
        "contextual"
    };
    let mut per_content: Vec<(&ContentId, bool)> = report
        .marginal_selectivity
        .per_content
        .iter()
        .map(|(c, ok)| (c, *ok))
        .collect();
    per_content.sort_by_key(|(c, _)| c.as_str());

    match format {
        ReportFormat::Machine => {
            let mut out = String::new();
            out.push_str(&format!(
                "marginal_selectivity={}\n",
                bool_word(report.marginal_selectivity.holds)
            ));
            for (content, ok) in &per_content {
                out.push_str(&format!("marginal_selectivity.{content}={}\n", bool_word(*ok)));
            }
            out.push_str(&format!(
                "chsh_value={}\n",
                format::format_fraction(&report.chsh_value)
            ));
            out.push_str(&format!("chsh_satisfied={}\n", bool_word(report.chsh_satisfied)));
            out.push_str(&format!(
                "extended_bound={}\n",
                format::format_fraction(&report.extended_bound)
            ));
            out.push_str(&format!(
                "noncontextual_closed_form={}\n",
                bool_word(report.noncontextual_closed_form)
            ));
            out.push_str(&format!(
                "noncontextual_lp={}\n",
                bool_word(report.noncontextual_lp)
            ));
            out.push_str(&format!(
                "noncontextual={}\n",
                bool_word(report.noncontextual())
            ));
            out.push_str(&format!(
                "selective_influences={}\n",
                bool_word(report.selective_influences)
            ));
            out.push_str(&format!(
                "oracle_agreement={}\n",
                bool_word(report.oracle_agreement)
            ));
            out.push_str(&format!("verdict={verdict}\n"));
            out
        }
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!(
                "marginal selectivity: {}\n",
                if report.marginal_selectivity.holds {
                    "holds"
                } else {
                    "violated"
                }
            ));
            for (content, ok) in &per_content {
                out.push_str(&format!(
                    "  {content}: {}\n",
                    if *ok { "consistent" } else { "inconsistent" }
                ));
            }
            out.push_str(&format!(
                "chsh value: {}\n",
                format::format_fraction(&report.chsh_value)
            ));
            out.push_str(&format!(
                "extended bound: {}\n",
                format::format_fraction(&report.extended_bound)
            ));
            out.push_str(&format!(
                "noncontextual (closed form): {}\n",
                bool_word(report.noncontextual_closed_form)
            ));
            out.push_str(&format!(
                "noncontextual (lp): {}\n",
                bool_word(report.noncontextual_lp)
            ));
            out.push_str(&format!(
                "selective influences: {}\n",
                bool_word(report.selective_influences)
            ));
            out.push_str(&format!(
                "oracle agreement: {}\n",
                bool_word(report.oracle_agreement)
            ));
            out.push_str(&format!("verdict: {verdict}\n"));
            out
        }
    }
}

fn analyze_system(system: &System, format: ReportFormat) -> CommandOutput {
    match CyclicFourSystem::from_system(system) {
        Ok(cyclic) => {
            let report = analysis::analyze(&cyclic);
            let code = if report.noncontextual() {
                EXIT_OK
            } else {
                EXIT_CONTEXTUAL
            };
            CommandOutput::new(code, render_report(&report, format))
        }
        Err(error) => CommandOutput::new(EXIT_STRUCTURE, format!("{error}\n")),
    }
}

pub fn run_analyze(input: &str, format: ReportFormat) -> CommandOutput {
    match parse_and_validate(input) {
        Ok(system) => analyze_system(&system, format),
        Err(output) => output,
    }
}

fn render_coupling(coupling: &Coupling) -> String {
    let verification = coupling.verify();
    assert!(
        verification.exact,
        "constructed coupling failed verification: {:?}",
        verification.violations
    );
    let observables: Vec<String> = coupling
        .observables()
        .iter()
        .map(|o| o.to_string())
        .collect();
    let mut out = format!("observables: {}\n", observables.join(" "));
    for (tuple, mass) in coupling.atoms() {
        if mass == &couplecheck_core::rational::int(0) {
            continue;
        }
        let values: Vec<&str> = tuple.iter().map(|v| v.as_str()).collect();
        out.push_str(&format!(
            "{} : {}\n",
            values.join(" "),
            format::format_fraction(mass)
        ));
    }
    out
}

fn coupling_error_output(error: CouplingError) -> CommandOutput {
    let code = match &error {
        CouplingError::TargetOutOfRange { .. } | CouplingError::NothingToCouple => EXIT_INVALID,
        _ => EXIT_STRUCTURE,
    };
    CommandOutput::new(code, format!("{error}\n"))
}

pub fn run_couple(input: &str, kind: CoupleKind, targets_text: Option<&str>) -> CommandOutput {
    let system = match parse_and_validate(input) {
        Ok(system) => system,
        Err(output) => return output,
    };
    match kind {
        CoupleKind::Independent => {
            CommandOutput::new(EXIT_OK, render_coupling(&coupling::independent(&system)))
        }
        CoupleKind::Identity => match coupling::identity_of_system(&system) {
            Ok(coupling) => CommandOutput::new(EXIT_OK, render_coupling(&coupling)),
            Err(error) => coupling_error_output(error),
        },
        CoupleKind::Maximal => match coupling::maximally_connected(&system) {
            Ok(Some(coupling)) => CommandOutput::new(EXIT_OK, render_coupling(&coupling)),
            Ok(None) => CommandOutput::new(EXIT_CONTEXTUAL, "INFEASIBLE\n"),
            Err(error) => coupling_error_output(error),
        },
        CoupleKind::Targets => {
            let Some(text) = targets_text else {
                return CommandOutput::new(
                    EXIT_INVALID,
                    "--kind targets requires --targets <file>\n",
                );
            };
            let parsed = match format::parse_targets_file(text) {
                Ok(parsed) => parsed,
                Err(e) => return CommandOutput::new(EXIT_INVALID, format!("{e}\n")),
            };
            let mut targets = Vec::with_capacity(parsed.len());
            for (content, probability) in parsed {
                match ConnectionTarget::new(ContentId::new(content), probability) {
                    Ok(target) => targets.push(target),
                    Err(error) => return coupling_error_output(error),
                }
            }
            match coupling::with_equality_targets(&system, &targets) {
                Ok(Some(coupling)) => CommandOutput::new(EXIT_OK, render_coupling(&coupling)),
                Ok(None) => CommandOutput::new(EXIT_CONTEXTUAL, "INFEASIBLE\n"),
                Err(error) => coupling_error_output(error),
            }
        }
    }
}

/// Demo output: the serialized system file, then whatever analysis applies.
pub struct DemoOutput {
    pub file_text: String,
    pub report: CommandOutput,
}

pub fn run_demo(name: &str, format: ReportFormat) -> Result<DemoOutput, CommandOutput> {
    let Some(id) = ScenarioId::from_name(name) else {
        let known: Vec<&str> = ScenarioId::ALL.iter().map(|s| s.name()).collect();
        return Err(CommandOutput::new(
            EXIT_INVALID,
            format!(
                "UnknownScenario: '{name}'\nknown scenarios: {}\n",
                known.join(", ")
            ),
        ));
    };
    let system = scenarios::build(id, &[]).expect("presets build with default parameters");
    let file_text = format::print_system(&system);

    let report = match CyclicFourSystem::from_system(&system) {
        Ok(_) => analyze_system(&system, format),
        Err(StructureError::NoSharedContents) | Err(StructureError::WrongShape { .. }) => {
            // No 2x2 analysis; a single joint context still supports the
            // factorization test.
            if system.contexts().len() == 1 && system.contexts()[0].measured().len() >= 2 {
                let mut text = String::new();
                for pair in system.bunches()[0].pairwise_independence() {
                    text.push_str(&format!(
                        "{},{}: {}\n",
                        pair.first,
                        pair.second,
                        if pair.independent {
                            "independent"
                        } else {
                            "not independent"
                        }
                    ));
                }
                CommandOutput::new(EXIT_OK, text)
            } else {
                let reason = CyclicFourSystem::from_system(&system).unwrap_err();
                CommandOutput::new(EXIT_OK, format!("analysis not applicable: {reason}\n"))
            }
        }
        Err(other) => CommandOutput::new(EXIT_STRUCTURE, format!("{other}\n")),
    };
    Ok(DemoOutput { file_text, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset_text(id: ScenarioId) -> String {
        format::print_system(&scenarios::build(id, &[]).unwrap())
    }

    #[test]
    fn validate_accepts_presets_and_reports_violations() {
        let output = run_validate(&preset_text(ScenarioId::PrBox));
        assert_eq!(output.code, EXIT_OK);

        let broken = "contents\n  q\ncontexts\n  c : q\nsupports\n  q @ c : a b\nbunches\n  c\n    a : 1/2\n    b : 1/3\n";
        let output = run_validate(broken);
        assert_eq!(output.code, EXIT_INVALID);
        assert!(output.text.contains("MassNotNormalized"));
        assert!(output.text.contains("bunches, line 8"));
    }

    #[test]
    fn analyze_encodes_verdicts_in_exit_codes() {
        let output = run_analyze(&preset_text(ScenarioId::PrBox), ReportFormat::Machine);
        assert_eq!(output.code, EXIT_CONTEXTUAL);
        assert!(output.text.contains("chsh_value=4/1"));
        assert!(output.text.contains("noncontextual=false"));

        let output = run_analyze(&preset_text(ScenarioId::EprUniform), ReportFormat::Machine);
        assert_eq!(output.code, EXIT_OK);
        assert!(output.text.contains("noncontextual=true"));

        let output = run_analyze(
            &preset_text(ScenarioId::SurveyFourContexts),
            ReportFormat::Text,
        );
        assert_eq!(output.code, EXIT_STRUCTURE);
        assert!(output.text.contains("no shared contents"));
    }

    #[test]
    fn machine_format_never_prints_floats() {
        for id in [
            ScenarioId::PrBox,
            ScenarioId::EprUniform,
            ScenarioId::TsirelsonRational,
        ] {
            let output = run_analyze(&preset_text(id), ReportFormat::Machine);
            for line in output.text.lines() {
                let (_, value) = line.split_once('=').expect("key=value");
                assert!(
                    !value.contains('.'),
                    "float-looking value in machine output: {line}"
                );
            }
        }
    }

    #[test]
    fn couple_kinds_and_exit_codes() {
        let dice = preset_text(ScenarioId::TwoDiceMarked);
        let output = run_couple(&dice, CoupleKind::Independent, None);
        assert_eq!(output.code, EXIT_OK);
        assert_eq!(
            output.text.lines().filter(|l| l.ends_with("1/36")).count(),
            36
        );

        let luce = preset_text(ScenarioId::LuceTwoCities);
        let output = run_couple(&luce, CoupleKind::Identity, None);
        assert_eq!(output.code, EXIT_STRUCTURE);
        assert!(output.text.contains("DistributionsDiffer"));

        let pr = preset_text(ScenarioId::PrBox);
        let output = run_couple(&pr, CoupleKind::Maximal, None);
        assert_eq!(output.code, EXIT_CONTEXTUAL);
        assert_eq!(output.text, "INFEASIBLE\n");

        let targets = "a1 : 1/1\na2 : 1\nb1 : 1\nb2 : 1\n";
        let output = run_couple(&pr, CoupleKind::Targets, Some(targets));
        assert_eq!(output.code, EXIT_CONTEXTUAL);

        let epr = preset_text(ScenarioId::EprUniform);
        let output = run_couple(&epr, CoupleKind::Targets, Some(targets));
        assert_eq!(output.code, EXIT_OK);

        let output = run_couple(&epr, CoupleKind::Targets, Some("ghost : 1\n"));
        assert_eq!(output.code, EXIT_STRUCTURE);
        assert!(output.text.contains("UnknownConnection"));

        let output = run_couple(&epr, CoupleKind::Targets, Some("a1 : 3/2\n"));
        assert_eq!(output.code, EXIT_INVALID);
    }

    #[test]
    fn demo_runs_the_applicable_analysis() {
        let demo = run_demo("pr-box", ReportFormat::Machine).unwrap();
        assert_eq!(demo.report.code, EXIT_CONTEXTUAL);
        assert!(demo.file_text.starts_with("contents\n"));

        let demo = run_demo("rigged-die-AB", ReportFormat::Text).unwrap();
        assert_eq!(demo.report.code, EXIT_OK);
        assert_eq!(demo.report.text, "A,B: independent\n");

        let demo = run_demo("fair-die-AB", ReportFormat::Text).unwrap();
        assert_eq!(demo.report.text, "A,B: not independent\n");

        let demo = run_demo("question-order-shared", ReportFormat::Text).unwrap();
        assert_eq!(demo.report.code, EXIT_OK);
        assert!(demo.report.text.contains("analysis not applicable"));

        let error = run_demo("no-such", ReportFormat::Text).unwrap_err();
        assert_eq!(error.code, EXIT_INVALID);
    }
}
