//! Terminal question/answer loop.

use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use cr_core::engine::{DiagnosisResult, QuestionKind};
use cr_core::{Answer, ContextInfo, Ontology, Question, Session, Step, Verdict};

/// Invalid answers tolerated per question before giving up.
pub const MAX_REPROMPTS: usize = 3;

fn prompt(question: &Question) -> String {
    match question.kind {
        QuestionKind::Premise => format!(
            "[level {}] {}: probability that {} holds (0-1)? ",
            question.level, question.concept, question.name
        ),
        QuestionKind::Exception => format!(
            "[level {}] {}: is exception {} true? (t/f/u) ",
            question.level, question.concept, question.name
        ),
    }
}

fn parse(question: &Question, line: &str) -> Result<Answer, String> {
    match question.kind {
        QuestionKind::Premise => match line.trim().parse::<f64>() {
            Ok(p) if (0.0..=1.0).contains(&p) => Ok(Answer::Premise(p)),
            Ok(p) => Err(format!("{p} is outside [0,1]")),
            Err(_) => Err(format!("{:?} is not a number", line.trim())),
        },
        QuestionKind::Exception => line
            .parse::<Verdict>()
            .map(Answer::Verdict)
            .map_err(|_| format!("{:?} is not one of t, f, u", line.trim())),
    }
}

/// Asks every question the engine needs. `Ok(None)` means input ended
/// before the run finished.
pub fn ask<R: BufRead, W: Write>(
    ontology: &Ontology,
    ci: ContextInfo,
    input: &mut R,
    output: &mut W,
) -> Result<Option<DiagnosisResult>> {
    let mut session = Session::start(ontology, ci)?;
    let mut line = String::new();
    loop {
        let question = match session.current() {
            Step::Done(result) => return Ok(Some(result)),
            Step::Ask(question) => question,
        };
        let mut attempts = 0;
        let answer = loop {
            write!(output, "{}", prompt(&question))?;
            output.flush()?;
            line.clear();
            if input.read_line(&mut line).context("reading answer")? == 0 {
                writeln!(output)?;
                return Ok(None);
            }
            match parse(&question, &line) {
                Ok(answer) => break answer,
                Err(why) if attempts < MAX_REPROMPTS => {
                    attempts += 1;
                    writeln!(output, "invalid answer: {why}")?;
                }
                Err(why) => bail!(
                    "giving up after {} invalid answers: {why}",
                    MAX_REPROMPTS + 1
                ),
            }
        };
        session.answer(ontology, answer)?;
    }
}
