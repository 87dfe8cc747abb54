#![allow(dead_code)]

use std::path::PathBuf;

use cr_core::corpus::Scenario;
use cr_core::{Answer, ContextInfo, Ontology, Session, Step};

/// Published scenario documents shipped with the workspace.
pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn scenario_path(case: u8) -> PathBuf {
    scenario_dir().join(format!("test-case-{case:02}.json"))
}

/// The answers a scenario gives, in the order the engine asks for them.
pub fn answer_script(ontology: &Ontology, ci: ContextInfo, scenario: &Scenario) -> Vec<Answer> {
    let mut session = Session::start(ontology, ci).unwrap();
    let mut oracle = scenario.oracle();
    let mut answers = Vec::new();
    loop {
        let question = match session.current() {
            Step::Done(_) => return answers,
            Step::Ask(q) => q,
        };
        let answer = match question.kind {
            cr_core::engine::QuestionKind::Premise => Answer::Premise(
                cr_core::Oracle::premise_confidence(&mut oracle, &question).unwrap(),
            ),
            cr_core::engine::QuestionKind::Exception => {
                Answer::Verdict(cr_core::Oracle::exception_verdict(&mut oracle, &question).unwrap())
            }
        };
        answers.push(answer);
        session.answer(ontology, answer).unwrap();
    }
}

/// What a person would type for each answer.
pub fn typed(answers: &[Answer]) -> String {
    answers
        .iter()
        .map(|a| match a {
            Answer::Premise(p) => format!("{p}\n"),
            Answer::Verdict(v) => format!("{v}\n"),
        })
        .collect()
}
