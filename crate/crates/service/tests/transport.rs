//! The same script gives the same result through scripted replay, the
//! terminal loop, and the wire protocol.

mod common;

use std::io::Cursor;
use std::time::Duration;

use axum::body::Body;
use axum::http::Request;
use clap::Parser;
use common::{answer_script, typed};
use cr_core::corpus::cases::published_cases;
use cr_core::corpus::{builtin_nrc, builtin_scenario, Scenario};
use cr_core::{run_dba, Answer, ContextInfo, Verdict};
use cr_service::render;
use cr_service::server::{router, AppState};
use cr_service::wire::{AnswerBody, Envelope, Payload, ResultMessage};
use cr_service::{execute, Cli, RunLog};
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

fn replay_line(dir: &std::path::Path, ci: &ContextInfo, scenario: &Scenario) -> (u8, String) {
    let path = dir.join("scenario.json");
    std::fs::write(&path, scenario.to_json()).unwrap();
    let cli = Cli::parse_from([
        "cr",
        "replay",
        "--scenario",
        path.to_str().unwrap(),
        "--ci",
        &format!("{},{},{}", ci.m, ci.e, ci.k),
        "--df-threshold",
        &ci.df_threshold.to_string(),
    ]);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(cli, &mut Cursor::new(Vec::new()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap())
}

fn ask_result(ci: ContextInfo, answers: &[Answer]) -> cr_core::DiagnosisResult {
    let mut input = Cursor::new(typed(answers).into_bytes());
    cr_service::ask::ask(&builtin_nrc(), ci, &mut input, &mut Vec::new())
        .unwrap()
        .expect("script answers every question")
}

async fn wire_result(ci: ContextInfo, answers: &[Answer]) -> ResultMessage {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(
        builtin_nrc(),
        RunLog::new(dir.path().join("r")),
        Duration::from_secs(60),
    ));
    let send = |uri: String, body: String| {
        let app = app.clone();
        async move {
            let request = Request::post(uri)
                .header("content-type", "application/json")
                .body(Body::from(body))
                .unwrap();
            let response = app.oneshot(request).await.unwrap();
            let bytes = response.into_body().collect().await.unwrap().to_bytes();
            serde_json::from_slice::<Envelope>(&bytes).unwrap()
        }
    };
    let mut env = send(
        "/sessions".into(),
        serde_json::json!({ "ci": ci }).to_string(),
    )
    .await;
    for answer in answers {
        let body = match *answer {
            Answer::Premise(p) => AnswerBody::premise(env.seq, p),
            Answer::Verdict(v) => AnswerBody::verdict(env.seq, v),
        };
        env = send(
            format!("/sessions/{}/answers", env.session_id),
            serde_json::to_string(&body).unwrap(),
        )
        .await;
    }
    match env.payload {
        Payload::Result(result) => result,
        Payload::Question(q) => panic!("script ran out at {q:?}"),
    }
}

fn random_scenario(rng: &mut impl Rng) -> Scenario {
    let mut scenario = builtin_scenario().with_label("random");
    for p in scenario.premise_probs.values_mut() {
        if rng.gen_bool(0.3) {
            *p = rng.gen_range(0.0..=1.0);
        }
    }
    for unit in builtin_nrc().concepts() {
        let verdicts = (0..unit.exception_count())
            .map(|_| match rng.gen_range(0..8) {
                0 => Verdict::True,
                1 => Verdict::Unknown,
                _ => Verdict::False,
            })
            .collect();
        scenario.verdicts.insert(unit.name.clone(), verdicts);
    }
    scenario
}

async fn check(ci: ContextInfo, scenario: &Scenario) {
    let ontology = builtin_nrc();
    let direct = run_dba(&ontology, &ci, &mut scenario.oracle()).unwrap();
    let answers = answer_script(&ontology, ci, scenario);

    let dir = tempfile::tempdir().unwrap();
    let (code, line) = replay_line(dir.path(), &ci, scenario);
    assert_eq!(line, format!("{}\n", render::answer_line(&direct)));
    assert_eq!(
        code,
        if direct.status == cr_core::Status::Indeterminate {
            2
        } else {
            0
        }
    );

    assert_eq!(ask_result(ci, &answers), direct);
    assert_eq!(
        wire_result(ci, &answers).await,
        ResultMessage::from(&direct)
    );
}

#[tokio::test]
async fn published_cases_agree_across_transports() {
    for case in published_cases() {
        check(case.context(), &case.scenario()).await;
    }
}

#[tokio::test]
async fn random_scripts_agree_across_transports() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let ci = ContextInfo::with_df_threshold(
            rng.gen_range(0.05..=1.0),
            rng.gen_range(0.125..=8.0),
            rng.gen_range(0.25..=4.0),
            rng.gen_range(0.5..=0.95),
        )
        .unwrap();
        check(ci, &random_scenario(&mut rng)).await;
    }
}
