use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use kgraph_link::{
    conceptnet_relations, dbpedia_annotate, Client, Endpoint, HttpResponse, LinkError, RetryPolicy, TokenBucket,
    Transport, TransportError,
};

fn fixtures() -> Endpoint {
    Endpoint::Fixture(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"))
}

type Query = Vec<(String, String)>;

/// Replays scripted responses and counts calls; errors once the script runs out.
#[derive(Clone, Default)]
struct Scripted {
    calls: Arc<AtomicUsize>,
    script: Arc<Mutex<Vec<Result<HttpResponse, TransportError>>>>,
    seen: Arc<Mutex<Vec<Query>>>,
}

impl Scripted {
    fn new(mut script: Vec<Result<HttpResponse, TransportError>>) -> Self {
        script.reverse();
        Scripted { script: Arc::new(Mutex::new(script)), ..Default::default() }
    }

    fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Transport for Scripted {
    fn get(&self, _url: &str, query: &[(&str, &str)], _accept: &str) -> Result<HttpResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.seen.lock().unwrap().push(query.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect());
        self.script.lock().unwrap().pop().unwrap_or_else(|| Err(TransportError("network access in test".into())))
    }
}

fn client(t: &Scripted) -> Client {
    Client::new(Box::new(t.clone()))
        .with_retry(RetryPolicy { attempts: 3, backoff: Duration::ZERO })
        .with_limiter(TokenBucket::new(1e6, 1e6))
}

fn live() -> Endpoint {
    Endpoint::Live("http://service.invalid/api".into())
}

#[test]
fn fixture_mode_never_calls_the_transport() {
    let t = Scripted::default();
    let c = client(&t);
    let a = dbpedia_annotate(&c, "Berlin is the capital of Germany.", 0.5, &fixtures()).unwrap();
    let uris: Vec<&str> = a.iter().map(|x| x.uri.as_str()).collect();
    assert_eq!(uris, ["http://dbpedia.org/resource/Berlin", "http://dbpedia.org/resource/Germany"]);
    assert_eq!(a.iter().map(|x| x.offset).collect::<Vec<_>>(), [0, 25]);
    assert!(a.iter().all(|x| x.confidence_used == 0.5));
    assert!(dbpedia_annotate(&c, "the quick brown fox", 0.5, &fixtures()).unwrap().is_empty());
    assert_eq!(conceptnet_relations(&c, "dog", "animal", &fixtures()).unwrap(), ["IsA", "RelatedTo"]);
    assert_eq!(conceptnet_relations(&c, " Egypt", "Nile ", &fixtures()).unwrap(), ["RelatedTo", "AtLocation"]);
    assert!(conceptnet_relations(&c, "xylophone", "democracy", &fixtures()).unwrap().is_empty());
    assert_eq!(t.calls(), 0);
}

#[test]
fn offline_client_in_fixture_mode() {
    let c = Client::offline();
    assert_eq!(dbpedia_annotate(&c, "Marie Curie discovered radium.", 0.5, &fixtures()).unwrap().len(), 2);
    assert!(matches!(
        dbpedia_annotate(&c, "Marie Curie discovered radium.", 0.5, &live()),
        Err(LinkError::Network { attempts: 3, .. })
    ));
}

#[test]
fn missing_fixture() {
    let t = Scripted::default();
    let err = dbpedia_annotate(&client(&t), "never recorded", 0.5, &fixtures()).unwrap_err();
    assert!(matches!(err, LinkError::FixtureMissing(_)));
    assert!(matches!(
        dbpedia_annotate(&client(&t), "Berlin is the capital of Germany.", 0.4, &fixtures()),
        Err(LinkError::FixtureMissing(_))
    ));
    assert_eq!(t.calls(), 0);
}

#[test]
fn preconditions_fail_before_io() {
    let t = Scripted::default();
    let c = client(&t);
    for conf in [1.5, -0.1, f64::NAN] {
        assert!(matches!(dbpedia_annotate(&c, "x", conf, &live()), Err(LinkError::InvalidConfidence(_))));
        assert!(matches!(dbpedia_annotate(&c, "x", conf, &fixtures()), Err(LinkError::InvalidConfidence(_))));
    }
    assert!(matches!(conceptnet_relations(&c, "", "dog", &live()), Err(LinkError::EmptyConcept)));
    assert!(matches!(conceptnet_relations(&c, "dog", " \t", &live()), Err(LinkError::EmptyConcept)));
    assert_eq!(t.calls(), 0);
}

#[test]
fn server_errors_are_retried_then_reported() {
    let t = Scripted::new(vec![
        Ok(HttpResponse { status: 500, body: String::new() }),
        Ok(HttpResponse { status: 500, body: String::new() }),
        Ok(HttpResponse { status: 500, body: String::new() }),
        Ok(HttpResponse::ok(r#"{"edges":[]}"#)),
    ]);
    let err = conceptnet_relations(&client(&t), "dog", "animal", &live()).unwrap_err();
    assert!(matches!(err, LinkError::Network { attempts: 3, .. }), "{err}");
    assert_eq!(t.calls(), 3);
}

#[test]
fn transient_failure_recovers() {
    let t = Scripted::new(vec![
        Err(TransportError("connection reset".into())),
        Ok(HttpResponse { status: 503, body: String::new() }),
        Ok(HttpResponse::ok(r#"{"edges":[{"rel":{"label":"IsA"}}]}"#)),
    ]);
    assert_eq!(conceptnet_relations(&client(&t), "dog", "animal", &live()).unwrap(), ["IsA"]);
    assert_eq!(t.calls(), 3);
    let q = &t.seen.lock().unwrap()[0];
    assert_eq!(q, &[("node".to_string(), "/c/en/dog".to_string()), ("other".to_string(), "/c/en/animal".to_string())]);
}

#[test]
fn client_errors_are_not_retried() {
    let t = Scripted::new(vec![Ok(HttpResponse { status: 404, body: String::new() })]);
    let err = dbpedia_annotate(&client(&t), "x", 0.5, &live()).unwrap_err();
    assert!(matches!(err, LinkError::Network { attempts: 1, .. }));
    assert_eq!(t.calls(), 1);
}

#[test]
fn malformed_live_body() {
    let t = Scripted::new(vec![Ok(HttpResponse::ok("<html>busy</html>"))]);
    assert!(matches!(dbpedia_annotate(&client(&t), "x", 0.5, &live()), Err(LinkError::MalformedResponse(_))));
}

#[test]
fn recorded_response_replays_identically() {
    let dir = std::env::temp_dir().join(format!("kgraph-link-record-{}", std::process::id()));
    let body = r#"{"Resources":[{"@URI":"http://dbpedia.org/resource/Rome","@surfaceForm":"Rome","@offset":"0"}]}"#;
    let t = Scripted::new(vec![Ok(HttpResponse::ok(body))]);
    let c = client(&t).recording_to(&dir);
    let live_out = dbpedia_annotate(&c, "Rome is old.", 0.25, &live()).unwrap();
    let sent = t.seen.lock().unwrap()[0].clone();
    assert_eq!(
        sent,
        [("text".to_string(), "Rome is old.".to_string()), ("confidence".to_string(), "0.25".to_string())]
    );
    let replay = dbpedia_annotate(&Client::offline(), "Rome is old.", 0.25, &Endpoint::Fixture(dir.clone())).unwrap();
    assert_eq!(live_out, replay);
    std::fs::remove_dir_all(dir).unwrap();
}
