use std::path::Path;

use evsearch::service::Config;

fn remote_config() -> Config {
    let bin = env!("CARGO_BIN_EXE_evsearch");
    let src = format!(
        r#"
[providers]
scorers = "remote"
tokenizer = "remote"
embeddings = "remote"
translation = "remote"
cac = "remote"

[remote]
command = ["{bin}", "serve-provider"]
"#
    );
    Config::parse(&src, Path::new(".")).unwrap()
}

#[test]
fn remote_providers_reproduce_local_results() {
    let local = Config::default().build().unwrap().pipeline;
    let remote = remote_config().build().unwrap().pipeline;
    let docs = [
        ("pl", "pl", "UE wycofuje się z kupowania rosyjskiej ropy."),
        ("en", "en", "A cholera outbreak spread in Tehran last month. Police arrested students."),
        ("es", "es", "Miles de personas protestaron en Hanoi contra la inflación."),
    ];
    for (id, lang, text) in docs {
        let mut a = local.extract(id, lang, text).unwrap();
        let mut b = remote.extract(id, lang, text).unwrap();
        local.translate(&mut a);
        remote.translate(&mut b);
        assert_eq!(a.sentences, b.sentences, "{id}");
        assert_eq!(a.graph, b.graph, "{id}");
        assert_eq!(a.translation_status, b.translation_status);
    }
    let ids = remote.providers.ids();
    assert!(ids.values().all(|v| v.contains("remote")), "{ids:?}");
}

#[test]
fn failing_remote_command_is_a_provider_error() {
    let src = r#"
[providers]
scorers = "remote"

[remote]
command = ["false"]
"#;
    let cfg = Config::parse(src, Path::new(".")).unwrap();
    match cfg.build() {
        Err(e) => assert!(matches!(e, evsearch::Error::Provider { .. } | evsearch::Error::Io { .. }), "{e}"),
        Ok(parts) => {
            let err = parts.pipeline.extract("d", "en", "Students protested.").unwrap_err();
            assert!(matches!(err, evsearch::Error::Provider { .. }), "{err}");
        }
    }
}
