use lore_core::config::{detect_lore_repo, load_config, Evidence, LoreConfig, DEFAULT_DETECT_WINDOW};
use lore_testkit::{FixtureRepo, TOKEN_REFRESH_MESSAGE};

#[test]
fn defaults_when_absent() {
    let fx = FixtureRepo::new();
    let loaded = load_config(fx.path()).unwrap();
    assert_eq!(loaded.config, LoreConfig::default());
}

#[test]
fn reads_repository_file() {
    let fx = FixtureRepo::new();
    fx.write(".lore", "# policy\nstale_older_than = 90d\n");
    let loaded = load_config(fx.path()).unwrap();
    assert_eq!(loaded.config.stale_older_than_default.total_days(), 90);
    assert_eq!(load_config(fx.path()).unwrap(), loaded);

    fx.write(".lore", "stale_older_than = soon\n");
    let err = load_config(fx.path()).unwrap_err();
    assert_eq!(err.code(), "bad-config");
    assert!(err.to_string().contains("line 1"));
}

#[test]
fn detects_config_file() {
    let fx = FixtureRepo::new();
    fx.write(".lore", "");
    let d = detect_lore_repo(&fx.repo(), DEFAULT_DETECT_WINDOW).unwrap();
    assert!(d.is_lore);
    assert_eq!(d.evidence, Some(Evidence::ConfigFile));
}

#[test]
fn detects_history() {
    let mut fx = FixtureRepo::new();
    fx.commit("fix: before");
    let hash = fx.commit(TOKEN_REFRESH_MESSAGE);
    fx.commit("fix: after");
    let d = detect_lore_repo(&fx.repo(), DEFAULT_DETECT_WINDOW).unwrap();
    assert_eq!(d.evidence, Some(Evidence::History { hash }));
}

#[test]
fn conventional_repository_is_not_lore() {
    let mut fx = FixtureRepo::new();
    for i in 0..50 {
        let msg = format!("feat(core): change {i}\n\nLonger explanation.\n\nRefs: #{i}\n");
        // Every message is a plain commit by the per-message oracle.
        assert!(!lore_core::parse_message(&msg).atom.unwrap().has_lore_trailers());
        fx.commit(&msg);
    }
    let d = detect_lore_repo(&fx.repo(), DEFAULT_DETECT_WINDOW).unwrap();
    assert!(!d.is_lore);
    assert_eq!(d.evidence, None);
}

#[test]
fn detection_window_is_respected() {
    let mut fx = FixtureRepo::new();
    fx.commit(TOKEN_REFRESH_MESSAGE);
    for i in 0..5 {
        fx.commit(&format!("fix: {i}"));
    }
    assert!(!detect_lore_repo(&fx.repo(), 5).unwrap().is_lore);
    assert!(detect_lore_repo(&fx.repo(), 6).unwrap().is_lore);
}
