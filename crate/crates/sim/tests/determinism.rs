use coachd_sim::{run_field_experiment_replica, ExperimentConfig, VotingSimConfig};

fn small_voting(seed: u64) -> VotingSimConfig {
    serde_json::from_value(serde_json::json!({
        "workers": [{"count": 20, "discernment": 0.8}],
        "snippets": [{"count": 4, "latent_quality": 0.9}, {"count": 12, "latent_quality": 0.1}],
        "rounds": 300,
        "seed": seed
    }))
    .unwrap()
}

#[test]
fn voting_sim_is_reproducible_per_seed() {
    let a = small_voting(11).run().unwrap();
    assert_eq!(a, small_voting(11).run().unwrap());
    assert!((0.0..=1.0).contains(&a.precision_at_4));
    assert!((-1.0..=1.0).contains(&a.kendall_tau));
    let runs: Vec<_> = (0..5).map(|s| small_voting(s).run().unwrap().kendall_tau).collect();
    assert!(runs.windows(2).any(|w| w[0] != w[1]));
}

#[test]
fn experiment_is_reproducible_and_config_round_trips() {
    let config = ExperimentConfig::default().with_seed(42);
    let json = serde_json::to_string(&config).unwrap();
    let parsed: ExperimentConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, config);
    let a = run_field_experiment_replica(&config).unwrap();
    assert_eq!(a, run_field_experiment_replica(&parsed).unwrap());
    assert_ne!(a.data, run_field_experiment_replica(&config.with_seed(43)).unwrap().data);
    let sizes: Vec<usize> = a.data.iter().map(|c| c.completed.len()).collect();
    assert_eq!(sizes, [26, 26, 25]);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut config = ExperimentConfig::default();
    config.conditions[0].completed = 31;
    assert!(run_field_experiment_replica(&config).is_err());
    let bad: Result<VotingSimConfig, _> = serde_json::from_str(r#"{"workers": [], "snippets": []}"#);
    assert!(bad.unwrap().run().is_err());
}
