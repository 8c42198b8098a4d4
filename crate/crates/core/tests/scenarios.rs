use std::path::Path;

use ncval_qrf::config::ScenarioConfig;
use ncval_qrf::runner;

fn load(name: &str) -> ScenarioConfig {
    ScenarioConfig::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)).unwrap()
}

#[test]
fn qubit_configs_pass() {
    for name in ["qubit_a_prime.json", "qubit_b_prime.json"] {
        let r = runner::run(&load(name)).unwrap();
        assert!(r.all_pass(), "{name}: {:?}", r.failures());
        assert!(r.ranks.iter().all(|k| k.rank == k.expected), "{name}");
    }
}

#[test]
fn grid_config_passes() {
    let r = runner::run(&load("grid_a.json")).unwrap();
    assert_eq!(r.scenario_id, "grid-a");
    assert!(r.all_pass(), "{:?}", r.failures());
}

#[test]
fn appendix_config_fails_only_on_the_folded_momentum_relation() {
    let r = runner::run(&load("grid_appendix.json")).unwrap();
    let failing: Vec<&str> = r.failures().iter().map(|c| c.name.as_str()).collect();
    assert_eq!(failing, ["momentum.p_A.final=-p_B-p_C.initial", "momentum.sum_rule.f"]);
    assert!(r.check("momentum.p_C.final=p_C.initial").unwrap().pass);
}
