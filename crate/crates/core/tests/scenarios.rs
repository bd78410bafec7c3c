use mlwb::acceptance::SCENARIOS;
use mlwb::pipeline::{parse_scenario, run_pipeline};
use mlwb::Error;

#[test]
fn bundled_scenarios_reach_their_expected_status() {
    for (name, text) in SCENARIOS {
        let s = parse_scenario(name, text).unwrap();
        let r = run_pipeline(&s).unwrap();
        let want = if name == "one_world" { "valid-at-root-agreed" } else { "refutation-reproduced" };
        assert_eq!(r.status(), want, "{name}:\n{r}");
        assert!(r.morphisms_verified(), "{name}");
        assert_eq!(r.to_string(), run_pipeline(&s).unwrap().to_string(), "{name} is not deterministic");
    }
}

#[test]
fn transitive_scenario_closes_its_frame() {
    let (name, text) = SCENARIOS[1];
    let s = parse_scenario(name, text).unwrap();
    let closed = s.closed_frame();
    assert!(closed.is_transitive());
    assert!(closed.edge_count() > s.skeleton.edge_count());
}

#[test]
fn too_many_new_elements_exhaust_the_alphabet() {
    let many: Vec<String> = (0..40).map(|i| format!("e{i}")).collect();
    let text = SCENARIOS[0].1.replace("domain v = {d,e}", &format!("domain v = {{d,{}}}", many.join(",")));
    let s = parse_scenario("crowded", &text).unwrap();
    assert!(matches!(run_pipeline(&s), Err(Error::AlphabetTooSmall { needed: 40, .. })));
}
