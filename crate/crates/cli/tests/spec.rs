use serde_json::{json, Value};

use locc_trace_cli::spec::{parse_assignment, Params};
use locc_trace_cli::{Command, Overrides, RunSpec};

fn spec_with(params: &[(&str, Value)]) -> RunSpec {
    let overrides =
        Overrides { params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(), ..Overrides::default() };
    RunSpec::build(Command::Trace, None, overrides).unwrap()
}

#[test]
fn assignments_parse_json_or_fall_back_to_strings() {
    assert_eq!(parse_assignment("eps=0.1").unwrap(), ("eps".into(), json!(0.1)));
    assert_eq!(parse_assignment("dims=[2,4]").unwrap(), ("dims".into(), json!([2, 4])));
    assert_eq!(parse_assignment("f=power:0.5").unwrap(), ("f".into(), json!("power:0.5")));
    assert_eq!(parse_assignment("a = x.json").unwrap(), ("a".into(), json!("x.json")));
    assert!(parse_assignment("novalue").is_err());
    assert!(parse_assignment("=3").is_err());
}

#[test]
fn command_names_round_trip() {
    for c in Command::ALL {
        assert_eq!(c.name().parse::<Command>().unwrap(), c);
    }
    assert!("solve".parse::<Command>().is_err());
}

#[test]
fn defaults_and_echo() {
    let s = spec_with(&[("eps", json!(0.2))]);
    assert_eq!(s.seed, 42);
    assert_eq!(s.echo(), json!({"command": "trace", "seed": 42, "params": {"eps": 0.2}}));
}

#[test]
fn params_validate_types_and_track_usage() {
    let s = spec_with(&[("eps", json!("0.25")), ("N", json!(10)), ("flag", json!(true)), ("extra", json!(1))]);
    let p = Params::new(&s);
    assert_eq!(p.f64_or("eps", 0.1).unwrap(), 0.25);
    assert_eq!(p.positive_usize("N").unwrap(), Some(10));
    assert!(p.bool_or("flag", false).unwrap());
    assert_eq!(p.f64_or("missing", 3.0).unwrap(), 3.0);
    let err = p.finish().unwrap_err();
    assert!(err.to_string().contains("'extra'"), "{err}");

    let s = spec_with(&[("N", json!(0)), ("m", json!(-3)), ("eps", json!([1]))]);
    let p = Params::new(&s);
    assert!(p.positive_usize("N").unwrap_err().to_string().contains("'N'"));
    assert!(p.positive_usize("m").is_err());
    assert!(p.opt_f64("eps").is_err());
}

#[test]
fn usize_lists() {
    let s = spec_with(&[("dims", json!([2, 4])), ("one", json!(8)), ("bad", json!([2, 0]))]);
    let p = Params::new(&s);
    assert_eq!(p.usize_list("dims", &[]).unwrap(), vec![2, 4]);
    assert_eq!(p.usize_list("one", &[]).unwrap(), vec![8]);
    assert_eq!(p.usize_list("none", &[1]).unwrap(), vec![1]);
    assert!(p.usize_list("bad", &[]).is_err());
}
