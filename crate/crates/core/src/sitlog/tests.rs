use super::*;
use crate::term::{parse_clauses, parse_term};

const DUMMY: &str = include_str!("../../data/dummy/dummy.sitlog");
const GOLDEN: &str = include_str!("../../data/dummy/dummy.golden");

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn script(s: &str) -> Vec<Term> {
    t(s).as_list().unwrap().to_vec()
}

fn run_dummy() -> RunOutcome {
    let program = Program::load(DUMMY).unwrap();
    let mut engine = Engine::with_functions(&program, dummy_functions());
    let mut io = EchoingSpeech::new(script("[day(tuesday), loop, tuesday, day(monday), finish]"));
    engine.run(t("tuesday"), &mut io).unwrap()
}

#[test]
fn dummy_program_reproduces_golden_trace() {
    let out = run_dummy();
    assert_eq!(out.out_arg, t("monday"));
    assert_eq!(format_trace(&out), GOLDEN);
    assert!(out.warnings.is_empty());
}

#[test]
fn trace_is_deterministic() {
    assert_eq!(format_trace(&run_dummy()), format_trace(&run_dummy()));
}

#[test]
fn validation_rejects_malformed_programs() {
    let cases = [
        "diag_mod(other, [[id==>is,type==>neutral,arcs==>[empty:empty=>fs]],[id==>fs,type==>final]], []).",
        "diag_mod(main, [[id==>fs,type==>final]], []).",
        "diag_mod(main, [[id==>is,type==>neutral,arcs==>[empty:empty=>is]]], []).",
        "diag_mod(main, [[id==>is,type==>recursive,embedded_dm==>nope,arcs==>[fs:empty=>fs]],[id==>fs,type==>final]], []).",
        "diag_mod(main, [[id==>is,type==>neutral,colour==>red,arcs==>[]],[id==>fs,type==>final]], []).",
        "diag_mod(main, [[id==>is,type==>neutral]],[id==>fs,type==>final]], []).",
        "diag_mod(main, [[id==>is,type==>neutral,arcs==>[empty:empty=>fs]],[id==>fs,type==>final,arcs==>[empty:empty=>fs]]], []).",
    ];
    for c in cases {
        assert!(Program::load(c).is_err(), "{c}");
    }
}

const COUNTER: &str = "
G = [hits ==> 0].
diag_mod(main,
 [[id ==> is, type ==> listen, in_arg ==> N, out_arg ==> N,
   arcs ==> [stop:say(done) => fs, tick:[inc(hits, H)] => is, [get(n, K)]:empty => fs]],
  [id ==> fs, type ==> final]],
 [n ==> 7]).
";

#[test]
fn globals_persist_and_locals_reset() {
    let program = Program::load(COUNTER).unwrap();
    let mut engine = Engine::new(&program);
    let out = engine.run(t("a"), &mut ScriptedInput::new(script("[tick, tick, stop]"))).unwrap();
    assert_eq!(out.globals["hits"], t("2"));
    assert_eq!(out.out_arg, t("a"));
    let out = engine.run(t("b"), &mut ScriptedInput::new(script("[tick, 7]"))).unwrap();
    assert_eq!(out.globals["hits"], t("3"));
    assert_eq!(out.history.len(), 3);
    assert_eq!(out.history[1].expectation, t("[7]"));
}

#[test]
fn unmatched_input_is_an_error_unless_empty_arc() {
    let program = Program::load(COUNTER).unwrap();
    let mut engine = Engine::new(&program);
    let err = engine.run(t("a"), &mut ScriptedInput::new(script("[banana]"))).unwrap_err();
    assert!(matches!(err, EngineError::NoMatch { .. }));
    let err = engine.run(t("a"), &mut ScriptedInput::new(vec![])).unwrap_err();
    assert!(matches!(err, EngineError::ScriptExhausted { .. }));

    let fallback = Program::load(
        "diag_mod(main, [[id==>is,type==>listen,arcs==>[yes:empty=>is,empty:say(what)=>fs]],[id==>fs,type==>final]], []).",
    )
    .unwrap();
    let mut io = ScriptedInput::new(script("[yes, banana]"));
    let out = Engine::new(&fallback).run(t("x"), &mut io).unwrap();
    assert_eq!(io.performed, vec![t("say(what)")]);
    assert_eq!(out.history.len(), 3);
}

#[test]
fn pipe_mismatch_and_unknown_function() {
    let p = Program::load(
        "diag_mod(main, [[id==>is,type==>neutral,in_arg==>ready,arcs==>[empty:empty=>fs]],[id==>fs,type==>final]], []).",
    )
    .unwrap();
    let err = Engine::new(&p).run(t("late"), &mut ScriptedInput::default()).unwrap_err();
    assert!(matches!(err, EngineError::PipeMismatch { .. }));

    let p = Program::load(
        "diag_mod(main, [[id==>is,type==>neutral,arcs==>[empty:apply(nope,[])=>fs]],[id==>fs,type==>final]], []).",
    )
    .unwrap();
    let err = Engine::new(&p).run(t("x"), &mut ScriptedInput::default()).unwrap_err();
    assert!(matches!(err, EngineError::UnknownFunction(_)));
}

#[test]
fn parameterised_models_and_functional_next() {
    let text = "
diag_mod(main,
 [[id==>is,type==>neutral,arcs==>[empty:empty=>apply(pick,[])]],
  [id==>go,type==>recursive,embedded_dm==>greet(bob),arcs==>[done(N):shout(N)=>fs]],
  [id==>fs,type==>final]], []).
diag_mod(greet(Who),
 [[id==>is,type==>neutral,arcs==>[empty:hello(Who)=>done(Who)]],
  [id==>done(_),type==>final]], []).
";
    let program = Program::load(text).unwrap();
    let mut engine = Engine::new(&program);
    engine.functions.register("pick", |_: &[Term], _: &mut FnCtx<'_>| Ok(Term::sym("go")));
    let mut io = ScriptedInput::default();
    let out = engine.run(t("p"), &mut io).unwrap();
    assert_eq!(io.performed, vec![t("hello(bob)"), t("shout(bob)")]);
    assert_eq!(out.history.iter().map(|h| h.depth).collect::<Vec<_>>(), [0, 1, 1, 0, 0]);
}

#[test]
fn expectation_matching_prefers_textual_order() {
    let exps = parse_clauses("a. X. [b].").unwrap();
    assert_eq!(match_expectation(&exps, &t("a")).unwrap().0, 0);
    assert_eq!(match_expectation(&exps, &t("b")).unwrap().0, 1);
    assert_eq!(match_expectation(&[t("empty"), t("[b]")], &t("b")).unwrap().0, 1);
    assert!(match_expectation(&[t("empty")], &t("empty")).is_none());
}

#[test]
fn non_selected_expectation_writes_are_discarded() {
    let p = Program::load(
        "diag_mod(main, [[id==>is,type==>listen,arcs==>[[set(x,1),a]:empty=>fs, b:empty=>fs]],[id==>fs,type==>final]], [x==>0]).",
    )
    .unwrap();
    let out = Engine::new(&p).run(t("x"), &mut ScriptedInput::new(script("[b]"))).unwrap();
    assert_eq!(out.warnings.len(), 1);
}
