use scriptlang::interp::run_source;
use scriptlang::{stdlib, ErrorKind, ExecLimits, ExecOutcome, ExecStatus, Position, Value};

fn run(src: &str) -> ExecOutcome {
    run_source(src, &stdlib::registry(), ExecLimits::default().with_seed(1))
}

fn ok(src: &str) -> ExecOutcome {
    let out = run(src);
    assert_eq!(out.status, ExecStatus::Ok, "{:?}", out.error);
    out
}

fn var(out: &ExecOutcome, name: &str) -> Value {
    out.workspace
        .get(name)
        .cloned()
        .unwrap_or_else(|| panic!("{name} missing"))
}

#[test]
fn concatenation_builds_vectors() {
    let out = ok("x = [1 2]; y = [x 3];");
    assert_eq!(var(&out, "y"), Value::Vector(vec![1.0, 2.0, 3.0]));
}

#[test]
fn undefined_identifier_reports_position() {
    let out = run("a = 1;\nz = w");
    assert_eq!(out.status, ExecStatus::ScriptError);
    let err = out.error.unwrap();
    assert_eq!(err.kind, ErrorKind::UndefinedIdentifier);
    assert_eq!(err.message, "undefined identifier 'w'");
    assert_eq!(err.pos, Some(Position::new(2, 5)));
    // partial workspace survives
    assert_eq!(out.workspace.get("a"), Some(&Value::Num(1.0)));
}

#[test]
fn one_based_indexing() {
    let out = ok("v = [10 20 30]; a = v(1); b = v(end); c = v(2:3);");
    assert_eq!(var(&out, "a"), Value::Num(10.0));
    assert_eq!(var(&out, "b"), Value::Num(30.0));
    assert_eq!(var(&out, "c"), Value::Vector(vec![20.0, 30.0]));
    for bad in [
        "v = [1 2 3]; x = v(0);",
        "v = [1 2 3]; x = v(4);",
        "v = [1 2 3]; x = v(1.5);",
    ] {
        let out = run(bad);
        assert_eq!(out.error.unwrap().kind, ErrorKind::Index, "{bad}");
    }
}

#[test]
fn indexed_assignment_grows_with_zeros() {
    let out = ok("v = []; v(3) = 7; w = [1 2]; w(end + 1) = 5; s = 'abc'; s(2) = 'x';");
    assert_eq!(var(&out, "v"), Value::Vector(vec![0.0, 0.0, 7.0]));
    assert_eq!(var(&out, "w"), Value::Vector(vec![1.0, 2.0, 5.0]));
    assert_eq!(var(&out, "s"), Value::Str("axc".into()));
}

#[test]
fn shape_mismatch_is_an_error() {
    let out = run("x = [1 2] + [1 2 3];");
    assert_eq!(out.error.unwrap().kind, ErrorKind::Shape);
}

#[test]
fn unknown_builtin_call() {
    let out = run("y = frobnicate(3);");
    let err = out.error.unwrap();
    assert_eq!(err.kind, ErrorKind::UnknownFunction);
    assert_eq!(err.pos, Some(Position::new(1, 5)));
}

#[test]
fn reserved_names_cannot_be_assigned() {
    for src in ["__x = 1;", "for __k = 1:3\nend", "[a, __b] = max(1, 2);", "__v(2) = 1;"] {
        let out = run(src);
        assert_eq!(out.error.unwrap().kind, ErrorKind::ReservedName, "{src}");
    }
}

#[test]
fn control_flow() {
    let out = ok("s = 0;\nfor k = 1:10\n if k == 3\n continue;\n elseif k > 5\n break;\n end\n s = s + k;\nend\nn = 0;\nwhile n < 4\n n = n + 1;\nend");
    assert_eq!(var(&out, "s"), Value::Num(1.0 + 2.0 + 4.0 + 5.0));
    assert_eq!(var(&out, "n"), Value::Num(4.0));
}

#[test]
fn strings_and_character_codes() {
    let out = ok("m = 'Hi!'; c = double(m); back = char(c); first = m(1); msg = ['A' 66 'C'];");
    assert_eq!(var(&out, "c"), Value::Vector(vec![72.0, 105.0, 33.0]));
    assert_eq!(var(&out, "back"), Value::Str("Hi!".into()));
    assert_eq!(var(&out, "first"), Value::Str("H".into()));
    assert_eq!(var(&out, "msg"), Value::Str("ABC".into()));
}

#[test]
fn unsuppressed_statements_echo() {
    let out = ok("x = 5\ny = [1 2];\n'hello'\ndisp('plain')");
    assert_eq!(out.printed, "x = 5\nans = 'hello'\nplain\n");
}

#[test]
fn plot_default_abscissa_and_figures() {
    let out = ok("plot([1 2 3])");
    assert_eq!(out.figures.len(), 1);
    assert_eq!(out.figures[0].curves[0].x, vec![1.0, 2.0, 3.0]);
    assert_eq!(out.figures[0].curves[0].y, vec![1.0, 2.0, 3.0]);

    let out = ok("a = [1 2]; b = [3 4 5]; figure(); plot(a); figure(); plot(b, 'b');");
    assert_eq!(out.figures.len(), 2);
    assert!(out.figures.iter().all(|f| f.curves.len() == 1));
    assert_eq!(out.figures[1].curves[0].label.as_deref(), Some("b"));
}

#[test]
fn plot_length_mismatch() {
    let out = run("plot([1 2], [1 2 3])");
    let err = out.error.unwrap();
    assert_eq!(err.kind, ErrorKind::Builtin);
    assert!(err.message.contains("length"), "{}", err.message);
}

#[test]
fn infinite_loop_hits_step_cap() {
    let limits = ExecLimits {
        max_steps: 10_000,
        ..ExecLimits::default()
    };
    let out = run_source("x = 0;\nwhile true\n x = x + 1;\nend", &stdlib::registry(), limits);
    assert_eq!(out.status, ExecStatus::ResourceExceeded);
    assert!(out.workspace.get("x").is_some());
}

#[test]
fn default_step_cap_stops_runaway_script() {
    let out = run("while true\nend");
    assert_eq!(out.status, ExecStatus::ResourceExceeded);
}

#[test]
fn vector_and_figure_caps() {
    let out = run("x = zeros(1, 2000000);");
    assert_eq!(out.status, ExecStatus::ResourceExceeded);
    let out = run("x = 1:1e12;");
    assert_eq!(out.status, ExecStatus::ResourceExceeded);
    let out = run("for k = 1:17\n figure;\nend");
    assert_eq!(out.status, ExecStatus::ResourceExceeded);
}

#[test]
fn division_by_zero_is_reported() {
    let out = run("x = 1 / 0;");
    assert_eq!(out.status, ExecStatus::ScriptError);
}

#[test]
fn record_builds_hidden_lists() {
    let out = ok("for k = 1:3\n record('out', k * [1 1]);\nend");
    match out.workspace.get("__rec_out") {
        Some(Value::List(items)) => assert_eq!(items.len(), 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn multi_output_and_mod() {
    let out = ok("m = mod(-1, 8); f = floor(7 / 2); e = xor([1 0 1], [1 1 0]);");
    assert_eq!(var(&out, "m"), Value::Num(7.0));
    assert_eq!(var(&out, "f"), Value::Num(3.0));
    assert_eq!(var(&out, "e"), Value::Vector(vec![0.0, 1.0, 1.0]));
}

#[test]
fn stepped_ranges() {
    let out = ok("a = 8:-1:5; b = 0:0.25:1; c = 5:1;");
    assert_eq!(var(&out, "a"), Value::Vector(vec![8.0, 7.0, 6.0, 5.0]));
    assert_eq!(var(&out, "b"), Value::Vector(vec![0.0, 0.25, 0.5, 0.75, 1.0]));
    assert_eq!(var(&out, "c"), Value::empty());
}
