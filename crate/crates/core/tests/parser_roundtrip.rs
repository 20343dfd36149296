mod common;

use common::*;
use proptest::prelude::*;

use invbv::bv::{BitVec, Width};
use invbv::smtlib::{parse_script, print_script, ParseErrorKind, Script};
use invbv::term::{Interpretation, TermManager};

fn generated_script(p: &QProblem, extra: &F, quantify: bool) -> (TermManager, Script) {
    let wd = Width::new(p.width).unwrap();
    let mut tm = TermManager::new();
    let xs = declare(&mut tm, "x", p.nu, wd);
    let ys = declare(&mut tm, "y", p.nf, wd);
    let vars: Vec<_> = xs.iter().chain(&ys).copied().collect();
    let m = build_f(&mut tm, &p.matrix, &vars, wd);
    let mut assertions = Vec::new();
    if quantify {
        assertions.push(tm.forall(xs.clone(), m));
    } else {
        assertions.push(m);
    }
    // a second assertion over the free constants only, when there are some
    if p.nf > 0 {
        let shifted: Vec<_> = (0..3).map(|i| ys[i % p.nf]).collect();
        assertions.push(build_f(&mut tm, extra, &shifted, wd));
    }
    let declarations = if quantify { ys } else { vars };
    let script = Script {
        logic: Some(if quantify { "BV" } else { "QF_BV" }.to_string()),
        status: None,
        declarations,
        assertions,
        check_sat: true,
    };
    (tm, script)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn print_parse_print_is_identity(
        p in arb_qproblem(3, 8),
        extra in arb_formula(3, 6),
        quantify in any::<bool>(),
        vals in prop::collection::vec(0u64..8, 4),
    ) {
        let (tm, script) = generated_script(&p, &extra, quantify);
        let text = print_script(&tm, &script);
        let mut tm2 = TermManager::new();
        let parsed = parse_script(&mut tm2, &text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(print_script(&tm2, &parsed), text.clone());
        prop_assert_eq!(parsed.assertions.len(), script.assertions.len());

        // same meaning under a shared assignment of the declared constants
        let wd = Width::new(p.width).unwrap();
        let (mut e1, mut e2) = (Interpretation::new(), Interpretation::new());
        for (i, (a, b)) in script.declarations.iter().zip(&parsed.declarations).enumerate() {
            let v = BitVec::truncating(wd, vals[i % vals.len()]);
            e1.set_bv(*a, v);
            e2.set_bv(*b, v);
        }
        for (a, b) in script.assertions.iter().zip(&parsed.assertions) {
            prop_assert_eq!(tm.evaluate(*a, &e1).unwrap(), tm2.evaluate(*b, &e2).unwrap());
        }
    }
}

#[test]
fn sugar_parses_to_core_terms() {
    let text = "(set-logic QF_BV)
        (declare-const a (_ BitVec 8))
        (declare-fun b () (_ BitVec 8))
        (assert (let ((c (bvsub a b))) (= c (_ bv5 8))))
        (assert (bvuge a #x10))
        (assert (distinct b #b00000001))
        (check-sat)
        (exit)";
    let mut tm = TermManager::new();
    let sc = parse_script(&mut tm, text).unwrap();
    assert_eq!(sc.declarations.len(), 2);
    assert_eq!(sc.assertions.len(), 3);
    assert!(sc.check_sat);
    let wd = Width::new(8).unwrap();
    let mut env = Interpretation::new();
    env.set_bv(sc.declarations[0], BitVec::truncating(wd, 0x20));
    env.set_bv(sc.declarations[1], BitVec::truncating(wd, 0x1b));
    for a in &sc.assertions {
        assert_eq!(tm.evaluate(*a, &env).unwrap(), invbv::term::Value::Bool(true));
    }
}

#[test]
fn diagnostics_carry_positions() {
    let cases = [
        ("(declare-fun f ((_ BitVec 4)) (_ BitVec 4))", ParseErrorKind::Unsupported, 1),
        ("(set-logic QF_BV)\n(assert (bvadd x #x1))", ParseErrorKind::UnknownSymbol, 2),
        ("(declare-const a (_ BitVec 65))", ParseErrorKind::Unsupported, 1),
        ("(declare-const a (_ BitVec 4))\n\n(assert a)", ParseErrorKind::Sort, 3),
        ("(assert (= #x1 #x2)", ParseErrorKind::Syntax, 1),
        ("(push 1)", ParseErrorKind::Unsupported, 1),
    ];
    for (text, kind, line) in cases {
        let mut tm = TermManager::new();
        let e = parse_script(&mut tm, text).unwrap_err();
        assert_eq!(e.kind, kind, "{text}: {e}");
        assert_eq!(e.pos.line, line, "{text}: {e}");
    }
}
