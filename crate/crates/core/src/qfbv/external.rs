//! Client for an external SMT-LIB 2 solver process.

use std::io::Write;
use std::process::{Command, Stdio};

use super::GroundVerdict;
use crate::bv::BitVec;
use crate::smtlib::parse_bv_literal;
use crate::smtlib::sexp;
use crate::term::{Interpretation, SmtPrinter, Sort, TermId, TermManager, Value, VarId};

/// The query sent to the external solver.
pub fn external_query(tm: &TermManager, phi: TermId) -> String {
    let p = SmtPrinter::new(tm);
    let mut out = String::from("(set-logic QF_BV)\n");
    for &v in tm.free_vars(phi) {
        out.push_str(&format!("(declare-const {} {})\n", p.var(v), tm.var_sort(v)));
    }
    out.push_str(&format!("(assert {})\n(check-sat)\n(get-model)\n", p.term_shared(phi)));
    out
}

pub fn external_check(tm: &TermManager, phi: TermId, command: &[String]) -> GroundVerdict {
    let Some((prog, args)) = command.split_first() else {
        return GroundVerdict::ResourceOut("empty solver command".into());
    };
    let query = external_query(tm, phi);
    let child =
        Command::new(prog).args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn();
    let mut child = match child {
        Ok(c) => c,
        Err(e) => return GroundVerdict::ResourceOut(format!("cannot start {prog}: {e}")),
    };
    if let Some(mut stdin) = child.stdin.take() {
        if let Err(e) = stdin.write_all(query.as_bytes()) {
            return GroundVerdict::ResourceOut(format!("writing to {prog}: {e}"));
        }
    }
    let out = match child.wait_with_output() {
        Ok(o) => o,
        Err(e) => return GroundVerdict::ResourceOut(format!("waiting for {prog}: {e}")),
    };
    parse_response(tm, tm.free_vars(phi), &String::from_utf8_lossy(&out.stdout))
}

/// Interprets a `check-sat` answer optionally followed by a `get-model`
/// response. Variables missing from the model default to zero / false.
pub fn parse_response(tm: &TermManager, vars: &[VarId], text: &str) -> GroundVerdict {
    let exprs = match sexp::parse_all(text) {
        Ok(e) => e,
        Err(e) => return GroundVerdict::ResourceOut(format!("malformed response: {e}")),
    };
    let Some(first) = exprs.first() else {
        return GroundVerdict::ResourceOut("empty response".into());
    };
    match first.as_atom() {
        Some("unsat") => return GroundVerdict::Unsat,
        Some("sat") => {}
        Some("unknown") => return GroundVerdict::ResourceOut("solver answered unknown".into()),
        _ => return GroundVerdict::ResourceOut(format!("unexpected answer: {first}")),
    }
    let mut model = Interpretation::new();
    for &v in vars {
        match tm.var_sort(v) {
            Sort::Bool => model.set(v, Value::Bool(false)),
            Sort::Bv(w) => model.set_bv(v, BitVec::zero(w)),
        }
    }
    let Some(body) = exprs.get(1).and_then(|e| e.as_list()) else {
        return GroundVerdict::Sat(model);
    };
    let defs = match body.first().and_then(|e| e.as_atom()) {
        Some("model") => &body[1..],
        _ => body,
    };
    for d in defs {
        let items = match d.as_list() {
            Some(l) if l.len() == 5 && l[0].as_atom() == Some("define-fun") => l,
            _ => return GroundVerdict::ResourceOut(format!("unexpected model entry: {d}")),
        };
        let Some(name) = items[1].as_symbol() else {
            return GroundVerdict::ResourceOut(format!("bad name in {d}"));
        };
        let Some(&v) = vars.iter().find(|v| tm.var_name(**v) == name) else {
            continue; // solver-internal symbol
        };
        let val = match (tm.var_sort(v), items[4].as_atom()) {
            (Sort::Bool, Some("true")) => Value::Bool(true),
            (Sort::Bool, Some("false")) => Value::Bool(false),
            (Sort::Bv(w), _) => match parse_bv_literal(&items[4]) {
                Some(c) if c.width() == w => Value::Bv(c),
                _ => return GroundVerdict::ResourceOut(format!("bad value for {name}: {}", items[4])),
            },
            _ => return GroundVerdict::ResourceOut(format!("bad value for {name}: {}", items[4])),
        };
        model.set(v, val);
    }
    GroundVerdict::Sat(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::Width;

    #[test]
    fn responses() {
        let mut tm = TermManager::new();
        let a = tm.new_var("a", Sort::bv(4));
        let vars = [a];
        let r = parse_response(&tm, &vars, "sat\n((define-fun a () (_ BitVec 4) #x3))\n");
        let expect = BitVec::new(Width::new(4).unwrap(), 3).unwrap();
        match r {
            GroundVerdict::Sat(m) => assert_eq!(m.get_bv(a), Some(expect)),
            v => panic!("{v:?}"),
        }
        let r = parse_response(&tm, &vars, "sat\n(model (define-fun a () (_ BitVec 4) (_ bv3 4)))");
        assert!(matches!(r, GroundVerdict::Sat(m) if m.get_bv(a) == Some(expect)));
        assert_eq!(parse_response(&tm, &vars, "unsat\n"), GroundVerdict::Unsat);
        assert!(matches!(parse_response(&tm, &vars, "sat\n((define-fun"), GroundVerdict::ResourceOut(_)));
        assert!(matches!(parse_response(&tm, &vars, "unknown"), GroundVerdict::ResourceOut(_)));
        assert!(matches!(parse_response(&tm, &vars, "(error \"x\")"), GroundVerdict::ResourceOut(_)));
    }

    #[test]
    fn query_shape() {
        let mut tm = TermManager::new();
        let a = tm.new_var("a", Sort::bv(4));
        let at = tm.var(a);
        let one = tm.one(Width::new(4).unwrap());
        let s = tm.add(at, one);
        let f = tm.ne(s, at);
        let q = external_query(&tm, f);
        assert!(q.starts_with("(set-logic QF_BV)\n(declare-const a (_ BitVec 4))\n(assert "));
        assert!(q.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn missing_solver() {
        let mut tm = TermManager::new();
        let t = tm.tru();
        let r = external_check(&tm, t, &["/nonexistent/solver".to_string()]);
        assert!(matches!(r, GroundVerdict::ResourceOut(_)));
    }
}
