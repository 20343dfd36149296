//! SMT-LIB 2 reader and writer for the quantified bit-vector fragment.

pub mod sexp;

use std::fmt::Write;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::bv::{BitVec, BvBinOp, BvUnOp, Relation, Width, MAX_WIDTH};
use crate::term::{Kind, SmtPrinter, Sort, TermError, TermId, TermManager, VarId};
pub use sexp::{Pos, SExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    /// Valid SMT-LIB outside the supported fragment.
    Unsupported,
    Sort,
    UnknownSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
    pub msg: String,
}

impl From<sexp::SyntaxError> for ParseError {
    fn from(e: sexp::SyntaxError) -> Self {
        ParseError { pos: e.pos, kind: ParseErrorKind::Syntax, msg: e.msg }
    }
}

/// A parsed benchmark: declarations, assertions and whether `check-sat`
/// was requested.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub logic: Option<String>,
    pub status: Option<String>,
    pub declarations: Vec<VarId>,
    pub assertions: Vec<TermId>,
    pub check_sat: bool,
}

fn err(pos: Pos, kind: ParseErrorKind, msg: impl Into<String>) -> ParseError {
    ParseError { pos, kind, msg: msg.into() }
}

/// Parses `#b..`, `#x..` and `(_ bvN w)` literals.
pub fn parse_bv_literal(e: &SExpr) -> Option<BitVec> {
    if let Some(a) = e.as_atom() {
        let (digits, radix, per) =
            if let Some(d) = a.strip_prefix("#b") { (d, 2, 1) } else { (a.strip_prefix("#x")?, 16, 4) };
        let w = Width::new(digits.len() as u32 * per).ok()?;
        let v = u64::from_str_radix(digits, radix).ok()?;
        return BitVec::new(w, v).ok();
    }
    let l = e.as_list()?;
    if l.len() != 3 || l[0].as_atom() != Some("_") {
        return None;
    }
    let v: u64 = l[1].as_atom()?.strip_prefix("bv")?.parse().ok()?;
    let w = Width::new(l[2].as_atom()?.parse().ok()?).ok()?;
    BitVec::new(w, v).ok()
}

struct Parser<'a> {
    tm: &'a mut TermManager,
    consts: FxHashMap<String, VarId>,
    scopes: Vec<Vec<(String, TermId)>>,
}

impl Parser<'_> {
    fn sort(&self, e: &SExpr) -> Result<Sort, ParseError> {
        if e.as_atom() == Some("Bool") {
            return Ok(Sort::Bool);
        }
        if let Some(l) = e.as_list() {
            if l.len() == 3 && l[0].as_atom() == Some("_") && l[1].as_atom() == Some("BitVec") {
                let n: u64 = l[2]
                    .as_atom()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| err(l[2].pos(), ParseErrorKind::Syntax, "expected a width"))?;
                if n == 0 || n > MAX_WIDTH as u64 {
                    return Err(err(
                        e.pos(),
                        ParseErrorKind::Unsupported,
                        format!("bit-vector width {n} outside 1..={MAX_WIDTH}"),
                    ));
                }
                return Ok(Sort::bv(n as u32));
            }
        }
        Err(err(e.pos(), ParseErrorKind::Unsupported, format!("unsupported sort {e}")))
    }

    fn lookup(&mut self, name: &str) -> Option<TermId> {
        for scope in self.scopes.iter().rev() {
            if let Some((_, t)) = scope.iter().rev().find(|(n, _)| n == name) {
                return Some(*t);
            }
        }
        let v = *self.consts.get(name)?;
        Some(self.tm.var(v))
    }

    fn mk(&mut self, kind: Kind, pos: Pos) -> Result<TermId, ParseError> {
        self.tm.mk(kind).map_err(|e| match e {
            TermError::Sort { .. } | TermError::Bv(_) => err(pos, ParseErrorKind::Sort, e.to_string()),
            TermError::EmptyBinder => err(pos, ParseErrorKind::Syntax, e.to_string()),
        })
    }

    fn binders(&mut self, e: &SExpr, bv_only: bool) -> Result<Vec<(String, VarId)>, ParseError> {
        let list = e
            .as_list()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| err(e.pos(), ParseErrorKind::Syntax, "expected a binder list"))?;
        let mut out = Vec::new();
        for b in list {
            let pair = b
                .as_list()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| err(b.pos(), ParseErrorKind::Syntax, "expected (name sort)"))?;
            let name =
                pair[0].as_symbol().ok_or_else(|| err(pair[0].pos(), ParseErrorKind::Syntax, "expected a symbol"))?;
            let sort = self.sort(&pair[1])?;
            if bv_only && sort == Sort::Bool {
                return Err(err(
                    pair[1].pos(),
                    ParseErrorKind::Unsupported,
                    "only bit-vector sorted binders are supported",
                ));
            }
            let v = self.tm.new_var(name, sort);
            out.push((name.to_string(), v));
        }
        Ok(out)
    }

    fn term(&mut self, e: &SExpr) -> Result<TermId, ParseError> {
        let pos = e.pos();
        if let Some(c) = parse_bv_literal(e) {
            return Ok(self.tm.bv_const(c));
        }
        match e {
            SExpr::Atom { text, kind, .. } => {
                if *kind == sexp::AtomKind::Simple {
                    match text.as_str() {
                        "true" => return Ok(self.tm.tru()),
                        "false" => return Ok(self.tm.fals()),
                        _ => {}
                    }
                    if text.starts_with('#') {
                        return Err(err(pos, ParseErrorKind::Syntax, format!("bad literal {text}")));
                    }
                    if text.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                        return Err(err(
                            pos,
                            ParseErrorKind::Unsupported,
                            format!("numeral {text} is not a bit-vector term"),
                        ));
                    }
                }
                if *kind == sexp::AtomKind::Str {
                    return Err(err(pos, ParseErrorKind::Syntax, "unexpected string literal"));
                }
                self.lookup(text)
                    .ok_or_else(|| err(pos, ParseErrorKind::UnknownSymbol, format!("unknown symbol {text}")))
            }
            SExpr::List { items, .. } => {
                let Some(head) = items.first() else {
                    return Err(err(pos, ParseErrorKind::Syntax, "empty application"));
                };
                if let Some(h) = head.as_list() {
                    return self.indexed_app(h, &items[1..], pos);
                }
                let Some(op) = head.as_atom() else {
                    return Err(err(head.pos(), ParseErrorKind::Syntax, "expected an operator"));
                };
                match op {
                    "let" => return self.let_term(items, pos),
                    "forall" | "exists" | "choice" => return self.binder_term(op, items, pos),
                    "!" => {
                        return items
                            .get(1)
                            .ok_or_else(|| err(pos, ParseErrorKind::Syntax, "empty annotation"))
                            .and_then(|t| self.term(t))
                    }
                    "_" => {
                        return Err(err(pos, ParseErrorKind::Unsupported, format!("unsupported indexed constant {e}")))
                    }
                    _ => {}
                }
                let args = items[1..].iter().map(|a| self.term(a)).collect::<Result<Vec<_>, _>>()?;
                self.app(op, &args, head.pos(), pos)
            }
        }
    }

    fn let_term(&mut self, items: &[SExpr], pos: Pos) -> Result<TermId, ParseError> {
        if items.len() != 3 {
            return Err(err(pos, ParseErrorKind::Syntax, "let takes bindings and a body"));
        }
        let binds =
            items[1].as_list().ok_or_else(|| err(items[1].pos(), ParseErrorKind::Syntax, "expected bindings"))?;
        let mut scope = Vec::new();
        for b in binds {
            let pair = b
                .as_list()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| err(b.pos(), ParseErrorKind::Syntax, "expected (name term)"))?;
            let name =
                pair[0].as_symbol().ok_or_else(|| err(pair[0].pos(), ParseErrorKind::Syntax, "expected a symbol"))?;
            let t = self.term(&pair[1])?;
            scope.push((name.to_string(), t));
        }
        self.scopes.push(scope);
        let body = self.term(&items[2]);
        self.scopes.pop();
        body
    }

    fn binder_term(&mut self, op: &str, items: &[SExpr], pos: Pos) -> Result<TermId, ParseError> {
        if items.len() != 3 {
            return Err(err(pos, ParseErrorKind::Syntax, format!("{op} takes binders and a body")));
        }
        let bs = self.binders(&items[1], op != "choice")?;
        if op == "choice" && bs.len() != 1 {
            return Err(err(items[1].pos(), ParseErrorKind::Syntax, "choice binds one variable"));
        }
        let scope = bs.iter().map(|(n, v)| (n.clone(), self.tm.var(*v))).collect();
        self.scopes.push(scope);
        let body = self.term(&items[2]);
        self.scopes.pop();
        let body = body?;
        if self.tm.sort(body) != Sort::Bool {
            return Err(err(items[2].pos(), ParseErrorKind::Sort, format!("{op} body must be Boolean")));
        }
        let vs: Vec<VarId> = bs.into_iter().map(|(_, v)| v).collect();
        let kind = match op {
            "forall" => Kind::Forall(vs, body),
            "exists" => Kind::Exists(vs, body),
            _ => Kind::Choice(vs[0], body),
        };
        self.mk(kind, pos)
    }

    fn indexed_app(&mut self, h: &[SExpr], args: &[SExpr], pos: Pos) -> Result<TermId, ParseError> {
        let ix = |i: usize| -> Option<u32> { h.get(i)?.as_atom()?.parse().ok() };
        if h.len() == 4 && h[0].as_atom() == Some("_") && h[1].as_atom() == Some("extract") {
            let (Some(hi), Some(lo)) = (ix(2), ix(3)) else {
                return Err(err(pos, ParseErrorKind::Syntax, "bad extract indices"));
            };
            if args.len() != 1 {
                return Err(err(pos, ParseErrorKind::Syntax, "extract takes one argument"));
            }
            let a = self.term(&args[0])?;
            return self.mk(Kind::Extract { hi, lo, arg: a }, pos);
        }
        let name = h.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        Err(err(pos, ParseErrorKind::Unsupported, format!("unsupported operator ({name})")))
    }

    fn app(&mut self, op: &str, args: &[TermId], op_pos: Pos, pos: Pos) -> Result<TermId, ParseError> {
        let arity = |n: usize| -> Result<(), ParseError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(pos, ParseErrorKind::Syntax, format!("{op} expects {n} arguments")))
            }
        };
        let at_least = |n: usize| -> Result<(), ParseError> {
            if args.len() >= n {
                Ok(())
            } else {
                Err(err(pos, ParseErrorKind::Syntax, format!("{op} expects at least {n} arguments")))
            }
        };
        let bin = |op: BvBinOp| -> Option<BvBinOp> { Some(op) };
        let bin_op = match op {
            "bvadd" => bin(BvBinOp::Add),
            "bvmul" => bin(BvBinOp::Mul),
            "bvand" => bin(BvBinOp::And),
            "bvor" => bin(BvBinOp::Or),
            "bvshl" => bin(BvBinOp::Shl),
            "bvlshr" => bin(BvBinOp::Lshr),
            "bvashr" => bin(BvBinOp::Ashr),
            "bvudiv" => bin(BvBinOp::Udiv),
            "bvurem" => bin(BvBinOp::Urem),
            _ => None,
        };
        if let Some(b) = bin_op {
            if b.is_commutative() {
                at_least(2)?;
            } else {
                arity(2)?;
            }
            let mut acc = args[0];
            for &a in &args[1..] {
                acc = self.mk(Kind::BvBin(b, acc, a), pos)?;
            }
            return Ok(acc);
        }
        if let Some(r) = relation_from_smtlib(op) {
            arity(2)?;
            return self.mk(Kind::Rel(r, args[0], args[1]), pos);
        }
        match op {
            "not" => {
                arity(1)?;
                self.mk(Kind::Not(args[0]), pos)
            }
            "and" | "or" => {
                for &a in args {
                    if self.tm.sort(a) != Sort::Bool {
                        return Err(err(pos, ParseErrorKind::Sort, format!("{op} expects Booleans")));
                    }
                }
                Ok(if op == "and" { self.tm.and(args.to_vec()) } else { self.tm.or(args.to_vec()) })
            }
            "=>" => {
                at_least(2)?;
                let mut acc = *args.last().unwrap();
                for &a in args[..args.len() - 1].iter().rev() {
                    acc = self.mk(Kind::Implies(a, acc), pos)?;
                }
                Ok(acc)
            }
            "xor" => {
                arity(2)?;
                let i = self.mk(Kind::Iff(args[0], args[1]), pos)?;
                self.mk(Kind::Not(i), pos)
            }
            "=" | "distinct" => {
                at_least(2)?;
                let mut parts = Vec::new();
                let pairs: Vec<(TermId, TermId)> = if op == "=" {
                    args.windows(2).map(|w| (w[0], w[1])).collect()
                } else {
                    let mut v = Vec::new();
                    for i in 0..args.len() {
                        for j in i + 1..args.len() {
                            v.push((args[i], args[j]));
                        }
                    }
                    v
                };
                for (a, b) in pairs {
                    let (sa, sb) = (self.tm.sort(a), self.tm.sort(b));
                    if sa != sb {
                        return Err(err(pos, ParseErrorKind::Sort, format!("{op} on {sa} and {sb}")));
                    }
                    let k = match (sa, op) {
                        (Sort::Bool, "=") => Kind::Iff(a, b),
                        (Sort::Bool, _) => {
                            let i = self.mk(Kind::Iff(a, b), pos)?;
                            Kind::Not(i)
                        }
                        (_, "=") => Kind::Rel(Relation::Eq, a, b),
                        _ => Kind::Rel(Relation::Ne, a, b),
                    };
                    parts.push(self.mk(k, pos)?);
                }
                Ok(self.tm.and(parts))
            }
            "ite" => {
                arity(3)?;
                self.mk(Kind::Ite(args[0], args[1], args[2]), pos)
            }
            "bvnot" | "bvneg" => {
                arity(1)?;
                let u = if op == "bvnot" { BvUnOp::Not } else { BvUnOp::Neg };
                self.mk(Kind::BvUn(u, args[0]), pos)
            }
            "bvsub" => {
                at_least(2)?;
                let mut acc = args[0];
                for &a in &args[1..] {
                    let n = self.mk(Kind::BvUn(BvUnOp::Neg, a), pos)?;
                    acc = self.mk(Kind::BvBin(BvBinOp::Add, acc, n), pos)?;
                }
                Ok(acc)
            }
            "concat" => {
                at_least(2)?;
                let mut acc = args[0];
                for &a in &args[1..] {
                    acc = self.mk(Kind::Concat(acc, a), pos)?;
                }
                Ok(acc)
            }
            _ => Err(err(op_pos, ParseErrorKind::Unsupported, format!("unsupported operator {op}"))),
        }
    }
}

fn relation_from_smtlib(op: &str) -> Option<Relation> {
    Relation::ALL.into_iter().find(|r| *r != Relation::Eq && *r != Relation::Ne && r.smtlib_name() == op)
}

/// Parses a script, declaring its constants in `tm`.
pub fn parse_script(tm: &mut TermManager, text: &str) -> Result<Script, ParseError> {
    let cmds = sexp::parse_all(text)?;
    let mut p = Parser { tm, consts: FxHashMap::default(), scopes: Vec::new() };
    let mut script = Script::default();
    for c in &cmds {
        let pos = c.pos();
        let items = c
            .as_list()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| err(pos, ParseErrorKind::Syntax, "expected a command"))?;
        let name = items[0].as_atom().ok_or_else(|| err(pos, ParseErrorKind::Syntax, "expected a command name"))?;
        match name {
            "set-logic" => {
                let l = items
                    .get(1)
                    .and_then(|l| l.as_symbol())
                    .ok_or_else(|| err(pos, ParseErrorKind::Syntax, "set-logic expects a logic name"))?;
                if script.logic.is_some() {
                    return Err(err(pos, ParseErrorKind::Syntax, "logic already set"));
                }
                if l != "BV" && l != "QF_BV" {
                    return Err(err(items[1].pos(), ParseErrorKind::Unsupported, format!("unsupported logic {l}")));
                }
                script.logic = Some(l.to_string());
            }
            "set-info" => {
                if items.get(1).and_then(|k| k.as_atom()) == Some(":status") {
                    script.status = items.get(2).and_then(|s| s.as_symbol()).map(str::to_string);
                }
            }
            "set-option" | "get-model" | "get-info" => {}
            "declare-const" | "declare-fun" => {
                let (nm, sort_e) = match (name, items.len()) {
                    ("declare-const", 3) => (&items[1], &items[2]),
                    ("declare-fun", 4) => {
                        let ok = items[2].as_list().is_some_and(|a| a.is_empty());
                        if !ok {
                            return Err(err(
                                pos,
                                ParseErrorKind::Unsupported,
                                "uninterpreted functions are unsupported",
                            ));
                        }
                        (&items[1], &items[3])
                    }
                    _ => return Err(err(pos, ParseErrorKind::Syntax, format!("malformed {name}"))),
                };
                let n = nm.as_symbol().ok_or_else(|| err(nm.pos(), ParseErrorKind::Syntax, "expected a symbol"))?;
                let sort = p.sort(sort_e)?;
                if p.consts.contains_key(n) {
                    return Err(err(nm.pos(), ParseErrorKind::Syntax, format!("{n} already declared")));
                }
                let v = p.tm.new_var(n, sort);
                p.consts.insert(n.to_string(), v);
                script.declarations.push(v);
            }
            "assert" => {
                if items.len() != 2 {
                    return Err(err(pos, ParseErrorKind::Syntax, "assert takes one term"));
                }
                let t = p.term(&items[1])?;
                if p.tm.sort(t) != Sort::Bool {
                    return Err(err(items[1].pos(), ParseErrorKind::Sort, "assertion is not Boolean"));
                }
                if script.logic.as_deref() == Some("QF_BV") && !p.tm.is_quantifier_free(t) {
                    return Err(err(items[1].pos(), ParseErrorKind::Unsupported, "quantifier under QF_BV"));
                }
                script.assertions.push(t);
            }
            "check-sat" => script.check_sat = true,
            "exit" => break,
            _ => return Err(err(items[0].pos(), ParseErrorKind::Unsupported, format!("unsupported command {name}"))),
        }
    }
    Ok(script)
}

/// Parses a single term over the given constants.
pub fn parse_term(tm: &mut TermManager, text: &str, consts: &[VarId]) -> Result<TermId, ParseError> {
    let es = sexp::parse_all(text)?;
    if es.len() != 1 {
        return Err(err(Pos::default(), ParseErrorKind::Syntax, "expected exactly one term"));
    }
    let consts = consts.iter().map(|v| (tm.var_name(*v).to_string(), *v)).collect();
    let mut p = Parser { tm, consts, scopes: Vec::new() };
    p.term(&es[0])
}

pub fn print_script(tm: &TermManager, script: &Script) -> String {
    let p = SmtPrinter::new(tm);
    let mut out = String::new();
    writeln!(out, "(set-logic {})", script.logic.as_deref().unwrap_or("BV")).unwrap();
    if let Some(s) = &script.status {
        writeln!(out, "(set-info :status {s})").unwrap();
    }
    for &v in &script.declarations {
        writeln!(out, "(declare-const {} {})", p.var(v), tm.var_sort(v)).unwrap();
    }
    for &a in &script.assertions {
        writeln!(out, "(assert {})", p.term(a)).unwrap();
    }
    if script.check_sat {
        writeln!(out, "(check-sat)").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_sum_formula() {
        let mut tm = TermManager::new();
        let text = "(set-logic BV)\n(declare-const s (_ BitVec 4))\n(declare-const t (_ BitVec 4))\n\
                    (assert (forall ((x (_ BitVec 4))) (distinct (bvadd x s) t)))\n(check-sat)\n";
        let sc = parse_script(&mut tm, text).unwrap();
        assert_eq!(sc.assertions.len(), 1);
        assert!(sc.check_sat);
        assert_eq!(tm.display(sc.assertions[0]), "(forall ((x (_ BitVec 4))) (distinct (bvadd x s) t))");
        assert_eq!(print_script(&tm, &sc), text);
    }

    #[test]
    fn literals_and_sugar() {
        let mut tm = TermManager::new();
        let t = parse_term(&mut tm, "(_ bv5 4)", &[]).unwrap();
        assert_eq!(tm.as_bv_const(t), BitVec::new(Width::new(4).unwrap(), 5).ok());
        let t = parse_term(&mut tm, "#x1f", &[]).unwrap();
        assert_eq!(tm.as_bv_const(t).unwrap().width().bits(), 8);
        let a = tm.new_var("a", Sort::bv(4));
        let b = tm.new_var("b", Sort::bv(4));
        let t = parse_term(&mut tm, "(bvsub a b)", &[a, b]).unwrap();
        assert_eq!(tm.display(t), "(bvadd a (bvneg b))");
        let t = parse_term(&mut tm, "(let ((c (bvmul a a))) (bvule c b))", &[a, b]).unwrap();
        assert_eq!(tm.display(t), "(bvule (bvmul a a) b)");
        let t = parse_term(&mut tm, "((_ extract 3 2) a)", &[a]).unwrap();
        assert_eq!(tm.width(t).bits(), 2);
        let t = parse_term(&mut tm, "(choice ((y (_ BitVec 4))) (= y a))", &[a]).unwrap();
        assert!(matches!(tm.kind(t), Kind::Choice(..)));
    }

    #[test]
    fn diagnostics() {
        let mut tm = TermManager::new();
        let e = parse_script(&mut tm, "(set-logic BV)\n(declare-fun f ((_ BitVec 4)) (_ BitVec 4))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        assert_eq!(e.pos, Pos { line: 2, col: 1 });
        assert!(e.msg.contains("uninterpreted"));

        let e = parse_script(&mut tm, "(declare-const a (_ BitVec 65))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        let e = parse_script(&mut tm, "(declare-const a (_ BitVec 4))\n(assert (bvadd a a))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Sort);
        let e = parse_script(&mut tm, "(assert (= q q))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownSymbol);
        assert_eq!(e.pos, Pos { line: 1, col: 12 });
        let e = parse_script(&mut tm, "(declare-const a (_ BitVec 4))\n(assert (bvxnor a a))").unwrap_err();
        assert_eq!((e.kind, e.pos), (ParseErrorKind::Unsupported, Pos { line: 2, col: 10 }));
        let e = parse_script(&mut tm, "(push 1)").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        let e = parse_script(&mut tm, "(set-logic QF_BV)\n(assert (forall ((x (_ BitVec 2))) (= x x)))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
        let e = parse_script(&mut tm, "(assert (exists ((p Bool)) p))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Unsupported);
    }

    #[test]
    fn shadowing_binders() {
        let mut tm = TermManager::new();
        let text =
            "(declare-const x (_ BitVec 2))\n(assert (and (= x #b01) (forall ((x (_ BitVec 2))) (bvuge x #b00))))";
        let sc = parse_script(&mut tm, text).unwrap();
        let a = sc.assertions[0];
        assert_eq!(tm.free_vars(a), &[sc.declarations[0]]);
    }
}
