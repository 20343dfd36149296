use std::fmt::Write;

use rustc_hash::FxHashMap;

use super::{Kind, Sort, TermId, TermManager, VarId};

/// SMT-LIB 2 printer. Choice terms use the non-standard binder
/// `(choice ((y S)) body)`, which the frontend parser also accepts.
pub struct SmtPrinter<'a> {
    tm: &'a TermManager,
}

/// Quotes a symbol with `|...|` unless it is a simple symbol.
pub fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.chars().next().unwrap().is_ascii_digit()
        && name.chars().all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{}|", name)
    }
}

impl<'a> SmtPrinter<'a> {
    pub fn new(tm: &'a TermManager) -> Self {
        SmtPrinter { tm }
    }

    pub fn sort(&self, s: Sort) -> String {
        s.to_string()
    }

    pub fn var(&self, v: VarId) -> String {
        symbol(self.tm.var_name(v))
    }

    /// Tree rendering of `t`.
    pub fn term(&self, t: TermId) -> String {
        let mut out = String::new();
        self.write(t, &mut out, &FxHashMap::default());
        out
    }

    /// Rendering with `let` bindings for shared compound subterms. Only used
    /// for binder-free terms, where hoisting a shared node cannot move a
    /// variable out of its scope; other terms fall back to [`Self::term`].
    pub fn term_shared(&self, t: TermId) -> String {
        let tm = self.tm;
        if !tm.is_quantifier_free(t) || !tm.is_choice_free(t) {
            return self.term(t);
        }
        let order = tm.post_order(t);
        let mut refs: FxHashMap<TermId, u32> = FxHashMap::default();
        for &n in &order {
            for c in tm.kind(n).children() {
                *refs.entry(c).or_default() += 1;
            }
        }
        let mut names: FxHashMap<TermId, String> = FxHashMap::default();
        let mut bindings = Vec::new();
        for &n in &order {
            let compound = !tm.kind(n).children().is_empty();
            if n != t && compound && refs.get(&n).copied().unwrap_or(0) >= 2 {
                let mut body = String::new();
                self.write(n, &mut body, &names);
                let name = format!("?s{}", n.index());
                bindings.push((name.clone(), body));
                names.insert(n, name);
            }
        }
        let mut out = String::new();
        for (name, body) in &bindings {
            write!(out, "(let (({} {})) ", name, body).unwrap();
        }
        self.write(t, &mut out, &names);
        for _ in &bindings {
            out.push(')');
        }
        out
    }

    fn write(&self, t: TermId, out: &mut String, names: &FxHashMap<TermId, String>) {
        if let Some(n) = names.get(&t) {
            out.push_str(n);
            return;
        }
        let tm = self.tm;
        let app = |head: &str, args: &[TermId], out: &mut String| {
            out.push('(');
            out.push_str(head);
            for a in args {
                out.push(' ');
                self.write(*a, out, names);
            }
            out.push(')');
        };
        match tm.kind(t) {
            Kind::BvConst(c) => write!(out, "{}", c).unwrap(),
            Kind::BoolConst(b) => out.push_str(if *b { "true" } else { "false" }),
            Kind::Var(v) => out.push_str(&self.var(*v)),
            Kind::BvUn(op, a) => app(op.smtlib_name(), &[*a], out),
            Kind::BvBin(op, a, b) => app(op.smtlib_name(), &[*a, *b], out),
            Kind::Concat(a, b) => app("concat", &[*a, *b], out),
            Kind::Extract { hi, lo, arg } => app(&format!("(_ extract {} {})", hi, lo), &[*arg], out),
            Kind::Rel(r, a, b) => app(r.smtlib_name(), &[*a, *b], out),
            Kind::Not(a) => app("not", &[*a], out),
            Kind::And(xs) => app("and", xs, out),
            Kind::Or(xs) => app("or", xs, out),
            Kind::Implies(a, b) => app("=>", &[*a, *b], out),
            Kind::Iff(a, b) => app("=", &[*a, *b], out),
            Kind::Ite(c, a, b) => app("ite", &[*c, *a, *b], out),
            Kind::Choice(v, body) => {
                write!(out, "(choice (({} {})) ", self.var(*v), tm.var_sort(*v)).unwrap();
                self.write(*body, out, names);
                out.push(')');
            }
            Kind::Forall(vs, body) | Kind::Exists(vs, body) => {
                let q = if matches!(tm.kind(t), Kind::Forall(..)) { "forall" } else { "exists" };
                write!(out, "({} (", q).unwrap();
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    write!(out, "({} {})", self.var(*v), tm.var_sort(*v)).unwrap();
                }
                out.push_str(") ");
                self.write(*body, out, names);
                out.push(')');
            }
        }
    }
}
