//! Acceptance checks. Each criterion prints one PASS or FAIL line with its
//! measurements; the test fails at the end if any criterion failed.

mod common;

use std::time::{Duration, Instant};

use common::linear::*;
use common::*;
use proptest::prelude::*;

use invbv::bv::{BvBinOp, Relation, Width};
use invbv::catalog::{catalog_entries, get_ic, IcKey, IcOp, Side};
use invbv::cegqi::{solve_assertions, CegqiOptions, Config, Outcome, Verdict};
use invbv::qfbv::{check, enumerate_check, GroundVerdict, SatConfig, DEFAULT_ENUM_BITS};
use invbv::smtlib::{parse_script, sexp};
use invbv::term::{TermId, TermManager, VarId};
use invbv::verifier::{emit_sygus, emit_verification_smt2, sygus_keys, verify_all, Grammar};

struct Report {
    lines: Vec<String>,
    failed: Vec<usize>,
}

impl Report {
    fn record(&mut self, n: usize, pass: bool, what: String) {
        let line = format!("{} criterion {n}: {what}", if pass { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
        if !pass {
            self.failed.push(n);
        }
    }
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

fn criterion_1(r: &mut Report) {
    let start = Instant::now();
    let seq = verify_all(1..=6, 1);
    let t_seq = start.elapsed();
    let start = Instant::now();
    let par = verify_all(1..=6, 8);
    let t_par = start.elapsed();

    let rows = catalog_entries().len();
    let narrow_division = [Relation::Ne, Relation::Sgt, Relation::Sge].iter().all(|rel| {
        let key = IcKey::new(IcOp::Udiv, Side::Right, *rel);
        seq.reports.iter().any(|x| x.key == key && x.width.bits() == 1 && x.is_verified())
    });
    let pass = rows >= 160
        && seq.reports.len() == rows * 6
        && seq.all_verified()
        && par.all_verified()
        && narrow_division
        && t_seq < Duration::from_secs(600)
        && t_par < Duration::from_secs(120);
    r.record(
        1,
        pass,
        format!(
            "{rows} rows x widths 1-6: verified {}/{} (refuted {}, skipped {}); width-1 udiv right ne/sgt/sge verified: {narrow_division}; 1 job {} (limit 600s), 8 jobs {} (limit 120s) on {} cpu(s)",
            seq.verified(),
            seq.reports.len(),
            seq.refuted(),
            seq.skipped(),
            secs(t_seq),
            secs(t_par),
            std::thread::available_parallelism().map_or(1, |n| n.get()),
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let text = "(declare-const s (_ BitVec 32)) (declare-const t (_ BitVec 32))
        (assert (forall ((x (_ BitVec 32))) (distinct (bvadd x s) t)))";
    let run = |config: Config| {
        let mut tm = TermManager::new();
        let sc = parse_script(&mut tm, text).unwrap();
        let opts = CegqiOptions { max_instantiations: 256, ..CegqiOptions::with_config(config) };
        solve_assertions(&mut tm, &sc.assertions, &opts).unwrap()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for config in [Config::K, Config::S, Config::B] {
        let out = run(config);
        pass &= out.verdict == Verdict::Unsat && out.stats.instantiations == 1;
        parts.push(format!("{config}: {} after {} instantiation(s)", out.verdict.name(), out.stats.instantiations));
    }
    let m = run(Config::M);
    parts.push(format!("m (recorded only): {} after {} instantiation(s)", m.verdict.name(), m.stats.instantiations));
    r.record(2, pass, parts.join("; "));
}

/// `x op s` or `s op x` (or `x` itself) related to `t`, where `s` and `t`
/// are small expressions over two free constants.
#[derive(Debug, Clone)]
struct UnitLiteral {
    op: Option<(BvBinOp, bool)>,
    unop: Option<invbv::bv::BvUnOp>,
    s: E,
    t: E,
    rel: Relation,
    positive: bool,
}

fn arb_unit_literal() -> impl Strategy<Value = UnitLiteral> {
    let op = prop_oneof![
        1 => Just((None, None)),
        1 => arb_unop().prop_map(|u| (None, Some(u))),
        6 => (arb_binop(), any::<bool>()).prop_map(|o| (Some(o), None)),
    ];
    (op, arb_other(), arb_other(), arb_rel(), any::<bool>()).prop_map(|((op, unop), s, t, rel, positive)| UnitLiteral {
        op,
        unop,
        s,
        t,
        rel,
        positive,
    })
}

impl UnitLiteral {
    fn x_side(&self) -> E {
        let x = Box::new(E::Var(0));
        match (self.op, self.unop) {
            (Some((o, true)), _) => E::Bin(o, x, Box::new(self.s.clone())),
            (Some((o, false)), _) => E::Bin(o, Box::new(self.s.clone()), x),
            (None, Some(u)) => E::Un(u, x),
            (None, None) => E::Var(0),
        }
    }

    fn formula(&self) -> F {
        let atom = F::Rel(self.rel, self.x_side(), self.t.clone());
        if self.positive {
            atom
        } else {
            F::Not(Box::new(atom))
        }
    }
}

struct Built {
    tm: TermManager,
    x: VarId,
    lhs: TermId,
    rhs: TermId,
    matrix: TermId,
}

fn build_unit(u: &UnitLiteral, w: u32) -> Option<Built> {
    let wd = Width::new(w).unwrap();
    let mut tm = TermManager::new();
    let vars = declare(&mut tm, "v", 3, wd);
    let lhs = build_e(&mut tm, &u.x_side(), &vars, wd);
    let rhs = build_e(&mut tm, &u.t, &vars, wd);
    let matrix = build_f(&mut tm, &u.formula(), &vars, wd);
    // constant folding may remove x or take the literal out of catalog shape
    if tm.occurrences(vars[0], matrix) != 1 || tm.occurrences(vars[0], lhs) != 1 {
        return None;
    }
    get_ic(&mut tm, vars[0], lhs, u.rel, rhs).ok()?;
    Some(Built { tm, x: vars[0], lhs, rhs, matrix })
}

fn solve_unit(b: &mut Built, config: Config) -> Outcome {
    let q = b.tm.forall(vec![b.x], b.matrix);
    let opts = CegqiOptions { max_instantiations: 256, ..CegqiOptions::with_config(config) };
    solve_assertions(&mut b.tm, &[q], &opts).unwrap()
}

fn criterion_3(r: &mut Report) {
    let mut smp = Sampler::new(0xc3);
    let strat = arb_unit_literal();
    let mut problems = Vec::new();
    while problems.len() < 200 {
        let u = smp.sample(&strat);
        if build_unit(&u, 4).is_some() && build_unit(&u, 32).is_some() {
            problems.push(u);
        }
    }
    let mut pass = true;
    let mut notes = Vec::new();
    for w in [4u32, 32] {
        let (mut rounds_max, mut inst_max, mut mismatches, mut sat) = (0, 0, 0, 0);
        let start = Instant::now();
        for u in &problems {
            let mut b = build_unit(u, w).unwrap();
            let expected = if w == 4 {
                qproblem_oracle(&QProblem { width: 4, nu: 1, nf: 2, matrix: u.formula() })
            } else {
                // forall x. l holds for some frees iff the condition of the
                // complementary literal can be false
                let rel = if u.positive { u.rel.negate() } else { u.rel };
                let ic = get_ic(&mut b.tm, b.x, b.lhs, rel, b.rhs).unwrap();
                let goal = b.tm.not(ic);
                match check(&b.tm, goal, SatConfig::default()) {
                    GroundVerdict::Sat(_) => true,
                    GroundVerdict::Unsat => false,
                    GroundVerdict::ResourceOut(why) => panic!("ground check gave up: {why}"),
                }
            };
            let out = solve_unit(&mut b, Config::K);
            rounds_max = rounds_max.max(out.stats.rounds);
            inst_max = inst_max.max(out.stats.instantiations);
            let got = match out.verdict {
                Verdict::Sat(_) => Some(true),
                Verdict::Unsat => Some(false),
                Verdict::ResourceOut(_) => None,
            };
            if got != Some(expected) {
                mismatches += 1;
            }
            sat += expected as usize;
        }
        pass &= rounds_max <= 2 && inst_max <= 1 && mismatches == 0;
        notes.push(format!(
            "w{w}: max rounds {rounds_max}, max instantiations {inst_max}, {mismatches} verdict mismatches ({sat} sat / {} unsat), {}",
            problems.len() - sat,
            secs(start.elapsed())
        ));
    }
    r.record(3, pass, format!("200 unit linear problems, config k; {}", notes.join("; ")));
}

fn criterion_4(r: &mut Report) {
    const BUDGET: u64 = 256;
    let mut smp = Sampler::new(0xc4);
    let strat = arb_qproblem(4, 8);
    let n = 1000;
    let (mut mismatches, mut bad_models, mut ro_ksb, mut runs_ksb) = (0, 0, 0, 0);
    let mut ro_m = 0;
    let start = Instant::now();
    for _ in 0..n {
        let p = smp.sample(&strat);
        let expected = qproblem_oracle(&p);
        for config in Config::ALL {
            let wd = Width::new(p.width).unwrap();
            let mut tm = TermManager::new();
            let xs = declare(&mut tm, "x", p.nu, wd);
            let ys = declare(&mut tm, "y", p.nf, wd);
            let vars: Vec<_> = xs.iter().chain(&ys).copied().collect();
            let m = build_f(&mut tm, &p.matrix, &vars, wd);
            let q = tm.forall(xs, m);
            let opts = CegqiOptions { max_instantiations: BUDGET, ..CegqiOptions::with_config(config) };
            let out = solve_assertions(&mut tm, &[q], &opts).unwrap();
            if config != Config::M {
                runs_ksb += 1;
            }
            match out.verdict {
                Verdict::Sat(model) => {
                    mismatches += !expected as usize;
                    let vals: Vec<u64> = ys.iter().map(|y| model.get_bv(*y).map_or(0, |b| b.value())).collect();
                    bad_models += !forall_holds(&p, &vals) as usize;
                }
                Verdict::Unsat => mismatches += expected as usize,
                Verdict::ResourceOut(_) if config == Config::M => ro_m += 1,
                Verdict::ResourceOut(_) => ro_ksb += 1,
            }
        }
    }
    let rate = ro_ksb as f64 / runs_ksb as f64;
    let pass = mismatches == 0 && bad_models == 0 && rate < 0.05;
    r.record(
        4,
        pass,
        format!(
            "{n} problems x 4 configs: {mismatches} verdict mismatches, {bad_models} failing models; resource-out k/s/b {ro_ksb}/{runs_ksb} ({:.2}%, limit 5%), m {ro_m}/{n}; {}",
            rate * 100.0,
            secs(start.elapsed())
        ),
    );
}

fn criterion_5(r: &mut Report) {
    let mut smp = Sampler::new(0xc5);
    let strat = (arb_linear_literal(), any::<bool>());
    let (mut checked, mut missed, mut unsound) = (0, 0, 0);
    let mut example = None;
    while checked < 1000 {
        let ((f, _), positive) = smp.sample(&strat);
        let Some(c) = check_literal(&f, positive) else { continue };
        checked += 1;
        if !c.missed.is_empty() {
            missed += 1;
            if example.is_none() {
                example = Some(format!("{f:?} positive={positive} at (s, t) = {:?}", c.missed[0]));
            }
        }
        unsound += !c.unsound.is_empty() as usize;
    }
    let pass = missed == 0 && unsound == 0;
    let mut what = format!(
        "{checked} linear literals at w4: {} failures ({missed} where the solved form misses an existing solution, {unsound} unsound)",
        missed.max(unsound)
    );
    if let Some(e) = example {
        what.push_str(&format!("; first miss: {e}"));
    }
    r.record(5, pass, what);
}

fn criterion_6(r: &mut Report) {
    let mut smp = Sampler::new(0xc6);
    let strat = (1u32..=4, arb_formula(3, 12));
    let (mut disagreements, mut bad_models, mut sat) = (0, 0, 0);
    let n = 1000;
    for i in 0..n {
        let (w, f) = smp.sample(&strat);
        let wd = Width::new(w).unwrap();
        let mut tm = TermManager::new();
        let vars = declare(&mut tm, "v", 3, wd);
        let phi = build_f(&mut tm, &f, &vars, wd);
        let bb = check(&tm, phi, SatConfig { seed: i, ..SatConfig::default() });
        let en = enumerate_check(&tm, phi, DEFAULT_ENUM_BITS);
        disagreements += (bb.is_sat() != en.is_sat() || bb.is_unsat() != en.is_unsat()) as usize;
        sat += bb.is_sat() as usize;
        for v in [bb, en] {
            if let GroundVerdict::Sat(m) = v {
                let vals: Vec<u64> = vars.iter().map(|x| m.get_bv(*x).map_or(0, |b| b.value())).collect();
                bad_models += !eval_f(&f, &vals, w) as usize;
            }
        }
    }
    r.record(
        6,
        disagreements == 0 && bad_models == 0,
        format!("{n} formulas at w1-4 ({sat} sat): {disagreements} bit-blast/enumeration disagreements, {bad_models} models evaluating false"),
    );
}

fn criterion_7(r: &mut Report) {
    let widths = [1u32, 2, 3, 4, 5, 6, 8, 16, 32];
    let (mut emitted, mut emit_errors, mut parse_errors) = (0, 0, 0);
    for key in catalog_entries() {
        for w in widths {
            match emit_verification_smt2(key, Width::new(w).unwrap()) {
                Ok(text) => {
                    emitted += 1;
                    let mut tm = TermManager::new();
                    parse_errors += parse_script(&mut tm, &text).is_err() as usize;
                }
                Err(_) => emit_errors += 1,
            }
        }
    }
    let mut sygus = 0;
    let mut sygus_errors = 0;
    for grammar in [Grammar::R, Grammar::G] {
        for key in sygus_keys() {
            let text = emit_sygus(key, grammar, Width::new(4).unwrap());
            sygus += 1;
            sygus_errors += sexp::parse_all(&text).is_err() as usize;
        }
    }
    let pass = emit_errors == 0 && parse_errors == 0 && sygus == 280 && sygus_errors == 0;
    r.record(
        7,
        pass,
        format!(
            "{emitted} verification scripts over widths {widths:?} ({emit_errors} emit errors, {parse_errors} re-parse errors); {sygus} SyGuS problems ({sygus_errors} malformed)"
        ),
    );
}

#[test]
fn acceptance() {
    let mut r = Report { lines: vec![], failed: vec![] };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    println!("\nsummary:");
    for l in &r.lines {
        println!("  {l}");
    }
    assert!(r.failed.is_empty(), "failed criteria: {:?}", r.failed);
}
