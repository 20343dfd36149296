//! Counterexample-guided quantifier instantiation for `exists y. forall x. psi`.
//!
//! Each round asks the ground backend for a counterexample to `psi` that is
//! consistent with the instances collected so far, then turns it into an
//! instantiation using one of four selection configurations. Choice terms
//! produced by the selection are replaced by fresh constants together with
//! their defining implication before anything reaches the ground backend.

pub mod preprocess;
pub mod rewrite;
pub mod select;

use std::fmt;
use std::str::FromStr;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::bv::BitVec;
use crate::qfbv::{GroundSolver, GroundVerdict};
use crate::term::{Interpretation, Kind, Sort, TermId, TermManager, Value, VarId};

pub use preprocess::{preprocess, PreprocessError, PreprocessOptions, Problem};
pub use rewrite::rewrite;
pub use select::{linearize, project, select, Selection};

/// Literal projection used by the selection function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Config {
    /// Model values only.
    M,
    /// Keep the literal.
    K,
    /// Equality with the observed slack.
    S,
    /// Equality at the boundary.
    B,
}

impl Config {
    pub const ALL: [Config; 4] = [Config::M, Config::K, Config::S, Config::B];
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Config::M => "m",
            Config::K => "k",
            Config::S => "s",
            Config::B => "b",
        })
    }
}

impl FromStr for Config {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "m" => Ok(Config::M),
            "k" => Ok(Config::K),
            "s" => Ok(Config::S),
            "b" => Ok(Config::B),
            _ => Err(format!("unknown configuration `{s}` (expected m, k, s or b)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Values for the existential variables.
    Sat(Interpretation),
    Unsat,
    ResourceOut(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::ResourceOut(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub rounds: u64,
    pub instantiations: u64,
    /// Rounds where the selected instance was already present and
    /// selection was redone with model values.
    pub duplicates: u64,
    /// Variables instantiated with their model value because no literal
    /// could be solved.
    pub model_fallbacks: u64,
    /// Choice terms replaced by fresh constants.
    pub choices: u64,
    pub ground_checks: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLog {
    pub round: u64,
    /// Counterexample values for the universal variables.
    pub counterexample: Vec<BitVec>,
    pub terms: Vec<TermId>,
    pub duplicate: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CegqiOptions {
    pub config: Config,
    pub max_instantiations: u64,
    pub backend: GroundSolver,
    pub preprocess: PreprocessOptions,
}

impl Default for CegqiOptions {
    fn default() -> Self {
        CegqiOptions {
            config: Config::K,
            max_instantiations: 10_000,
            backend: GroundSolver::default(),
            preprocess: PreprocessOptions::default(),
        }
    }
}

impl CegqiOptions {
    pub fn with_config(config: Config) -> Self {
        CegqiOptions { config, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub stats: Stats,
    pub log: Vec<RoundLog>,
}

/// Ground instances collected so far plus the bookkeeping for choice
/// elimination.
#[derive(Debug, Default)]
pub struct SolverState {
    /// Instances as selected, before choice elimination.
    pub instances: Vec<TermId>,
    seen: FxHashSet<TermId>,
    /// Assertions handed to the ground backend: eliminated instances and
    /// the defining implications of the choice constants.
    pub ground: Vec<TermId>,
    choice_consts: FxHashMap<TermId, VarId>,
    pub stats: Stats,
    pub log: Vec<RoundLog>,
}

impl SolverState {
    pub fn contains(&self, instance: TermId) -> bool {
        self.seen.contains(&instance)
    }

    /// Adds an instance, replacing each choice term by a constant. Returns
    /// false for duplicates.
    pub fn add_instance(&mut self, tm: &mut TermManager, instance: TermId) -> bool {
        if !self.seen.insert(instance) {
            return false;
        }
        self.instances.push(instance);
        self.stats.instantiations += 1;
        let mut memo = FxHashMap::default();
        let g = self.eliminate(tm, instance, &mut memo);
        let g = rewrite(tm, g);
        self.ground.push(g);
        true
    }

    fn eliminate(&mut self, tm: &mut TermManager, t: TermId, memo: &mut FxHashMap<TermId, TermId>) -> TermId {
        if tm.is_choice_free(t) {
            return t;
        }
        if let Some(r) = memo.get(&t) {
            return *r;
        }
        let kind = tm.kind(t).clone();
        let r = match kind {
            Kind::Choice(v, body) => {
                let k = match self.choice_consts.get(&t) {
                    Some(k) => *k,
                    None => {
                        let k = tm.fresh_var("k", tm.var_sort(v));
                        self.choice_consts.insert(t, k);
                        self.stats.choices += 1;
                        let body = self.eliminate(tm, body, &mut FxHashMap::default());
                        let kt = tm.var(k);
                        let axiom = tm.substitute1(body, v, kt).expect("same sort");
                        self.ground.push(axiom);
                        k
                    }
                };
                tm.var(k)
            }
            _ => {
                let ch: Vec<TermId> = kind.children().iter().map(|c| self.eliminate(tm, *c, memo)).collect();
                tm.mk(kind.with_children(&ch)).expect("same sorts")
            }
        };
        memo.insert(t, r);
        r
    }
}

fn default_model(tm: &TermManager, vars: &[VarId], from: &Interpretation) -> Interpretation {
    let mut out = Interpretation::new();
    for &v in vars {
        let val = from.get(v).unwrap_or(match tm.var_sort(v) {
            Sort::Bool => Value::Bool(false),
            Sort::Bv(w) => Value::Bv(BitVec::zero(w)),
        });
        out.set(v, val);
    }
    out
}

/// Runs the instantiation loop on `p`.
pub fn cegqi_check(tm: &mut TermManager, p: &Problem, opts: &CegqiOptions) -> Outcome {
    let mut st = SolverState::default();
    let verdict = run(tm, p, opts, &mut st);
    Outcome { verdict, stats: st.stats, log: st.log }
}

fn run(tm: &mut TermManager, p: &Problem, opts: &CegqiOptions, st: &mut SolverState) -> Verdict {
    if p.forall.is_empty() {
        st.stats.rounds += 1;
        st.stats.ground_checks += 1;
        return match opts.backend.check(tm, p.matrix) {
            GroundVerdict::Sat(m) => Verdict::Sat(default_model(tm, &p.exists, &m)),
            GroundVerdict::Unsat => Verdict::Unsat,
            GroundVerdict::ResourceOut(msg) => Verdict::ResourceOut(msg),
        };
    }
    let neg = tm.not(p.matrix);
    let neg = rewrite(tm, neg);
    loop {
        st.stats.rounds += 1;
        let mut conj = st.ground.clone();
        conj.push(neg);
        let q = tm.and(conj);
        st.stats.ground_checks += 1;
        let model = match opts.backend.check(tm, q) {
            GroundVerdict::Sat(m) => m,
            GroundVerdict::ResourceOut(msg) => return Verdict::ResourceOut(msg),
            GroundVerdict::Unsat => {
                let g = tm.and(st.ground.clone());
                st.stats.ground_checks += 1;
                return match opts.backend.check(tm, g) {
                    GroundVerdict::Unsat => Verdict::Unsat,
                    GroundVerdict::Sat(m) => Verdict::Sat(default_model(tm, &p.exists, &m)),
                    GroundVerdict::ResourceOut(msg) => Verdict::ResourceOut(msg),
                };
            }
        };
        if st.stats.instantiations >= opts.max_instantiations {
            return Verdict::ResourceOut(format!(
                "instantiation budget of {} exhausted after {} rounds",
                opts.max_instantiations, st.stats.rounds
            ));
        }
        let counterexample: Vec<BitVec> =
            p.forall.iter().map(|x| model.get_bv(*x).unwrap_or_else(|| BitVec::zero(tm.var_width(*x)))).collect();

        let mut sel = select(tm, opts.config, &p.forall, neg, &model);
        let mut instance = instantiate(tm, p, &sel.terms);
        let mut duplicate = false;
        if st.contains(instance) {
            duplicate = true;
            st.stats.duplicates += 1;
            sel = select(tm, Config::M, &p.forall, neg, &model);
            instance = instantiate(tm, p, &sel.terms);
        }
        st.stats.model_fallbacks += sel.solved.iter().filter(|s| !**s).count() as u64;
        st.log.push(RoundLog { round: st.stats.rounds, counterexample, terms: sel.terms.clone(), duplicate });
        if !st.add_instance(tm, instance) {
            return Verdict::ResourceOut("model-value instance already present".into());
        }
    }
}

fn instantiate(tm: &mut TermManager, p: &Problem, terms: &[TermId]) -> TermId {
    let map: FxHashMap<VarId, TermId> = p.forall.iter().copied().zip(terms.iter().copied()).collect();
    let inst = tm.substitute(p.matrix, &map).expect("selection preserves sorts");
    rewrite(tm, inst)
}

/// Preprocesses the conjunction of `assertions` and decides it.
pub fn solve_assertions(
    tm: &mut TermManager,
    assertions: &[TermId],
    opts: &CegqiOptions,
) -> Result<Outcome, PreprocessError> {
    let p = preprocess(tm, assertions, opts.preprocess)?;
    let mut out = cegqi_check(tm, &p, opts);
    if p.negated {
        out.verdict = match out.verdict {
            Verdict::Sat(_) => Verdict::Unsat,
            Verdict::Unsat => Verdict::Sat(Interpretation::new()),
            r => r,
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bv::Width;
    use crate::smtlib::parse_script;

    fn run_text(text: &str, config: Config) -> (TermManager, Outcome) {
        let mut tm = TermManager::new();
        let sc = parse_script(&mut tm, text).unwrap();
        let out = solve_assertions(&mut tm, &sc.assertions, &CegqiOptions::with_config(config)).unwrap();
        (tm, out)
    }

    const SHIFTED_SUM: &str = "(declare-const s (_ BitVec 32)) (declare-const t (_ BitVec 32))
        (assert (forall ((x (_ BitVec 32))) (distinct (bvadd x s) t)))";

    #[test]
    fn shifted_sum_needs_one_instance() {
        for c in [Config::K, Config::S, Config::B] {
            let (tm, out) = run_text(SHIFTED_SUM, c);
            assert_eq!(out.verdict, Verdict::Unsat, "{c}");
            assert_eq!(out.stats.instantiations, 1, "{c}");
            assert_eq!(out.stats.rounds, 2, "{c}");
            let t = out.log[0].terms[0];
            assert_eq!(tm.display(t), "(bvadd t (bvneg s))", "{c}");
        }
    }

    #[test]
    fn keep_mul_example_terminates_quickly() {
        let (_, out) = run_text(
            "(declare-const a (_ BitVec 4)) (declare-const b (_ BitVec 4))
             (assert (forall ((x (_ BitVec 4))) (bvule (bvmul x a) b)))",
            Config::K,
        );
        assert!(out.stats.rounds <= 2, "{:?}", out.stats);
        assert!(out.stats.instantiations <= 1);
        assert!(matches!(out.verdict, Verdict::Sat(_)));
    }

    #[test]
    fn reflexive_matrix_is_sat_immediately() {
        let (_, out) = run_text("(assert (forall ((x (_ BitVec 2))) (= x x)))", Config::K);
        assert!(matches!(out.verdict, Verdict::Sat(_)));
        assert_eq!(out.stats.instantiations, 0);
    }

    #[test]
    fn sat_model_satisfies_quantified_input() {
        let text = "(declare-const a (_ BitVec 3))
             (assert (forall ((x (_ BitVec 3))) (bvule (bvand x a) #b001)))";
        for c in Config::ALL {
            let mut tm = TermManager::new();
            let sc = parse_script(&mut tm, text).unwrap();
            let out = solve_assertions(&mut tm, &sc.assertions, &CegqiOptions::with_config(c)).unwrap();
            let Verdict::Sat(m) = out.verdict else { panic!("{c}: {:?}", out.verdict) };
            assert_eq!(tm.evaluate(sc.assertions[0], &m).unwrap(), Value::Bool(true), "{c}");
        }
    }

    #[test]
    fn model_values_never_duplicate() {
        let text = "(declare-const a (_ BitVec 2)) (declare-const b (_ BitVec 2))
             (assert (forall ((x (_ BitVec 2)) (y (_ BitVec 2)))
               (or (distinct (bvmul x y) a) (bvult b (bvadd x y)))))";
        let (_, out) = run_text(text, Config::M);
        assert_eq!(out.stats.duplicates, 0);
        assert!(out.stats.instantiations <= 16);
        assert!(!matches!(out.verdict, Verdict::ResourceOut(_)));
    }

    #[test]
    fn budget_is_reported() {
        let mut tm = TermManager::new();
        let sc = parse_script(&mut tm, SHIFTED_SUM).unwrap();
        let opts = CegqiOptions { max_instantiations: 3, ..CegqiOptions::with_config(Config::M) };
        let out = solve_assertions(&mut tm, &sc.assertions, &opts).unwrap();
        assert!(matches!(out.verdict, Verdict::ResourceOut(_)));
        assert_eq!(out.stats.instantiations, 3);
        assert_eq!(out.log.len(), 3);
    }

    #[test]
    fn closed_existential_flips() {
        let (_, out) = run_text("(assert (exists ((x (_ BitVec 4))) (bvult x #b0011)))", Config::K);
        assert!(matches!(out.verdict, Verdict::Sat(_)));
        let (_, out) = run_text("(assert (exists ((x (_ BitVec 4))) (bvult x #b0000)))", Config::K);
        assert_eq!(out.verdict, Verdict::Unsat);
    }

    #[test]
    fn choices_become_constants() {
        let mut tm = TermManager::new();
        let sc = parse_script(
            &mut tm,
            "(declare-const a (_ BitVec 4)) (declare-const b (_ BitVec 4))
             (assert (forall ((x (_ BitVec 4))) (distinct (bvmul x a) b)))",
        )
        .unwrap();
        let p = preprocess(&mut tm, &sc.assertions, PreprocessOptions::default()).unwrap();
        let out = cegqi_check(&mut tm, &p, &CegqiOptions::with_config(Config::K));
        assert!(out.stats.choices >= 1);
        // exists a b. forall x. x*a != b  holds with a = 0, b = 1
        let Verdict::Sat(m) = out.verdict else { panic!() };
        let w = Width::new(4).unwrap();
        let (av, bv) = (m.get_bv(p.exists[0]).unwrap(), m.get_bv(p.exists[1]).unwrap());
        assert!((0..16).all(|x| BitVec::new(w, x).unwrap().bvmul(av).unwrap() != bv));
    }

    #[test]
    fn config_parsing() {
        for c in Config::ALL {
            assert_eq!(c.to_string().parse::<Config>().unwrap(), c);
        }
        assert!("z".parse::<Config>().is_err());
    }
}
