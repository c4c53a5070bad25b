//! Receptiveness of a single team automaton: receptiveness requirements,
//! compliance and weak compliance.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::model::{Action, Component, Label, StateId};
use crate::sync::SyncSpec;
use crate::system::{ComponentSet, ComposeError, Limits, System, SystemLabel};
use crate::team::Eta;

/// Strict receptiveness asks for an immediate reception; weak
/// receptiveness allows other components to move first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Strict,
    #[default]
    Weak,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Mode::Strict),
            "weak" => Ok(Mode::Weak),
            other => Err(format!("unknown mode `{other}`, expected `strict` or `weak`")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Weak => "weak",
        })
    }
}

/// `rcp(J, a)@q`: the senders `J` may output `a` together in `q`, so some
/// component must be ready to receive it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Req {
    pub state: StateId,
    pub senders: ComponentSet,
    pub action: Action,
}

/// Components that list `a` as output and can take an `a`-step in their
/// local state within `q`.
pub fn output_enabled<C: Component>(sys: &System<C>, locals: &[StateId], a: &Action) -> Vec<usize> {
    (0..sys.len())
        .filter(|&i| {
            let c = sys.component(i);
            c.is_output(a) && c.automaton().enabled(locals[i], a)
        })
        .collect()
}

/// All receptiveness requirements at the reachable states of `eta`,
/// ordered by state, action, number of senders and sender set.
pub fn derive_reqs<C: Component>(
    eta: &Eta,
    st: &SyncSpec,
    sys: &System<C>,
    limits: &Limits,
) -> Result<Vec<Req>, ComposeError> {
    let mut out = Vec::new();
    for q in eta.reachable() {
        let locals = eta.state(q).locals();
        for a in sys.actions() {
            let Some(ty) = st.get(a) else { continue };
            let enabled = output_enabled(sys, locals, a);
            if enabled.len() > limits.max_participants {
                return Err(ComposeError::TooManyParticipants {
                    action: a.to_string(),
                    count: enabled.len(),
                    limit: limits.max_participants,
                });
            }
            let mut group: Vec<ComponentSet> =
                ComponentSet::subsets(&enabled).filter(|j| !j.is_empty() && ty.demands_reception(j.len())).collect();
            group.sort_by_key(|j| (j.len(), *j));
            out.extend(group.into_iter().map(|senders| Req { state: q, senders, action: a.clone() }));
        }
    }
    Ok(out)
}

/// A `(J, a, R)` transition with `R ≠ ∅` leaving `q`.
pub fn reception_step(eta: &Eta, q: StateId, senders: ComponentSet, a: &Action) -> Option<usize> {
    eta.outgoing(q).iter().copied().find(|&e| is_reception(&eta.edge(e).label, senders, a))
}

pub(crate) fn is_reception(label: &SystemLabel, senders: ComponentSet, a: &Action) -> bool {
    label.senders == senders && label.action() == a && !label.receivers.is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Compliant,
    WeaklyCompliant,
    Violated,
}

/// Transitions leading from the requirement's state to a reception:
/// `prefix` avoids the senders, `step` is the reception itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub prefix: Vec<usize>,
    pub step: usize,
}

pub fn is_compliant(eta: &Eta, req: &Req) -> Option<Witness> {
    reception_step(eta, req.state, req.senders, &req.action).map(|step| Witness { prefix: Vec::new(), step })
}

/// Breadth-first search over transitions in which no sender of `req`
/// participates, for a state with a reception. The witness is a shortest
/// one.
pub fn is_weakly_compliant(eta: &Eta, req: &Req) -> Option<Witness> {
    weak_search(eta, req.state, req.senders, &req.action, |_| true)
}

/// Shared search over the transitions accepted by `allow`.
pub(crate) fn weak_search(
    eta: &Eta,
    start: StateId,
    senders: ComponentSet,
    a: &Action,
    allow: impl Fn(usize) -> bool,
) -> Option<Witness> {
    let mut parent: Vec<Option<usize>> = vec![None; eta.num_states()];
    let mut seen = vec![false; eta.num_states()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(q) = queue.pop_front() {
        let step = eta.outgoing(q).iter().copied().find(|&e| allow(e) && is_reception(&eta.edge(e).label, senders, a));
        if let Some(step) = step {
            let mut prefix = Vec::new();
            let mut at = q;
            while let Some(e) = parent[at] {
                prefix.push(e);
                at = eta.edge(e).source;
            }
            prefix.reverse();
            return Some(Witness { prefix, step });
        }
        for &e in eta.outgoing(q) {
            let edge = eta.edge(e);
            if allow(e) && !edge.label.participants().intersects(senders) && !seen[edge.target] {
                seen[edge.target] = true;
                parent[edge.target] = Some(e);
                queue.push_back(edge.target);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReqResult {
    pub req: Req,
    pub status: Status,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub mode: Mode,
    pub results: Vec<ReqResult>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.results.iter().all(|r| r.status != Status::Violated)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ReqResult> {
        self.results.iter().filter(|r| r.status == Status::Violated)
    }
}

pub fn check_req(eta: &Eta, req: &Req, mode: Mode) -> ReqResult {
    let (status, witness) = match is_compliant(eta, req) {
        Some(w) => (Status::Compliant, Some(w)),
        None if mode == Mode::Weak => match is_weakly_compliant(eta, req) {
            Some(w) => (Status::WeaklyCompliant, Some(w)),
            None => (Status::Violated, None),
        },
        None => (Status::Violated, None),
    };
    ReqResult { req: req.clone(), status, witness }
}

/// Checks every requirement of `eta` in the given mode.
pub fn receptiveness_verdict<C: Component>(
    eta: &Eta,
    st: &SyncSpec,
    sys: &System<C>,
    mode: Mode,
    limits: &Limits,
) -> Result<Verdict, ComposeError> {
    let reqs = derive_reqs(eta, st, sys, limits)?;
    Ok(Verdict { mode, results: reqs.iter().map(|r| check_req(eta, r, mode)).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::system::PlainSystem;
    use crate::team::build_eta;

    fn product_team(feature: &str) -> (PlainSystem, SyncSpec, Eta) {
        let spec = corpus::load(corpus::ACCESS_MANAGEMENT);
        let p = spec.universe().product([feature]).unwrap();
        let sys = spec.system.project(p).unwrap();
        let st = spec.sync.project(p).unwrap();
        let eta = build_eta(&sys, &st, &Limits::default()).unwrap();
        (sys, st, eta)
    }

    fn req(sys: &PlainSystem, eta: &Eta, q: &str, senders: &[&str], a: &str) -> Req {
        Req {
            state: eta.id_of(&sys.parse_state(q).unwrap()).unwrap(),
            senders: senders.iter().map(|n| sys.index_of(n).unwrap()).collect(),
            action: a.into(),
        }
    }

    fn at(sys: &PlainSystem, eta: &Eta, reqs: &[Req], q: &str) -> Vec<String> {
        let id = eta.id_of(&sys.parse_state(q).unwrap()).unwrap();
        reqs.iter().filter(|r| r.state == id).map(|r| format!("{} {}", sys.display_set(r.senders), r.action)).collect()
    }

    #[test]
    fn requirements_at_the_initial_state() {
        let (sys, st, eta) = product_team("lock");
        let reqs = derive_reqs(&eta, &st, &sys, &Limits::default()).unwrap();
        assert_eq!(at(&sys, &eta, &reqs, "0,0,0"), ["{u1} join", "{u2} join"]);
        let (sys, st, eta) = product_team("unlock");
        let reqs = derive_reqs(&eta, &st, &sys, &Limits::default()).unwrap();
        assert_eq!(at(&sys, &eta, &reqs, "0,0,0"), ["{u1} join", "{u2} join", "{u1,u2} join"]);
    }

    #[test]
    fn compliance_in_the_locked_product() {
        let (sys, _, eta) = product_team("lock");
        let first = req(&sys, &eta, "0,0,0", &["u1"], "join");
        let w = is_compliant(&eta, &first).unwrap();
        assert_eq!(sys.display_state(eta.state(eta.edge(w.step).target)), "1,0,1");
        let second = req(&sys, &eta, "1,0,1", &["u2"], "join");
        assert!(is_compliant(&eta, &second).is_none());
        let w = is_weakly_compliant(&eta, &second).unwrap();
        assert_eq!(w.prefix.len(), 1);
        assert_eq!(sys.display_label(&eta.edge(w.prefix[0]).label), "{s} confirm {u1}");
    }

    #[test]
    fn two_users_join_together_in_the_open_product() {
        let (sys, _, eta) = product_team("unlock");
        let both = req(&sys, &eta, "0,0,0", &["u1", "u2"], "join");
        let w = is_compliant(&eta, &both).unwrap();
        assert_eq!(sys.display_state(eta.state(eta.edge(w.step).target)), "2,2,0");
    }

    #[test]
    fn product_verdicts() {
        let limits = Limits::default();
        let (sys, st, eta) = product_team("unlock");
        assert!(receptiveness_verdict(&eta, &st, &sys, Mode::Strict, &limits).unwrap().holds());
        let (sys, st, eta) = product_team("lock");
        let strict = receptiveness_verdict(&eta, &st, &sys, Mode::Strict, &limits).unwrap();
        assert!(!strict.holds());
        let bad: Vec<&Req> = strict.violations().map(|r| &r.req).collect();
        assert!(bad.contains(&&req(&sys, &eta, "1,0,1", &["u2"], "join")));
        assert!(receptiveness_verdict(&eta, &st, &sys, Mode::Weak, &limits).unwrap().holds());
    }

    #[test]
    fn deadlocked_state_is_never_compliant() {
        let (sys, _, eta) = product_team("lock");
        let empty = eta.retain_edges(|_, _| false);
        let r = req(&sys, &eta, "0,0,0", &["u1"], "join");
        assert!(is_compliant(&empty, &r).is_none());
        assert!(is_weakly_compliant(&empty, &r).is_none());
    }
}
