//! Checks for the three conditions of a perfect Bayesian equilibrium, and the
//! regret measures built from believed utilities.

use serde_json::json;

use crate::efg::{
    believed_action_utilities, believed_utility_from, node_values, reach_all,
    weighted_best_response, Assessment, Game, InfosetId, NodeValues,
};
use crate::plausibility::{
    construct_order_given_profile, update_order_given_belief, Contradiction, OrderUpdate,
};

/// Default tolerance for rationality and Bayes checks.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalityReport {
    pub pass: bool,
    /// Largest gain of a single-infoset pure deviation, floored at 0.
    pub max_violation: f64,
    /// Infoset and action attaining `max_violation`, when it is positive.
    pub witness: Option<(InfosetId, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BayesReport {
    pub pass: bool,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgmReport {
    pub pass: bool,
    pub certificate: Option<Contradiction>,
    /// Set when the beliefs are not distributions and no order was built.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PbeReport {
    pub sequential_rationality: RationalityReport,
    pub bayes: BayesReport,
    pub agm: AgmReport,
}

impl PbeReport {
    pub fn pass(&self) -> bool {
        self.sequential_rationality.pass && self.bayes.pass && self.agm.pass
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.sequential_rationality.pass {
            out.push("sequential_rationality");
        }
        if !self.bayes.pass {
            out.push("bayes");
        }
        if !self.agm.pass {
            out.push("agm");
        }
        out
    }

    pub fn to_json(&self, game: &Game) -> serde_json::Value {
        let witness = self.sequential_rationality.witness.map(|(i, a)| {
            let s = game.infoset(i);
            json!({ "infoset": s.name(), "action": s.actions()[a] })
        });
        json!({
            "pass": self.pass(),
            "sequential_rationality": {
                "pass": self.sequential_rationality.pass,
                "max_violation": self.sequential_rationality.max_violation,
                "witness": witness,
            },
            "bayes": { "pass": self.bayes.pass, "max_deviation": self.bayes.max_deviation },
            "agm": {
                "pass": self.agm.pass,
                "certificate": self.agm.certificate.as_ref().map(|c| c.to_json(game)),
                "error": self.agm.error,
            },
        })
    }
}

fn local_gains(
    game: &Game,
    assessment: &Assessment,
    values: &NodeValues,
) -> (f64, Option<(InfosetId, usize)>) {
    let mut best = 0.0;
    let mut witness = None;
    for i in 0..game.num_infosets() {
        let id = InfosetId(i);
        let q = believed_action_utilities(game, assessment, values, id);
        let ub: f64 = q
            .iter()
            .zip(assessment.strategy.row(id))
            .map(|(v, p)| v * p)
            .sum();
        for (a, v) in q.iter().enumerate() {
            let gain = v - ub;
            if gain > best {
                best = gain;
                witness = Some((id, a));
            }
        }
    }
    (best, witness)
}

/// Checks that no single-infoset pure deviation gains more than `tol` in believed utility.
pub fn is_sequentially_rational(
    game: &Game,
    assessment: &Assessment,
    tol: f64,
) -> RationalityReport {
    let values = node_values(game, &assessment.strategy);
    let (max_violation, witness) = local_gains(game, assessment, &values);
    RationalityReport {
        pass: max_violation <= tol,
        max_violation,
        witness,
    }
}

/// Max over infosets and actions of U^B(σ|_{I→a}, μ | I) − U^B(σ, μ | I), floored at 0.
pub fn worst_case_local_regret(game: &Game, assessment: &Assessment) -> f64 {
    let values = node_values(game, &assessment.strategy);
    local_gains(game, assessment, &values).0
}

/// Checks that belief rows are distributions and follow Bayes' rule wherever the infoset is reached.
pub fn satisfies_bayes(game: &Game, assessment: &Assessment, tol: f64) -> BayesReport {
    let reach = reach_all(game, &assessment.strategy);
    let mut dev: f64 = 0.0;
    for (i, s) in game.infosets().iter().enumerate() {
        let mu = assessment.beliefs.row(InfosetId(i));
        let sum: f64 = mu.iter().sum();
        dev = dev.max((sum - 1.0).abs());
        if let Some(neg) = mu.iter().copied().filter(|p| *p < 0.0).reduce(f64::min) {
            dev = dev.max(-neg);
        }
        let ri: f64 = s.members().iter().map(|m| reach[m.0]).sum();
        if ri > 0.0 {
            for (m, p) in s.members().iter().zip(mu) {
                dev = dev.max((p - reach[m.0] / ri).abs());
            }
        }
    }
    BayesReport {
        pass: dev <= tol,
        max_deviation: dev,
    }
}

/// Checks whether some plausibility order rationalizes the assessment.
pub fn is_agm_consistent(game: &Game, assessment: &Assessment) -> AgmReport {
    let order = construct_order_given_profile(game, &assessment.strategy);
    match update_order_given_belief(order, &assessment.beliefs) {
        Ok(OrderUpdate::Consistent(_)) => AgmReport {
            pass: true,
            certificate: None,
            error: None,
        },
        Ok(OrderUpdate::Contradiction(c)) => AgmReport {
            pass: false,
            certificate: Some(c),
            error: None,
        },
        Err(e) => AgmReport {
            pass: false,
            certificate: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn is_pbe(game: &Game, assessment: &Assessment, tol: f64) -> PbeReport {
    PbeReport {
        sequential_rationality: is_sequentially_rational(game, assessment, tol),
        bayes: satisfies_bayes(game, assessment, tol),
        agm: is_agm_consistent(game, assessment),
    }
}

/// Best gain in believed utility at `infoset` from changing the owner's play
/// at `infoset` and every later infoset of the owner below it.
pub fn full_believed_regret(game: &Game, assessment: &Assessment, infoset: InfosetId) -> f64 {
    let s = game.infoset(infoset);
    let mu = assessment.beliefs.row(infoset);
    let starts: Vec<_> = s
        .members()
        .iter()
        .copied()
        .zip(mu.iter().copied())
        .collect();
    let (_, best) = weighted_best_response(game, &assessment.strategy, s.player(), &starts);
    let values = node_values(game, &assessment.strategy);
    best - believed_utility_from(game, assessment, &values, infoset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efg::{BeliefSystem, GameBuilder, StrategyProfile};

    /// Chance reaches x, y, z with 0.2, 0.6, 0.2; x and y form player 1's infoset.
    fn bayes_game() -> Game {
        let mut b = GameBuilder::new(2);
        let r = b.chance("r");
        let x = b.decision("x", 1);
        let y = b.decision("y", 1);
        let z = b.terminal("z", vec![0.0, 0.0]);
        b.chance_edge(r, "x", x, 0.2);
        b.chance_edge(r, "y", y, 0.6);
        b.chance_edge(r, "z", z, 0.2);
        for (p, t, u) in [(x, "x", 1.0), (y, "y", 3.0)] {
            let l = b.terminal(format!("{t}l"), vec![u, 0.0]);
            let m = b.terminal(format!("{t}m"), vec![0.0, 0.0]);
            b.edge(p, "l", l);
            b.edge(p, "m", m);
        }
        b.infoset("I", 1, &[x, y], ["l", "m"]);
        b.build().unwrap()
    }

    #[test]
    fn bayes_deviation() {
        let g = bayes_game();
        let a = Assessment::new(StrategyProfile::uniform(&g), BeliefSystem::uniform(&g));
        let r = satisfies_bayes(&g, &a, DEFAULT_TOL);
        assert!(!r.pass);
        assert!((r.max_deviation - 0.25).abs() < 1e-12);
        let fixed = Assessment::new(
            a.strategy.clone(),
            BeliefSystem::from_rows(&g, vec![vec![0.25, 0.75]]).unwrap(),
        );
        assert!(satisfies_bayes(&g, &fixed, DEFAULT_TOL).pass);
    }

    #[test]
    fn dominated_deviation_detected() {
        let g = bayes_game();
        let s = StrategyProfile::from_rows(&g, vec![vec![0.0, 1.0]]).unwrap();
        let a = Assessment::new(
            s,
            BeliefSystem::from_rows(&g, vec![vec![0.25, 0.75]]).unwrap(),
        );
        let r = is_sequentially_rational(&g, &a, DEFAULT_TOL);
        assert!(!r.pass);
        assert!((r.max_violation - 2.5).abs() < 1e-12);
        assert_eq!(r.witness, Some((InfosetId(0), 0)));
        assert_eq!(worst_case_local_regret(&g, &a), r.max_violation);
        // No later decisions below I: full regret equals the local one.
        assert!((full_believed_regret(&g, &a, InfosetId(0)) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn exact_equilibrium_has_no_regret() {
        let g = bayes_game();
        let s = StrategyProfile::from_rows(&g, vec![vec![1.0, 0.0]]).unwrap();
        let a = Assessment::new(
            s,
            BeliefSystem::from_rows(&g, vec![vec![0.25, 0.75]]).unwrap(),
        );
        let rep = is_pbe(&g, &a, DEFAULT_TOL);
        assert!(rep.pass(), "{:?}", rep.failures());
        assert_eq!(worst_case_local_regret(&g, &a), 0.0);
        assert!(full_believed_regret(&g, &a, InfosetId(0)).abs() < 1e-12);
        let j = rep.to_json(&g);
        assert_eq!(j["agm"]["pass"], true);
        assert!(j["sequential_rationality"]["witness"].is_null());
    }
}
