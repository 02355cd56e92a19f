use std::sync::Arc;

use legalsim::rng::stream;
use legalsim::rules::ActiveGate;
use legalsim::token::{ActionKind, ActionToken};
use legalsim::{load_rules, Env, EnvConfig, EnvError, JudgeProfile, Regime, Role};

fn env(regime: Regime) -> Env {
    Env::new(EnvConfig::default(), Arc::new(regime.load().unwrap())).unwrap()
}

const BLOCKED_BY_STAY: [ActionKind; 4] =
    [ActionKind::FileMotion, ActionKind::RequestDocs, ActionKind::MoveCompel, ActionKind::MoveSanctions];

#[test]
fn tax_petition_then_authority() {
    let e = env(Regime::Tax);
    let mut s = e.reset(JudgeProfile::PERMISSIVE, 1);
    let mut rng = stream(1);
    let petition = ActionToken::new(ActionKind::FileProceeding).with("proceeding_type", "tax_petition");
    let r = e.step(&mut s, Role::Defendant, &petition, &mut rng).unwrap();
    assert_eq!(r.ruling.rules_fired, ["tax_collection_stay"]);
    assert_eq!(s.gate("collection_stay").unwrap().remaining, 20);
    assert_eq!(r.defendant.fees, 2.0);
    assert_eq!(s.defendant.delay_credit, 1.0);
    for k in [ActionKind::RequestDocs, ActionKind::MoveCompel, ActionKind::MoveSanctions] {
        assert!(!e.legal_actions(&s, Role::Plaintiff).unwrap().contains(k), "{k:?} should be stayed");
    }
    assert!(matches!(
        e.step(&mut s.clone(), Role::Plaintiff, &ActionToken::new(ActionKind::MoveCompel), &mut rng),
        Err(EnvError::Blocked(ActionKind::MoveCompel, Role::Plaintiff))
    ));

    // The plaintiff's NOOP ticks the stay to 19; the citation then adds 3.
    e.step(&mut s, Role::Plaintiff, &ActionToken::noop(), &mut rng).unwrap();
    assert_eq!(s.gate("collection_stay").unwrap().remaining, 19);
    let cite = ActionToken::new(ActionKind::ReferenceAuthority).with("code", "26 USC 6331");
    e.step(&mut s, Role::Defendant, &cite, &mut rng).unwrap();
    // +3 from the rule, -1 from the end-of-step tick
    assert_eq!(s.gate("collection_stay").unwrap().remaining, 21);
    assert_eq!(s.citations, ["26 USC 6331"]);
}

#[test]
fn offshore_complexity_keeps_sanctions_illegal() {
    let e = env(Regime::Tax);
    let mut s = e.reset(JudgeProfile::STRICT, 2);
    s.active_gates.push(ActiveGate { name: "offshore_complexity".into(), remaining: 5 });
    let legal = e.legal_actions(&s, Role::Defendant).unwrap();
    assert!(!legal.contains(ActionKind::MoveSanctions));
    assert!(legal.contains(ActionKind::RequestDocs));

    // With the collection stay over and offshore review still running,
    // sanctions stay off the table.
    let mut rng = stream(2);
    let petition = ActionToken::new(ActionKind::FileProceeding).with("proceeding_type", "tax_petition");
    e.step(&mut s, Role::Plaintiff, &petition, &mut rng).unwrap();
    s.active_gates.retain(|g| g.name != "collection_stay");
    assert!(!e.legal_actions(&s, Role::Plaintiff).unwrap().contains(ActionKind::MoveSanctions));
}

#[test]
fn chapter_11_stay_lasts_sixty_steps() {
    let e = env(Regime::Bankruptcy);
    let mut s = e.reset(JudgeProfile::PERMISSIVE, 3);
    let mut rng = stream(3);
    let filing = ActionToken::new(ActionKind::FileProceeding).with("proceeding_type", "bankruptcy").with("chapter", 11);
    e.step(&mut s, Role::Defendant, &filing, &mut rng).unwrap();
    let mut role = Role::Plaintiff;
    for step in 1..=60 {
        for who in Role::BOTH {
            let legal = e.legal_actions(&s, who).unwrap();
            for k in BLOCKED_BY_STAY {
                assert!(!legal.contains(k), "{k:?} legal for {who} at step {step}");
            }
        }
        e.step(&mut s, role, &ActionToken::noop(), &mut rng).unwrap();
        role = role.opponent();
    }
    assert!(s.gate("automatic_stay").is_none());
    for who in Role::BOTH {
        let legal = e.legal_actions(&s, who).unwrap();
        for k in BLOCKED_BY_STAY {
            assert!(legal.contains(k), "{k:?} still blocked for {who}");
        }
    }
}

#[test]
fn unmatched_params_fire_nothing() {
    let e = env(Regime::Bankruptcy);
    let mut s = e.reset(JudgeProfile::PERMISSIVE, 4);
    let tok = ActionToken::new(ActionKind::FileProceeding).with("proceeding_type", "bankruptcy").with("chapter", 13);
    let r = e.step(&mut s, Role::Defendant, &tok, &mut stream(4)).unwrap();
    assert!(r.ruling.rules_fired.is_empty());
    assert!(s.active_gates.is_empty());
}

#[test]
fn schema_errors_name_their_location() {
    let bad = r#"{"gates":{},"rules":[{"name":"r1","when":{"action":"FILE_MOTION"},
        "effects":[{"type":"set_gate","gate":"nowhere","duration":3}]}]}"#;
    let msg = load_rules(bad).unwrap_err().to_string();
    assert!(msg.contains("r1") && msg.contains("nowhere"), "{msg}");
    assert!(load_rules(r#"{"gates": {"#).unwrap_err().to_string().contains("JSON"));
}

#[test]
fn every_regime_plays_a_random_episode() {
    for regime in Regime::ALL {
        let e = env(regime);
        let mut s = e.reset(JudgeProfile::STRICT, 5);
        let mut rng = stream(5);
        let mut role = Role::Plaintiff;
        let mut n = 0;
        while !s.is_terminated() {
            let legal: Vec<ActionKind> = e.legal_actions(&s, role).unwrap().iter().collect();
            let kind = legal[n % legal.len()];
            let tok =
                e.rules().exemplar_params(kind).map_or(ActionToken::new(kind), |p| ActionToken { kind, params: p });
            e.step(&mut s, role, &tok, &mut rng).unwrap();
            role = role.opponent();
            n += 1;
        }
        assert!(n <= 2 * e.config().max_steps as usize);
    }
}
