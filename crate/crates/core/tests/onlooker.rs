use deskbench::agent::onlooker::{check_environment, summarize_behavior, ErrorRepository, RemediationError, Remediator};
use deskbench::corruption::{Condition, CorruptedEnv, CorruptionKind, CorruptionSpec};
use deskbench::sim::state::{Action, ExternalEvent};
use deskbench::sim::TaskSuite;

fn condition(kind: CorruptionKind) -> Condition {
    Condition::single(CorruptionSpec::default_for(kind))
}

#[test]
fn checker_flags_exactly_the_environment_errors() {
    let repo = ErrorRepository::builtin();
    for task in &TaskSuite::builtin().tasks {
        let mut clean = CorruptedEnv::new(task, &Condition::clean(), 1);
        assert_eq!(check_environment(&clean.observe(), &repo), None, "{}", task.id);
        for (kind, remediation) in [
            (CorruptionKind::Verification, "unlock"),
            (CorruptionKind::NetworkError, "restore-network"),
        ] {
            let mut env = CorruptedEnv::new(task, &condition(kind), 1);
            let reminder = check_environment(&env.observe(), &repo).unwrap_or_else(|| panic!("{} {kind}", task.id));
            assert_eq!(reminder.remediation, remediation);
            let mut fixer = Remediator::new();
            fixer.remediate(&mut env.state, &reminder).unwrap();
            assert_eq!(check_environment(&env.observe(), &repo), None, "{} {kind} after remediation", task.id);
            assert_eq!(fixer.remediate(&mut env.state, &reminder), Err(RemediationError::AlreadyAttempted));
        }
    }
}

#[test]
fn unknown_remediation_is_rejected() {
    let task = &TaskSuite::builtin().tasks[0];
    let mut env = CorruptedEnv::new(task, &condition(CorruptionKind::Verification), 0);
    let mut reminder = check_environment(&env.observe(), &ErrorRepository::builtin()).unwrap();
    reminder.remediation = "reboot".into();
    assert_eq!(
        Remediator::new().remediate(&mut env.state, &reminder),
        Err(RemediationError::Unknown("reboot".into()))
    );
}

#[test]
fn external_changes_are_not_credited_to_the_user() {
    let suite = TaskSuite::builtin();
    for kind in [CorruptionKind::AccidentalTouch, CorruptionKind::AppMinimization] {
        let mut seen = 0;
        for task in &suite.tasks {
            let mut env = CorruptedEnv::new(task, &condition(kind), 7);
            let mut before = env.observe();
            while !env.state.is_terminal() {
                let out = env.step(&Action::Wait).unwrap();
                let s = summarize_behavior(&before, &Action::Wait, &out.observation, &out.events);
                if out.events.is_empty() {
                    assert!(!s.text.contains("external"), "{}: {}", task.id, s.text);
                    if out.observation.meta_digest() == before.meta_digest() {
                        assert!(s.text.ends_with("with no observable change."), "{}", s.text);
                    }
                } else {
                    seen += 1;
                    let (head, rest) = s.text.split_once(". ").expect("event sentence follows the action");
                    assert!(head.starts_with("The user"), "{}", s.text);
                    let want = match out.events[0] {
                        ExternalEvent::AccidentalTouch { .. } => "An external click",
                        ExternalEvent::AppMinimization { .. } => "An external app minimization occurred",
                    };
                    assert!(rest.starts_with(want), "{}", s.text);
                }
                before = out.observation;
            }
        }
        assert_eq!(seen, suite.tasks.len(), "{kind}: one event per episode");
    }
}
