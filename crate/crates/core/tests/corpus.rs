use std::path::PathBuf;

use coeffect_core::harness::{
    capsule_violations, check_subject, immutability_violations, load_corpus, verify_capsule,
    verify_immutability, verify_subject_reduction, CorpusEntry, System, Verdict,
};

fn corpus() -> Vec<CorpusEntry> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    load_corpus(&dir).expect("corpus loads")
}

fn outcome(e: &CorpusEntry, system: System) -> String {
    let expected = match system {
        System::Modifiers => e.expected_type.as_ref(),
        System::Sharing => None,
    };
    match check_subject(&e.subject, system, expected) {
        Ok(_) => "ok".into(),
        Err(err) => err.code.to_string(),
    }
}

#[test]
fn static_expectations() {
    for e in corpus() {
        if let Some(want) = &e.expect.sharing {
            assert_eq!(&outcome(&e, System::Sharing), want, "{} sharing", e.name);
        }
        if let Some(want) = &e.expect.modifiers {
            assert_eq!(
                &outcome(&e, System::Modifiers),
                want,
                "{} modifiers",
                e.name
            );
        }
        if let Some(want) = e.expect.capsule {
            let j = check_subject(&e.subject, System::Sharing, None).unwrap();
            assert_eq!(j.is_capsule(), want, "{} capsule", e.name);
        }
    }
}

#[test]
fn theorems_hold_on_typed_entries() {
    for e in corpus() {
        for system in [System::Sharing, System::Modifiers] {
            if check_subject(&e.subject, system, None).is_err() {
                continue;
            }
            let v = verify_subject_reduction(&e.subject, system, None);
            assert!(v.is_pass(), "{} {system}: {v:?}", e.name);
            let v = verify_capsule(&e.subject, system);
            assert!(!v.is_fail(), "{} {system}: {v:?}", e.name);
        }
        let v = verify_immutability(&e.subject);
        assert!(!v.is_fail(), "{}: {v:?}", e.name);
        if let Some(t) = &e.expected_type {
            let v = verify_subject_reduction(&e.subject, System::Modifiers, Some(t));
            assert!(v.is_pass(), "{} at {t}: {v:?}", e.name);
        }
    }
}

#[test]
fn negative_controls_violate_dynamically() {
    let mut seen = 0;
    for e in corpus() {
        match e.expect.violates.as_deref() {
            Some("capsule") => {
                assert!(matches!(
                    verify_capsule(&e.subject, System::Sharing),
                    Verdict::NotApplicable { .. }
                ));
                let shared = capsule_violations(
                    &e.subject.table,
                    &e.subject,
                    System::Sharing,
                    &Default::default(),
                )
                .unwrap();
                assert!(!shared.is_empty(), "{}", e.name);
            }
            Some("immutability") => {
                assert!(matches!(
                    verify_immutability(&e.subject),
                    Verdict::NotApplicable { .. }
                ));
                let n = immutability_violations(&e.subject.table, &e.subject).unwrap_err();
                assert!(n.step > 0, "{}: {n}", e.name);
            }
            Some(other) => panic!("unknown violation kind {other}"),
            None => continue,
        }
        seen += 1;
    }
    assert_eq!(seen, 2);
}
