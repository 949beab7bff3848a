use pdgen_core::dataset::{load_bundle, shipped_bundle_dir, SHIPPED_DOMAINS};
use pdgen_core::validator::mutation::Mutation;
use pdgen_core::validator::{render_error, validate};

#[test]
fn every_operator_is_caught_on_every_ground_truth() {
    for d in SHIPPED_DOMAINS {
        let b = load_bundle(&shipped_bundle_dir(d)).unwrap();
        for c in b.cases.iter().chain(&b.examples) {
            assert!(validate(&b.domain, &c.ground_truth).ok(), "{} should be clean", c.id);
            let mut applied = 0;
            for m in Mutation::ALL {
                let Some(mutant) = m.apply(&b.domain, &c.ground_truth) else { continue };
                applied += 1;
                let report = validate(&b.domain, &mutant);
                assert!(
                    report.has_kind(m.expected_kind()),
                    "{}: {m:?} not flagged as {}; got {:?}",
                    c.id,
                    m.expected_kind(),
                    render_error(&report)
                );
            }
            assert!(applied >= 6, "{}: only {applied} operators applied", c.id);
        }
    }
}
