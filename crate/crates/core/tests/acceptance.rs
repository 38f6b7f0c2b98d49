//! Acceptance gate: every criterion at its stated tolerance under the
//! published seed, one test each. Each prints its PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads 1` for the table.

use sizebias::suite::{criterion_ids, run_one, shifted_poisson_note, PUBLISHED_SEED};

fn gate(id: &str) {
    let o = run_one(id, PUBLISHED_SEED).expect("known criterion");
    println!("{}", o.line());
    assert!(o.pass, "criterion {id}: {}", o.detail);
}

macro_rules! criteria {
    ($($name:ident => $id:literal),* $(,)?) => {
        $(#[test] fn $name() { gate($id); })*

        #[test]
        fn every_criterion_has_a_test() {
            let mut ids = vec![$($id),*];
            ids.sort();
            let mut all = criterion_ids();
            all.sort();
            assert_eq!(ids, all);
        }
    };
}

criteria! {
    c01_atom_table => "1",
    c02_dickman_rho => "2",
    c03_buchstab_omega => "3",
    c04a_smooth_fraction => "4a",
    c04b_rough_fraction => "4b",
    c05_independent_increments => "5",
    c06_deconvolution_certificates => "6",
    c07_catalogue_identities => "7",
    c08_renewal => "8",
    c09_midzuno => "9",
    c10_property_suite => "10",
}

#[test]
fn shifted_poisson_record() {
    let note = shifted_poisson_note(2.0).unwrap();
    println!(
        "NOTE 1+Poisson(2): X* vs X+Bernoulli({:.4}) sup pmf gap {:.1e}; via nu=delta0+2 delta1 {:.1e}; deconvolution {:?}",
        note.bernoulli_p, note.pmf_residual, note.measure_residual, note.deconvolution.verdict
    );
    assert!(note.pmf_residual < 1e-12 && note.measure_residual < 1e-12);
}
