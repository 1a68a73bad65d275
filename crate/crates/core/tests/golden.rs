// SPDX-License-Identifier: Apache-2.0

//! Trace regression against a stored sample. Set `PMALAB_BLESS=1` to
//! rewrite the stored file after an intended change.

use std::path::PathBuf;

use pmalab_core::harness::trace::TRACE_HEADER;
use pmalab_core::harness::{run_scenario, Scenario};

/// Header plus every 250th sample of a 3 s default run.
fn sampled_trace() -> String {
    let s = Scenario {
        duration: 3.0,
        window: Some([1.0, 3.0]),
        ..Scenario::default()
    };
    let o = run_scenario(&s).unwrap();
    let mut buf = Vec::new();
    o.trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let mut out = format!("{}\n", lines.next().unwrap());
    for line in lines.step_by(250) {
        out.push_str(line);
        out.push('\n');
    }
    out
}

#[test]
fn default_run_matches_stored_sample() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/default_sine.csv");
    let got = sampled_trace();
    if std::env::var_os("PMALAB_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(want.lines().next(), Some(TRACE_HEADER));
    assert_eq!(got.lines().count(), want.lines().count());
    for (g, w) in got.lines().zip(want.lines()).skip(1) {
        let parse = |l: &str| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>();
        for (a, b) in parse(g).into_iter().zip(parse(w)) {
            let tol = 1e-9 * b.abs().max(1e-3);
            assert!(
                a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= tol,
                "{g}\n!=\n{w}"
            );
        }
    }
}
