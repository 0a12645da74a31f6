use std::path::Path;
use std::process::ExitCode;
use zerolab::harness::acceptance::{run_all, Golden};

// Criterion 7 fails its 0.05 annulus-mass gap at n = 128 with the canonical
// mix 0.5 (gap about 0.13; it drops below 0.05 only around n = 256). Left red.
const KNOWN_RED: [usize; 1] = [7];

fn main() -> ExitCode {
    let golden = match Golden::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../golden")) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("golden: {e}");
            return ExitCode::FAILURE;
        }
    };
    let outcomes = run_all(&golden);
    let mut ok = true;
    for o in &outcomes {
        println!("{}", o.line());
        if o.pass == KNOWN_RED.contains(&o.id) {
            ok = false;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} passed, known red {KNOWN_RED:?}", outcomes.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("acceptance: outcome differs from the expected set");
        ExitCode::FAILURE
    }
}
