//! Regenerates the fixture files under `fixtures/` from the catalog
//! constructors. Run after changing a catalog model or example trace:
//!
//! ```text
//! cargo run --example gen_fixtures
//! ```

use std::fs;
use std::path::PathBuf;

use mlproc::catalog;
use mlproc::conformance::serialize_trace;
use mlproc::dsl::print_model;

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    fs::create_dir_all(&dir).expect("create fixtures directory");

    let mut files: Vec<(String, String)> = vec![
        (
            "ml_dev.proc".into(),
            print_model(&catalog::ml_dev_process()),
        ),
        ("marl.proc".into(), print_model(&catalog::marl_process())),
    ];
    for (name, trace) in catalog::example_traces() {
        files.push((format!("{name}.trace"), serialize_trace(&trace)));
    }

    for (name, content) in files {
        let path = dir.join(&name);
        fs::write(&path, content).expect("write fixture file");
        println!("wrote {}", path.display());
    }
}
