//! Runs builtin scenarios through the library API and writes their reports.

use cyclostab::scenario::{builtin, list_scenarios, run_many};

fn main() -> cyclostab::Result<()> {
    for info in list_scenarios() {
        println!("{:<16} {}", info.name, info.description);
    }
    let cfgs = vec![builtin("linear-analysis")?, builtin("linear-rd")?];
    let out = std::env::temp_dir().join("cyclostab-scenarios");
    for result in run_many(&cfgs, 2) {
        for path in result?.write_to(&out)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
