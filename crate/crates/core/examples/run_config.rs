//! Running an experiment from a TOML string through the library entry
//! point used by the binary; results go to a temporary directory.

use pmtb::cli::{run_experiment, ExperimentConfig, ExperimentKind, RunArgs};

const CONFIG: &str = r#"
seed = 7

[metric]
family = "schwarzschild"
n = 3
m = 1.0
r0 = 1.0

[experiment]
kind = "sweep"
theorem = "equivalent-form"

[grid]
c = [0.0, 0.25, 0.5, 1.0]
"#;

fn main() -> pmtb::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let out = std::env::temp_dir().join("pmtb-run-config-example");
    let args = RunArgs {
        out: Some(out),
        ..RunArgs::default()
    };
    let outcome = run_experiment(ExperimentKind::Sweep, Some(&cfg), &args)?;
    print!("{}", outcome.summary);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
