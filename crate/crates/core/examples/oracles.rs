//! The closed-form oracle suite run by `pmtb validate-oracles`.

use pmtb::cli::oracles::validate_oracles;

fn main() -> pmtb::Result<()> {
    let rep = validate_oracles(&[3, 4, 5], 1e-8)?;
    for e in &rep.entries {
        println!(
            "{:<28} n={:<4} {:>3} cases  max deviation {:.2e}  {}",
            e.check,
            e.n.map(|n| n.to_string()).unwrap_or_else(|| "all".into()),
            e.cases,
            e.max_deviation,
            if e.passed() { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
