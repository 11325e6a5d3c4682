//! Drive the command-line front end from code: simulate a stock, then run the
//! whole analysis on its quotes.
//!
//! Run with: `cargo run --release --example pipeline`

use volcollapse::cli;

fn main() {
    let dir = std::env::temp_dir().join("volcollapse-pipeline-example");
    let out = dir.to_string_lossy().into_owned();
    let steps: [&[&str]; 2] = [
        &[
            "simulate",
            "--label",
            "demo",
            "--days",
            "200",
            "--events-per-day",
            "2000",
            "--seed",
            "5",
        ],
        &["pipeline", &format!("{out}/demo_quotes.csv"), "--input-format", "mid"],
    ];
    for step in steps {
        let args = ["volcollapse", "--output-dir", &out]
            .into_iter()
            .chain(step.iter().copied());
        let code = cli::run(args);
        if code != 0 {
            std::process::exit(code);
        }
    }
    let mut files: Vec<String> = std::fs::read_dir(&dir)
        .expect("output directory exists")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    println!("\n{} artifacts in {out}:", files.len());
    for f in files {
        println!("  {f}");
    }
}
