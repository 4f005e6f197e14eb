//! Drives the command-line interface in-process: generate a dataset, analyze
//! its orbits, and evaluate a bound, writing everything to a temp directory.
//!
//! cargo run --example cli_pipeline

use equicalib::cli::run;

fn main() {
    let dir = std::env::temp_dir().join("equicalib_cli_pipeline");
    let out = dir.to_str().expect("utf-8 temp path");
    let data = dir.join("swiss.jsonl");
    let data = data.to_str().expect("utf-8 temp path");
    let steps: Vec<Vec<&str>> = vec![
        vec!["gen", "swiss", "--ratio", "0.5", "--n", "50", "-o", data],
        vec!["analyze", "--data", data, "--group", "z-swap"],
        vec!["bound", "m-prime", "--data", data, "--group", "z-swap"],
        vec!["bound", "hoeffding", "--epsilon", "0.05", "--delta", "0.01"],
        vec!["example", "--id", "4.2"],
    ];
    for step in steps {
        let mut args = vec!["equicalib", "--seed", "1", "--out-dir", out];
        args.extend(&step);
        println!("$ {}", args[1..].join(" "));
        let code = run(args);
        println!("(exit {code})\n");
    }
    for entry in std::fs::read_dir(&dir).expect("output directory") {
        println!("{}", entry.expect("entry").path().display());
    }
}
