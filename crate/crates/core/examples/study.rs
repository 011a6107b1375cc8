//! A small taxa study comparing NJ with the hyperbolic method, written to a
//! temporary directory and summarised from the CSV.
//!
//! cargo run --release --example study

use hyptree::cli::{cmd_study, read_study_csv, StudyArgs, StudyKind, STUDY_FILE};

fn main() -> hyptree::Result<()> {
    let out = std::env::temp_dir().join("hyptree-study-example");
    let args = StudyArgs {
        grid: vec![5, 10, 15],
        trees: Some(3),
        replicates: Some(2),
        m: 10,
        seed: 42,
        ..StudyArgs::new(StudyKind::Taxa, out.clone())
    };
    let outcome = cmd_study(&args)?;
    println!("{}", outcome.summary);

    let rows = read_study_csv(&std::fs::read_to_string(out.join(STUDY_FILE)).expect("study output"))?;
    let mean_time = |m: &str| {
        let t: Vec<f64> = rows.iter().filter(|r| r.method == m).map(|r| r.wall_time_s).collect();
        t.iter().sum::<f64>() / t.len() as f64
    };
    println!("mean wall time: nj {:.2e} s, hyperbolic {:.2e} s", mean_time("nj"), mean_time("hyperbolic"));
    println!("results in {}", out.display());
    Ok(())
}
