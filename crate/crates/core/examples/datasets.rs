//! Generates every built-in dataset, writes one to JSON lines and reads it
//! back.
//!
//! cargo run --example datasets

use equicalib::dataset::{load_dataset_with_header, save_dataset, DatasetHeader};
use equicalib::generators::{DatasetSpec, VectorFieldKind};

fn main() -> equicalib::Result<()> {
    let specs = [
        DatasetSpec::Circle20,
        DatasetSpec::SwissRoll { correct_ratio: 0.5, n_per_arm: 100 },
        DatasetSpec::Permutation24,
        DatasetSpec::PointcloudGence,
        DatasetSpec::VectorField { field: VectorFieldKind::Spiral, n: 500, radius: 2.0 },
        DatasetSpec::CalibratedGaussian { n: 1000, dims: 2, s_min: 0.1, s_max: 2.0 },
    ];
    for spec in &specs {
        let ds = spec.generate(7)?;
        let what = if ds.labels.is_some() { format!("{} classes", ds.num_classes()) } else { "regression".to_string() };
        println!("{:<48} {:>5} points, {what}", spec.to_string(), ds.len());
    }

    let spec = DatasetSpec::SwissRoll { correct_ratio: 0.25, n_per_arm: 20 };
    let ds = spec.generate(3)?;
    let path = std::env::temp_dir().join("equicalib_swiss.jsonl");
    save_dataset(&ds, &DatasetHeader::new(ds.kind, spec.to_string(), Some(3)), &path)?;
    let (header, back) = load_dataset_with_header(&path)?;
    println!("\nwrote and re-read {}: {:?}", path.display(), header.map(|h| h.spec));
    assert_eq!(back, ds);
    println!("round trip is exact");
    Ok(())
}
