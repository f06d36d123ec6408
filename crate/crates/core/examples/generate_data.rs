//! Generate a synthetic dataset, split it across clients and write it as CSV.
//!
//! cargo run --example generate_data -- [out_dir]

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use safl::{generate, partition, DatasetSpec, Modality};

fn main() -> safl::Result<()> {
    let out = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "target/example-data".into()),
    );
    std::fs::create_dir_all(&out)?;

    for complexity in [0.0, 0.5, 0.9] {
        let spec = DatasetSpec {
            name: format!("sensor_c{:02}", (complexity * 10.0) as u32),
            size: 600,
            modality: Modality::Sensor,
            classes: 4,
            complexity,
            seed: 11,
        };
        let ds = generate(&spec)?;
        let shards = partition(&ds, 6, 3)?;
        let sizes: Vec<usize> = shards.iter().map(|s| s.dataset.len()).collect();
        println!(
            "{}: {} rows x {} features, separation {:.2}, class counts {:?}, shards {:?}",
            spec.name,
            ds.len(),
            ds.dim(),
            safl::datagen::class_separation(complexity),
            ds.class_counts(),
            sizes
        );
        let path = out.join(format!("{}.csv", spec.name));
        ds.write_csv(BufWriter::new(File::create(&path)?))?;
    }
    println!("wrote CSVs to {}", out.display());
    Ok(())
}
