//! Records a run's inputs and configuration in a manifest, then detects that
//! an input changed afterwards.

use fairtrip::manifest::RunManifest;
use fairtrip::trainer::TrainConfig;

fn main() -> anyhow::Result<()> {
    let dir = std::env::temp_dir().join("fairtrip-manifest-example");
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("corpus.txt");
    std::fs::write(&input, "he is a pilot\nshe is a pilot\n")?;

    let cfg = TrainConfig::default();
    let mut manifest = RunManifest::new("train", vec!["--seed".into(), "0".into()], cfg.seed, &cfg)?;
    manifest.add_input("lm_corpus", &input)?;
    let path = manifest.write(&dir)?;
    println!("wrote {}", path.display());
    println!("config hash {}", manifest.config_hash);

    let loaded = RunManifest::read(&path)?;
    println!("stale inputs now: {}", loaded.stale_inputs().len());
    std::fs::write(&input, "edited\n")?;
    for d in loaded.stale_inputs() {
        println!("stale after edit: {} ({})", d.path.display(), d.role);
    }
    Ok(())
}
