//! Samples from the seeded synthetic world used by the ablation: a biased
//! pretraining corpus, counterfactual pairs and evaluation items.

use fairtrip::corpus::Label;
use fairtrip::synth::World;

fn main() {
    let world = World::default();
    let corpus = world.corpus();
    let pairs = world.pairs();
    let items = world.eval_items();
    println!("{} corpus sentences, {} pairs, {} eval items", corpus.len(), pairs.len(), items.len());
    println!("\ncorpus:");
    for s in corpus.iter().take(5) {
        println!("  {s}");
    }
    println!("\npairs:");
    for p in pairs.iter().step_by(97).take(4) {
        println!("  {} | {}", p.sent_more, p.sent_less);
    }
    println!("\neval items:");
    for it in items.iter().step_by(301).take(3) {
        println!("  [{}]", it.category);
        for l in Label::ALL {
            println!("    {:<15} {}", l.as_str(), it.option(l));
        }
    }
}
