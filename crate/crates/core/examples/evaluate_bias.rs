//! Computes SS, LM Score and ICAT for the shipped evaluation items twice:
//! from an external score file and from an untrained toy model.

use fairtrip::biaseval::{build_report, render_table, score_with_toy, scored_from_rows};
use fairtrip::corpus::{read_eval_items, read_scores};
use fairtrip::encoder::{ToyModel, Vocab};

fn main() -> anyhow::Result<()> {
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let items = read_eval_items(data.join("eval_items.jsonl"))?;

    let rows = read_scores(data.join("scores.jsonl"), Some(&items))?;
    let external = build_report("score-file", &scored_from_rows(&items, &rows)?)?;

    let vocab = Vocab::build(items.iter().flat_map(|i| i.options.iter().map(|o| o.text.as_str())), 1);
    let model = ToyModel::init(vocab, 32, 0);
    let scoring = score_with_toy(&model, &items);
    let toy = build_report("untrained-toy", &scoring.scored)?;

    print!("{}", render_table(&[&external, &toy]));
    println!("\npooled SS {:.2}, category-mean SS {:.2}", external.overall.ss, external.category_mean.ss);
    Ok(())
}
