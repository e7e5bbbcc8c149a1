//! ICAT from published per-category SS values and LM Score, using the
//! unweighted mean of the category SS values.

use fairtrip::biaseval::compute_icat;

fn main() -> anyhow::Result<()> {
    let rows = [
        ("BERT", [60.28, 57.03, 59.70], 84.17),
        ("BERT + triplet", [55.68, 56.82, 57.13], 82.89),
        ("GPT-2 + triplet", [55.43, 57.33, 58.31], 90.58),
    ];
    println!("{:<16} {:>8} {:>8} {:>8}", "model", "mean SS", "LM", "ICAT");
    for (name, ss, lm) in rows {
        let mean = ss.iter().sum::<f64>() / ss.len() as f64;
        println!("{name:<16} {mean:>8.3} {lm:>8.2} {:>8.2}", compute_icat(mean, lm)?);
    }
    Ok(())
}
