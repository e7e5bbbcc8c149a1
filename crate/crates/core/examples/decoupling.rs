//! Shows that the attraction gradient of the triplet loss ignores the
//! anchor-negative similarity, while pairwise InfoNCE couples the two.

use fairtrip::objectives::{pairwise_infonce, triplet_loss, LossConfig, TripletSims};

fn main() {
    let cfg = LossConfig::default();
    let s_ap = 0.6;
    println!("s_ap = {s_ap}, tau = {}", cfg.tau);
    println!("{:>6}  {:>16}  {:>16}", "s_an", "triplet dL/ds_ap", "InfoNCE dL/ds_ap");
    for k in 0..=10 {
        let s_an = -1.0 + 0.2 * k as f64;
        let t = triplet_loss(TripletSims { s_ap, s_an }, &cfg);
        let p = pairwise_infonce(s_ap, s_an, cfg.tau);
        println!("{s_an:>6.2}  {:>16.6}  {:>16.6}", t.d_s_ap, p.d_s_ap);
    }
}
