//! Club-size distributions and the count posterior they induce.

use bidding_clubs::distributions::dominates;
use bidding_clubs::{ClubSizeDistribution, CountDistribution};

fn show(label: &str, p: &CountDistribution) {
    let terms: Vec<String> = p.iter().map(|(c, q)| format!("{c}:{q:.4}")).collect();
    println!("{label:<10} mean {:.3}  {}", p.mean(), terms.join(" "));
}

fn main() -> bidding_clubs::Result<()> {
    let sizes = ClubSizeDistribution::new(CountDistribution::from_pairs(&[(1, 0.6), (2, 0.3), (3, 0.1)])?, 3)?;
    let n = 3;
    for k in 1..=3 {
        show(&format!("P^{{{n},{k}}}"), &sizes.compose(n, k)?);
    }
    for k in 2..=3 {
        let merged = sizes.compose(n + k - 1, 1)?;
        show(&format!("P^{{{},1}}", n + k - 1), &merged);
        println!(
            "  dominates P^{{{n},{k}}}: {}  dominates P^{{{n},1}}: {}",
            dominates(&merged, &sizes.compose(n, k)?),
            dominates(&merged, &sizes.compose(n, 1)?)
        );
    }
    Ok(())
}
