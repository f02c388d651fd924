//! Loads a config from text and prints the start of its bid table.

use bidding_clubs::cli::{bid_table, parse_config, Experiment};

const CONFIG: &str = "
valuations = power 2
grid_points = 11
bid_models = 2, 3, 2:2, 3:2

[gamma_A]
1 0.7
2 0.3
";

fn main() {
    let cfg = match parse_config(CONFIG, Some(Experiment::BidTable)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    println!("config digest {}", cfg.digest());
    match bid_table(&cfg) {
        Ok(table) => print!("{table}"),
        Err(e) => eprintln!("{e}"),
    }
}
