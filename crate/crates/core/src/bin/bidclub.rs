use clap::Parser;

fn main() {
    let args = bidding_clubs::cli::Args::parse();
    std::process::exit(bidding_clubs::cli::main_with(args));
}
