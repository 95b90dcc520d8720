use clap::Parser;
use pfaffian_cli::{finish, run, Cli};

fn main() {
    let cli = Cli::parse();
    let outcome = run(&cli);
    println!("{}", outcome.summary);
    std::process::exit(finish(&cli, &outcome));
}
