use clap::Parser;
use spread_detect::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = cli::run(args, &mut stdout) {
        eprintln!("{}", cli::error_json(&e));
        std::process::exit(1);
    }
}
