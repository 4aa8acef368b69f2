use clap::Parser;
use dado_cli::{run, Cli};

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version are not failures
            std::process::exit(if e.use_stderr() {
                dado_cli::exit::INVALID
            } else {
                0
            });
        }
    };
    std::process::exit(run(&cli, &argv));
}
