use clap::error::ErrorKind;
use clap::Parser;
use gnlm::cli::{self, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(threads) = cli.threads {
        // ignore "already initialized": only reachable in tests
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    if let Err(e) = cli::run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
