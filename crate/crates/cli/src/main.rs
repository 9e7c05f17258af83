use clap::Parser;
use jitdb_cli::{run, Args};

fn main() {
    let args = Args::parse();
    let stdin = std::io::stdin();
    let code = run(
        &args,
        stdin.lock(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    );
    std::process::exit(code);
}
