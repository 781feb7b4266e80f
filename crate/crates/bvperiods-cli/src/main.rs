use std::io::Write;

use bvperiods_cli::{run, Cli};
use clap::Parser;

fn main() {
    let out = run(Cli::parse());
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::io::stdout().flush().ok();
    std::process::exit(out.code);
}
