use std::io;

fn main() {
    let code = behavior_metrics::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
