use clap::Parser;

fn main() {
    let cli = circulant_sve::cli::Cli::parse();
    if let Err(err) = circulant_sve::cli::run(&cli) {
        std::process::exit(circulant_sve::cli::report_error(&err));
    }
}
