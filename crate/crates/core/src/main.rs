use clap::Parser;

fn main() {
    let cli = calabi_kit::cli::Cli::parse();
    std::process::exit(calabi_kit::cli::run(cli));
}
