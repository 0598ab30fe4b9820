use clap::Parser;

fn main() {
    let cli = fatoulab_cli::Cli::parse();
    std::process::exit(fatoulab_cli::run(&cli));
}
