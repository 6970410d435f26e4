use clap::Parser;

fn main() {
    let cli = eplab_cli::Cli::parse();
    std::process::exit(eplab_cli::main_with(cli));
}
