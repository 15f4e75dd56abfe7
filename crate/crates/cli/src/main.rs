use clap::Parser;

fn main() {
    let cli = roughvol_cli::Cli::parse();
    std::process::exit(roughvol_cli::run(cli));
}
