use clap::Parser;

fn main() {
    let cli = derham_cli::Cli::parse();
    let code = derham_cli::run(
        &cli,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
