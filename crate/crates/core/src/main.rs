use clap::Parser;

fn main() {
    let cli = butler::cli::Cli::parse();
    let code = butler::cli::main_with(cli, &mut std::io::stdout());
    std::process::exit(code);
}
