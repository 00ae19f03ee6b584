use clap::Parser;

fn main() {
    let cli = qillum::cli::Cli::parse();
    match qillum::cli::run(cli) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
