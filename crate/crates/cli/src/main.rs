use clap::Parser;
use pogg_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    match pogg_cli::run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.json);
            } else {
                print!("{}", out.text);
            }
        }
        Err(e) => {
            eprintln!("pogg: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
