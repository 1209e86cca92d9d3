use std::io::Write;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let outcome = parext_cli::execute(&args);
    match outcome.destination {
        parext_cli::Destination::Stdout => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.output.as_bytes());
        }
        parext_cli::Destination::Stderr => {
            let mut stderr = std::io::stderr().lock();
            let _ = stderr.write_all(outcome.output.as_bytes());
        }
        parext_cli::Destination::File(path) => {
            if let Err(e) = std::fs::write(&path, outcome.output.as_bytes()) {
                eprintln!("failed to write {}: {e}", path.display());
                std::process::exit(3);
            }
        }
    }
    std::process::exit(outcome.exit_code);
}
