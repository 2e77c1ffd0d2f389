use std::io::Write;

fn main() {
    let result = exprecog::cli::run_command(std::env::args_os());
    if let Some(report) = &result.stdout {
        print!("{report}");
        let _ = std::io::stdout().flush();
    }
    if let Some(diag) = &result.stderr {
        eprintln!("{diag}");
    }
    std::process::exit(result.exit_code);
}
