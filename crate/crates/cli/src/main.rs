mod args;
mod report;
mod run;

use clap::Parser;

/// Exit codes: 0 success, 1 usage, 2 bad input, 3 infeasible, 4 resource
/// limit exceeded.
fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let cfg = match args::resolve(cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err}");
            return match err {
                args::ResolveError::Usage(_) => 1,
                args::ResolveError::Input(_) => 2,
            };
        }
    };
    match run::execute(&cfg) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            run::exit_code_for(&err)
        }
    }
}
