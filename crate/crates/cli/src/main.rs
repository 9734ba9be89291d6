use std::io::{stderr, stdout};

fn main() {
    match rwdre_cli::workers_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                eprintln!("rwdre: cannot start {n} workers: {e}");
                std::process::exit(1);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("rwdre: {e}");
            std::process::exit(e.exit_code());
        }
    }
    let code = rwdre_cli::run_cli(std::env::args_os(), &mut stdout(), &mut stderr());
    std::process::exit(code);
}
