use fracdim_cli::config::OUTPUT_DIR_ENV;

fn main() {
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(Into::into);
    let status = fracdim_cli::main_with(std::env::args_os(), env_dir);
    std::process::exit(status.code());
}
