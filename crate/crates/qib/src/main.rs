fn main() {
    let env = std::env::var(qib::tol::ENV_VAR).ok();
    let code = qib::cli::run(std::env::args_os(), env.as_deref(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
