fn main() {
    let code = dmapx::cli::run(std::env::args_os());
    std::process::exit(code);
}
