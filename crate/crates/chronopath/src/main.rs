fn main() {
    let code = chronopath::cli::main_with(std::env::args(), &mut std::io::stdout().lock(), &mut std::io::stderr());
    std::process::exit(code);
}
