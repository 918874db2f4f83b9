fn main() {
    std::process::exit(turan_cert::cli::main_with_args(std::env::args_os()));
}
