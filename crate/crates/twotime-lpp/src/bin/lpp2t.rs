fn main() {
    std::process::exit(twotime_lpp::cli::main_with_args(std::env::args_os()));
}
