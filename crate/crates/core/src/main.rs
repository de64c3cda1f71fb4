fn main() {
    std::process::exit(crmorse::cli::run(std::env::args_os()));
}
