fn main() {
    std::process::exit(isar_frand::harness::cli::run(std::env::args_os()));
}
