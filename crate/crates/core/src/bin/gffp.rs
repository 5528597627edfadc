fn main() {
    std::process::exit(gffperc::cli::main_from_env());
}
