fn main() {
    std::process::exit(de_ddqn::cli::run(std::env::args_os()));
}
