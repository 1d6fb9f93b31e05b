fn main() {
    std::process::exit(prefgame_cli::run(std::env::args_os()));
}
