fn main() {
    std::process::exit(poromech::scenario_io::cli::cli_main(std::env::args_os()));
}
