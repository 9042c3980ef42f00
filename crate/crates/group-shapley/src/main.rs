fn main() {
    std::process::exit(group_shapley::cli::run(std::env::args_os()));
}
