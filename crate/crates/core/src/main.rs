fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    editdist::cli::configure_threads();
    std::process::exit(editdist::cli::run(std::env::args_os()));
}
