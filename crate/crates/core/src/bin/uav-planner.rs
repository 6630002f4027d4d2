fn main() {
    std::process::exit(uav_planner::cli::cli_main(std::env::args_os()));
}
