fn main() {
    std::process::exit(minispec_gateway::cli::main());
}
