fn main() {
    std::process::exit(bouma2::cli::main());
}
