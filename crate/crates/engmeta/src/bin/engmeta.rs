fn main() { std::process::exit(engmeta::cli::main()) }
