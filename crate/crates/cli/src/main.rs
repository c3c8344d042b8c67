fn main() {
    std::process::exit(pldos::main_with_args(std::env::args_os()));
}
