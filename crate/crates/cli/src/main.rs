fn main() {
    std::process::exit(ffpos::main_with_args(std::env::args_os()));
}
