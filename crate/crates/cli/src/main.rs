fn main() {
    std::process::exit(tgl_cli::main_with_args(std::env::args_os()));
}
