fn main() {
    std::process::exit(quatpurify::cli::run(std::env::args_os()));
}
