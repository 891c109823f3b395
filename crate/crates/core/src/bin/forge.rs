use std::io::{stderr, stdout};
use std::process::exit;

fn main() {
    let code = forge::cli::dispatch(std::env::args_os(), &mut stdout().lock(), &mut stderr().lock());
    exit(code);
}
