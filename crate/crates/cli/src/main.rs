mod commands;
mod output;
mod problem_file;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(commands::run(&args));
}
