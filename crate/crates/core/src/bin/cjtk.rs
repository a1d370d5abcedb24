use std::io;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (stdin, stdout, stderr) = (io::stdin(), io::stdout(), io::stderr());
    let mut env = cjtk::cli::Env {
        stdin: &mut stdin.lock(),
        stdout: &mut stdout.lock(),
        stderr: &mut stderr.lock(),
        extension_path: std::env::var_os("CJTK_EXTENSIONS"),
    };
    std::process::exit(cjtk::cli::run(&args, &mut env));
}
