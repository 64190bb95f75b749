//! Drives the command-line interface from code, as the binary would.

fn main() {
    let commands: [&[&str]; 3] = [
        &["rapidseries", "roots", "--w", "1,0,2,1", "--poly", "tilde"],
        &["rapidseries", "--format", "plain", "eval", "--w", "1,1", "--seq", "geometric:3", "--prec", "1e-20"],
        &["rapidseries", "hypotheses", "--w", "1", "--seq", "identity", "--eta", "1/4", "--tau", "1/2", "--horizon", "5"],
    ];
    for args in commands {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = rapidseries::cli::run(args.iter().copied(), &mut out, &mut err);
        println!("$ {}  (exit {code})", args.join(" "));
        print!("{}", String::from_utf8_lossy(&out));
    }
}
