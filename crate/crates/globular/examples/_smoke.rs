fn main() {
    let args: Vec<String> = std::env::args().collect();
    let name = &args[1];
    let dim: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(2);
    let size: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(4);
    let t = std::time::Instant::now();
    match globular::suites::run_suite(name, dim, size, 4, 4) {
        Ok(r) => println!("{} [{:?}]", r.summary(), t.elapsed()),
        Err(e) => println!("{name}: ERROR {e}"),
    }
}
