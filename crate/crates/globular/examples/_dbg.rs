use globular::freecat;
use globular::glob::GlobSetBuilder;
use globular::multitensor::{dist_law_cell, Gamma, ProductMt};
fn main() {
    let pt = GlobSetBuilder::new(0).cell0("p").finish().unwrap();
    let p0 = ProductMt::new(0);
    let g0 = Gamma::new(&p0, 3);
    let m0 = g0.apply(&pt).unwrap();
    for c in freecat::free_cells(&m0, 0, 3).unwrap() {
        match dist_law_cell(&pt, 3, 3, &c) {
            Ok(out) => println!("ok {} -> grade {}", c.canonical_id(), out.grade),
            Err(e) => println!("ERR {}: {e}", c.canonical_id()),
        }
    }
}
