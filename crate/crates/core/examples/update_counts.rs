//! Update budgets of the wide-ResNet schedules, checked against the
//! reported numbers.

use batchscale::harness::reported_counts;
use batchscale::harness::report::render_reported_counts;

fn main() {
    let rows = reported_counts();
    print!("{}", render_reported_counts(&rows));
    for r in &rows {
        println!("{}: {} as a fraction", r.name, r.exact);
    }
}
