use fockspec_core::grid::TorusGrid;
use fockspec_core::model::ModelSpec;
use fockspec_core::bs::threshold_count_sweep;
use std::time::Instant;
fn main() {
    let model = ModelSpec::cubic(0.0);
    // probe: g=30 resolves sqrt(1e-15) comfortably
    let grid = TorusGrid::build(4, true, 30).unwrap();
    println!("nodes = {}", grid.len());
    let zs: Vec<f64> = (2..=15).map(|d| -(10f64.powi(-d))).collect();
    let t0 = Instant::now();
    let (_tuned, reports) = threshold_count_sweep(&model, &grid, &zs).unwrap();
    for r in &reports {
        println!("z = -1e{:>3.0}  N = {:3}  gap={:.2e}", (-r.z).log10(), r.count, r.residual_gap);
    }
    println!("elapsed {:?}", t0.elapsed());
}
