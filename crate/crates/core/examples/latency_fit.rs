//! Fits `latency = a*Np + b*No + c` to synthetic request timings and shows
//! how output length dominates.

use minispec::metrics::{fit_latency, FitOptions, LatencySample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let (a, b, c) = (0.00025, 0.7, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples: Vec<LatencySample> = (0..60)
        .map(|_| {
            let np = f64::from(rng.gen_range(400..4000));
            let no = f64::from(rng.gen_range(5..80));
            let jitter = rng.gen_range(-0.05..0.05);
            LatencySample::new(np, no, a * np + b * no + c + jitter)
        })
        .collect();
    let fit = fit_latency(&samples, FitOptions::default())?;
    let m = fit.model;
    println!("a = {:.6} (true {a})", m.a);
    println!("b = {:.4} (true {b})", m.b);
    println!("c = {:.4} (true {c})", m.c);
    println!("b/a = {:.0}", m.b / m.a);
    println!("one output token costs as much as {:.0} prompt tokens", m.b / m.a);
    println!("2000-token prompt, 20-token plan: {:.2}s", m.predict(2000.0, 20.0));
    println!("2000-token prompt, 60-token plan: {:.2}s", m.predict(2000.0, 60.0));
    Ok(())
}
