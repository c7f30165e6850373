//! Times filtration construction and reduction on Lorenz windows.

use std::time::{Duration, Instant};

use regime_tagger::embed::{sliding_windows, TimeSeries, WindowMode};
use regime_tagger::ph::{compute_persistence_with, rips_filtration, Reduction, DEFAULT_CAP_OFFSET};
use regime_tagger::sim::{rk4_integrate, LorenzField};

fn main() -> regime_tagger::Result<()> {
    let traj = rk4_integrate(&LorenzField::classic(24.5), &[1.0, 1.0, 1.0], 0.0, 100.0, 0.01)?.discard_before(20.0)?;
    let series = TimeSeries::try_from(&traj)?;
    let windows = sliding_windows(&series, 100, 50, WindowMode::Raw)?;
    let (mut build, mut reduce) = (Duration::ZERO, Duration::ZERO);
    let count = 40;
    let mut longest = 0.0f64;
    for w in windows.iter().take(count) {
        let t = Instant::now();
        let f = rips_filtration(&w.cloud, w.cloud.diameter(), 1)?;
        build += t.elapsed();
        let t = Instant::now();
        let d = compute_persistence_with(&f, DEFAULT_CAP_OFFSET, Reduction::Coboundary)?;
        reduce += t.elapsed();
        longest = longest.max(d.features(1).map(|b| b.length()).fold(0.0, f64::max));
    }
    let ms = |d: Duration| d.as_secs_f64() * 1e3 / count as f64;
    println!("filtration {:.2} ms, reduction {:.2} ms per window (longest degree-1 bar {longest:.3})", ms(build), ms(reduce));
    Ok(())
}
