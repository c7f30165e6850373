//! Time series, point clouds and the windowing that turns one into the other.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Trajectory;

/// Uniformly indexed observations with `c >= 1` channels, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    channel_names: Vec<String>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, channel_names: Vec<String>) -> Result<Self> {
        let c = channel_names.len();
        if c == 0 {
            return Err(Error::InvalidParameter("a time series needs at least one channel".into()));
        }
        if values.len() != times.len() * c {
            return Err(Error::DimensionMismatch {
                expected: times.len() * c,
                actual: values.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::TooShort {
                required: 2,
                actual: times.len(),
            });
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("time series".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("time stamps must be strictly increasing".into()));
        }
        Ok(Self {
            times,
            values,
            channel_names,
        })
    }

    /// Builds a series from one `Vec` per channel.
    pub fn from_channels(times: Vec<f64>, channels: Vec<Vec<f64>>, channel_names: Vec<String>) -> Result<Self> {
        if channels.len() != channel_names.len() {
            return Err(Error::DimensionMismatch {
                expected: channel_names.len(),
                actual: channels.len(),
            });
        }
        if let Some(bad) = channels.iter().find(|ch| ch.len() != times.len()) {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                actual: bad.len(),
            });
        }
        let mut values = Vec::with_capacity(times.len() * channels.len());
        for i in 0..times.len() {
            values.extend(channels.iter().map(|ch| ch[i]));
        }
        Self::new(times, values, channel_names)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channel_names.len()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let c = self.channels();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn samples(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.channels())
    }

    pub fn channel(&self, channel: usize) -> Result<Vec<f64>> {
        self.check_channel(channel)?;
        Ok(self.samples().map(|s| s[channel]).collect())
    }

    pub fn select_channels(&self, channels: &[usize]) -> Result<Self> {
        for &ch in channels {
            self.check_channel(ch)?;
        }
        let values = self
            .samples()
            .flat_map(|s| channels.iter().map(move |&ch| s[ch]))
            .collect();
        let names = channels.iter().map(|&ch| self.channel_names[ch].clone()).collect();
        Self::new(self.times.clone(), values, names)
    }

    /// Concatenates the channels of series sharing one time axis.
    pub fn stack(parts: &[TimeSeries]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Empty("no series to stack".into()))?;
        if parts.iter().any(|p| p.times != first.times) {
            return Err(Error::InvalidParameter("stacked series must share time stamps".into()));
        }
        let mut values = Vec::with_capacity(first.len() * parts.iter().map(|p| p.channels()).sum::<usize>());
        for i in 0..first.len() {
            for p in parts {
                values.extend_from_slice(p.sample(i));
            }
        }
        let names = parts.iter().flat_map(|p| p.channel_names.iter().cloned()).collect();
        Self::new(first.times.clone(), values, names)
    }

    fn check_channel(&self, channel: usize) -> Result<()> {
        if channel >= self.channels() {
            return Err(Error::ChannelOutOfRange {
                channel,
                channels: self.channels(),
            });
        }
        Ok(())
    }
}

impl TryFrom<&Trajectory> for TimeSeries {
    type Error = Error;

    fn try_from(traj: &Trajectory) -> Result<Self> {
        let names = (0..traj.dim()).map(|j| format!("x{j}")).collect();
        let values = traj.states().flatten().copied().collect();
        TimeSeries::new(traj.times().to_vec(), values, names)
    }
}

/// Scalar series of one coordinate of a trajectory.
pub fn project(trajectory: &Trajectory, channel: usize) -> Result<TimeSeries> {
    if channel >= trajectory.dim() {
        return Err(Error::ChannelOutOfRange {
            channel,
            channels: trajectory.dim(),
        });
    }
    let values = trajectory.states().map(|s| s[channel]).collect();
    TimeSeries::new(trajectory.times().to_vec(), values, vec![format!("x{channel}")])
}

/// Finite set of points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(coords: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("point dimension must be >= 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::Empty("point cloud has no points".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: coords.len() % dim,
            });
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point cloud".into()));
        }
        Ok(Self { coords, dim })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(Error::InvalidParameter("points have differing dimensions".into()));
        }
        Self::new(points.iter().flat_map(|p| p.as_ref().iter().copied()).collect(), dim)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.point(i)
            .iter()
            .zip(self.point(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest pairwise distance (0 for a single point).
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(self.distance(i, j));
            }
        }
        best
    }

    pub fn map_coords(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.coords.iter().map(|&v| f(v)).collect(), self.dim)
    }
}

/// Delay vectors `(z_j, z_{j+tau}, ..., z_{j+(d-1) tau})` of a slice.
pub fn delay_embed_values(values: &[f64], d: usize, tau: usize) -> Result<PointCloud> {
    if d == 0 || tau == 0 {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension and lag must be >= 1 (d = {d}, tau = {tau})"
        )));
    }
    let span = (d - 1) * tau;
    if values.len() <= span {
        return Err(Error::TooShort {
            required: span + 1,
            actual: values.len(),
        });
    }
    let count = values.len() - span;
    let mut coords = Vec::with_capacity(count * d);
    for j in 0..count {
        coords.extend((0..d).map(|k| values[j + k * tau]));
    }
    PointCloud::new(coords, d)
}

/// Delay embedding of a scalar series.
pub fn delay_embed(series: &TimeSeries, d: usize, tau: usize) -> Result<PointCloud> {
    if series.channels() != 1 {
        return Err(Error::InvalidParameter(format!(
            "delay embedding needs a scalar series, got {} channels",
            series.channels()
        )));
    }
    delay_embed_values(&series.values, d, tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WindowMode {
    /// The multichannel samples themselves are the points.
    Raw,
    /// Delay vectors of one channel, built inside each window.
    Delay { d: usize, tau: usize, channel: usize },
}

/// One analysis window of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start_index: usize,
    pub start_time: f64,
    pub cloud: PointCloud,
}

/// Number of windows `floor((n - len) / stride) + 1`, or 0 if `len > n`.
pub fn window_count(n: usize, window_len: usize, stride: usize) -> usize {
    if window_len > n || stride == 0 {
        0
    } else {
        (n - window_len) / stride + 1
    }
}

/// Cuts `series` into windows starting at `0, stride, 2 stride, ...` while
/// they fit entirely.
pub fn sliding_windows(series: &TimeSeries, window_len: usize, stride: usize, mode: WindowMode) -> Result<Vec<Window>> {
    if window_len == 0 || stride == 0 {
        return Err(Error::InvalidParameter(format!(
            "window length and stride must be >= 1 (window_len = {window_len}, stride = {stride})"
        )));
    }
    if window_len > series.len() {
        return Err(Error::TooShort {
            required: window_len,
            actual: series.len(),
        });
    }
    if let WindowMode::Delay { d, tau, channel } = mode {
        series.check_channel(channel)?;
        if d == 0 || tau == 0 {
            return Err(Error::InvalidParameter("delay d and tau must be >= 1".into()));
        }
        // Windows shorter than twice the delay span give degenerate clouds.
        let min_len = (2 * (d - 1) * tau).max((d - 1) * tau + 1);
        if window_len < min_len {
            return Err(Error::TooShort {
                required: min_len,
                actual: window_len,
            });
        }
    }

    let count = window_count(series.len(), window_len, stride);
    let c = series.channels();
    let mut windows = Vec::with_capacity(count);
    for w in 0..count {
        let start = w * stride;
        let cloud = match mode {
            WindowMode::Raw => PointCloud::new(series.values[start * c..(start + window_len) * c].to_vec(), c)?,
            WindowMode::Delay { d, tau, channel } => {
                let values: Vec<f64> = (start..start + window_len).map(|i| series.sample(i)[channel]).collect();
                delay_embed_values(&values, d, tau)?
            }
        };
        windows.push(Window {
            start_index: start,
            start_time: series.times[start],
            cloud,
        });
    }
    Ok(windows)
}

/// First lag at which the sample autocorrelation drops to zero or below,
/// searched up to `max_lag`; returns `max_lag` if it never does.
pub fn autocorrelation_first_zero(values: &[f64], max_lag: usize) -> usize {
    let n = values.len();
    let max_lag = max_lag.max(1).min(n.saturating_sub(1).max(1));
    let mean = values.iter().sum::<f64>() / n as f64;
    let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if var == 0.0 {
        return 1;
    }
    for lag in 1..=max_lag {
        let cov: f64 = (0..n - lag).map(|i| (values[i] - mean) * (values[i + lag] - mean)).sum();
        if cov <= 0.0 {
            return lag;
        }
    }
    max_lag
}

/// Default windowing: raw samples for multichannel data, otherwise a 2-D
/// delay embedding of channel 0 with the lag at the first zero of the
/// autocorrelation, capped at `window_len / 4`.
pub fn default_mode(series: &TimeSeries, window_len: usize) -> WindowMode {
    if series.channels() >= 2 {
        return WindowMode::Raw;
    }
    let cap = (window_len / 4).max(1);
    let tau = autocorrelation_first_zero(&series.values, cap).clamp(1, cap);
    WindowMode::Delay { d: 2, tau, channel: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{rk4_integrate, LorenzField};
    use proptest::prelude::*;

    fn scalar(values: &[f64]) -> TimeSeries {
        TimeSeries::new((0..values.len()).map(|i| i as f64).collect(), values.to_vec(), vec!["z".into()]).unwrap()
    }

    #[test]
    fn project_lorenz_channels() {
        let traj = rk4_integrate(&LorenzField::classic(28.0), &[1.0, 1.0, 1.0], 0.0, 1.0, 0.01).unwrap();
        let x = project(&traj, 0).unwrap();
        assert_eq!(x.len(), traj.len());
        assert_eq!(x.sample(5)[0], traj.state(5)[0]);
        assert!(matches!(project(&traj, 3), Err(Error::ChannelOutOfRange { channel: 3, channels: 3 })));

        let parts: Vec<_> = (0..3).map(|c| project(&traj, c).unwrap()).collect();
        let stacked = TimeSeries::stack(&parts).unwrap();
        assert_eq!(stacked, TimeSeries::try_from(&traj).unwrap());
    }

    #[test]
    fn delay_embed_examples() {
        let cloud = delay_embed(&scalar(&[0.0, 1.0, 2.0, 3.0, 4.0]), 2, 1).unwrap();
        let pts: Vec<Vec<f64>> = cloud.points().map(|p| p.to_vec()).collect();
        assert_eq!(pts, vec![vec![0.0, 1.0], vec![1.0, 2.0], vec![2.0, 3.0], vec![3.0, 4.0]]);

        let ident = delay_embed(&scalar(&[3.0, 1.0, 4.0]), 1, 1).unwrap();
        assert_eq!(ident.points().map(|p| p[0]).collect::<Vec<_>>(), vec![3.0, 1.0, 4.0]);

        let cloud = delay_embed(&scalar(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]), 3, 2).unwrap();
        let pts: Vec<Vec<f64>> = cloud.points().map(|p| p.to_vec()).collect();
        assert_eq!(pts, vec![vec![0.0, 2.0, 4.0], vec![1.0, 3.0, 5.0]]);
    }

    #[test]
    fn delay_embed_too_short_reports_minimum() {
        match delay_embed(&scalar(&[0.0, 1.0, 2.0, 3.0]), 3, 2) {
            Err(Error::TooShort { required, actual }) => assert_eq!((required, actual), (5, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn window_starts_and_shapes() {
        let s = scalar(&(0..10).map(f64::from).collect::<Vec<_>>());
        let w = sliding_windows(&s, 4, 2, WindowMode::Delay { d: 1, tau: 1, channel: 0 }).unwrap();
        assert_eq!(w.iter().map(|w| w.start_index).collect::<Vec<_>>(), vec![0, 2, 4, 6]);
        assert_eq!(w[2].start_time, 4.0);

        let w = sliding_windows(&s, 6, 3, WindowMode::Delay { d: 2, tau: 1, channel: 0 }).unwrap();
        assert!(w.iter().all(|w| w.cloud.len() == 5 && w.cloud.dim() == 2));

        let two = TimeSeries::from_channels(
            (0..10).map(f64::from).collect(),
            vec![(0..10).map(f64::from).collect(), (0..10).map(|i| -(i as f64)).collect()],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let w = sliding_windows(&two, 5, 5, WindowMode::Raw).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.iter().all(|w| w.cloud.len() == 5 && w.cloud.dim() == 2));
        assert_eq!(w[1].cloud.point(0), &[5.0, -5.0]);
    }

    #[test]
    fn window_errors() {
        let s = scalar(&[0.0, 1.0, 2.0]);
        assert!(matches!(sliding_windows(&s, 4, 1, WindowMode::Raw), Err(Error::TooShort { .. })));
        assert!(sliding_windows(&s, 2, 0, WindowMode::Raw).is_err());
        let long = scalar(&(0..50).map(f64::from).collect::<Vec<_>>());
        // 2 (d - 1) tau = 12 > 10
        assert!(matches!(
            sliding_windows(&long, 10, 5, WindowMode::Delay { d: 3, tau: 3, channel: 0 }),
            Err(Error::TooShort { required: 12, actual: 10 })
        ));
        assert!(sliding_windows(&long, 10, 5, WindowMode::Delay { d: 2, tau: 1, channel: 1 }).is_err());
    }

    #[test]
    fn autocorrelation_zero_of_sine() {
        // period 40 samples: autocorrelation first crosses zero near lag 10
        let v: Vec<f64> = (0..400).map(|i| (i as f64 * std::f64::consts::TAU / 40.0).sin()).collect();
        let lag = autocorrelation_first_zero(&v, 100);
        assert!((9..=11).contains(&lag), "lag {lag}");
        assert_eq!(default_mode(&scalar(&v), 100), WindowMode::Delay { d: 2, tau: lag, channel: 0 });
        assert_eq!(default_mode(&scalar(&v), 20), WindowMode::Delay { d: 2, tau: 5, channel: 0 });
    }

    proptest! {
        #[test]
        fn delay_point_count(n in 1usize..200, d in 1usize..6, tau in 1usize..10) {
            let values: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let span = (d - 1) * tau;
            match delay_embed_values(&values, d, tau) {
                Ok(cloud) => {
                    prop_assert!(n > span);
                    prop_assert_eq!(cloud.len(), n - span);
                    for (j, p) in cloud.points().enumerate() {
                        for k in 0..d {
                            prop_assert_eq!(p[k], values[j + k * tau]);
                        }
                    }
                }
                Err(_) => prop_assert!(n <= span),
            }
        }

        #[test]
        fn window_count_law(n in 2usize..300, len in 1usize..100, stride in 1usize..60) {
            prop_assume!(len <= n);
            let s = scalar(&(0..n).map(|i| i as f64).collect::<Vec<_>>());
            let w = sliding_windows(&s, len, stride, WindowMode::Delay { d: 1, tau: 1, channel: 0 }).unwrap();
            prop_assert_eq!(w.len(), (n - len) / stride + 1);
            for win in &w {
                // every point is a source sample
                for (k, p) in win.cloud.points().enumerate() {
                    prop_assert_eq!(p[0], (win.start_index + k) as f64);
                }
            }
        }
    }
}
