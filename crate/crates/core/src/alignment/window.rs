use std::ops::Range;

use thiserror::Error;

use super::{align_chars, AlignmentPath, CostScheme, EditOp};

#[derive(Debug, Error, PartialEq)]
pub enum WindowConfigError {
    #[error("initial_window must be at least 1")]
    InitialWindow,
    #[error("cost_threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("growth_factor must be greater than 1, got {0}")]
    Growth(f64),
    #[error("max_window ({max}) must be at least initial_window ({initial})")]
    MaxWindow { initial: usize, max: usize },
}

/// Window schedule for [`windowed_align`]. Sizes are in clean-text characters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    pub initial_window: usize,
    /// Accepted window cost per clean character.
    pub cost_threshold: f64,
    pub growth_factor: f64,
    pub max_window: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            initial_window: 500,
            cost_threshold: 0.3,
            growth_factor: 2.0,
            max_window: 8000,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<(), WindowConfigError> {
        if self.initial_window < 1 {
            return Err(WindowConfigError::InitialWindow);
        }
        if !(self.cost_threshold > 0.0) {
            return Err(WindowConfigError::Threshold(self.cost_threshold));
        }
        if !(self.growth_factor > 1.0) {
            return Err(WindowConfigError::Growth(self.growth_factor));
        }
        if self.max_window < self.initial_window {
            return Err(WindowConfigError::MaxWindow {
                initial: self.initial_window,
                max: self.max_window,
            });
        }
        Ok(())
    }
}

/// A committed stretch whose window never met the cost threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LowQualityRegion {
    pub clean: Range<usize>,
    pub noisy: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowedAlignment {
    pub path: AlignmentPath,
    pub low_quality: Vec<LowQualityRegion>,
    /// Number of times a window was enlarged.
    pub growth_events: usize,
    /// Number of Wagner-Fischer runs.
    pub windows: usize,
}

/// Aligns long texts window by window.
///
/// From a cursor pair, a window of `w` clean characters (and a proportional
/// number of noisy characters) is aligned optimally. If its cost per clean
/// character is within the threshold, the path is committed up to the op at
/// the middle of the window's clean span and the cursors move there;
/// otherwise the window grows by `growth_factor` and is re-aligned. At
/// `max_window` the best path is committed anyway and the stretch is reported
/// as low quality. A window reaching the end of both texts is committed
/// whole.
pub fn windowed_align(
    clean: &[char],
    noisy: &[char],
    config: &WindowConfig,
    costs: &CostScheme,
) -> Result<WindowedAlignment, WindowConfigError> {
    config.validate()?;
    let (n, m) = (clean.len(), noisy.len());
    let ratio = if n == 0 { 1.0 } else { m as f64 / n as f64 };

    let mut out = WindowedAlignment {
        path: AlignmentPath::default(),
        low_quality: Vec::new(),
        growth_events: 0,
        windows: 0,
    };
    let (mut i, mut j) = (0usize, 0usize);
    let mut w = config.initial_window;

    loop {
        if i == n || j == m {
            // One side is exhausted: the rest is pure insertion or deletion.
            let tail = align_chars(&clean[i..], &noisy[j..], costs, i, j);
            commit(&mut out.path, &tail.ops, costs);
            break;
        }

        let ce = (i + w).min(n);
        let w_noisy = ((w as f64) * ratio).ceil().max(1.0) as usize;
        let ne = (j + w_noisy).min(m);
        let last = ce == n && ne == m;

        let window = align_chars(&clean[i..ce], &noisy[j..ne], costs, i, j);
        out.windows += 1;
        let span = ce - i;
        let normalized = window.total_cost as f64 / span as f64;
        let within = normalized <= config.cost_threshold;

        if !within && !last && w < config.max_window {
            w = ((w as f64) * config.growth_factor).ceil() as usize;
            w = w.min(config.max_window);
            out.growth_events += 1;
            continue;
        }

        if last {
            if !within {
                out.low_quality.push(LowQualityRegion {
                    clean: i..n,
                    noisy: j..m,
                });
            }
            commit(&mut out.path, &window.ops, costs);
            break;
        }

        // Commit through the op covering the middle clean character.
        let mid = i + (span / 2).max(1) - 1;
        let cut = window
            .ops
            .iter()
            .position(|op| op.clean_pos() == Some(mid))
            .expect("window path covers every clean position");
        let prefix = &window.ops[..=cut];
        let consumed_noisy = prefix.iter().filter(|op| op.noisy_pos().is_some()).count();
        if !within {
            out.low_quality.push(LowQualityRegion {
                clean: i..mid + 1,
                noisy: j..j + consumed_noisy,
            });
        }
        commit(&mut out.path, prefix, costs);
        i = mid + 1;
        j += consumed_noisy;
        w = config.initial_window;
    }
    Ok(out)
}

fn commit(path: &mut AlignmentPath, ops: &[EditOp], costs: &CostScheme) {
    path.ops.extend_from_slice(ops);
    path.total_cost += ops.iter().map(|&op| u64::from(costs.op_cost(op))).sum::<u64>();
}
