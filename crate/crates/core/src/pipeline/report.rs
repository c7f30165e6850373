use serde::{Deserialize, Serialize};

use crate::cluster::TaggedWindow;
use crate::error::{Error, Result};

/// Runs shorter than this are ignored by [`TagReport::major_transitions`].
pub const MIN_RUN: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRun {
    pub label: usize,
    pub first_window: usize,
    pub length: usize,
    pub start_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub window_index: usize,
    pub time: f64,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagReport {
    pub windows: usize,
    /// `counts[label]`
    pub counts: Vec<usize>,
    pub runs: Vec<LabelRun>,
    pub transitions: Vec<Transition>,
    /// Transitions left after dropping runs shorter than [`MIN_RUN`] windows.
    pub major_transitions: Vec<Transition>,
}

/// Label counts, runs and transitions of windows in order. A transition is
/// stamped with the start time of the first window whose label differs from
/// its predecessor.
pub fn tag_report(tagged: &[TaggedWindow]) -> Result<TagReport> {
    if tagged.is_empty() {
        return Err(Error::Empty("no tagged windows".into()));
    }
    let k = tagged.iter().map(|t| t.label).max().unwrap_or(0) + 1;
    let mut counts = vec![0; k];
    for t in tagged {
        counts[t.label] += 1;
    }
    let mut runs: Vec<LabelRun> = Vec::new();
    for t in tagged {
        match runs.last_mut() {
            Some(r) if r.label == t.label => r.length += 1,
            _ => runs.push(LabelRun { label: t.label, first_window: t.window_index, length: 1, start_time: t.start_time }),
        }
    }
    let transitions = transitions_between(&runs);

    let mut major: Vec<LabelRun> = Vec::new();
    for r in runs.iter().filter(|r| r.length >= MIN_RUN) {
        match major.last_mut() {
            Some(m) if m.label == r.label => m.length += r.length,
            _ => major.push(r.clone()),
        }
    }
    let major_transitions = transitions_between(&major);

    Ok(TagReport { windows: tagged.len(), counts, runs, transitions, major_transitions })
}

fn transitions_between(runs: &[LabelRun]) -> Vec<Transition> {
    runs.windows(2)
        .map(|w| Transition { window_index: w[1].first_window, time: w[1].start_time, from: w[0].label, to: w[1].label })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tagged(labels: &[usize]) -> Vec<TaggedWindow> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &label)| TaggedWindow { window_index: i, start_time: i as f64, features: vec![], label })
            .collect()
    }

    #[test]
    fn one_transition() {
        let r = tag_report(&tagged(&[0, 0, 1, 1])).unwrap();
        assert_eq!(r.counts, vec![2, 2]);
        assert_eq!(r.transitions.len(), 1);
        assert_eq!(r.transitions[0].time, 2.0);
        assert_eq!((r.transitions[0].from, r.transitions[0].to), (0, 1));
    }

    #[test]
    fn constant_labels() {
        let r = tag_report(&tagged(&[1, 1, 1])).unwrap();
        assert!(r.transitions.is_empty());
        assert_eq!(r.counts, vec![0, 3]);
        assert_eq!(r.runs.len(), 1);
    }

    #[test]
    fn short_runs_are_ignored_for_major_transitions() {
        let r = tag_report(&tagged(&[0, 0, 0, 1, 0, 0, 1, 1, 0, 1, 1])).unwrap();
        assert_eq!(r.transitions.len(), 5);
        assert_eq!(r.major_transitions.len(), 1);
        assert_eq!(r.major_transitions[0].time, 6.0);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(tag_report(&[]).is_err());
    }
}
