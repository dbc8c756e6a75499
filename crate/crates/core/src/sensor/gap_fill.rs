use std::collections::BTreeMap;

use super::{Quality, Sample, SensorSeries, SimYear};
use crate::{Error, Result, HOURS_PER_YEAR};

/// Fills every hour of `year` that has no usable sample with the donor
/// station's samples for that hour, marked [`Quality::Filled`]. Existing
/// samples are never touched. The donor should already be cleansed; its
/// missing-flagged samples are ignored. Returns the number of samples added.
pub fn gap_fill(series: &SensorSeries, donor: &SensorSeries, year: SimYear) -> Result<(SensorSeries, usize)> {
    if series.kind != donor.kind {
        return Err(Error::Domain(format!(
            "donor {} is {}, series {} is {}",
            donor.station, donor.kind, series.station, series.kind
        )));
    }
    let mut covered = vec![false; HOURS_PER_YEAR];
    for s in series.samples.iter().filter(|s| s.is_usable()) {
        if let Some(h) = year.hour_index(&s.ts) {
            covered[h] = true;
        }
    }
    let mut by_hour: BTreeMap<usize, Vec<Sample>> = BTreeMap::new();
    for s in donor.samples.iter().filter(|s| s.is_usable()) {
        if let Some(h) = year.hour_index(&s.ts) {
            if !covered[h] {
                by_hour.entry(h).or_default().push(Sample {
                    quality: Quality::Filled,
                    ..*s
                });
            }
        }
    }

    let mut unfillable: Vec<(usize, usize)> = Vec::new();
    for h in (0..HOURS_PER_YEAR).filter(|&h| !covered[h] && !by_hour.contains_key(&h)) {
        match unfillable.last_mut() {
            Some((_, end)) if *end + 1 == h => *end = h,
            _ => unfillable.push((h, h)),
        }
    }
    if !unfillable.is_empty() {
        return Err(Error::UnfillableGap(
            unfillable
                .into_iter()
                .map(|(a, b)| (year.hour_start(a), year.hour_start(b)))
                .collect(),
        ));
    }

    let fill: Vec<Sample> = by_hour.into_values().flatten().collect();
    let filled = fill.len();
    let mut merged = Vec::with_capacity(series.len() + filled);
    let (mut a, mut b) = (series.samples.iter().peekable(), fill.into_iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) if x.ts <= y.ts => merged.push(*a.next().unwrap()),
            (_, Some(_)) => merged.push(b.next().unwrap()),
            (Some(_), None) => merged.push(*a.next().unwrap()),
            (None, None) => break,
        }
    }
    Ok((
        SensorSeries {
            kind: series.kind,
            station: series.station.clone(),
            samples: merged,
        },
        filled,
    ))
}
