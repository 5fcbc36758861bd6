use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PlaneBox;

/// Vertical extent of one storey on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoreyBand {
    pub lo_m: f64,
    pub hi_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreyCount {
    pub storey_count: usize,
    /// Bottom-up.
    pub windows_per_storey: Vec<usize>,
    pub bands: Vec<StoreyBand>,
}

/// Bottom-up sweep over the unique windows. A window joins the open storey
/// when its vertical interval overlaps the storey's band by at least
/// `band_overlap_min` of the shorter of the two; otherwise the band closes
/// and a new storey starts.
pub fn count_storeys(unique: &[PlaneBox], band_overlap_min: f64) -> Result<StoreyCount> {
    if !(band_overlap_min > 0.0 && band_overlap_min <= 1.0) {
        return Err(Error::param(
            "band_overlap_min",
            format!("{band_overlap_min} outside (0, 1]"),
        ));
    }
    let mut intervals: Vec<(f64, f64)> = unique.iter().map(|b| (b.y_m, b.top_m())).collect();
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut bands: Vec<StoreyBand> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (lo, hi) in intervals {
        if let Some(band) = bands.last_mut() {
            let overlap = hi.min(band.hi_m) - lo.max(band.lo_m);
            let shorter = (hi - lo).min(band.hi_m - band.lo_m);
            if overlap > 0.0 && overlap >= band_overlap_min * shorter {
                band.lo_m = band.lo_m.min(lo);
                band.hi_m = band.hi_m.max(hi);
                *counts.last_mut().expect("count per band") += 1;
                continue;
            }
        }
        bands.push(StoreyBand { lo_m: lo, hi_m: hi });
        counts.push(1);
    }
    Ok(StoreyCount {
        storey_count: bands.len(),
        windows_per_storey: counts,
        bands,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(x: f64, lo: f64, hi: f64) -> PlaneBox {
        PlaneBox {
            x_m: x,
            y_m: lo,
            w_m: 1.0,
            h_m: hi - lo,
            score: 1.0,
            source_frames: vec![],
        }
    }

    #[test]
    fn single_box() {
        let c = count_storeys(&[iv(0.0, 0.0, 1.0)], 0.5).unwrap();
        assert_eq!(c.storey_count, 1);
        assert_eq!(c.windows_per_storey, vec![1]);
    }

    #[test]
    fn small_overlap_splits() {
        let c = count_storeys(&[iv(0.0, 0.0, 1.0), iv(0.0, 0.9, 1.9)], 0.5).unwrap();
        assert_eq!(c.storey_count, 2);
    }

    #[test]
    fn grid_four_by_five() {
        let mut boxes = Vec::new();
        for s in 0..4 {
            for w in 0..5 {
                let lo = 1.0 + s as f64 * 2.0;
                boxes.push(iv(w as f64 * 2.0, lo, lo + 1.5));
            }
        }
        let c = count_storeys(&boxes, 0.5).unwrap();
        assert_eq!(c.storey_count, 4);
        assert_eq!(c.windows_per_storey, vec![5, 5, 5, 5]);
        assert_eq!(c.bands[0], StoreyBand { lo_m: 1.0, hi_m: 2.5 });
    }

    #[test]
    fn empty_input() {
        let c = count_storeys(&[], 0.5).unwrap();
        assert_eq!(c.storey_count, 0);
        assert!(c.windows_per_storey.is_empty());
    }
}
