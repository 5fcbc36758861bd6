//! Zero-normalized cross-correlation over horizontal search bands.
//!
//! The correlation numerator is computed for every placement at once in the
//! frequency domain; the per-placement image mean and variance come from
//! integral images. Two real templates share one complex transform.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{MatchParams, Template};
use crate::error::{Error, Result};
use crate::geometry::PixelBox;
use crate::ingest::GrayImage;

/// Vertical search band `[y_lo, y_hi]` in image rows; spans the full width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Band {
    /// Whole image rows covered by the band, as a half-open range.
    pub fn rows(&self, image_h: usize) -> (usize, usize) {
        let lo = self.y_lo.floor().max(0.0) as usize;
        let hi = (self.y_hi.ceil().max(0.0) as usize).min(image_h);
        (lo.min(hi), hi)
    }
}

/// The horizontal patch of the seed's storey, padded above and below by
/// `strip_margin` seed heights and clamped to the image.
pub fn storey_strip(seed: &PixelBox, image_h: usize, params: &MatchParams) -> Band {
    let pad = params.strip_margin * seed.h;
    Band {
        y_lo: (seed.y - pad).max(0.0),
        y_hi: (seed.y + seed.h + pad).min(image_h as f64),
    }
}

/// Correlates `template` over every placement inside `band` and returns the
/// accepted peaks as boxes of the template's size, scored by ZNCC.
pub fn match_template(
    image: &GrayImage,
    template: &Template,
    band: Band,
    params: &MatchParams,
) -> Result<Vec<PixelBox>> {
    params.validate()?;
    let (lo, hi) = band.rows(image.height());
    check_fits(template, lo, hi, image.width())?;
    let corr = BandCorrelator::new(image, lo, hi);
    let map = corr
        .score_maps(&[&template.pixels])
        .pop()
        .expect("one map per template");
    Ok(peaks_to_boxes(&map, template, lo, (lo, hi), params))
}

pub(crate) fn check_fits(template: &Template, lo: usize, hi: usize, width: usize) -> Result<()> {
    let (tw, th) = (template.pixels.width(), template.pixels.height());
    if th > hi - lo {
        return Err(Error::BandTooSmall {
            template_h: th,
            band_h: hi - lo,
        });
    }
    if tw > width {
        return Err(Error::param(
            "template",
            format!("template width {tw} px exceeds the image width {width} px"),
        ));
    }
    Ok(())
}

/// ZNCC at every valid placement of one template within a correlator band.
/// `data[y * width + x]` is the score with the template's top-left corner at
/// band column `x`, band row `y`.
#[derive(Debug, Clone)]
pub(crate) struct ScoreMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl ScoreMap {
    #[inline]
    fn at(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

struct Plans {
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

/// Precomputed transform and running sums of one band of an image.
pub(crate) struct BandCorrelator {
    rows: usize,
    cols: usize,
    /// padded transform size
    fr: usize,
    fc: usize,
    plans: Plans,
    /// band spectrum, transposed layout (`fc` rows of length `fr`)
    spectrum: Vec<Complex<f64>>,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl BandCorrelator {
    pub fn new(image: &GrayImage, row_lo: usize, row_hi: usize) -> Self {
        let rows = row_hi - row_lo;
        let cols = image.width();
        let (fr, fc) = (smooth_size(rows), smooth_size(cols));
        let plans = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            Plans {
                row_fwd: p.plan_fft_forward(fc),
                row_inv: p.plan_fft_inverse(fc),
                col_fwd: p.plan_fft_forward(fr),
                col_inv: p.plan_fft_inverse(fr),
            }
        });

        let mut buf = vec![Complex::new(0.0, 0.0); fr * fc];
        let stride = cols + 1;
        let mut sum = vec![0.0; (rows + 1) * stride];
        let mut sum_sq = vec![0.0; (rows + 1) * stride];
        for r in 0..rows {
            let src = image.row(row_lo + r);
            let (mut acc, mut acc_sq) = (0.0, 0.0);
            for (c, &v) in src.iter().enumerate() {
                let v = f64::from(v);
                buf[r * fc + c].re = v;
                acc += v;
                acc_sq += v * v;
                sum[(r + 1) * stride + c + 1] = sum[r * stride + c + 1] + acc;
                sum_sq[(r + 1) * stride + c + 1] = sum_sq[r * stride + c + 1] + acc_sq;
            }
        }
        let mut this = BandCorrelator {
            rows,
            cols,
            fr,
            fc,
            plans,
            spectrum: Vec::new(),
            sum,
            sum_sq,
        };
        this.spectrum = this.forward(buf, rows);
        this
    }

    /// 2-D forward transform; only the first `live_rows` rows may be nonzero.
    fn forward(&self, mut buf: Vec<Complex<f64>>, live_rows: usize) -> Vec<Complex<f64>> {
        self.plans.row_fwd.process(&mut buf[..live_rows * self.fc]);
        let mut t = transpose(&buf, self.fr, self.fc);
        self.plans.col_fwd.process(&mut t);
        t
    }

    fn inverse(&self, mut spec: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        self.plans.col_inv.process(&mut spec);
        let mut buf = transpose(&spec, self.fc, self.fr);
        // only rows that hold valid placements are needed
        self.plans.row_inv.process(&mut buf[..self.rows * self.fc]);
        buf
    }

    /// Score maps for each template, in order.
    pub fn score_maps(&self, templates: &[&GrayImage]) -> Vec<ScoreMap> {
        let mut out = Vec::with_capacity(templates.len());
        for pair in templates.chunks(2) {
            let a = prepare(pair[0]);
            let b = pair.get(1).map(|t| prepare(t));
            let live = a.h.max(b.as_ref().map_or(0, |b| b.h));

            // pack as A - iB so one inverse yields corr(A) + i corr(B)
            let mut buf = vec![Complex::new(0.0, 0.0); self.fr * self.fc];
            for v in 0..a.h {
                for u in 0..a.w {
                    buf[v * self.fc + u].re = a.zero_mean[v * a.w + u];
                }
            }
            if let Some(b) = &b {
                for v in 0..b.h {
                    for u in 0..b.w {
                        buf[v * self.fc + u].im = -b.zero_mean[v * b.w + u];
                    }
                }
            }
            let mut spec = self.forward(buf, live);
            for (s, &i) in spec.iter_mut().zip(&self.spectrum) {
                *s = i * s.conj();
            }
            let corr = self.inverse(spec);
            let scale = 1.0 / (self.fr * self.fc) as f64;

            out.push(self.normalize(&a, &corr, scale, |c| c.re));
            if let Some(b) = &b {
                out.push(self.normalize(b, &corr, scale, |c| c.im));
            }
        }
        out
    }

    fn normalize(
        &self,
        t: &Prepared,
        corr: &[Complex<f64>],
        scale: f64,
        part: impl Fn(&Complex<f64>) -> f64,
    ) -> ScoreMap {
        let width = self.cols + 1 - t.w;
        let height = self.rows + 1 - t.h;
        let n = (t.w * t.h) as f64;
        let stride = self.cols + 1;
        let mut data = vec![0.0; width * height];
        if t.flat {
            return ScoreMap {
                width,
                height,
                data,
            };
        }
        let rect = |tab: &[f64], x: usize, y: usize| {
            tab[(y + t.h) * stride + x + t.w] - tab[y * stride + x + t.w]
                - tab[(y + t.h) * stride + x]
                + tab[y * stride + x]
        };
        for y in 0..height {
            for x in 0..width {
                let s1 = rect(&self.sum, x, y);
                let s2 = rect(&self.sum_sq, x, y);
                let var = s2 - s1 * s1 / n;
                if var <= FLAT_EPS * s2.max(1.0) {
                    continue;
                }
                let num = part(&corr[y * self.fc + x]) * scale;
                data[y * width + x] = (num / (t.norm * var.sqrt())).clamp(-1.0, 1.0);
            }
        }
        ScoreMap {
            width,
            height,
            data,
        }
    }
}

/// Relative variance below which a patch counts as flat and scores 0.
const FLAT_EPS: f64 = 1e-9;

struct Prepared {
    w: usize,
    h: usize,
    zero_mean: Vec<f64>,
    norm: f64,
    flat: bool,
}

fn prepare(t: &GrayImage) -> Prepared {
    let n = t.data().len() as f64;
    let mean = t.data().iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let zero_mean: Vec<f64> = t.data().iter().map(|&v| f64::from(v) - mean).collect();
    let ss: f64 = zero_mean.iter().map(|v| v * v).sum();
    let raw_ss: f64 = t.data().iter().map(|&v| f64::from(v) * f64::from(v)).sum();
    Prepared {
        w: t.width(),
        h: t.height(),
        zero_mean,
        norm: ss.sqrt(),
        flat: ss <= FLAT_EPS * raw_ss.max(1.0),
    }
}

fn transpose(src: &[Complex<f64>], rows: usize, cols: usize) -> Vec<Complex<f64>> {
    let mut dst = vec![Complex::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
    dst
}

/// Smallest 2^a 3^b 5^c that is at least `n`.
fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k.is_multiple_of(p) {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Local maxima of `map` above threshold whose placement rows fall inside
/// `own_rows` (absolute image rows), thinned to the minimum separation.
pub(crate) fn peaks_to_boxes(
    map: &ScoreMap,
    template: &Template,
    band_row_lo: usize,
    own_rows: (usize, usize),
    params: &MatchParams,
) -> Vec<PixelBox> {
    let th = template.pixels.height();
    let tw = template.pixels.width();
    // placement rows (map coordinates) whose template lies fully in own_rows
    let y_start = own_rows.0 - band_row_lo;
    let y_end = (own_rows.1 - band_row_lo + 1).saturating_sub(th).min(map.height);
    if y_end <= y_start {
        return Vec::new();
    }

    let mut peaks: Vec<(f64, usize, usize)> = Vec::new();
    for y in y_start..y_end {
        for x in 0..map.width {
            let s = map.at(x, y);
            if s < params.ncc_threshold {
                continue;
            }
            let mut is_max = true;
            'n: for ny in y.saturating_sub(1).max(y_start)..(y + 2).min(y_end) {
                for nx in x.saturating_sub(1)..(x + 2).min(map.width) {
                    if map.at(nx, ny) > s {
                        is_max = false;
                        break 'n;
                    }
                }
            }
            if is_max {
                peaks.push((s, x, y));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

    let min_sep = params.min_separation(tw);
    let mut accepted: Vec<(f64, usize, usize)> = Vec::new();
    for p in peaks {
        let far = accepted.iter().all(|q| {
            let dx = p.1 as f64 - q.1 as f64;
            let dy = p.2 as f64 - q.2 as f64;
            (dx * dx + dy * dy).sqrt() >= min_sep
        });
        if far {
            accepted.push(p);
        }
    }

    let origin = &template.origin_box;
    let (fx, fy) = (origin.x - origin.x.round(), origin.y - origin.y.round());
    accepted
        .into_iter()
        .map(|(s, x, y)| PixelBox {
            x: x as f64 + fx,
            y: (y + band_row_lo) as f64 + fy,
            w: origin.w,
            h: origin.h,
            score: s,
        })
        .collect()
}
