use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::amplitude::{ComplexTime, SurvivalAmplitude};
use crate::error::{Error, Result};

use super::winding::PhaseTracer;
use super::{Rect, SearchWindow, Zero, ZeroSet};

const MAX_RETRIES: u32 = 5;

/// Finds the zeros of `amp` inside `window` by recursive subdivision.
///
/// Each cell is cut into a `k x k` grid. Phase increments are computed once
/// per shared grid edge, so the children's winding numbers add up to the
/// parent's exactly. Cells with winding number zero are discarded, the rest
/// are subdivided until their diagonal drops below the target resolution.
/// The reported multiplicity is the rounded winding number of the final cell.
///
/// When a grid line passes too close to a zero the interior lines are shifted
/// by a small seeded random offset and the cell is retried.
pub fn find_zeros<A>(amp: &A, window: &SearchWindow) -> Result<ZeroSet>
where
    A: SurvivalAmplitude + Sync + ?Sized,
{
    window.validate()?;
    let finder = Finder {
        amp,
        window,
        resolution: window.resolution(),
    };

    let target = window.rect();
    let mut root = target;
    let mut children = None;
    for attempt in 0..=MAX_RETRIES {
        match finder.subdivide(&root) {
            Ok(c) => {
                children = Some(c);
                break;
            }
            Err(CellFailure::Outer) if attempt < MAX_RETRIES => {
                // the window boundary itself passes through a zero
                let mut rng = cell_rng(window.seed, &root, 1000 + attempt);
                let grow = |rng: &mut ChaCha8Rng| rng.gen_range(1e-3..3e-3) * target.diagonal();
                root = Rect::new(
                    target.beta_min - grow(&mut rng),
                    target.beta_max + grow(&mut rng),
                    target.t_min - grow(&mut rng),
                    target.t_max + grow(&mut rng),
                );
            }
            Err(_) => return Err(Error::NonConvergent { rect: root }),
        }
    }
    let mut active = children.expect("loop either sets children or returns");

    let mut zeros = Vec::new();
    while !active.is_empty() {
        let (done, open): (Vec<_>, Vec<_>) = active
            .into_iter()
            .partition(|(cell, _)| cell.diagonal() <= finder.resolution);
        for (cell, w) in done {
            zeros.push(Zero::exact(cell.center(), w));
        }
        let next: Vec<Vec<(Rect, u32)>> = open
            .par_iter()
            .map(|(cell, _)| {
                finder
                    .subdivide(cell)
                    .map_err(|_| Error::NonConvergent { rect: *cell })
            })
            .collect::<Result<_>>()?;
        active = next.into_iter().flatten().collect();
    }

    // an expanded root can pick up zeros just outside the requested window
    zeros.retain(|z| target.contains(z.z));
    Ok(ZeroSet::new(zeros))
}

struct Finder<'a, A: ?Sized> {
    amp: &'a A,
    window: &'a SearchWindow,
    resolution: f64,
}

enum CellFailure {
    /// The cell's own boundary could not be resolved.
    Outer,
    /// Interior lines failed or gave non-integral windings.
    Interior,
}

impl<A: SurvivalAmplitude + Sync + ?Sized> Finder<'_, A> {
    /// Children of `cell` with nonzero winding number.
    fn subdivide(&self, cell: &Rect) -> std::result::Result<Vec<(Rect, u32)>, CellFailure> {
        let mut last = CellFailure::Interior;
        for attempt in 0..=MAX_RETRIES {
            let jitter = if attempt == 0 {
                None
            } else {
                Some(cell_rng(self.window.seed, cell, attempt))
            };
            match self.try_grid(cell, jitter) {
                Ok(c) => return Ok(c),
                Err(CellFailure::Outer) => return Err(CellFailure::Outer),
                Err(e) => last = e,
            }
        }
        Err(last)
    }

    fn try_grid(
        &self,
        cell: &Rect,
        jitter: Option<ChaCha8Rng>,
    ) -> std::result::Result<Vec<(Rect, u32)>, CellFailure> {
        let k = self.window.grid_k;
        let (betas, ts) = grid_lines(cell, k, jitter);
        let tracer = PhaseTracer::new(self.amp, self.window);
        let at = |c: usize, r: usize| ComplexTime::new(betas[c], ts[r]);

        // horizontal[r][c]: from (c, r) to (c + 1, r); vertical[c][r]: from (c, r) to (c, r + 1)
        let mut horizontal = vec![vec![0.0; k]; k + 1];
        let mut vertical = vec![vec![0.0; k]; k + 1];
        for line in 0..=k {
            let outer = line == 0 || line == k;
            for seg in 0..k {
                let h = tracer.increment(at(seg, line), at(seg + 1, line));
                let v = tracer.increment(at(line, seg), at(line, seg + 1));
                match (h, v) {
                    (Ok(h), Ok(v)) => {
                        horizontal[line][seg] = h;
                        vertical[line][seg] = v;
                    }
                    _ if outer => return Err(CellFailure::Outer),
                    _ => return Err(CellFailure::Interior),
                }
            }
        }

        let threshold = self.window.winding_threshold;
        let mut out = Vec::new();
        for r in 0..k {
            for c in 0..k {
                let w = (horizontal[r][c] + vertical[c + 1][r] - horizontal[r + 1][c] - vertical[c][r])
                    / TAU;
                let n = w.round();
                if (w - n).abs() > threshold || n < 0.0 {
                    return Err(CellFailure::Interior);
                }
                if n >= 1.0 {
                    out.push((Rect::new(betas[c], betas[c + 1], ts[r], ts[r + 1]), n as u32));
                }
            }
        }
        Ok(out)
    }
}

fn grid_lines(cell: &Rect, k: usize, jitter: Option<ChaCha8Rng>) -> (Vec<f64>, Vec<f64>) {
    let line = |lo: f64, hi: f64, i: usize| {
        if i == k {
            hi
        } else {
            lo + (hi - lo) * i as f64 / k as f64
        }
    };
    let mut betas: Vec<f64> = (0..=k).map(|i| line(cell.beta_min, cell.beta_max, i)).collect();
    let mut ts: Vec<f64> = (0..=k).map(|i| line(cell.t_min, cell.t_max, i)).collect();
    if let Some(mut rng) = jitter {
        let diag = cell.diagonal();
        for (lines, spacing) in [
            (&mut betas, cell.width() / k as f64),
            (&mut ts, cell.height() / k as f64),
        ] {
            for x in lines.iter_mut().take(k).skip(1) {
                let magnitude = (rng.gen_range(1e-3..3e-3) * diag).min(0.25 * spacing);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                *x += sign * magnitude;
            }
        }
    }
    (betas, ts)
}

/// Jitter stream for one cell, fixed by the window seed and the cell bounds.
fn cell_rng(seed: u64, cell: &Rect, attempt: u32) -> ChaCha8Rng {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for x in [cell.beta_min, cell.beta_max, cell.t_min, cell.t_max] {
        h = splitmix(h ^ x.to_bits());
    }
    ChaCha8Rng::seed_from_u64(splitmix(h ^ attempt as u64))
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
