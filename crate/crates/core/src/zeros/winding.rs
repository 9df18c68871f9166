use std::f64::consts::{FRAC_PI_2, TAU};

use crate::amplitude::{wrap_phase, ComplexTime, SurvivalAmplitude};
use crate::error::{Error, Result};

use super::{Rect, SearchWindow};

/// Tracks the continuous phase of an amplitude along straight segments.
pub(crate) struct PhaseTracer<'a, A: ?Sized> {
    amp: &'a A,
    samples: usize,
    max_depth: u32,
    max_frequency: Option<f64>,
}

/// Upper limit on the base samples of one edge.
const MAX_EDGE_SAMPLES: usize = 1 << 20;

/// The phase step could not be resolved below `pi/2` within the depth limit,
/// or the amplitude vanished / was not finite on the path.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Unresolved;

impl<'a, A: SurvivalAmplitude + ?Sized> PhaseTracer<'a, A> {
    pub fn new(amp: &'a A, window: &SearchWindow) -> Self {
        Self {
            amp,
            samples: window.boundary_samples,
            max_depth: window.max_depth,
            max_frequency: amp.max_frequency().filter(|f| f.is_finite() && *f > 0.0),
        }
    }

    fn phase(&self, z: ComplexTime) -> std::result::Result<f64, Unresolved> {
        let v = self.amp.amplitude(z);
        if v.is_finite() {
            Ok(v.phase)
        } else {
            Err(Unresolved)
        }
    }

    /// Net change of `arg L` from `a` to `b`.
    pub fn increment(&self, a: ComplexTime, b: ComplexTime) -> std::result::Result<f64, Unresolved> {
        // no term turns by more than pi/2 between base samples
        let n = match self.max_frequency {
            Some(f) => {
                let needed = (a.distance(b) * f / FRAC_PI_2).ceil();
                self.samples.max(needed.min(MAX_EDGE_SAMPLES as f64) as usize)
            }
            None => self.samples,
        };
        let point = |i: usize| {
            if i == n {
                return b;
            }
            let s = i as f64 / n as f64;
            ComplexTime::new(a.beta + s * (b.beta - a.beta), a.t + s * (b.t - a.t))
        };
        let mut prev_z = a;
        let mut prev = self.phase(a)?;
        let mut total = 0.0;
        for i in 1..=n {
            let z = point(i);
            let p = self.phase(z)?;
            total += self.refine(prev_z, z, prev, p, 0)?;
            prev_z = z;
            prev = p;
        }
        Ok(total)
    }

    fn refine(
        &self,
        za: ComplexTime,
        zb: ComplexTime,
        pa: f64,
        pb: f64,
        depth: u32,
    ) -> std::result::Result<f64, Unresolved> {
        let d = wrap_phase(pb - pa);
        if d.abs() <= FRAC_PI_2 {
            return Ok(d);
        }
        if depth >= self.max_depth {
            return Err(Unresolved);
        }
        let zm = ComplexTime::new(0.5 * (za.beta + zb.beta), 0.5 * (za.t + zb.t));
        let pm = self.phase(zm)?;
        Ok(self.refine(za, zm, pa, pm, depth + 1)? + self.refine(zm, zb, pm, pb, depth + 1)?)
    }
}

/// Winding number of `amp` around the counter-clockwise boundary of `rect`,
/// as a real number (integral up to sampling error).
pub fn winding_number<A: SurvivalAmplitude + ?Sized>(
    amp: &A,
    rect: &Rect,
    window: &SearchWindow,
) -> Result<f64> {
    let tracer = PhaseTracer::new(amp, window);
    let c = [
        ComplexTime::new(rect.beta_min, rect.t_min),
        ComplexTime::new(rect.beta_max, rect.t_min),
        ComplexTime::new(rect.beta_max, rect.t_max),
        ComplexTime::new(rect.beta_min, rect.t_max),
    ];
    let mut total = 0.0;
    for i in 0..4 {
        total += tracer
            .increment(c[i], c[(i + 1) % 4])
            .map_err(|_| Error::NonConvergent { rect: *rect })?;
    }
    Ok(total / TAU)
}
