use std::collections::{BTreeMap, HashMap};
use std::io::{self, Write};

use rayon::prelude::*;

use super::{eigenvalues3, jacobian_a, DelayedLoop};
use crate::control::{Gains, ReferenceTrack};
use crate::{Error, Result};

pub const CANDIDATE_CSV_HEADER: &str = "n_candidate,stable_flag,worst_spectral_radius,argmax_k";

/// Which linearization decides whether `n` consecutive outages are tolerable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StabilityTest {
    /// Spectrum of the loop with the `n`-step lag kept as state
    /// (`3(n+1)` eigenvalues per step), see [`DelayedLoop`].
    #[default]
    DelayLifted,
    /// Spectrum of the 3×3 `A(k)` alone, one matrix per step.
    PerStep,
}

impl StabilityTest {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityTest::DelayLifted => "delay-lifted",
            StabilityTest::PerStep => "per-step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceOptions {
    /// Eigenvalues must satisfy `|λ| < 1 − margin`.
    pub margin: f64,
    pub test: StabilityTest,
    /// Upper bound on the steps probed per candidate by the lifted test.
    /// Steps are taken on an even stride, plus the extreme-velocity and
    /// extreme-turn steps; steps with identical parameters are evaluated once.
    pub max_lifted_steps: usize,
}

impl Default for ToleranceOptions {
    fn default() -> Self {
        Self {
            margin: 0.0,
            test: StabilityTest::DelayLifted,
            max_lifted_steps: 512,
        }
    }
}

/// Result of testing one outage count over the whole track.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScan {
    pub n: usize,
    pub stable: bool,
    pub worst_spectral_radius: f64,
    pub argmax_k: usize,
    pub first_violation_step: Option<usize>,
    /// Steps that were evaluated, ascending, with their spectral radius.
    pub steps: Vec<usize>,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub n_max: usize,
    /// Spectral radius at `n_max` for each evaluated step.
    pub per_step_spectral_radius: Vec<f64>,
    /// Step indices matching `per_step_spectral_radius`.
    pub evaluated_steps: Vec<usize>,
    /// First violating step at `n_max + 1`, or at `n = 0` when `n_max = 0`
    /// and even the loss-free loop is unstable.
    pub first_violation_step: Option<usize>,
    /// `true` when no outage count was found unstable before `N_k − 1`.
    pub search_capped: bool,
    /// Whether the loss-free loop (`n = 0`) passes the test.
    pub stable_without_outages: bool,
    pub ts: f64,
    pub trace_time: f64,
    pub test: StabilityTest,
    pub margin: f64,
    /// Every candidate evaluated during the search, ascending in `n`.
    pub candidates: Vec<CandidateScan>,
}

impl StabilityReport {
    pub fn candidate(&self, n: usize) -> Option<&CandidateScan> {
        self.candidates.iter().find(|c| c.n == n)
    }

    pub fn write_candidates_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CANDIDATE_CSV_HEADER}")?;
        for c in &self.candidates {
            writeln!(
                out,
                "{},{},{},{}",
                c.n,
                u8::from(c.stable),
                c.worst_spectral_radius,
                c.argmax_k
            )?;
        }
        Ok(())
    }
}

fn per_step_scan(track: &ReferenceTrack, g: &Gains, n: usize, margin: f64) -> CandidateScan {
    let ts = track.ts();
    let steps: Vec<usize> = (n..track.steps()).collect();
    let radii: Vec<f64> = steps
        .par_iter()
        .map(|&k| {
            let now = track.sample(k);
            let then = track.sample(k - n);
            eigenvalues3(&jacobian_a(now.pose.theta, then.pose.theta, then.nu_r, ts, g)).spectral_radius()
        })
        .collect();
    summarize(n, steps, radii, margin)
}

/// Quantization key: keeps 32 of the 52 mantissa bits.
fn key(v: f64) -> u64 {
    (v.to_bits().wrapping_add(1 << 19)) >> 20
}

fn lifted_steps(track: &ReferenceTrack, n: usize, limit: usize) -> Vec<usize> {
    let n_k = track.steps();
    let count = n_k - n;
    let limit = limit.max(2);
    if count <= limit {
        return (n..n_k).collect();
    }
    let stride = count.div_ceil(limit);
    let mut steps: Vec<usize> = (n..n_k).step_by(stride).collect();
    steps.push(n_k - 1);
    let by = |f: &dyn Fn(usize) -> f64| {
        (n..n_k)
            .max_by(|&a, &b| f(a).total_cmp(&f(b)).then(b.cmp(&a)))
            .unwrap_or(n)
    };
    steps.push(by(&|k| track.sample(k - n).nu_r));
    steps.push(by(&|k| (track.pose(k + 1).theta - track.pose(k).theta).abs()));
    steps.sort_unstable();
    steps.dedup();
    steps
}

fn lifted_scan(track: &ReferenceTrack, g: &Gains, n: usize, opts: &ToleranceOptions) -> CandidateScan {
    let ts = track.ts();
    let steps = lifted_steps(track, n, opts.max_lifted_steps);

    let mut groups: Vec<DelayedLoop> = Vec::new();
    let mut index_of: HashMap<(u64, u64), usize> = HashMap::new();
    let group_of: Vec<usize> = steps
        .iter()
        .map(|&k| {
            let delta = track.pose(k + 1).theta - track.pose(k).theta;
            let nu = track.sample(k - n).nu_r;
            *index_of.entry((key(delta), key(nu))).or_insert_with(|| {
                groups.push(DelayedLoop::new(delta, nu, n, ts, g));
                groups.len() - 1
            })
        })
        .collect();

    let evaluated: Vec<f64> = groups.par_iter().map(DelayedLoop::spectral_radius).collect();
    let radii = group_of.iter().map(|&i| evaluated[i]).collect();
    summarize(n, steps, radii, opts.margin)
}

fn summarize(n: usize, steps: Vec<usize>, radii: Vec<f64>, margin: f64) -> CandidateScan {
    let bound = 1.0 - margin;
    let mut worst = f64::NEG_INFINITY;
    let mut argmax_k = steps.first().copied().unwrap_or(n);
    let mut first_violation_step = None;
    for (&k, &rho) in steps.iter().zip(&radii) {
        if rho > worst || rho.is_nan() {
            worst = rho;
            argmax_k = k;
        }
        if !(rho < bound) && first_violation_step.is_none() {
            first_violation_step = Some(k);
        }
    }
    CandidateScan {
        n,
        stable: first_violation_step.is_none(),
        worst_spectral_radius: worst,
        argmax_k,
        first_violation_step,
        steps,
        radii,
    }
}

/// Tests `n` consecutive outages at every step `k ∈ [n, N_k)` of the track,
/// linearized at the reference (`θ_c = θ_r`, `ν = ν_r`).
pub fn scan_candidate(track: &ReferenceTrack, g: &Gains, n: usize, opts: &ToleranceOptions) -> Result<CandidateScan> {
    if n >= track.steps() {
        return Err(Error::invalid(
            "n",
            format!("outage count {n} leaves no step on a track of {} steps", track.steps()),
        ));
    }
    Ok(match opts.test {
        StabilityTest::PerStep => per_step_scan(track, g, n, opts.margin),
        StabilityTest::DelayLifted => lifted_scan(track, g, n, opts),
    })
}

/// Largest outage count `n_max` for which the stability test holds at
/// every step of the track, with the default delay-lifted test.
pub fn outage_tolerance(track: &ReferenceTrack, g: &Gains, margin: f64) -> Result<StabilityReport> {
    outage_tolerance_with(
        track,
        g,
        &ToleranceOptions {
            margin,
            ..ToleranceOptions::default()
        },
    )
}

/// Exponential ramp then bisection over `n`. Monotonicity in `n` is not
/// assumed: the result is re-checked so that `n_max` passes and `n_max + 1`
/// fails, walking further when either check disagrees.
pub fn outage_tolerance_with(track: &ReferenceTrack, g: &Gains, opts: &ToleranceOptions) -> Result<StabilityReport> {
    if !(opts.margin >= 0.0 && opts.margin < 1.0) {
        return Err(Error::invalid(
            "margin",
            format!("must lie in [0, 1), got {}", opts.margin),
        ));
    }
    if track.steps() == 0 {
        return Err(Error::invalid("track", "has no steps"));
    }
    let cap = track.steps() - 1;
    let mut cache: BTreeMap<usize, CandidateScan> = BTreeMap::new();
    let stable = |cache: &mut BTreeMap<usize, CandidateScan>, n: usize| -> Result<bool> {
        if let Some(c) = cache.get(&n) {
            return Ok(c.stable);
        }
        let c = scan_candidate(track, g, n, opts)?;
        let s = c.stable;
        cache.insert(n, c);
        Ok(s)
    };

    let stable_without_outages = stable(&mut cache, 0)?;
    let mut capped = false;
    let mut n_max = 0;
    if stable_without_outages && cap > 0 {
        let mut lo = 0;
        let mut probe = 1;
        let hi = loop {
            if probe >= cap {
                if stable(&mut cache, cap)? {
                    capped = true;
                    break None;
                }
                break Some(cap);
            }
            if !stable(&mut cache, probe)? {
                break Some(probe);
            }
            lo = probe;
            probe *= 2;
        };
        n_max = match hi {
            None => cap,
            Some(mut hi) => {
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if stable(&mut cache, mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        };
        while n_max < cap && stable(&mut cache, n_max + 1)? {
            n_max += 1;
        }
        while n_max > 0 && !stable(&mut cache, n_max)? {
            n_max -= 1;
        }
        capped = capped || (n_max == cap && stable(&mut cache, cap)?);
    }

    let first_violation_step = if !stable_without_outages {
        cache[&0].first_violation_step
    } else if n_max < cap {
        if !cache.contains_key(&(n_max + 1)) {
            stable(&mut cache, n_max + 1)?;
        }
        cache[&(n_max + 1)].first_violation_step
    } else {
        None
    };

    let at_max = &cache[&n_max];
    Ok(StabilityReport {
        n_max,
        per_step_spectral_radius: at_max.radii.clone(),
        evaluated_steps: at_max.steps.clone(),
        first_violation_step,
        search_capped: capped,
        stable_without_outages,
        ts: track.ts(),
        trace_time: track.trace_time(),
        test: opts.test,
        margin: opts.margin,
        candidates: cache.into_values().collect(),
    })
}
