//! Run statistics of outage sequences and of the two-state chain.

/// Length of the longest run of `true`.
pub fn longest_run(flags: &[bool]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for &f in flags {
        run = if f { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

/// `P(outage | previous slot delivered)` that makes `p1` stationary for a
/// chain with `P(outage | outage) = p_bb`.
pub fn recovery_to_outage(p1: f64, p_bb: f64) -> f64 {
    if p1 >= 1.0 {
        1.0
    } else {
        (p1 * (1.0 - p_bb) / (1.0 - p1)).clamp(0.0, 1.0)
    }
}

/// Probability that `length` slots of the stationary two-state chain
/// contain a run of at least `m` outages.
pub fn burst_probability(m: usize, length: usize, p1: f64, p_bb: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if length < m {
        return 0.0;
    }
    let q = recovery_to_outage(p1, p_bb);
    // dist[r]: not yet absorbed, current run length r
    let mut dist = vec![0.0; m];
    let mut absorbed = 0.0;
    if m == 1 {
        absorbed = p1;
    } else {
        dist[1] = p1;
    }
    dist[0] = 1.0 - p1;
    let mut next = vec![0.0; m];
    for _ in 1..length {
        next.iter_mut().for_each(|v| *v = 0.0);
        let in_run: f64 = dist[1..].iter().sum();
        next[0] = dist[0] * (1.0 - q) + in_run * (1.0 - p_bb);
        if m == 1 {
            absorbed += dist[0] * q;
        } else {
            next[1] = dist[0] * q;
            for r in 1..m - 1 {
                next[r + 1] = dist[r] * p_bb;
            }
            absorbed += dist[m - 1] * p_bb;
        }
        std::mem::swap(&mut dist, &mut next);
    }
    absorbed.clamp(0.0, 1.0)
}
