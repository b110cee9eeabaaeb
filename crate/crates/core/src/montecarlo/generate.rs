use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson};
use rayon::prelude::*;

use super::tags::{seconds_to_ps, Provenance, Tag, TagStream};
use super::{Channel, PerChannel, SimError, SourceModel};

/// Length of the independently seeded time slices (0.1 s). Chunk `k` always
/// draws from RNG stream `k`, so the output does not depend on thread count.
pub const CHUNK_PS: u64 = 100_000_000_000;

/// Bookkeeping of what happened to the generated photons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerationStats {
    pub pairs: u64,
    /// Idlers that left the chip and reached the splitter.
    pub idlers_transmitted: u64,
    pub routed_i1: u64,
    pub routed_i2: u64,
    /// Pair photons detected, per channel, before windowing and dead time.
    pub detected: PerChannel<u64>,
    pub darks: PerChannel<u64>,
    /// Jittered clicks that fell outside `[0, duration]`.
    pub outside_window: u64,
    pub dead_time_losses: u64,
}

#[derive(Default)]
struct Chunk {
    tags: Vec<Tag>,
    stats: GenerationStats,
}

pub fn generate_tags(model: &SourceModel) -> Result<TagStream, SimError> {
    generate_tags_with_stats(model).map(|(stream, _)| stream)
}

pub fn generate_tags_with_stats(model: &SourceModel) -> Result<(TagStream, GenerationStats), SimError> {
    model.validate()?;
    let expected = model.expected_events();
    if expected > model.max_events as f64 {
        return Err(SimError::ResourceCap {
            expected,
            cap: model.max_events,
        });
    }
    let end_ps = seconds_to_ps(model.duration_s);
    let n_chunks = end_ps.div_ceil(CHUNK_PS).max(1);
    let chunks: Vec<Chunk> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let start = k * CHUNK_PS;
            let stop = ((k + 1) * CHUNK_PS).min(end_ps);
            simulate_chunk(model, k, start, stop, end_ps)
        })
        .collect();

    let total: usize = chunks.iter().map(|c| c.tags.len()).sum();
    let mut tags = Vec::with_capacity(total);
    let mut stats = GenerationStats::default();
    for chunk in chunks {
        tags.extend_from_slice(&chunk.tags);
        accumulate(&mut stats, &chunk.stats);
    }
    // Ties are fully ordered by (time, channel), so an unstable sort is deterministic.
    tags.par_sort_unstable();
    stats.dead_time_losses = apply_dead_time(&mut tags, model.dead_time_s.map(seconds_to_ps));

    let provenance = Provenance::Simulated {
        seed: model.seed,
        pair_rate_hz: model.pair_rate_hz,
    };
    Ok((TagStream::from_sorted(tags, model.duration_s, provenance), stats))
}

fn accumulate(total: &mut GenerationStats, part: &GenerationStats) {
    total.pairs += part.pairs;
    total.idlers_transmitted += part.idlers_transmitted;
    total.routed_i1 += part.routed_i1;
    total.routed_i2 += part.routed_i2;
    total.outside_window += part.outside_window;
    for (sum, add) in [
        (&mut total.detected.s, part.detected.s),
        (&mut total.detected.i1, part.detected.i1),
        (&mut total.detected.i2, part.detected.i2),
        (&mut total.darks.s, part.darks.s),
        (&mut total.darks.i1, part.darks.i1),
        (&mut total.darks.i2, part.darks.i2),
    ] {
        *sum += add;
    }
}

fn simulate_chunk(model: &SourceModel, index: u64, start: u64, stop: u64, end_ps: u64) -> Chunk {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(index);
    let mut chunk = Chunk::default();
    let span = (stop - start) as f64;

    let eta_s = model.signal_efficiency();
    let t_idler = model.loss.idler_transmittance();
    let eta_d = model.loss.detector_efficiency;
    let jitter = model.jitter_sigma_s.map(|s| Normal::new(0.0, s * 1e12).expect("validated jitter"));

    let push = |chunk: &mut Chunk, t: f64, ch: Channel| {
        let t = t.round();
        if t < 0.0 || t > end_ps as f64 {
            chunk.stats.outside_window += 1;
        } else {
            chunk.tags.push(Tag {
                time_ps: t as u64,
                channel: ch,
            });
        }
    };

    if model.pair_rate_hz > 0.0 {
        let gap = Exp::new(model.pair_rate_hz * 1e-12).expect("validated pair rate");
        let mut t = start as f64;
        loop {
            t += gap.sample(&mut rng);
            if t >= stop as f64 {
                break;
            }
            chunk.stats.pairs += 1;
            if rng.random::<f64>() < eta_s {
                chunk.stats.detected.s += 1;
                push(&mut chunk, t + jitter.s.sample(&mut rng), Channel::S);
            }
            if rng.random::<f64>() < t_idler {
                chunk.stats.idlers_transmitted += 1;
                let (ch, eta, sigma) = if rng.random::<f64>() < model.splitter_ratio {
                    chunk.stats.routed_i1 += 1;
                    (Channel::I1, eta_d.i1, &jitter.i1)
                } else {
                    chunk.stats.routed_i2 += 1;
                    (Channel::I2, eta_d.i2, &jitter.i2)
                };
                if rng.random::<f64>() < eta {
                    match ch {
                        Channel::I1 => chunk.stats.detected.i1 += 1,
                        _ => chunk.stats.detected.i2 += 1,
                    }
                    push(&mut chunk, t + sigma.sample(&mut rng), ch);
                }
            }
        }
    }

    for ch in Channel::ALL {
        let mean = model.dark_rate_hz.get(ch) * span * 1e-12;
        if mean <= 0.0 {
            continue;
        }
        let n = Poisson::new(mean).expect("validated dark rate").sample(&mut rng) as u64;
        for _ in 0..n {
            let t = rng.random_range(start as f64..stop as f64);
            push(&mut chunk, t, ch);
        }
        match ch {
            Channel::S => chunk.stats.darks.s += n,
            Channel::I1 => chunk.stats.darks.i1 += n,
            Channel::I2 => chunk.stats.darks.i2 += n,
        }
    }
    chunk
}

/// Non-paralyzable dead time: a click within `dead` of the last kept click
/// on the same channel is discarded.
fn apply_dead_time(tags: &mut Vec<Tag>, dead: PerChannel<u64>) -> u64 {
    if dead.s == 0 && dead.i1 == 0 && dead.i2 == 0 {
        return 0;
    }
    let mut last: [Option<u64>; 3] = [None; 3];
    let before = tags.len();
    tags.retain(|tag| {
        let slot = &mut last[tag.channel.index()];
        let window = dead.get(tag.channel);
        match *slot {
            Some(prev) if window > 0 && tag.time_ps - prev < window => false,
            _ => {
                *slot = Some(tag.time_ps);
                true
            }
        }
    });
    (before - tags.len()) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonstats::LossBudget;

    fn lossless(mu: f64, duration: f64) -> SourceModel {
        let mut m = SourceModel::new(mu, LossBudget::lossless()).noiseless();
        m.duration_s = duration;
        m
    }

    #[test]
    fn zero_rates_give_empty_stream() {
        let s = generate_tags(&lossless(0.0, 1.0)).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn same_seed_same_stream() {
        let mut m = SourceModel::new(2e5, LossBudget::new(3.0, 1.0, 2.0));
        m.duration_s = 0.35;
        m.seed = 9;
        let a = generate_tags(&m).unwrap();
        let b = generate_tags(&m).unwrap();
        assert_eq!(a, b);
        m.seed = 10;
        assert_ne!(generate_tags(&m).unwrap(), a);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let mut m = SourceModel::new(1e5, LossBudget::new(1.0, 1.0, 1.0));
        m.duration_s = 0.45;
        m.seed = 3;
        let reference = generate_tags(&m).unwrap();
        for threads in [1, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            assert_eq!(pool.install(|| generate_tags(&m).unwrap()), reference);
        }
    }

    #[test]
    fn splitter_conserves_idlers() {
        let (s, stats) = generate_tags_with_stats(&lossless(3e5, 0.5)).unwrap();
        assert_eq!(s.count(Channel::I1) + s.count(Channel::I2), stats.idlers_transmitted);
        assert_eq!(stats.routed_i1 + stats.routed_i2, stats.idlers_transmitted);
        assert_eq!(stats.idlers_transmitted, stats.pairs);
        assert_eq!(s.count(Channel::S), stats.pairs);
    }

    #[test]
    fn zero_jitter_pairs_share_timestamps() {
        let s = generate_tags(&lossless(1e4, 0.2)).unwrap();
        let signal = s.times(Channel::S);
        let mut idler: Vec<u64> = s.times(Channel::I1);
        idler.extend(s.times(Channel::I2));
        idler.sort_unstable();
        assert_eq!(signal, idler);
    }

    #[test]
    fn resource_cap_checked_up_front() {
        let mut m = lossless(1e9, 10.0);
        m.max_events = 1_000_000;
        assert!(matches!(generate_tags(&m), Err(SimError::ResourceCap { cap: 1_000_000, .. })));
    }

    #[test]
    fn dead_time_spaces_clicks() {
        let mut m = lossless(2e6, 0.05);
        m.dead_time_s = PerChannel::uniform(50e-9);
        let (s, stats) = generate_tags_with_stats(&m).unwrap();
        assert!(stats.dead_time_losses > 0);
        for ch in Channel::ALL {
            let t = s.times(ch);
            assert!(t.windows(2).all(|w| w[1] - w[0] >= 50_000));
        }
    }
}
