use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::StatsError;
use crate::corpus::Storyset;

/// `n` distinct indices below `len`, uniform over all subsets and determined
/// entirely by `(seed, draw_index)`. Each draw index selects its own ChaCha
/// stream, so draws can be generated independently and in any order.
pub fn sample_indices(len: usize, n: usize, seed: u64, draw_index: u64) -> Result<Vec<usize>, StatsError> {
    if n == 0 || n > len {
        return Err(StatsError::SampleTooLarge {
            requested: n,
            available: len,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    let mut picked = rand::seq::index::sample(&mut rng, len, n).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Simple random sample of `n` stories from `background`, ids sorted.
pub fn sample_storyset(background: &Storyset, n: usize, seed: u64, draw_index: u64) -> Result<Storyset, StatsError> {
    let ids = background.ids();
    let picked = sample_indices(ids.len(), n, seed, draw_index)?;
    let mut chosen: Vec<String> = picked.into_iter().map(|i| ids[i].clone()).collect();
    chosen.sort();
    Ok(Storyset::from_sorted_unique(
        format!("{}~sample-{seed}-{draw_index}", background.name()),
        chosen,
    ))
}
