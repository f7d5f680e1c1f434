use rand::Rng;

/// Half-open frame range `[start, end)`.
pub type Window = (usize, usize);

/// Windows left after dropping the first `offset` frames: as many
/// non-overlapping, consecutive `seq_len` windows as fit.
pub fn chop_windows(video_len: usize, seq_len: usize, offset: usize) -> Vec<Window> {
    if seq_len == 0 || offset >= video_len {
        return Vec::new();
    }
    let count = (video_len - offset) / seq_len;
    (0..count)
        .map(|k| {
            let start = offset + k * seq_len;
            (start, start + seq_len)
        })
        .collect()
}

/// Draws an offset uniformly from `[1, seq_len]` and chops the video.
/// Returns the offset with the windows. Videos no longer than `seq_len`
/// yield offset 0 and no windows, without consuming randomness.
pub fn chop_augment<R: Rng + ?Sized>(
    video_len: usize,
    seq_len: usize,
    rng: &mut R,
) -> (usize, Vec<Window>) {
    if video_len <= seq_len || seq_len == 0 {
        log::warn!("video of {video_len} frames is too short for {seq_len}-frame windows");
        return (0, Vec::new());
    }
    let offset = rng.random_range(1..=seq_len);
    (offset, chop_windows(video_len, seq_len, offset))
}
