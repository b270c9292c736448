//! Shared test oracles, independent of the implementation paths they check.

/// Direct probability-product perplexity. Counts are recomputed for every
/// position by scanning the padded training sequences; no tables, no
/// incremental state, no shared code with the n-gram module.
pub fn brute_force_perplexity(
    train: &[Vec<u32>],
    eval: &[Vec<u32>],
    n: usize,
    alpha: f64,
    vocab: usize,
    pad: u32,
) -> f64 {
    let padded: Vec<Vec<u32>> = train
        .iter()
        .map(|seq| {
            let mut s = vec![pad; n - 1];
            s.extend_from_slice(seq);
            s
        })
        .collect();
    let count_pairs = |ctx: &[u32], token: Option<u32>| -> u64 {
        let mut c = 0u64;
        for seq in &padded {
            if seq.len() < n {
                continue;
            }
            for w in seq.windows(n) {
                if &w[..n - 1] == ctx {
                    match token {
                        Some(t) => {
                            if w[n - 1] == t {
                                c += 1;
                            }
                        }
                        None => c += 1,
                    }
                }
            }
        }
        c
    };
    let mut product = 1.0f64;
    let mut total_tokens = 0usize;
    for seq in eval {
        let mut padded_eval = vec![pad; n - 1];
        padded_eval.extend_from_slice(seq);
        for w in padded_eval.windows(n) {
            let ctx = &w[..n - 1];
            let token = w[n - 1];
            let joint = count_pairs(ctx, Some(token)) as f64;
            let ctx_total = count_pairs(ctx, None) as f64;
            product *= (joint + alpha) / (ctx_total + alpha * vocab as f64);
            total_tokens += 1;
        }
    }
    product.powf(-1.0 / total_tokens as f64)
}
