//! Least-squares isotonic regression with uniform weights.

/// Project `values` onto the set of non-decreasing sequences, minimizing the
/// sum of squared deviations (pool adjacent violators).
///
/// Each input value starts as its own block; whenever a block mean drops
/// below the mean of the block before it, the two merge and take their
/// pooled mean. Every output entry is the mean of the merged block covering
/// it, so the result is non-decreasing and block-constant.
pub fn pava_non_decreasing(values: &[f64]) -> Vec<f64> {
    struct Block {
        sum: f64,
        len: usize,
    }
    impl Block {
        fn mean(&self) -> f64 {
            self.sum / self.len as f64
        }
    }

    let mut blocks: Vec<Block> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push(Block { sum: v, len: 1 });
        while blocks.len() >= 2 {
            let last = blocks.len() - 1;
            if blocks[last - 1].mean() > blocks[last].mean() {
                let b = blocks.pop().expect("len >= 2");
                blocks[last - 1].sum += b.sum;
                blocks[last - 1].len += b.len;
            } else {
                break;
            }
        }
    }

    let mut out = Vec::with_capacity(values.len());
    for b in &blocks {
        let m = b.mean();
        out.extend(std::iter::repeat_n(m, b.len));
    }
    out
}
