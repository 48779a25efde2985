use crate::error::{Error, Result};
use crate::lambda::{LambdaOptions, LambdaProfile};
use crate::seq::DigitalSequence;

/// Blocks `[i(w+s), i(w+s)+w)` that fit in `[0, levels)`.
pub fn block_intervals(levels: u32, w: u32, s: u32) -> Result<Vec<(u32, u32)>> {
    if w == 0 {
        return Err(Error::InvalidArgument("block width must be positive".into()));
    }
    let stride = w + s;
    Ok((0..)
        .map(|i: u32| (i * stride, i * stride + w))
        .take_while(|&(_, hi)| hi <= levels)
        .collect())
}

/// Partial sums of `λ̄_f` over blocks of width `w` separated by `s` positions,
/// both `2r + 1` by default.
pub fn lambda_sum_series(
    f: &DigitalSequence,
    levels: u32,
    w: Option<u32>,
    s: Option<u32>,
    opts: &LambdaOptions,
) -> Result<LambdaProfile> {
    let default = 2 * f.gap() + 1;
    let blocks = block_intervals(levels, w.unwrap_or(default), s.unwrap_or(default))?;
    LambdaProfile::compute(f, &blocks, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Phase;

    #[test]
    fn blocks() {
        assert_eq!(block_intervals(7, 1, 1).unwrap(), vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
        assert_eq!(block_intervals(10, 3, 3).unwrap(), vec![(0, 3), (6, 9)]);
        assert!(block_intervals(10, 3, 3).unwrap().len() == 2);
        assert!(block_intervals(10, 0, 3).is_err());
        assert!(block_intervals(2, 3, 3).unwrap().is_empty());
    }

    #[test]
    fn thue_morse_grows_linearly() {
        let tm = DigitalSequence::thue_morse();
        let prof = lambda_sum_series(&tm, 40, None, None, &LambdaOptions::default()).unwrap();
        assert_eq!(prof.rows.len(), 20);
        for (i, row) in prof.rows.iter().enumerate() {
            assert_eq!(row.partial_bar_sum, (i + 1) as f64);
        }
    }

    #[test]
    fn dyadic_linear_phase_stays_bounded() {
        let f = DigitalSequence::linear(2, Phase::rational(1, 8).unwrap()).unwrap();
        let prof = lambda_sum_series(&f, 40, None, None, &LambdaOptions::default()).unwrap();
        assert!(prof.total() < 1.5);
        assert_eq!(prof.rows[19].partial_bar_sum, prof.rows[2].partial_bar_sum);
    }
}
