use crate::dynamics::{select_from_errors, TieGapRecord};
use crate::stumps::{differing_mass, error_difference, DichotomyMatrix};

/// Rows whose computed error is this close to the minimum have their gap
/// recomputed from the examples they disagree on.
pub(crate) const NEAR_TIE: f64 = 1e-12;

/// Gap between the best row's error and the best error among rows that
/// differ from it on at least `eps` of the weight. Rows closer than that are
/// counted in `merged_away` and ignored.
pub fn tie_gap(matrix: &DichotomyMatrix, w: &[f64], eps: f64) -> TieGapRecord {
    let errors = matrix.row_errors(w);
    let best = select_from_errors(&errors, 0.0).row;
    let best_row = matrix.row(best);
    let mut merged_away = 0;
    let mut candidates = Vec::with_capacity(errors.len());
    for k in 0..errors.len() {
        if k != best && differing_mass(best_row, matrix.row(k), w) < eps {
            merged_away += 1;
        } else {
            candidates.push(k);
        }
    }
    TieGapRecord {
        t: 0,
        gap: gap_among(matrix, w, &errors, &candidates),
        merged_away,
    }
}

/// Second-smallest minus smallest error over `candidates`, `+inf` for a
/// single candidate.
///
/// Near the minimum the difference of two computed errors can round to zero
/// although the rows differ on examples of weight far above the rounding
/// error. There the gap is taken from [`error_difference`] instead.
pub(crate) fn gap_among(
    matrix: &DichotomyMatrix,
    w: &[f64],
    errors: &[f64],
    candidates: &[usize],
) -> f64 {
    let Some(&best) = candidates
        .iter()
        .min_by(|&&a, &&b| errors[a].total_cmp(&errors[b]))
    else {
        return f64::INFINITY;
    };
    let floor = errors[best];
    let near: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&k| errors[k] <= floor + NEAR_TIE)
        .collect();
    if near.len() < 2 {
        let second = candidates
            .iter()
            .filter(|&&k| k != best)
            .map(|&k| errors[k])
            .fold(f64::INFINITY, f64::min);
        return second - floor;
    }
    let mut offsets: Vec<f64> = near
        .iter()
        .map(|&k| error_difference(matrix.row(k), matrix.row(best), w))
        .collect();
    offsets.sort_by(f64::total_cmp);
    offsets[1] - offsets[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn plain_gap() {
        let matrix = DichotomyMatrix::from_u8_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        let rec = tie_gap(&matrix, &[0.3, 0.7], 0.0);
        assert_abs_diff_eq!(rec.gap, 0.4, epsilon = 1e-15);
        assert_eq!(rec.merged_away, 0);
    }

    #[test]
    fn equivalent_rows_are_ignored() {
        let matrix = DichotomyMatrix::from_u8_rows(&[vec![1, 0, 0], vec![1, 0, 1]]).unwrap();
        let rec = tie_gap(&matrix, &[0.6, 0.4, 0.0], 1e-15);
        assert_eq!(rec.merged_away, 1);
        assert_eq!(rec.gap, f64::INFINITY);

        // Breast-Cancer style threshold behaves the same here.
        let rec = tie_gap(&matrix, &[0.6, 0.4, 0.0], 1e-10);
        assert_eq!(rec.gap, f64::INFINITY);
        // Without filtering the rows tie exactly.
        assert_eq!(tie_gap(&matrix, &[0.6, 0.4, 0.0], 0.0).gap, 0.0);
    }

    #[test]
    fn near_tie_gap_survives_rounding() {
        // The rows differ on two examples of weight ~9e-15 whose difference
        // is below the resolution of errors near 0.98.
        let (a, b) = (8.894328982058544e-15, 8.927480487806415e-15);
        let w = [0.98, a, b, 0.02 - a - b];
        let matrix =
            DichotomyMatrix::from_u8_rows(&[vec![1, 0, 1, 0], vec![1, 1, 0, 0], vec![1, 0, 0, 1]])
                .unwrap();
        let errors = matrix.row_errors(&w);
        assert_eq!(errors[0], errors[1]);
        let rec = tie_gap(&matrix, &w, 1e-15);
        assert_eq!(rec.merged_away, 0);
        assert!(rec.gap > 3e-17 && rec.gap < 3.4e-17, "{}", rec.gap);
        // Merged once the differing mass is below eps.
        assert_eq!(tie_gap(&matrix, &w, 1e-13).merged_away, 1);
    }

    proptest! {
        #[test]
        fn unfiltered_gap_is_order_statistic(
            raw in proptest::collection::vec(proptest::collection::vec(0u8..2, 5), 2..8),
            w in proptest::collection::vec(0.01f64..1.0, 5),
        ) {
            let matrix = DichotomyMatrix::from_u8_rows(&raw).unwrap();
            let total: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / total).collect();
            let mut errors = matrix.row_errors(&w);
            errors.sort_by(f64::total_cmp);
            let rec = tie_gap(&matrix, &w, 0.0);
            prop_assert_eq!(rec.gap, errors[1] - errors[0]);
            prop_assert!(rec.gap >= 0.0);
        }
    }
}
