use proptest::prelude::*;
use rainshift_core::ingest::{annual_totals, decadal_profiles, month_series, RainfallRecord, RainfallSeries};

fn series() -> impl Strategy<Value = RainfallSeries> {
    (1800i32..2000, prop::collection::vec(prop::array::uniform12(0.0f64..800.0), 2..130)).prop_map(
        |(start, rows)| {
            let records = rows.into_iter().enumerate().map(|(i, depths)| RainfallRecord { year: start + i as i32, depths });
            RainfallSeries::new("prop", records.collect()).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn decadal_year_counts_cover_the_series(s in series(), len in 1usize..25) {
        let d = decadal_profiles(&s, len).unwrap();
        prop_assert_eq!(d.iter().map(|p| p.year_count).sum::<usize>(), s.len());
        prop_assert_eq!(d.len(), s.len().div_ceil(len));
        for p in &d {
            prop_assert!(p.year_count >= 1 && p.year_count <= len);
            prop_assert_eq!((p.end_year - p.start_year + 1) as usize, p.year_count);
        }
    }

    #[test]
    fn decadal_means_lie_within_block_extremes(s in series(), len in 1usize..25) {
        for p in decadal_profiles(&s, len).unwrap() {
            let block: Vec<_> = s.records().iter().filter(|r| r.year >= p.start_year && r.year <= p.end_year).collect();
            for m in 0..12 {
                let lo = block.iter().map(|r| r.depths[m]).fold(f64::INFINITY, f64::min);
                let hi = block.iter().map(|r| r.depths[m]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(lo - 1e-9 <= p.monthly_means[m] && p.monthly_means[m] <= hi + 1e-9);
            }
        }
    }

    #[test]
    fn month_columns_reconstruct_records(s in series()) {
        let cols: Vec<_> = (1..=12).map(|m| month_series(&s, m).unwrap()).collect();
        for (i, r) in s.records().iter().enumerate() {
            for m in 0..12 {
                prop_assert_eq!(cols[m].values[i], r.depths[m]);
                prop_assert_eq!(cols[m].years[i], r.year);
            }
        }
    }

    #[test]
    fn annual_totals_sum_months(s in series()) {
        for ((year, total), r) in annual_totals(&s).into_iter().zip(s.records()) {
            prop_assert_eq!(year, r.year);
            prop_assert_eq!(total, r.depths.iter().sum::<f64>());
        }
    }
}

#[test]
fn century_record_splits_into_thirteen_decades() {
    let records = (1901..=2022).map(|year| RainfallRecord { year, depths: [50.0; 12] }).collect();
    let s = RainfallSeries::new("synthetic", records).unwrap();
    assert_eq!(s.len() * 12, 1464);
    let d = decadal_profiles(&s, 10).unwrap();
    assert_eq!(d.len(), 13);
    assert_eq!((d[12].start_year, d[12].end_year, d[12].year_count), (2021, 2022, 2));
}
