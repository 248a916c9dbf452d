//! NGD from raw page counts, including the effect of a shrinking index.

use simdist::ngd::{ngd_from_counts, ngd_from_counts_checked};

fn main() -> simdist::Result<()> {
    let full = ngd_from_counts(46_700_000.0, 12_200_000.0, 2_630_000.0, 8_058_044_651.0)?;
    let half = ngd_from_counts(23_700_000.0, 6_270_000.0, 1_180_000.0, 4_285_199_774.0)?;
    println!("NGD(horse, rider) = {full:.3} with the full index");
    println!("NGD(horse, rider) = {half:.3} with about half the pages");

    let never = ngd_from_counts(1000.0, 2000.0, 0.0, 1e9)?;
    println!("terms that never co-occur: {never}");
    let odd = ngd_from_counts_checked(10.0, 20.0, 50.0, 1e6)?;
    println!("pair count above a single count: {:.3} (inconsistent: {})", odd.value, odd.inconsistent);
    Ok(())
}
