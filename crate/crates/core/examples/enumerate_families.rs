//! Exhaustive frequency check over all union-closed families on small ground
//! sets.

use uc_entropy::family::{conjecture_check, enumerate_union_closed, frequencies, union_product, SetFamily};

fn main() -> uc_entropy::Result<()> {
    let f = SetFamily::from_json(r#"{"n": 3, "sets": [[], [1], [2, 3]]}"#)?;
    println!("closure of {:?}: {:?}", f.element_lists(), union_product(&f).element_lists());

    for n in 1..=4 {
        let r = conjecture_check(n, 0.5)?;
        println!(
            "n = {n}: {:>5} union-closed families, min max-ratio {}, violations {}, e.g. {:?}",
            r.families,
            r.min_max_ratio,
            r.violations.len(),
            r.minimizer.element_lists()
        );
    }

    let most_skewed = enumerate_union_closed(4)?
        .into_iter()
        .filter(|f| f.len() >= 4)
        .max_by(|a, b| frequencies(a).max_ratio.total_cmp(&frequencies(b).max_ratio))
        .expect("families exist");
    println!("\nmost concentrated family with >= 4 sets: {:?}", most_skewed.element_lists());
    println!("frequencies: {:?}", frequencies(&most_skewed));
    Ok(())
}
