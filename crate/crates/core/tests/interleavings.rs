use colmod_core::sim::exhaustive_interleavings;

#[test]
fn every_interleaving_of_up_to_four_ops_converges() {
    let start = std::time::Instant::now();
    let checked = exhaustive_interleavings(4).unwrap_or_else(|c| {
        panic!(
            "orders {:?} and {:?} disagree on {:?}",
            c.first, c.second, c.ops
        )
    });
    assert_eq!(
        checked,
        21 + 21usize.pow(2) + 21usize.pow(3) + 21usize.pow(4)
    );
    eprintln!("{checked} sequences in {:?}", start.elapsed());
}
