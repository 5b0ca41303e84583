use std::path::Path;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use shufflecodec::dataset::{compress_corpus, decompress_corpus, expected_canonical, load_tu_dataset, CompressOptions, Corpus};
use shufflecodec::generate::{erdos_renyi, with_random_attrs, with_random_self_loops};
use shufflecodec::params::{AttrsMode, ModelKind};

#[test]
fn fixture_loads_with_labels() {
    let c = load_tu_dataset(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/toy"))).unwrap();
    assert_eq!(c.name, "TOY");
    let sizes: Vec<usize> = c.graphs.iter().map(|g| g.n()).collect();
    assert_eq!(sizes, [3, 4]);
    assert_eq!(c.num_edges(), 6);
    // Node labels 6, 7, 8 map to 0, 1, 2.
    assert_eq!(c.graphs[0].vertex_attrs().unwrap(), [0, 2, 0]);
    assert_eq!(c.graphs[1].edge_attrs().unwrap(), [0, 0, 0, 1]);
}

#[test]
fn order_is_restored() {
    let mut rng = StdRng::seed_from_u64(11);
    let graphs = [2, 9, 4, 9, 1, 6].iter().map(|&n| erdos_renyi(n, 0.4, &mut rng)).collect();
    let corpus = Corpus::new("mixed", graphs);
    let opts = CompressOptions::default();
    let (bytes, _) = compress_corpus(&corpus, &opts).unwrap();
    let back = decompress_corpus(&bytes, "mixed").unwrap();
    let sizes: Vec<usize> = back.graphs.iter().map(|g| g.n()).collect();
    assert_eq!(sizes, [2, 9, 4, 9, 1, 6]);
    assert_eq!(back.graphs, expected_canonical(&corpus, &opts).unwrap());
}

#[test]
fn dropping_order_is_cheaper() {
    let mut rng = StdRng::seed_from_u64(12);
    let corpus = Corpus::new("er", (0..30).map(|k| erdos_renyi(4 + k % 7, 0.3, &mut rng)).collect());
    let size = |keep_order| {
        let opts = CompressOptions { keep_order, ..CompressOptions::default() };
        compress_corpus(&corpus, &opts).unwrap().1.shuffle_bits_per_edge
    };
    assert!(size(false) < size(true));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn corpus_round_trip(
        seed in any::<u64>(),
        sizes in prop::collection::vec(0usize..10, 1..8),
        pu in any::<bool>(),
        attrs in 0usize..3,
        loops in any::<bool>(),
        labelled in any::<bool>(),
        keep_order in any::<bool>(),
    ) {
        let mut rng = StdRng::seed_from_u64(seed);
        let graphs = sizes
            .iter()
            .map(|&n| {
                let mut g = erdos_renyi(n, 0.4, &mut rng);
                if loops {
                    g = with_random_self_loops(&g, 0.2, &mut rng);
                }
                if labelled {
                    g = with_random_attrs(&g, 4, 3, &mut rng);
                }
                g
            })
            .collect();
        let corpus = Corpus::new("p", graphs);
        let opts = CompressOptions {
            model: if pu { ModelKind::Pu } else { ModelKind::Er },
            attrs: [AttrsMode::Auto, AttrsMode::None, AttrsMode::Uniform][attrs],
            redraws: false,
            keep_order,
            seed,
        };
        let (bytes, _) = compress_corpus(&corpus, &opts).unwrap();
        let mut back = decompress_corpus(&bytes, "p").unwrap().graphs;
        if !keep_order {
            back.sort();
        }
        prop_assert_eq!(back, expected_canonical(&corpus, &opts).unwrap());
    }
}
