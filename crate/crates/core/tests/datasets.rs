use std::collections::HashSet;

use ciphermimic::cipher::make_reference_oracle;
use ciphermimic::dataset::{generate_pairs, read_pairs, write_pairs};
use ciphermimic::{CipherOracle, Error, Format, Hitag2Mode, Hitag2Oracle, OracleSpec};

#[test]
fn same_seed_same_pairs_in_both_formats() {
    let oracle = "des:rounds=1".parse::<OracleSpec>().unwrap().build().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = generate_pairs(oracle.as_ref(), 1 << 10, 1, None).unwrap();
    let b = generate_pairs(oracle.as_ref(), 1 << 10, 1, None).unwrap();
    assert_eq!(a, b);
    assert!(a.verify(oracle.as_ref()));
    for format in [Format::Binary, Format::Jsonl] {
        let p1 = dir.path().join(format!("a.{}", format.extension()));
        let p2 = dir.path().join(format!("b.{}", format.extension()));
        write_pairs(&a, &p1, format).unwrap();
        write_pairs(&b, &p2, format).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert_eq!(read_pairs(&p1, format).unwrap(), a);
    }
    let c = generate_pairs(oracle.as_ref(), 1 << 10, 2, None).unwrap();
    assert_ne!(a, c);
}

#[test]
fn train_and_test_sets_are_disjoint() {
    for spec in ["des:rounds=3", "hitag2", "hitag2:mode=keystream", "identity:width=12"] {
        let oracle = spec.parse::<OracleSpec>().unwrap().build().unwrap();
        let test = generate_pairs(oracle.as_ref(), 1 << 10, 7, None).unwrap();
        let train = generate_pairs(oracle.as_ref(), 1 << 11, 8, Some(&test)).unwrap();
        assert_eq!((test.len(), train.len()), (1 << 10, 1 << 11), "{spec}");
        assert!(train.is_disjoint(&test), "{spec}");
        let inputs: HashSet<_> = train.iter().map(|p| &p.0).collect();
        assert_eq!(inputs.len(), train.len());
        assert!(train.verify(oracle.as_ref()));
    }
}

#[test]
fn small_spaces_fill_exactly_and_then_refuse() {
    let oracle = make_reference_oracle("identity", 8, 0, 0).unwrap();
    let test = generate_pairs(&oracle, 100, 1, None).unwrap();
    let train = generate_pairs(&oracle, 156, 2, Some(&test)).unwrap();
    assert!(train.is_disjoint(&test));
    let err = generate_pairs(&oracle, 157, 2, Some(&test)).unwrap_err();
    assert!(matches!(err, Error::Capacity(_)));
}

#[test]
fn hitag2_widths() {
    let oracle = Hitag2Oracle::new(Hitag2Mode::Filter);
    let set = generate_pairs(&oracle, 1 << 10, 1, None).unwrap();
    assert_eq!((set.input_bits(), set.output_bits()), (48, 1));
    assert_eq!(oracle.input_bits(), 48);
    let ones = set.iter().filter(|p| p.1.bit(0) == 1).count();
    assert!((400..624).contains(&ones), "{ones}");
}
