use std::io::Write;
use std::path::PathBuf;

use aotree::dataset::{encode, read_csv};
use aotree::{load_csv, ClassColumn, EncodedDataset, Encoding, Error};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn monk1(scheme: Encoding) -> EncodedDataset {
    let raw = load_csv(data("monk1.csv"), &ClassColumn::default(), true).unwrap();
    encode(&raw, scheme).unwrap()
}

#[test]
fn monk1_shapes_per_encoding() {
    let expect = [
        (Encoding::Ordinal, 6),
        (Encoding::OnehotFull, 17),
        (Encoding::OnehotDropFirst, 11),
        (Encoding::OnehotDropLast, 11),
    ];
    for (scheme, q) in expect {
        let ds = monk1(scheme);
        assert_eq!(ds.n(), 124, "{scheme:?}");
        assert_eq!(ds.q(), q, "{scheme:?}");
        assert_eq!(ds.k(), 2);
        assert_eq!(ds.encoding(), scheme);
        if scheme != Encoding::Ordinal {
            assert!(ds.categories().iter().all(|&c| c == 2));
        }
    }
}

#[test]
fn onehot_rows_decode_to_source_rows() {
    let raw = load_csv(data("monk1.csv"), &ClassColumn::default(), true).unwrap();
    for scheme in Encoding::ALL {
        let ds = encode(&raw, scheme).unwrap();
        for (i, row) in raw.rows().iter().enumerate() {
            let features: Vec<&str> = raw.feature_columns().iter().map(|&c| row[c].as_str()).collect();
            assert_eq!(ds.maps().decode_row(&ds.row(i)), features);
            assert_eq!(ds.maps().encode_row(i, &features).unwrap(), ds.row(i));
            assert_eq!(ds.maps().class_label(ds.labels()[i] as usize), row[raw.class_column()]);
        }
    }
}

#[test]
fn full_onehot_has_one_indicator_per_group() {
    let ds = monk1(Encoding::OnehotFull);
    for i in 0..ds.n() {
        assert_eq!(ds.row(i).iter().sum::<u32>(), 6);
    }
}

#[test]
fn headerless_file_from_tempfile() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "a,x,0\nb,y,1\na,y,1\nb,x,0").unwrap();
    let raw = load_csv(file.path(), &ClassColumn::Index(-1), false).unwrap();
    assert_eq!(raw.column_names(), ["c0", "c1", "c2"]);
    let ds = encode(&raw, Encoding::Ordinal).unwrap();
    assert_eq!((ds.n(), ds.q(), ds.k()), (4, 2, 2));
}

#[test]
fn class_column_by_name_and_index() {
    let text = "label,colour\nyes,red\nno,blue\n";
    let by_name = read_csv(text.as_bytes(), &"label".parse().unwrap(), true).unwrap();
    let by_index = read_csv(text.as_bytes(), &"0".parse().unwrap(), true).unwrap();
    assert_eq!(by_name.class_column(), 0);
    assert_eq!(by_index.class_column(), 0);
    assert!(matches!(
        read_csv(text.as_bytes(), &"missing".parse().unwrap(), true),
        Err(Error::MissingClassColumn(_))
    ));
}

#[test]
fn malformed_inputs_are_rejected() {
    let ragged = "a,b,y\n1,2,0\n1,0\n";
    assert!(matches!(read_csv(ragged.as_bytes(), &ClassColumn::default(), true), Err(Error::RaggedRow { .. })));
    let empty = "a,b,y\n";
    assert!(matches!(read_csv(empty.as_bytes(), &ClassColumn::default(), true), Err(Error::EmptyTable)));
    let constant = "a,b,y\n1,2,0\n1,3,1\n";
    let raw = read_csv(constant.as_bytes(), &ClassColumn::default(), true).unwrap();
    assert!(matches!(encode(&raw, Encoding::Ordinal), Err(Error::ConstantFeature { column, .. }) if column == "a"));
    let (dropped, names) = raw.drop_constant_features();
    assert_eq!(names, ["a"]);
    assert_eq!(encode(&dropped, Encoding::Ordinal).unwrap().q(), 1);
}

#[test]
fn mushroom_needs_veil_type_dropped() {
    let class = ClassColumn::Name("class".into());
    let raw = load_csv(data("mushroom.csv"), &class, true).unwrap();
    assert_eq!(raw.n_rows(), 8124);
    assert!(encode(&raw, Encoding::Ordinal).is_err());
    let (raw, dropped) = raw.drop_constant_features();
    assert_eq!(dropped, ["veil-type"]);
    let ds = encode(&raw, Encoding::Ordinal).unwrap();
    assert_eq!((ds.q(), ds.k()), (21, 2));
}

#[test]
fn json_round_trip() {
    let ds = monk1(Encoding::OnehotDropFirst);
    let back = EncodedDataset::from_json(&ds.to_json().unwrap()).unwrap();
    assert_eq!(back.n(), ds.n());
    assert_eq!(back.categories(), ds.categories());
    assert_eq!(back.labels(), ds.labels());
    for f in 0..ds.q() {
        assert_eq!(back.column(f), ds.column(f));
    }
}
