mod common;

use common::{data, small_model, small_triplets};
use fairtrip::corpus::{
    parse_eval_items, parse_pairs, parse_scores, parse_triplets, read_embeddings, read_eval_items, read_pairs,
    read_scores, read_triplets, write_embeddings, write_eval_items, write_pairs, write_scores, write_triplets,
    BiasType, Category, CounterfactualPair, DemographicLexicon, Direction, EmbeddingFile, EmbeddingRow, EvalItem,
    Label, ScoreRow,
};
use fairtrip::encoder::ToyModel;
use fairtrip::trainer::{TrainConfig, TrainMode};
use fairtrip::Error;
use proptest::prelude::*;

fn sentence() -> impl Strategy<Value = String> {
    // quotes, commas and non-ASCII survive CSV and JSON quoting
    "[a-zA-Z][a-zA-Z ,'\"é]{0,30}[a-z.]".prop_map(|s| s.trim().to_string())
}

fn bias_type() -> impl Strategy<Value = BiasType> {
    prop_oneof![
        Just(BiasType::Gender),
        Just(BiasType::Race),
        Just(BiasType::Religion),
        Just(BiasType::Age),
        Just(BiasType::Other),
    ]
}

proptest! {
    #[test]
    fn pairs_round_trip(rows in prop::collection::vec((sentence(), sentence(), bias_type(), any::<bool>()), 1..20)) {
        let pairs: Vec<CounterfactualPair> = rows
            .into_iter()
            .enumerate()
            .filter(|(_, (a, b, _, _))| a != b)
            .map(|(i, (a, b, t, s))| CounterfactualPair {
                id: format!("p{i}"),
                sent_more: a,
                sent_less: b,
                bias_type: t,
                direction: if s { Direction::Stereo } else { Direction::Antistereo },
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.csv");
        write_pairs(&path, &pairs).unwrap();
        prop_assert_eq!(read_pairs(&path).unwrap(), pairs);
    }

    #[test]
    fn scores_round_trip(vals in prop::collection::vec(-50.0f64..5.0, 3..30)) {
        let n = vals.len() / 3;
        let items: Vec<EvalItem> =
            (0..n).map(|i| EvalItem::new(format!("e{i}"), Category::Gender, "a b", "c d", "e f")).collect();
        let rows: Vec<ScoreRow> = (0..n)
            .flat_map(|i| Label::ALL.into_iter().enumerate().map(move |(k, l)| (i, k, l)))
            .map(|(i, k, label)| ScoreRow { item_id: format!("e{i}"), label, score: vals[3 * i + k] })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.jsonl");
        write_scores(&path, &rows).unwrap();
        prop_assert_eq!(read_scores(&path, Some(&items)).unwrap(), rows);
    }

    #[test]
    fn embeddings_round_trip(vs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 1..10)) {
        let file = EmbeddingFile {
            dim: 4,
            rows: vs
                .into_iter()
                .enumerate()
                .map(|(i, vector)| EmbeddingRow {
                    sentence_id: format!("s{i}"),
                    text: (i % 2 == 0).then(|| format!("sentence {i}")),
                    vector,
                })
                .collect(),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        write_embeddings(&path, &file).unwrap();
        prop_assert_eq!(read_embeddings(&path).unwrap(), file);
    }
}

#[test]
fn shipped_fixtures_parse() {
    assert_eq!(read_pairs(data("pairs.csv")).unwrap().len(), 50);
    let items = read_eval_items(data("eval_items.jsonl")).unwrap();
    assert_eq!(items.len(), 24);
    assert_eq!(read_scores(data("scores.jsonl"), Some(&items)).unwrap().len(), 72);
    assert_eq!(read_triplets(data("train_fixture.jsonl")).unwrap().len(), 8);
    let lex = DemographicLexicon::read(data("lexicon.txt")).unwrap();
    assert!(lex.is_symmetric());
    assert!(lex.are_paired("he", "she"));
}

#[test]
fn triplets_and_items_round_trip() {
    let triplets = small_triplets();
    let items = read_eval_items(data("eval_items.jsonl")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_triplets(dir.path().join("t.jsonl"), &triplets).unwrap();
    assert_eq!(read_triplets(dir.path().join("t.jsonl")).unwrap(), triplets);
    write_eval_items(dir.path().join("e.jsonl"), &items).unwrap();
    assert_eq!(read_eval_items(dir.path().join("e.jsonl")).unwrap(), items);
}

#[test]
fn missing_column_is_a_schema_error() {
    let err = parse_pairs(b"id,sent_more,sent_less,bias_type\n1,a,b,gender\n").unwrap_err();
    assert!(matches!(&err, Error::MissingColumn { column } if column == "stereo_antistereo"));
    assert!(err.is_schema());
}

#[test]
fn bad_rows_report_their_location() {
    let csv = b"id,sent_more,sent_less,stereo_antistereo,bias_type\n1,a b,a c,stereo,race\n2,x,x,stereo,race\n";
    assert!(matches!(parse_pairs(csv), Err(Error::Row { row: 1, .. })));
    let dup = "{\"id\":\"a\",\"category\":\"race\",\"options\":[{\"text\":\"x\",\"label\":\"stereotype\"},{\"text\":\"y\",\"label\":\"anti_stereotype\"},{\"text\":\"z\",\"label\":\"unrelated\"}]}\n";
    let twice = format!("{dup}{dup}");
    assert!(matches!(parse_eval_items(&twice), Err(Error::DuplicateId { line: 2, .. })));
    assert!(matches!(parse_triplets("{\"id\": 3}\n"), Err(Error::Line { line: 1, .. })));
}

#[test]
fn scores_must_cover_every_option() {
    let items = vec![EvalItem::new("a", Category::Race, "x y", "x z", "q r")];
    let partial = "{\"item_id\":\"a\",\"label\":\"stereotype\",\"score\":-1.0}\n";
    assert!(matches!(parse_scores(partial, Some(&items)), Err(Error::Coverage { .. })));
    let nan = "{\"item_id\":\"a\",\"label\":\"stereotype\",\"score\":NaN}\n";
    assert!(parse_scores(nan, None).is_err());
}

#[test]
fn checkpoint_round_trip_is_exact() {
    let model = small_model(&small_triplets(), 7, 4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    model.save(&path).unwrap();
    let back = ToyModel::load(&path).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.vocab.hash(), model.vocab.hash());
}

#[test]
fn train_config_round_trip() {
    let c = TrainConfig {
        mode: TrainMode::PairwiseLm,
        seed: 5,
        epochs: 3,
        ..TrainConfig::default()
    };
    assert_eq!(TrainConfig::parse(&c.to_flat_string()).unwrap(), c);
}

#[test]
fn lexicon_text_round_trip() {
    let lex = DemographicLexicon::read(data("lexicon.txt")).unwrap();
    assert_eq!(DemographicLexicon::parse(&lex.to_text()).unwrap(), lex);
}
