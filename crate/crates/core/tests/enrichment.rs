mod common;

use kar_core::enrich::{connection_stats, read_enriched, write_enriched, EnrichConfig, EnrichedHeader, Enricher, HopCount};

#[test]
fn parallel_enrichment_matches_serial() {
    let db = common::lexicon("toy_lexicon.txt");
    let data = common::dataset("squad_train16.json");
    let serial = Enricher::new(&db, EnrichConfig::default()).enrich_dataset(&data, HopCount(3)).unwrap();
    let parallel = Enricher::new(&db, EnrichConfig { threads: 3, ..EnrichConfig::default() })
        .enrich_dataset(&data, HopCount(3))
        .unwrap();
    assert_eq!(serial, parallel);
    assert!(serial.iter().zip(&data).all(|(e, d)| e.id == d.id()));
}

#[test]
fn fixture_statistics_rise_with_kappa() {
    let db = common::lexicon("toy_lexicon.txt");
    let enricher = Enricher::new(&db, EnrichConfig::default());
    for name in ["squad_train16.json", "addsent_fixture.json"] {
        let data = common::dataset(name);
        let stats: Vec<f64> = (0..=5)
            .map(|k| connection_stats(&enricher.enrich_dataset(&data, HopCount(k)).unwrap()).unwrap())
            .collect();
        assert!(stats.windows(2).all(|w| w[0] <= w[1]), "{name}: {stats:?}");
        assert!(stats[3] > stats[0], "{name}: {stats:?}");
    }
}

#[test]
fn keratin_question_reaches_parrot_in_passage() {
    let db = common::lexicon("toy_lexicon.txt");
    let enricher = Enricher::new(&db, EnrichConfig::default());
    let passage = ["the", "parrot", "sang"];
    let question = ["what", "is", "keratin"];
    let at = |k| enricher.enrich_pair(&passage, &question, HopCount(k)).unwrap().question[2].clone();
    assert_eq!(at(2), Vec::<u32>::new());
    assert_eq!(at(3), vec![2]);
}

#[test]
fn enriched_file_round_trips() {
    let db = common::lexicon("toy_lexicon.txt");
    let data = common::dataset("addsent_fixture.json");
    let enriched = Enricher::new(&db, EnrichConfig::default()).enrich_dataset(&data, HopCount(2)).unwrap();
    let header = EnrichedHeader::new(HopCount(2), db.fingerprint(), enriched.len());
    let mut bytes = Vec::new();
    write_enriched(&mut bytes, &header, &enriched).unwrap();
    let (h, back) = read_enriched(bytes.as_slice()).unwrap();
    assert_eq!(h, header);
    assert_eq!(back, enriched);
}
