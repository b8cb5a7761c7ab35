use hcr::commands::{recognize_command, test_command, train_command, SplitSpec, TrainOptions};
use hcr::dataset::build_dataset;
use hcr::image::GrayImage;
use hcr::loci::extract_loci;
use hcr::pgm::{write_pgm, PgmEncoding};
use hcr::preprocess::{preprocess_string, PipelineConfig};
use hcr::synth::{class_names, render_clean, template, write_dataset, TEMPLATES};
use hcr::WeightsFile;

/// Pastes `glyph` into a white page at (ox, oy).
fn place(glyph: &GrayImage, width: usize, height: usize, ox: usize, oy: usize) -> GrayImage {
    let mut page = GrayImage::filled(width, height, 255).unwrap();
    for y in 0..glyph.height() {
        for x in 0..glyph.width() {
            page.set(ox + x, oy + y, glyph.get(x, y));
        }
    }
    page
}

#[test]
fn features_do_not_depend_on_where_the_glyph_sits() {
    let config = PipelineConfig::default();
    for t in TEMPLATES {
        let glyph = render_clean(t);
        let reference = extract_loci(&preprocess_string(&glyph, &config).unwrap()[0]).unwrap();
        for (ox, oy) in [(0, 0), (13, 2), (40, 29)] {
            let cells = preprocess_string(&place(&glyph, 80, 64, ox, oy), &config).unwrap();
            assert_eq!(cells.len(), 1);
            assert_eq!(
                extract_loci(&cells[0]).unwrap(),
                reference,
                "{} at ({ox},{oy})",
                t.name
            );
        }
    }
}

#[test]
fn generated_corpus_featurizes_to_one_sample_per_image() {
    let dir = tempfile::tempdir().unwrap();
    let classes = class_names(3);
    write_dataset(dir.path(), &classes, 125, 0.01, 9).unwrap();
    let ds = build_dataset(dir.path(), &PipelineConfig::default()).unwrap();
    assert_eq!(ds.samples.len(), 3 * 125);
    let mut sorted = classes.clone();
    sorted.sort();
    assert_eq!(ds.class_names, sorted);
}

#[test]
fn clean_glyphs_of_every_trained_class_are_recognized() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let classes = class_names(6);
    write_dataset(&data, &classes, 60, 0.01, 2).unwrap();
    let weights_path = dir.path().join("w.txt");
    let options = TrainOptions {
        hidden: vec![24],
        ..TrainOptions::default()
    };
    let split = SplitSpec {
        n_train: 50,
        n_test: 10,
    };
    let trained = train_command(&data, &weights_path, Some(split), &options).unwrap();
    assert!(trained.summary.converged);
    assert_eq!(
        WeightsFile::read(&weights_path).unwrap().to_text(),
        trained.to_text()
    );

    let report = test_command(&weights_path, &data, Some(split), options.train.seed).unwrap();
    assert_eq!(report.total, 60);
    assert!(report.accuracy().unwrap() >= 90.0, "{}", report.render());

    for name in &classes {
        let image = dir.path().join(format!("{name}.pgm"));
        write_pgm(
            &image,
            &render_clean(template(name).unwrap()),
            PgmEncoding::Plain,
        )
        .unwrap();
        let r = recognize_command(&weights_path, &image, None).unwrap();
        assert_eq!(r.labels(), vec![name.as_str()]);
        assert_eq!(r.accuracy(), None);
    }
}
