//! Shared fixtures for the benchmark targets.

use zep::config::Config;
use zep::dataset::{build_corpus, synth_faces, to_training_set, Annotation, VariationRanges};
use zep::mlp::{Head, Mlp, TrainOptions};
use zep::GrayImage;

/// One deterministic synthetic face at the working size.
pub fn bench_face(config: &Config) -> (GrayImage, Annotation) {
    synth_faces(1, &VariationRanges::default(), config.face_size, 7)
        .unwrap()
        .remove(0)
}

/// A quickly trained model pair; benchmark timings do not depend on model
/// quality, only on its dimensions.
pub fn bench_models(config: &Config) -> (Mlp, Mlp) {
    let train = |head: Head, seed: u64| {
        let ranges = if head == Head::Binary {
            VariationRanges::lateral()
        } else {
            VariationRanges::default()
        };
        let samples = build_corpus(4, &ranges, head, seed, config).unwrap();
        let set = to_training_set(&samples, head).unwrap();
        let mut model = Mlp::with_default_sizing(config.feature_len(), head, seed).unwrap();
        model
            .train(
                &set,
                &TrainOptions {
                    epochs: 10,
                    learning_rate: config.learning_rate,
                    seed,
                },
            )
            .unwrap();
        model
    };
    (train(Head::Regression, 1), train(Head::Binary, 2))
}
