//! Faithful matching predictions: premise information reaches the classifier
//! only through alignment rows, so zeroing a row makes the output exactly
//! invariant to that premise token.

use rationex::graph::MatchingVariant;
use rationex::rationalizer::synthetic::{matching_examples, standard_model};
use rationex::rationalizer::{extract_matching, predict_matching, train_toy, ToyHyper};
use rationex::solver::ConsensusConfig;

fn main() -> rationex::Result<()> {
    let hyper = ToyHyper {
        seed: 4,
        ..ToyHyper::default()
    };
    let model = standard_model(hyper)?;
    let data = matching_examples(300, 4, 6, 19)?;
    let outcome = train_toy(&model, &data, 3)?;
    println!("epoch losses {:?}", outcome.epoch_losses);

    let example = &data[0];
    let (premise, hypothesis) = example.split_pair()?;
    let config = ConsensusConfig::inference();
    let extraction = extract_matching(
        &outcome.model,
        premise,
        hypothesis,
        MatchingVariant::AtMostOne2,
        &config,
    )?;
    let probs = predict_matching(&outcome.model, premise, hypothesis, &extraction.alignment, true)?;
    println!("class probabilities {probs:?} (label {})", example.label);

    // zero out premise row 0, then swap that token for an arbitrary other one:
    // the faithful prediction must not move at all
    let mut masked = extraction.alignment.clone();
    for j in 0..masked.cols() {
        masked.set(0, j, 0.0);
    }
    let base = predict_matching(&outcome.model, premise, hypothesis, &masked, true)?;
    let mut swapped = premise.to_vec();
    swapped[0] = (swapped[0] + 7) % outcome.model.vocab_size;
    let moved = predict_matching(&outcome.model, &swapped, hypothesis, &masked, true)?;
    assert_eq!(base, moved);
    println!("zeroed row 0: prediction is bit-identical under token substitution");
    Ok(())
}
