//! End-to-end highlight rationalizer on planted synthetic data: train with
//! gradients flowing through the solver, then score extracted masks against
//! the planted spans.

use rationex::metrics::token_f1;
use rationex::rationalizer::synthetic::{highlight_examples, standard_model, PlantedRationale};
use rationex::rationalizer::{extract_highlight, train_toy, ToyHyper};
use rationex::solver::ConsensusConfig;

fn main() -> rationex::Result<()> {
    let hyper = ToyHyper {
        seed: 11,
        ..ToyHyper::default()
    };
    let model = standard_model(hyper)?;
    let train_data = highlight_examples(600, 20, hyper.budget_pct, 71)?;
    let test_data = highlight_examples(200, 20, hyper.budget_pct, 72)?;

    let outcome = train_toy(&model, &train_data, 3)?;
    println!("epoch losses {:?}", outcome.epoch_losses);

    // extraction at inference settings, scored against the planted spans
    let config = ConsensusConfig::inference();
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    for example in &test_data {
        let extraction = extract_highlight(&outcome.model, &example.tokens, &config)?;
        preds.push(extraction.z);
        let PlantedRationale::Mask(mask) = &example.planted_rationale else {
            unreachable!("highlight data plants masks");
        };
        golds.push(mask.iter().map(|&b| f64::from(b)).collect());
    }
    let eval = token_f1(&preds, &golds, 0.5)?;
    println!(
        "token F1 {:.3} (precision {:.3}, recall {:.3}), mean mask size {:.3}",
        eval.token_f1, eval.precision, eval.recall, eval.avg_rationale_size
    );
    Ok(())
}
