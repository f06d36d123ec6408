//! Train one client's shard with each local update rule and compare.

use safl::training::LocalVariant;
use safl::*;

fn main() -> safl::Result<()> {
    let ds = generate(&DatasetSpec {
        name: "audio".into(),
        size: 400,
        modality: Modality::Audio,
        classes: 4,
        complexity: 0.3,
        seed: 5,
    })?;
    let layout = MlpLayout::new(ds.dim(), 32, ds.classes());
    let start = init_model(layout, 1);
    println!(
        "{} parameters, {} bytes per transfer, initial accuracy {:.3}",
        start.len(),
        model_bytes(&start),
        evaluate(&start, &ds)?.accuracy
    );

    let ap = AdaptiveParams {
        epochs: 5,
        batch: 32,
        lr: 0.05,
    };
    let server = ControlVariate::zeros(start.len());
    let client = ControlVariate::zeros(start.len());
    let variants = [
        ("sgd", LocalVariant::Plain),
        ("prox mu=0.01", LocalVariant::Prox { mu: 0.01 }),
        (
            "scaffold",
            LocalVariant::Scaffold {
                server: &server,
                client: &client,
            },
        ),
    ];
    for (name, variant) in variants {
        let out = local_train(&start, &ds, ap, variant, 9)?;
        let ev = evaluate(&out.params, &ds)?;
        println!(
            "{name:<13} steps {:>3}  local loss {:.4}  accuracy {:.3}  control delta {}",
            out.stats.local_steps,
            out.stats.final_local_loss,
            ev.accuracy,
            if out.delta_control.is_some() {
                "yes"
            } else {
                "no"
            }
        );
    }
    Ok(())
}
