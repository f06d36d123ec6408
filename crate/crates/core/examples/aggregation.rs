//! Combine client models with FedAvg and advance a SCAFFOLD server control.

use safl::*;

fn main() -> safl::Result<()> {
    let layout = MlpLayout::new(0, 0, 3);
    let update = |id, values: [f64; 3], n, delta: Option<[f64; 3]>| ClientUpdate {
        client_id: id,
        params: ParamVector::from_values(layout, values.to_vec()).unwrap(),
        n_samples: n,
        delta_control: delta.map(|d| ControlVariate(d.to_vec())),
    };

    let plain = [
        update(0, [1.0, 0.0, 2.0], 100, None),
        update(1, [3.0, 1.0, 2.0], 300, None),
    ];
    let (global, _) = aggregate(&plain, AggregationMethod::FedAvg, None, 2)?;
    println!("fedavg weights 1/4, 3/4 -> {:?}", global.values());

    let with_control = [
        update(0, [1.0, 0.0, 2.0], 100, Some([0.4, 0.0, -0.2])),
        update(2, [3.0, 1.0, 2.0], 300, Some([0.2, 0.6, 0.0])),
    ];
    let server = ControlVariate::zeros(3);
    let (global, control) =
        aggregate(&with_control, AggregationMethod::Scaffold, Some(&server), 4)?;
    println!("scaffold model {:?}", global.values());
    println!(
        "server control after one round with 2 of 4 clients: {:?}",
        control.unwrap().0
    );
    Ok(())
}
