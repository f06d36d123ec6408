//! Simulate client participation and model transfers, then summarise the
//! traffic ledger.

use safl::seed::rng_from;
use safl::*;

fn main() {
    let cfg = NetworkConfig::default();
    let mut rng = rng_from(3);
    let clients: Vec<usize> = (0..6).collect();
    let bytes = 21_920;
    let mut ledger = CommsLedger::new();

    for round in 1..=5 {
        let participants = sample_participants(&clients, cfg.participation_rate, &mut rng);
        for &c in &participants {
            for direction in [Direction::Download, Direction::Upload] {
                ledger.record(TransferEvent {
                    round,
                    client_id: c,
                    direction,
                    bytes,
                    duration_s: transfer_time(bytes, &cfg, &mut rng),
                });
            }
        }
        println!("round {round}: clients {participants:?}");
    }

    let s = ledger.summarize();
    println!(
        "{} transfers, {} up / {} down, {} bytes, mean {:.6} s, busiest client {:?} ({} bytes)",
        s.total_count,
        s.upload_count,
        s.download_count,
        s.total_bytes,
        s.mean_duration_s,
        s.peak_client_id,
        s.peak_client_bytes
    );
    let one_second = NetworkConfig {
        jitter_frac: 0.0,
        ..cfg
    };
    println!(
        "12.5 MB at 100 Mbps with 10 ms latency: {:.3} s",
        transfer_time(12_500_000, &one_second, &mut rng)
    );
}
