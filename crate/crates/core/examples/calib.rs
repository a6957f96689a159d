use mmtc_core::harness::*;
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let pilot: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let trials: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(100);
    let preset = args.get(3).cloned().unwrap_or_else(|| "reg".into());
    let data: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(16);
    let sac: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let k: usize = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(2);
    let gamma: Option<f64> = args.get(7).and_then(|s| s.parse().ok());
    let lambda: Option<f64> = args.get(8).and_then(|s| s.parse().ok());
    let cfg = ExperimentConfig {
        system: SystemSection {
            n: 64,
            m: 32,
            p: 0.2,
            symbol_var: 1.0,
            pilot_len: pilot,
            data_len: data,
        },
        variants: vec![
            DetectorVariant::OracleLmmse,
            DetectorVariant::AaClDf,
            DetectorVariant::AaRlsDf,
            DetectorVariant::AaClRls,
            DetectorVariant::AaRls,
            DetectorVariant::Lmmse,
        ],
        snr_grid_db: vec![12.0],
        trials,
        seed: 42,
        rls: RlsSection {
            preset,
            gamma,
            lambda,
            ..RlsSection::default()
        },
        sac_lambda: sac,
        list_size: k,
        ..ExperimentConfig::default()
    };
    let t0 = Instant::now();
    let out = run_experiment(&cfg).unwrap();
    for r in &out.records {
        println!(
            "{:>14} nser {:.4} miss {:.4} fa {:.4} cmults/sym {:.0}",
            r.variant.to_string(),
            r.nser(),
            r.miss_rate(),
            r.false_alarm_rate(),
            r.cmults_per_symbol(64, data)
        );
    }
    println!("elapsed {:.1}s", t0.elapsed().as_secs_f64());
}
