use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use sdclip::adapt::{bit_error_prob, ter_llr};
use sdclip::fec::{bcjr_decode, encode, hard_decision, Interleaver};
use sdclip::harness::{run_experiment, ClipMode, SimConfig};
use sdclip::modem::{map_bits, BitBlock, Constellation};

fn small_config() -> SimConfig {
    SimConfig {
        m_t: 2,
        m_r: 2,
        order: 4,
        info_len: 128,
        n_est: 16,
        snr_db: vec![6.0],
        frames: 6,
        chains: 2,
        max_chains: 2,
        seed: 11,
        ..SimConfig::default()
    }
}

#[test]
fn clamping_reliable_inputs_rarely_flips_decisions() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let exp = Exp::new(0.5).unwrap();
    for ter in [1e-2, 1e-3] {
        let l_ter = ter_llr(ter);
        let (mut flips, mut total) = (0usize, 0usize);
        while total < 100_000 {
            let info: Vec<u8> = (0..1000).map(|_| rng.random_range(0..2u8)).collect();
            let cw = encode(&info).unwrap();
            let llrs: Vec<f64> = cw
                .coded_bits
                .iter()
                .map(|&b| {
                    let m = l_ter + exp.sample(&mut rng);
                    // channel whose reliabilities are calibrated: wrong sign with probability P_e(m)
                    let wrong = rng.random::<f64>() < bit_error_prob(m).unwrap();
                    let sign = if (b == 1) != wrong { 1.0 } else { -1.0 };
                    sign * m
                })
                .collect();
            let clamped: Vec<f64> = llrs.iter().map(|l| l.clamp(-l_ter, l_ter)).collect();
            let a = bcjr_decode(&llrs).unwrap();
            let b = bcjr_decode(&clamped).unwrap();
            flips += a
                .app_info
                .iter()
                .zip(&b.app_info)
                .filter(|(x, y)| hard_decision(**x) != hard_decision(**y))
                .count();
            total += info.len();
        }
        let rate = flips as f64 / total as f64;
        assert!(
            rate <= ter,
            "TER {ter}: {flips} of {total} decisions changed"
        );
    }
}

#[test]
fn encode_map_decode_round_trip_without_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let con = Constellation::qam(16).unwrap();
    let info: Vec<u8> = (0..200).map(|_| rng.random_range(0..2u8)).collect();
    let cw = encode(&info).unwrap();
    let pi = Interleaver::random(cw.coded_bits.len(), 9);
    let tx = pi.interleave(&cw.coded_bits).unwrap();
    let symbols: Vec<_> = tx
        .chunks(4)
        .map(|c| map_bits(&BitBlock::from_logical(c), &con).unwrap())
        .collect();
    // nearest-point hard detection turned into strong LLRs
    let mut det = Vec::with_capacity(tx.len());
    for s in symbols {
        let idx = (0..16)
            .min_by(|&a, &b| {
                (con.point(a) - s)
                    .norm()
                    .total_cmp(&(con.point(b) - s).norm())
            })
            .unwrap();
        for bit in 0..4 {
            det.push(if con.label_bit(idx, bit) == 1 {
                20.0
            } else {
                -20.0
            });
        }
    }
    let out = bcjr_decode(&pi.deinterleave(&det).unwrap()).unwrap();
    assert_eq!(out.hard_info(), info);
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    let cfg = small_config();
    let a = run_experiment(&SimConfig {
        threads: Some(1),
        ..cfg.clone()
    })
    .unwrap();
    let b = run_experiment(&SimConfig {
        threads: Some(3),
        ..cfg.clone()
    })
    .unwrap();
    assert_eq!(a, b);
    let c = run_experiment(&SimConfig { seed: 12, ..cfg }).unwrap();
    assert_ne!(a.blocks, c.blocks);
}

#[test]
fn clip_modes_share_the_transmitted_data() {
    let cfg = small_config();
    let off = run_experiment(&SimConfig {
        clip: ClipMode::Off,
        ..cfg.clone()
    })
    .unwrap();
    let tight = run_experiment(&SimConfig {
        clip: ClipMode::Fixed(0.5),
        ..cfg
    })
    .unwrap();
    let nodes = |r: &sdclip::harness::ExperimentReport| {
        r.blocks.iter().map(|b| b.visited_nodes).sum::<u64>()
    };
    assert!(nodes(&tight) <= nodes(&off));
    assert_eq!(off.blocks.len(), tight.blocks.len());
    assert!(off.blocks.iter().all(|b| b.l_cl.is_infinite()));
}

#[test]
fn adaptive_level_stays_within_bounds() {
    let cfg = SimConfig {
        snr_db: vec![2.0, 12.0],
        ter: 1e-3,
        ..small_config()
    };
    let report = run_experiment(&cfg).unwrap();
    let l_ter = ter_llr(cfg.ter);
    for b in &report.blocks {
        assert!(b.l_cl >= cfg.l_min && b.l_cl <= l_ter);
        if b.block == 0 {
            assert_eq!(b.l_cl, l_ter);
        }
    }
}
