//! Configuration from command-line flags and flat `key = value` files.
//!
//! Precedence, highest first: flags, config file, `SIM_SEED` (seed only),
//! built-in defaults.

use std::path::PathBuf;

use clap::Parser;

use crate::harness::{ClipMode, SimConfig};
use crate::{Error, Result};

/// Raw command line. Every simulation flag is optional so that unset flags
/// fall through to the config file and the defaults.
#[derive(Debug, Parser)]
#[command(
    name = "sdclip",
    version,
    about = "Coded MIMO link simulation with an adaptively clipped soft-output sphere decoder"
)]
pub struct Args {
    /// SNR grid in dB: comma list (10,12,14) or start:step:stop
    #[arg(long)]
    pub snr: Option<String>,
    /// Target error rate
    #[arg(long)]
    pub ter: Option<String>,
    /// Controller step size
    #[arg(long)]
    pub mu: Option<String>,
    /// Least reliable bits used by the block BER estimate
    #[arg(long = "n-est")]
    pub n_est: Option<String>,
    /// Blocks per tracking chain
    #[arg(long)]
    pub frames: Option<String>,
    /// Chains per SNR point
    #[arg(long)]
    pub chains: Option<String>,
    /// Chain cap for the error-count stopping rule
    #[arg(long = "max-chains")]
    pub max_chains: Option<String>,
    /// Steady-state bit errors that end a point early
    #[arg(long = "min-errors")]
    pub min_errors: Option<String>,
    /// Run seed (falls back to SIM_SEED)
    #[arg(long)]
    pub seed: Option<String>,
    /// adaptive | fixed=<C> | off
    #[arg(long)]
    pub clip: Option<String>,
    /// Floor of the clipping level
    #[arg(long = "l-min")]
    pub l_min: Option<String>,
    /// Information bits per block
    #[arg(long = "info-len")]
    pub info_len: Option<String>,
    /// Constellation order (2, 4, 16 or 64)
    #[arg(long)]
    pub order: Option<String>,
    /// Transmit antennas
    #[arg(long = "m-t")]
    pub m_t: Option<String>,
    /// Receive antennas
    #[arg(long = "m-r")]
    pub m_r: Option<String>,
    /// Worker threads
    #[arg(long)]
    pub threads: Option<String>,
    /// Flat key = value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV output path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the oracle cross-checks instead of a simulation
    #[arg(long)]
    pub verify: bool,
}

/// Fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: SimConfig,
    pub out: Option<PathBuf>,
    pub verify: bool,
}

pub const KEYS: &[&str] = &[
    "snr",
    "ter",
    "mu",
    "n-est",
    "frames",
    "chains",
    "max-chains",
    "min-errors",
    "seed",
    "clip",
    "l-min",
    "info-len",
    "order",
    "m-t",
    "m-r",
    "threads",
];

/// Parses `args` (without the program name) with an optional `SIM_SEED` value.
pub fn parse_config<I, S>(args: I, env_seed: Option<&str>) -> Result<Invocation>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv =
        std::iter::once(std::ffi::OsString::from("sdclip")).chain(args.into_iter().map(Into::into));
    let parsed =
        Args::try_parse_from(argv).map_err(|e| Error::config("arguments", e.to_string()))?;
    resolve(parsed, env_seed)
}

pub fn resolve(args: Args, env_seed: Option<&str>) -> Result<Invocation> {
    let mut cfg = SimConfig::default();
    let mut seed_set = false;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("{}: {e}", path.display())))?;
        for (key, value) in parse_pairs(&text)? {
            seed_set |= key == "seed";
            apply(&mut cfg, &key, &value)?;
        }
    }
    if !seed_set {
        if let Some(seed) = env_seed {
            apply(&mut cfg, "seed", seed).map_err(|_| {
                Error::config(
                    "seed",
                    format!("SIM_SEED `{seed}` is not an unsigned integer"),
                )
            })?;
        }
    }
    let flags = [
        ("snr", &args.snr),
        ("ter", &args.ter),
        ("mu", &args.mu),
        ("n-est", &args.n_est),
        ("frames", &args.frames),
        ("chains", &args.chains),
        ("max-chains", &args.max_chains),
        ("min-errors", &args.min_errors),
        ("seed", &args.seed),
        ("clip", &args.clip),
        ("l-min", &args.l_min),
        ("info-len", &args.info_len),
        ("order", &args.order),
        ("m-t", &args.m_t),
        ("m-r", &args.m_r),
        ("threads", &args.threads),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            apply(&mut cfg, key, v)?;
        }
    }
    // a larger chain count without an explicit cap means "run exactly that many"
    if cfg.max_chains < cfg.chains {
        cfg.max_chains = cfg.chains;
    }
    cfg.validate()?;
    Ok(Invocation {
        config: cfg,
        out: args.out,
        verify: args.verify,
    })
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(
                "config",
                format!("line {}: expected `key = value`", lineno + 1),
            )
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::config(
                key,
                format!("unknown key on line {}", lineno + 1),
            ));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Parses config-file text on top of the defaults.
pub fn from_text(text: &str) -> Result<SimConfig> {
    let mut cfg = SimConfig::default();
    for (key, value) in parse_pairs(text)? {
        apply(&mut cfg, &key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a configuration as config-file text that [`from_text`] reads back.
pub fn render(cfg: &SimConfig) -> String {
    let snr: Vec<String> = cfg.snr_db.iter().map(|s| format!("{s:?}")).collect();
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    line("snr", snr.join(","));
    line("ter", format!("{:?}", cfg.ter));
    line("mu", format!("{:?}", cfg.mu));
    line("n-est", cfg.n_est.to_string());
    line("frames", cfg.frames.to_string());
    line("chains", cfg.chains.to_string());
    line("max-chains", cfg.max_chains.to_string());
    line("min-errors", cfg.min_errors.to_string());
    line("seed", cfg.seed.to_string());
    line(
        "clip",
        match cfg.clip {
            ClipMode::Fixed(c) => format!("fixed={c:?}"),
            other => other.to_string(),
        },
    );
    line("l-min", format!("{:?}", cfg.l_min));
    line("info-len", cfg.info_len.to_string());
    line("order", cfg.order.to_string());
    line("m-t", cfg.m_t.to_string());
    line("m-r", cfg.m_r.to_string());
    if let Some(t) = cfg.threads {
        line("threads", t.to_string());
    }
    out
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn apply(cfg: &mut SimConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "snr" => cfg.snr_db = parse_snr_grid(value)?,
        "ter" => cfg.ter = number(key, value)?,
        "mu" => cfg.mu = number(key, value)?,
        "n-est" => cfg.n_est = number(key, value)?,
        "frames" => cfg.frames = number(key, value)?,
        "chains" => cfg.chains = number(key, value)?,
        "max-chains" => cfg.max_chains = number(key, value)?,
        "min-errors" => cfg.min_errors = number(key, value)?,
        "seed" => cfg.seed = number(key, value)?,
        "clip" => cfg.clip = value.parse()?,
        "l-min" => cfg.l_min = number(key, value)?,
        "info-len" => cfg.info_len = number(key, value)?,
        "order" => cfg.order = number(key, value)?,
        "m-t" => cfg.m_t = number(key, value)?,
        "m-r" => cfg.m_r = number(key, value)?,
        "threads" => cfg.threads = Some(number(key, value)?),
        _ => return Err(Error::config(key, "unknown key")),
    }
    Ok(())
}

/// Parses `a,b,c` or `start:step:stop` (inclusive of `stop`).
pub fn parse_snr_grid(value: &str) -> Result<Vec<f64>> {
    let value = value.trim();
    if value.contains(':') {
        let parts: Vec<f64> = value
            .split(':')
            .map(|p| number::<f64>("snr", p))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(Error::config("snr", "range must be start:step:stop"));
        };
        if !(step > 0.0) || stop < start {
            return Err(Error::config(
                "snr",
                "range needs step > 0 and stop >= start",
            ));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > crate::rng::MAX_POINTS {
            return Err(Error::config("snr", "too many SNR points"));
        }
        Ok((0..count).map(|i| start + step * i as f64).collect())
    } else {
        value.split(',').map(|p| number::<f64>("snr", p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(args: &[&str]) -> Result<Invocation> {
        parse_config(args.iter().copied(), None)
    }

    #[test]
    fn no_arguments_gives_defaults() {
        let inv = parse(&[]).unwrap();
        assert_eq!(inv.config, SimConfig::default());
        assert!(!inv.verify);
        assert_eq!(inv.out, None);
    }

    #[test]
    fn frozen_controller_flags() {
        let inv = parse(&["--ter", "1e-3", "--mu", "0"]).unwrap();
        assert_eq!(inv.config.ter, 1e-3);
        assert_eq!(inv.config.mu, 0.0);
        let s =
            crate::adapt::init_clipping(inv.config.ter, inv.config.mu, inv.config.l_min).unwrap();
        assert!((s.l_cl - 999f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn snr_grids() {
        assert_eq!(parse_snr_grid("10:1:16").unwrap().len(), 7);
        assert_eq!(
            parse_snr_grid("10:0.25:11").unwrap(),
            vec![10.0, 10.25, 10.5, 10.75, 11.0]
        );
        assert_eq!(parse_snr_grid("14, 8").unwrap(), vec![14.0, 8.0]);
        assert!(parse_snr_grid("1:0:3").is_err());
        assert!(parse_snr_grid("1:2").is_err());
        assert!(parse_snr_grid("ten").is_err());
    }

    #[test]
    fn errors_name_the_field() {
        let field = |args: &[&str]| match parse(args) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected error, got {other:?}"),
        };
        assert_eq!(field(&["--ter", "abc"]), "ter");
        assert_eq!(field(&["--ter", "0.9"]), "ter");
        assert_eq!(field(&["--clip", "maybe"]), "clip");
        assert_eq!(field(&["--n-est", "5000"]), "n-est");
        assert_eq!(field(&["--bogus", "1"]), "arguments");
    }

    #[test]
    fn file_values_are_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# sweep\nsnr = 12,14\nmu = 0.05\nseed = 9\n").unwrap();
        let p = path.to_str().unwrap();
        let inv = parse_config(["--config", p, "--mu", "0.2"], Some("77")).unwrap();
        assert_eq!(inv.config.snr_db, vec![12.0, 14.0]);
        assert_eq!(inv.config.mu, 0.2);
        assert_eq!(inv.config.seed, 9);

        std::fs::write(&path, "snr = 12\n").unwrap();
        assert_eq!(
            parse_config(["--config", p], Some("77"))
                .unwrap()
                .config
                .seed,
            77
        );
        assert_eq!(
            parse_config(["--config", p, "--seed", "3"], Some("77"))
                .unwrap()
                .config
                .seed,
            3
        );

        std::fs::write(&path, "colour = blue\n").unwrap();
        assert!(
            matches!(parse_config(["--config", p], None), Err(Error::Config { field, .. }) if field == "colour")
        );
        assert!(parse(&["--config", "/nonexistent/run.cfg"]).is_err());
        assert!(parse_config(Vec::<String>::new(), Some("x")).is_err());
    }

    fn config_strategy() -> impl Strategy<Value = SimConfig> {
        (
            proptest::collection::vec(-5.0f64..30.0, 1..6),
            1e-6f64..0.3,
            0.0f64..1.0,
            1usize..=64,
            1usize..200,
            (1usize..4, 0usize..4),
            any::<u64>(),
            prop_oneof![
                Just(ClipMode::Adaptive),
                Just(ClipMode::Off),
                (0.01f64..20.0).prop_map(ClipMode::Fixed)
            ],
            proptest::option::of(1usize..16),
        )
            .prop_map(
                |(snr_db, ter, mu, n_est, frames, (chains, extra), seed, clip, threads)| {
                    SimConfig {
                        snr_db,
                        ter,
                        mu,
                        n_est,
                        frames,
                        chains,
                        max_chains: chains + extra,
                        min_errors: seed % 1000,
                        seed,
                        clip,
                        l_min: 0.01 + mu * 0.01,
                        info_len: 1152,
                        threads,
                        ..SimConfig::default()
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn render_round_trips(cfg in config_strategy()) {
            prop_assert_eq!(from_text(&render(&cfg)).unwrap(), cfg);
        }
    }
}
