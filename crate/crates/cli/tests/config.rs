use std::path::PathBuf;

use atomradio::{khz, Chain, ModulationMode};
use atomradio_cli::{exit, CliError, RunConfig};

fn examples() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    assert!(v.len() >= 10);
    v
}

#[test]
fn defaults_file_lists_the_builtin_defaults() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/defaults.toml");
    assert_eq!(RunConfig::load(&path).unwrap(), RunConfig::default());
}

#[test]
fn bundled_configs_round_trip() {
    for path in examples() {
        let cfg = RunConfig::load(&path).unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg, "{}", path.display());
    }
    let d = RunConfig::default();
    assert_eq!(RunConfig::from_toml(&d.to_toml().unwrap()).unwrap(), d);
}

#[test]
fn optional_keys_round_trip() {
    let mut cfg = RunConfig::default();
    cfg.modulation.carrier_power_dbm = Some(-5.0);
    cfg.solver.dt_max_s = Some(2.5e-9);
    cfg.input.wav = Some("speech.wav".into());
    cfg.lockin.detuning_candidates_khz = vec![-10.0, 0.1, 33.3];
    assert_eq!(RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
}

#[test]
fn empty_document_is_the_default() {
    assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
}

#[test]
fn unknown_keys_are_rejected_with_location() {
    let err = RunConfig::from_toml("[cavity]\nquality = 100.0\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("unknown field `quality`") && msg.contains("line 2"), "{msg}");
    assert_eq!(err.exit_code(), exit::CONFIG);

    let err = RunConfig::from_toml("[cavitee]\n").unwrap_err().to_string();
    assert!(err.contains("cavitee"), "{err}");
    let err = RunConfig::from_toml("sed = 3\n").unwrap_err().to_string();
    assert!(err.contains("sed"), "{err}");
}

#[test]
fn wrong_types_are_rejected() {
    let err = RunConfig::from_toml("[modulation]\nmode = \"pm\"\n").unwrap_err().to_string();
    assert!(err.contains("mode") || err.contains("pm"), "{err}");
    assert!(RunConfig::from_toml("[atom]\noptical_rabi_khz = \"fast\"\n").is_err());
}

#[test]
fn invalid_values_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for (text, key) in [
        ("[cavity]\nquality_factor = -3.0\n", "quality"),
        ("[input]\nupsample = 0\n", "input.upsample"),
        ("[sweep]\naxis = \"detuning:0:1\"\n", "name:start:stop:n"),
        ("[sweep]\naxis = \"power\"\n", "sweep.values"),
        ("[solver]\ndt_max_s = 0.0\n", "solver.dt_max_s"),
        ("[lockin]\nfilter_order = 0\n", "filter order"),
    ] {
        let path = dir.path().join("c.toml");
        std::fs::write(&path, text).unwrap();
        let err = RunConfig::load(&path).unwrap_err();
        assert!(matches!(err, CliError::Config(_)), "{text}: {err}");
        assert!(err.to_string().contains(key), "{text}: {err}");
    }
}

#[test]
fn power_overrides_rabi_after_link_loss() {
    let mut cfg = RunConfig::default();
    cfg.modulation.carrier_power_dbm = Some(0.0);
    assert_eq!(cfg.carrier_rabi() / khz(1.0), 58.6);
    cfg.cavity.link_loss_db = 20.0;
    assert!((cfg.carrier_rabi() / khz(1.0) - 5.86).abs() < 1e-12);
}

#[test]
fn default_config_describes_the_default_chain() {
    let ours = RunConfig::default().chain().unwrap();
    let reference = Chain::default();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1e-300);
    assert!(close(ours.atom.omega_opt_rabi, reference.atom.omega_opt_rabi));
    assert!(close(ours.decoherence.gamma_e_g1, reference.decoherence.gamma_e_g1));
    assert!(close(ours.decoherence.gamma_ground_relax, reference.decoherence.gamma_ground_relax));
    assert!(close(ours.cavity.f_resonance, reference.cavity.f_resonance));
    assert!(close(ours.modulation.carrier_rabi_0, reference.modulation.carrier_rabi_0));
    assert!(close(ours.modulation.carrier_detuning_0, reference.modulation.carrier_detuning_0));
    assert!(close(ours.modulation.m_fm, reference.modulation.m_fm));
    assert_eq!(ours.modulation.mode, ModulationMode::Am);
    assert_eq!(ours.lockin_config(), reference.lockin_config());
}
