import json
import math

import pytest

from chiral_teleport.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    ConfigError,
    ProtocolConfig,
    main,
    parse_config,
    render,
)

DIAG = "chiral-teleport: error["


def test_parse_defaults_filled():
    cfg = parse_config('{"experiment":"statedep","a_re":1,"b_re":0,"phi":0.3}', [])
    assert cfg.experiment == "statedep"
    assert (cfg.b_re, cfg.b_im) == (0.0, 0.0)
    assert cfg.kz == 0.0 and cfg.excited_parity == "odd" and cfg.polarizer == "x"
    assert cfg.variant == "natural" and cfg.trials == 0


def test_flags_override_file():
    cfg = parse_config('{"phi":0.3}', ["--phi=0.5"])
    assert cfg.phi == 0.5
    cfg = parse_config('{"phi":0.3}', ["--phi", "0.7", "--variant", "faraday"])
    assert cfg.phi == 0.7 and cfg.variant == "faraday"


@pytest.mark.parametrize(
    "text,flags,field",
    [
        ('{"phi":"abc"}', [], "phi"),
        ("{not json", [], "config"),
        ('{"colour":1}', [], "colour"),
        ('{"variant":"quantum"}', [], "variant"),
        ('{"trials":1.5}', [], "trials"),
        ('{"trials":-3}', [], "trials"),
        ("{}", ["--seed=x"], "seed"),
        ("{}", ["--unknown=1"], "flags"),
        ('{"a_re":0,"b_re":0}', [], "a_re"),
        ('{"experiment":"sweep-phi","sweep_steps":0}', [], "sweep_steps"),
        ('{"experiment":"sweep-phi","sweep_start":1,"sweep_stop":0.5}', [], "sweep_stop"),
    ],
)
def test_parse_errors_name_field(text, flags, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(text, flags)
    assert exc.value.field == field
    assert field in str(exc.value)


def test_normalisation_warning():
    with pytest.warns(UserWarning, match="norm"):
        cfg = parse_config('{"a_re":3,"b_re":4}', [])
    assert math.hypot(cfg.a_re, cfg.b_re) == pytest.approx(1, abs=1e-15)


def test_config_round_trip():
    with pytest.warns(UserWarning):
        cfg = parse_config('{"a_re":0.3,"a_im":-0.2,"b_re":0.5,"b_im":0.7,"phi":0.9}', ["--trials=10"])
    again = parse_config(json.dumps(cfg.to_dict()), [])
    assert again == cfg
    assert ProtocolConfig() == parse_config("{}", [])


def test_perfect_json_fidelity():
    doc = json.loads(render(parse_config('{"experiment":"perfect","a_re":0.6,"b_im":0.8}', [])))
    assert set(doc) == {"config", "results", "versions"}
    assert doc["results"]["fidelity"] >= 1 - 1e-10


def test_sweep_csv_columns():
    text = render(parse_config('{"experiment":"sweep-phi","format":"csv","sweep_steps":4}', []))
    lines = text.splitlines()
    assert lines[0] == "phi,pr_1p,pr_2p,pr_3p,pr_4p"
    assert len(lines) == 5
    text = render(parse_config('{"experiment":"sweep-phi","format":"csv","sweep_protocol":"perfect","sweep_steps":3}', []))
    assert text.splitlines()[0] == "phi,success_prob,fidelity"


def test_amplitude_sweep():
    text = render(parse_config('{"experiment":"sweep-amplitude","format":"csv","sweep_steps":3,"phi":0.2}', []))
    assert text.splitlines()[0] == "theta,pr_1p,pr_2p,pr_3p,pr_4p"


def test_run_writes_output(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["run", "--experiment", "statedep", "--trials", "500", "--seed", "4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["results"]["trials"]["n_trials"] == 500
    assert not list(tmp_path.glob(".*.tmp"))


def test_config_file_and_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"experiment":"perfect","phi":0.3}')
    out = tmp_path / "o.json"
    assert main(["run", "--config", str(cfg), "--phi", "1.0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["config"]["phi"] == 1.0


def test_exit_codes_and_single_line_diagnostics(tmp_path, capsys):
    cases = [
        (["run", "--experiment", "perfect", "--phi", "0"], "sin(phi) = 0: no amplitude reaches detector 2"),
        (["run", "--experiment", "statedep", "--phi", "0", "--reconstruct", "true"], "singular"),
        (["run", "--phi", "abc"], "phi"),
        (["run", "--config", str(tmp_path / "missing.json")], "cannot read"),
        (["run", "--out", str(tmp_path / "no" / "such" / "dir.json")], "cannot write"),
    ]
    for argv, needle in cases:
        code = main(argv)
        err = capsys.readouterr().err.strip().splitlines()
        assert code != 0
        assert len(err) == 1 and err[0].startswith(DIAG) and needle in err[0]
    assert main(["run", "--trials", "x"]) == EXIT_CONFIG
    assert main(["run", "--out", str(tmp_path / "a" / "b")]) == EXIT_IO


def test_statedep_phi_zero_without_reconstruction_succeeds(capsys):
    assert main(["run", "--experiment", "statedep", "--phi", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["results"]["probabilities"] == pytest.approx([0.25] * 4)
