import json
import os

import pytest

from treegibbs import fixtures as fx
from treegibbs.cli import main, parse_config
from treegibbs.errors import ConfigError
from treegibbs.graph import graph_from_dict, graph_to_dict


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("fixtures")
    return fx.write_all(str(d))


def _write_cfg(tmp_path, name, **kw):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(kw) + "\n")
    return str(path)


def test_parse_defaults(tmp_path, fixture_dir):
    cfg_path = _write_cfg(tmp_path, "c", graph=fixture_dir["single_edge_3"])
    cfg = parse_config(["analyze", "--config", cfg_path])
    assert cfg.n_max == 40
    assert cfg.tol == 1e-10
    assert cfg.potential_path is None
    assert len(cfg.input_hash) == 64


def test_parse_rejects_unknown_fields(tmp_path):
    cfg_path = _write_cfg(tmp_path, "c", graph="x.json", bogus=1)
    with pytest.raises(ConfigError) as exc:
        parse_config(["analyze", "--config", cfg_path])
    assert "bogus" in str(exc.value)


def test_bad_index_names_field(tmp_path):
    d = graph_to_dict(fx.single_edge(3, 3))
    d["edges"][1]["index"] = 0
    with pytest.raises(ConfigError) as exc:
        graph_from_dict(d)
    assert "edges[1].index" in str(exc.value)


def test_tail_spec_roundtrip():
    g = fx.thick_ray(5)
    d = graph_to_dict(g)
    assert graph_to_dict(graph_from_dict(d)) == d


def test_cli_commands_run(tmp_path, fixture_dir):
    cfg_path = _write_cfg(
        tmp_path, "single", graph=fixture_dir["single_edge_3"], out=str(tmp_path / "out")
    )
    for cmd in ("analyze", "chain", "wsg", "mix", "count"):
        out = str(tmp_path / f"out_{cmd}")
        assert main([cmd, "--config", cfg_path, "--out", out]) == 0
        assert os.path.exists(os.path.join(out, "summary.txt"))


def test_cli_probe(tmp_path):
    cfg_path = _write_cfg(tmp_path, "probe", truncations=[5, 10])
    out = str(tmp_path / "out_probe")
    assert main(["probe", "--config", cfg_path, "--out", out]) == 0
    lines = open(os.path.join(out, "probe.csv")).read().splitlines()
    assert lines[0] == "N,rho,feasible,gamma_bound"
    assert len(lines) == 3


def test_cli_reruns_are_byte_identical(tmp_path, fixture_dir):
    cfg_path = _write_cfg(tmp_path, "single", graph=fixture_dir["single_edge_3"])
    outs = []
    for tag in ("A", "B"):
        out = str(tmp_path / f"det_{tag}")
        assert main(["count", "--config", cfg_path, "--out", out]) == 0
        blobs = {}
        for fn in sorted(os.listdir(out)):
            blobs[fn] = open(os.path.join(out, fn), "rb").read()
        outs.append(blobs)
    assert outs[0] == outs[1]


def test_cli_exit_codes(tmp_path, fixture_dir):
    # missing config file
    assert main(["analyze", "--config", str(tmp_path / "nope.json")]) == 2
    # schema-violating graph
    bad = graph_to_dict(fx.single_edge(3, 3))
    bad["edges"][0]["rev"] = "missing"
    bad_path = tmp_path / "bad_graph.json"
    bad_path.write_text(json.dumps(bad))
    cfg_path = _write_cfg(tmp_path, "bad", graph=str(bad_path))
    assert main(["analyze", "--config", cfg_path, "--out", str(tmp_path / "o1")]) == 2
    # tail-dominated growth: numeric non-convergence
    cfg_crit = _write_cfg(tmp_path, "crit", graph=fixture_dir["critical_ray_5"])
    assert main(["analyze", "--config", cfg_crit, "--out", str(tmp_path / "o2")]) == 3


def test_cli_wsg_on_tailed_fixture(tmp_path, fixture_dir):
    cfg_path = _write_cfg(
        tmp_path, "cusp", graph=fixture_dir["cusp_22"], n_max=60, depth=90
    )
    out = str(tmp_path / "out_wsg_cusp")
    assert main(["wsg", "--config", cfg_path, "--out", out]) == 0
    cert = json.load(open(os.path.join(out, "certificate.json")))
    assert cert["rho"] < 1.0
    assert cert["lemma_violations"] == 0
    assert cert["t"]["tails"][0]["form"] in ("cusp", "geometric")


def test_cli_count_includes_normalization_record(tmp_path, fixture_dir):
    cfg_path = _write_cfg(tmp_path, "single", graph=fixture_dir["single_edge_3"])
    out = str(tmp_path / "out_norm")
    assert main(["count", "--config", cfg_path, "--out", out]) == 0
    payload = json.load(open(os.path.join(out, "count.json")))
    assert payload["normalization"]["convention"].startswith("unit boundary mass")
    assert payload["meta"]["tool_version"]
    assert payload["cstar_exact"] == "6"


def test_emit_report_empty_results(tmp_path, fixture_dir):
    from treegibbs.cli import emit_report, parse_config

    cfg_path = _write_cfg(tmp_path, "single", graph=fixture_dir["single_edge_3"])
    cfg = parse_config(["analyze", "--config", cfg_path])
    written = emit_report({}, str(tmp_path / "empty_out"), cfg)
    assert len(written) == 1 and written[0].endswith("summary.txt")
    text = open(written[0]).read().splitlines()
    assert len(text) == 2  # header and hash only, zero sections


def test_cli_mix_on_tailed_fixture(tmp_path, fixture_dir):
    cfg_path = _write_cfg(tmp_path, "cuspmix", graph=fixture_dir["cusp_22"], n_max=30)
    out = str(tmp_path / "out_mix_cusp")
    assert main(["mix", "--config", cfg_path, "--out", out]) == 0
    tab = json.load(open(os.path.join(out, "taboo.json")))
    assert tab["horizon"] == 30 and tab["B"]


def test_cli_with_potential_file(tmp_path, fixture_dir):
    pot = {"edges": {"e": 0.2, "ebar": 0.2}}
    pot_path = tmp_path / "pot.json"
    pot_path.write_text(json.dumps(pot))
    cfg_path = _write_cfg(
        tmp_path, "withpot", graph=fixture_dir["single_edge_3"], potential=str(pot_path)
    )
    out = str(tmp_path / "out_pot")
    assert main(["analyze", "--config", cfg_path, "--out", out]) == 0
    payload = json.load(open(os.path.join(out, "analyze.json")))
    # constant potential shifts the exponent but not its zero-potential twin
    assert abs(payload["delta"] - (payload["delta_zero"] + 0.2)) < 1e-10


def test_cli_rejects_bad_potential(tmp_path, fixture_dir):
    pot_path = tmp_path / "pot_bad.json"
    pot_path.write_text(json.dumps({"edges": {"nope": 1.0}}))
    cfg_path = _write_cfg(
        tmp_path, "badpot", graph=fixture_dir["single_edge_3"], potential=str(pot_path)
    )
    assert main(["analyze", "--config", cfg_path, "--out", str(tmp_path / "ob")]) == 2
