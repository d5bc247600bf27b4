import json

import pytest

from densify.main import import_command, main, parse_args, snake_to_camel

SMALL_THROUGHPUT = """\
throughput:
  models:
    bpm: {family: bpm, breakpoints_m: [1.0], exponents: [2.0, 4.0]}
  densities: [1.0e+3, 1.0e+4]
  trials: 200
"""


def test_snake_to_camel_and_import():
    assert snake_to_camel("table1") == "Table1"
    assert snake_to_camel("link_cdf") == "LinkCdf"
    assert import_command("heatmap").name == "heatmap"
    with pytest.raises(ImportError):
        import_command("missing")


def test_global_flags_before_or_after_command():
    before = parse_args(["--seed", "5", "--out", "o", "table1"])
    after = parse_args(["table1", "--seed", "5", "--out", "o"])
    assert (before.seed, before.out, before.command) == (after.seed, after.out, after.command) == (5, "o", "table1")
    assert not hasattr(parse_args(["table1"]), "seed")


def test_unknown_command_is_a_usage_error():
    with pytest.raises(SystemExit) as info:
        parse_args(["teleport"])
    assert info.value.code == 2


def test_table1_writes_csv(tmp_path):
    assert main(["table1", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "table1.csv").read_text()
    assert "density_per_km2,mean_link_m,p_d_lt_1m,p_d_lt_29.45m,p_d_lt_13.1m,p_d_lt_3.25m" in text
    assert sum(line.startswith("# note: erratum") for line in text.splitlines()) == 1
    assert not (tmp_path / "table1_empirical.csv").exists()


def test_regions_prints_and_writes(tmp_path, capsys):
    assert main(["regions", "--out", str(tmp_path)]) == 0
    assert "fraunhofer_m: 28.9" in capsys.readouterr().out
    doc = json.loads((tmp_path / "regions.json").read_text())
    assert doc["regions"]["fraunhofer_m"] == pytest.approx(28.96, abs=0.02)
    assert [b["band"] for b in doc["bands"]] == ["band2", "band4", "band38"]
    assert doc["bands"][0]["mismatch"] is None


def test_regions_flags_override(tmp_path):
    assert main(["regions", "--out", str(tmp_path), "--frequency-hz", "9e8", "--tx-height-m", "1", "--rx-height-m", "1"]) == 0
    doc = json.loads((tmp_path / "regions.json").read_text())
    assert doc["regions"]["critical_m"] == pytest.approx(12.01, abs=0.01)


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.yaml"), "table1"]) == 2
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("densify: ConfigError:")


def test_bad_seed_exits_2(tmp_path):
    assert main(["table1", "--seed", "-3", "--out", str(tmp_path)]) == 2


def test_degenerate_fit_exits_3(tmp_path, capsys):
    data = tmp_path / "same.csv"
    data.write_text("distance_m,rx_power_dbm\n5,-30\n5,-31\n")
    assert main(["fit", "--input", str(data), "--out", str(tmp_path / "out")]) == 3
    assert "densify: DegenerateDesignError:" in capsys.readouterr().err


def test_fit_on_synthetic_data(tmp_path):
    assert main(["fit", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "fit_results.json").read_text())
    assert doc["n_points"] == 40
    assert [r["spec"] for r in doc["ranking"]][0].startswith("bpm-2")
    assert (tmp_path / "fit_measurements.csv").exists()


def test_mitigation_worked_example(tmp_path):
    cfg = tmp_path / "m.yaml"
    cfg.write_text("mitigation:\n  densities: [1.0e+3]\n  trials: 100\n")
    assert main(["mitigation", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "mitigation_worked_example.json").read_text())
    assert doc["sic"]["cancelled"] == [0]
    assert doc["ia"]["cancelled"] == [0, 1]
    assert doc["ica"]["ia_assigned"] == [1, 3]
    assert doc["ica"]["residual_sinr"] == "inf"
    rows = (tmp_path / "mitigation_curves.csv").read_text().splitlines()
    assert "density_per_km2,strategy,coverage,std_err,spatial_throughput" in rows


def test_throughput_rerun_is_byte_identical_at_any_thread_count(tmp_path):
    cfg = tmp_path / "t.yaml"
    cfg.write_text(SMALL_THROUGHPUT)
    assert main(["throughput", "-c", str(cfg), "--out", str(tmp_path / "a"), "--seed", "4"]) == 0
    assert main(["throughput", "-c", str(cfg), "--out", str(tmp_path / "b"), "--seed", "4", "--threads", "3"]) == 0
    a = (tmp_path / "a" / "throughput_bpm.csv").read_bytes()
    b = (tmp_path / "b" / "throughput_bpm.csv").read_bytes()
    assert a == b
    assert b"spatial_throughput_bits_per_s_hz_m2" in a
    # two points are too few for the scaling fit
    assert not (tmp_path / "a" / "scaling_bpm.json").exists()


def test_trials_flag_overrides_every_count(tmp_path):
    cfg = tmp_path / "t.yaml"
    cfg.write_text(SMALL_THROUGHPUT)
    assert main(["throughput", "-c", str(cfg), "--trials", "100", "--out", str(tmp_path)]) == 0
    header = (tmp_path / "throughput_bpm.csv").read_text().splitlines()
    config_line = next(line for line in header if line.startswith("# config: "))
    assert json.loads(config_line[len("# config: "):])["run"]["trials"] == 100


@pytest.mark.slow
def test_heatmap_small_raster(tmp_path):
    cfg = tmp_path / "h.yaml"
    cfg.write_text("heatmap:\n  densities_per_km2: [3.6e+3]\n  resolution: 40\n")
    assert main(["heatmap", "-c", str(cfg), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "heatmap_bpm_dual_3600.pgm").read_bytes().startswith(b"P5\n")
    assert (tmp_path / "heatmap_stats.csv").exists()
    assert (tmp_path / "heatmap_rank_correlation.csv").exists()


@pytest.mark.slow
def test_mitigation_critical_search(tmp_path):
    cfg = tmp_path / "m.yaml"
    cfg.write_text(
        "mitigation:\n"
        "  densities: [1.0e+4]\n"
        "  trials: 200\n"
        "  strategies: [{kind: sic}, {kind: ica, budget: 2}]\n"
        "  critical: {mu_min: 3.0e+4, mu_max: 3.0e+6}\n"
        "  worked_example: false\n"
    )
    assert main(["mitigation", "-c", str(cfg), "--out", str(tmp_path)]) == 0
    lines = [ln for ln in (tmp_path / "mitigation_critical_density.csv").read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == "strategy,mu_star_per_km2,st_star,bracket_width"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["sic", "ica"]
    assert not (tmp_path / "mitigation_worked_example.json").exists()
