import json

import pytest

from cauchylab.cli import main, run_tasks, write_csv
from cauchylab.config import DEFAULTS, LabConfig

SMALL = LabConfig().replace(evolve__T=4.0, evolve__n=401, evolve__interior=False, carter__witnesses=1,
                            carter__points=3, carter__ell_max=6, resonances__N=40)


def test_horizons_and_manifest(tmp_path):
    m = run_tasks(SMALL, ["horizons"], tmp_path)
    h = json.loads((tmp_path / "horizons.json").read_text())
    assert len(h["radii"]) == 4 and h["signs"] == [-1, 1, -1, 1]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man == json.loads(json.dumps(m))
    assert man["tasks"]["horizons"]["status"] == "ok"
    assert set(man["config"]) == set(DEFAULTS)
    assert man["config_hash"] == SMALL.digest()
    assert "horizons.json" in man["outputs"]


def test_outputs_byte_identical(tmp_path):
    tasks = ["horizons", "evolve", "resonances", "carter"]
    a = run_tasks(SMALL, tasks, tmp_path / "a")
    b = run_tasks(SMALL, tasks, tmp_path / "b")
    assert a["outputs"] == b["outputs"] and len(a["outputs"]) == 4
    c = json.loads((tmp_path / "a" / "carter.json").read_text())
    assert [x["m"] for x in c["angular_modes"]] == [0, 1, 2]


def test_csv_format(tmp_path):
    p = tmp_path / "x.csv"
    write_csv(p, ["t", "u"], [[0.1, 1.0], [1 + 2j, 3.0]])
    raw = p.read_bytes()
    assert raw.startswith(b"t,u_re,u_im\r\n0.10000000000000001,1,2\r\n")


def test_task_errors_are_recorded(tmp_path):
    m = run_tasks(SMALL, ["norms"], tmp_path)
    assert m["tasks"]["norms"]["status"] == "error"
    assert "norms" in m["tasks"]["norms"]["error"]


def test_unknown_task(tmp_path):
    with pytest.raises(ValueError):
        run_tasks(SMALL, ["bogus"], tmp_path)


def test_main_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("[evolve]\nn = 401\n")
    assert main(["horizons", "--config", str(cfg), "--out", str(tmp_path / "o"), "--seed", "2"]) == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["config"]["run.seed"] == 2 and man["config_source"] == str(cfg)
    bad = tmp_path / "bad.cfg"
    bad.write_text("nope = 1\n")
    assert main(["horizons", "--config", str(bad)]) == 2
    assert "unknown key" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main([])


def test_interior_step_is_subsampled(tmp_path):
    # a fine exterior step must not be handed to the interior marcher as is
    cfg = LabConfig().replace(evolve__T=12.0)
    m = run_tasks(cfg, ["evolve"], tmp_path)
    assert m["tasks"]["evolve"]["status"] == "ok"
    rows = (tmp_path / "evolve_sup_near_r1.csv").read_text().splitlines()[1:]
    t = [float(r.split(",")[0]) for r in rows]
    assert abs((t[1] - t[0]) - 0.02) < 0.0035
