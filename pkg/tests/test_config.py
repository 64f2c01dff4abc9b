import pytest

from cauchylab.config import DEFAULTS, ConfigError, LabConfig, dump_config, load_config, parse_config


def test_defaults_and_digest():
    a, b = LabConfig(), parse_config("")
    assert a.values == b.values == DEFAULTS
    assert a.digest() == b.digest()
    assert a.replace(evolve__n=801).digest() != a.digest()


def test_sections_and_dotted_keys():
    cfg = parse_config("""
# comment
run.seed = 3
[evolve]
n = 801          # inline comment
ko = 0.02
probes = (3.0, 5.0)
""")
    assert cfg["run.seed"] == 3 and cfg["evolve.n"] == 801
    assert cfg["evolve.ko"] == 0.02 and cfg["evolve.probes"] == (3.0, 5.0)
    assert cfg.section("evolve")["n"] == 801


def test_type_coercion():
    cfg = parse_config("[evolve]\nT = 10\nprobes = 4.0\ndata_kind = ingoing\n")
    assert isinstance(cfg["evolve.T"], float)
    assert cfg["evolve.probes"] == (4.0,)
    assert cfg["evolve.data_kind"] == "ingoing"


@pytest.mark.parametrize("text", ["[evolve]\nbogus = 1\n", "evolve.n = 1.5\n", "evolve.interior = 1\n",
                                  "evolve.n = 10\n", "evolve.cfl = 2.0\n", "resonances.band = 'middle'\n",
                                  "flow.horizons = (0, 5)\n", "run.budget = -1.0\n", "[evolve\n"])
def test_rejects_bad_config(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_round_trip(tmp_path):
    cfg = LabConfig().replace(evolve__n=801, norms__specs=((0.5, 0.6),), extension__rm=150.0)
    p = tmp_path / "c.cfg"
    p.write_text(dump_config(cfg))
    back = load_config(p)
    assert back.values == cfg.values
    assert back.source == str(p)


def test_replace_unknown():
    with pytest.raises(ConfigError):
        LabConfig().replace(nope__x=1)
