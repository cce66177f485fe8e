import pytest

import sagsim


def path(n):
    return sagsim.Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def test_graph_basics():
    g = path(5)
    assert (g.n, g.m, g.max_degree) == (5, 4, 2)
    assert g.neighbors(2) == [1, 3]
    assert g.has_edge(3, 4) and not g.has_edge(0, 4)
    assert g.stats()["components"] == 1
    with pytest.raises(sagsim.ConfigError):
        sagsim.Graph.from_edges(3, [(0, 0)])


def test_generator_is_deterministic(tmp_path):
    a = sagsim.Graph.generate("gnp", 300, p=0.03, seed=9)
    b = sagsim.Graph.generate("gnp", 300, p=0.03, seed=9)
    assert a == b
    a.save(str(tmp_path / "g.txt"))
    assert sagsim.Graph.load(str(tmp_path / "g.txt")) == a


def test_engines_agree_on_two_ruling_set():
    g = sagsim.Graph.generate("gnp", 400, p=0.02, seed=3)
    ref = sagsim.run(g, "2rs", engine="congest", seed=5)
    mpc = sagsim.run(g, "2rs", engine="mpc-v1", seed=5)
    assert ref["version"] == sagsim.RUN_SCHEMA
    assert ref["result"]["success"] and mpc["result"]["success"]
    assert ref["result"]["set"] == mpc["result"]["set"]
    assert mpc["metrics"]["audit"]["pass"]


def test_result_verifies_independently():
    g = sagsim.Graph.generate("random_regular", 200, d=6, seed=2)
    rec = sagsim.run(g, "brs", beta=3, engine="mpc-v2", memory="input-linear")
    s = rec["result"]["set"]
    assert sagsim.verify_independent(g, s)["pass"]
    assert sagsim.verify_domination(g, s, 3)["pass"]


def test_oracles_report_witnesses():
    g = path(3)
    v = sagsim.verify_independent(g, [0, 1])
    assert not v["pass"] and v["witness"] == [0, 1]
    assert not sagsim.verify_domination(g, [0], 1)["pass"]
    assert sagsim.verify_maximal_independent(g, [0, 2])["pass"]


def test_bad_arguments_raise():
    g = path(4)
    with pytest.raises(sagsim.ConfigError):
        sagsim.run(g, "mis", beta=3)
    with pytest.raises(sagsim.Error):
        sagsim.run(g, "nope")
