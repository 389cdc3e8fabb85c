import numpy as np
import pytest

from okgd import io, synth
from okgd.detector import DetectionResult, DetectorConfig


def test_header_layout():
    assert io.stream_header([2, 1]) == ["t", "v0_d0", "v0_d1", "v1_d0"]


def test_stream_round_trip_is_exact(tmp_path):
    sc = synth.make_cluster_swap_scenario(seed=0, n_clusters=2, cluster_size=2, horizon=30)
    streams = synth.emit_frames(sc, 0)
    path = tmp_path / "s.csv"
    io.write_stream(path, streams)
    back, dims, times = io.ingest_stream(path)
    assert dims == sc.dims
    assert list(times) == list(range(1, 31))
    for a, b in zip(streams, back):
        assert a.tobytes() == b.tobytes()


def test_seismic_shaped_layout(tmp_path):
    rng = np.random.default_rng(0)
    streams = [rng.standard_normal((5, 3)) for _ in range(13)]
    path = tmp_path / "s.csv"
    io.write_stream(path, streams)
    _, dims, _ = io.ingest_stream(path)
    assert dims == [3] * 13


@pytest.mark.parametrize("body, message", [
    ("t,v0_d0,v1_d0\n1,0.5\n", "expected 3 cells"),
    ("t,v0_d0\n2,0.5\n1,0.1\n", "does not increase"),
    ("t,v0_d0\n1,abc\n", "non-numeric"),
    ("t,v0_d0\n1,\n", "missing value"),
    ("t,v0_d0\n1,nan\n", "non-finite"),
    ("x,v0_d0\n1,0\n", "header"),
    ("t,v0_d1\n1,0\n", "out of order"),
    ("t,v0_d0\n", "no data rows"),
])
def test_stream_errors(tmp_path, body, message):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(io.DataError, match=message):
        io.ingest_stream(path)


def test_missing_stream_file(tmp_path):
    with pytest.raises(io.DataError, match="nope.csv"):
        io.ingest_stream(tmp_path / "nope.csv")


def test_config_round_trip():
    cfg = io.RunConfig(
        DetectorConfig(lam=None, gamma=5.0, mu0=0.4, bp=60, n_pre=50, n_post=40, c=2.0, kappa=4.0,
                       threshold_warmup=12, seed=9, kernel="laplacian", bandwidth=(0.5, 1.25)),
        graph={"kind": "sbm", "n_clusters": 2, "cluster_size": 10, "p_intra": 0.5, "p_inter": 0.01, "seed": 3},
        stream={"kind": "csv", "path": "data/stream.csv"},
        output={"dir": "out"},
    )
    text = io.format_config(cfg)
    back = io.parse_config_text(text)
    assert back == cfg
    assert io.format_config(back) == text


def test_config_defaults_and_auto():
    cfg = io.parse_config_text("[detector]\nlambda = auto\nkappa = 1.75\n")
    assert cfg.detector == DetectorConfig(kappa=1.75)
    assert io.parse_config_text("").detector == DetectorConfig()


@pytest.mark.parametrize("text", [
    "[detector]\nbogus = 1\n",
    "[detector]\nbp = ten\n",
    "[detector]\ngamma = auto\n",
    "[detector]\nbp = 10\nn_pre = 20\n",
    "[extra]\na = 1\n",
    "[graph]\nkind = tree\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(io.ConfigError):
        io.parse_config_text(text)


def test_truth_round_trip(tmp_path):
    path = tmp_path / "truth.txt"
    io.write_truth(path, 500, [3, 7])
    assert path.read_text() == "tau=500\nchanged=3,7\n"
    assert io.read_truth(path) == (500, [3, 7])
    io.write_truth(path, None, [])
    assert path.read_text() == "changed=\n"
    assert io.read_truth(path) == (None, [])


def test_trace_format(tmp_path):
    res = DetectionResult(True, 12, [12], np.array([11, 12]), np.array([0.1, 1 / 3]),
                          np.array([[0.1, 0.0], [1 / 3, -1e-17]]), np.array([0.5, 0.3]),
                          np.array([False, True]), [2, 3])
    path = tmp_path / "trace.csv"
    io.write_trace(path, res)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,||g||,eps_t,alarm,g_1,g_2"
    assert lines[2] == f"12,{1 / 3!r},0.3,1,{1 / 3!r},-1e-17"
    back = io.read_trace(path)
    assert back["norm"][1] == 1 / 3 and back["alarm"].tolist() == [False, True]


def test_ar1_filter():
    rng = np.random.default_rng(0)
    phi = 0.8
    x = np.zeros(5000)
    for t in range(1, 5000):
        x[t] = phi * x[t - 1] + rng.standard_normal()
    res = io.ar1_filter([x[:, None]], fit_length=4000)[0][:, 0]
    assert res[0] == x[0]
    est = (x[1:4000] @ x[:3999]) / (x[:3999] @ x[:3999])
    np.testing.assert_allclose(res[1:], x[1:] - est * x[:-1])
    assert abs(est - phi) < 0.03
    assert abs(np.corrcoef(res[1:-1], res[2:])[0, 1]) < 0.05
    with pytest.raises(ValueError):
        io.ar1_filter([x[:, None]], fit_length=1)


def test_inline_comments_allowed():
    cfg = io.parse_config_text("[detector]\nlambda = auto   ; 10 / mean degree\nbp = 120 ; burn-in\nn_pre = 100\n")
    assert cfg.detector.lam is None and cfg.detector.bp == 120
