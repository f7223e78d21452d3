import csv

import numpy as np
import pytest

from lipinval.cli import EXIT_INCONCLUSIVE, EXIT_INVALIDATED, EXIT_NOT_INVALIDATED, main
from lipinval.dataset import load_dataset, make_dataset, save_dataset, write_trajectory_csv


def read_csv(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.reader(lines))


@pytest.fixture()
def scalar_dir(tmp_path):
    s = np.linspace(-2, 2, 12)
    trajs = [np.array([[a], [0.5 * a]]) for a in s]
    save_dataset(make_dataset(trajs, eps_w=[0.01], eps_v=[0.01], lower=[-3], upper=[3]), tmp_path / "data")
    return tmp_path


def test_gen_and_estimate(tmp_path, capsys):
    out = tmp_path / "train"
    assert main(["gen", "--kp", "0.5", "--traj", "2", "--T", "6", "--seed", "3", "--out", str(out)]) == 0
    data = load_dataset(out)
    assert data.N == 2 and len(data.trajectories[0]) == 6
    assert main(["estimate-lipschitz", str(out), "--pac-eps", "0.1"]) == 0
    text = capsys.readouterr().out
    assert "L_hat" in text and "pac_sample_size 30" in text


def test_abstract_eval_rows(scalar_dir):
    out = scalar_dir / "env.csv"
    assert main(["abstract", "eval", str(scalar_dir / "data"), "--grid", "7", "--lip", "0.6",
                 "--out", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["s_1", "fbar_1", "flow_1"]
    assert len(rows) - 1 == 7
    assert all(float(r[2]) <= float(r[1]) for r in rows[1:])


def test_abstract_eval_points(scalar_dir):
    pts = scalar_dir / "pts.csv"
    pts.write_text("0.0\n1.0\n")
    out = scalar_dir / "env.csv"
    assert main(["abstract", "eval", str(scalar_dir / "data"), "--points", str(pts), "--out", str(out)]) == 0
    assert len(read_csv(out)) == 3


def test_invalidate_exit_codes(scalar_dir, capsys):
    data = str(scalar_dir / "data")
    good = scalar_dir / "good.csv"
    write_trajectory_csv(good, np.array([[1.0], [0.5], [0.25]]))
    bad = scalar_dir / "bad.csv"
    write_trajectory_csv(bad, np.array([[1.0], [-0.5], [0.25]]))
    assert main(["invalidate", data, str(good), "--lip", "0.6"]) == EXIT_NOT_INVALIDATED
    assert main(["invalidate", data, str(bad), "--lip", "0.6"]) == EXIT_INVALIDATED
    assert "verdict: invalidated" in capsys.readouterr().out
    assert main(["invalidate", data, str(good), "--lip", "0.6", "--downsample", "knn", "--knn", "2"]) == 0
    dump = scalar_dir / "p.lp"
    witness = scalar_dir / "w.csv"
    assert main(["invalidate", data, str(good), "--lip", "0.6", "--dump-lp", str(dump),
                 "--witness", str(witness)]) == 0
    assert "\nvars 5\n" in dump.read_text()
    assert np.loadtxt(witness, delimiter=",").shape == (3,)


def test_invalidate_inconclusive(scalar_dir, monkeypatch):
    from lipinval import cli
    from lipinval.invalidation import InconclusiveError

    def boom(*args, **kwargs):
        raise InconclusiveError("pivot limit")

    monkeypatch.setattr(cli, "invalidate", boom)
    traj = scalar_dir / "t.csv"
    write_trajectory_csv(traj, np.array([[1.0], [0.5]]))
    assert main(["invalidate", str(scalar_dir / "data"), str(traj)]) == EXIT_INCONCLUSIVE


def test_bad_inputs(scalar_dir, capsys):
    assert main(["invalidate", str(scalar_dir / "missing"), "x.csv"]) == 2
    broken = scalar_dir / "broken.csv"
    broken.write_text("k,y_1\n0,zz\n")
    assert main(["invalidate", str(scalar_dir / "data"), str(broken)]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["invalidate", "--no-such-flag"])
    assert exc.value.code == 2


def test_sweep_aggregate_rows(tmp_path):
    train, test = tmp_path / "train", tmp_path / "test"
    res, agg = tmp_path / "r.csv", tmp_path / "a.csv"
    code = main(["sweep", str(train), str(test), "--generate", "--train-traj", "2", "--test-traj", "3",
                 "--sizes", "8,30", "--downsamplers", "none,knn:4", "--out", str(res), "--aggregate", str(agg),
                 "--lip-scale", "1.3", "--randomize-init", "0.25"])
    assert code == 0
    assert res.read_text().startswith("# config {")
    rows = read_csv(agg)
    assert rows[0] == ["dataset_size", "downsampler", "param", "invalidated_of_20", "mean_wall_ms"]
    assert len(rows) - 1 == 2 * 2
    assert len(read_csv(res)) - 1 == 2 * 2 * 3


def test_selftest_command(capsys):
    assert main(["selftest", "--size", "5"]) == 0
    assert capsys.readouterr().out.count("PASS") == 3
