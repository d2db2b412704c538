import numpy as np
import pytest

from proxitrack.config import Config, parse_config_text
from proxitrack.io import read_mot_csv, write_mot_csv


def test_mot_csv_round_trip(tmp_path):
    rows = np.array([
        [1, -1, 10.25, 20.5, 15.0, 30.0, 0.9, 0, 1.0],
        [2, 3, 1.1, 2.2, 3.3, 4.4, 1.0, 1, 1.0],
    ])
    path = tmp_path / "t.csv"
    write_mot_csv(path, rows)
    back = read_mot_csv(path)
    assert np.array_equal(back, rows)
    write_mot_csv(path, back)
    first = path.read_bytes()
    write_mot_csv(path, read_mot_csv(path))
    assert path.read_bytes() == first


def test_mot_csv_empty(tmp_path):
    path = tmp_path / "e.csv"
    write_mot_csv(path, np.zeros((0, 9)))
    assert read_mot_csv(path).shape == (0, 9)


def test_mot_csv_reports_bad_row_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,-1,0,0,5,5,1,0,1\n1,-1,0,0\n")
    with pytest.raises(ValueError, match="row 2"):
        read_mot_csv(path)
    path.write_text("1,-1,0,0,5,5,1,0,1\n2,-1,a,0,5,5,1,0,1\n")
    with pytest.raises(ValueError, match="row 2"):
        read_mot_csv(path)
    path.write_text("1,-1,0,0,0,5,1,0,1\n")
    with pytest.raises(ValueError, match="width/height"):
        read_mot_csv(path)


def test_config_parsing():
    values = parse_config_text(
        """
        # a comment
        alpha = 0.5
        name = out dir  # trailing comment
        flag = true
        nums = 1 2 3
        """
    )
    cfg = Config(values)
    assert cfg.get_float("alpha") == 0.5
    assert cfg.get_str("name") == "out dir"
    assert cfg.get_bool("flag") is True
    assert cfg.get_floats("nums") == [1.0, 2.0, 3.0]
    assert cfg.get_int("missing", 7) == 7
    assert cfg.get_bool("missing") is None


def test_config_errors():
    with pytest.raises(ValueError, match="key = value"):
        parse_config_text("just a line")
    cfg = Config({"x": "abc", "b": "maybe"})
    with pytest.raises(ValueError):
        cfg.get_float("x")
    with pytest.raises(ValueError):
        cfg.get_bool("b")


def test_config_from_file(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text("seed = 42\n# comment\nfps = 15\n")
    cfg = Config.from_file(path)
    assert cfg.get_int("seed") == 42 and cfg.get_float("fps") == 15.0
