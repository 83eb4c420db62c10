"""
Tests for trace and table CSV output.
"""
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src import __version__
from src.dynamics import run
from src.generators import Rng, gen_gnp, gen_opinions_iid, gen_path
from src.graph_core import OpinionState
from src.io_formats import (
    TRACE_HEADER,
    format_float,
    read_config_comment,
    read_trace_csv,
    write_json,
    write_table_csv,
    write_trace_csv,
)


@pytest.fixture
def gnp_trace():
    rng = Rng(77)
    g = gen_gnp(150, 0.05, rng.child(0))
    trace, _ = run(g, gen_opinions_iid(g.n, 0.5, rng.child(1)))
    return trace


def test_format_float_round_trips():
    for value in (0.1, 1 / 3, -2.5e-17, 123456.789):
        assert float(format_float(value)) == value


def test_trace_csv_preserves_values(tmp_path, gnp_trace):
    path = write_trace_csv(tmp_path / "trace.csv", gnp_trace, {"seed": 77})
    rows = read_trace_csv(path)

    assert len(rows) == len(gnp_trace)
    assert [r["mean"] for r in rows] == gnp_trace.means
    assert [r["potential"] for r in rows] == gnp_trace.potentials
    assert [r["flips2"] for r in rows] == gnp_trace.flips2
    assert rows[0]["flips2"] is None and rows[1]["flips2"] is None


def test_trace_csv_header_and_comments(tmp_path):
    trace, _ = run(gen_path(3), OpinionState(np.array([1, -1, 1])))
    path = write_trace_csv(tmp_path / "trace.csv", trace, {"command": "simulate", "seed": 1})
    lines = path.read_text().splitlines()
    assert lines[0] == f"# majdyn {__version__}"
    assert lines[1].startswith("# config ")
    assert lines[2].split(",") == TRACE_HEADER
    # t=0 and t=1 leave flips2 empty
    assert lines[3].split(",")[2] == ""
    assert read_config_comment(path) == {"command": "simulate", "seed": 1}


def test_config_comment_missing(tmp_path):
    trace, _ = run(gen_path(3), OpinionState(np.ones(3)))
    path = write_trace_csv(tmp_path / "trace.csv", trace)
    assert read_config_comment(path) is None


def test_read_trace_rejects_other_csv(tmp_path):
    path = write_table_csv(tmp_path / "table.csv", ["a", "b"], [[1, 2]])
    with pytest.raises(ValueError):
        read_trace_csv(path)


def test_table_csv_cells(tmp_path):
    rows = [[1, 0.1, None, True], [2, np.float64(0.5), "x", False]]
    path = write_table_csv(tmp_path / "table.csv", ["i", "value", "note", "flag"], rows, {"k": 3})
    lines = path.read_text().splitlines()
    assert lines[2] == "i,value,note,flag"
    assert lines[3] == "1,0.10000000000000001,,1"
    assert lines[4] == "2,0.5,x,0"


def test_write_json(tmp_path):
    path = write_json(tmp_path / "out.json", {"path": tmp_path, "x": 1})
    text = path.read_text()
    assert text.endswith("\n")
    assert str(tmp_path) in text
