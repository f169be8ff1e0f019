import json

import numpy as np
import pytest

from gapgp import dataio
from gapgp.dataio import AffineMap, DataFormatError, ExpressionRecord
from gapgp.types import Channel

U, Y = Channel.U, Channel.Y

GOOD = """gene,channel,x,t,value
kr,U,35.5,40.0,0.2
kr,Y,35.5,40.0,0.1
kr,U,60.0,60.0,0.9
kni,Y,70.0,65.0,0.4
"""


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_and_filter(tmp_path):
    rep = dataio.load_csv(write(tmp_path, GOOD), t_min=50, genes=["kr"])
    assert [(r.gene, r.channel, r.t) for r in rep.records] == [("kr", U, 60.0)]
    assert len(rep.filtered) == 3
    assert rep.n_rows == 4


def test_bad_header(tmp_path):
    with pytest.raises(DataFormatError, match="header"):
        dataio.load_csv(write(tmp_path, "a,b,c\n1,2,3\n"))


@pytest.mark.parametrize(
    "row,msg",
    [("kr,Z,1,1,1", "channel"), ("kr,U,abc,1,1", "non-numeric"), ("kr,U,150,1,1", "outside"),
     ("kr,U,1,-1,1", "negative"), ("kr,U,1,1,nan", "non-finite"), ("kr,U,1,1", "fields")],
)
def test_row_validation(tmp_path, row, msg):
    p = write(tmp_path, "gene,channel,x,t,value\n" + row + "\n")
    with pytest.raises(DataFormatError, match=msg):
        dataio.load_csv(p)
    rep = dataio.load_csv(p, strict=False)
    assert rep.records == [] and rep.rejected[0][0] == 2


def test_csv_round_trip(tmp_path):
    recs = [ExpressionRecord("g", U, 0.1, 0.2, 1 / 3), ExpressionRecord("g", Y, 0.7, 0.9, -2e-17)]
    p = tmp_path / "out" / "r.csv"
    dataio.save_csv(recs, p)
    assert dataio.load_csv(p).records == recs


def test_affine_map_round_trip():
    m = AffineMap.between(((35, 92), (38, 89)), ((0, 1), (0, 1)))
    x, t = m.forward(np.array([35.0, 92.0]), np.array([38.0, 89.0]))
    np.testing.assert_allclose(x, [0, 1])
    np.testing.assert_allclose(t, [0, 1])
    xb, tb = m.inverse(x, t)
    np.testing.assert_allclose(xb, [35, 92])
    with pytest.raises(ValueError):
        AffineMap(0.0)


def test_normalize_domain_uses_one_map_for_both_channels(tmp_path):
    recs = dataio.load_csv(write(tmp_path, GOOD)).records
    out, m = dataio.normalize_domain(recs)
    xs = [r.x for r in out]
    assert min(xs) == 0.0 and max(xs) == pytest.approx(1.0)
    assert out[0].x == out[1].x


def test_split_is_seeded_and_disjoint():
    a = dataio.train_test_split(100, 0.3, seed=4)
    b = dataio.train_test_split(100, 0.3, seed=4)
    np.testing.assert_array_equal(a[0], b[0])
    assert len(a[0]) == 30 and len(set(a[0]) & set(a[1])) == 0
    with pytest.raises(ValueError):
        dataio.train_test_split(10, 1.0)


def test_to_observations(tmp_path):
    recs = dataio.load_csv(write(tmp_path, GOOD)).records
    obs = dataio.to_observations(recs, {U: 1e-3})
    assert [o.channel for o in obs] == [U, Y]
    assert obs[0].nugget == 1e-3 and obs[1].nugget == 0.0
    assert obs[0].design.shape == (2, 2)


def test_design_round_trip(tmp_path):
    d = np.random.default_rng(0).random((5, 2))
    dataio.save_design(d, tmp_path / "d.csv")
    np.testing.assert_array_equal(dataio.load_design(tmp_path / "d.csv"), d)


def test_json_handles_numpy_and_nonfinite(tmp_path):
    p = tmp_path / "x.json"
    dataio.write_json({U: np.array([1.0, np.nan]), "n": np.int64(3)}, p)
    assert json.loads(p.read_text()) == {"U": [1.0, None], "n": 3}
