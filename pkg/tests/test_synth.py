import numpy as np
import pytest

from soclens.graph import build_graph
from soclens.ingest.events import functions_to_traces
from soclens.measures import pair_metrics, window_weights
from soclens.synth import (
    ChannelModel,
    FunctionSchedule,
    Phase,
    axi_channels,
    bernoulli,
    gen_probsys,
    gen_tinn_like,
    splitmix64,
    tinn_schedule,
    uniform,
)
from soclens.trace import ImpliedKind

L = ImpliedKind.LEVEL


def test_splitmix64_reference_values():
    # SplitMix64 seeded with 0 (stream 0) yields the published sequence
    z = splitmix64(0, 0, 3)
    assert [int(v) for v in z] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]


def test_streams_are_counter_based():
    full = splitmix64(42, 3, 100)
    assert np.array_equal(splitmix64(42, 3, 40, start=60), full[60:])
    assert not np.array_equal(splitmix64(42, 4, 100), full)
    u = uniform(1, 0, 10000)
    assert 0 <= u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.02


def test_bernoulli_rate():
    b = bernoulli(5, 0, 100000, 0.2)
    assert abs(b.mean() - 0.2) < 0.01


def test_reply_is_shifted_request():
    ts = gen_probsys([ChannelModel("req", 0.5), ChannelModel("rep", reply_to=("req", 5))], 2000, seed=3)
    req, rep = ts.trace("req").values, ts.trace("rep").values
    assert np.array_equal(rep[5:], req[:-5])
    assert rep[:5].sum() == 0


def test_busy_and_idle_are_exclusive():
    ts = gen_probsys(axi_channels(0.2, 0.2), 5000, seed=9)
    busy, idle = ts.trace("busy").values, ts.trace("idle").values
    assert not (busy & idle).any()
    assert ((busy | idle) == 1).all()
    assert not (ts.trace("stall").values & idle).any()


def test_busy_tracks_outstanding_requests():
    ts = gen_probsys([ChannelModel("a", 0.0), ChannelModel("b", reply_to=("a", 3))], 10, seed=0)
    assert ts.trace("busy").tolist() == [0] * 10
    ch = [ChannelModel("a", 1.0), ChannelModel("b", reply_to=("a", 3))]
    assert gen_probsys(ch, 6, seed=0).trace("busy").tolist() == [1] * 6


def test_cross_group_independence():
    ts = gen_probsys(axi_channels(0.1, 0.1), 20000, seed=11, side_channels=False)
    win = window_weights(0, 20000, 2)
    for w in ("AW", "W", "B"):
        for r in ("AR", "R"):
            m = pair_metrics(ts.trace(w), ts.trace(r), win, 0)
            assert m.cov < 0.02


def test_probsys_errors():
    with pytest.raises(ValueError, match="unknown channel"):
        gen_probsys([ChannelModel("b", reply_to=("a", 1))], 10)
    with pytest.raises(ValueError, match="cycle"):
        gen_probsys([ChannelModel("a", reply_to=("b", 1)), ChannelModel("b", reply_to=("a", 1))], 10)
    with pytest.raises(ValueError):
        ChannelModel("a", 1.5)
    with pytest.raises(ValueError):
        ChannelModel("a", reply_to=("b", -1))


def test_generators_are_deterministic():
    a = gen_probsys(axi_channels(), 3000, seed=4)
    b = gen_probsys(axi_channels(), 3000, seed=4)
    c = gen_probsys(axi_channels(), 3000, seed=5)
    assert a.levels.tobytes() == b.levels.tobytes()
    assert a.levels.tobytes() != c.levels.tobytes()
    assert gen_tinn_like(tinn_schedule(), 8192) == gen_tinn_like(tinn_schedule(), 8192)


def test_latency_recovered_by_graph():
    ts = gen_probsys(axi_channels(read_latency=7), 4096, seed=2)
    g = build_graph(ts, window_weights(1024, 1536, 2), 16)
    e = g.edge_between("AR", L, "R", L)
    assert (e.src[0].name, e.dst[0].name, e.delta) == ("AR", "R", 7)


def test_phase_intervals():
    assert Phase(0, 10, 4, 0.5).intervals() == [(0, 2), (4, 6), (8, 10)]
    assert Phase(0, 10, 4, 0.5, 1).intervals() == [(1, 3), (5, 7), (9, 10)]
    assert Phase(0, 10).intervals() == [(0, 10)]
    assert Phase(0, 10, 4, 0.0).intervals() == []


def test_tinn_like_empty_and_constant():
    assert len(gen_tinn_like([], 100)) == 0
    log = gen_tinn_like([FunctionSchedule("S", "f", (Phase(0, 50),))], 50)
    ts = functions_to_traces(log, 50)
    assert ts.trace("S.f").tolist() == [1] * 50


def test_tinn_like_overlap_rejected():
    fns = [
        FunctionSchedule("S", "f", (Phase(0, 10),)),
        FunctionSchedule("S", "g", (Phase(5, 20),)),
    ]
    with pytest.raises(ValueError, match="overlaps"):
        gen_tinn_like(fns, 20)
    # different depth or source is fine
    ok = [fns[0], FunctionSchedule("S", "g", (Phase(5, 20),), depth=1)]
    assert len(gen_tinn_like(ok, 20)) == 4


def test_tinn_schedule_phases():
    T = 8192
    ts = functions_to_traces(gen_tinn_like(tinn_schedule(T), T), T)
    train = ts.trace("SCPU.train").values
    assert train[: T // 2].mean() > 0.75
    assert train[T // 2 :].sum() == 0
    assert ts.trace("SCPU.infer").values[: T // 2].sum() == 0
    # nested predict only runs inside infer
    infer, predict = ts.trace("SCPU.infer").values, ts.trace("SCPU.predict").values
    assert not (predict & (1 - infer)).any()
