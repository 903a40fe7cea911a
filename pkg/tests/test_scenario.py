import json
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsnopt.model import PAPER_PARAMS, make_plan
from vsnopt.scenario import (
    PRESETS,
    FormatError,
    GenerationConfig,
    GenerationError,
    SchemaVersionError,
    SplitMix64,
    build_coverage,
    dumps_scenario,
    generate,
    load_plan,
    load_scenario,
    save_plan,
    save_scenario,
    scenario_digest,
)

from instances import scenario

# published reference stream for seed 1234567
REFERENCE_STREAM = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def test_splitmix_reference_stream():
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(5)] == REFERENCE_STREAM


def test_draw_order_follows_stream():
    cfg = GenerationConfig(area=(100.0, 50.0), n_nodes=2, n_tasks=1, seed=1234567,
                           budget_interval=(10, 20), require_coverage=False)
    s = generate(cfg)
    v = REFERENCE_STREAM
    assert s.nodes[0].pos == (v[0] / 2**64 * 100.0, v[1] / 2**64 * 50.0)
    assert s.nodes[1].pos == (v[2] / 2**64 * 100.0, v[3] / 2**64 * 50.0)
    assert s.nodes[0].budget == 10 + v[4] % 11


def test_presets_match_table():
    expected = {"s1": ((100, 100), 10, 8), "s2": ((150, 150), 15, 12), "s3": ((200, 200), 20, 16)}
    for name, (area, n, m) in expected.items():
        cfg = PRESETS[name]
        assert (cfg.area, cfg.n_nodes, cfg.n_tasks) == (area, n, m)
        assert cfg.range == 30
        assert cfg.budget_interval == (1_900_000_000, 3_400_000_000)
        assert cfg.params == PAPER_PARAMS
        assert (PAPER_PARAMS.e_ps, PAPER_PARAMS.e_vs, PAPER_PARAMS.max_vs) == (17_000, 1_700, 4)


def test_generate_deterministic():
    cfg = PRESETS["s1"].with_seed(42)
    assert dumps_scenario(generate(cfg)) == dumps_scenario(generate(cfg))
    assert generate(cfg) != generate(cfg.with_seed(43))


def test_config_rejects_zero_nodes():
    with pytest.raises(ValueError):
        GenerationConfig(n_nodes=0)
    with pytest.raises(ValueError):
        GenerationConfig(budget_interval=(5, 4))


def test_coverage_retry_never_leaves_uncovered():
    cfg = GenerationConfig(area=(1000.0, 1000.0), n_nodes=1, n_tasks=1)
    outcomes = {"covered": 0, "error": 0}
    for seed in range(200):
        try:
            s = generate(cfg.with_seed(seed))
        except GenerationError as e:
            assert "task 0" in str(e)
            outcomes["error"] += 1
            continue
        assert all(build_coverage(s).column(0))
        outcomes["covered"] += 1
    assert outcomes["covered"] and outcomes["error"]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(PRESETS)), st.integers(0, 2**64 - 1))
def test_generated_positions_and_budgets_in_range(name, seed):
    cfg = PRESETS[name].with_seed(seed)
    s = generate(cfg)
    w, h = cfg.area
    lo, hi = cfg.budget_interval
    for n in s.nodes:
        assert 0 <= n.pos[0] <= w and 0 <= n.pos[1] <= h
        assert lo <= n.budget <= hi
    for t in s.tasks:
        assert 0 <= t.pos[0] <= w and 0 <= t.pos[1] <= h
    cov = build_coverage(s)
    assert all(any(cov.column(j)) for j in range(len(s.tasks)))


class TestCoverage:
    def test_row(self):
        s = scenario([(0, 0)], [(10, 0), (50, 0)])
        assert build_coverage(s).entries == ((True, False),)

    def test_zero_tasks(self):
        cov = build_coverage(scenario([(0, 0), (5, 5)], []))
        assert cov.shape == (2, 0)

    def test_colocated(self):
        pts = [(10, 10), (40, 70), (90, 20)]
        cov = build_coverage(scenario(pts, pts))
        assert all(any(cov.column(j)) for j in range(3))


class TestScenarioFile:
    def test_round_trip(self, tmp_path):
        s = generate(PRESETS["s1"].with_seed(42))
        path = tmp_path / "s1.json"
        save_scenario(s, path)
        loaded = load_scenario(path)
        assert loaded == s
        save_scenario(loaded, tmp_path / "again.json")
        assert (tmp_path / "again.json").read_bytes() == path.read_bytes()

    def test_key_order(self):
        doc = json.loads(dumps_scenario(generate(PRESETS["s1"])))
        assert list(doc) == ["schema_version", "area", "params", "seed", "nodes", "tasks"]
        assert list(doc["nodes"][0]) == ["id", "x", "y", "budget_nj", "range"]

    def test_hand_built_without_seed(self, tmp_path):
        s = scenario([(1, 2)], [(3, 4)])
        save_scenario(s, tmp_path / "h.json")
        assert load_scenario(tmp_path / "h.json") == s

    def test_truncated(self, tmp_path):
        text = dumps_scenario(generate(PRESETS["s1"]))
        path = tmp_path / "t.json"
        path.write_text(text[: len(text) // 2])
        with pytest.raises(FormatError, match="line"):
            load_scenario(path)

    def test_unknown_field(self, tmp_path):
        doc = json.loads(dumps_scenario(generate(PRESETS["s1"])))
        doc["nodes"][3]["colour"] = "red"
        path = tmp_path / "u.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match=r"nodes\[3\].*'colour'"):
            load_scenario(path)

    def test_wrong_type(self, tmp_path):
        doc = json.loads(dumps_scenario(generate(PRESETS["s1"])))
        doc["nodes"][0]["budget_nj"] = 1.5
        path = tmp_path / "w.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="budget_nj"):
            load_scenario(path)

    def test_version_mismatch(self, tmp_path):
        doc = json.loads(dumps_scenario(generate(PRESETS["s1"])))
        doc["schema_version"] = 2
        path = tmp_path / "v.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaVersionError):
            load_scenario(path)

    def test_invalid_values(self, tmp_path):
        doc = json.loads(dumps_scenario(generate(PRESETS["s1"])))
        doc["params"]["max_vs"] = 0
        path = tmp_path / "p.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="max_vs"):
            load_scenario(path)


class TestPlanFile:
    def test_round_trip(self, tmp_path):
        s = scenario([(10, 10), (60, 10)], [(15, 10), (10, 15), (60, 15)])
        plan = make_plan([(0, 0, "VS"), (1, 0, "VS"), (2, 1, "PS")])
        save_plan(plan, s, tmp_path / "p.json")
        doc = load_plan(tmp_path / "p.json")
        assert doc.plan == plan
        assert doc.scenario_ref == scenario_digest(s)
        assert doc.cost.total == 37_400
        raw = json.loads((tmp_path / "p.json").read_text())
        assert list(raw) == ["schema_version", "scenario_ref", "assignments", "virtualized", "cost"]

    def test_bad_mode(self, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(json.dumps({
            "schema_version": 1, "scenario_ref": None,
            "assignments": [{"task": 0, "node": 0, "mode": "XX"}],
            "virtualized": [], "cost": {"c_ps_nj": 0, "c_vs_nj": 0, "total_nj": 0}}))
        with pytest.raises(FormatError, match=r"assignments\[0\]\.mode"):
            load_plan(path)


def test_digest_tracks_content():
    s = generate(PRESETS["s1"])
    assert scenario_digest(s) == scenario_digest(generate(PRESETS["s1"]))
    assert scenario_digest(s) != scenario_digest(replace(s, seed=1))
