import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import write_edge_file
from khopgame import (
    CommunityStructure,
    ExperimentConfig,
    ExperimentResult,
    Graph,
    ValidationError,
    allocate_budgets,
    emit_csv,
    emit_plot,
    run_experiment,
)


def make_config(tmp_path, edges, isolated=(), **kw):
    graph = write_edge_file(tmp_path / "g.txt", edges, isolated)
    defaults = dict(graph=graph, k=1, revenue=(8, 6), p=1.0, theta="const:1",
                    trials=1, estimator="exact", seed=0)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def communities_of(g, assignment):
    return CommunityStructure.from_assignments(assignment, g)


# --- budget allocation -----------------------------------------------------


def comms_from_sizes(sizes):
    ids, assignment = [], {}
    for c, size in enumerate(sizes):
        for i in range(size):
            u = f"c{c}_{i}"
            ids.append(u)
            assignment[u] = f"c{c}"
    g = Graph.build(ids, [])
    return CommunityStructure.from_assignments(assignment, g)


def test_allocation_proportional_example():
    comms = comms_from_sizes((50, 40, 30, 20))
    assert allocate_budgets(comms, 20) == (8, 6, 4, 2)


def test_allocation_single_community_gets_everything():
    comms = comms_from_sizes((7,))
    assert allocate_budgets(comms, 5) == (5,)
    assert allocate_budgets(comms, 0) == (0,)


def test_allocation_rounding_goes_to_larger_first():
    comms = comms_from_sizes((2, 2))
    assert allocate_budgets(comms, 4) == (2, 2)
    assert allocate_budgets(comms, 3) == (2, 1)


def test_allocation_skips_saturated_communities():
    comms = comms_from_sizes((4, 1, 1))
    # floors (2,0,0); community 0 tops out at 4, remainder flows onward
    assert allocate_budgets(comms, 6) == (4, 1, 1)


def test_allocation_range_check():
    comms = comms_from_sizes((3, 2))
    with pytest.raises(ValidationError, match="infeasible"):
        allocate_budgets(comms, 6)
    with pytest.raises(ValidationError):
        allocate_budgets(comms, -1)


@settings(max_examples=60, deadline=None)
@given(
    sizes=st.lists(st.integers(1, 9), min_size=1, max_size=5),
    frac=st.floats(0.0, 1.0),
)
def test_allocation_properties(sizes, frac):
    comms = comms_from_sizes(tuple(sizes))
    total = int(round(frac * comms.n))
    parts = allocate_budgets(comms, total)
    assert sum(parts) == total
    assert all(0 <= b <= s for b, s in zip(parts, comms.sizes))
    # never below the proportional floor
    assert all(b >= s * total // comms.n for b, s in zip(parts, comms.sizes))


# --- experiment runs -----------------------------------------------------------


def test_two_disjoint_edges_mean_28(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("c", "d")], policies=("greedy",), budgets=(2,), trials=3)
    result = run_experiment(cfg)
    cell = result.cell("greedy", 2)
    assert cell.mean_revenue == 28.0 and cell.stddev == 0.0 and cell.trials == 3


def test_single_isolated_node(tmp_path):
    cfg = make_config(tmp_path, [], isolated=("solo",), policies=("greedy",), budgets=(1,))
    result = run_experiment(cfg)
    cell = result.cell("greedy", 1)
    assert cell.mean_revenue == 8.0 and cell.stddev == 0.0


def test_default_sweep_is_clipped_to_n(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f")],
                      policies=("maxdegree",))
    result = run_experiment(cfg)
    assert sorted(c.budget for c in result.cells) == [5]
    tiny = make_config(tmp_path, [("a", "b")], policies=("maxdegree",))
    assert [c.budget for c in run_experiment(tiny).cells] == [2]


def test_unknown_policy_and_bad_budget(tmp_path):
    with pytest.raises(ValidationError, match="unknown policy"):
        make_config(tmp_path, [("a", "b")], policies=("degree",))
    cfg = make_config(tmp_path, [("a", "b")], budgets=(5,))
    with pytest.raises(ValidationError, match="out of range"):
        run_experiment(cfg)
    with pytest.raises(ValidationError, match="trials"):
        make_config(tmp_path, [("a", "b")], trials=0)


def test_cells_cover_policy_budget_grid(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")],
                      policies=("greedy", "random"), budgets=(1, 3), trials=2,
                      theta="uniform", p=0.5, seed=5)
    result = run_experiment(cfg)
    assert {(c.policy, c.budget) for c in result.cells} == {
        ("greedy", 1), ("greedy", 3), ("random", 1), ("random", 3)
    }
    assert result.runtime_seconds > 0
    with pytest.raises(KeyError):
        result.cell("greedy", 2)


def test_repeat_run_is_identical(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
                      policies=("greedy", "random"), budgets=(2,), trials=4,
                      theta="uniform", p=0.5, estimator="mc:150", seed=9)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.cells == b.cells


def test_trial_streams_do_not_bleed_across_cells(tmp_path):
    # dropping a policy must not change the cells of the remaining one
    base = dict(budgets=(1, 2), trials=3, theta="uniform", p=0.5, seed=21)
    both = make_config(tmp_path, [("a", "b"), ("b", "c")], policies=("greedy", "random"), **base)
    only = make_config(tmp_path, [("a", "b"), ("b", "c")], policies=("greedy",), **base)
    full = run_experiment(both)
    alone = run_experiment(only)
    for b in (1, 2):
        assert full.cell("greedy", b) == alone.cell("greedy", b)


def test_greedy_mean_grows_with_budget(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("a", "e")],
                      policies=("greedy",), budgets=(1, 2, 3, 4, 5), trials=12,
                      theta="uniform", p=0.5, seed=3)
    result = run_experiment(cfg)
    means = [result.cell("greedy", b).mean_revenue for b in (1, 2, 3, 4, 5)]
    assert means == sorted(means)


def test_community_experiment_respects_allocation(tmp_path):
    graph = write_edge_file(tmp_path / "g.txt", [("a", "b"), ("c", "d"), ("b", "c")])
    comm_file = tmp_path / "comm.txt"
    comm_file.write_text("a left\nb left\nc right\nd right\n")
    cfg = ExperimentConfig(graph=graph, communities=str(comm_file), k=1, revenue=(8, 6),
                           p=1.0, theta="const:1", budgets=(2,), policies=("greedy",),
                           trials=2, estimator="exact", seed=0)
    result = run_experiment(cfg)
    assert result.cell("greedy", 2).trials == 2
    # split (1,1): b recruits a and c (20), then c upgrades and pulls in d (+8)
    assert result.cell("greedy", 2).mean_revenue == 28.0
    assert result.cell("greedy", 2).stddev == 0.0


def test_resample_theta_mode(tmp_path):
    fixed = make_config(tmp_path, [("a", "b"), ("b", "c")], theta="uniform", p=0.5,
                        policies=("random",), budgets=(2,), trials=6, seed=2)
    vary = make_config(tmp_path, [("a", "b"), ("b", "c")], theta="uniform", p=0.5,
                       policies=("random",), budgets=(2,), trials=6, seed=2,
                       resample_theta=True)
    assert run_experiment(fixed).cells != run_experiment(vary).cells
    bad = make_config(tmp_path, [("a", "b")], theta="const:1", resample_theta=True)
    with pytest.raises(ValidationError, match="uniform"):
        run_experiment(bad)


# --- output files -----------------------------------------------------------------


def empty_result():
    return ExperimentResult(cells=(), runtime_seconds=0.0)


def test_emit_csv(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("c", "d")], policies=("greedy",), budgets=(2,), trials=3)
    out = tmp_path / "results.csv"
    emit_csv(run_experiment(cfg), out)
    lines = out.read_text().splitlines()
    assert lines[0] == "policy,budget,mean_revenue,stddev,trials"
    assert lines[1] == "greedy,2,28.0000,0.0000,3"
    assert len(lines) == 2


def test_emit_csv_empty_is_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    emit_csv(empty_result(), out)
    assert out.read_text() == "policy,budget,mean_revenue,stddev,trials\n"


def test_emit_plot_writes_svg(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("c", "d")], policies=("greedy", "maxdegree"),
                      budgets=(1, 2), trials=2)
    out = tmp_path / "plot.svg"
    emit_plot(run_experiment(cfg), out)
    text = out.read_text()
    assert text.lstrip().startswith("<?xml")
    assert "<svg" in text and "</svg>" in text


def test_emit_plot_empty_result(tmp_path):
    out = tmp_path / "empty.svg"
    emit_plot(empty_result(), out)
    assert "<svg" in out.read_text()


def test_emitted_files_are_byte_deterministic(tmp_path):
    cfg = make_config(tmp_path, [("a", "b"), ("b", "c")], policies=("greedy", "random"),
                      budgets=(1, 2), trials=3, theta="uniform", p=0.5, seed=4)
    blobs = []
    for tag in ("one", "two"):
        result = run_experiment(cfg)
        csv_p, svg_p = tmp_path / f"{tag}.csv", tmp_path / f"{tag}.svg"
        emit_csv(result, csv_p)
        emit_plot(result, svg_p)
        blobs.append((csv_p.read_bytes(), svg_p.read_bytes()))
    assert blobs[0] == blobs[1]
