import numpy as np
import pytest

from pipemap import (
    BicriteriaQuery,
    CampaignPlatform,
    PlatformGenSpec,
    generate_platform,
    run_campaign,
)
from pipemap.workbench import (
    WorkbenchError,
    generator_provenance,
    read_campaign_csv,
    read_sweep_csv,
    run_sweep_report,
    seeded_platforms,
    thread_count,
    write_campaign_csv,
    write_generated_platform,
    write_sweep_csv,
)


class TestGenerator:
    def test_deterministic(self):
        gen = PlatformGenSpec(seed=42, p=5)
        a = generate_platform(gen)
        b = generate_platform(gen)
        assert np.array_equal(a.s, b.s)
        assert np.array_equal(a.b, b.b)

    def test_ranges_respected(self):
        gen = PlatformGenSpec(
            seed=1, p=6, speed_range=(10.0, 20.0), bandwidth_range=(1.0, 2.0)
        )
        platform = generate_platform(gen)
        assert np.all((platform.s >= 10.0) & (platform.s <= 20.0))
        off_diag = platform.b[~np.eye(8, dtype=bool)]
        assert np.all((off_diag >= 1.0) & (off_diag <= 2.0))
        assert np.all(np.diag(platform.b) == 0.0)

    def test_degenerate_range_is_constant(self):
        gen = PlatformGenSpec(seed=9, p=3, speed_range=(5.0, 5.0))
        platform = generate_platform(gen)
        assert np.all(platform.s == 5.0)

    def test_invalid_ranges_rejected(self):
        with pytest.raises(ValueError):
            PlatformGenSpec(seed=1, p=2, speed_range=(0.0, 10.0))
        with pytest.raises(ValueError):
            PlatformGenSpec(seed=1, p=2, speed_range=(10.0, 5.0))
        with pytest.raises(ValueError):
            PlatformGenSpec(seed=1, p=0)

    def test_different_seeds_differ(self):
        a = generate_platform(PlatformGenSpec(seed=1, p=4))
        b = generate_platform(PlatformGenSpec(seed=2, p=4))
        assert not np.array_equal(a.s, b.s)

    def test_provenance_block(self):
        gen = PlatformGenSpec(seed=7, p=3, speed_range=(10.0, 30.0))
        block = generator_provenance(gen)
        assert block["seed"] == 7
        assert block["p"] == 3
        assert block["speed_range"] == [10.0, 30.0]

    def test_write_embeds_provenance(self, tmp_path):
        import json

        from pipemap.files import read_platform

        gen = PlatformGenSpec(seed=5, p=3)
        path = tmp_path / "gen.json"
        written = write_generated_platform(gen, str(path))
        raw = json.loads(path.read_text())
        assert raw["generator"]["seed"] == 5
        loaded = read_platform(str(path))
        assert np.array_equal(loaded.b, written.b)

    def test_seeded_platform_labels(self):
        batch = seeded_platforms([3, 8], p=4)
        assert [cp.label for cp in batch] == ["seed3", "seed8"]
        assert [cp.seed for cp in batch] == [3, 8]
        assert all(cp.platform.p == 4 for cp in batch)


class TestSweepReport:
    def test_tiny_step_curve(self, tiny_spec, tiny_platform):
        report = run_sweep_report(
            tiny_spec,
            tiny_platform,
            BicriteriaQuery.minimize_latency(),
            [5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0],
        )
        assert report.objective == "latency"
        assert [row.feasible for row in report.rows] == [
            False,
            False,
            True,
            True,
            True,
            True,
            True,
        ]
        assert report.plateau_values() == [11.0, 10.0, 8.0]
        assert report.edges == (6.0, 7.0, 8.0)

    def test_unsorted_thresholds_rejected(self, tiny_spec, tiny_platform):
        with pytest.raises(ValueError, match="ascending"):
            run_sweep_report(
                tiny_spec, tiny_platform, BicriteriaQuery.minimize_latency(), [7.0, 6.0]
            )

    def test_rows_keep_metrics(self, tiny_spec, tiny_platform):
        report = run_sweep_report(
            tiny_spec, tiny_platform, BicriteriaQuery.minimize_latency(), [7.0]
        )
        row = report.rows[0]
        assert row.objective == row.latency == 10.0
        assert row.period == 7.0
        assert row.mapping == "1-2@p1;3-3@p2"


class TestSweepCsv:
    def test_round_trip_bytes(self, tiny_spec, tiny_platform, tmp_path):
        report = run_sweep_report(
            tiny_spec,
            tiny_platform,
            BicriteriaQuery.minimize_latency(),
            [5.0, 6.0, 7.0, 8.0],
        )
        first = tmp_path / "sweep1.csv"
        second = tmp_path / "sweep2.csv"
        write_sweep_csv(report, str(first))
        loaded = read_sweep_csv(str(first))
        assert loaded == report
        write_sweep_csv(loaded, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_header_carries_objective(self, tiny_spec, tiny_platform, tmp_path):
        report = run_sweep_report(
            tiny_spec, tiny_platform, BicriteriaQuery.minimize_period(), [10.0]
        )
        path = tmp_path / "sweep.csv"
        write_sweep_csv(report, str(path))
        assert path.read_text().startswith("# sweep objective=period")


def _tiny_campaign_platforms(tiny_platform):
    return [CampaignPlatform(label="tiny", platform=tiny_platform, seed=None)]


class TestCampaign:
    def test_tiny_latency_campaign(self, tiny_spec, tiny_platform):
        result = run_campaign(
            tiny_spec,
            _tiny_campaign_platforms(tiny_platform),
            BicriteriaQuery.minimize_period(10.0),
            ["h5", "h6"],
        )
        assert result.heuristics == ("h5", "h6")
        row = result.rows[0]
        assert row.error is None
        assert row.exact_feasible and row.exact_objective == 7.0
        # on this instance the latency-capped greedy lands exactly on the
        # optimum
        assert row.cells["h5"].feasible
        assert row.cells["h5"].objective == 7.0
        summary = result.summary()
        assert summary["h5"].compared == 1
        assert summary["h5"].matches == 1
        assert summary["h5"].match_rate == 1.0
        assert summary["h5"].mean_rel_excess == 0.0

    def test_tiny_period_campaign(self, tiny_spec, tiny_platform):
        result = run_campaign(
            tiny_spec,
            _tiny_campaign_platforms(tiny_platform),
            BicriteriaQuery.minimize_latency(7.0),
            ["h1", "h2"],
        )
        row = result.rows[0]
        assert row.exact_objective == 10.0
        assert row.cells["h2"].feasible
        assert row.cells["h2"].objective == 10.0
        # h1 overshoots the period goal down to 6 at latency 11
        assert row.cells["h1"].objective == 11.0
        summary = result.summary()
        assert summary["h2"].matches == 1
        assert summary["h1"].matches == 0
        assert summary["h1"].mean_rel_excess == pytest.approx(0.1)

    def test_heuristic_query_mismatch_rejected(self, tiny_spec, tiny_platform):
        with pytest.raises(ValueError, match="fixes the"):
            run_campaign(
                tiny_spec,
                _tiny_campaign_platforms(tiny_platform),
                BicriteriaQuery.minimize_latency(7.0),
                ["h5"],
            )

    def test_error_rows_captured(self, tiny_spec, tiny_platform):
        class Boom:
            label = "boom"
            seed = None

            @property
            def platform(self):
                raise RuntimeError("synthetic failure")

        result = run_campaign(
            tiny_spec,
            [
                CampaignPlatform(label="ok", platform=tiny_platform, seed=None),
                Boom(),
            ],
            BicriteriaQuery.minimize_latency(7.0),
            ["h1"],
        )
        assert result.rows[0].error is None
        assert result.rows[1].error is not None
        assert "synthetic failure" in result.rows[1].error
        # summary still works with an error row present
        assert result.summary()["h1"].compared == 1

    def test_generated_batch_campaign(self):
        from pipemap import jpeg_preset

        spec = jpeg_preset()
        batch = seeded_platforms([1, 2, 3], p=4)
        free_queries = BicriteriaQuery.minimize_latency()
        result = run_campaign(spec, batch, free_queries, ["h1", "h3", "h4"])
        assert len(result.rows) == 3
        for row in result.rows:
            assert row.error is None
            assert row.exact_feasible
            for cell in row.cells.values():
                # never better than the exhaustive optimum
                assert cell.objective >= row.exact_objective - 1e-9

    def test_parallel_equals_serial(self, tiny_spec, monkeypatch):
        batch = seeded_platforms([1, 2, 3, 4], p=3)
        query = BicriteriaQuery.minimize_latency()
        monkeypatch.delenv("PIPEMAP_THREADS", raising=False)
        serial = run_campaign(tiny_spec, batch, query, ["h1", "h2"])
        monkeypatch.setenv("PIPEMAP_THREADS", "4")
        parallel = run_campaign(tiny_spec, batch, query, ["h1", "h2"])
        for a, b in zip(serial.rows, parallel.rows):
            assert a.label == b.label
            assert a.exact_objective == b.exact_objective
            for name in ("h1", "h2"):
                assert a.cells[name].objective == b.cells[name].objective
                assert a.cells[name].feasible == b.cells[name].feasible

    def test_thread_count_parsing(self, monkeypatch):
        monkeypatch.delenv("PIPEMAP_THREADS", raising=False)
        assert thread_count() == 1
        monkeypatch.setenv("PIPEMAP_THREADS", "6")
        assert thread_count() == 6
        monkeypatch.setenv("PIPEMAP_THREADS", "0")
        assert thread_count() == 1
        monkeypatch.setenv("PIPEMAP_THREADS", "soup")
        with pytest.raises(ValueError, match="PIPEMAP_THREADS"):
            thread_count()


class TestCampaignCsv:
    def test_round_trip_bytes(self, tiny_spec, tiny_platform, tmp_path):
        batch = seeded_platforms([1, 2], p=3) + _tiny_campaign_platforms(tiny_platform)
        result = run_campaign(
            tiny_spec, batch, BicriteriaQuery.minimize_latency(), ["h1", "h2"]
        )
        first = tmp_path / "campaign1.csv"
        second = tmp_path / "campaign2.csv"
        write_campaign_csv(result, str(first))
        loaded = read_campaign_csv(str(first))
        assert loaded.query == result.query
        assert loaded.heuristics == result.heuristics
        assert loaded.summary() == result.summary()
        write_campaign_csv(loaded, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_error_rows_survive_round_trip(self, tiny_spec, tiny_platform, tmp_path):
        class Boom:
            label = "boom"
            seed = None

            @property
            def platform(self):
                raise RuntimeError("synthetic failure")

        result = run_campaign(
            tiny_spec,
            [CampaignPlatform(label="ok", platform=tiny_platform, seed=None), Boom()],
            BicriteriaQuery.minimize_latency(7.0),
            ["h1"],
        )
        path = tmp_path / "campaign.csv"
        write_campaign_csv(result, str(path))
        loaded = read_campaign_csv(str(path))
        assert loaded.rows[1].error is not None
        assert "synthetic failure" in loaded.rows[1].error
