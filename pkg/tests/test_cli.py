import csv
import io
import json

import pytest

from supportsim.cli import CSV_COLUMNS, ConfigError, ExperimentConfig, main, parse_graph_spec, run_experiment, rows_to_csv
from supportsim.graphcore import generate, write_edge_list


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


COLLAPSE = {
    "experiment_id": "collapse64",
    "graph": {"family": "cycle", "n": 64},
    "algorithm": {"key": "lcl.collapse"},
    "mode": "supported",
    "preprocessor": None,
    "repetitions": 3,
    "seed": 5,
}


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestRun:
    def test_collapse_rows(self, tmp_path, capsys):
        assert main(["run", "--config", write_config(tmp_path, COLLAPSE), "--strict"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == ",".join(CSV_COLUMNS)
        rows = read_rows(out)
        assert len(rows) == 3
        assert {r["accepted"] for r in rows} == {"true"}
        assert len({r["rounds"] for r in rows}) == 1
        assert [int(r["seed"]) for r in rows] == [5, 6, 7]

    def test_outputs_to_directory(self, tmp_path):
        out = tmp_path / "res"
        assert main(["run", "--config", write_config(tmp_path, COLLAPSE), "--out", str(out)]) == 0
        summary = json.loads((out / "collapse64.summary.json").read_text())
        assert summary["repetitions"] == 3 and summary["accepted"] == 3
        assert summary["rounds"]["min"] == summary["rounds"]["max"]
        assert (out / "collapse64.csv").read_text().startswith("experiment_id,")

    def test_byte_identical_reruns(self, tmp_path, capsys):
        cfg = dict(COLLAPSE, experiment_id="mis", algorithm={"key": "mis.random_priority"},
                   graph={"family": "random_regular", "n": 40, "d": 3}, input={"delete_fraction": 0.3})
        path = write_config(tmp_path, cfg)
        texts = []
        for jobs in ("1", "1", "2"):
            main(["run", "--config", path, "--jobs", jobs])
            texts.append(capsys.readouterr().out)
        assert texts[0] == texts[1] == texts[2]

    def test_cluster_mis_quality_and_rounds(self, tmp_path, capsys):
        cfg = {
            "experiment_id": "cmis",
            "graph": {"family": "random_regular", "n": 64, "d": 3},
            "algorithm": {"key": "mis.cluster_optimal", "eps": 0.5},
            "input": {"delete_fraction": 0.3},
            "repetitions": 3,
            "seed": 1,
        }
        assert main(["run", "--config", write_config(tmp_path, cfg), "--strict"]) == 0
        rows = read_rows(capsys.readouterr().out)
        assert all(r["quality"].isdigit() and int(r["quality"]) > 0 for r in rows)
        assert all(int(r["rounds"]) <= 2 * 6 + 4 for r in rows)

    def test_seed_override_changes_rows(self, tmp_path, capsys):
        path = write_config(tmp_path, dict(COLLAPSE, repetitions=1))
        main(["run", "--config", path, "--seed", "42"])
        assert read_rows(capsys.readouterr().out)[0]["seed"] == "42"

    def test_protocol_violation_row(self, tmp_path, capsys):
        cfg = dict(COLLAPSE, experiment_id="probe", algorithm={"key": "probe.support_broadcast"},
                   mode="passive", input={"delete_fraction": 0.5}, repetitions=1)
        path = write_config(tmp_path, cfg)
        assert main(["run", "--config", path]) == 0
        row = read_rows(capsys.readouterr().out)[0]
        assert row["quality"] == "protocol_violation" and row["accepted"] == "false" and row["rounds"] == ""
        assert main(["run", "--config", path, "--strict"]) == 1
        capsys.readouterr()
        assert main(["run", "--config", path, "--mode", "supported"]) == 0
        assert read_rows(capsys.readouterr().out)[0]["accepted"] == "true"

    @pytest.mark.parametrize(
        "patch",
        [
            {"algorithm": {"key": "nope"}},
            {"mode": "quantum"},
            {"preprocessor": {"key": "oracle"}},
            {"colour": 3},
            {"repetitions": 0},
            {"graph": {"family": "cycle", "size": 4}},
        ],
    )
    def test_config_errors_exit_2(self, tmp_path, capsys, patch):
        assert main(["run", "--config", write_config(tmp_path, dict(COLLAPSE, **patch))]) == 2
        assert "error" in capsys.readouterr().err

    def test_local_mode_rejects_deletion(self):
        cfg = ExperimentConfig.from_dict(dict(COLLAPSE, mode="local", input={"delete_fraction": 0.5}))
        with pytest.raises(ConfigError):
            run_experiment(cfg)

    def test_config_list(self, tmp_path, capsys):
        data = [dict(COLLAPSE, repetitions=1), dict(COLLAPSE, experiment_id="b", repetitions=1, mode="passive")]
        out = tmp_path / "o"
        assert main(["run", "--config", write_config(tmp_path, data), "--out", str(out)]) == 0
        assert sorted(p.name for p in out.iterdir()) == ["b.csv", "b.summary.json", "collapse64.csv", "collapse64.summary.json"]

    def test_rows_to_csv_booleans(self):
        row = dict(zip(CSV_COLUMNS, ["x", 3, "local", "a", 1, "2", True, 0]))
        assert rows_to_csv([row]).splitlines()[1] == "x,3,local,a,1,2,true,0"


class TestOtherCommands:
    def test_parse_graph_spec(self, tmp_path):
        assert parse_graph_spec("cycle:n=64") == {"family": "cycle", "n": 64}
        assert parse_graph_spec("petersen") == {"family": "petersen"}
        p = tmp_path / "g.edges"
        write_edge_list(generate("path", n=3), p)
        assert parse_graph_spec(str(p)) == {"path": str(p)}

    def test_preprocess_distance_coloring(self, capsys):
        assert main(["preprocess", "cycle:n=12", "--kind", "distance_coloring", "--k", "2"]) == 0
        colors = json.loads(capsys.readouterr().out)
        assert len(colors) == 12
        assert all(colors[str(v)] != colors[str(v % 12 + 1)] for v in range(1, 13))

    @pytest.mark.parametrize("kind", ["ball_clustering", "network_decomposition"])
    def test_preprocess_other(self, capsys, kind):
        assert main(["preprocess", "grid:rows=4,cols=4", "--kind", kind]) == 0
        assert len(json.loads(capsys.readouterr().out)) == 16

    def test_verify_exit_codes(self, tmp_path, capsys):
        good = tmp_path / "good.json"
        bad = tmp_path / "bad.json"
        good.write_text(json.dumps({str(v): 1 + v % 2 for v in range(1, 7)}))
        bad.write_text(json.dumps({str(v): 1 for v in range(1, 7)}))
        assert main(["verify", "cycle:n=6", str(good), "--problem", "coloring"]) == 0
        assert json.loads(capsys.readouterr().out)["accepted"] is True
        assert main(["verify", "cycle:n=6", str(bad), "--problem", "coloring"]) == 1
        assert json.loads(capsys.readouterr().out)["violations"]

    def test_verify_with_mask(self, tmp_path, capsys):
        mask = tmp_path / "m.mask"
        mask.write_text("1 2\n3 4\n")
        labels = tmp_path / "l.json"
        labels.write_text(json.dumps({"1": 1, "2": 0, "3": 1, "4": 0}))
        assert main(["verify", "cycle:n=4", str(labels), "--problem", "mis", "--mask", str(mask)]) == 0

    def test_lowerbound_sinkless(self, tmp_path, capsys):
        assert main(["lowerbound", "sinkless", "--n", "6", "--T", "2", "--out", str(tmp_path)]) == 0
        assert json.loads(capsys.readouterr().out)["accepted"] is True
        assert (tmp_path / "sinkless_n6.G.mask").exists()
        assert main(["lowerbound", "sinkless", "--n", "6", "--T", "3"]) == 2

    def test_lowerbound_double_cover(self, tmp_path, capsys):
        assert main(["lowerbound", "double-cover", "--base", "cycle:n=7", "--cuts", "5", "--out", str(tmp_path)]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["details"]["isomorphism_witnesses_checked"] == 10
        assert (tmp_path / "double_cover.support.edges").exists()

    def test_bench_collapse(self, capsys):
        assert main(["bench", "collapse", "--sizes", "32,64"]) == 0
        rows = read_rows(capsys.readouterr().out)
        assert [r["n"] for r in rows] == ["32", "64"] and rows[0]["rounds"] == rows[1]["rounds"]
