"""End-to-end drives of every subcommand through main(), on a tiny corpus."""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fourier_contours import polygon_iou
from fourier_contours.cli import main
from fourier_contours.geometry import Contour
from fourier_contours.synth import rect14, ribbon


def _rect_record(image_id, instances):
    return json.dumps(
        {
            "image_id": image_id,
            "width": 160,
            "height": 120,
            "instances": instances,
        }
    )


def _inst(points, iid, ignore=False):
    flat = [float(v) for xy in points for v in xy]
    return {"id": iid, "points": flat, "ignore": ignore}


RECT_A = [[10, 10], [70, 10], [70, 40], [10, 40]]
RECT_B = [[90, 60], [150, 60], [150, 100], [90, 100]]
RECT_IGN = [[20, 70], [60, 70], [60, 100], [20, 100]]


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "ann.jsonl"
    path.write_text(
        _rect_record("img-a", [_inst(RECT_A, "t0"), _inst(RECT_IGN, "dc", True)])
        + "\n"
        + _rect_record("img-b", [_inst(RECT_B, "t0")])
        + "\n",
        encoding="utf-8",
    )
    return path


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestEmbedReconstruct:
    def test_embed_stdout(self, corpus, capsys):
        code, out, err = run(["embed", str(corpus)], capsys)
        assert code == 0 and err == ""
        records = [json.loads(line) for line in out.splitlines()]
        assert [(r["image_id"], r["instance_id"]) for r in records] == [
            ("img-a", "t0"),
            ("img-a", "dc"),
            ("img-b", "t0"),
        ]
        assert all(len(r["coeffs"]) == 22 and r["k"] == 5 for r in records)
        assert records[1]["ignore"] is True and records[0]["ignore"] is False

    def test_round_trip_recovers_shape(self, corpus, tmp_path, capsys):
        sig_path = tmp_path / "sigs.jsonl"
        code, _, _ = run(["embed", str(corpus), "-o", str(sig_path)], capsys)
        assert code == 0
        code, out, _ = run(["reconstruct", str(sig_path)], capsys)
        assert code == 0
        rec = json.loads(out.splitlines()[0])
        pts = np.array(rec["points"]).reshape(-1, 2)
        assert pts.shape == (50, 2)
        iou = polygon_iou(Contour(np.array(RECT_A, float)), Contour(pts), 4)
        assert iou > 0.85

    def test_reconstruct_rejects_garbage(self, tmp_path, capsys):
        bad = tmp_path / "sigs.jsonl"
        bad.write_text('{"image_id": "x"}\n', encoding="utf-8")
        code, _, err = run(["reconstruct", str(bad)], capsys)
        assert code == 2 and "line 1" in err

    def test_missing_input_is_exit_2(self, tmp_path, capsys):
        code, _, err = run(["embed", str(tmp_path / "absent.jsonl")], capsys)
        assert code == 2 and err != ""


class TestFidelity:
    def test_csv_shape(self, corpus, capsys):
        code, out, _ = run(["fidelity", str(corpus), "--degrees", "5,3,3"], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# config: k=5 n=400 ")
        assert lines[1] == "k,mean_iou,median_iou,mean_l2"
        rows = [line.split(",") for line in lines[2:]]
        assert [r[0] for r in rows] == ["3", "5"]  # sorted, deduplicated
        ious = [float(r[1]) for r in rows]
        assert 0.0 < ious[0] <= ious[1] <= 1.0
        errs = [float(r[3]) for r in rows]
        assert errs[1] <= errs[0]

    def test_default_degree_is_config_k(self, corpus, capsys):
        code, out, _ = run(["--set", "k=4", "fidelity", str(corpus)], capsys)
        assert code == 0
        assert out.splitlines()[2].split(",")[0] == "4"

    def test_svg_dir(self, corpus, tmp_path, capsys):
        svg_dir = tmp_path / "overlays"
        code, _, _ = run(
            ["fidelity", str(corpus), "--degrees", "5", "--svg-dir", str(svg_dir)],
            capsys,
        )
        assert code == 0
        names = sorted(p.name for p in svg_dir.iterdir())
        # ignored instances are excluded from the sweep
        assert names == ["img-a_t0_k5.svg", "img-b_t0_k5.svg"]
        body = (svg_dir / names[0]).read_text(encoding="utf-8")
        assert "#00a000" in body and "#d00000" in body

    def test_degree_errors(self, corpus, capsys):
        code, _, _ = run(["fidelity", str(corpus), "--degrees", "0"], capsys)
        assert code == 3
        code, _, _ = run(["fidelity", str(corpus), "--degrees", "cat"], capsys)
        assert code == 2
        code, _, _ = run(["fidelity", str(corpus), "--degrees", "300"], capsys)
        assert code == 3  # 2*300+1 > n=400


class TestTargetsDecodeLossEval:
    @pytest.fixture
    def target_dir(self, corpus, tmp_path, capsys):
        out = tmp_path / "gt"
        code, _, err = run(["targets", str(corpus), "--out-dir", str(out)], capsys)
        assert code == 0 and err == ""
        return out

    def test_targets_layout(self, target_dir):
        assert sorted(p.name for p in target_dir.iterdir()) == ["img-a", "img-b"]
        files = sorted(p.name for p in (target_dir / "img-a").iterdir())
        expected = ["meta.json"] + sorted(
            f"{lv}_{kind}.fct"
            for lv in ("P3", "P4", "P5")
            for kind in ("tr", "tcr", "reg", "weight", "care")
        )
        assert files == sorted(expected)
        meta = json.loads((target_dir / "img-a" / "meta.json").read_text())
        assert meta["image_id"] == "img-a"
        assert meta["k"] == 5 and meta["n"] == 400
        p3 = next(e for e in meta["levels"] if e["name"] == "P3")
        assert (p3["height"], p3["width"]) == (15, 20)  # ceil(120/8), ceil(160/8)
        assert meta["skipped"] == []

    def test_decode_ideal_predictions(self, corpus, target_dir, tmp_path, capsys):
        det_path = tmp_path / "dets.jsonl"
        code, _, _ = run(
            ["decode", "--maps-dir", str(target_dir), "-o", str(det_path)], capsys
        )
        assert code == 0
        dets = [json.loads(l) for l in det_path.read_text().splitlines()]
        assert {d["image_id"] for d in dets} == {"img-a", "img-b"}
        assert all(d["score"] == 1.0 for d in dets)
        by_img = {d["image_id"]: d for d in dets}
        pts = np.array(by_img["img-a"]["points"]).reshape(-1, 2)
        iou = polygon_iou(Contour(np.array(RECT_A, float)), Contour(pts), 4)
        assert iou > 0.8

        code, out, _ = run(
            [
                "eval",
                "--detections",
                str(det_path),
                "--annotations",
                str(corpus),
            ],
            capsys,
        )
        assert code == 0
        report = json.loads(out)
        assert report["hmean"] == 1.0 and report["fp"] == 0 and report["fn"] == 0
        assert report["tp"] == 2  # the ignored box never counts
        assert {pi["image_id"] for pi in report["per_image"]} == {"img-a", "img-b"}

    def test_eval_csv(self, corpus, target_dir, tmp_path, capsys):
        det_path = tmp_path / "dets.jsonl"
        run(["decode", "--maps-dir", str(target_dir), "-o", str(det_path)], capsys)
        csv_path = tmp_path / "summary.csv"
        code, _, _ = run(
            [
                "eval",
                "--detections",
                str(det_path),
                "--annotations",
                str(corpus),
                "--csv",
                str(csv_path),
            ],
            capsys,
        )
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("# config: ")
        assert lines[1] == "precision,recall,hmean,tp,fp,fn"
        assert lines[2] == "1,1,1,2,0,0"

    def test_loss_of_ideal_predictions(self, target_dir, capsys):
        code, out, _ = run(
            ["loss", "--gt-dir", str(target_dir), "--pred-dir", str(target_dir)],
            capsys,
        )
        assert code == 0
        report = json.loads(out)
        assert report["l_reg"] == 0.0
        # clamped log(1 - eps) floor, never exactly zero
        assert 0.0 < report["l_tr"] < 1e-6 and 0.0 < report["l_tcr"] < 1e-6
        assert report["lambda"] == 1.0
        assert report["total"] == pytest.approx(
            report["l_tr"] + report["l_tcr"] + report["l_reg"]
        )
        assert report["pixels"]["regression"] > 0
        assert report["config"]["k"] == 5

    def test_loss_shape_mismatch(self, corpus, target_dir, tmp_path, capsys):
        other = tmp_path / "gt2"
        code, _, _ = run(
            ["--set", "k=3", "targets", str(corpus), "--out-dir", str(other)], capsys
        )
        assert code == 0
        code, _, err = run(
            ["loss", "--gt-dir", str(target_dir), "--pred-dir", str(other)], capsys
        )
        assert code == 2 and "match" in err

    def test_decode_missing_dir(self, tmp_path, capsys):
        code, _, _ = run(["decode", "--maps-dir", str(tmp_path / "nope")], capsys)
        assert code == 2


class TestSubsetPlot:
    def test_subset_drops_rectangles(self, tmp_path, capsys):
        rib = ribbon(300, 200, 360, 36, 110, points_per_edge=7)
        rect = rect14(20, 20, 120, 40)
        path = tmp_path / "ann.jsonl"
        path.write_text(
            json.dumps(
                {
                    "image_id": "mix",
                    "width": 640,
                    "height": 420,
                    "instances": [
                        {"id": "flat", "points": rect.vertices.ravel().tolist()},
                        {"id": "bent", "points": rib.vertices.ravel().tolist()},
                    ],
                }
            )
            + "\n",
            encoding="utf-8",
        )
        code, out, _ = run(["subset", str(path)], capsys)
        assert code == 0
        records = [json.loads(l) for l in out.splitlines()]
        assert len(records) == 1
        assert [i["id"] for i in records[0]["instances"]] == ["bent"]

    def test_subset_can_empty(self, tmp_path, capsys):
        # 4-point rectangles have large removal deltas; the 14-point form is
        # the removal-stable one, so an all-rect14 corpus selects nothing
        path = tmp_path / "ann.jsonl"
        flat = rect14(20, 20, 120, 40).vertices.ravel().tolist()
        path.write_text(
            json.dumps(
                {
                    "image_id": "x",
                    "width": 160,
                    "height": 120,
                    "instances": [{"id": "t0", "points": flat}],
                }
            )
            + "\n",
            encoding="utf-8",
        )
        code, out, _ = run(["subset", str(path)], capsys)
        assert code == 0 and out == ""

    def test_plot_annotations_only(self, corpus, tmp_path, capsys):
        out_dir = tmp_path / "plots"
        code, _, _ = run(
            ["plot", str(corpus), "--out-dir", str(out_dir)], capsys
        )
        assert code == 0
        assert sorted(p.name for p in out_dir.iterdir()) == [
            "img-a.svg",
            "img-b.svg",
        ]
        body = (out_dir / "img-a.svg").read_text(encoding="utf-8")
        # one green outline per visible instance, red fits for each by default
        assert body.count("#00a000") == 1
        assert body.count("#d00000") == 1

    def test_plot_with_detections(self, corpus, tmp_path, capsys):
        gt = tmp_path / "gt"
        run(["targets", str(corpus), "--out-dir", str(gt)], capsys)
        det_path = tmp_path / "dets.jsonl"
        run(["decode", "--maps-dir", str(gt), "-o", str(det_path)], capsys)
        out_dir = tmp_path / "plots"
        code, _, _ = run(
            [
                "plot",
                str(corpus),
                "--detections",
                str(det_path),
                "--out-dir",
                str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        body = (out_dir / "img-b.svg").read_text(encoding="utf-8")
        assert body.count("#d00000") == 1


class TestGlobalBehavior:
    def test_bad_override_is_exit_3(self, corpus, capsys):
        code, _, err = run(["--set", "k=zero", "embed", str(corpus)], capsys)
        assert code == 3 and "config error" in err
        code, _, _ = run(["--set", "mystery=1", "embed", str(corpus)], capsys)
        assert code == 3

    def test_bad_jobs_is_exit_3(self, corpus, capsys):
        code, _, _ = run(["--jobs", "0", "embed", str(corpus)], capsys)
        assert code == 3

    def test_config_file_plus_override(self, corpus, tmp_path, capsys):
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("k = 3\n")
        code, out, _ = run(
            ["--config", str(cfg), "--set", "n_prime=20", "embed", str(corpus)],
            capsys,
        )
        assert code == 0
        rec = json.loads(out.splitlines()[0])
        assert rec["k"] == 3 and len(rec["coeffs"]) == 14

    def test_clamp_warning_on_stderr(self, tmp_path, capsys):
        path = tmp_path / "ann.jsonl"
        path.write_text(
            _rect_record("x", [_inst([[0, 0], [300, 0], [300, 50], [0, 50]], "t0")])
            + "\n",
            encoding="utf-8",
        )
        code, out, err = run(["embed", str(path)], capsys)
        assert code == 0
        assert "clamped" in err and "warning" in err
        assert out.count("\n") == 1

    def test_colliding_image_ids(self, tmp_path, capsys):
        path = tmp_path / "ann.jsonl"
        path.write_text(
            _rect_record("a/b", [_inst(RECT_A, "t0")])
            + "\n"
            + _rect_record("a_b", [_inst(RECT_B, "t0")])
            + "\n",
            encoding="utf-8",
        )
        code, _, err = run(
            ["targets", str(path), "--out-dir", str(tmp_path / "gt")], capsys
        )
        assert code == 2 and "collide" in err

    def test_jobs_do_not_change_output(self, corpus, tmp_path, capsys):
        outs = []
        for jobs in ("1", "3"):
            code, out, _ = run(["--jobs", jobs, "embed", str(corpus)], capsys)
            assert code == 0
            outs.append(out)
        assert outs[0] == outs[1]

    def test_repeat_runs_byte_identical(self, corpus, tmp_path, capsys):
        a, b = (
            run(["fidelity", str(corpus), "--degrees", "3,5"], capsys)[1]
            for _ in range(2)
        )
        assert a == b

    def test_console_script_help(self):
        proc = subprocess.run(
            [sys.executable, "-m", "fourier_contours.cli", "--help"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "embed" in proc.stdout and "decode" in proc.stdout
