"""End-to-end CLI tests: subcommands, file formats, exit codes, figures."""

import itertools

import numpy as np
import pytest

from compevo import harness
from compevo.cli import main
from compevo.imaging import mask_from_text, read_pgm, write_pgm
from synth import random_image


@pytest.fixture
def small_pgm(tmp_path):
    img = random_image(64, 64, seed=20)
    path = tmp_path / "input.pgm"
    path.write_bytes(write_pgm(img))
    return path, img


@pytest.fixture
def flat_pgm(tmp_path):
    img = np.full((64, 64), 128, dtype=np.uint8)
    path = tmp_path / "flat.pgm"
    path.write_bytes(write_pgm(img))
    return path, img


@pytest.fixture
def pinned_clock(monkeypatch):
    ticks = itertools.count()
    monkeypatch.setattr(harness, "_timer", lambda: float(next(ticks)))


def run_corrupt(path, tmp_path, p, seed=0):
    out = tmp_path / f"corr_{p}_{seed}.pgm"
    mask = tmp_path / f"mask_{p}_{seed}.txt"
    code = main(
        [
            "corrupt",
            str(path),
            "--loss-ratio",
            str(p),
            "--seed",
            str(seed),
            "--out",
            str(out),
            "--mask-out",
            str(mask),
        ]
    )
    assert code == 0
    return out, mask


# ---------------------------------------------------------------------------
# corrupt / psnr
# ---------------------------------------------------------------------------


def test_corrupt_zero_ratio_matches_canonical_input(small_pgm, tmp_path, capsys):
    path, img = small_pgm
    out, mask = run_corrupt(path, tmp_path, 0.0)
    assert out.read_bytes() == write_pgm(img)
    assert capsys.readouterr().out.strip() == "inf"
    parsed = mask_from_text(mask.read_text())
    assert not parsed.grid.any()
    assert parsed.block_size == 8


def test_corrupt_is_reproducible(small_pgm, tmp_path):
    path, _ = small_pgm
    a_out, a_mask = run_corrupt(path, tmp_path, 0.5, seed=3)
    b_out = tmp_path / "again.pgm"
    b_mask = tmp_path / "again.txt"
    code = main(
        ["corrupt", str(path), "--loss-ratio", "0.5", "--seed", "3",
         "--out", str(b_out), "--mask-out", str(b_mask)]
    )
    assert code == 0
    assert a_out.read_bytes() == b_out.read_bytes()
    assert a_mask.read_text() == b_mask.read_text()


def test_corrupt_prints_finite_psnr_for_real_loss(small_pgm, tmp_path, capsys):
    path, img = small_pgm
    out, mask = run_corrupt(path, tmp_path, 0.7, seed=1)
    printed = float(capsys.readouterr().out.strip())
    corrupted = read_pgm(out.read_bytes())
    assert printed < 20.0
    lost = mask_from_text(mask.read_text()).pixel_mask()
    assert (corrupted[lost] == 0).all()
    assert (corrupted[~lost] == img[~lost]).all()


def test_psnr_command(small_pgm, tmp_path, capsys):
    path, _ = small_pgm
    code = main(["psnr", str(path), str(path)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "inf"


def test_missing_file_is_runtime_error(tmp_path):
    assert main(["psnr", str(tmp_path / "nope.pgm"), str(tmp_path / "no.pgm")]) == 1


def test_malformed_pgm_is_runtime_error(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n4 4\n70000\n")
    assert main(["psnr", str(bad), str(bad)]) == 1


# ---------------------------------------------------------------------------
# conceal
# ---------------------------------------------------------------------------


def test_conceal_flat_image_reports_inf(flat_pgm, tmp_path, capsys):
    path, img = flat_pgm
    corrupted, mask = run_corrupt(path, tmp_path, 0.5, seed=2)
    capsys.readouterr()
    out = tmp_path / "recon.pgm"
    code = main(
        ["conceal", str(corrupted), "--mask", str(mask), "--original", str(path),
         "--method", "sbrm", "--max-iters", "50", "--out", str(out)]
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == harness.CSV_HEADER
    fields = lines[1].split(",")
    assert fields[2] == "sbrm"
    assert fields[4] == "inf"
    assert (read_pgm(out.read_bytes()) == img).all()


def test_conceal_ce_runs_and_reports(flat_pgm, tmp_path, capsys):
    path, _ = flat_pgm
    corrupted, mask = run_corrupt(path, tmp_path, 0.4, seed=5)
    capsys.readouterr()
    out = tmp_path / "recon_ce.pgm"
    code = main(
        ["conceal", str(corrupted), "--mask", str(mask), "--original", str(path),
         "--method", "ce", "--gens", "4", "--pop", "16", "--max-iters", "50",
         "--out", str(out)]
    )
    assert code == 0
    row = capsys.readouterr().out.strip().splitlines()[1].split(",")
    assert row[2] == "ce"
    assert row[3] == "4"
    assert int(row[5]) > 0


def test_conceal_ce_spends_fewer_evaluations_than_sbrm(small_pgm, tmp_path, capsys):
    path, _ = small_pgm
    corrupted, mask = run_corrupt(path, tmp_path, 0.5, seed=6)
    capsys.readouterr()
    evals = {}
    for method, extra in (("sbrm", []), ("ce", ["--gens", "4", "--pop", "16"])):
        code = main(
            ["conceal", str(corrupted), "--mask", str(mask), "--original", str(path),
             "--method", method, "--out", str(tmp_path / f"r_{method}.pgm")] + extra
        )
        assert code == 0
        row = capsys.readouterr().out.strip().splitlines()[1].split(",")
        evals[method] = int(row[5])
    assert evals["ce"] < evals["sbrm"]


def test_psnr_dimension_mismatch_is_config_error(tmp_path):
    a = tmp_path / "a.pgm"
    b = tmp_path / "b.pgm"
    a.write_bytes(write_pgm(random_image(16, 16, seed=1)))
    b.write_bytes(write_pgm(random_image(16, 24, seed=2)))
    assert main(["psnr", str(a), str(b)]) == 2


def test_conceal_rejects_engine_flags_for_sbrm(flat_pgm, tmp_path, capsys):
    path, _ = flat_pgm
    corrupted, mask = run_corrupt(path, tmp_path, 0.4, seed=5)
    code = main(
        ["conceal", str(corrupted), "--mask", str(mask), "--original", str(path),
         "--method", "sbrm", "--gens", "4", "--out", str(tmp_path / "x.pgm")]
    )
    assert code == 2


def test_conceal_rejects_unknown_method(flat_pgm, tmp_path):
    path, _ = flat_pgm
    corrupted, mask = run_corrupt(path, tmp_path, 0.4, seed=5)
    code = main(
        ["conceal", str(corrupted), "--mask", str(mask), "--original", str(path),
         "--method", "nothing", "--out", str(tmp_path / "x.pgm")]
    )
    assert code == 2


def test_conceal_rejects_mismatched_mask(flat_pgm, small_pgm, tmp_path):
    path, _ = flat_pgm
    corrupted, _ = run_corrupt(path, tmp_path, 0.4, seed=5)
    bad_mask = tmp_path / "bad_mask.txt"
    bad_mask.write_text("2 2 8\n01\n10\n")
    code = main(
        ["conceal", str(corrupted), "--mask", str(bad_mask), "--original", str(path),
         "--method", "sbrm", "--out", str(tmp_path / "x.pgm")]
    )
    assert code == 2


# ---------------------------------------------------------------------------
# sweep / gens-sweep
# ---------------------------------------------------------------------------


def test_sweep_cartesian_product(small_pgm, tmp_path, pinned_clock):
    path, _ = small_pgm
    out = tmp_path / "sweep.csv"
    code = main(
        ["sweep", str(path), "--ratios", "0", "0.3", "0.5", "--seeds", "0", "1",
         "--methods", "sbrm", "ce", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == harness.CSV_HEADER
    assert len(lines) == 1 + 2 * 3 * 2
    # ordered (method, ratio, seed)
    keys = [tuple(line.split(",")[:3]) for line in lines[1:]]
    assert keys[0] == ("0", "0", "sbrm")
    assert keys[1] == ("1", "0", "sbrm")
    assert keys[6] == ("0", "0", "ce")
    # p=0 rows are lossless for both methods
    for line in lines[1:]:
        fields = line.split(",")
        if fields[1] == "0":
            assert fields[4] == "inf"


def test_sweep_is_byte_deterministic(small_pgm, tmp_path, pinned_clock):
    path, _ = small_pgm
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    args = ["sweep", str(path), "--ratios", "0.4", "--seeds", "0", "1",
            "--methods", "sbrm", "ce"]
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_sweep_rejects_bad_ratio(small_pgm, tmp_path):
    path, _ = small_pgm
    code = main(
        ["sweep", str(path), "--ratios", "1.4", "--seeds", "0",
         "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2


def test_gens_sweep_rows_and_order(small_pgm, tmp_path, pinned_clock):
    path, _ = small_pgm
    out = tmp_path / "gens.csv"
    code = main(
        ["gens-sweep", str(path), "--loss-ratio", "0.4", "--gens", "1", "2",
         "--seeds", "0", "1", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 5
    rows = [line.split(",") for line in lines[1:]]
    assert [(r[3], r[0]) for r in rows] == [("1", "0"), ("1", "1"), ("2", "0"), ("2", "1")]
    assert all(r[2] == "ce" for r in rows)


def test_gens_sweep_requires_gens_values(small_pgm, tmp_path):
    path, _ = small_pgm
    code = main(
        ["gens-sweep", str(path), "--loss-ratio", "0.4", "--gens",
         "--seeds", "0", "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2


# ---------------------------------------------------------------------------
# pareto-demo
# ---------------------------------------------------------------------------


def test_pareto_demo_zero_trials_writes_header_only(tmp_path, capsys):
    out = tmp_path / "pareto.csv"
    code = main(["pareto-demo", "--trials", "0", "--out", str(out)])
    assert code == 0
    assert out.read_text() == harness.PARETO_CSV_HEADER + "\n"
    assert capsys.readouterr().out.strip() == "on_front=0/0"


def test_pareto_demo_corner_mostly_on_front(tmp_path, capsys):
    out = tmp_path / "pareto.csv"
    code = main(
        ["pareto-demo", "--problem", "corner", "--trials", "25", "--seed", "0",
         "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 26
    hits = sum(1 for line in lines[1:] if line.endswith(",true"))
    assert hits >= 22
    assert f"on_front={hits}/25" in capsys.readouterr().out


def test_pareto_demo_rejects_unknown_problem(tmp_path):
    code = main(
        ["pareto-demo", "--problem", "mystery", "--trials", "1",
         "--out", str(tmp_path / "x.csv")]
    )
    assert code == 2


def test_pareto_demo_csv_layout(tmp_path):
    out = tmp_path / "pareto.csv"
    main(["pareto-demo", "--trials", "2", "--seed", "7", "--out", str(out)])
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "trial,seed,genome,f1,f2,on_front"
    first = lines[1].split(",")
    assert first[0] == "0" and first[1] == "7"
    assert ";" in first[2]


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------


def test_sweep_plot_written(small_pgm, tmp_path, pinned_clock):
    path, _ = small_pgm
    fig = tmp_path / "sweep.png"
    # ratio 0 exercises the infinite-PSNR row: rendered as a gap, not a crash
    code = main(
        ["sweep", str(path), "--ratios", "0", "0.2", "0.4", "--seeds", "0",
         "--methods", "sbrm", "--out", str(tmp_path / "s.csv"), "--plot", str(fig)]
    )
    assert code == 0
    assert fig.stat().st_size > 0


def test_gens_sweep_plot_written(small_pgm, tmp_path, pinned_clock):
    path, _ = small_pgm
    fig = tmp_path / "gens.png"
    code = main(
        ["gens-sweep", str(path), "--loss-ratio", "0.3", "--gens", "1", "2",
         "--seeds", "0", "--out", str(tmp_path / "g.csv"), "--plot", str(fig)]
    )
    assert code == 0
    assert fig.stat().st_size > 0


def test_pareto_demo_plot_written(tmp_path):
    fig = tmp_path / "pareto.png"
    code = main(
        ["pareto-demo", "--trials", "5", "--out", str(tmp_path / "p.csv"),
         "--plot", str(fig)]
    )
    assert code == 0
    assert fig.stat().st_size > 0
