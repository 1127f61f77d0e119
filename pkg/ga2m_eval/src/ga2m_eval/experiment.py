"""End-to-end study: sample a classifier, train, and score the fit.

All data comes from the ``ptfc`` command line tool through files: the
ground-truth polynomial as JSON and the training rows as CSV.  Nothing
here imports the producing package, so the two sides can evolve
independently as long as the published schemas hold.

For each requested sample size the run performs a cross-validated fit
(held-out agreement with the sampled labels plus exact whole-domain
accuracy per fold model) and one fit on the full sample that yields the
reported whole-domain accuracy, the affine-only accuracy with every pair
weight dropped, and the structural overlap with the ground truth.
Artifacts land in the output directory: ``results.csv``, ``overlap.png``,
``tables.md``, the truth polynomial, and one learned polynomial per size.
"""

from __future__ import annotations

import csv
import io
import shutil
import subprocess
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from . import bnc_io, ptf_io
from .errors import InputError
from .model import LearnedAdditiveModel
from .overlap import term_overlap
from .training import fit

SAMPLE_SEED_STRIDE = 1_000_003


def _run_cli(cli: str, args: Sequence[str]) -> None:
    exe = shutil.which(cli)
    if exe is None:
        raise EnvironmentError(
            f"command {cli!r} not found on PATH; install the classifier "
            "compiler package that provides it"
        )
    proc = subprocess.run(
        [exe, *args], capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise InputError(
            f"{cli} {' '.join(args)} failed with exit {proc.returncode}: "
            f"{proc.stderr.strip() or proc.stdout.strip()}"
        )


def load_rows(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a sample CSV with header x1..xn,c into (X, y)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise InputError("sample CSV is empty")
    header = lines[0].split(",")
    if len(header) < 2 or header[-1] != "c":
        raise InputError("sample CSV must end with a 'c' label column")
    for i, name in enumerate(header[:-1]):
        if name != f"x{i + 1}":
            raise InputError(f"unexpected column {name!r} at position {i}")
    n = len(header) - 1
    if len(lines) == 1:
        raise InputError("sample CSV holds no rows")
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",", dtype=np.int64)
    data = data.reshape(-1, n + 1)
    if not np.isin(data, (0, 1)).all():
        raise InputError("sample CSV must be 0/1 throughout")
    return data[:, :n].astype(np.float64), data[:, n].astype(np.int64)


def _fold_slices(rows: int, folds: int) -> List[np.ndarray]:
    if not 2 <= folds <= rows:
        raise InputError(f"fold count {folds} out of range for {rows} rows")
    return [idx for idx in np.array_split(np.arange(rows), folds)]


def _model_terms(model: LearnedAdditiveModel) -> ptf_io.Terms:
    return model.extract_polynomial()


def run_experiment(
    bnc_path,
    sizes: Sequence[int] = (400, 800, 1200, 1600, 2000),
    folds: int = 5,
    interactions: int = 12,
    seed: int = 1,
    out_dir="ga2m_out",
    backend: str = "hgb",
    cli: str = "ptfc",
) -> List[Dict]:
    """Run the full study and return one result row per sample size."""
    if not sizes or any(s < folds for s in sizes):
        raise InputError("every sample size must be at least the fold count")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    bnc_path = Path(bnc_path)
    if not bnc_path.is_file():
        raise InputError(f"classifier file {bnc_path} not found")

    gt_path = out / "ground_truth_ptf.json"
    _run_cli(cli, ["ptf", "--bnc", str(bnc_path), "--out", str(gt_path)])
    n, truth_terms = ptf_io.load_ptf_json(gt_path)

    doc = bnc_io.load_bnc(bnc_path)
    if doc["n"] != n:
        raise InputError("classifier and polynomial disagree on the feature count")
    jp0, jp1 = bnc_io.joint_arrays(doc)
    grid = bnc_io.all_assignments(n)
    top_line = bnc_io.top_line_accuracy(jp0, jp1)
    truth_dec = (ptf_io.evaluate_terms(n, truth_terms, grid) >= 0).astype(np.int8)
    truth_acc = bnc_io.whole_domain_accuracy(truth_dec, jp0, jp1)
    affine_truth_terms = {s: c for s, c in truth_terms.items() if len(s) <= 1}
    truth_affine_dec = (
        ptf_io.evaluate_terms(n, affine_truth_terms, grid) >= 0
    ).astype(np.int8)
    truth_affine_acc = bnc_io.whole_domain_accuracy(truth_affine_dec, jp0, jp1)

    rows_out: List[Dict] = []
    largest_model: LearnedAdditiveModel | None = None
    for size in sizes:
        sample_seed = seed * SAMPLE_SEED_STRIDE + size
        csv_path = out / f"rows_{size}.csv"
        _run_cli(
            cli,
            [
                "sample",
                "--bnc",
                str(bnc_path),
                "--count",
                str(size),
                "--seed",
                str(sample_seed),
                "--out",
                str(csv_path),
            ],
        )
        X, y = load_rows(csv_path)
        if X.shape != (size, n):
            raise InputError(f"expected {size} rows of {n} features in {csv_path}")

        heldout = []
        fold_domain = []
        for test_idx in _fold_slices(size, folds):
            mask = np.ones(size, dtype=bool)
            mask[test_idx] = False
            fold_model = fit(
                X[mask], y[mask], interactions=interactions, seed=seed, backend=backend
            )
            pred = fold_model.decide(X[test_idx])
            heldout.append(float((pred == y[test_idx]).mean()))
            fold_domain.append(
                bnc_io.whole_domain_accuracy(fold_model.decide(grid), jp0, jp1)
            )

        model = fit(X, y, interactions=interactions, seed=seed, backend=backend)
        largest_model = model if size == max(sizes) else largest_model
        learned_terms = _model_terms(model)
        ptf_io.write_ptf_json(out / f"learned_ptf_{size}.json", n, learned_terms)

        whole = bnc_io.whole_domain_accuracy(model.decide(grid), jp0, jp1)
        affine = bnc_io.whole_domain_accuracy(
            (model.affine_logit(grid) >= 0).astype(np.int8), jp0, jp1
        )
        rows_out.append(
            {
                "size": size,
                "sample_seed": sample_seed,
                "folds": folds,
                "backend": backend,
                "interactions": len(model.pairs),
                "cv_heldout_accuracy": float(np.mean(heldout)),
                "cv_whole_domain_mean": float(np.mean(fold_domain)),
                "whole_domain_accuracy": whole,
                "affine_only_accuracy": affine,
                "truth_accuracy": truth_acc,
                "truth_affine_accuracy": truth_affine_acc,
                "top_line_accuracy": top_line,
                "overlap": term_overlap(truth_terms, learned_terms),
            }
        )

    _write_results(out / "results.csv", rows_out)
    _plot(out / "overlap.png", rows_out)
    assert largest_model is not None
    _write_tables(out / "tables.md", n, truth_terms, largest_model, rows_out)
    return rows_out


def _write_results(path: Path, rows: List[Dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def _plot(path: Path, rows: List[Dict]) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    sizes = [r["size"] for r in rows]
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax0.plot(sizes, [r["cv_heldout_accuracy"] for r in rows], "o-", label="held out")
    ax0.plot(
        sizes, [r["whole_domain_accuracy"] for r in rows], "s-", label="whole domain"
    )
    ax0.axhline(rows[0]["top_line_accuracy"], ls="--", c="gray", label="classifier")
    ax0.axhline(
        rows[0]["truth_affine_accuracy"], ls=":", c="gray", label="affine truth"
    )
    ax0.set_xlabel("sample size")
    ax0.set_ylabel("accuracy")
    ax0.legend(fontsize=8)
    ax1.plot(sizes, [r["overlap"] for r in rows], "o-", c="tab:red")
    ax1.set_xlabel("sample size")
    ax1.set_ylabel("interaction overlap")
    ax1.set_ylim(-0.02, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _normalise(terms: ptf_io.Terms) -> Dict:
    unit = abs(terms.get(frozenset((0,)), 0.0))
    if unit == 0.0:
        return {}
    return {s: c / unit for s, c in terms.items()}


def _write_tables(
    path: Path,
    n: int,
    truth: ptf_io.Terms,
    model: LearnedAdditiveModel,
    rows: List[Dict],
) -> None:
    learned = model.extract_polynomial()
    tn = _normalise(truth)
    ln = _normalise(learned)

    def cell(terms_n: Dict, sup: frozenset) -> str:
        return f"{terms_n[sup]:+.2f}" if sup in terms_n else "."

    lines = [
        "# Fit summary",
        "",
        f"Largest sample: {rows[-1]['size']} rows, backend {rows[-1]['backend']},",
        f"{rows[-1]['interactions']} interaction pairs.",
        "",
        "Coefficients below are scaled so the first singleton has magnitude 1",
        "in each column; '.' marks an absent term.",
        "",
        "## Singleton terms",
        "",
        "| variable | truth | learned |",
        "|---|---|---|",
    ]
    for i in range(n):
        sup = frozenset((i,))
        lines.append(f"| x{i + 1} | {cell(tn, sup)} | {cell(ln, sup)} |")
    lines += [
        "",
        "## Pair terms",
        "",
        "| pair | truth | learned |",
        "|---|---|---|",
    ]
    pair_sups = sorted(
        {s for s in truth if len(s) == 2} | {s for s in learned if len(s) == 2},
        key=lambda s: sorted(s),
    )
    for sup in pair_sups:
        a, b = sorted(sup)
        lines.append(f"| x{a + 1} x{b + 1} | {cell(tn, sup)} | {cell(ln, sup)} |")
    lines += [
        "",
        "## Accuracy by sample size",
        "",
        "| size | held out | whole domain | affine only | overlap |",
        "|---|---|---|---|---|",
    ]
    for r in rows:
        lines.append(
            f"| {r['size']} | {r['cv_heldout_accuracy']:.4f} "
            f"| {r['whole_domain_accuracy']:.4f} "
            f"| {r['affine_only_accuracy']:.4f} | {r['overlap']:.2f} |"
        )
    lines += [
        "",
        f"Classifier accuracy {rows[0]['top_line_accuracy']:.4f}, "
        f"truth polynomial {rows[0]['truth_accuracy']:.4f}, "
        f"affine truth {rows[0]['truth_affine_accuracy']:.4f}.",
        "",
    ]
    path.write_text("\n".join(lines), encoding="utf-8")
