"""Result files: fit summaries, parameter tables, information and SE layouts.

SE layout text format: ``d`` rows of ``d`` whitespace separated entries.
First-parameter values sit below the diagonal at ``(k, i)``, second-parameter
values (Student-t df) at the transposed cell ``(i, k)``; cells without a
parameter are written as ``-``.
"""
# Standard library imports
import json
import os

# Third-party imports
import numpy as np
import pandas as pd

# Local imports
from constants import HUMAN_DIGITS, MACHINE_FLOAT_FORMAT
from src.errors import ParseError
from src.vine_spec import write_spec

MISSING = ("-", "NA", "nan", "NaN")


def _machine(value):
    return MACHINE_FLOAT_FORMAT % value


def _human(value):
    return f"{value:.{HUMAN_DIGITS}f}"


def format_layout(matrix, machine=True):
    fmt = _machine if machine else _human
    lines = []
    for row in np.asarray(matrix, dtype=float):
        lines.append(" ".join("-" if np.isnan(v) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_layout(text, source="<string>"):
    """Inverse of :func:`format_layout`; ``#`` starts a comment."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        row = []
        for col, token in enumerate(line.split(), start=1):
            if token in MISSING:
                row.append(np.nan)
                continue
            try:
                row.append(float(token))
            except ValueError:
                raise ParseError(f"non-numeric entry {token!r} in {source}", line=lineno, column=col)
        rows.append((lineno, row))
    d = len(rows)
    for lineno, row in rows:
        if len(row) != d:
            raise ParseError(f"expected {d} entries in {source}, found {len(row)}", line=lineno)
    return np.array([row for _, row in rows], dtype=float).reshape(d, d)


def read_layout(path):
    with open(path, "r", encoding="utf-8") as f:
        return parse_layout(f.read(), source=str(path))


def write_layout(matrix, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(format_layout(matrix))


def fit_summary(result):
    """JSON-ready dict of a :class:`~src.inference.FitResult`."""
    return {
        "method": result.method,
        "loglik": result.loglik,
        "n_obs": result.n_obs,
        "n_par": result.n_par,
        "aic": result.aic,
        "bic": result.bic,
        "converged": result.converged,
        "iterations": result.iterations,
        "evaluations": result.evaluations,
        "elapsed_seconds": result.elapsed,
        "message": result.message,
        "boundary": [str(p) for p in result.boundary],
        "hessian_asymmetry": result.asymmetry,
        "labels": list(result.spec.labels),
        "permutation": list(result.spec.permutation),
    }


def write_fit(result, out_dir):
    """Fitted spec, parameter table, SE layout and JSON summary under ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "spec": os.path.join(out_dir, "fitted.spec"),
        "params": os.path.join(out_dir, "params.csv"),
        "se": os.path.join(out_dir, "se.txt"),
        "summary": os.path.join(out_dir, "summary.json"),
    }
    write_spec(result.spec, paths["spec"])
    result.param_table().to_csv(paths["params"], index=False, float_format=MACHINE_FLOAT_FORMAT)
    write_layout(result.se, paths["se"])
    with open(paths["summary"], "w", encoding="utf-8") as f:
        json.dump(fit_summary(result), f, indent=2)
    return paths


def print_fit(result):
    print(f"method: {result.method}  loglik: {_human(result.loglik)}  "
          f"AIC: {_human(result.aic)}  BIC: {_human(result.bic)}")
    print(f"converged: {result.converged}  iterations: {result.iterations}  "
          f"evaluations: {result.evaluations}")
    table = result.param_table()
    if table.empty:
        print("(no parameters)")
        return
    with pd.option_context("display.width", 160, "display.max_rows", None):
        print(table.to_string(index=False, float_format=_human))


def write_information(spec, moments, se_mle, se_seq, out_dir):
    """Information, K, J and both ASE layouts; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "information": os.path.join(out_dir, "information.txt"),
        "K": os.path.join(out_dir, "K.txt"),
        "J": os.path.join(out_dir, "J.txt"),
        "ase_mle": os.path.join(out_dir, "ase_mle.txt"),
        "ase_seq": os.path.join(out_dir, "ase_seq.txt"),
        "summary": os.path.join(out_dir, "information.json"),
    }
    write_layout(moments.info, paths["information"])
    write_layout(moments.K, paths["K"])
    write_layout(moments.J, paths["J"])
    write_layout(se_mle, paths["ase_mle"])
    write_layout(se_seq, paths["ase_seq"])
    with open(paths["summary"], "w", encoding="utf-8") as f:
        json.dump({
            "method": moments.method,
            "n_eval": moments.n_eval,
            "mass": moments.mass,
            "max_error": float(np.max(moments.error)) if moments.error.size else 0.0,
            "params": [str(p) for p in spec.param_index()],
        }, f, indent=2)
    return paths


def write_table(frame, path):
    frame.to_csv(path, index=False, float_format=MACHINE_FLOAT_FORMAT)
