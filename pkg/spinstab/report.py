# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Report files: a deterministic ``report.json``, a ``timings.json`` sidecar,
plot-ready CSV files and plain-text summary tables.
"""

import csv
import json
import os

from .util import mkdir_p

__all__ = [
    "SCHEMA_VERSION",
    "report_document",
    "dumps",
    "write_report",
    "write_timings",
    "load_report",
    "write_csv",
    "histogram_to_csv",
    "summary_table",
]

SCHEMA_VERSION = 1
REPORT_FILE = "report.json"
TIMINGS_FILE = "timings.json"


def report_document(config_echo, reports, provenance):
    return {
        "schema_version": SCHEMA_VERSION,
        "config_echo": config_echo,
        "reports": [r if isinstance(r, dict) else r.to_dict() for r in reports],
        "provenance": provenance,
    }


def dumps(document):
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def write_report(outdir, document):
    mkdir_p(outdir)
    path = os.path.join(outdir, REPORT_FILE)
    with open(path, "w") as f:
        f.write(dumps(document))
    return path


def write_timings(outdir, timings):
    mkdir_p(outdir)
    path = os.path.join(outdir, TIMINGS_FILE)
    with open(path, "w") as f:
        f.write(dumps(timings))
    return path


def load_report(path):
    if os.path.isdir(path):
        path = os.path.join(path, REPORT_FILE)
    with open(path, "r") as f:
        return json.load(f)


def _rows(d):
    kind = d.get("kind")
    if kind == "scaling":
        header = ["N", d.get("metadata", {}).get("quantity", "value"), "stderr"]
        rows = [[n, v["mean"], v["stderr"]] for n, v in zip(d["n_grid"], d["values"])]
    elif kind == "ultrametricity":
        header = ["epsilon", "violation", "stderr"]
        rows = [[v["epsilon"], v["mean"], v["stderr"]] for v in d["violation"]]
    elif kind == "identity":
        header = ["N", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "residual", "residual_stderr"]
        rows = [
            [
                d["n_sites"],
                d["lhs"]["mean"],
                d["lhs"]["stderr"],
                d["rhs"]["mean"],
                d["rhs"]["stderr"],
                d["residual"],
                d["residual_stderr"],
            ]
        ]
    else:
        header, rows = ["identity", "status"], [[d.get("identity"), d.get("skipped", "")]]
    return header, rows


def write_csv(path, report):
    d = report if isinstance(report, dict) else report.to_dict()
    header, rows = _rows(d)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return path


def histogram_to_csv(hist, path):
    """
    Overlap law as ``support,mass`` rows, or ``c12,c23,c31,mass`` for a
    three-replica histogram.
    """
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        if hist.joint_numerators is not None:
            writer.writerow(["c12", "c23", "c31", "mass"])
            for row, m in zip(hist.joint_numerators, hist.joint_mass):
                writer.writerow([repr(int(k) / hist.denominator) for k in row] + [repr(float(m))])
        else:
            writer.writerow(["support", "mass"])
            for c, m in zip(hist.support, hist.mass):
                writer.writerow([repr(float(c)), repr(float(m))])
    return path


def _status(d):
    if "skipped" in d:
        return "skipped"
    passed = d.get("passed")
    if passed is None:
        return "info"
    return "PASS" if passed else "FAIL"


def _line(d):
    kind = d.get("kind")
    if kind == "scaling":
        first, last = d["values"][0], d["values"][-1]
        fit = d.get("fit", {})
        exponent = fit.get("exponent")
        trend = "exp %.3f" % exponent if exponent is not None else "slope %.3g" % fit.get("slope", 0.0)
        value = "%.4g -> %.4g" % (first["mean"], last["mean"])
        return "N %s" % ",".join(str(n) for n in d["n_grid"]), value, trend
    if kind == "ultrametricity":
        parts = ["V(%g)=%.3g" % (v["epsilon"], v["mean"]) for v in d["violation"]]
        return "N %d" % d["n_sites"], " ".join(parts), "gap %.3g" % d["gap"]["mean"]
    if kind == "check":
        values = ["%s=%.3g" % (k, v) for k, v in sorted(d.items()) if isinstance(v, float)]
        return "", " ".join(values), ""
    if kind == "identity":
        return (
            "N %d" % d["n_sites"],
            "%.4e" % d["residual"],
            "+- %.1e" % d["residual_stderr"],
        )
    return "", "", ""


def summary_table(reports):
    rows = [("identity", "size", "value", "error/trend", "tier", "status")]
    for r in reports:
        d = r if isinstance(r, dict) else r.to_dict()
        size, value, trend = _line(d)
        rows.append((d.get("identity", "?"), size, value, trend, d.get("tier", ""), _status(d)))
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for k, row in enumerate(rows):
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
