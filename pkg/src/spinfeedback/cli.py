"""Command-line front end.

Usage::

    spinfeedback CONFIG.json [--mode MODE] [--seed N] [--shots N] [--out PATH]

Results go to ``--out`` (or the config's ``output_path``), else stdout.
Failures exit nonzero with a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

from . import __version__, experiments
from .config import MODES, RunConfig, load_config
from .errors import SpinFeedbackError


def _fmt(value) -> str:
    # repr round-trips floats exactly.
    return repr(float(value))


def render_csv(cfg: RunConfig, columns, rows, summary=None) -> str:
    buf = io.StringIO()
    buf.write(f"# spinfeedback {__version__} mode={cfg.mode} config_sha256={cfg.config_hash()} seed={cfg.seed}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    if summary:
        buf.write("# summary " + " ".join(f"{k}={_fmt(v)}" for k, v in summary.items()) + "\n")
    return buf.getvalue()


def render_json(cfg: RunConfig, report: dict) -> str:
    payload = dict(report)
    payload["config_sha256"] = cfg.config_hash()
    payload["seed"] = cfg.seed
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def run(cfg: RunConfig) -> str:
    """Execute the configured mode and return the serialized result."""
    if cfg.mode == "calibrate":
        return render_json(cfg, experiments.calibrate(cfg))
    if cfg.mode == "sweep":
        return render_csv(cfg, *experiments.sweep(cfg))
    if cfg.mode == "multicycle":
        return render_csv(cfg, *experiments.multicycle(cfg))
    columns, rows, summary = experiments.exact(cfg)
    return render_csv(cfg, columns, rows, summary)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinfeedback", description=__doc__.split("\n\n")[0])
    p.add_argument("config", help="JSON config file")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--shots", type=int, dest="n_shots")
    p.add_argument("--resamples", type=int, dest="n_resamples")
    p.add_argument("--out", dest="output_path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    try:
        cfg = load_config(args.config, overrides)
        text = run(cfg)
        if cfg.output_path:
            Path(cfg.output_path).write_text(text)
        else:
            sys.stdout.write(text)
    except SpinFeedbackError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        field = getattr(exc, "field", None)
        if field is not None:
            err["field"] = field
        sys.stderr.write(json.dumps(err) + "\n")
        return 2
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "OSError", "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
