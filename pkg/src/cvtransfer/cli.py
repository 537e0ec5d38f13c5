"""Command-line front end: one subcommand per experiment kind.

Grids accept ``start:stop:count``, a comma-separated list, or a single
value.  ``--config FILE`` reads a JSON object whose keys are flag names
(with dashes or underscores); flags given on the command line win.

Exit codes: 0 success, 2 parameter error, 3 numeric or truncation error,
4 oracle-check failure.
"""

import argparse
import json
import sys

import numpy as np

from .errors import DomainError, NumericError, ParameterError, SamplingError, TransferError
from .experiments import KINDS, ExperimentSpec, report_text, run
from .gamma_engine import Cutoffs

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC, EXIT_ORACLE = 0, 2, 3, 4

# flag name -> (type, default, help)
FLAGS = {
    "zeta": ("grid", None, "squeezing parameter (grid for scans)"),
    "nbar": ("grid", None, "mean thermal occupation (grid for thermal-surface)"),
    "bigN": ("float", 0.1, "bath occupation for dissipation"),
    "gamma_t": ("grid", None, "dissipation time (grid for dissipation-surface)"),
    "s": ("ints", None, "photons subtracted per mode (list for random-max-scan)"),
    "transmittivity": ("float", None, "use physical subtraction with this beam-splitter transmittivity"),
    "ncut": ("int", None, "Fock cutoff of mode 1"),
    "mcut": ("int", None, "Fock cutoff of mode 2"),
    "kcut": ("int", None, "series cutoff"),
    "tau_points": ("int", 200, "number of tau points on [0, 2 pi]"),
    "seed": ("int", 0, "random seed"),
    "out": ("str", None, "output path prefix (writes PREFIX.csv)"),
    "svg": ("bool", False, "also write PREFIX.svg"),
    "unsigned_sn": ("bool", False, "use the non-negative sqrt(1 - C^2) amplitude"),
    "method": ("str", "series", "coherence evaluation: series or quadrature"),
    "count": ("int", 22, "number of random resources"),
    "tolerance": ("float", 1e-6, "oracle-check tolerance"),
}


def parse_grid(text):
    """``"a:b:n"`` -> linspace, ``"x,y,z"`` -> list, ``"x"`` -> [x]."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, list):
        return [float(v) for v in text]
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return list(np.linspace(float(a), float(b), int(n)))
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse grid {text!r}") from exc


def _parse_ints(text):
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse integer list {text!r}") from exc


def build_parser():
    parser = argparse.ArgumentParser(prog="cvtransfer", description="Entanglement transfer from two-mode resources to qubits.")
    parser.add_argument("kind", choices=KINDS, help="experiment to run")
    parser.add_argument("--config", help="JSON file supplying any flag")
    for name, (kind, _default, helptext) in FLAGS.items():
        flag = "--" + name.replace("_", "-")
        if kind == "bool":
            parser.add_argument(flag, dest=name, action="store_const", const=True, default=None, help=helptext)
        else:
            parser.add_argument(flag, dest=name, default=None, help=helptext)
    return parser


def _merge(args):
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                conf = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(conf, dict):
            raise ParameterError("config must be a JSON object")
        for key, val in conf.items():
            norm = key.replace("-", "_")
            if norm not in FLAGS:
                raise ParameterError(f"unknown config key {key!r}")
            values[norm] = val
    for name in FLAGS:
        val = getattr(args, name)
        if val is not None:
            values[name] = val
    out = {}
    for name, (kind, default, _h) in FLAGS.items():
        val = values.get(name, default)
        if val is None:
            out[name] = None
        elif kind == "grid":
            out[name] = parse_grid(val)
        elif kind == "ints":
            out[name] = _parse_ints(val)
        elif kind == "int":
            try:
                out[name] = int(val)
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"--{name} expects an integer") from exc
        elif kind == "float":
            try:
                out[name] = float(val)
            except (TypeError, ValueError) as exc:
                raise ParameterError(f"--{name} expects a number") from exc
        elif kind == "bool":
            out[name] = bool(val)
        else:
            out[name] = str(val)
    return out


def spec_from_args(kind, opts):
    grids = {k: opts[k] for k in ("zeta", "nbar", "gamma_t") if opts[k] is not None}
    params = {"bigN": opts["bigN"], "method": opts["method"], "count": opts["count"], "tolerance": opts["tolerance"]}
    if opts["s"] is not None:
        if kind == "random-max-scan":
            params["s_values"] = opts["s"]
        else:
            params["s"] = opts["s"][0]
    if opts["transmittivity"] is not None:
        params["transmittivity"] = opts["transmittivity"]
    cuts = [opts["ncut"], opts["mcut"], opts["kcut"]]
    if all(c is None for c in cuts):
        cutoffs = "auto"
    else:
        dflt = Cutoffs()
        cutoffs = Cutoffs(
            dflt.n_c if cuts[0] is None else cuts[0],
            dflt.m_c if cuts[1] is None else cuts[1],
            dflt.k_c if cuts[2] is None else cuts[2],
        )
    return ExperimentSpec(
        kind=kind,
        grids=grids,
        params=params,
        cutoffs=cutoffs,
        tau_points=opts["tau_points"],
        seed=opts["seed"],
        signed=not opts["unsigned_sn"],
        output=opts["out"],
        svg=opts["svg"],
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merge(args)
        spec = spec_from_args(args.kind, opts)
        table = run(spec)
    except (ParameterError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except (NumericError, SamplingError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except TransferError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.kind == "oracle-check":
        for line in report_text(table):
            print(line)
        return EXIT_OK if table.metadata.get("passed") else EXIT_ORACLE
    if spec.output is None:
        sys.stdout.write(table.to_csv())
    else:
        print(f"wrote {spec.output}.csv ({len(table)} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
