"""qpolar: command-line front end for finite quasimonotone polars."""

import argparse
import csv
import itertools
import json
import logging
import os
import sys
from fractions import Fraction

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from dotenv import load_dotenv

from certify import (
    NotQuasimonotone, bipolar_member_falsify, certify_ae_maximal, certify_maximal,
    certify_premaximal, default_grid, make_grid, replay_certificate,
)
from cones import (
    DD_MAX_DIM, DimensionGuardExceeded, classification_to_json, cone_to_json,
    hcone_extreme_rays, hcone_member, hpolyhedron_to_json, polyhedron_classify,
)
from mvip import ConstraintSet, constraint_set_from_json, constraint_set_to_json, minty_inclusion_witness, minty_solve, minty_solve_polar
from operators import (
    e_polyhedron, graph_from_json, graph_to_json, is_monotone, is_quasimonotone,
    make_pair, polar_fiber, v_set,
)
from scalar_lp import (
    DimensionMismatch, EmptyInput, LPError, ModeMismatch, QpolarError, ScalarError,
    format_scalar, make_field, snap_to_rational,
)
from scenarios import InvalidParams, UnknownScenario, generate_scenario, outcome_to_json, to_jsonable, verify_scenario

logger = logging.getLogger("qpolar")


# --- Exceptions ---

class MalformedInput(QpolarError, ValueError):
    """Raised for unreadable files, bad JSON, or JSON of the wrong shape."""
    pass


# --- Settings ---

class Settings:
    """Resolved configuration: environment first, command-line flags on top."""

    def __init__(self, mode="exact", eps=1e-9, max_denominator=None, log_level="WARNING",
                 plot_resolution=100):
        self.mode = mode
        self.eps = eps
        self.max_denominator = max_denominator
        self.log_level = log_level
        self.plot_resolution = plot_resolution

    @classmethod
    def from_env(cls):
        try:
            max_den = os.getenv("QPOLAR_MAX_DENOMINATOR")
            settings = cls(
                mode=os.getenv("QPOLAR_MODE", "exact"),
                eps=float(os.getenv("QPOLAR_EPS", "1e-9")),
                max_denominator=int(max_den) if max_den else None,
                log_level=os.getenv("QPOLAR_LOG_LEVEL", "WARNING").upper(),
                plot_resolution=int(os.getenv("QPOLAR_PLOT_RESOLUTION", "100")),
            )
            if not isinstance(logging.getLevelName(settings.log_level), int):
                raise ValueError(f"unknown log level {settings.log_level!r}")
            return settings
        except ValueError as e:
            raise MalformedInput(f"bad QPOLAR_* environment setting: {e}")

    def apply_args(self, args):
        if args.mode is not None:
            self.mode = args.mode
        if args.eps is not None:
            self.eps = args.eps
        if args.max_denominator is not None:
            self.max_denominator = args.max_denominator
        if self.max_denominator is not None:
            self.mode = "exact"
        return self

    @property
    def field(self):
        return make_field(self.mode, self.eps)


# --- Input / Output ---

def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise MalformedInput(f"file not found: {path}")
    except json.JSONDecodeError as e:
        raise MalformedInput(f"invalid JSON in {path}: {e}")


def write_json(data, path):
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_json(data))


def dump_json(data):
    return json.dumps(data, indent=2) + "\n"


def _snap(values, settings):
    if settings.max_denominator is None:
        return values
    return [snap_to_rational(v, settings.max_denominator) if isinstance(v, float) else v
            for v in values]


def operator_from_json(data, settings):
    """Decode an operator document, snapping floats when a denominator bound is set."""
    if not isinstance(data, dict) or "pairs" not in data or "dim" not in data:
        raise MalformedInput("operator JSON needs 'dim' and 'pairs'")
    declared = data.get("mode")
    if declared is not None and declared != settings.mode:
        raise ModeMismatch(f"operator file is {declared!r} but the session mode is {settings.mode!r}")
    try:
        pairs = [{"x": _snap(p["x"], settings), "xstar": _snap(p["xstar"], settings)}
                 for p in data["pairs"]]
        return graph_from_json({"dim": data["dim"], "pairs": pairs}, settings.field)
    except QpolarError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedInput(f"malformed pair in operator JSON: {e}")


def load_operator(path, settings):
    return operator_from_json(read_json(path), settings)


def save_operator(T, path):
    write_json(graph_to_json(T), path)


def parse_point(text, field, dim=None):
    """"0.5" or "1,0" or "1/2,3"."""
    try:
        point = tuple(field.coerce(a) for a in text.split(","))
    except ScalarError as e:
        raise MalformedInput(f"bad point {text!r}: {e}")
    if dim is not None and len(point) != dim:
        raise DimensionMismatch(f"point {text!r} has dimension {len(point)}, expected {dim}")
    return point


def parse_range(text, field, dim):
    """"lo:hi:step" as the product grid over dim axes."""
    try:
        lo, hi, step = (Fraction(a) for a in text.split(":"))
    except ValueError:
        raise MalformedInput(f"bad range {text!r}, expected lo:hi:step")
    if step <= 0 or hi < lo:
        raise MalformedInput(f"bad range {text!r}: need lo <= hi and step > 0")
    axis = []
    v = lo
    while v <= hi:
        axis.append(field.coerce(v if field.mode == "exact" else float(v)))
        v += step
    return [tuple(p) for p in itertools.product(axis, repeat=dim)]


def load_grid(spec, T):
    """A grid from a range spec, a JSON file, or None for the default grid."""
    if spec is None:
        return None
    if ":" in spec and not os.path.exists(spec):
        return make_grid(T.dim, parse_range(spec, T.field, T.dim), None, T.field)
    data = read_json(spec)
    try:
        return make_grid(int(data["dim"]), data["base_points"], data.get("probe_covectors"), T.field)
    except QpolarError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise MalformedInput(f"grid JSON needs 'dim' and 'base_points': {e}")


def parse_params(items):
    """key=value pairs; values are JSON when they parse, strings otherwise."""
    params = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidParams(f"expected key=value, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def progress(message):
    print(f"  → {message}", file=sys.stderr)


# --- Command Context ---

class CommandContext:
    """What commands need: the settings and the operator they act on."""

    def __init__(self, settings):
        self.settings = settings
        self.scenario = None

    def operator(self, args):
        if getattr(args, "scenario", None):
            self.scenario = generate_scenario(args.scenario, **parse_params(args.param))
            progress(f"Generating scenario {args.scenario}")
            return self.scenario.graph
        if getattr(args, "operator", None):
            progress(f"Loading {args.operator}")
            return load_operator(args.operator, self.settings)
        raise MalformedInput("give an operator file (--operator) or a scenario (--scenario)")

    def grid(self, args, T):
        grid = load_grid(getattr(args, "grid", None), T)
        if grid is not None:
            return grid
        if self.scenario is not None:
            return self.scenario.grid
        return default_grid(T)


def _add_source(parser):
    parser.add_argument("--operator", help="operator JSON file")
    parser.add_argument("--scenario", help="built-in scenario name")
    parser.add_argument("--param", action="append", help="scenario parameter key=value")


# --- Command Classes ---

class Check:
    """Quasimonotonicity and monotonicity of an operator."""
    name = "check"
    description = "Decide whether the operator is quasimonotone and monotone."

    def add_arguments(self, parser):
        _add_source(parser)

    def execute(self, context, args):
        T = context.operator(args)
        progress(f"Checking {len(T)} pairs")
        qm, mono = is_quasimonotone(T), is_monotone(T)
        return {
            "quasimonotone": qm.holds,
            "quasimonotone_witness": to_jsonable(qm.witness),
            "monotone": mono.holds,
            "monotone_witness": to_jsonable(mono.witness),
        }


class Polar:
    """The polar fibre at a point."""
    name = "polar"
    description = "Compute T^nu(x) as a cone."

    def add_arguments(self, parser):
        _add_source(parser)
        parser.add_argument("--at", required=True, help="base point, e.g. 0.5 or 1,0")

    def execute(self, context, args):
        T = context.operator(args)
        x = parse_point(args.at, T.field, T.dim)
        progress(f"Computing polar fibre at {args.at}")
        fiber = polar_fiber(T, x)
        result = {
            "at": [format_scalar(a) for a in x],
            "v_set": [[format_scalar(a) for a in y] for y in v_set(T, x)],
            "fiber": cone_to_json(fiber),
        }
        if T.dim <= DD_MAX_DIM:
            result["extreme_rays"] = cone_to_json(hcone_extreme_rays(fiber))["generators"]
        return result


class ESet:
    """E_T, the solution set of the global Minty problem."""
    name = "e-set"
    description = "Build E_T and classify it as empty, a singleton or larger."

    def add_arguments(self, parser):
        _add_source(parser)

    def execute(self, context, args):
        T = context.operator(args)
        progress("Classifying E_T")
        E = e_polyhedron(T)
        return {"polyhedron": hpolyhedron_to_json(E),
                "classification": classification_to_json(polyhedron_classify(E))}


class Certify:
    """Maximality certificates on a grid."""
    name = "certify"
    description = "Certify maximal, pre-maximal, AE-maximal or bipolar membership claims."
    certifiers = {
        "maximal": certify_maximal,
        "premaximal": certify_premaximal,
        "ae": certify_ae_maximal,
    }

    def add_arguments(self, parser):
        parser.add_argument("claim", choices=["maximal", "premaximal", "ae", "bipolar"])
        _add_source(parser)
        parser.add_argument("--grid", help="grid JSON file or lo:hi:step")
        parser.add_argument("--pair", help="pair x;xstar for the bipolar claim, e.g. 0;-1")

    def execute(self, context, args):
        T = context.operator(args)
        grid = context.grid(args, T)
        progress(f"Certifying {args.claim} on {len(grid.base_points)} base points")
        if args.claim == "bipolar":
            if not args.pair or ";" not in args.pair:
                raise MalformedInput("the bipolar claim needs --pair x;xstar")
            x, xstar = args.pair.split(";", 1)
            p = make_pair(parse_point(x, T.field, T.dim), parse_point(xstar, T.field, T.dim), T.field)
            cert = bipolar_member_falsify(T, p, grid)
        else:
            cert = self.certifiers[args.claim](T, grid)
        result = cert.to_json()
        result["replayed"] = replay_certificate(T, cert)
        return result


class Mvip:
    """Minty solution sets over a finite K."""
    name = "mvip"
    description = "Solve the Minty problem for T and T^nu over a finite constraint set."

    def add_arguments(self, parser):
        _add_source(parser)
        parser.add_argument("--constraints", help="constraint set JSON file")
        parser.add_argument("--k-grid", help="constraint set as lo:hi:step")
        parser.add_argument("--csv", help="also write the solution table as CSV")

    def execute(self, context, args):
        T = context.operator(args)
        if args.constraints:
            data = read_json(args.constraints)
            try:
                K = constraint_set_from_json(data, T.field)
            except QpolarError:
                raise
            except (KeyError, TypeError, ValueError) as e:
                raise MalformedInput(f"constraint JSON needs 'dim' and 'points': {e}")
        elif args.k_grid:
            K = ConstraintSet(T.dim, parse_range(args.k_grid, T.field, T.dim), T.field)
        elif context.scenario is not None and context.scenario.constraints is not None:
            K = context.scenario.constraints
        else:
            raise MalformedInput("give a constraint set (--constraints or --k-grid)")
        progress(f"Solving over {len(K)} points")
        direct = minty_solve(T, K)
        polar = minty_solve_polar(T, K)
        result = {
            "constraints": constraint_set_to_json(K),
            "minty": to_jsonable(direct),
            "minty_polar": to_jsonable(polar),
            "polar_subset": set(polar) <= set(direct),
            "strict": set(polar) < set(direct),
        }
        found = minty_inclusion_witness(T)
        if found is not None:
            witness_set, point = found
            result["inclusion_witness"] = {"constraints": constraint_set_to_json(witness_set),
                                           "point": to_jsonable(point)}
        if args.csv:
            write_minty_csv(args.csv, K, direct, polar)
            progress(f"Writing {args.csv}")
        return result


class ScenarioCommand:
    """Emit or verify a built-in scenario."""
    name = "scenario"
    description = "Emit a scenario as JSON, or replay its claim table with --verify."

    def add_arguments(self, parser):
        parser.add_argument("name")
        parser.add_argument("--param", action="append", help="scenario parameter key=value")
        parser.add_argument("--verify", action="store_true")

    def execute(self, context, args):
        scenario = generate_scenario(args.name, **parse_params(args.param))
        if not args.verify:
            return {
                "name": scenario.name,
                "params": scenario.params,
                "operator": graph_to_json(scenario.graph),
                "grid": scenario.grid.to_json(),
                "constraints": None if scenario.constraints is None
                else constraint_set_to_json(scenario.constraints),
            }
        progress(f"Verifying {len(scenario.expectations)} claims of {scenario.name}")
        outcomes = verify_scenario(scenario)
        for o in outcomes:
            if not o.ok:
                progress(f"MISMATCH {o.expectation.claim}: expected {o.expectation.expected!r}, got {o.actual!r}")
        return {"name": scenario.name, "ok": all(o.ok for o in outcomes),
                "outcomes": [outcome_to_json(o) for o in outcomes]}


class Plot:
    """Raster of a dim 1 region in the (x, x*) plane."""
    name = "plot"
    description = "Write an SVG raster of T^nu or of the graph, plus a CSV of the samples."

    def add_arguments(self, parser):
        _add_source(parser)
        parser.add_argument("--region", choices=["polar", "graph"], default="polar")
        parser.add_argument("--out", required=True, help="SVG output path")
        parser.add_argument("--csv", help="CSV output path (default: next to the SVG)")
        parser.add_argument("--range", default="-2:2", help="lo:hi for both axes")
        parser.add_argument("--resolution", type=int, help="cells per axis")

    def execute(self, context, args):
        T = context.operator(args)
        if T.dim != 1:
            raise DimensionMismatch(f"plots are drawn for dim 1 operators only, got dim {T.dim}")
        try:
            lo, hi = (float(Fraction(a)) for a in args.range.split(":"))
        except ValueError:
            raise MalformedInput(f"bad range {args.range!r}, expected lo:hi")
        if not lo < hi:
            raise MalformedInput(f"bad range {args.range!r}: need lo < hi")
        resolution = args.resolution or context.settings.plot_resolution
        if resolution < 1:
            raise MalformedInput(f"resolution must be positive, got {resolution}")
        progress(f"Rasterising {args.region} region at {resolution}x{resolution}")
        centres, raster = region_raster(T, args.region, lo, hi, resolution)
        csv_path = args.csv or os.path.splitext(args.out)[0] + ".csv"
        write_raster_csv(csv_path, centres, raster)
        write_raster_svg(args.out, T, raster, lo, hi, args.region)
        progress(f"Writing {args.out} and {csv_path}")
        return {"svg": args.out, "csv": csv_path, "cells": int(raster.size),
                "members": int(raster.sum())}


# --- Plot helpers ---

def region_raster(T, region, lo, hi, resolution):
    """Boolean raster indexed [x cell, x* cell], sampled at cell centres."""
    f = T.field
    centres = lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution
    raster = np.zeros((resolution, resolution), dtype=bool)
    if region == "polar":
        for i, cx in enumerate(centres):
            fiber = polar_fiber(T, (f.coerce(float(cx)),))
            for j, cy in enumerate(centres):
                raster[i, j] = hcone_member(fiber, (f.coerce(float(cy)),))
    else:
        width = (hi - lo) / resolution
        for p in T.pairs:
            i = int((float(p.x[0]) - lo) // width)
            j = int((float(p.xstar[0]) - lo) // width)
            if 0 <= i < resolution and 0 <= j < resolution:
                raster[i, j] = True
    return centres, raster


def write_raster_svg(path, T, raster, lo, hi, region):
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(raster.T, origin="lower", extent=[lo, hi, lo, hi], cmap="Greys",
              vmin=0, vmax=1, interpolation="nearest")
    xs = [float(p.x[0]) for p in T.pairs]
    ys = [float(p.xstar[0]) for p in T.pairs]
    ax.scatter(xs, ys, s=12, c="tab:red", zorder=3)
    ax.set_xlim(lo, hi)
    ax.set_ylim(lo, hi)
    ax.set_xlabel("x")
    ax.set_ylabel("x*")
    ax.set_title("T^nu" if region == "polar" else "graph of T")
    fig.savefig(path, format="svg")
    plt.close(fig)


def write_raster_csv(path, centres, raster):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "xstar", "member"])
        for i, cx in enumerate(centres):
            for j, cy in enumerate(centres):
                writer.writerow([repr(float(cx)), repr(float(cy)), int(raster[i, j])])


def write_minty_csv(path, K, direct, polar):
    direct, polar = set(direct), set(polar)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["point", "minty", "minty_polar"])
        for x in K.points:
            writer.writerow([",".join(str(format_scalar(a)) for a in x), int(x in direct), int(x in polar)])


# --- Command Helpers ---

def get_command(commands, name):
    """Find a command by name, or None if not found."""
    return next((c for c in commands if c.name == name), None)


commands = [Check(), Polar(), ESet(), Certify(), Mvip(), ScenarioCommand(), Plot()]


def build_parser():
    parser = argparse.ArgumentParser(prog="qpolar", description="Finite quasimonotone polars.")
    parser.add_argument("--mode", choices=["exact", "float"])
    parser.add_argument("--eps", type=float)
    parser.add_argument("--max-denominator", type=int)
    sub = parser.add_subparsers(dest="command", required=True)
    for command in commands:
        command.add_arguments(sub.add_parser(command.name, help=command.description))
    return parser


# --- Main ---

def run_cli(argv, out=None):
    """Run one command; returns the process exit code."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    try:
        settings = Settings.from_env().apply_args(args)
        logging.basicConfig(level=settings.log_level, stream=sys.stderr,
                            format="%(levelname)s %(name)s: %(message)s")
        logger.debug("mode=%s eps=%s max_denominator=%s", settings.mode, settings.eps, settings.max_denominator)
        context = CommandContext(settings)
        result = get_command(commands, args.command).execute(context, args)
    except DimensionGuardExceeded as e:
        print(f"Error: {e}", file=sys.stderr)
        return 3
    except NotQuasimonotone as e:
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except (MalformedInput, ScalarError, DimensionMismatch, ModeMismatch, InvalidParams,
            UnknownScenario, LPError, EmptyInput) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    out.write(dump_json(result))
    if result.get("ok") is False:
        return 1
    return 0


def main():
    load_dotenv()
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
