"""Command-line surface: every computation in the library, with
deterministic file and plot-data output.

Exit codes: 0 success, 1 a verification or membership check failed,
2 malformed input, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .algebra import Q2Scalar, format_scalar, parse_scalar
from .certificates import (
    LEVEL_TAGS,
    certificate_to_json,
    load_certificate,
    monomials_of_level,
    nullifier_basis,
    verify_certificate,
    w3_certificate,
)
from .family import (
    chsh_decompose_check,
    expose_check,
    expr_from_slice,
    octagon_vertices,
    tsirelson_expression,
)
from .optimize import (
    SolverError,
    dual_membership,
    face_scan,
    hessian_rmax,
    npa_bound,
    sos_search,
)
from .scenario import (
    QubitParams,
    VECTOR_ORDER,
    behavior_from_qubit,
    behavior_to_json,
    expression_to_json,
    load_behavior,
    load_expression,
    local_bound,
    pair,
    symmetry_orbit_expr,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NO_CONVERGENCE = 3

_QUARTER_CIRCLE_RADIUS = 1.0 / (4.0 * math.sqrt(2.0))


def _print_entry(value) -> None:
    if isinstance(value, Q2Scalar):
        if value.q == 0 and value.p.denominator == 1:
            print(value.p.numerator)
        else:
            print(format_scalar(value))
    else:
        print(repr(float(value)))


def _cmd_local_bound(args) -> int:
    expr = load_expression(args.expr)
    bound, _ = local_bound(expr)
    _print_entry(bound)
    return EXIT_OK


def _cmd_pair(args) -> int:
    expr = load_expression(args.expr)
    beh = load_behavior(args.behavior)
    _print_entry(pair(expr, beh))
    return EXIT_OK


def _cmd_qubit_stats(args) -> int:
    params = QubitParams(args.theta, args.a0, args.a1, args.b0, args.b1)
    beh = behavior_from_qubit(params)
    print(json.dumps(behavior_to_json(beh), indent=2))
    return EXIT_OK


def _parse_coord(text: str, exact: bool):
    if exact:
        return parse_scalar(text)
    return float(text)


def _cmd_slice_expr(args) -> int:
    r0 = _parse_coord(args.r0, args.exact)
    r1 = _parse_coord(args.r1, args.exact)
    expr = expr_from_slice(r0, r1)
    print(json.dumps(expression_to_json(expr), indent=2))
    return EXIT_OK


def _svg_header() -> list[str]:
    return [
        '<svg xmlns="http://www.w3.org/2000/svg" width="1000" height="1000" '
        'viewBox="0 0 1000 1000">'
    ]


def _to_svg_xy(r0: float, r1: float) -> tuple[float, float]:
    # (r0, r1) plane scaled to [-0.35, 0.35]^2, r1 up.
    x = (r0 + 0.35) / 0.7 * 1000.0
    y = (0.35 - r1) / 0.7 * 1000.0
    return x, y


def _octagon_svg_polygon() -> str:
    points = []
    for v0, v1 in octagon_vertices():
        x, y = _to_svg_xy(float(v0), float(v1))
        points.append(f"{x:.3f},{y:.3f}")
    return (
        '<polygon points="' + " ".join(points)
        + '" fill="none" stroke="black" stroke-width="2"/>'
    )


def _svg_circle(radius: float, dashed: bool) -> str:
    cx, cy = _to_svg_xy(0.0, 0.0)
    r = radius / 0.7 * 1000.0
    dash = ' stroke-dasharray="8 8"' if dashed else ""
    return (
        f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r:.3f}" fill="none" '
        f'stroke="black" stroke-width="2"{dash}/>'
    )


def _cmd_octagon(args) -> int:
    vertices = octagon_vertices()
    if args.format == "csv":
        print("k,r0,r1")
        for k, (v0, v1) in enumerate(vertices):
            print(f"{k},{format_scalar(v0)},{format_scalar(v1)}")
    else:
        lines = _svg_header()
        lines.append(_octagon_svg_polygon())
        lines.append("</svg>")
        print("\n".join(lines))
    return EXIT_OK


def _cmd_nullifiers(args) -> int:
    basis = nullifier_basis(monomials_of_level(args.level))
    for poly in basis.polys:
        print(poly)
    return EXIT_OK


def _cmd_verify_w3(args) -> int:
    report = verify_certificate(tsirelson_expression(), w3_certificate())
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_verify_cert(args) -> int:
    cert = load_certificate(args.cert)
    report = verify_certificate(cert.target, cert, float_tol=args.tol)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_sos_search(args) -> int:
    expr = load_expression(args.expr)
    cert = sos_search(expr, args.level, tol=args.tol)
    if cert is None:
        print("no certificate found")
        return EXIT_CHECK_FAILED
    print(json.dumps(certificate_to_json(cert), indent=2))
    return EXIT_OK


def _cmd_npa_bound(args) -> int:
    expr = load_expression(args.expr)
    value = npa_bound(expr, args.level, tol=args.tol)
    print(repr(value))
    return EXIT_OK


def _cmd_hessian_rmax(args) -> int:
    source = {"closed-form": "closed_form", "fd": "finite_difference"}[args.source]
    value = hessian_rmax(
        args.gamma, alpha_grid=args.alpha_grid, tol=args.tol, source=source
    )
    print(repr(value))
    return EXIT_OK


def _scan_csv(report) -> list[str]:
    lines = ["cluster,value," + ",".join(VECTOR_ORDER)]
    for i, cluster in enumerate(report.clusters):
        coords = ",".join(repr(float(x)) for x in cluster.behavior.as_vector())
        lines.append(f"{i},{float(report.best_value)!r},{coords}")
    return lines


def _cmd_face_scan(args) -> int:
    expr = load_expression(args.expr)
    report = face_scan(expr, restarts=args.restarts, seed=args.seed)
    if args.format == "csv":
        print("\n".join(_scan_csv(report)))
    else:
        obj = {
            "best_value": report.best_value,
            "clusters": [
                {
                    "behavior": behavior_to_json(c.behavior),
                    "value": c.value,
                    "classification": c.classification,
                }
                for c in report.clusters
            ],
        }
        print(json.dumps(obj, indent=2))
    return EXIT_OK


def _cmd_chsh_decompose(args) -> int:
    report = chsh_decompose_check()
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_expose_check(args) -> int:
    report = expose_check()
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _cmd_orbit(args) -> int:
    expr = load_expression(args.expr)
    orbit = symmetry_orbit_expr(expr)
    print(json.dumps([expression_to_json(e) for e in orbit], indent=2))
    return EXIT_OK


def _cmd_dual_membership(args) -> int:
    expr = load_expression(args.expr)
    report = dual_membership(expr, tol=args.tol)
    print(report.summary())
    return EXIT_OK if report.verdict != "unknown" else EXIT_CHECK_FAILED


def _cmd_fig_slice_data(args) -> int:
    vertices = octagon_vertices()
    if args.format == "csv":
        print("layer,k,r0,r1")
        for k, (v0, v1) in enumerate(vertices):
            print(f"octagon,{k},{format_scalar(v0)},{format_scalar(v1)}")
        for name, radius in (
            ("circle_half", 0.5),
            ("circle_quarter_sqrt2", _QUARTER_CIRCLE_RADIUS),
        ):
            for k in range(args.samples):
                angle = 2.0 * math.pi * k / args.samples
                print(
                    f"{name},{k},{radius * math.cos(angle)!r},"
                    f"{radius * math.sin(angle)!r}"
                )
    else:
        lines = _svg_header()
        lines.append(_octagon_svg_polygon())
        lines.append(_svg_circle(0.5, dashed=True))
        lines.append(_svg_circle(_QUARTER_CIRCLE_RADIUS, dashed=True))
        lines.append("</svg>")
        print("\n".join(lines))
    return EXIT_OK


def _cmd_proj3d_data(args) -> int:
    axes = args.axes.split(",")
    if len(axes) != 3 or any(a not in VECTOR_ORDER for a in axes):
        print(
            f"--axes must name 3 comma-separated coordinates from "
            f"{','.join(VECTOR_ORDER)}",
            file=sys.stderr,
        )
        return EXIT_BAD_INPUT
    idx = [VECTOR_ORDER.index(a) for a in axes]
    rng = np.random.default_rng(args.seed)
    print("x,y,z")
    for _ in range(args.samples):
        vec = rng.uniform(0.0, 2.0 * math.pi, size=5)
        vec[0] = rng.uniform(0.0, math.pi / 4)
        beh = behavior_from_qubit(QubitParams.from_array(vec)).as_vector()
        print(",".join(repr(float(beh[i])) for i in idx))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdual",
        description="Bell expressions, Tsirelson bounds and certificates "
        "in the (2,2,2) scenario.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("local-bound", help="maximum over deterministic strategies")
    p.add_argument("expr")
    p.set_defaults(func=_cmd_local_bound)

    p = sub.add_parser("pair", help="value of an expression on a behavior")
    p.add_argument("expr")
    p.add_argument("behavior")
    p.set_defaults(func=_cmd_pair)

    p = sub.add_parser("qubit-stats", help="behavior of a qubit realization")
    for flag in ("--theta", "--a0", "--a1", "--b0", "--b1"):
        p.add_argument(flag, type=float, required=True)
    p.set_defaults(func=_cmd_qubit_stats)

    p = sub.add_parser("slice-expr", help="expression from slice coordinates")
    p.add_argument("--r0", required=True)
    p.add_argument("--r1", required=True)
    p.add_argument("--exact", action="store_true")
    p.set_defaults(func=_cmd_slice_expr)

    p = sub.add_parser("octagon", help="vertices of the dual-slice octagon")
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    p.set_defaults(func=_cmd_octagon)

    p = sub.add_parser("nullifiers", help="nullifier basis of a relaxation level")
    p.add_argument("--level", choices=LEVEL_TAGS, required=True)
    p.set_defaults(func=_cmd_nullifiers)

    p = sub.add_parser("verify-w3", help="verify the exact degree-3 certificate")
    p.set_defaults(func=_cmd_verify_w3)

    p = sub.add_parser("verify-cert", help="verify a certificate file")
    p.add_argument("cert")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_verify_cert)

    p = sub.add_parser("sos-search", help="search a Gram certificate numerically")
    p.add_argument("expr")
    p.add_argument("--level", choices=LEVEL_TAGS, required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=_cmd_sos_search)

    p = sub.add_parser("npa-bound", help="moment-relaxation upper bound")
    p.add_argument("expr")
    p.add_argument("--level", choices=LEVEL_TAGS, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_npa_bound)

    p = sub.add_parser("hessian-rmax", help="second-order exclusion radius")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--alpha-grid", type=int, default=256)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--source", choices=("closed-form", "fd"), default="closed-form")
    p.set_defaults(func=_cmd_hessian_rmax)

    p = sub.add_parser("face-scan", help="cluster the maximizers of an expression")
    p.add_argument("expr")
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_face_scan)

    p = sub.add_parser("chsh-decompose", help="check the two-term convex split")
    p.set_defaults(func=_cmd_chsh_decompose)

    p = sub.add_parser("expose-check", help="check the exposing behavior")
    p.set_defaults(func=_cmd_expose_check)

    p = sub.add_parser("orbit", help="symmetry orbit of an expression")
    p.add_argument("expr")
    p.set_defaults(func=_cmd_orbit)

    p = sub.add_parser("dual-membership", help="classify against the dual set")
    p.add_argument("expr")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=_cmd_dual_membership)

    p = sub.add_parser("fig-slice-data", help="layered slice-figure data")
    p.add_argument("--format", choices=("csv", "svg"), default="csv")
    p.add_argument("--samples", type=int, default=64)
    p.set_defaults(func=_cmd_fig_slice_data)

    p = sub.add_parser("proj3d-data", help="scatter of behaviors on chosen axes")
    p.add_argument("--axes", required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_proj3d_data)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
