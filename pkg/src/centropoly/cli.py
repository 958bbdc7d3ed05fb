"""Command-line front end: analysis, duality, pedal transforms, generation, verification.

Exit codes: 0 success (all checks pass), 1 verification failure, 2 input
validation failure, 3 structural impossibility (no planar dual), 4 instance
generation failure.  All output JSON is byte-deterministic for fixed flags
and seed.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .cyclic import NodeSeq, ToleranceConfig
from .documents import (
    VerificationReport,
    document_to_framed,
    dump_json,
    load_document,
    parse_planar_document,
    parse_polygon_document,
)
from .duality import (
    coplanarity_concurrency_check,
    dual_invariants,
    dual_of_dual,
    dual_pair,
    dual_vertex_edges,
)
from .errors import (
    GenerationFailed,
    GeometryError,
    NotParallel,
    NotPlanarDual,
    SingularNormalization,
    ValidationError,
)
from .generators import (
    GenConfig,
    random_equal_volume_polygon,
    random_framed_polygon,
    random_planar_pair,
    random_radial_instance,
)
from .invariants import (
    FramedPolygon,
    alpha,
    beta,
    curvature_b,
    delta,
    delta_identity_residual,
    flattening_nodes,
    focal_points,
    is_constant_curvature,
    is_equal_volume,
    is_generic,
    is_unimodular,
    lambda_coeff,
    vertex_edges,
)
from .pedal import cylindrical_pedal, dual_planar_parts, is_convex, is_exact, planar_vertices, unpedal

_E3 = np.array([0.0, 0.0, 1.0])


def _edge(values) -> dict:
    return {"indexing": "edge", "values": np.asarray(values).tolist()}


def _node(values) -> dict:
    return {"indexing": "node", "values": np.asarray(values).tolist()}


def cmd_analyze(args, tol: ToleranceConfig) -> int:
    doc = parse_polygon_document(load_document(args.input))
    P = document_to_framed(doc)
    out: dict = {
        "n": P.n,
        "origin": P.origin.tolist(),
        "input_indexing": doc.indexing,
        "alpha": _node(alpha(P).values),
        "beta": _edge(beta(P).values),
        "delta": _edge(delta(P).values),
        "lambda": _node(lambda_coeff(P, tol).values),
        "is_generic": is_generic(P, tol),
        "is_equal_volume": is_equal_volume(P.X, P.origin, tol),
        "is_unimodular": is_unimodular(P, tol),
    }
    try:
        b = curvature_b(P, tol)
        parallel = True
    except NotParallel:
        b = None
        parallel = False
    out["parallel"] = parallel
    out["b"] = _edge(b.values) if parallel else None
    if parallel:
        focal = []
        for fp in focal_points(P, tol):
            if fp.kind == "finite":
                focal.append({"kind": "finite", "position": fp.position.tolist()})
            else:
                focal.append({"kind": "at_infinity", "direction": fp.direction.tolist()})
        out["focal_points"] = {"indexing": "edge", "values": focal}
        constant, witness = is_constant_curvature(P, tol)
        out["is_constant_curvature"] = constant
        out["constant_witness"] = witness.tolist() if witness is not None else None
        try:
            out["vertices"] = vertex_edges(P, tol)
        except GeometryError:
            out["vertices"] = None
    else:
        out["focal_points"] = None
        out["is_constant_curvature"] = False
        out["constant_witness"] = None
        out["vertices"] = None
    out["flattenings"] = flattening_nodes(P, tol) if out["is_generic"] else None
    print(dump_json(out))
    return 0


def cmd_dual(args, tol: ToleranceConfig) -> int:
    doc = parse_polygon_document(load_document(args.input))
    P = document_to_framed(doc)
    D = dual_pair(P, tol)
    rep = dual_invariants(P, D, tol)
    out = {
        "dual": {
            "n": D.source_n,
            "nodes": D.Y.values.tolist(),
            "field": D.V.values.tolist(),
            "origin": [0.0, 0.0, 0.0],
            "indexing": "edge",
        },
        "report": {
            "beta_dual_residual": rep.beta_dual_residual,
            "alpha_dual_residual": rep.alpha_dual_residual,
            "v_parallel_residual": rep.v_parallel_residual,
            "sigma_observed": rep.sign_sigma,
            "sigma_fit_residual": rep.sigma_fit_residual,
        },
    }
    status = 0
    if args.roundtrip:
        back = dual_of_dual(D, tol)
        scale = max(1.0, float(np.max(np.abs(P.X.values))))
        err = float(np.max(np.abs(back.X.values - P.X.values))) / scale
        uscale = max(1.0, float(np.max(np.abs(P.U.values))))
        err = max(err, float(np.max(np.abs(back.U.values - P.U.values))) / uscale)
        out["roundtrip_error"] = err
        if err > tol.tol_residual:
            status = 1
    print(dump_json(out))
    return status


def cmd_pedal(args, tol: ToleranceConfig) -> int:
    raw = load_document(args.input)
    if args.invert:
        doc = parse_polygon_document(raw)
        nodes = NodeSeq(doc.nodes)
        if doc.field is None:
            E = _E3
        else:
            shifted = FramedPolygon(nodes, NodeSeq(doc.field))
            constant, _ = is_constant_curvature(shifted, tol)
            if not constant:
                raise NotPlanarDual(
                    "pair has non-constant curvature, so its dual polygon is not planar"
                )
            b = curvature_b(shifted, tol).values
            E_field = doc.field + float(np.mean(b)) * doc.nodes
            spread = np.max(np.abs(E_field - E_field.mean(axis=0)))
            if spread > tol.tol_residual * max(1.0, float(np.max(np.abs(E_field)))):
                raise NotPlanarDual("no constant transversal field exists for this pair")
            E = E_field.mean(axis=0)
        pp = unpedal(nodes, E, tol)
        out = {"n": pp.n, "x": pp.x.values.tolist(), "u": pp.u.values.tolist()}
        print(dump_json(out))
        return 0
    pp = parse_planar_document(raw)
    result = cylindrical_pedal(pp, tol)
    out = {
        "n": pp.n,
        "nodes": result.Y.values.tolist(),
        "field": np.tile(_E3, (pp.n, 1)).tolist(),
        "origin": [0.0, 0.0, 0.0],
        "indexing": "edge",
    }
    print(dump_json(out))
    return 0


def _parse_range(text: str, what: str) -> tuple[float, float]:
    try:
        lo, hi = text.split("..")
        return float(lo), float(hi)
    except ValueError as exc:
        raise ValidationError(f"{what} must look like lo..hi") from exc


def cmd_generate(args, tol: ToleranceConfig) -> int:
    lam_range = _parse_range(args.lambda_range, "--lambda-range")
    cfg = GenConfig(seed=args.seed, n=args.n, lambda_range=lam_range)
    if args.kind == "planar":
        pp = random_planar_pair(cfg, tol)
        out = {"n": pp.n, "x": pp.x.values.tolist(), "u": pp.u.values.tolist()}
        print(dump_json(out))
        return 0
    if args.kind == "radial":
        inst = random_radial_instance(cfg, tol)
        P = FramedPolygon(inst.X, NodeSeq(np.tile(_E3, (cfg.n, 1))))
    elif args.kind == "framed":
        P = random_framed_polygon(cfg, tol)
    else:  # equal-volume
        X, U = random_equal_volume_polygon(cfg, tol)
        P = FramedPolygon(X, U)
    out = {
        "n": P.n,
        "nodes": P.X.values.tolist(),
        "field": P.U.values.tolist(),
        "origin": P.origin.tolist(),
        "indexing": "node",
    }
    print(dump_json(out))
    return 0


_VERIFY_CHECKS = (
    "flattening_count",
    "flattening_vertex_sets",
    "coplanarity_concurrency",
    "duality_involution",
    "dual_volume_identities",
    "delta_lambda_identity",
    "dual_projection_convex",
    "planar_vertices_match",
    "sigma_constant",
)


def _verify_instance(P: FramedPolygon, inst, tol: ToleranceConfig, sigma_ref: int | None):
    """Run the per-instance check battery; yields (name, ok, residual) triples."""
    results = []
    flats = flattening_nodes(P, tol)
    count = len(flats)
    results.append(("flattening_count", count >= 4 and count % 2 == 0, float(count)))

    D = dual_pair(P, tol)
    verts = dual_vertex_edges(D, tol)
    results.append(("flattening_vertex_sets", flats == verts, float(len(set(flats) ^ set(verts)))))

    rep = coplanarity_concurrency_check(P, tol)
    quiet = not any(rep.coplanar) and not any(rep.concurrent) and all(rep.agreement)
    results.append(("coplanarity_concurrency", quiet, 0.0 if quiet else 1.0))

    back = dual_of_dual(D, tol)
    scale = max(1.0, float(np.max(np.abs(P.X.values))))
    inv_err = float(np.max(np.abs(back.X.values - P.X.values))) / scale
    results.append(("duality_involution", inv_err <= tol.tol_residual, inv_err))

    drep = dual_invariants(P, D, tol)
    vol_err = max(drep.beta_dual_residual, drep.alpha_dual_residual)
    results.append(("dual_volume_identities", vol_err <= tol.tol_residual, vol_err))

    lam_err = delta_identity_residual(P, tol)
    results.append(("delta_lambda_identity", lam_err <= tol.tol_residual, lam_err))

    y, v, _ = dual_planar_parts(inst, tol)
    convex = is_convex(y, tol)
    results.append(("dual_projection_convex", convex, 0.0 if convex else 1.0))

    exact, _ = is_exact(y, v, tol)
    pverts = planar_vertices(y, v, tol) if exact else []
    pmatch = exact and pverts == flats and len(pverts) >= 4
    results.append(("planar_vertices_match", pmatch, float(len(pverts))))

    sigma = drep.sign_sigma
    sig_ok = sigma_ref is None or sigma == sigma_ref
    results.append(("sigma_constant", sig_ok, float(sigma)))
    return results, sigma, count


def cmd_verify(args, tol: ToleranceConfig) -> int:
    lo, hi = _parse_range(args.n_range, "--n-range")
    lo, hi = int(lo), int(hi)
    if lo < 4 or hi < lo:
        raise ValidationError("--n-range needs 4 <= lo <= hi")
    lam_range = _parse_range(args.lambda_range, "--lambda-range")
    started = time.perf_counter()
    passes = 0
    failures: list[dict] = []
    histogram: dict[int, int] = {}
    sigma_ref: int | None = None
    for index in range(args.instances):
        seed = [args.seed, index]
        n = int(np.random.default_rng(seed + [0]).integers(lo, hi + 1))
        cfg = GenConfig(seed=seed + [1], n=n, lambda_range=lam_range)
        inst = random_radial_instance(cfg, tol)
        P = FramedPolygon(inst.X, NodeSeq(np.tile(_E3, (n, 1))))
        try:
            results, sigma, count = _verify_instance(P, inst, tol, sigma_ref)
        except GeometryError as exc:
            failures.extend(
                {"seed": seed, "n": n, "check": name, "residual": None, "error": str(exc)}
                for name in _VERIFY_CHECKS
            )
            continue
        if sigma_ref is None:
            sigma_ref = sigma
        histogram[count] = histogram.get(count, 0) + 1
        for name, ok, residual in results:
            if ok:
                passes += 1
            else:
                failures.append({"seed": seed, "n": n, "check": name, "residual": residual})
    report = VerificationReport(
        instances=args.instances,
        checks_per_instance=len(_VERIFY_CHECKS),
        passes=passes,
        failures=failures,
        flattening_histogram=histogram,
        sigma_observed=sigma_ref,
        elapsed_seconds=time.perf_counter() - started,
    )
    text = dump_json(report.to_json_obj())
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    if sigma_ref is not None and sigma_ref != -1:
        print(f"note: observed dual curvature sign sigma={sigma_ref:+d}", file=sys.stderr)
    return 0 if not failures else 1


def cmd_export(args, tol: ToleranceConfig) -> int:
    doc = parse_polygon_document(load_document(args.input))
    if args.format != "obj":
        raise ValidationError(f"unsupported format {args.format!r}")
    lines = [f"# centropoly polygon n={doc.n}", "o polygon"]
    for row in doc.nodes:
        lines.append("v " + " ".join(format(c, ".17g") for c in row))
    cycle = " ".join(str(i + 1) for i in range(doc.n))
    lines.append(f"l {cycle} 1")
    if args.with_focal:
        P = document_to_framed(doc)
        pts = focal_points(P, tol)
        finite = [fp.position for fp in pts if fp.kind == "finite"]
        skipped = len(pts) - len(finite)
        lines.append("o focal")
        for pos in finite:
            lines.append("v " + " ".join(format(c, ".17g") for c in pos))
        if finite:
            idx = [str(doc.n + 1 + k) for k in range(len(finite))]
            if skipped == 0:
                idx.append(str(doc.n + 1))
            lines.append("l " + " ".join(idx))
        if skipped:
            lines.append(f"# skipped {skipped} focal points at infinity")
            print(f"warning: {skipped} focal points at infinity omitted", file=sys.stderr)
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="centropoly",
        description="Centroaffine analysis, duality, and pedal transforms of closed spatial polygons.",
    )
    parser.add_argument("--tol-sign", type=float, default=1e-9, help="relative dead-band for sign predicates")
    parser.add_argument("--tol-residual", type=float, default=1e-9, help="relative bound for identity checks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="invariants and feature report of a framed polygon document")
    p.add_argument("input", help="polygon document path, or - for stdin")

    p = sub.add_parser("dual", help="dual pair and its identity residuals")
    p.add_argument("input")
    p.add_argument("--roundtrip", action="store_true", help="check that dualizing twice returns the input")

    p = sub.add_parser("pedal", help="affine cylindrical pedal of a planar pair document")
    p.add_argument("input")
    p.add_argument("--invert", action="store_true", help="recover the planar pair from a pedal document")

    p = sub.add_parser("generate", help="write a deterministic random instance document")
    p.add_argument("--kind", choices=("radial", "framed", "equal-volume", "planar"), default="radial")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda-range", default="0.5..2.0")

    p = sub.add_parser("verify", help="run the statistical identity and flattening-count harness")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--n-range", default="5..50")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda-range", default="0.5..2.0")
    p.add_argument("--report", help="also write the JSON report to this path")

    p = sub.add_parser("export", help="write the polygon as an OBJ polyline")
    p.add_argument("input")
    p.add_argument("--format", default="obj")
    p.add_argument("--with-focal", action="store_true", help="append finite focal points as a second object")

    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "dual": cmd_dual,
    "pedal": cmd_pedal,
    "generate": cmd_generate,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = ToleranceConfig(tol_sign=args.tol_sign, tol_residual=args.tol_residual)
        return _COMMANDS[args.command](args, tol)
    except NotPlanarDual as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (GenerationFailed, SingularNormalization) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except (GeometryError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def console_main() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_main()
