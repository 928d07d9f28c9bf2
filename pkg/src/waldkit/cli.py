"""Command-line front end.

Subcommands::

    wald analyze    classification (S, alpha, alpha_bar, Gbar) as JSON
    wald eval       finite-sample statistic {W, rcond} at an estimate
    wald simulate   sample the limit law; writes <out>.bin + <out>.json
    wald bounds     scaled chi-square bound tables (JSON or CSV)
    wald adaptive   data-driven branch decision from (theta_hat, V_hat)
    wald reproduce  re-derive the benchmark numbers and report pass/fail

Every output embeds the tool version, the resolved configuration, the seed
(where randomness is involved) and the SHA-256 of the input system, so a
result can always be traced back to its inputs.  Identical configuration
and seed give byte-identical outputs.

Exit codes: 0 success; 2 parse error; 3 precondition violation; 4 numeric
failure; 10 divergence detected (an informative status, not a failure:
the method reports that the statistic has no finite limit).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__, chisq, gallery
from .adaptive import BRANCH_DIVERGENT, AdaptiveConfig, adaptive_analyze
from .cldr import DEFICIENT_RANK, analysis_to_json, analyze_at
from .errors import (
    DivergentLawError,
    ParseError,
    RankDeficiencyError,
    RedrawLimitError,
    SingularAtPoint,
    SubmatrixBudgetError,
    WaldkitError,
)
from .limitlaw import (
    Diverges,
    EmpiricalLaw,
    LimitLawConfig,
    finite_T_reference,
    ks_distance,
    sample_limit_law,
    save_law,
)
from .polymatrix import jacobian, poly_det
from .restrictions import load_system
from .waldstat import WaldInput, wald_statistic

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_NUMERIC = 4
EXIT_DIVERGES = 10

QUANTILE_LEVELS = (0.5, 0.9, 0.95, 0.99)


def _emit(payload: dict, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _parse_rational_vector(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(tok.strip()) for tok in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad vector {text!r}: {exc}", 1, 1) from None


def _parse_float_vector(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(Fraction(tok.strip())) for tok in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad vector {text!r}: {exc}", 1, 1) from None


def _parse_float_matrix(text: str) -> np.ndarray:
    rows = [_parse_float_vector(row) for row in text.split(";")]
    if any(len(row) != len(rows[0]) for row in rows):
        raise ParseError(f"ragged matrix {text!r}", 1, 1)
    return np.array(rows, dtype=np.float64)


def _base_payload(args, system=None) -> dict:
    config = {
        key: value
        for key, value in sorted(vars(args).items())
        if key != "func" and value is not None
    }
    payload = {"version": __version__, "config": config}
    if system is not None:
        payload["input_sha256"] = system.content_hash()
    return payload


def _load(args):
    system = load_system(args.system)
    if args.theta_bar is not None:
        theta = _parse_rational_vector(args.theta_bar)
    else:
        theta = system.theta_bar
    return system, theta


def cmd_analyze(args) -> int:
    system, theta = _load(args)
    _, analysis = analyze_at(system, theta)
    payload = _base_payload(args, system)
    payload["analysis"] = analysis_to_json(analysis)
    _emit(payload)
    return EXIT_DIVERGES if analysis.classification == DEFICIENT_RANK else EXIT_OK


def cmd_eval(args) -> int:
    system = load_system(args.system)
    if args.params:
        with open(args.params, "r", encoding="utf-8") as handle:
            params = json.load(handle)
        theta_hat = params["theta_hat"]
        v_hat = np.asarray(params["V_hat"], dtype=np.float64)
        T = float(params["T"])
    else:
        if not (args.theta_hat and args.vhat and args.T):
            raise ParseError(
                "eval needs --params or all of --theta-hat/--vhat/--T", 1, 1
            )
        theta_hat = _parse_float_vector(args.theta_hat)
        v_hat = _parse_float_matrix(args.vhat)
        T = args.T
    result = wald_statistic(system, WaldInput.from_T(theta_hat, v_hat, T))
    payload = _base_payload(args, system)
    payload["W"] = result.statistic
    payload["rcond"] = result.rcond
    _emit(payload)
    return EXIT_OK


def cmd_simulate(args) -> int:
    system, theta = _load(args)
    shifted, analysis = analyze_at(system, theta)
    v = _parse_float_matrix(args.vhat) if args.vhat else np.eye(system.p)
    cfg = LimitLawConfig(V=v, draws=args.N, seed=args.seed)
    law = sample_limit_law(shifted, analysis, cfg)
    payload = _base_payload(args, system)
    payload["seed"] = args.seed
    if isinstance(law, Diverges):
        payload["status"] = "diverges"
        payload["metadata"] = law.metadata
        _emit(payload)
        return EXIT_DIVERGES
    bin_path, json_path = save_law(law, args.out)
    payload["status"] = "ok"
    payload["law_files"] = [bin_path, json_path]
    payload["quantiles"] = {
        str(level): law.quantile(level) for level in QUANTILE_LEVELS
    }
    payload["metadata"] = law.metadata
    _emit(payload)
    return EXIT_OK


def cmd_bounds(args) -> int:
    payload = _base_payload(args)
    if args.table:
        rows = chisq.reference_max_p_table()
    else:
        if args.q is None or args.alpha is None:
            raise ParseError("bounds needs --table or both --q and --alpha", 1, 1)
        rows = [
            {
                "q": args.q,
                "alpha": args.alpha,
                "level": args.level,
                "max_p": chisq.conservative_max_p(args.q, args.alpha, args.level),
            }
        ]
    if args.format == "csv":
        lines = ["q,alpha,level,max_p"]
        lines += [f"{r['q']},{r['alpha']},{r['level']},{r['max_p']}" for r in rows]
        sys.stdout.write("\n".join(lines) + "\n")
    else:
        payload["table"] = rows
        _emit(payload)
    return EXIT_OK


def cmd_adaptive(args) -> int:
    system = load_system(args.system)
    theta_hat = _parse_float_vector(args.theta_hat)
    v_hat = _parse_float_matrix(args.vhat)
    cfg = AdaptiveConfig.from_T(args.T, c=args.c, delta=args.delta)
    verdict = adaptive_analyze(
        system, theta_hat, v_hat, cfg, draws=args.N, seed=args.seed
    )
    payload = _base_payload(args, system)
    payload["seed"] = args.seed
    payload["verdict"] = {
        "branch": verdict.branch,
        "k_hat_det": None if math.isinf(verdict.k_hat_det) else int(verdict.k_hat_det),
        "threshold": verdict.threshold,
        "alpha_hat": list(verdict.alpha_hat) if verdict.alpha_hat else None,
    }
    if verdict.bound is not None:
        payload["verdict"]["bound"] = {
            "alpha": verdict.bound.alpha,
            "scale": str(verdict.bound.scale),
            "p": verdict.bound.p,
            "q": verdict.bound.q,
        }
    if verdict.law is not None:
        payload["verdict"]["quantiles"] = {
            str(level): verdict.law.quantile(level) for level in QUANTILE_LEVELS
        }
    _emit(payload)
    return EXIT_DIVERGES if verdict.branch == BRANCH_DIVERGENT else EXIT_OK


def _check(name: str, ok: bool, detail: str, results: list) -> None:
    results.append(ok)
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def cmd_reproduce(args) -> int:
    """Re-derive the benchmark numbers on every gallery fixture."""
    results: list[bool] = []
    draws = args.N
    ks_cut = max(0.006, 2.7 / math.sqrt(draws))

    table = chisq.reference_max_p_table()
    expected = [6, 10, 11, 17]
    got = [row["max_p"] for row in table]
    _check("max-p table", got == expected, f"{got} (expected {expected})", results)

    cubics = gallery.coupled_cubics_restriction()
    matrix = jacobian(cubics)
    det1 = poly_det(matrix.submatrix(range(3), (0, 1, 2))).to_text()
    det3 = poly_det(matrix.submatrix(range(3), (0, 2, 3))).to_text()
    _check(
        "coupled-cubics determinants",
        det1 == "-12*t1*t2*t3^2" and det3 == "18*t1*t3^2*t4^2",
        f"{det1}; {det3}",
        results,
    )
    _, analysis = analyze_at(cubics)
    _check(
        "coupled-cubics sharing",
        analysis.classification == "CLDR"
        and analysis.alpha == (1, 1, 2)
        and analysis.alpha_bar == 4,
        f"alpha={analysis.alpha}, alpha_bar={analysis.alpha_bar}, "
        f"{analysis.classification}",
        results,
    )

    from .cldr import cldr_construct

    drop = cldr_construct(gallery.offset_rank_drop_matrix(1))
    _check(
        "offset-rank-drop classification",
        drop.classification == DEFICIENT_RANK and sum(drop.alpha) < drop.alpha_bar,
        f"alpha={drop.alpha}, alpha_bar={drop.alpha_bar}",
        results,
    )
    _, pair0 = analyze_at(gallery.power_pair_restriction((0, 0)))
    _, pair1 = analyze_at(gallery.power_pair_restriction((0, 1)))
    _check(
        "power-pair branches",
        pair0.classification == "CLDR"
        and pair0.alpha == (1, 2)
        and pair1.classification == DEFICIENT_RANK,
        f"origin {pair0.alpha} {pair0.classification}; "
        f"offaxis {pair1.classification}",
        results,
    )

    # Closed forms of the finite-sample statistic.
    sq = gallery.square_restriction()
    w = wald_statistic(sq, WaldInput.from_T((0.1,), np.eye(1), 100.0)).statistic
    _check("square closed form", abs(w - 0.25) < 1e-12, f"W={w}", results)
    prod = gallery.product_restriction()
    w = wald_statistic(prod, WaldInput.from_T((1.0, 2.0), np.eye(2), 100.0)).statistic
    _check("product closed form", abs(w - 80.0) < 1e-9, f"W={w}", results)
    pair = gallery.power_pair_restriction()
    w = wald_statistic(pair, WaldInput.from_T((0.3, 0.4), np.eye(2), 100.0)).statistic
    _check("power-pair closed form", abs(w - 3.25) < 1e-9, f"W={w}", results)

    # Limit laws against their analytic references.
    def quarter_chisq_cdf(k):
        return lambda x: np.array([chisq.chisq_cdf(4.0 * v, k) for v in x])

    for name, system, reference in [
        ("square", gallery.square_restriction(), quarter_chisq_cdf(1)),
        ("sphere-3", gallery.sphere_restriction(3), quarter_chisq_cdf(3)),
    ]:
        shifted, analysis = analyze_at(system)
        cfg = LimitLawConfig(V=np.eye(system.p), draws=draws, seed=args.seed)
        law = sample_limit_law(shifted, analysis, cfg)
        dist = ks_distance(law, reference)
        _check(
            f"{name} limit law",
            dist < ks_cut,
            f"KS={dist:.4f} (cut {ks_cut:.4f})",
            results,
        )

    # Divergence: medians of the finite-sample law grow without bound.
    pair1_system = gallery.power_pair_restriction((0, 1))
    medians = [
        finite_T_reference(
            pair1_system, (0.0, 1.0), np.eye(2), T, max(2000, draws // 10), args.seed
        ).quantile(0.5)
        for T in (1e2, 1e4, 1e6)
    ]
    _check(
        "power-pair divergence",
        medians[0] < medians[1] < medians[2],
        f"medians={['%.3g' % m for m in medians]}",
        results,
    )

    passed = sum(results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wald",
        description="Wald tests under locally singular polynomial restrictions",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="classify a restriction system")
    analyze.add_argument("--system", required=True, help=".wrs file")
    analyze.add_argument("--theta-bar", help="tested point, e.g. '0,1/2'")
    analyze.set_defaults(func=cmd_analyze)

    evaluate = sub.add_parser("eval", help="finite-sample Wald statistic")
    evaluate.add_argument("--system", required=True)
    evaluate.add_argument("--params", help="JSON file with theta_hat, V_hat, T")
    evaluate.add_argument("--theta-hat", help="estimate, e.g. '0.1,0.2'")
    evaluate.add_argument("--vhat", help="covariance rows, e.g. '1,0;0,1'")
    evaluate.add_argument("--T", type=float, help="sample size")
    evaluate.set_defaults(func=cmd_eval)

    simulate = sub.add_parser("simulate", help="sample the asymptotic law")
    simulate.add_argument("--system", required=True)
    simulate.add_argument("--theta-bar")
    simulate.add_argument("--vhat", help="covariance V (default identity)")
    simulate.add_argument("--N", type=int, default=200_000)
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", default="law", help="output file prefix")
    simulate.set_defaults(func=cmd_simulate)

    bounds = sub.add_parser("bounds", help="conservative max-p tables")
    bounds.add_argument("--q", type=int)
    bounds.add_argument("--alpha", type=int)
    bounds.add_argument("--level", type=float, default=0.05)
    bounds.add_argument("--table", action="store_true",
                        help="emit the benchmark table")
    bounds.add_argument("--format", choices=("json", "csv"), default="json")
    bounds.set_defaults(func=cmd_bounds)

    adaptive = sub.add_parser("adaptive", help="data-driven branch decision")
    adaptive.add_argument("--system", required=True)
    adaptive.add_argument("--theta-hat", required=True)
    adaptive.add_argument("--vhat", required=True)
    adaptive.add_argument("--T", type=float, required=True)
    adaptive.add_argument("--c", type=float, default=1.0)
    adaptive.add_argument("--delta", type=float, default=0.4)
    adaptive.add_argument("--N", type=int, help="sample the estimated law")
    adaptive.add_argument("--seed", type=int, default=0)
    adaptive.set_defaults(func=cmd_adaptive)

    reproduce = sub.add_parser("reproduce", help="re-derive benchmark numbers")
    reproduce.add_argument("--N", type=int, default=20_000)
    reproduce.add_argument("--seed", type=int, default=0)
    reproduce.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, RankDeficiencyError, SubmatrixBudgetError,
            DivergentLawError) as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (SingularAtPoint, RedrawLimitError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WaldkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
