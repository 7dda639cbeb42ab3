"""Command-line interface.

usage: agof <command> [options]

commands:
  fit        fit a family to a data file, print the model as JSON
  distance   ||F_n - G||_p between a data file and a model (CSV)
  oracle     ||F - G||_p between two models (CSV)
  test       equivalence test of approximate fit (JSON report)
  mindist    minimum certifiable margins, one row per k for mixtures (JSON)
  power      Monte Carlo rejection-rate study over an epsilon grid (CSV)

Data files are single-column text/CSV, one value per line; one leading
header line is tolerated.  Models are given as JSON files (@path), inline
JSON, or compact specs such as  exponential:2.0  normal:0.4,1.5
weibull:2,1  dirac:4.26  gaussian_mixture:0.8,0.2;0,2;1,2  (weights;means;sds).

Exit codes: 0 success, 2 bad input or arguments, 3 numerical failure.
Errors print to stderr as a single line:  error[CODE] message
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .__about__ import __version__
from .bootstrap import BootstrapConfig, norms_to_csv
from .decision import (
    TestConfig,
    agof_test,
    dual_test,
    improvement_coefficient,
    min_margin,
    report_to_json,
)
from .distances import DistanceConfig, analytic_distance, dirac_distance, empirical_model_distance
from .errors import AgofError, InputError
from .families import (
    FamilyId,
    FittedModel,
    Sample,
    dirac_model,
    exponential_model,
    mixture_model,
    model_from_json,
    model_from_json_dict,
    model_to_json_dict,
    normal_model,
    weibull_model,
)
from .fitting import EmConfig, fit_mle
from .power import PowerStudyConfig, power_curve


def _read_values(path: str, drop_nonfinite: bool, drop_nonpositive: bool):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    values = []
    dropped_nf = 0
    dropped_np = 0
    first_data_line = True
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        fields = [f for f in text.split(",") if f.strip() != ""]
        if len(fields) != 1:
            raise InputError(f"{path}:{lineno}: expected a single column, got {text!r}")
        try:
            v = float(fields[0])
        except ValueError:
            if first_data_line:
                first_data_line = False  # tolerated header
                continue
            raise InputError(
                f"{path}:{lineno}: cannot parse {fields[0]!r} as a number"
            ) from None
        first_data_line = False
        if not np.isfinite(v):
            if drop_nonfinite:
                dropped_nf += 1
                continue
            raise InputError(
                f"{path}:{lineno}: non-finite value {fields[0]!r} "
                "(pass --drop-nonfinite to skip such rows)"
            )
        if drop_nonpositive and v <= 0:
            dropped_np += 1
            continue
        values.append(v)
    if not values:
        raise InputError(f"{path}: no usable values")
    return np.array(values), dropped_nf, dropped_np


def _read_sample(args) -> Sample:
    values, dnf, dnp = _read_values(
        args.data, args.drop_nonfinite, args.drop_nonpositive
    )
    if dnf:
        print(f"note: dropped {dnf} non-finite value(s)", file=sys.stderr)
    if dnp:
        print(f"note: dropped {dnp} nonpositive value(s)", file=sys.stderr)
    return Sample(values, provenance=args.data)


def _floats(text: str, what: str):
    try:
        return [float(t) for t in text.split(",") if t.strip() != ""]
    except ValueError as exc:
        raise InputError(f"cannot parse {what} {text!r}: {exc}") from None


def _model_from_spec(spec: str) -> FittedModel:
    spec = spec.strip()
    if spec.startswith("@"):
        try:
            with open(spec[1:], "r", encoding="utf-8") as fh:
                return model_from_json(fh.read())
        except OSError as exc:
            raise InputError(f"cannot read model file {spec[1:]}: {exc}") from exc
    if spec.startswith("{"):
        return model_from_json(spec)
    if ":" not in spec:
        raise InputError(f"malformed model spec {spec!r}")
    tag, _, rest = spec.partition(":")
    tag = tag.strip()
    try:
        if tag == "exponential":
            (theta,) = _floats(rest, "exponential parameters")
            return exponential_model(theta)
        if tag == "normal":
            mean, sd = _floats(rest, "normal parameters")
            return normal_model(mean, sd)
        if tag == "weibull":
            shape, scale = _floats(rest, "weibull parameters")
            return weibull_model(shape, scale)
        if tag == "dirac":
            (mu,) = _floats(rest, "dirac parameter")
            return dirac_model(mu)
        if tag == "gaussian_mixture":
            groups = rest.split(";")
            if len(groups) != 3:
                raise InputError(
                    "gaussian_mixture spec needs weights;means;sds groups"
                )
            return mixture_model(*(_floats(g, "mixture parameters") for g in groups))
    except ValueError as exc:
        raise InputError(f"malformed model spec {spec!r}: {exc}") from None
    except AgofError:
        raise
    raise InputError(f"unknown family in model spec {spec!r}")


def _family_from_args(args) -> FamilyId:
    if args.family == "gaussian_mixture":
        if args.k is None:
            raise InputError("gaussian_mixture requires --k")
        return FamilyId.gaussian_mixture(args.k)
    if args.k is not None:
        raise InputError(f"--k applies only to gaussian_mixture, not {args.family}")
    return FamilyId(args.family)


def _em_from_args(args) -> EmConfig:
    return EmConfig(restarts=args.restarts, seed=args.seed if args.seed is not None else 0)


def _write_output(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    # write whole payload to a sibling temp file, then rename into place
    d = os.path.dirname(os.path.abspath(out)) or "."
    fd, tmp = tempfile.mkstemp(prefix=".agof-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _distance_csv(value: float, bound: float) -> str:
    return f"value,abs_error_bound\n{value!r},{bound!r}\n"


def _add_common(sub, data=True):
    if data:
        sub.add_argument("data", help="single-column data file")
        sub.add_argument("--drop-nonfinite", action="store_true",
                         help="skip NaN/inf rows instead of failing")
        sub.add_argument("--drop-nonpositive", action="store_true",
                         help="skip values <= 0 (e.g. before an exponential fit)")
    sub.add_argument("--out", help="write output atomically to this path")


def _add_family(sub):
    sub.add_argument("--family", required=True,
                     choices=["exponential", "normal", "weibull",
                              "gaussian_mixture", "dirac"])
    sub.add_argument("--k", type=int, help="mixture component count")


def _add_quad(sub):
    sub.add_argument("--tail-u", type=float, default=1e-10)
    sub.add_argument("--quad-rel-tol", type=float, default=1e-9)
    sub.add_argument("--max-subdivisions", type=int, default=10 ** 6)


def _dcfg_from_args(args, p: float) -> DistanceConfig:
    return DistanceConfig(
        p=p, tail_u=args.tail_u, quad_rel_tol=args.quad_rel_tol,
        max_subdivisions=args.max_subdivisions,
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="agof",
        description="Bootstrap equivalence testing of approximate parametric fit "
                    "under L^p distances between distribution functions.",
    )
    ap.add_argument("--version", action="version", version=f"agof {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", help="fit a family to data, print model JSON")
    _add_common(s)
    _add_family(s)
    s.add_argument("--seed", type=int, default=0, help="EM restart seed (mixtures)")
    s.add_argument("--restarts", type=int, default=10)

    s = sub.add_parser("distance", help="empirical-vs-model L^p distance")
    _add_common(s)
    s.add_argument("--model", required=True, help="model spec, JSON, or @file")
    s.add_argument("--p", type=float, required=True)
    _add_quad(s)

    s = sub.add_parser("oracle", help="model-vs-model L^p distance")
    _add_common(s, data=False)
    s.add_argument("--f", required=True, dest="model_f", help="first model")
    s.add_argument("--g", required=True, dest="model_g", help="second model")
    s.add_argument("--p", type=float, required=True)
    _add_quad(s)

    s = sub.add_parser("test", help="equivalence test of approximate fit")
    _add_common(s)
    _add_family(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--method", choices=["bootstrap1", "bootstrap2"],
                   default="bootstrap2")
    s.add_argument("--B", type=int, default=2000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--failure-policy", choices=["retry_once_then_skip", "abort"],
                   default="retry_once_then_skip")
    s.add_argument("--max-skip-fraction", type=float, default=0.01)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--dual", action="store_true",
                   help="run the swapped-hypotheses test instead")
    s.add_argument("--dump-norms", help="also write replicate norms CSV here")
    _add_quad(s)

    s = sub.add_parser("mindist", help="minimum certifiable margins per k")
    _add_common(s)
    _add_family(s)
    s.add_argument("--kmax", type=int, default=3,
                   help="largest mixture size to sweep (mixtures only)")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--B", type=int, default=2000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--restarts", type=int, default=10)
    s.add_argument("--threads", type=int, default=1)
    _add_quad(s)

    s = sub.add_parser("power", help="Monte Carlo rejection-rate study")
    _add_common(s, data=False)
    s.add_argument("--true", required=True, dest="true_model",
                   help="true distribution (model spec)")
    _add_family(s)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--eps-grid", required=True,
                   help="comma list of margins, e.g. 0.25,0.3002,0.36")
    s.add_argument("--methods", default="bootstrap1,bootstrap2")
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--B", type=int, default=500)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--threads", type=int, default=1)
    return ap


def _cmd_fit(args) -> str:
    sample = _read_sample(args)
    family = _family_from_args(args)
    em = _em_from_args(args) if family.tag == "gaussian_mixture" else None
    params = fit_mle(family, sample, em=em)
    model = FittedModel(family, params)
    return json.dumps(model_to_json_dict(model), indent=2) + "\n"


def _cmd_distance(args) -> str:
    sample = _read_sample(args)
    model = _model_from_spec(args.model)
    if model.family.tag == "dirac":
        res = dirac_distance(sample, float(model.params.values[0]), args.p)
    else:
        res = empirical_model_distance(sample, model, _dcfg_from_args(args, args.p))
    return _distance_csv(res.value, res.abs_error_bound)


def _cmd_oracle(args) -> str:
    f = _model_from_spec(args.model_f)
    g = _model_from_spec(args.model_g)
    res = analytic_distance(f, g, _dcfg_from_args(args, args.p))
    return _distance_csv(res.value, res.abs_error_bound)


def _cmd_test(args):
    sample = _read_sample(args)
    family = _family_from_args(args)
    em = _em_from_args(args) if family.tag == "gaussian_mixture" else None
    config = TestConfig(
        p=args.p, epsilon=args.epsilon, alpha=args.alpha, method=args.method,
        bootstrap=BootstrapConfig(
            B=args.B, seed=args.seed, failure_policy=args.failure_policy,
            max_skip_fraction=args.max_skip_fraction,
        ),
        em=em,
        distance=_dcfg_from_args(args, args.p),
    )
    run = dual_test if args.dual else agof_test
    report = run(sample, family, config, threads=args.threads)
    if args.dump_norms:
        _write_output(norms_to_csv(report.boot), args.dump_norms)
    return report_to_json(report, config)


def _cmd_mindist(args) -> str:
    sample = _read_sample(args)
    base_family = _family_from_args(args) if args.family != "gaussian_mixture" \
        else None
    if args.family == "gaussian_mixture":
        if args.kmax < 1:
            raise InputError("--kmax must be >= 1")
        families = [FamilyId.gaussian_mixture(k) for k in range(1, args.kmax + 1)]
    else:
        families = [base_family]
    dcfg = _dcfg_from_args(args, args.p)
    rows = []
    from .bootstrap import run_bootstrap  # local import keeps module load light
    for family in families:
        em = None
        if family.tag == "gaussian_mixture":
            em = EmConfig(restarts=args.restarts, seed=args.seed)
        params = fit_mle(family, sample, em=em)
        model = FittedModel(family, params)
        obs = empirical_model_distance(sample, model, dcfg)
        boot = run_bootstrap(
            sample, family, args.p,
            BootstrapConfig(B=args.B, seed=args.seed),
            em_config=em, distance_config=dcfg, threads=args.threads,
        )
        row = {
            "k": family.k if family.tag == "gaussian_mixture" else None,
            "model": model_to_json_dict(model),
            "obs_norm": obs.value,
        }
        for method in ("bootstrap1", "bootstrap2"):
            margin = min_margin(obs.value, boot, args.alpha, method)
            raw, clamped = improvement_coefficient(margin, sample, args.p)
            row[method] = {
                "eps_star": margin,
                "improvement": clamped,
                "improvement_raw": raw,
            }
        rows.append(row)
    payload = {
        "rows": rows,
        "config": {
            "family": args.family, "p": args.p, "alpha": args.alpha,
            "B": args.B, "seed": args.seed,
        },
    }
    return json.dumps(payload, indent=2) + "\n"


def _cmd_power(args) -> str:
    true_model = _model_from_spec(args.true_model)
    family = _family_from_args(args)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    grid = tuple(_floats(args.eps_grid, "--eps-grid"))
    em = None
    if family.tag == "gaussian_mixture":
        em = EmConfig(seed=args.seed)
    config = PowerStudyConfig(
        true_model=true_model, family=family, p=args.p, n=args.n,
        alpha=args.alpha, epsilon_grid=grid, methods=methods,
        runs=args.runs, B=args.B, seed=args.seed, em=em,
    )
    curve = power_curve(config, threads=args.threads)
    if curve.n_runs_skipped:
        print(f"note: {curve.n_runs_skipped} run(s) failed and were excluded",
              file=sys.stderr)
    return curve.to_csv()


_COMMANDS = {
    "fit": _cmd_fit,
    "distance": _cmd_distance,
    "oracle": _cmd_oracle,
    "test": _cmd_test,
    "mindist": _cmd_mindist,
    "power": _cmd_power,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = _COMMANDS[args.command](args)
        _write_output(text, args.out)
    except AgofError as exc:
        print(f"error[{exc.code}] {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
