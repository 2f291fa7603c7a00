"""Command-line entry point.

Subcommands: fetch, congruent, lvalue, verify, coset-reduce, local-constant.
Form references are fixture paths, bare labels resolved against --fixtures,
or builtin generator specs "delta:<weight>[:<n_max>]" for the level-1 family.

Exit codes for `verify`: 0 when every theorem-covered verdict is Congruent
(or merely informational), 2 on a NotCongruent verdict inside the theorem
hypotheses, 3 on an Indeterminate one, 1 on input or validation errors.
Hypothesis violations never abort a run; they annotate the report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .congruence import check_congruent
from .exactnum import AlgNum, ExactError, factor_rational_prime, quad_normalize, QuadField, RATIONAL
from .forms import DELTA_WEIGHTS, NewformData, delta_family_qexp
from .ingest import fetch_newform, load_fixture, record_to_newform, save_fixture
from .lvalue import L_at
from .rankin import euler_factor, rs_coefficients
from .ratio import CONGRUENT, INDETERMINATE, NOT_CONGRUENT, full_report, report_text

DEFAULT_PRECISION = 120
DEFAULT_NMAX = 6000


class CliError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    return cfg


def resolve_form(ref: str, fixtures_dir: str | None, n_max: int) -> tuple[NewformData, str | None]:
    """Returns (form, fixture_path_or_None)."""
    if ref.startswith("delta:"):
        parts = ref.split(":")
        k = int(parts[1])
        nm = int(parts[2]) if len(parts) > 2 else n_max
        if k not in DELTA_WEIGHTS:
            raise CliError(f"builtin family supports weights {DELTA_WEIGHTS}")
        return delta_family_qexp(k, nm), None
    path = Path(ref)
    if not path.exists() and fixtures_dir:
        cand = Path(fixtures_dir) / f"{ref}.json"
        if cand.exists():
            path = cand
    if not path.exists():
        raise CliError(f"cannot resolve form reference {ref!r}")
    return record_to_newform(load_fixture(path)), str(path)


def _prime_ideal(l: int, field: QuadField):
    ideals = factor_rational_prime(l, field)
    return ideals[0]


def _common_field(*forms: NewformData) -> QuadField:
    from .exactnum import compositum

    F = RATIONAL
    for f in forms:
        F = compositum(F, f.field)
    return F


def _manifest(args_ns, checksums: dict, wall: float) -> dict:
    return {
        "command": args_ns.cmd,
        "arguments": {k: v for k, v in sorted(vars(args_ns).items())
                      if k not in ("cmd", "func") and v is not None},
        "precision": getattr(args_ns, "precision", None),
        "fixture_checksums": checksums,
        "code_version": __version__,
        "wall_time_s": round(wall, 3),
    }


def _checksum(path: str | None) -> str | None:
    if path is None:
        return None
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit(obj: dict, json_out: str | None):
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if json_out:
        Path(json_out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_fetch(args) -> int:
    rec = fetch_newform(args.label, args.n_max, args.base_url,
                        directory=Path(args.cache_dir) if args.cache_dir else None)
    if args.out:
        save_fixture(rec, args.out)
    _emit({"label": rec.label, "level": rec.level, "weight": rec.weight,
           "n_max": rec.n_max, "field_disc": rec.field_disc}, args.json_out)
    return 0


def cmd_congruent(args) -> int:
    from dataclasses import replace

    from .congruence import eisenstein_screen

    f1, _ = resolve_form(args.form1, args.fixtures, args.n_max)
    f2, _ = resolve_form(args.form2, args.fixtures, args.n_max)
    P = _prime_ideal(args.prime, _common_field(f1, f2))
    rep = check_congruent(f1, f2, P, n_extra=args.n_extra)
    rep = replace(rep, eisenstein_alarm=eisenstein_screen(f1, P))
    _emit(rep.to_json_obj(), args.json_out)
    return 0


def cmd_lvalue(args) -> int:
    refs = args.pair.split(",")
    if len(refs) != 2:
        raise CliError("--pair takes two comma-separated form references")
    f1, _ = resolve_form(refs[0], args.fixtures, args.n_max)
    f2, _ = resolve_form(refs[1], args.fixtures, args.n_max)
    rs = rs_coefficients(f1, f2, min(f1.n_max, f2.n_max))
    res = L_at(rs, args.s, args.precision)
    import mpmath

    _emit({
        "schema": "rscong-lvalue/v1",
        "s": res.s,
        "value_re": mpmath.nstr(res.value.real, args.precision),
        "value_im": mpmath.nstr(res.value.imag, args.precision),
        "err_bound": mpmath.nstr(res.err_bound, 5),
        "method": res.method,
    }, args.json_out)
    return 0


def cmd_verify(args) -> int:
    t0 = time.time()
    aux, p_aux = resolve_form(args.aux, args.fixtures, args.n_max)
    f1, p1 = resolve_form(args.form1, args.fixtures, args.n_max)
    f2, p2 = resolve_form(args.form2, args.fixtures, args.n_max)
    P = _prime_ideal(args.prime, _common_field(aux, f1, f2))
    ms = [int(x) for x in args.m_list.split(",")] if args.m_list else None
    report = full_report(aux, f1, f2, P, P=args.precision, ms=ms)
    verdicts = report.pop("_verdicts")
    checksums = {ref: _checksum(pth) for ref, pth in
                 ((args.aux, p_aux), (args.form1, p1), (args.form2, p2)) if pth}
    text = report_text(report)
    sys.stdout.write(text + "\n")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
        manifest = _manifest(args, checksums, time.time() - t0)
        Path(args.json_out).with_suffix(".manifest.json").write_text(
            json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    covered = [v.verdict for v in verdicts if not v.informational]
    if NOT_CONGRUENT in covered:
        return 2
    if INDETERMINATE in covered:
        return 3
    return 0


def cmd_coset_reduce(args) -> int:
    from .coset import reduce_unipotent, unipotent

    np_, n_ = (int(x) for x in args.level_pair.split(","))
    entries = [Fraction(x) for x in args.entries.split(",")]
    if len(entries) != 4:
        raise CliError("--entries takes x,y,z,w")
    u = unipotent(*entries, args.p)
    cls = reduce_unipotent(u, np_, n_)
    _emit({
        "schema": "rscong-coset/v1",
        "class_j": cls.j,
        "level": cls.level,
        "left_parabolic": [[str(x) for x in row] for row in cls.left.entries],
        "right_level_subgroup": [[str(x) for x in row] for row in cls.right.entries],
        "verified": cls.verify(u),
    }, args.json_out)
    return 0


def cmd_local_constant(args) -> int:
    from .localint import HalfPower, SteinbergTwist, UnramifiedPS, local_constant

    k, k2 = (int(x) for x in args.weights.split(","))
    K = max(k, k2)
    p = args.p
    st = SteinbergTwist(p=p, chi_p_at_p=AlgNum.rational(Fraction(args.steinberg)))
    trace = HalfPower(p, AlgNum.rational(Fraction(args.ps_trace)), -1)
    det = AlgNum.rational(Fraction(args.ps_det))
    ps = UnramifiedPS(p=p, trace=trace, det=det, weight=K)
    c = local_constant(st, ps, p)
    _emit({
        "schema": "rscong-local/v1",
        "p": p,
        "weights": [k, k2],
        "c_p": [int(c.a.numerator), int(c.a.denominator),
                int(c.b.numerator), int(c.b.denominator)],
        "matches_euler_ratio_at": [K - 2, K - 1],
    }, args.json_out)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rscong", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config", help="JSON file whose keys mirror the flags")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(sp):
        sp.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
        sp.add_argument("--fixtures", help="directory for bare-label form references")
        sp.add_argument("--cache-dir")
        sp.add_argument("--json-out")
        sp.add_argument("--n-max", type=int, default=DEFAULT_NMAX)

    sp = sub.add_parser("fetch", help="fetch a newform record into the cache")
    sp.add_argument("--label", required=True)
    sp.add_argument("--base-url", required=True)
    sp.add_argument("--out", help="also save as a fixture file")
    common(sp)
    sp.set_defaults(func=cmd_fetch)

    sp = sub.add_parser("congruent", help="coefficientwise congruence mod a prime")
    sp.add_argument("--form1", required=True)
    sp.add_argument("--form2", required=True)
    sp.add_argument("--prime", type=int, required=True)
    sp.add_argument("--n-extra", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_congruent)

    sp = sub.add_parser("lvalue", help="completed L-value at an integer point")
    sp.add_argument("--pair", required=True, help="two form references, comma separated")
    sp.add_argument("--s", type=int, required=True)
    common(sp)
    sp.set_defaults(func=cmd_lvalue)

    sp = sub.add_parser("verify", help="full ratio-congruence verification report")
    sp.add_argument("--form1", required=True, help="first congruent form")
    sp.add_argument("--form2", required=True, help="second congruent form")
    sp.add_argument("--aux", required=True, help="auxiliary form")
    sp.add_argument("--prime", type=int, required=True)
    sp.add_argument("--m-list", help="restrict to these left endpoints m")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("coset-reduce", help="reduce a lower-block unipotent")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--level-pair", required=True, help="n',n")
    sp.add_argument("--entries", required=True, help="x,y,z,w")
    common(sp)
    sp.set_defaults(func=cmd_coset_reduce)

    sp = sub.add_parser("local-constant", help="exact local intertwining constant")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--steinberg", required=True, help="a_p of the ramified form")
    sp.add_argument("--ps-trace", required=True, help="a(p, f^rho) of the unramified form")
    sp.add_argument("--ps-det", required=True, help="chi_f^(-1)(p) p^(K-2)")
    sp.add_argument("--weights", required=True, help="k,k'")
    common(sp)
    sp.set_defaults(func=cmd_local_constant)
    return ap


_CONFIGURABLE_DEFAULTS = {
    "precision": DEFAULT_PRECISION,
    "n_max": DEFAULT_NMAX,
    "fixtures": None,
    "cache_dir": None,
    "json_out": None,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        for key, val in cfg.items():
            attr = key.replace("-", "_")
            if attr in _CONFIGURABLE_DEFAULTS and hasattr(args, attr) \
                    and getattr(args, attr) == _CONFIGURABLE_DEFAULTS[attr]:
                setattr(args, attr, val)  # flags on the command line win
        return args.func(args)
    except (CliError, ExactError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
