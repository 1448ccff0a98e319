"""Convergence-study runner: sweeps over N, order columns, text and CSV tables.

Usage::

    python3 -m expmid --example 1 --steps 10,20,40 --table all --out ex1.csv
"""

import argparse
import io
import math
import sys
from dataclasses import dataclass, field

from .estimators import build_report
from .exceptions import ConfigurationError, DataError, ExpMidError
from .integrators import TimeGrid, run
from .phifun import METHODS, PhiEvaluator
from .problems import EXAMPLES

__all__ = [
    "RunConfig",
    "RunFailure",
    "SuiteResult",
    "convergence_order",
    "run_suite",
    "render_text",
    "render_csv",
    "main",
    "CSV_COLUMNS",
    "TABLES",
]

TABLES = ("errors", "estimators", "effectivity", "all")
DEFAULT_STEPS = (10, 20, 40, 80, 160, 320)
EX4_DEFAULT_STEPS = (10, 20, 40, 80)
REFERENCE_STEPS = 10000

CSV_COLUMNS = (
    "example", "M", "N", "phi_method",
    "E_T", "order_ET", "E_inf", "order_Einf", "E_1", "order_E1",
    "est_U", "order_estU", "est_F_or_B", "order_estFB", "zeta_U", "order_zetaU",
    "lower", "upper", "ei_L", "ei_U",
)

# report attribute -> order column
_ORDERED = (
    ("E_T", "order_ET"),
    ("E_inf", "order_Einf"),
    ("E_1", "order_E1"),
    ("estU", "order_estU"),
    ("estFB", "order_estFB"),
    ("zetaU", "order_zetaU"),
)


class RunFailure(ExpMidError):
    """A run in the sweep failed; carries the run metadata."""

    def __init__(self, message, example, M, N):
        super().__init__(message)
        self.example = example
        self.M = M
        self.N = N


@dataclass(frozen=True)
class RunConfig:
    """One convergence study. ``M=None`` and ``steps=None`` pick the example's defaults."""

    example: int = 1
    M: int | None = None
    steps: tuple | None = None
    phi_method: str = "spectral"
    krylov_dim: int = 100
    krylov_tol: float = 1e-12
    fp_tol: float = 1e-10
    fp_max_iter: int = 100
    epsilon: float = 0.01
    table: str = "all"
    out: str | None = None

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ConfigurationError(f"example must be one of {sorted(EXAMPLES)}, got {self.example}")
        M = self.M if self.M is not None else (80 if self.example == 4 else 100)
        if int(M) != M or M < 4:
            raise ConfigurationError(f"M must be an integer >= 4, got {M}")
        object.__setattr__(self, "M", int(M))

        steps = self.steps
        if steps is None:
            steps = EX4_DEFAULT_STEPS if self.example == 4 else DEFAULT_STEPS
        steps = tuple(steps)
        if not steps or any(int(n) != n or n < 1 for n in steps):
            raise ConfigurationError(f"steps must be positive integers, got {steps}")
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ConfigurationError(f"steps must be strictly increasing, got {steps}")
        object.__setattr__(self, "steps", tuple(int(n) for n in steps))

        if self.phi_method not in METHODS:
            raise ConfigurationError(f"phi_method must be one of {METHODS}, got {self.phi_method!r}")
        if self.table not in TABLES:
            raise ConfigurationError(f"table must be one of {TABLES}, got {self.table!r}")
        if self.krylov_dim < 1 or self.krylov_tol <= 0:
            raise ConfigurationError("krylov_dim must be >= 1 and krylov_tol > 0")
        if self.fp_tol <= 0 or self.fp_max_iter < 1:
            raise ConfigurationError("fp_tol must be > 0 and fp_max_iter >= 1")
        if self.epsilon <= 0:
            raise ConfigurationError(f"epsilon must be positive, got {self.epsilon}")

    def problem(self):
        if self.example == 4:
            return EXAMPLES[4](self.M, epsilon=self.epsilon,
                               fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter)
        if self.example == 3:
            return EXAMPLES[3](self.M, fp_tol=self.fp_tol, fp_max_iter=self.fp_max_iter)
        return EXAMPLES[self.example](self.M)


def convergence_order(values, steps):
    """Observed orders ``log(v[i-1]/v[i]) / log(N[i]/N[i-1])``, one per refinement.

    The result has ``len(values) - 1`` entries, aligned to the finer runs.
    """
    values = [float(v) for v in values]
    steps = [float(n) for n in steps]
    if len(values) != len(steps):
        raise DataError(f"{len(values)} values but {len(steps)} step counts")
    if len(values) < 2:
        raise DataError("need at least two runs to estimate an order")
    if any(not (v > 0) or math.isinf(v) for v in values):
        raise DataError(f"orders need positive finite values, got {values}")
    if any(b <= a for a, b in zip(steps, steps[1:])):
        raise DataError(f"step counts must be strictly increasing, got {steps}")
    return [
        math.log(values[i - 1] / values[i]) / math.log(steps[i] / steps[i - 1])
        for i in range(1, len(values))
    ]


@dataclass
class SuiteResult:
    config: RunConfig
    reports: list
    orders: dict = field(default_factory=dict)

    @property
    def text(self):
        return render_text(self)

    @property
    def csv(self):
        return render_csv(self)


def _orders_for(reports, attr):
    vals = [getattr(r, attr) for r in reports]
    if len(vals) < 2 or any(not (v > 0) or math.isinf(v) for v in vals):
        return [math.nan] * len(vals)
    return [math.nan] + convergence_order(vals, [r.N for r in reports])


def run_suite(cfg):
    """Run every N of ``cfg`` and return a :class:`SuiteResult`.

    Example 4 has no closed-form solution; its errors are measured against
    one fine run with the same phi evaluation, computed once per call.
    """
    problem = cfg.problem()
    phi = PhiEvaluator(problem.operator, method=cfg.phi_method,
                       krylov_max_dim=cfg.krylov_dim, krylov_tol=cfg.krylov_tol)

    exact = None
    if problem.exact is None:
        try:
            exact = run(problem, TimeGrid.uniform(REFERENCE_STEPS), phi)
        except ExpMidError as exc:
            raise RunFailure(f"example {cfg.example}, M={cfg.M}, reference N={REFERENCE_STEPS}: "
                             f"{type(exc).__name__}: {exc}",
                             cfg.example, cfg.M, REFERENCE_STEPS) from exc

    reports = []
    for N in cfg.steps:
        try:
            traj = run(problem, TimeGrid.uniform(N), phi)
            reports.append(build_report(traj, problem, phi, exact=exact, M=cfg.M))
        except ExpMidError as exc:
            raise RunFailure(f"example {cfg.example}, M={cfg.M}, N={N}: "
                             f"{type(exc).__name__}: {exc}", cfg.example, cfg.M, N) from exc

    orders = {col: _orders_for(reports, attr) for attr, col in _ORDERED}
    return SuiteResult(cfg, reports, orders)


def _sci(v):
    return "nan" if math.isnan(v) else f"{v:.4e}"


def _ord(v):
    return "" if math.isnan(v) else f"{v:.4f}"


def _sig(v):
    return "nan" if math.isnan(v) else f"{v:#.5g}"


def _table(header, rows):
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def render_text(result):
    """Aligned text tables, one row per N with orders interleaved."""
    cfg, reps, od = result.config, result.reports, result.orders
    fb = "est_B" if cfg.example in (3, 4) else "est_f"
    want = ("errors", "estimators", "effectivity") if cfg.table == "all" else (cfg.table,)
    blocks = [f"example {cfg.example}  M={cfg.M}  phi={cfg.phi_method}"]

    def interleaved(attrs_cols, names):
        header = ["N"]
        for name in names:
            header += [name, "order"]
        rows = []
        for i, r in enumerate(reps):
            row = [str(r.N)]
            for attr, col in attrs_cols:
                row += [_sci(getattr(r, attr)), _ord(od[col][i])]
            rows.append(row)
        return _table(header, rows)

    if "errors" in want:
        blocks.append(interleaved(_ORDERED[:3], ["E_T", "E_inf", "E_1"]))
    if "estimators" in want:
        blocks.append(interleaved(_ORDERED[3:], ["est_U", fb, "zeta_U"]))
    if "effectivity" in want:
        rows = [[str(r.N), _sci(r.lower), _sci(r.upper), _sig(r.ei_L), _sig(r.ei_U)] for r in reps]
        blocks.append(_table(["N", "lower", "upper", "ei_L", "ei_U"], rows))
    return "\n\n".join(blocks) + "\n"


def _full(v):
    return "" if isinstance(v, float) and math.isnan(v) else repr(float(v))


def render_csv(result):
    """CSV with every column at full precision; empty cells for undefined orders."""
    cfg, od = result.config, result.orders
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for i, r in enumerate(result.reports):
        cells = [str(cfg.example), str(r.M), str(r.N), r.phi_method]
        for attr, col in _ORDERED:
            cells += [_full(getattr(r, attr)), _full(od[col][i])]
        cells += [_full(r.lower), _full(r.upper), _full(r.ei_L), _full(r.ei_U)]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def _int_list(s):
    try:
        return tuple(int(p) for p in s.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def build_parser():
    p = argparse.ArgumentParser(
        prog="expmid",
        description="Convergence tables for the exponential midpoint method and its error estimators.",
    )
    p.add_argument("--example", type=int, choices=sorted(EXAMPLES), default=1)
    p.add_argument("--space", type=int, metavar="M", default=None,
                   help="number of spatial cells (default 100, example 4: 80)")
    p.add_argument("--steps", type=_int_list, default=None, metavar="N1,N2,...",
                   help="numbers of uniform time steps on [0, 1]")
    p.add_argument("--phi-method", choices=METHODS, default="spectral")
    p.add_argument("--krylov-dim", type=int, default=100)
    p.add_argument("--krylov-tol", type=float, default=1e-12)
    p.add_argument("--fp-tol", type=float, default=1e-10)
    p.add_argument("--fp-max-iter", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=0.01, help="diffusion for example 4")
    p.add_argument("--table", choices=TABLES, default="all")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="write CSV here ('-' for stdout, which replaces the text tables)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            example=args.example, M=args.space, steps=args.steps,
            phi_method=args.phi_method, krylov_dim=args.krylov_dim, krylov_tol=args.krylov_tol,
            fp_tol=args.fp_tol, fp_max_iter=args.fp_max_iter, epsilon=args.epsilon,
            table=args.table, out=args.out,
        )
        result = run_suite(cfg)
    except ExpMidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if cfg.out == "-":
        sys.stdout.write(result.csv)
        return 0
    sys.stdout.write(result.text)
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(result.csv)
        except OSError as exc:
            print(f"error: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
