import csv
import io
import math

import pytest

from expmid import ConfigurationError, DataError
from expmid.cli import (
    CSV_COLUMNS,
    RunConfig,
    RunFailure,
    build_parser,
    convergence_order,
    main,
    run_suite,
)

HEADER = ("example,M,N,phi_method,E_T,order_ET,E_inf,order_Einf,E_1,order_E1,"
          "est_U,order_estU,est_F_or_B,order_estFB,zeta_U,order_zetaU,lower,upper,ei_L,ei_U")


# ---- convergence_order ------------------------------------------------------

def test_order_of_halving_values():
    assert convergence_order([1.0, 0.5, 0.25], [10, 20, 40]) == pytest.approx([1.0, 1.0], rel=1e-15)


def test_order_published_pair():
    # inputs carry 5 significant digits, which moves the order by up to ~8e-5
    assert convergence_order([4.2546e-3, 1.1009e-3], [10, 20])[0] == pytest.approx(1.9504, abs=1e-4)


def test_order_constant_values():
    assert convergence_order([3.0, 3.0, 3.0], [10, 20, 40]) == [0.0, 0.0]


def test_order_non_doubling_steps():
    # general formula uses the actual step ratio
    assert convergence_order([1.0, 1 / 9], [10, 30])[0] == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize(
    "values,steps",
    [([1.0, 0.0], [10, 20]), ([1.0, -1.0], [10, 20]), ([1.0], [10]), ([1.0, 0.5], [10]),
     ([1.0, math.inf], [10, 20]), ([1.0, 0.5], [20, 10]), ([1.0, math.nan], [10, 20])],
)
def test_order_rejects_bad_data(values, steps):
    with pytest.raises(DataError):
        convergence_order(values, steps)


# ---- RunConfig --------------------------------------------------------------

def test_config_defaults():
    c = RunConfig()
    assert (c.M, c.steps, c.phi_method, c.fp_tol, c.fp_max_iter) == (100, (10, 20, 40, 80, 160, 320),
                                                                      "spectral", 1e-10, 100)
    c4 = RunConfig(example=4)
    assert (c4.M, c4.steps, c4.epsilon) == (80, (10, 20, 40, 80), 0.01)


@pytest.mark.parametrize(
    "kwargs",
    [dict(example=5), dict(steps=(20, 10)), dict(steps=(10, 10)), dict(steps=()), dict(steps=(0, 10)),
     dict(M=2), dict(M=10.5), dict(phi_method="pade"), dict(table="plots"), dict(epsilon=0.0),
     dict(fp_tol=0.0), dict(fp_max_iter=0), dict(krylov_dim=0), dict(krylov_tol=-1.0)],
)
def test_config_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        RunConfig(**kwargs)


# ---- run_suite output -------------------------------------------------------

def test_csv_header_exact():
    assert ",".join(CSV_COLUMNS) == HEADER
    res = run_suite(RunConfig(example=1, M=20, steps=(4, 8)))
    assert res.csv.split("\n")[0] == HEADER


def test_csv_shape_and_orders():
    res = run_suite(RunConfig(example=2, M=20, steps=(4, 8, 16)))
    rows = list(csv.DictReader(io.StringIO(res.csv)))
    assert [r["N"] for r in rows] == ["4", "8", "16"]
    assert rows[0]["order_ET"] == ""
    ET = [float(r["E_T"]) for r in rows]
    assert float(rows[2]["order_ET"]) == pytest.approx(convergence_order(ET[1:], [8, 16])[0], rel=1e-15)
    assert all(float(r["lower"]) <= float(r["upper"]) for r in rows)
    assert "\r" not in res.csv and res.csv.endswith("\n")


def test_csv_is_byte_identical_across_invocations():
    cfg = RunConfig(example=3, M=30, steps=(5, 10, 20))
    assert run_suite(cfg).csv == run_suite(cfg).csv


def test_csv_full_precision_roundtrips(suite):
    res = suite(1)
    rows = list(csv.DictReader(io.StringIO(res.csv)))
    for rep, row in zip(res.reports, rows):
        assert float(row["E_T"]) == rep.E_T
        assert float(row["ei_U"]) == rep.ei_U


def test_text_table_labels_and_precision():
    t3 = run_suite(RunConfig(example=3, M=20, steps=(4, 8))).text
    assert "est_B" in t3 and "est_f" not in t3
    t1 = run_suite(RunConfig(example=1, M=20, steps=(4, 8), table="errors")).text
    assert "E_T" in t1 and "est_U" not in t1 and "ei_U" not in t1
    # five significant digits in e-notation
    assert any(tok.count("e-") == 1 and len(tok.split("e")[0].replace(".", "")) == 5
               for tok in t1.split())


def test_example4_reference_shared(suite):
    res = suite(4)
    assert [r.N for r in res.reports] == [10, 20, 40, 80]
    assert all(r.E_T > 0 for r in res.reports)


def test_krylov_path_matches_spectral():
    a = run_suite(RunConfig(example=1, M=40, steps=(10, 20), phi_method="krylov"))
    b = run_suite(RunConfig(example=1, M=40, steps=(10, 20), phi_method="spectral"))
    for ra, rb in zip(a.reports, b.reports):
        assert ra.phi_method == "krylov"
        assert ra.E_T == pytest.approx(rb.E_T, rel=1e-6)
        assert ra.estU == pytest.approx(rb.estU, rel=1e-6)


def test_failed_run_carries_metadata():
    with pytest.raises(RunFailure) as info:
        run_suite(RunConfig(example=3, M=30, steps=(5, 10), fp_max_iter=1))
    assert (info.value.example, info.value.M, info.value.N) == (3, 30, 5)
    assert "N=5" in str(info.value)


# ---- published rows ---------------------------------------------------------

def test_example1_N40_effectivity(suite):
    r = suite(1, (40,)).reports[0]
    assert r.ei_L == pytest.approx(0.2116, abs=1e-2)
    assert r.ei_U == pytest.approx(2.9016, abs=1e-2)


def test_example3_N80_est_B(suite):
    assert suite(3, (80,)).reports[0].estFB == pytest.approx(2.7086e-05, rel=2e-2)


def test_example2_N10_upper(suite):
    assert suite(2, (10,)).reports[0].upper == pytest.approx(1.5295e-02, rel=1e-2)


# ---- main -------------------------------------------------------------------

def test_parser_flags():
    a = build_parser().parse_args(
        ["--example", "4", "--space", "40", "--steps", "10,20", "--phi-method", "krylov",
         "--krylov-dim", "60", "--krylov-tol", "1e-10", "--fp-tol", "1e-9", "--fp-max-iter", "30",
         "--epsilon", "0.02", "--table", "errors", "--out", "x.csv"])
    assert (a.example, a.space, a.steps, a.phi_method, a.krylov_dim, a.krylov_tol, a.fp_tol,
            a.fp_max_iter, a.epsilon, a.table, a.out) == (4, 40, (10, 20), "krylov", 60, 1e-10, 1e-9,
                                                         30, 0.02, "errors", "x.csv")


def test_main_writes_csv(tmp_path, capsys):
    out = tmp_path / "ex2.csv"
    assert main(["--example", "2", "--space", "20", "--steps", "4,8", "--out", str(out)]) == 0
    assert "E_T" in capsys.readouterr().out
    data = out.read_bytes()
    assert data.startswith(HEADER.encode() + b"\n")
    assert data.count(b"\n") == 3


def test_main_csv_to_stdout(capsys):
    assert main(["--example", "1", "--space", "20", "--steps", "4,8", "--out", "-"]) == 0
    assert capsys.readouterr().out.startswith(HEADER + "\n")


def test_main_nonzero_on_failed_run(capsys):
    assert main(["--example", "3", "--space", "30", "--steps", "5", "--fp-max-iter", "1"]) != 0
    assert "N=5" in capsys.readouterr().err


def test_main_nonzero_on_bad_config(capsys):
    assert main(["--steps", "20,10"]) != 0
    assert "increasing" in capsys.readouterr().err


def test_main_nonzero_on_unwritable_output(tmp_path):
    assert main(["--space", "20", "--steps", "4", "--out", str(tmp_path / "no" / "x.csv")]) != 0
