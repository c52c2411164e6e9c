#!/usr/bin/env python3
"""
System test for the random access coverage depth toolkit.
Runs the command line and the HTTP handlers end to end; `python test_system.py`
prints a summary, pytest collects the same checks.
"""

import sys
import os
import asyncio
import json
import tempfile
from pathlib import Path

import pandas as pd
import requests

# Add project root to path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

EXAMPLE_1 = "# Example 1\n2 2 5\n1 0 1 0 1\n0 1 0 1 1\n"


def test_imports():
    """Test that all modules can be imported."""
    print("🔍 Testing imports...")

    from utils.gf import build_field
    from utils.calculations import harmonic_number, lower_bounds
    from engines.codes import GeneratorMatrix
    from engines.exact import exact_expectation
    from engines.construct import construction_for
    from engines.sim import mc_tau_graph
    from engines.asym import tk_bound
    from backend.cli import main
    from backend.main import app

    print("✅ Engines, CLI and service imported successfully")


def _run_cli(*argv):
    from backend.cli import main

    return main(list(argv))


def test_cli_exact():
    """Exact expectations of Example 1 through the CLI."""
    print("\n📊 Testing exact subcommand...")

    with tempfile.TemporaryDirectory() as tmp:
        matrix = Path(tmp) / "example1.txt"
        matrix.write_text(EXAMPLE_1, encoding="utf-8")
        out = Path(tmp) / "exact.csv"

        assert _run_cli("exact", "--matrix", str(matrix), "--out", str(out)) == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["i", "expectation", "stderr", "method"]
        assert all(abs(v - 23 / 12) < 1e-14 for v in frame["expectation"])
        print(f"Example 1: E[tau_i] = {frame['expectation'][0]:.6f}")

        assert _run_cli("exact", "--matrix", str(matrix), "--alpha", "--out", str(out)) == 0
        assert list(pd.read_csv(out)["alpha"]) == [2, 9, 10, 5]

        assert _run_cli("exact", "--matrix", str(matrix), "--closed-form", "--out", str(out)) == 0
        assert pd.read_csv(out)["method"][0] == "closed_form_k2"

    print("✅ exact subcommand matches 23/12")


def test_cli_construct():
    """Construct, verify and reload G_3(2, 1)."""
    print("\n🏗️ Testing construct subcommand...")
    from engines.codes import read_matrix
    from engines.construct import verify_recovery_complete

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "g3.txt"
        assert _run_cli("construct", "--construction", "3,2,1", "--out", str(out)) == 0
        sidecar = json.loads(Path(f"{out}.json").read_text(encoding="utf-8"))
        assert (sidecar["k"], sidecar["x"], sidecar["y"]) == (3, 2, 1)
        assert len(sidecar["exponents"]) == 6
        G = read_matrix(out)
        assert G.n == 9 and G.q == sidecar["q"]
        assert verify_recovery_complete(G).complete

        closed = Path(tmp) / "closed.csv"
        brute = Path(tmp) / "brute.csv"
        assert _run_cli("exact", "--construction", "3,2,1", "--closed-form", "--out", str(closed)) == 0
        assert _run_cli("exact", "--matrix", str(out), "--out", str(brute)) == 0
        difference = pd.read_csv(closed)["expectation"] - pd.read_csv(brute)["expectation"]
        assert difference.abs().max() < 1e-12

    print(f"✅ G_3(2,1) over GF({sidecar['q']}) is recovery complete")


def test_cli_exit_codes():
    """Errors map to their exit codes."""
    print("\n🚦 Testing exit codes...")

    with tempfile.TemporaryDirectory() as tmp:
        missing = str(Path(tmp) / "missing.txt")
        assert _run_cli("exact", "--matrix", missing) == 2
        assert _run_cli("exact") == 2
        assert _run_cli("exact", "--construction", "4,3,3") == 3
        assert _run_cli("asymptotic", "--k", "4", "--p", "0.2", "--P", "0.2") == 2

    print("✅ input errors exit 2, guards exit 3")


def test_cli_sweeps_match_golden():
    """Figure sweeps reproduce the vendored values."""
    print("\n📈 Testing figure sweeps...")
    from backend.data.figure_grids import load_golden

    with tempfile.TemporaryDirectory() as tmp:
        for name, tolerance in (("fig_tq2", 1e-12), ("fig_ubfin", 1e-9)):
            out = Path(tmp) / f"{name}.csv"
            assert _run_cli("sweep", "--figure", name, "--out", str(out)) == 0
            swept, golden = pd.read_csv(out), load_golden(name)
            assert list(swept.columns) == list(golden.columns)
            assert len(swept) == len(golden)
            worst = (swept["normalized"] - golden["normalized"]).abs().max()
            assert worst < tolerance
            print(f"{name}: {len(swept)} rows, worst deviation {worst:.2e}")

    print("✅ sweeps match the golden tables")


def test_cli_bounds_and_optimizer():
    """Asymptotic bound and the (p, P) optimizer through the CLI."""
    print("\n🧮 Testing asymptotic and optimize subcommands...")

    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "bound.csv"
        assert _run_cli("asymptotic", "--k", "4", "--p", "0.1", "--P", "0.1", "--out", str(out)) == 0
        assert abs(pd.read_csv(out)["total"][0] - 3.455159) < 1e-6

        assert _run_cli("asymptotic", "--ubfin", "--k-range", "3:6", "--out", str(out)) == 0
        assert list(pd.read_csv(out)["k"]) == [3, 4, 5, 6]

        assert _run_cli("optimize", "--k", "2", "--objective", "pP", "--out", str(out)) == 0
        assert abs(pd.read_csv(out)["value"][0] - (2 * 2 ** 0.5 - 1)) < 1e-9

        assert _run_cli("optimize", "--k", "3", "--objective", "exact3", "--out", str(out)) == 0
        assert abs(pd.read_csv(out)["alpha"][0] - 0.833968) < 1e-4

    print("✅ bounds and optimizers agree with the known optima")


def test_cli_simulate():
    """Seeded graph-model simulation is reproducible."""
    print("\n🎲 Testing simulate subcommand...")

    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "a.csv", Path(tmp) / "b.csv"
        args = ["simulate", "--graph", "2,0,0.5", "--trials", "4000", "--seed", "7"]
        assert _run_cli(*args, "--out", str(first)) == 0
        assert _run_cli(*args, "--out", str(second)) == 0
        a, b = pd.read_csv(first), pd.read_csv(second)
        assert a.equals(b)
        assert abs(a["mean"][0] - 2.0) <= 4 * a["stderr"][0]
        print(f"Vertex-only k=2: mean {a['mean'][0]:.4f} ± {a['stderr'][0]:.4f}")

    print("✅ simulate is seeded and unbiased")


def test_service_handlers():
    """Call the FastAPI handlers directly."""
    print("\n🌐 Testing service handlers...")
    from fastapi import HTTPException

    from backend.main import (
        AsymptoticRequest,
        ConstructionRequest,
        ExactRequest,
        GraphRequest,
        SimulateRequest,
        asymptotic,
        construct,
        exact,
        figure,
        health_check,
        simulate,
    )

    assert asyncio.run(health_check())["status"] == "healthy"

    response = exact(ExactRequest(matrix=EXAMPLE_1))
    assert response.exact == ["23/12", "23/12"]

    built = construct(ConstructionRequest(k=4, x=1, y=1))
    assert built["certificate"]["complete"] and built["n"] == 10

    bound = asymptotic(AsymptoticRequest(k=4, alpha=0.95))
    assert abs(bound["normalized"] - 0.86375) < 5e-5

    simulated = simulate(SimulateRequest(graph=GraphRequest(k=2, p=0.0, P=0.5), trials=2000, seed=3))
    assert simulated.method == "monte_carlo" and simulated.trials == 2000

    assert len(figure("fig_ubfin")) == 198

    for call, status in (
        (lambda: figure("fig_nope"), 404),
        (lambda: exact(ExactRequest(construction=ConstructionRequest(k=4, x=3, y=3))), 413),
        (lambda: exact(ExactRequest()), 422),
    ):
        try:
            call()
        except HTTPException as e:
            assert e.status_code == status
        else:
            raise AssertionError(f"expected HTTP {status}")

    print("✅ handlers return the documented payloads and status codes")


def check_running_service():
    """Probe a running service on localhost:8000 (optional)."""
    print("\n🔌 Testing running service...")

    try:
        response = requests.get("http://localhost:8000/health", timeout=5)
        if response.status_code == 200:
            print("Service is running and healthy")
            return True
        print("Service responded but not healthy")
        return False
    except requests.exceptions.ConnectionError:
        print("Service not running (start with: python start.py serve)")
        return False
    except Exception as e:
        print(f"Error testing service: {e}")
        return False


def main():
    """Run all checks and print a summary."""
    print("Random Access Coverage Depth - System Test")
    print("=" * 60)

    tests = [
        ("Imports", test_imports),
        ("Exact", test_cli_exact),
        ("Construct", test_cli_construct),
        ("Exit codes", test_cli_exit_codes),
        ("Sweeps", test_cli_sweeps_match_golden),
        ("Bounds", test_cli_bounds_and_optimizer),
        ("Simulate", test_cli_simulate),
        ("Service handlers", test_service_handlers),
    ]

    results = []

    for test_name, test_func in tests:
        try:
            test_func()
            results.append((test_name, True))
        except Exception as e:
            print(f"❌ {test_name} test failed: {e!r}")
            results.append((test_name, False))

    service_up = check_running_service()

    # Summary
    print("\n" + "=" * 60)
    print("Test Summary:")

    passed = 0
    total = len(results)

    for test_name, result in results:
        status = "PASS" if result else "❌ FAIL"
        print(f"  {test_name}: {status}")
        if result:
            passed += 1
    print(f"  Running service: {'PASS' if service_up else 'not running'}")

    print(f"\nResults: {passed}/{total} tests passed")

    if passed == total:
        print(" All checks passed.")
        print("\nTo compute something:")
        print("   python start.py exact --matrix FILE")
        return 0
    print("Some checks failed. Please check the errors above.")
    print("\nTroubleshooting:")
    print("   1. Install dependencies: pip install -r requirements.txt")
    print("   2. Run the unit tests: pytest")
    return 1


if __name__ == "__main__":
    sys.exit(main())
