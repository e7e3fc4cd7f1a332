import numpy as np
import pytest

from optocoherence.model import SystemParams, solve_steady_state, stability_routh_hurwitz

FIG1 = dict(gamma_m=0.01, kappa=0.1, delta0=1.0, n_th=10.0)


@pytest.fixture
def fig1():
    return SystemParams(g0=1e-4, drive_e=500.0, **FIG1)


def fixed_point_photon_number(params, relax=0.5, tol=1e-15, max_iter=100_000):
    """Damped iteration n <- E^2 / (kappa^2 + (delta0 - g0^2 n)^2) from n = 0."""
    n = 0.0
    for _ in range(max_iter):
        target = params.drive_e ** 2 / (params.kappa ** 2 + (params.delta0 - params.g0 ** 2 * n) ** 2)
        new = (1 - relax) * n + relax * target
        if abs(new - n) <= tol * max(1.0, new):
            return new
        n = new
    raise RuntimeError("fixed-point iteration did not converge")


def random_params(rng, lock=False, n_th_min=0.0):
    return SystemParams(
        gamma_m=10 ** rng.uniform(-3, -1),
        kappa=10 ** rng.uniform(-2, 0.5),
        delta0=rng.uniform(-2, 2),
        g0=10 ** rng.uniform(-5, -2.5),
        drive_e=rng.uniform(0, 1000),
        n_th=rng.uniform(n_th_min, 50),
        lock_detuning=lock,
    )


def marginal_drive(base, lo, hi, which=1, iters=200):
    """Bisect the drive between a stable ``lo`` and unstable ``hi`` until a margin hits 0."""
    def margin(e):
        p = base.replace(drive_e=e)
        return stability_routh_hurwitz(p, solve_steady_state(p)).margins[which]

    assert margin(lo) > 0 > margin(hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        m = margin(mid)
        if abs(m) <= 1e-10:
            return mid
        lo, hi = (mid, hi) if m > 0 else (lo, mid)
    return 0.5 * (lo + hi)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
