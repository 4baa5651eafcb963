"""The verification battery run by ``northpole verify``.

Three kinds of checks:

* deterministic: the block identities for U_2 and U_3 and the
  orthogonality defect of every emitted matrix (no slack);
* distributional: KS tests at level ``alpha`` with one retry on fresh
  draws, so a correct build fails a given test with probability about
  ``alpha**2``;
* moments and the large-p normal limit, judged against fixed bounds.

Components (the QR sampler and the U_2 / U_3 kernels) can be swapped for
the broken versions in :mod:`northpole.fixtures` to confirm the battery
catches them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import fixtures
from .densities import beta_cdf_g0, cdf_f, sample_f
from .haar import DECOMPOSITION, QR, decompose_gamma, haar_batches, sample_haar_qr
from .linalg import dot, sample_uniform_sphere
from .mc import CLT_SMOKE_BOUND, clt_check, estimate_mean, ks_with_retry, one_sample_ks, two_sample_ks
from .pole import sample_u2, sample_u3, sample_u_direct, u2_identity, u2_kernel, u3_identity, u3_kernel
from .rng import RngStream

log = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10
ORTHO_TOL = 1e-10
MOMENT_N_SE = 4.0

DENSITY_DIMS = (2, 3, 5, 10)
SPHERE_DIMS = (3, 4, 5, 10)
MARGINAL_DIMS = (3, 5, 10, 20)
CROSS_DIMS = (3, 5, 10)
IDENTITY_DIMS = tuple(range(3, 13))
CLT_DIM = 400


@dataclass
class Components:
    haar_qr: Callable = sample_haar_qr
    u2_kernel: Callable = u2_kernel
    u3_kernel: Callable = u3_kernel

    @classmethod
    def mutant(cls, name):
        try:
            return cls(**fixtures.MUTANTS[name])
        except KeyError:
            raise ValueError(f"unknown mutant {name!r}; choose from {sorted(fixtures.MUTANTS)}") from None


@dataclass
class CheckResult:
    name: str
    kind: str
    passed: bool
    value: float
    threshold: float
    attempts: int = 1
    detail: dict = field(default_factory=dict)


@dataclass
class BatteryReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def get(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self):
        return {
            "passed": self.passed,
            "failures": self.failures,
            "checks": [asdict(c) for c in self.checks],
        }


class Battery:
    """Runs check groups against one master stream, caching shared Haar draws.

    Parameters
    ----------
    rng : RngStream
    n : int
        Sample size per side for KS checks.
    alpha : float
    components : Components, optional
    """

    def __init__(self, rng, n=100_000, alpha=0.001, components=None):
        self.rng = rng
        self.n = int(n)
        self.alpha = alpha
        self.components = components or Components()
        self.report = BatteryReport()
        self._haar_cache = {}
        self._defects = {}

    def _add(self, result):
        log.info("%-40s %s  value=%.3g threshold=%.3g", result.name, "PASS" if result.passed else "FAIL",
                 result.value, result.threshold)
        self.report.checks.append(result)
        return result

    def _ks(self, name, check):
        report, attempts = ks_with_retry(check)
        return self._add(CheckResult(
            name, "ks", report.passed, report.statistic, report.critical, attempts,
            {"n": report.n, "m": report.m, "alpha": report.alpha},
        ))

    def _sampler(self, method):
        return self.components.haar_qr if method == QR else None

    def haar_functionals(self, method, p, attempt):
        """U_1, U_2, U_3 over ``n`` Haar draws; memoized per (method, p, attempt)."""
        key = (method, p, attempt)
        if key not in self._haar_cache:
            stream = self.rng.child(f"haar:{method}:{p}", attempt)
            out = sample_u_direct((1, 2, 3), p, self.n, stream, method=method, sampler=self._sampler(method))
            self._record_defect(method, p, out["defect"])
            self._haar_cache[key] = out
        return self._haar_cache[key]

    def _record_defect(self, method, p, defect):
        key = (method, p)
        self._defects[key] = max(self._defects.get(key, 0.0), defect)

    # -- check groups -------------------------------------------------

    def density_checks(self, dims=DENSITY_DIMS):
        for p in dims:
            def law(attempt, p=p):
                xs = sample_f(p, self.rng.child(f"density:{p}", attempt), self.n)
                return one_sample_ks(xs, lambda x: cdf_f(x, p), self.alpha)

            def square(attempt, p=p):
                xs = sample_f(p, self.rng.child(f"density-sq:{p}", attempt), self.n)
                return one_sample_ks(xs ** 2, lambda y: beta_cdf_g0(y, p), self.alpha)

            self._ks(f"density.sample_f[p={p}]", law)
            self._ks(f"density.square_law[p={p}]", square)

    def sphere_checks(self, dims=SPHERE_DIMS):
        for p in dims:
            def dot_law(attempt, p=p):
                stream = self.rng.child(f"sphere:{p}", attempt)
                v1 = sample_uniform_sphere(p - 1, stream, self.n)
                v2 = sample_uniform_sphere(p - 1, stream, self.n)
                return one_sample_ks(dot(v1, v2), lambda x: cdf_f(x, p - 1), self.alpha)

            self._ks(f"sphere.dot_law[p={p}]", dot_law)

    def identity_checks(self, dims=IDENTITY_DIMS, n=10_000):
        """Block identities for U_2 and U_3 on ``n`` draws per sampler per p."""
        for p in dims:
            err2 = err3 = 0.0
            for method in (QR, DECOMPOSITION):
                stream = self.rng.child(f"identity:{method}", p)
                for gs in haar_batches(p, n, stream, method=method, sampler=self._sampler(method)):
                    part = decompose_gamma(gs)
                    g2 = gs @ gs
                    g3 = g2 @ gs
                    err2 = max(err2, float(np.max(np.abs(g2[:, 0, 0] - u2_identity(part)))))
                    err3 = max(err3, float(np.max(np.abs(g3[:, 0, 0] - u3_identity(part)))))
            self._add(CheckResult(f"identity.u2[p={p}]", "identity", err2 <= IDENTITY_TOL, err2, IDENTITY_TOL,
                                  detail={"draws": 2 * n}))
            self._add(CheckResult(f"identity.u3[p={p}]", "identity", err3 <= IDENTITY_TOL, err3, IDENTITY_TOL,
                                  detail={"draws": 2 * n}))

    def marginal_checks(self, dims=MARGINAL_DIMS):
        for method in (QR, DECOMPOSITION):
            for p in dims:
                def law(attempt, p=p, method=method):
                    g11 = self.haar_functionals(method, p, attempt)[1]
                    return one_sample_ks(g11, lambda x: cdf_f(x, p), self.alpha)

                def square(attempt, p=p, method=method):
                    g11 = self.haar_functionals(method, p, attempt)[1]
                    return one_sample_ks(g11 ** 2, lambda y: beta_cdf_g0(y, p), self.alpha)

                self._ks(f"marginal.{method}.g11[p={p}]", law)
                self._ks(f"marginal.{method}.g11_squared[p={p}]", square)

    def cross_sampler_checks(self, dims=CROSS_DIMS):
        for p in dims:
            for k in (1, 2, 3):
                def agree(attempt, p=p, k=k):
                    a = self.haar_functionals(QR, p, attempt)[k]
                    b = self.haar_functionals(DECOMPOSITION, p, attempt)[k]
                    return two_sample_ks(a, b, self.alpha)

                self._ks(f"cross_sampler.u{k}[p={p}]", agree)

    def representation_checks(self, dims=CROSS_DIMS, ks=(2, 3)):
        for p in dims:
            for k in ks:
                def agree(attempt, p=p, k=k):
                    exact = self._exact(k, p, self.n, self.rng.child(f"exact:{k}:{p}", attempt))
                    direct = self.haar_functionals(QR, p, attempt)[k]
                    return two_sample_ks(exact, direct, self.alpha)

                self._ks(f"representation.u{k}[p={p}]", agree)

    def _exact(self, k, p, n, stream):
        if k == 2:
            return sample_u2(p, stream, n, kernel=self.components.u2_kernel)
        return sample_u3(p, stream, n, kernel=self.components.u3_kernel)

    def moment_checks(self, dims=CROSS_DIMS, n=None):
        """E U_2 = 1/p and E U_3 = 0 within 4 standard errors."""
        n = self.n if n is None else int(n)
        for p in dims:
            for k, target in ((2, 1.0 / p), (3, 0.0)):
                stream = self.rng.child(f"moment:{k}", p)
                est = estimate_mean(lambda size: self._exact(k, p, size, stream), n)
                z = abs(est.mean - target) / est.std_error if est.std_error > 0 else math.inf
                self._add(CheckResult(
                    f"moment.mean_u{k}[p={p}]", "moment", est.within(target, MOMENT_N_SE), z, MOMENT_N_SE,
                    detail={"mean": est.mean, "std_error": est.std_error, "target": target, "n": est.n},
                ))

    def clt_checks(self, p=CLT_DIM, ks=(2, 3)):
        for k in ks:
            report = clt_check(p, k, self.n, self.rng.child(f"clt:{k}", p), self.alpha)
            self._add(CheckResult(f"clt.u{k}[p={p}]", "clt", report.statistic <= CLT_SMOKE_BOUND,
                                  report.statistic, CLT_SMOKE_BOUND, detail={"n": report.n}))

    def orthogonality_checks(self):
        for (method, p), defect in sorted(self._defects.items()):
            self._add(CheckResult(f"orthogonality.{method}[p={p}]", "orthogonality", defect <= ORTHO_TOL,
                                  defect, ORTHO_TOL))

    def run_all(self, identity_n=10_000):
        self.density_checks()
        self.sphere_checks()
        self.identity_checks(n=identity_n)
        self.marginal_checks()
        self.cross_sampler_checks()
        self.representation_checks()
        self.moment_checks()
        self.clt_checks()
        self.orthogonality_checks()
        return self.report


def run_battery(seed, n=100_000, alpha=0.001, components=None, identity_n=10_000):
    """Run every check group from a master seed and return the report."""
    battery = Battery(RngStream(seed).child("verify"), n=n, alpha=alpha, components=components)
    return battery.run_all(identity_n=identity_n)
