"""Solver configuration: every scalar knob the iterations depend on."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .algebra import mode_pairs

BETA_SUM_TOL = 1e-12


@dataclass
class SolverConfig:
    """Shared knob set for the completion and robust-PCA solvers.

    ``beta`` holds one non-negative weight per mode pair in lexicographic
    order, summing to one; ``None`` means uniform.  Pairs with zero weight
    are dropped from the model entirely.  ``gamma1`` ties the non-convex
    block's proximal scalar to the constraint penalty, ``rho1 = gamma1 * mu``,
    and must exceed one.  ``growth`` rescales ``mu``, ``rho`` (and the
    robust-PCA residual penalty) every sweep; set it to 1.0 to freeze the
    penalties, e.g. when checking descent.  ``tau1``/``tau2`` weight the
    sparse and Gaussian terms of the robust-PCA model; when ``None`` they
    default to ``tau1_scale / sqrt(max(I1, I2) * prod(rest))`` and
    ``10 * tau1``.
    """

    gamma: float = 1e4
    epsilon: float = 0.01
    beta: tuple | None = None
    mu0: float = 1e-3
    rho0: float = 1e-2
    gamma1: float = 1.1
    growth: float = 1.05
    tol: float = 1e-5
    max_iter: int = 500
    penalty_tau: float = 1e-3
    tau1: float | None = None
    tau1_scale: float = 1.0
    tau2: float | None = None
    strict_prox: bool = False

    def validate(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.mu0 <= 0:
            raise ValueError(f"mu0 must be positive, got {self.mu0}")
        if self.rho0 <= 0:
            raise ValueError(f"rho0 must be positive, got {self.rho0}")
        if self.gamma1 <= 1:
            raise ValueError(f"gamma1 must exceed 1, got {self.gamma1}")
        if self.growth < 1:
            raise ValueError(f"growth must be >= 1, got {self.growth}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 0:
            raise ValueError(f"max_iter must be non-negative, got {self.max_iter}")
        if self.penalty_tau <= 0:
            raise ValueError(f"penalty_tau must be positive, got {self.penalty_tau}")
        for name in ("tau1", "tau2"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")
        if self.tau1_scale <= 0:
            raise ValueError(f"tau1_scale must be positive, got {self.tau1_scale}")
        if self.beta is not None:
            beta = np.asarray(self.beta, dtype=float)
            if np.any(beta < 0):
                raise ValueError("beta weights must be non-negative")
            if abs(beta.sum() - 1.0) > BETA_SUM_TOL:
                raise ValueError(f"beta weights must sum to 1, got {beta.sum()!r}")
        return self

    def pair_weights(self, ndim):
        """Resolved (pair, weight) list for an ndim-way tensor.

        Pairs carry their lexicographic position; zero-weight pairs are
        excluded from the model.
        """
        pairs = mode_pairs(ndim)
        if self.beta is None:
            beta = np.full(len(pairs), 1.0 / len(pairs))
        else:
            beta = np.asarray(self.beta, dtype=float)
            if beta.size != len(pairs):
                raise ValueError(
                    f"beta has {beta.size} weights but a {ndim}-way tensor has "
                    f"{len(pairs)} mode pairs"
                )
        return [(pair, float(b)) for pair, b in zip(pairs, beta) if b > 0]

    def resolve_tau(self, shape):
        """Concrete (tau1, tau2) for a given tensor shape."""
        if self.tau1 is not None:
            tau1 = self.tau1
        else:
            rest = int(np.prod(shape[2:], dtype=np.int64)) if len(shape) > 2 else 1
            tau1 = self.tau1_scale / np.sqrt(max(shape[0], shape[1]) * rest)
        tau2 = self.tau2 if self.tau2 is not None else 10.0 * tau1
        return float(tau1), float(tau2)

    def updated(self, **kwargs):
        return replace(self, **kwargs)

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(SolverConfig)}


def _parse_value(key, raw):
    raw = raw.strip()
    if key == "beta":
        return tuple(float(tok) for tok in raw.split(","))
    if key == "strict_prox":
        lowered = raw.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"cannot parse boolean config value {raw!r}")
    if key == "max_iter":
        return int(raw)
    if raw.lower() in ("none", ""):
        return None
    return float(raw)


def load_config_file(path):
    """Parse a plain ``key = value`` config file into an option dict."""
    options = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        options[key] = _parse_value(key, raw)
    return options


def build_config(file_options=None, overrides=None):
    """Layer defaults, config-file options and explicit overrides."""
    merged = {}
    for source in (file_options, overrides):
        if source:
            merged.update({k: v for k, v in source.items() if v is not None})
    return SolverConfig(**merged).validate()
