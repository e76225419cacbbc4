"""Builders for signal and resource states: maximally entangled pairs,
teleportation signal states, and their partially symmetrized variants."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from portclone.symmetry import (
    OrderedPorts,
    PortSet,
    port_label,
    sym_dim,
    symmetric_projector,
)
from portclone.tensor_core import (
    LabeledOperator,
    SubsystemLayout,
    hermitian_eig,
    identity,
    kron_compose,
)

PSD_TOL = 1e-10
TRACE_TOL = 1e-10
PRIOR_TOL = 1e-12


def input_label(k: int | None = None) -> str:
    """Label of the sender's input slot (X, or X1..XM for multi-slot input)."""
    return "X" if k is None else f"X{k}"


def pbt_layout(N: int, d: int) -> SubsystemLayout:
    """Canonical layout [X, A1..AN]."""
    return SubsystemLayout(
        [input_label()] + [port_label(i) for i in range(1, N + 1)], [d] * (N + 1)
    )


def mpbt_layout(N: int, M: int, d: int) -> SubsystemLayout:
    """Canonical layout [X1..XM, A1..AN]."""
    labels = [input_label(k) for k in range(1, M + 1)]
    labels += [port_label(i) for i in range(1, N + 1)]
    return SubsystemLayout(labels, [d] * (M + N))


def max_entangled(d: int, label_a: str, label_b: str) -> LabeledOperator:
    """Density operator of |Phi+> = d^{-1/2} sum_i |ii> on two labeled qudits."""
    vec = np.zeros(d * d, dtype=complex)
    vec[np.arange(d) * d + np.arange(d)] = 1.0 / np.sqrt(d)
    return LabeledOperator(
        SubsystemLayout([label_a, label_b], [d, d]), np.outer(vec, vec.conj())
    )


def maximally_mixed(labels: Sequence[str], d: int) -> LabeledOperator:
    layout = SubsystemLayout(labels, [d] * len(labels))
    return LabeledOperator(layout, np.eye(layout.dim) / layout.dim)


@lru_cache(maxsize=None)
def pbt_signal(i: int, N: int, d: int) -> LabeledOperator:
    """Signal state for outcome i: Phi+ on (X, A_i), maximally mixed elsewhere."""
    if not 1 <= i <= N:
        raise ValueError(f"port index {i} out of range 1..{N}")
    factors = [max_entangled(d, input_label(), port_label(i))]
    rest = [port_label(j) for j in range(1, N + 1) if j != i]
    if rest:
        factors.append(maximally_mixed(rest, d))
    return kron_compose(factors).permute_subsystems(pbt_layout(N, d).labels)


@lru_cache(maxsize=None)
def mpbt_signal(J: OrderedPorts, N: int, d: int) -> LabeledOperator:
    """Signal state for ordered outcome J: Phi+ on each (X_k, A_{j_k})."""
    if J.N != N:
        raise ValueError(f"port tuple defined for N={J.N}, expected {N}")
    M = J.M
    factors = [
        max_entangled(d, input_label(k), port_label(j))
        for k, j in enumerate(J, start=1)
    ]
    rest = [port_label(i) for i in range(1, N + 1) if i not in set(J.elements)]
    if rest:
        factors.append(maximally_mixed(rest, d))
    return kron_compose(factors).permute_subsystems(mpbt_layout(N, M, d).labels)


@lru_cache(maxsize=None)
def pbtc_signal(I: PortSet, N: int, d: int, representative: int | None = None) -> LabeledOperator:
    """Partially symmetrized signal state (d^M / d[M]) Pi_I rho^{i1} Pi_I.

    The result does not depend on which element of I is used as the
    representative; `representative` exists so tests can verify that.
    """
    if I.N != N:
        raise ValueError(f"port set defined for N={I.N}, expected {N}")
    i1 = I.smallest if representative is None else representative
    if i1 not in I:
        raise ValueError(f"representative {i1} not in port set {I.elements}")
    rho = pbt_signal(i1, N, d)
    if I.M == 1:
        return rho  # projector is the identity and the prefactor is 1
    pi = symmetric_projector(I, d, rho.layout)
    scale = d**I.M / sym_dim(d, I.M)
    return scale * (pi @ rho @ pi)


@dataclass(frozen=True)
class Ensemble:
    """Prior-weighted family of density operators on one shared layout."""

    items: tuple[tuple[float, LabeledOperator], ...]
    keys: tuple | None = None

    def __post_init__(self):
        if not self.items:
            raise ValueError("ensemble must be nonempty")
        if self.keys is not None and len(self.keys) != len(self.items):
            raise ValueError("keys/items length mismatch")
        layout = self.items[0][1].layout
        total = 0.0
        for p, state in self.items:
            if p < 0:
                raise ValueError(f"negative prior {p}")
            if state.layout.labels != layout.labels:
                raise ValueError("ensemble states must share one layout")
            total += p
        if abs(total - 1.0) > PRIOR_TOL:
            raise ValueError(f"priors sum to {total}, not 1")

    @property
    def layout(self) -> SubsystemLayout:
        return self.items[0][1].layout

    def __len__(self) -> int:
        return len(self.items)

    def validate_states(self, psd_tol: float = PSD_TOL, trace_tol: float = TRACE_TOL):
        """Eigenvalue-level check that each member is PSD with unit trace."""
        for p, state in self.items:
            tr = state.trace()
            if abs(tr - 1.0) > trace_tol:
                raise ValueError(f"ensemble state trace {tr} differs from 1")
            lam_min = hermitian_eig(state).eigenvalues.min()
            if lam_min < -psd_tol:
                raise ValueError(f"ensemble state has negative eigenvalue {lam_min:.3e}")


def uniform_ensemble(states: Sequence[LabeledOperator], keys: Sequence | None = None) -> Ensemble:
    p = 1.0 / len(states)
    return Ensemble(
        tuple((p, s) for s in states), None if keys is None else tuple(keys)
    )


def ensemble_average(e: Ensemble) -> LabeledOperator:
    """Prior-weighted average state."""
    acc = np.zeros((e.layout.dim, e.layout.dim), dtype=complex)
    for p, state in e.items:
        acc += p * state.entries
    return LabeledOperator(e.layout, acc)


def pbt_ensemble(N: int, d: int) -> Ensemble:
    return uniform_ensemble(
        [pbt_signal(i, N, d) for i in range(1, N + 1)],
        keys=[PortSet((i,), N) for i in range(1, N + 1)],
    )


def pbtc_ensemble(N: int, M: int, d: int) -> Ensemble:
    from portclone.symmetry import enumerate_unordered

    outcomes = enumerate_unordered(N, M)
    return uniform_ensemble([pbtc_signal(I, N, d) for I in outcomes], keys=outcomes)


def mpbt_ensemble(N: int, M: int, d: int) -> Ensemble:
    from portclone.symmetry import enumerate_ordered

    outcomes = enumerate_ordered(N, M)
    return uniform_ensemble([mpbt_signal(J, N, d) for J in outcomes], keys=outcomes)
