"""Dense operator algebra over labeled multi-qudit Hilbert spaces."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_DIM_CAP = 8192

HERMITIAN_RTOL = 1e-12
EIG_RECON_TOL = 1e-10
PSD_NEG_RTOL = 1e-10
PINV_CUTOFF = 1e-10


def dim_cap() -> int:
    """Active total-dimension cap (env PORTCLONE_DIM_CAP overrides the default)."""
    raw = os.environ.get("PORTCLONE_DIM_CAP")
    if raw is None:
        return DEFAULT_DIM_CAP
    return int(raw)


class DimensionCapError(ValueError):
    pass


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered list of distinct subsystem labels with their local dimensions."""

    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __init__(self, labels: Sequence[str], dims: Sequence[int], cap: int | None = None):
        labels = tuple(labels)
        dims = tuple(int(d) for d in dims)
        if len(labels) != len(dims):
            raise ValueError(f"{len(labels)} labels but {len(dims)} dimensions")
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValueError(f"duplicate subsystem labels: {dupes}")
        if any(d < 2 for d in dims):
            raise ValueError(f"local dimensions must be >= 2, got {dims}")
        total = 1
        for d in dims:
            total *= d
        effective_cap = dim_cap() if cap is None else cap
        if total > effective_cap:
            raise DimensionCapError(
                f"total dimension {total} exceeds cap {effective_cap} "
                f"(set PORTCLONE_DIM_CAP to raise it)"
            )
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_subsystems(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}; have {list(self.labels)}")

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def restricted(self, keep: Sequence[str]) -> "SubsystemLayout":
        """Sub-layout of `keep` labels in this layout's relative order."""
        keep_set = set(keep)
        labels = [l for l in self.labels if l in keep_set]
        dims = [self.dim_of(l) for l in labels]
        return SubsystemLayout(labels, dims)


class LabeledOperator:
    """Dense complex square matrix over the subsystems of a layout.

    Entries are stored read-only; all operations return fresh instances.
    """

    def __init__(self, layout: SubsystemLayout, entries: np.ndarray):
        entries = np.asarray(entries, dtype=complex)
        if entries.shape != (layout.dim, layout.dim):
            raise ValueError(
                f"entries shape {entries.shape} does not match layout dimension {layout.dim}"
            )
        entries = entries.copy()
        entries.setflags(write=False)
        self.layout = layout
        self.entries = entries

    @property
    def dim(self) -> int:
        return self.layout.dim

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def dagger(self) -> "LabeledOperator":
        return LabeledOperator(self.layout, self.entries.conj().T)

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        scale = max(np.abs(self.entries).max(), 1e-300)
        return np.abs(self.entries - self.entries.conj().T).max() <= rtol * scale

    def require_hermitian(self, rtol: float = HERMITIAN_RTOL) -> None:
        if not self.is_hermitian(rtol):
            dev = np.abs(self.entries - self.entries.conj().T).max()
            raise ValueError(f"operator is not Hermitian (max |A - A^dag| = {dev:.3e})")

    def __matmul__(self, other: "LabeledOperator") -> "LabeledOperator":
        if self.layout.labels != other.layout.labels:
            raise ValueError(
                f"layout mismatch: {self.layout.labels} vs {other.layout.labels}"
            )
        return LabeledOperator(self.layout, self.entries @ other.entries)

    def __add__(self, other: "LabeledOperator") -> "LabeledOperator":
        if self.layout.labels != other.layout.labels:
            raise ValueError("layout mismatch in addition")
        return LabeledOperator(self.layout, self.entries + other.entries)

    def __sub__(self, other: "LabeledOperator") -> "LabeledOperator":
        if self.layout.labels != other.layout.labels:
            raise ValueError("layout mismatch in subtraction")
        return LabeledOperator(self.layout, self.entries - other.entries)

    def __mul__(self, scalar: complex) -> "LabeledOperator":
        return LabeledOperator(self.layout, self.entries * scalar)

    __rmul__ = __mul__

    def relabel(self, mapping: Mapping[str, str]) -> "LabeledOperator":
        """Rename subsystems without touching entries."""
        labels = [mapping.get(l, l) for l in self.layout.labels]
        return LabeledOperator(SubsystemLayout(labels, self.layout.dims), self.entries)

    def permute_subsystems(self, new_labels: Sequence[str]) -> "LabeledOperator":
        """Reorder the tensor factors to `new_labels` (same label set)."""
        if sorted(new_labels) != sorted(self.layout.labels):
            raise ValueError(
                f"permutation {list(new_labels)} is not over labels {list(self.layout.labels)}"
            )
        n = self.layout.n_subsystems
        perm = [self.layout.index(l) for l in new_labels]
        tensor = self.entries.reshape(self.layout.dims + self.layout.dims)
        tensor = tensor.transpose(perm + [p + n for p in perm])
        new_dims = [self.layout.dims[p] for p in perm]
        new_layout = SubsystemLayout(new_labels, new_dims)
        d = new_layout.dim
        return LabeledOperator(new_layout, tensor.reshape(d, d))

    def __repr__(self) -> str:
        return f"LabeledOperator(labels={self.layout.labels}, dim={self.dim})"


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def identity(layout: SubsystemLayout) -> LabeledOperator:
    return LabeledOperator(layout, np.eye(layout.dim))


def kron_compose(ops: Iterable[LabeledOperator]) -> LabeledOperator:
    """Tensor product of operators on disjoint label sets, in input order."""
    ops = list(ops)
    if not ops:
        raise ValueError("kron_compose needs at least one operator")
    seen: set[str] = set()
    labels: list[str] = []
    dims: list[int] = []
    for op in ops:
        for l in op.layout.labels:
            if l in seen:
                raise ValueError(f"duplicate subsystem label across factors: {l!r}")
            seen.add(l)
        labels.extend(op.layout.labels)
        dims.extend(op.layout.dims)
    layout = SubsystemLayout(labels, dims)
    entries = ops[0].entries
    for op in ops[1:]:
        entries = np.kron(entries, op.entries)
    return LabeledOperator(layout, entries)


def partial_trace(op: LabeledOperator, drop: Iterable[str]) -> LabeledOperator:
    """Trace out the subsystems in `drop`, keeping the rest in relative order."""
    drop = set(drop)
    for l in drop:
        if l not in op.layout.labels:
            raise KeyError(f"cannot trace out unknown label {l!r}")
    n = op.layout.n_subsystems
    tensor = op.entries.reshape(op.layout.dims + op.layout.dims)
    # contract bra/ket axes of dropped subsystems, highest axis first
    drop_positions = sorted(
        (op.layout.index(l) for l in drop), reverse=True
    )
    remaining = n
    for pos in drop_positions:
        tensor = np.trace(tensor, axis1=pos, axis2=pos + remaining)
        remaining -= 1
    keep = [l for l in op.layout.labels if l not in drop]
    if not keep:
        # tracing everything leaves a 1x1 matrix holding the full trace
        return LabeledOperator(SubsystemLayout([], []), np.asarray(tensor).reshape(1, 1))
    keep_layout = op.layout.restricted(keep)
    d = keep_layout.dim
    return LabeledOperator(keep_layout, tensor.reshape(d, d))


def trace_all(op: LabeledOperator) -> complex:
    """Full trace as a scalar; the all-labels partial trace."""
    return op.trace()


def hermitian_eig(op: LabeledOperator) -> Spectrum:
    """Eigendecomposition with descending eigenvalues; rejects non-Hermitian input."""
    op.require_hermitian()
    vals, vecs = np.linalg.eigh(op.entries)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    recon = (vecs * vals) @ vecs.conj().T
    scale = max(1.0, np.abs(op.entries).max())
    if np.abs(recon - op.entries).max() > EIG_RECON_TOL * scale:
        raise ArithmeticError("eigendecomposition failed reconstruction check")
    return Spectrum(eigenvalues=vals, eigenvectors=vecs)


def support_rank(op: LabeledOperator, rel_tol: float = PINV_CUTOFF) -> int:
    """Number of eigenvalues above rel_tol * max|eigenvalue|."""
    vals = hermitian_eig(op).eigenvalues
    scale = np.abs(vals).max()
    if scale == 0:
        return 0
    return int(np.sum(np.abs(vals) > rel_tol * scale))


def psd_inv_sqrt(op: LabeledOperator, rel_tol: float = PINV_CUTOFF) -> LabeledOperator:
    """Inverse square root on the support of a PSD operator.

    Eigenvalues below rel_tol * lambda_max are treated as zero, so
    B @ op @ B is the support projector rather than the identity.
    """
    spec = hermitian_eig(op)
    vals = spec.eigenvalues
    lam_max = vals.max() if vals.size else 0.0
    if lam_max <= 0:
        raise ValueError("operator has no positive part")
    lam_min = vals.min()
    if lam_min < -PSD_NEG_RTOL * lam_max:
        raise ValueError(f"operator is not PSD: eigenvalue {lam_min:.6e}")
    keep = vals > rel_tol * lam_max
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / np.sqrt(vals[keep])
    entries = (spec.eigenvectors * inv) @ spec.eigenvectors.conj().T
    return LabeledOperator(op.layout, entries)


def support_projector(op: LabeledOperator, rel_tol: float = PINV_CUTOFF) -> LabeledOperator:
    spec = hermitian_eig(op)
    vals = spec.eigenvalues
    lam_max = np.abs(vals).max()
    keep = vals > rel_tol * lam_max if lam_max > 0 else np.zeros_like(vals, dtype=bool)
    sel = spec.eigenvectors[:, keep]
    return LabeledOperator(op.layout, sel @ sel.conj().T)
