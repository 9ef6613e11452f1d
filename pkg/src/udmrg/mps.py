"""Matrix-product states and operators, dense-verifiable at desk scale.

Index conventions (fixed throughout the package):

* MPS site tensor:  ``A[left, phys, right]``
* MPO site tensor:  ``W[left, out, in, right]``

Boundary bonds have dimension one.  A state may carry a canonical center
``c``: sites left of ``c`` are left isometries, sites right of it right
isometries, and the tensor at ``c`` holds the norm.  Every operation returns
new objects; tensors are treated as immutable by convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import dag, max_abs


class MatrixProductState:
    """Open-boundary MPS over arbitrary local dimensions."""

    def __init__(self, tensors: Sequence[np.ndarray], center: Optional[int] = None):
        if len(tensors) == 0:
            raise ValueError("an MPS needs at least one site")
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        for s, t in enumerate(self.tensors):
            if t.ndim != 3:
                raise ValueError(f"site {s} tensor must be rank 3, got shape {t.shape}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for s in range(len(self.tensors) - 1):
            if self.tensors[s].shape[2] != self.tensors[s + 1].shape[0]:
                raise ValueError(
                    f"bond mismatch between sites {s} and {s + 1}: "
                    f"{self.tensors[s].shape[2]} vs {self.tensors[s + 1].shape[0]}"
                )
        if center is not None and not 0 <= center < len(self.tensors):
            raise ValueError(f"canonical center {center} out of range")
        self.center = center

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def physical_dims(self) -> tuple[int, ...]:
        return tuple(t.shape[1] for t in self.tensors)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        """Internal bond dimensions (length ``n_sites - 1``)."""
        return tuple(t.shape[2] for t in self.tensors[:-1])

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([t.copy() for t in self.tensors], self.center)

    def norm(self) -> float:
        return float(np.sqrt(max(inner_product(self, self).real, 0.0)))


class MatrixProductOperator:
    """Open-boundary MPO; square local dimensions per site."""

    def __init__(self, tensors: Sequence[np.ndarray]):
        if len(tensors) == 0:
            raise ValueError("an MPO needs at least one site")
        self.tensors = [np.asarray(t, dtype=complex) for t in tensors]
        for s, t in enumerate(self.tensors):
            if t.ndim != 4:
                raise ValueError(f"site {s} tensor must be rank 4, got shape {t.shape}")
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[3] != 1:
            raise ValueError("boundary bond dimensions must be 1")
        for s in range(len(self.tensors) - 1):
            if self.tensors[s].shape[3] != self.tensors[s + 1].shape[0]:
                raise ValueError(f"bond mismatch between MPO sites {s} and {s + 1}")

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def physical_dims(self) -> tuple[int, ...]:
        return tuple(t.shape[1] for t in self.tensors)


@dataclass
class BondSpectrum:
    """Retained singular values (descending, unit norm) and what was dropped."""

    singular_values: np.ndarray
    discarded_weight: float

    def __post_init__(self) -> None:
        self.singular_values = np.asarray(self.singular_values, dtype=float)
        if np.any(self.singular_values < 0):
            raise ValueError("singular values must be non-negative")
        if np.any(np.diff(self.singular_values) > 1e-12):
            raise ValueError("singular values must be sorted descending")
        if self.discarded_weight < -1e-14:
            raise ValueError("discarded weight must be non-negative")


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def from_product_state(local_states: Sequence) -> MatrixProductState:
    """Bond-dimension-one MPS from normalized local state vectors."""
    tensors = []
    for s, vec in enumerate(local_states):
        v = np.asarray(vec, dtype=complex).ravel()
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"local state {s} has norm {norm!r}, expected 1")
        tensors.append(v.reshape(1, v.size, 1))
    return MatrixProductState(tensors, center=0)


def random_mps(rng: np.random.Generator, phys_dims: Sequence[int],
               bond_dim: int) -> MatrixProductState:
    """Normalized random MPS with bonds capped at ``bond_dim`` and exact rank."""
    dims = list(phys_dims)
    n = len(dims)
    bonds = [1]
    for s in range(1, n):
        left = int(np.prod(dims[:s]))
        right = int(np.prod(dims[s:]))
        bonds.append(min(bond_dim, left, right))
    bonds.append(1)
    tensors = []
    for s in range(n):
        shape = (bonds[s], dims[s], bonds[s + 1])
        tensors.append(rng.normal(size=shape) + 1j * rng.normal(size=shape))
    psi = canonicalize(MatrixProductState(tensors), 0)
    psi.tensors[0] = psi.tensors[0] / psi.norm()
    return psi


def from_dense_state(vector, phys_dims: Sequence[int]) -> MatrixProductState:
    """Exact MPS factorization of a dense state vector via successive SVDs."""
    dims = list(phys_dims)
    v = np.asarray(vector, dtype=complex).ravel()
    if v.size != int(np.prod(dims)):
        raise ValueError("vector length does not match the physical dimensions")
    tensors = []
    rest = v.reshape(1, -1)
    for d in dims[:-1]:
        m = rest.reshape(rest.shape[0] * d, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        keep = s > 1e-14 * s[0] if s.size else s > 0
        u, s, vh = u[:, keep], s[keep], vh[keep]
        tensors.append(u.reshape(rest.shape[0], d, -1))
        rest = s[:, None] * vh
    tensors.append(rest.reshape(rest.shape[0], dims[-1], 1))
    return MatrixProductState(tensors, center=len(dims) - 1)


# ---------------------------------------------------------------------------
# contraction
# ---------------------------------------------------------------------------

def inner_product(bra: MatrixProductState, ket: MatrixProductState) -> complex:
    """``<bra|ket>`` by left-to-right transfer contraction."""
    if bra.physical_dims != ket.physical_dims:
        raise ValueError("states live on different local Hilbert spaces")
    env = np.ones((1, 1), dtype=complex)
    for a, b in zip(bra.tensors, ket.tensors):
        t = np.tensordot(env, b, axes=(1, 0))          # (bra_bond, d, ket_right)
        env = np.tensordot(a.conj(), t, axes=((0, 1), (0, 1)))
    return complex(env[0, 0])


def to_dense(psi: MatrixProductState) -> np.ndarray:
    """Dense state vector (big-endian site ordering)."""
    v = np.ones((1, 1), dtype=complex)
    for t in psi.tensors:
        v = np.einsum("pb,bdr->pdr", v, t).reshape(-1, t.shape[2])
    return v[:, 0]


def mpo_to_dense(op: MatrixProductOperator) -> np.ndarray:
    """Dense matrix of an MPO (same site ordering as :func:`to_dense`)."""
    m = np.ones((1, 1, 1), dtype=complex)
    for t in op.tensors:
        m = np.einsum("xyb,boir->xoyir", m, t)
        m = m.reshape(m.shape[0] * m.shape[1], m.shape[2] * m.shape[3], m.shape[4])
    return m[:, :, 0]


def expectation(psi: MatrixProductState, op: MatrixProductOperator) -> complex:
    """Normalized expectation ``<psi|op|psi> / <psi|psi>``."""
    if psi.physical_dims != op.physical_dims:
        raise ValueError("state and operator live on different local Hilbert spaces")
    env = np.ones((1, 1, 1), dtype=complex)  # (bra, mpo, ket)
    for a, w in zip(psi.tensors, op.tensors):
        t = np.tensordot(env, a, axes=(2, 0))            # (bra, mpo, d_in_ket?, kr) -> (bra, mpo, d, kr)
        t = np.tensordot(t, w, axes=((1, 2), (0, 2)))    # (bra, kr, out, wr)
        env = np.tensordot(a.conj(), t, axes=((0, 1), (0, 2)))  # (br, kr, wr)
        env = env.transpose(0, 2, 1)
    value = complex(env[0, 0, 0])
    norm_sq = inner_product(psi, psi).real
    if norm_sq <= 0:
        raise ValueError("cannot normalize expectation of a zero state")
    return value / norm_sq


# ---------------------------------------------------------------------------
# canonical forms
# ---------------------------------------------------------------------------

def canonicalize(psi: MatrixProductState, center: int) -> MatrixProductState:
    """Bring ``psi`` to mixed-canonical form with the given center (QR sweeps)."""
    n = psi.n_sites
    if not 0 <= center < n:
        raise ValueError(f"center {center} out of range for {n} sites")
    tensors = [t.copy() for t in psi.tensors]
    for s in range(center):
        l, d, r = tensors[s].shape
        q, rr = np.linalg.qr(tensors[s].reshape(l * d, r))
        tensors[s] = q.reshape(l, d, q.shape[1])
        tensors[s + 1] = np.tensordot(rr, tensors[s + 1], axes=(1, 0))
    for s in range(n - 1, center, -1):
        l, d, r = tensors[s].shape
        q, rr = np.linalg.qr(tensors[s].reshape(l, d * r).conj().T)
        k = q.shape[1]
        tensors[s] = q.conj().T.reshape(k, d, r)
        tensors[s - 1] = np.tensordot(tensors[s - 1], rr.conj().T, axes=(2, 0))
    return MatrixProductState(tensors, center=center)


def isometry_residuals(psi: MatrixProductState) -> list[float]:
    """Per-site deviation from the isometry condition implied by the center."""
    if psi.center is None:
        raise ValueError("state has no canonical center")
    residuals = []
    for s, t in enumerate(psi.tensors):
        l, d, r = t.shape
        if s < psi.center:
            m = t.reshape(l * d, r)
            residuals.append(max_abs(dag(m) @ m - np.eye(r)))
        elif s > psi.center:
            m = t.reshape(l, d * r)
            residuals.append(max_abs(m @ dag(m) - np.eye(l)))
        else:
            residuals.append(0.0)
    return residuals


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------

def split_theta(theta: np.ndarray, select: Callable, center_after: str = "right"):
    """SVD-split a two-site block with a selection hook.

    ``select(sigma, u)`` receives the descending singular values and the left
    singular vectors and returns ``(kept_indices, renormalized_sigma)`` with
    ``kept_indices`` ascending.  Returns ``(left, right, spectrum)`` where the
    renormalized weights have been absorbed into the side named by
    ``center_after``.
    """
    l, d1, d2, r = theta.shape
    m = theta.reshape(l * d1, d2 * r)
    if max_abs(m) == 0.0:
        raise ValueError("zero block at this bond; state has no weight here")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    kept, renorm = select(s, u)
    kept = np.asarray(kept, dtype=int)
    u_k, vh_k = u[:, kept], vh[kept, :]
    discarded = float(np.sum(s**2) - np.sum(s[kept] ** 2))
    if center_after == "right":
        left = u_k.reshape(l, d1, kept.size)
        right = (renorm[:, None] * vh_k).reshape(kept.size, d2, r)
    elif center_after == "left":
        left = (u_k * renorm[None, :]).reshape(l, d1, kept.size)
        right = vh_k.reshape(kept.size, d2, r)
    else:
        raise ValueError("center_after must be 'left' or 'right'")
    return left, right, BondSpectrum(renorm, max(discarded, 0.0))


def svd_truncate(psi: MatrixProductState, bond: int, select: Callable,
                 center_after: str = "right"):
    """Truncate the bond between sites ``bond`` and ``bond + 1``.

    The canonical center must sit on one of the two sites so the singular
    values are the true Schmidt coefficients.  Returns ``(state, spectrum)``;
    the new center sits on the side named by ``center_after``.
    """
    if not 0 <= bond < psi.n_sites - 1:
        raise ValueError(f"bond {bond} out of range")
    if psi.center not in (bond, bond + 1):
        raise ValueError(
            f"canonical center must be adjacent to bond {bond}, is {psi.center}"
        )
    theta = np.tensordot(psi.tensors[bond], psi.tensors[bond + 1], axes=(2, 0))
    left, right, spectrum = split_theta(theta, select, center_after)
    tensors = list(psi.tensors)
    tensors[bond] = left
    tensors[bond + 1] = right
    center = bond + 1 if center_after == "right" else bond
    return MatrixProductState(tensors, center=center), spectrum


def entanglement_spectrum(psi: MatrixProductState, bond: int) -> np.ndarray:
    """Squared Schmidt coefficients across ``bond``, descending, unit sum."""
    if not 0 <= bond < psi.n_sites - 1:
        raise ValueError(f"bond {bond} out of range for {psi.n_sites} sites")
    phi = canonicalize(psi, bond)
    l, d, r = phi.tensors[bond].shape
    s = np.linalg.svd(phi.tensors[bond].reshape(l * d, r), compute_uv=False)
    p = s**2
    total = p.sum()
    if total <= 0:
        raise ValueError("state has zero norm")
    return p / total


def schmidt_values(psi: MatrixProductState, bond: int) -> np.ndarray:
    """Schmidt coefficients (descending, unit vector norm) across ``bond``."""
    return np.sqrt(entanglement_spectrum(psi, bond))


# ---------------------------------------------------------------------------
# bond eigendata for cross-state tracking
# ---------------------------------------------------------------------------

def left_canonical(psi: MatrixProductState) -> MatrixProductState:
    """All-left-isometric form (center on the last site)."""
    return canonicalize(psi, psi.n_sites - 1)


def bond_schmidt_data(psi: MatrixProductState):
    """Left-canonical tensors plus per-bond Schmidt bases.

    Returns ``(phi, data)`` where ``phi`` is the left-canonical state and
    ``data[b] = (p, g)`` holds the descending Schmidt probabilities and the
    unitary rotating the bond-``b`` left-isometry basis into the Schmidt
    eigenbasis (columns ordered like ``p``).
    """
    phi = left_canonical(psi)
    norm_sq = inner_product(phi, phi).real
    n = phi.n_sites
    data: list = [None] * (n - 1)
    env = np.ones((1, 1), dtype=complex)
    for s in range(n - 1, 0, -1):
        t = phi.tensors[s]
        env = np.einsum("idr,rs,jds->ij", t, env, t.conj())
        rho = 0.5 * (env + dag(env)) / norm_sq
        w, g = np.linalg.eigh(rho)
        w, g = w[::-1].copy(), g[:, ::-1].copy()
        w = np.clip(w, 0.0, None)
        total = w.sum()
        data[s - 1] = (w / total if total > 0 else w, g)
    return phi, data


def left_cross_envs(bra: MatrixProductState, ket: MatrixProductState) -> list[np.ndarray]:
    """Per-bond overlap of left-block bases of two left-canonical states.

    ``envs[b][i, j] = <left-basis-state i of bra | left-basis-state j of ket>``
    contracted through site ``b`` inclusive.
    """
    if bra.physical_dims != ket.physical_dims:
        raise ValueError("states live on different local Hilbert spaces")
    env = np.ones((1, 1), dtype=complex)
    envs = []
    for s in range(bra.n_sites - 1):
        env = np.einsum("ipj,ik,kpl->jl", bra.tensors[s].conj(), env, ket.tensors[s])
        envs.append(env)
    return envs
