"""
Global system of the projective dynamics solve.

Every constraint energy is w/2 |A q - p|^2 with A acting identically on the
x, y and z coordinates, so the global matrix

    L = M / s^2 + sum_i w_i A_i^T A_i

is one n x n SPD matrix whose factorization serves all three coordinates.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from loguru import logger

from src.config.schemas import SolverParams
from src.constraints.types import Constraint, ConstraintKind
from src.errors import ZeroMassError
from src.mesh.types import TetMesh
from src.solver.factorization import Factorization, factorize


def lumped_masses(tet_meshes: Sequence[TetMesh], density: float) -> np.ndarray:
    """A quarter of each incident tet's rest mass per vertex; meshes are concatenated in order."""
    masses = []
    for mesh in tet_meshes:
        m = np.zeros(mesh.vertex_count)
        if mesh.tet_count:
            quarter = np.abs(mesh.signed_volumes()) * density / 4.0
            np.add.at(m, mesh.tets, quarter[:, None])
        masses.append(m)
    return np.concatenate(masses) if masses else np.zeros(0)


def strain_operators(rest_inv: np.ndarray) -> np.ndarray:
    """
    (T, 4, 3) operators G with F[c, b] = sum_a q[a, c] G[a, b] for the four tet corners q.
    """
    rest_inv = np.asarray(rest_inv, dtype=np.float64).reshape(-1, 3, 3)
    G = np.zeros((len(rest_inv), 4, 3))
    G[:, 0] = -rest_inv.sum(axis=1)
    G[:, 1:] = rest_inv
    return G


def topology_key(constraints: Sequence[Constraint]) -> tuple:
    return tuple(c.topology_key() for c in constraints)


@dataclass(frozen=True)
class Projections:
    """Local-step output: clamped gradients per strain constraint, target points per positional constraint."""
    strain: np.ndarray
    positional: np.ndarray


class System:
    """
    Prefactorized global matrix plus the index data needed to scatter
    projections back into a right-hand side. Constraints are split into the
    strain block and the positional block, each keeping input order.
    """

    def __init__(
        self,
        masses: np.ndarray,
        timestep: float,
        strain: List[Constraint],
        positional: List[Constraint],
        key: tuple,
    ):
        self.masses = masses
        self.timestep = timestep
        self.n = len(masses)
        self.key = key
        self.strain_constraints = strain
        self.positional_constraints = positional

        if strain:
            self.tet_indices = np.array([c.indices for c in strain], dtype=np.int64)
            self.tet_operators = strain_operators(np.array([c.rest_inv for c in strain]))
            self.tet_weights = np.array([c.effective_weight for c in strain])
            self.tet_alpha = np.array([c.alpha for c in strain])
        else:
            self.tet_indices = np.zeros((0, 4), dtype=np.int64)
            self.tet_operators = np.zeros((0, 4, 3))
            self.tet_weights = np.zeros(0)
            self.tet_alpha = np.zeros(0)

        self.point_indices = np.array([c.indices[0] for c in positional], dtype=np.int64)
        self.point_weights = np.array([c.weight for c in positional], dtype=np.float64)
        self.push_rows = np.array(
            [k for k, c in enumerate(positional) if c.kind is ConstraintKind.PUSH], dtype=np.int64
        )

        self.inertia = masses / timestep ** 2
        self.matrix = self._build_matrix()
        self.factorization: Optional[Factorization] = None

    def _build_matrix(self) -> sp.csc_matrix:
        rows = [np.arange(self.n)]
        cols = [np.arange(self.n)]
        vals = [self.inertia]

        if len(self.tet_indices):
            block = self.tet_weights[:, None, None] * np.einsum("tab,tcb->tac", self.tet_operators, self.tet_operators)
            rows.append(np.repeat(self.tet_indices, 4, axis=1).reshape(-1))
            cols.append(np.tile(self.tet_indices, (1, 4)).reshape(-1))
            vals.append(block.reshape(-1))

        if len(self.point_indices):
            rows.append(self.point_indices)
            cols.append(self.point_indices)
            vals.append(self.point_weights)

        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.n, self.n)
        ).tocsc()

    def factorize(self, backend=None) -> "System":
        self.factorization = factorize(self.matrix, backend)
        return self

    # ---- quadratic objective for fixed projections ----

    def deformation_gradients(self, q: np.ndarray) -> np.ndarray:
        return np.einsum("tac,tab->tcb", q[self.tet_indices], self.tet_operators)

    def constraint_rhs(self, projections: Projections) -> np.ndarray:
        """sum_i w_i A_i^T p_i as an (n, 3) array."""
        rhs = np.zeros((self.n, 3))
        if len(self.tet_indices):
            local = self.tet_weights[:, None, None] * np.einsum("tab,tcb->tac", self.tet_operators, projections.strain)
            np.add.at(rhs, self.tet_indices, local)
        if len(self.point_indices):
            np.add.at(rhs, self.point_indices, self.point_weights[:, None] * projections.positional)
        return rhs

    def rhs(self, q_prev: np.ndarray, projections: Projections) -> np.ndarray:
        return self.inertia[:, None] * q_prev + self.constraint_rhs(projections)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.factorization is None:
            self.factorize()
        return self.factorization.solve(rhs)

    def constraint_energy(self, q: np.ndarray, projections: Projections) -> float:
        energy = 0.0
        if len(self.tet_indices):
            residual = self.deformation_gradients(q) - projections.strain
            energy += 0.5 * float(self.tet_weights @ (residual ** 2).sum(axis=(1, 2)))
        if len(self.point_indices):
            residual = q[self.point_indices] - projections.positional
            energy += 0.5 * float(self.point_weights @ (residual ** 2).sum(axis=1))
        return energy

    def constraint_gradient(self, q: np.ndarray, projections: Projections) -> np.ndarray:
        grad = np.zeros((self.n, 3))
        if len(self.tet_indices):
            residual = self.deformation_gradients(q) - projections.strain
            local = self.tet_weights[:, None, None] * np.einsum("tab,tcb->tac", self.tet_operators, residual)
            np.add.at(grad, self.tet_indices, local)
        if len(self.point_indices):
            np.add.at(grad, self.point_indices, self.point_weights[:, None] * (q[self.point_indices] - projections.positional))
        return grad

    def inertia_energy(self, q: np.ndarray, q_prev: np.ndarray) -> float:
        return 0.5 * float(self.inertia @ ((q - q_prev) ** 2).sum(axis=1))

    def objective(self, q: np.ndarray, q_prev: np.ndarray, projections: Projections) -> float:
        return self.inertia_energy(q, q_prev) + self.constraint_energy(q, projections)

    def objective_gradient(self, q: np.ndarray, q_prev: np.ndarray, projections: Projections) -> np.ndarray:
        return self.inertia[:, None] * (q - q_prev) + self.constraint_gradient(q, projections)


def assemble(
    tet_meshes: Sequence[TetMesh],
    constraints: Sequence[Constraint],
    params: SolverParams,
    factorize_now: bool = True,
) -> System:
    """
    Build and factorize the global system for the concatenated vertices of tet_meshes.

    Raises:
        ZeroMassError: a vertex belongs to no tet
        IndexError: a constraint references a vertex outside the meshes
        FactorizationError: matrix not SPD
    """
    masses = lumped_masses(tet_meshes, params.density)
    empty = np.flatnonzero(~(masses > 0))
    if len(empty):
        raise ZeroMassError(f"{len(empty)} vertex(es) without lumped mass, first vertex {int(empty[0])}")

    n = len(masses)
    strain, positional = [], []
    for c in constraints:
        if max(c.indices) >= n:
            raise IndexError(f"{c.kind.value} constraint references vertex {max(c.indices)} of {n}")
        (strain if c.kind is ConstraintKind.TET_STRAIN else positional).append(c)

    system = System(masses, params.timestep, strain, positional, topology_key(constraints))
    logger.debug(
        f"Assembled system: {n} vertices, {len(strain)} strain and {len(positional)} positional constraints"
    )
    return system.factorize() if factorize_now else system
