"""Bundled example programs.

Each builder returns ``(program, rho0)``.
"""

from __future__ import annotations

import numpy as np

from .program import Program
from .superop import SuperOperator

OMEGA = np.exp(2j * np.pi / 3)


def walk_unitaries() -> tuple[np.ndarray, np.ndarray]:
    """Step unitaries of the two quantum walks on the 3-cycle."""
    w = OMEGA
    w1 = np.array([[1, 1, 1], [1, w, w**2], [1, w**2, w]]) / np.sqrt(3)
    w2 = np.array([[1, 1, 1], [1, w**2, w], [1, w, w**2]]) / np.sqrt(3)
    return w1, w2


def walk_measurement() -> tuple[np.ndarray, np.ndarray]:
    m0 = np.zeros((3, 3), dtype=complex)
    m0[2, 2] = 1
    return m0, np.eye(3, dtype=complex) - m0


def walk() -> tuple[Program, np.ndarray]:
    """Two walks on the 3-cycle run concurrently; absorbed at vertex 2."""
    w1, w2 = walk_unitaries()
    m0, m1 = walk_measurement()
    prog = Program(
        processes=(SuperOperator.unitary(w1), SuperOperator.unitary(w2)),
        m0=m0,
        m1=m1,
        names=("walk1", "walk2"),
    )
    return prog, basis_state(3, 0)


def single_walk() -> tuple[Program, np.ndarray]:
    w1, _ = walk_unitaries()
    m0, m1 = walk_measurement()
    return Program((SuperOperator.unitary(w1),), m0, m1, names=("walk1",)), basis_state(3, 0)


def flip() -> tuple[Program, np.ndarray]:
    """Qubit flip with termination on |1>; terminates after two steps from |0>."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    prog = Program(
        processes=(SuperOperator.unitary(x),),
        m0=np.diag([0, 1]).astype(complex),
        m1=np.diag([1, 0]).astype(complex),
        names=("flip",),
    )
    return prog, basis_state(2, 0)


def identity() -> tuple[Program, np.ndarray]:
    """A qubit that is never touched and never terminates."""
    prog = Program(
        processes=(SuperOperator.identity(2),),
        m0=np.zeros((2, 2), dtype=complex),
        m1=np.eye(2, dtype=complex),
        names=("idle",),
    )
    return prog, basis_state(2, 0)


def basis_state(d: int, i: int) -> np.ndarray:
    rho = np.zeros((d, d), dtype=complex)
    rho[i, i] = 1
    return rho


BUILTIN = {"walk": walk, "flip": flip, "identity": identity}
