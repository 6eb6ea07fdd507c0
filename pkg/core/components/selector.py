import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Literal, Optional

import numpy as np

MAX_SELECTOR_K = 10

SelectorVariant = Literal["at_most_k", "exactly_k", "iso_to_h", "empty"]


def _as_adjacency(adjacency) -> np.ndarray:
    matrix = np.asarray(adjacency)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Adjacency must be a square matrix, got shape {matrix.shape}.")
    if not np.isin(matrix, (0, 1)).all():
        raise ValueError("Adjacency entries must be 0 or 1.")
    matrix = matrix.astype(np.uint8)
    if not np.array_equal(matrix, matrix.T):
        raise ValueError("Adjacency matrix is not symmetric.")
    if np.any(np.diag(matrix)):
        raise ValueError("Adjacency matrix has a non-zero diagonal.")
    return matrix


@lru_cache(maxsize=65536)
def _canonical_code(k: int, upper_bits: str) -> str:
    matrix = np.zeros((k, k), dtype=np.uint8)
    rows, cols = np.triu_indices(k, 1)
    matrix[rows, cols] = np.array([int(b) for b in upper_bits], dtype=np.uint8)
    matrix = matrix | matrix.T

    degrees = matrix.sum(axis=1)
    classes = [np.flatnonzero(degrees == value).tolist() for value in np.unique(degrees)]
    best: Optional[str] = None
    for parts in itertools.product(*(itertools.permutations(c) for c in classes)):
        order = [v for part in parts for v in part]
        bits = matrix[np.ix_(order, order)][rows, cols]
        code = "".join("1" if b else "0" for b in bits)
        if best is None or code < best:
            best = code
    return best or ""


def canonical_form(adjacency) -> str:
    """
    Canonical upper-triangle bit string of a simple graph on k ≤ 10 vertices.

    Vertices are ordered by degree and only permutations inside each degree
    class are tried; the lexicographically smallest upper triangle wins. Two
    graphs get equal codes iff they are isomorphic.
    """
    matrix = _as_adjacency(adjacency)
    k = matrix.shape[0]
    if k > MAX_SELECTOR_K:
        raise ValueError(f"canonical_form supports at most {MAX_SELECTOR_K} vertices, got {k}.")
    rows, cols = np.triu_indices(k, 1)
    return _canonical_code(k, "".join("1" if b else "0" for b in matrix[rows, cols]))


def adjacency_from_bits(bits: str, k: int) -> np.ndarray:
    """Symmetric adjacency matrix from a row-major upper-triangle bit string."""
    expected = k * (k - 1) // 2
    if len(bits) != expected or set(bits) - {"0", "1"}:
        raise ValueError(f"H needs {expected} upper-triangle bits of 0/1 for k={k}, got '{bits}'.")
    matrix = np.zeros((k, k), dtype=np.uint8)
    rows, cols = np.triu_indices(k, 1)
    matrix[rows, cols] = [int(b) for b in bits]
    return matrix | matrix.T


def is_connected(matrix: np.ndarray) -> bool:
    k = matrix.shape[0]
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for w in np.flatnonzero(matrix[v]):
            if int(w) not in seen:
                seen.add(int(w))
                frontier.append(int(w))
    return len(seen) == k


@dataclass(frozen=True)
class Selector:
    """
    The component predicate A: vertex sets of size ≤ k, exactly k, those
    whose induced graph is isomorphic to a connected H, or none at all.
    """

    variant: SelectorVariant
    k: int
    h_code: Optional[str] = None
    h_bits: Optional[str] = None

    def __post_init__(self):
        if self.variant not in ("at_most_k", "exactly_k", "iso_to_h", "empty"):
            raise ValueError(f"Unknown selector variant '{self.variant}'.")
        if not 1 <= self.k <= MAX_SELECTOR_K:
            raise ValueError(f"Selector k must lie in [1, {MAX_SELECTOR_K}], got {self.k}.")
        if self.variant == "iso_to_h" and self.h_code is None:
            raise ValueError("iso_to_h selector needs H.")

    @classmethod
    def at_most(cls, k: int) -> "Selector":
        return cls("at_most_k", int(k))

    @classmethod
    def exactly(cls, k: int) -> "Selector":
        return cls("exactly_k", int(k))

    @classmethod
    def empty(cls, k: int) -> "Selector":
        return cls("empty", int(k))

    @classmethod
    def iso_to(cls, adjacency) -> "Selector":
        matrix = _as_adjacency(adjacency)
        if not is_connected(matrix):
            raise ValueError("H must be connected.")
        k = matrix.shape[0]
        rows, cols = np.triu_indices(k, 1)
        bits = "".join("1" if b else "0" for b in matrix[rows, cols])
        return cls("iso_to_h", k, canonical_form(matrix), bits)

    @classmethod
    def iso_to_bits(cls, bits: str, k: int) -> "Selector":
        return cls.iso_to(adjacency_from_bits(bits, k))

    @property
    def fixed_size(self) -> bool:
        return self.variant in ("exactly_k", "iso_to_h")

    def accepts_size(self, size: int) -> bool:
        if self.variant == "at_most_k":
            return 1 <= size <= self.k
        if self.variant in ("exactly_k", "iso_to_h"):
            return size == self.k
        return False

    def matches(self, size: int, adjacency: Optional[np.ndarray] = None) -> bool:
        """Whether a component of `size` vertices (induced `adjacency`) is in A."""
        if not self.accepts_size(size):
            return False
        if self.variant != "iso_to_h":
            return True
        if adjacency is None:
            raise ValueError("iso_to_h matching needs the component's adjacency.")
        return canonical_form(adjacency) == self.h_code

    def parts(self) -> List["Selector"]:
        """Fixed-size selectors whose counts sum to this selector's count."""
        if self.variant == "at_most_k":
            return [Selector.exactly(i) for i in range(1, self.k + 1)]
        if self.variant == "empty":
            return []
        return [self]

    def describe(self) -> str:
        if self.variant == "iso_to_h":
            return f"iso_to_h(k={self.k}, H={self.h_bits})"
        return f"{self.variant}({self.k})"


def selector_from_spec(variant: str, k: Optional[int] = None, h: Optional[str] = None) -> Selector:
    """Builds a selector from its config fields; H comes as upper-triangle bits."""
    if variant == "iso_to_h":
        if h is None:
            raise ValueError("iso_to_h selector needs H as an upper-triangle bit string.")
        size = k if k is not None else _k_from_bits(h)
        return Selector.iso_to_bits(h, size)
    if k is None:
        raise ValueError(f"Selector '{variant}' needs k.")
    return Selector(variant, int(k))


def _k_from_bits(bits: str) -> int:
    for k in range(1, MAX_SELECTOR_K + 1):
        if k * (k - 1) // 2 == len(bits):
            return k
    raise ValueError(f"H bit string of length {len(bits)} is not an upper triangle for k ≤ {MAX_SELECTOR_K}.")

