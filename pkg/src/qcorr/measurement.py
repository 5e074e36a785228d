"""Local Pauli projectors, Born probabilities, and measured frequencies.

The full measurement for n qubits projects every qubit onto the three
mutually unbiased polarization bases {H,V}, {D,A}, {R,L}, giving 6^n rank-1
product projectors. Labels are strings like ``"HV"``; canonical order is
lexicographic in the alphabet (H, V, D, A, R, L) per qubit, first qubit
slowest. Incomplete measurements are represented by a boolean mask over the
canonical full set, never by reordering.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DataFormatError, UninformativeMeasurementError
from .states import DensityMatrix

BASIS_ALPHABET = "HVDARL"

BASIS_KETS = {
    "H": np.array([1.0, 0.0], dtype=np.complex128),
    "V": np.array([0.0, 1.0], dtype=np.complex128),
    "D": np.array([1.0, 1.0], dtype=np.complex128) / np.sqrt(2.0),
    "A": np.array([1.0, -1.0], dtype=np.complex128) / np.sqrt(2.0),
    "R": np.array([1.0, 1.0j], dtype=np.complex128) / np.sqrt(2.0),
    "L": np.array([1.0, -1.0j], dtype=np.complex128) / np.sqrt(2.0),
}

# Letters sharing a mutually unbiased basis; used to group complete bases.
_BASIS_OF_LETTER = {"H": "Z", "V": "Z", "D": "X", "A": "X", "R": "Y", "L": "Y"}

_GRAM_MIN_EIGENVALUE = 1e-10

KIND_EXACT_BORN = "exact_born"
KIND_FREQUENCY = "frequency"


def mask_hash(n_qubits: int, mask) -> str:
    """Stable identifier of a (qubit count, active subset) pair."""
    bits = "".join("1" if on else "0" for on in np.asarray(mask, dtype=bool))
    return hashlib.sha256(f"pauli6/{n_qubits}/{bits}".encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ProjectorSet:
    """Canonical full set of 6^n local projectors plus an activity mask."""

    n_qubits: int
    projectors: np.ndarray  # (6^n, 2^n, 2^n)
    labels: tuple
    active_mask: np.ndarray  # bool, (6^n,)

    @property
    def full_size(self) -> int:
        return len(self.labels)

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.active_mask))

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(self.active_mask)

    def active_projectors(self) -> np.ndarray:
        return self.projectors[self.active_mask]

    def active_labels(self) -> tuple:
        return tuple(lbl for lbl, on in zip(self.labels, self.active_mask) if on)

    def with_mask(self, mask) -> "ProjectorSet":
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.full_size,):
            raise ValueError(f"mask shape {mask.shape} does not match full size {self.full_size}")
        return ProjectorSet(
            n_qubits=self.n_qubits,
            projectors=self.projectors,
            labels=self.labels,
            active_mask=mask.copy(),
        )

    def measurement_hash(self) -> str:
        """Stable identifier of (qubit count, active subset)."""
        return mask_hash(self.n_qubits, self.active_mask)


@dataclass(frozen=True)
class ProbabilityRecord:
    """Born probabilities or measured relative frequencies, aligned to the
    canonical projector order; inactive slots hold zero."""

    values: np.ndarray
    kind: str
    active_mask: np.ndarray
    total_counts: np.ndarray | None = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.active_mask, dtype=bool)
        if values.shape != mask.shape:
            raise ValueError("values and active_mask must have identical shape")
        if self.kind not in (KIND_EXACT_BORN, KIND_FREQUENCY):
            raise ValueError(f"unknown record kind {self.kind!r}")
        if np.any(values < -1e-12) or np.any(values > 1.0 + 1e-12):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "values", np.clip(values, 0.0, 1.0))
        object.__setattr__(self, "active_mask", mask.copy())

    def active_values(self) -> np.ndarray:
        return self.values[self.active_mask]


def projector_labels(n_qubits: int) -> tuple:
    return tuple("".join(t) for t in itertools.product(BASIS_ALPHABET, repeat=n_qubits))


def pauli_projectors(n_qubits: int) -> ProjectorSet:
    """Full canonical set of 6^n_qubits local Pauli-basis projectors."""
    if n_qubits not in (2, 3):
        raise ValueError(f"n_qubits must be 2 or 3, got {n_qubits}")
    labels = projector_labels(n_qubits)
    dim = 2 ** n_qubits
    projectors = np.empty((len(labels), dim, dim), dtype=np.complex128)
    for idx, label in enumerate(labels):
        ket = BASIS_KETS[label[0]]
        for letter in label[1:]:
            ket = np.kron(ket, BASIS_KETS[letter])
        projectors[idx] = np.outer(ket, ket.conj())
    return ProjectorSet(
        n_qubits=n_qubits,
        projectors=projectors,
        labels=labels,
        active_mask=np.ones(len(labels), dtype=bool),
    )


def born_probabilities(rho: DensityMatrix, pset: ProjectorSet) -> ProbabilityRecord:
    """Exact Born probabilities Tr(rho M_i) over the active projectors."""
    if rho.dim != pset.projectors.shape[1]:
        raise ValueError(f"state dimension {rho.dim} does not match projectors")
    values = np.zeros(pset.full_size, dtype=np.float64)
    active = pset.active_mask
    values[active] = np.einsum("kij,ji->k", pset.projectors[active], rho.matrix).real
    return ProbabilityRecord(values=values, kind=KIND_EXACT_BORN, active_mask=active)


def random_subset(pset: ProjectorSet, k: int, rng: np.random.Generator) -> ProjectorSet:
    """Uniform without-replacement mask of k projectors from the full set."""
    if not 1 <= k <= pset.full_size:
        raise ValueError(f"k={k} out of range [1, {pset.full_size}]")
    chosen = rng.choice(pset.full_size, size=k, replace=False)
    mask = np.zeros(pset.full_size, dtype=bool)
    mask[chosen] = True
    return pset.with_mask(mask)


def gram_operator(pset: ProjectorSet) -> np.ndarray:
    """G = sum of active projectors."""
    return pset.active_projectors().sum(axis=0)


def gram_inverse_sqrt(gram: np.ndarray) -> np.ndarray:
    """G^{-1/2} from the eigendecomposition of G.

    Raises :class:`UninformativeMeasurementError` when the smallest
    eigenvalue is at or below 1e-10 (the subset spans a proper subspace).
    """
    eig = linalg.hermitian_eig(gram)
    smallest = eig.eigenvalues[-1]
    if smallest <= _GRAM_MIN_EIGENVALUE:
        raise UninformativeMeasurementError(
            f"Gram operator is singular (smallest eigenvalue {smallest:.3e}); "
            "the active projectors do not span the state space"
        )
    v = eig.eigenvectors
    inv_sqrt = (v / np.sqrt(eig.eigenvalues)) @ v.conj().T
    return (inv_sqrt + inv_sqrt.conj().T) / 2.0


def gram_normalize(pset: ProjectorSet) -> tuple[np.ndarray, np.ndarray]:
    """Map active projectors to M_i' = G^{-1/2} M_i G^{-1/2}.

    Returns (stack of normalized active operators, G). The normalized set
    sums to the identity, restoring the completeness relation for
    incomplete measurements.
    """
    gram = gram_operator(pset)
    inv_sqrt = gram_inverse_sqrt(gram)
    normalized = inv_sqrt @ pset.active_projectors() @ inv_sqrt
    return normalized, gram


def simulate_counts(
    probs: ProbabilityRecord, shots_per_projector: int, rng: np.random.Generator
) -> ProbabilityRecord:
    """Finite-statistics frequencies, independent Binomial(shots, p_i) per
    projector (approximates Poissonian coincidence counting at fixed
    acquisition time)."""
    if probs.kind != KIND_EXACT_BORN:
        raise ValueError("simulate_counts expects exact Born probabilities")
    shots = int(shots_per_projector)
    if shots <= 0:
        raise ValueError("shots_per_projector must be positive")
    values = np.zeros_like(probs.values)
    active = probs.active_mask
    p = np.clip(probs.values[active], 0.0, 1.0)
    values[active] = rng.binomial(shots, p) / shots
    totals = np.zeros(probs.values.shape, dtype=np.float64)
    totals[active] = shots
    return ProbabilityRecord(
        values=values, kind=KIND_FREQUENCY, active_mask=active, total_counts=totals
    )


def load_counts_file(path, n_qubits: int | None = None, already_normalized: bool = False):
    """Read a coincidence-counts CSV into a (ProjectorSet, ProbabilityRecord).

    Format: optional ``#`` comment lines, a header ``label,counts[,shots]``,
    then one row per measured projector. Frequencies are counts/shots when a
    shots column is given, otherwise counts are normalized within each basis
    group (rows whose labels share the same per-qubit basis pattern), which
    covers the complete-basis case. With ``already_normalized`` the counts
    column is taken as probabilities verbatim.
    """
    rows = _parse_counts_rows(path)
    labels = [r[0] for r in rows]
    inferred = len(labels[0])
    if n_qubits is not None and n_qubits != inferred:
        raise DataFormatError(f"expected {n_qubits}-qubit labels, file has {inferred}-qubit labels")
    if inferred not in (2, 3):
        raise DataFormatError(f"labels must name 2 or 3 qubits, got {labels[0]!r}")

    pset = pauli_projectors(inferred)
    index_of = {lbl: i for i, lbl in enumerate(pset.labels)}
    mask = np.zeros(pset.full_size, dtype=bool)
    values = np.zeros(pset.full_size, dtype=np.float64)
    counts = np.zeros(pset.full_size, dtype=np.float64)
    shots = np.full(pset.full_size, np.nan)
    for label, count, shot in rows:
        idx = index_of[label]
        if mask[idx]:
            raise DataFormatError(f"duplicate label {label!r}")
        mask[idx] = True
        counts[idx] = count
        if shot is not None:
            shots[idx] = shot

    if already_normalized:
        values[mask] = counts[mask]
    else:
        group_totals: dict[str, float] = {}
        for label in labels:
            pattern = _basis_pattern(label)
            group_totals[pattern] = group_totals.get(pattern, 0.0) + counts[index_of[label]]
        for label in labels:
            idx = index_of[label]
            if np.isfinite(shots[idx]):
                denom = shots[idx]
            else:
                denom = group_totals[_basis_pattern(label)]
            if denom <= 0:
                raise DataFormatError(f"row {label!r} has no positive normalization total")
            values[idx] = counts[idx] / denom
            if values[idx] > 1.0 + 1e-12:
                raise DataFormatError(f"row {label!r} normalizes to {values[idx]:.6g} > 1")

    totals = np.where(np.isfinite(shots), shots, 0.0)
    record = ProbabilityRecord(
        values=values,
        kind=KIND_FREQUENCY,
        active_mask=mask,
        total_counts=totals if np.any(totals > 0) else None,
    )
    return pset.with_mask(mask), record


def write_counts_file(path, labels, counts, shots=None) -> None:
    """Companion writer for the counts CSV (synthetic data and round-trips)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if shots is None:
            fh.write("label,counts\n")
            for label, count in zip(labels, counts):
                fh.write(f"{label},{_format_number(count)}\n")
        else:
            fh.write("label,counts,shots\n")
            for label, count, shot in zip(labels, counts, shots):
                fh.write(f"{label},{_format_number(count)},{_format_number(shot)}\n")


def _format_number(x) -> str:
    xf = float(x)
    if xf == int(xf):
        return str(int(xf))
    return format(xf, ".17g")


def _basis_pattern(label: str) -> str:
    return "".join(_BASIS_OF_LETTER[letter] for letter in label)


def _parse_counts_rows(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(line for line in fh if line.strip() and not line.lstrip().startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty counts file") from None
        header = [h.strip().lower() for h in header]
        if header[:2] != ["label", "counts"] or len(header) > 3 or (
            len(header) == 3 and header[2] != "shots"
        ):
            raise DataFormatError(f"{path}: header must be 'label,counts[,shots]', got {header}")
        has_shots = len(header) == 3
        width = None
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            label = row[0].strip().upper()
            if width is None:
                width = len(label)
            if len(label) != width or any(ch not in BASIS_ALPHABET for ch in label):
                raise DataFormatError(f"{path}:{lineno}: bad label {row[0]!r}")
            try:
                count = float(row[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad counts value {row[1]!r}") from None
            if count < 0 or not np.isfinite(count):
                raise DataFormatError(f"{path}:{lineno}: counts must be finite and nonnegative")
            shot = None
            if has_shots:
                try:
                    shot = float(row[2])
                except ValueError:
                    raise DataFormatError(f"{path}:{lineno}: bad shots value {row[2]!r}") from None
                if shot <= 0 or not np.isfinite(shot):
                    raise DataFormatError(f"{path}:{lineno}: shots must be finite and positive")
            rows.append((label, count, shot))
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return rows
