"""Dense complex tensors with labelled modes.

Every backend in the package works on the same substrate: a row-major
``complex128`` array plus one unique string label per mode.  Pairwise
contraction goes through :func:`numpy.tensordot`, which keeps the reduction
order fixed for a given input and therefore gives bit-identical results
between runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError

CONJ_TAG = "*"

# singular values at or below this fraction of the largest one are numerical zeros
NUMERICAL_ZERO = 1e-14


class Tensor:
    """Immutable dense tensor.

    Parameters
    ----------
    data : array_like
        Values, converted to ``complex128``.  The array shape gives the extents.
    labels : sequence of str, optional
        One unique label per mode; defaults to ``m0, m1, ...``.
    """

    __slots__ = ("_data", "_labels")

    def __init__(self, data, labels: Sequence[str] | None = None):
        arr = np.array(data, dtype=np.complex128)
        if labels is None:
            labels = tuple(f"m{i}" for i in range(arr.ndim))
        labels = tuple(labels)
        if len(labels) != arr.ndim:
            raise ValueError(f"{len(labels)} labels given for a rank-{arr.ndim} tensor")
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be pairwise distinct, got {labels}")
        if any(e < 1 for e in arr.shape):
            raise ValueError(f"extents must be positive, got {arr.shape}")
        arr.flags.writeable = False
        self._data = arr
        self._labels = labels

    @classmethod
    def from_flat(cls, flat, extents: Sequence[int], labels=None) -> "Tensor":
        flat = np.asarray(flat, dtype=np.complex128).ravel()
        if flat.size != int(np.prod(extents, dtype=np.int64)):
            raise DimensionError(f"{flat.size} values do not fill extents {tuple(extents)}")
        return cls(flat.reshape(tuple(extents)), labels)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def extents(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def rank(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def flat(self) -> np.ndarray:
        """Row-major data, first mode slowest."""
        return self._data.ravel()

    def mode(self, m) -> int:
        """Resolve a mode given by position or by label."""
        if isinstance(m, str):
            try:
                return self._labels.index(m)
            except ValueError:
                raise ValueError(f"no mode labelled {m!r} in {self._labels}") from None
        m = int(m)
        if not -self.rank <= m < self.rank:
            raise ValueError(f"mode {m} out of range for rank {self.rank}")
        return m % self.rank

    def relabel(self, mapping) -> "Tensor":
        return Tensor(self._data, [mapping.get(l, l) for l in self._labels])

    def with_labels(self, labels: Sequence[str]) -> "Tensor":
        return Tensor(self._data, labels)

    def __repr__(self):
        return f"Tensor(extents={self.extents}, labels={self._labels})"


@dataclass(frozen=True)
class SvdResult:
    left: Tensor
    right: Tensor
    singular_values: np.ndarray
    discarded_weight: float


def _toggle_conj(label: str) -> str:
    return label[: -len(CONJ_TAG)] if label.endswith(CONJ_TAG) else label + CONJ_TAG


def _merge_labels(left: Iterable[str], right: Iterable[str]) -> list[str]:
    out = list(left)
    seen = set(out)
    for lab in right:
        while lab in seen:
            lab += "'"
        seen.add(lab)
        out.append(lab)
    return out


def contract(a: Tensor, b: Tensor, pairs) -> Tensor:
    """Sum over the mode pairs ``(mode_of_a, mode_of_b)``.

    The result carries the free modes of ``a`` in order, then those of ``b``.
    A free label of ``b`` that clashes with one of ``a`` gets a ``'`` suffix.
    """
    axes_a, axes_b = [], []
    for ma, mb in pairs:
        ia, ib = a.mode(ma), b.mode(mb)
        if ia in axes_a or ib in axes_b:
            raise ValueError(f"mode repeated in contraction pairs {pairs}")
        if a.extents[ia] != b.extents[ib]:
            raise DimensionError(
                f"cannot join mode {ia} (extent {a.extents[ia]}) "
                f"with mode {ib} (extent {b.extents[ib]})"
            )
        axes_a.append(ia)
        axes_b.append(ib)
    data = np.tensordot(a.data, b.data, axes=(axes_a, axes_b))
    labels = _merge_labels(
        (l for i, l in enumerate(a.labels) if i not in axes_a),
        (l for i, l in enumerate(b.labels) if i not in axes_b),
    )
    return Tensor(data, labels)


def contract_shared(a: Tensor, b: Tensor) -> Tensor:
    """Contract over every label the two tensors have in common."""
    shared = [l for l in a.labels if l in b.labels]
    return contract(a, b, [(l, l) for l in shared])


def permute(t: Tensor, new_order) -> Tensor:
    order = [t.mode(m) for m in new_order]
    if sorted(order) != list(range(t.rank)):
        raise ValueError(f"{list(new_order)} is not a permutation of the modes of {t!r}")
    return Tensor(np.transpose(t.data, order), [t.labels[i] for i in order])


def reshape(t: Tensor, new_extents: Sequence[int], labels=None) -> Tensor:
    new_extents = tuple(int(e) for e in new_extents)
    if int(np.prod(new_extents, dtype=np.int64)) != t.size:
        raise DimensionError(f"cannot reshape extents {t.extents} into {new_extents}")
    return Tensor(t.data.reshape(new_extents), labels)


def conjugate(t: Tensor) -> Tensor:
    """Complex conjugate; labels gain (or lose) the ``*`` tag."""
    return Tensor(np.conj(t.data), [_toggle_conj(l) for l in t.labels])


def fix_gauge(u: np.ndarray, vh: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate each singular pair so the largest entry of the left vector is real >= 0."""
    if u.shape[1] == 0:
        return u, vh
    idx = np.argmax(np.abs(u), axis=0)
    pivot = u[idx, np.arange(u.shape[1])]
    mag = np.abs(pivot)
    phase = np.where(mag > 0, np.conj(pivot) / np.where(mag > 0, mag, 1.0), 1.0)
    return u * phase[None, :], vh * np.conj(phase)[:, None]


def truncation_rank(s: np.ndarray, max_kept: int | None, cutoff: float) -> int:
    """Number of leading singular values kept under the relative cutoff and hard cap."""
    if s.size == 0:
        return 0
    smax = s[0]
    if smax == 0.0:
        return 1
    keep = int(np.count_nonzero(s > smax * NUMERICAL_ZERO))
    if cutoff > 0:
        keep = min(keep, int(np.count_nonzero(s >= cutoff * smax)))
    if max_kept is not None:
        keep = min(keep, int(max_kept))
    return max(keep, 1)


def svd_split(
    t: Tensor,
    left_modes,
    max_kept: int | None = None,
    cutoff: float = 0.0,
    absorb: str = "both",
    bond: str = "bond",
) -> SvdResult:
    """Split ``t`` into ``left`` (left modes + bond) and ``right`` (bond + the rest).

    ``absorb`` selects where the kept singular values go: ``"both"`` puts
    ``sqrt(s)`` on each factor, ``"left"``/``"right"`` put all of ``s`` on one side.
    """
    lm = [t.mode(m) for m in left_modes]
    if len(set(lm)) != len(lm):
        raise ValueError("left_modes contains duplicates")
    if not lm or len(lm) >= t.rank:
        raise ValueError("left_modes must be a nonempty proper subset of the modes")
    if max_kept is not None and max_kept < 1:
        raise ValueError("max_kept must be positive")
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    rm = [i for i in range(t.rank) if i not in lm]
    lext = [t.extents[i] for i in lm]
    rext = [t.extents[i] for i in rm]
    mat = np.transpose(t.data, lm + rm).reshape(int(np.prod(lext)), int(np.prod(rext)))

    try:
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        import scipy.linalg

        u, s, vh = scipy.linalg.svd(mat, full_matrices=False, lapack_driver="gesvd")
    u, vh = fix_gauge(u, vh)

    keep = truncation_rank(s, max_kept, cutoff)
    total = float(np.sum(s**2))
    kept = float(np.sum(s[:keep] ** 2))
    discarded = 0.0 if total == 0.0 else min(max((total - kept) / total, 0.0), 1.0)

    u, s_kept, vh = u[:, :keep], s[:keep], vh[:keep, :]
    if absorb == "both":
        root = np.sqrt(s_kept)
        u = u * root[None, :]
        vh = vh * root[:, None]
    elif absorb == "left":
        u = u * s_kept[None, :]
    elif absorb == "right":
        vh = vh * s_kept[:, None]
    else:
        raise ValueError(f"absorb must be 'both', 'left' or 'right', not {absorb!r}")

    left_labels = [t.labels[i] for i in lm]
    right_labels = [t.labels[i] for i in rm]
    while bond in left_labels or bond in right_labels:
        bond += "'"
    left = Tensor(u.reshape(lext + [keep]), left_labels + [bond])
    right = Tensor(vh.reshape([keep] + rext), [bond] + right_labels)
    return SvdResult(left, right, s_kept.copy(), discarded)
