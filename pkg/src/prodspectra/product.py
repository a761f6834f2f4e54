"""The (r, s) product model and its support edge record."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class ProductSpec:
    """Product of ``r - s`` Ginibre factors and ``s`` truncated Haar unitaries.

    ``nu`` holds the dimension offsets nu_1..nu_r (nu_0 = 0 implicitly) and
    ``ell_offsets`` the extra unitary orders, so that factor j (1-based) is
    (n + nu_j) x (n + nu_{j-1}) and truncated unitary j comes from a Haar
    matrix of order 2n + nu_j + nu_{j-1} + ell_offsets_j.
    """

    r: int
    s: int = 0
    nu: tuple = field(default=None)
    ell_offsets: tuple = field(default=None)

    def __post_init__(self):
        r, s = int(self.r), int(self.s)
        if r < 1:
            raise ValueError("r must be >= 1")
        if not 0 <= s <= r:
            raise ValueError(f"need 0 <= s <= r, got r={r}, s={s}")
        nu = tuple(int(v) for v in self.nu) if self.nu is not None else (0,) * r
        extra = tuple(int(v) for v in self.ell_offsets) if self.ell_offsets is not None else (0,) * s
        if len(nu) != r or any(v < 0 for v in nu):
            raise ValueError("nu needs r nonnegative offsets")
        if len(extra) != s or any(v < 0 for v in extra):
            raise ValueError("ell_offsets needs s nonnegative entries")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "ell_offsets", extra)

    @property
    def regime(self) -> str:
        """``"contour"`` for r >= s + 2, else ``"murr1"`` (s = r - 1) or ``"murr"`` (s = r)."""
        if self.r >= self.s + 2:
            return "contour"
        return "murr1" if self.s == self.r - 1 else "murr"

    def offset(self, j: int) -> int:
        return 0 if j == 0 else self.nu[j - 1]

    def factor_shape(self, j: int, n: int) -> tuple[int, int]:
        """Shape of factor j (1-based, rightmost factor is j = 1)."""
        return n + self.offset(j), n + self.offset(j - 1)

    def unitary_order(self, j: int, n: int) -> int:
        """Order of the Haar unitary truncated to give factor j (j <= s)."""
        if not 1 <= j <= self.s:
            raise ValueError(f"factor {j} is not a truncated unitary")
        return 2 * n + self.offset(j) + self.offset(j - 1) + self.ell_offsets[j - 1]

    def as_dict(self) -> dict:
        return {"r": self.r, "s": self.s, "nu": list(self.nu), "ell_offsets": list(self.ell_offsets)}


@dataclass(frozen=True)
class SupportEdge:
    """Right edge x_star of the support and the branch point w_star where it is attained."""

    w_star: float
    x_star: float

    def __post_init__(self):
        if not (self.w_star > 1 or math.isinf(self.w_star)):
            raise ValueError(f"w_star must exceed 1, got {self.w_star}")
        if not self.x_star > 0:
            raise ValueError(f"x_star must be positive, got {self.x_star}")
