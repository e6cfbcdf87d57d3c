"""Base graph 2 construction and lifting for the 5G-NR LDPC code.

The base matrix is read from a checked-in text table (one ``row col shift``
line per nonzero position, shifts from the lifting-size set that contains
Z = 128).  Expanding every entry into a Z x Z cyclic-shift block yields the
binary parity-check matrix; multiplying a length-Z block vector by the
block with shift ``s`` is a cyclic left rotation by ``s``.
"""

from dataclasses import dataclass, field
from importlib import resources

import numpy as np

BG2_ROWS = 42
BG2_COLS = 52
BG2_SYSTEMATIC_COLS = 10
BG2_CORE_PARITY_COLS = 4
_DATA_FILE = "bg2_set0.txt"


def load_bg2_shifts() -> dict[tuple[int, int], int]:
    """Read the raw (unreduced) shift table shipped with the package."""
    text = resources.files("w2a_owc.ldpc5g").joinpath("data", _DATA_FILE).read_text()
    entries: dict[tuple[int, int], int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        r_s, c_s, v_s = line.split()
        key = (int(r_s), int(c_s))
        if key in entries:
            raise ValueError(f"duplicate base-graph entry {key}")
        entries[key] = int(v_s)
    _validate_structure(entries)
    return entries


def _validate_structure(entries: dict[tuple[int, int], int]) -> None:
    if len(entries) != 197:
        raise ValueError(f"expected 197 base-graph entries, got {len(entries)}")
    rows = {r for r, _ in entries}
    cols = {c for _, c in entries}
    if rows != set(range(BG2_ROWS)) or max(cols) != BG2_COLS - 1:
        raise ValueError("base-graph dimensions are not 42 x 52")
    # Parity extension must be a shift-0 diagonal: row r owns column r + 10.
    for (r, c), v in entries.items():
        if c >= BG2_SYSTEMATIC_COLS + BG2_CORE_PARITY_COLS:
            if c != r + BG2_SYSTEMATIC_COLS or v != 0:
                raise ValueError(f"unexpected extension entry at ({r}, {c})")


@dataclass(frozen=True)
class BaseGraphBG2:
    """BG2 with shifts reduced modulo the lifting size."""

    z: int
    entries: dict[tuple[int, int], int]
    rows: int = BG2_ROWS
    cols: int = BG2_COLS

    @classmethod
    def load(cls, z: int) -> "BaseGraphBG2":
        raw = load_bg2_shifts()
        return cls(z=z, entries={k: v % z for k, v in raw.items()})

    def row_edges(self, r: int) -> list[tuple[int, int]]:
        """(column, shift) pairs of base row ``r``, in column order."""
        return sorted((c, s) for (rr, c), s in self.entries.items() if rr == r)


@dataclass(frozen=True)
class LiftedCode:
    """The lifted code actually used on air.

    K = 10 Z information bits, 42 Z parity bits.  The first 2 Z systematic
    bits are punctured and the transmission window keeps the next 17 Z
    bits, so N_tx = 2176 for Z = 128.  ``n_full`` is the codeword length
    after puncturing (50 Z); the internal graph spans all 52 Z positions.
    """

    z: int
    bg: BaseGraphBG2
    k: int = field(init=False)
    n_full: int = field(init=False)
    n_tx: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", BG2_SYSTEMATIC_COLS * self.z)
        object.__setattr__(self, "n_full", (BG2_COLS - 2) * self.z)
        object.__setattr__(self, "n_tx", 17 * self.z)

    @property
    def rate(self) -> float:
        return self.k / self.n_tx

    @property
    def n_positions(self) -> int:
        """All variable positions of the lifted graph (52 Z)."""
        return BG2_COLS * self.z

    @property
    def tx_start(self) -> int:
        """First transmitted position: the punctured 2 Z bits come before."""
        return 2 * self.z


_CACHED: dict[int, LiftedCode] = {}


def build_lifted_code(z: int = 128) -> LiftedCode:
    """Build (and cache) the lifted BG2 code for the given lifting size.

    Z = 128 is the only size this system transmits with: it is the unique
    legal lifting size with 10 Z = 1280 information bits and no filler.
    """
    if z not in _CACHED:
        _CACHED[z] = LiftedCode(z=z, bg=BaseGraphBG2.load(z))
    return _CACHED[z]


def expand_parity_matrix(code: LiftedCode):
    """Expanded sparse parity-check matrix over all 52 Z positions.

    Row-by-row expansion of the cyclic-shift blocks; used by the syndrome
    check and as a reference for tests.  Returns ``scipy.sparse.csr_matrix``
    with uint8 entries.
    """
    from scipy.sparse import csr_matrix

    z = code.z
    row_idx = []
    col_idx = []
    for (r, c), s in code.bg.entries.items():
        k = np.arange(z)
        row_idx.append(r * z + k)
        col_idx.append(c * z + (k + s) % z)
    rows = np.concatenate(row_idx)
    cols = np.concatenate(col_idx)
    data = np.ones(len(rows), dtype=np.uint8)
    shape = (code.bg.rows * z, code.n_positions)
    return csr_matrix((data, (rows, cols)), shape=shape)


def syndrome_check(codeword_full, code: LiftedCode | None = None) -> bool:
    """True iff every lifted parity check is satisfied.

    ``codeword_full`` must cover all 52 Z positions, punctured bits included.
    """
    if code is None:
        code = build_lifted_code()
    bits = np.asarray(codeword_full)
    if bits.shape != (code.n_positions,):
        raise ValueError(
            f"full codeword must have {code.n_positions} bits, got {bits.shape}"
        )
    h = _sparse_h(code)
    return not ((h @ bits.astype(np.uint8)) % 2).any()


_H_CACHE: dict[int, object] = {}


def _sparse_h(code: LiftedCode):
    if code.z not in _H_CACHE:
        _H_CACHE[code.z] = expand_parity_matrix(code)
    return _H_CACHE[code.z]
