"""Protein backbones: PDB parsing, rigid frames, and distogram binning.

A backbone is the ordered N / CA / C atom triple per residue. Each residue
defines a rigid frame via Gram-Schmidt on the C-CA and N-CA bond vectors,
with the CA position as the translation. Reconstruction places atoms at
idealized local coordinates, so frames -> backbone -> frames is exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import CollinearAtoms, MalformedRecord, NoResidues

logger = logging.getLogger(__name__)

# 20 standard amino acids, coded 1..20 in alphabetical order of the
# three-letter name; anything else (MSE, UNK, ...) maps to 21.
AA_CODES = {
    "ALA": 1, "ARG": 2, "ASN": 3, "ASP": 4, "CYS": 5,
    "GLN": 6, "GLU": 7, "GLY": 8, "HIS": 9, "ILE": 10,
    "LEU": 11, "LYS": 12, "MET": 13, "PHE": 14, "PRO": 15,
    "SER": 16, "THR": 17, "TRP": 18, "TYR": 19, "VAL": 20,
}
UNKNOWN_AA = 21

# Idealized local geometry used for reconstruction, in the residue frame:
# CA at the origin, C on +x, N in the xy-plane at the N-CA-C angle.
CA_C_LENGTH = 1.525
N_CA_LENGTH = 1.458
N_CA_C_ANGLE = np.deg2rad(111.2)

MIN_BOND_LENGTH = 0.5
COLLINEAR_TOL = 1e-4

DISTOGRAM_MIN = 1e-5
DISTOGRAM_MAX = 20.0
DISTOGRAM_BINS = 22
# 22 edges bound 21 finite bins on [min, max); the 22nd bin is [max, inf).
_DISTOGRAM_EDGES = np.linspace(DISTOGRAM_MIN, DISTOGRAM_MAX, DISTOGRAM_BINS)


def aa_code(resname: str) -> int:
    """Integer code of a three-letter residue name (21 when non-standard)."""
    return AA_CODES.get(resname.strip().upper(), UNKNOWN_AA)


@dataclass
class Residue:
    """One residue's backbone atoms (Angstrom) and amino-acid code."""

    n: np.ndarray
    ca: np.ndarray
    c: np.ndarray
    aa: int

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float)
        self.ca = np.asarray(self.ca, dtype=float)
        self.c = np.asarray(self.c, dtype=float)

    def validate(self):
        if np.linalg.norm(self.c - self.ca) <= MIN_BOND_LENGTH:
            raise ValueError("C-CA distance below 0.5 A")
        if np.linalg.norm(self.n - self.ca) <= MIN_BOND_LENGTH:
            raise ValueError("N-CA distance below 0.5 A")
        if not 1 <= self.aa <= 21:
            raise ValueError(f"amino-acid code {self.aa} outside 1..21")


@dataclass
class ProteinBackbone:
    """Ordered residues of a single chain. ``skipped`` counts incomplete ones."""

    residues: list[Residue]
    skipped: int = 0

    def __len__(self):
        return len(self.residues)


class RigidTransform:
    """One residue's pose: translation (3,) and rotation (3, 3)."""

    __slots__ = ("t", "r")

    def __init__(self, t, r):
        self.t = np.asarray(t, dtype=float)
        self.r = np.asarray(r, dtype=float)


@dataclass
class ProteinFrames:
    """Per-residue rigid frames: t (L, 3), r (L, 3, 3), aa (L,)."""

    t: np.ndarray
    r: np.ndarray
    aa: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        self.aa = np.asarray(self.aa, dtype=int)
        L = self.t.shape[0]
        if self.t.shape != (L, 3) or self.r.shape != (L, 3, 3) or self.aa.shape != (L,):
            raise ValueError("inconsistent frame array shapes")

    def __len__(self):
        return self.t.shape[0]

    def __getitem__(self, i) -> RigidTransform:
        return RigidTransform(self.t[i], self.r[i])

    def copy(self) -> "ProteinFrames":
        return ProteinFrames(self.t.copy(), self.r.copy(), self.aa.copy())


def _atom_fields(line: str):
    name = line[12:16].strip()
    altloc = line[16]
    resname = line[17:20]
    chain = line[21]
    try:
        resseq = int(line[22:26])
        xyz = np.array([float(line[30:38]), float(line[38:46]), float(line[46:54])])
    except ValueError as exc:
        raise MalformedRecord(f"unparseable ATOM record: {line.rstrip()!r}") from exc
    icode = line[26] if len(line) > 26 else " "
    return name, altloc, resname, chain, resseq, icode.strip(), xyz


def parse_backbone(text: str, chain: str | None = None) -> ProteinBackbone:
    """Extract the N/CA/C backbone of one chain from PDB-format text.

    Only the first MODEL is read. ``chain`` selects a chain id; by default
    the first chain encountered is used. Alternate locations other than
    blank or 'A' are ignored; duplicate atoms keep the first occurrence.
    HETATM records are accepted so modified residues such as MSE are kept
    (they map to the unknown amino-acid code). Residues missing any of
    N/CA/C are skipped and counted.
    """
    residues: dict[tuple[int, str], dict] = {}
    for line in text.splitlines():
        rec = line[:6]
        if rec.startswith("ENDMDL"):
            break
        if rec not in ("ATOM  ", "HETATM"):
            continue
        name, altloc, resname, line_chain, resseq, icode, xyz = _atom_fields(line)
        if name not in ("N", "CA", "C"):
            continue
        if altloc not in (" ", "A"):
            continue
        if chain is None:
            chain = line_chain
        if line_chain != chain:
            continue
        entry = residues.setdefault((resseq, icode), {"resname": resname})
        entry.setdefault(name, xyz)

    out = []
    skipped = 0
    for key in sorted(residues):
        entry = residues[key]
        if all(a in entry for a in ("N", "CA", "C")):
            out.append(Residue(entry["N"], entry["CA"], entry["C"], aa_code(entry["resname"])))
        else:
            skipped += 1
    if skipped:
        logger.warning("skipped %d residue(s) missing backbone atoms", skipped)
    if len(out) < 2:
        raise NoResidues(f"found {len(out)} complete residues, need at least 2")
    return ProteinBackbone(out, skipped=skipped)


def parse_models(text: str, chain: str | None = None) -> list[ProteinBackbone]:
    """Parse every MODEL block of a multi-model PDB (one block if none)."""
    chunks: list[list[str]] = []
    current: list[str] | None = None
    saw_model = False
    for line in text.splitlines():
        if line.startswith("MODEL"):
            saw_model = True
            current = []
        elif line.startswith("ENDMDL"):
            if current:
                chunks.append(current)
            current = None
        elif current is not None:
            current.append(line)
    if not saw_model:
        return [parse_backbone(text, chain)]
    if current:
        chunks.append(current)
    return [parse_backbone("\n".join(chunk), chain) for chunk in chunks]


def list_chains(text: str) -> list[str]:
    """Chain ids of the first model, in order of first appearance."""
    seen: list[str] = []
    for line in text.splitlines():
        if line[:6].startswith("ENDMDL"):
            break
        if line[:6] in ("ATOM  ", "HETATM") and len(line) > 21:
            c = line[21]
            if c not in seen:
                seen.append(c)
    return seen


def frames_from_backbone(bb: ProteinBackbone) -> ProteinFrames:
    """Gram-Schmidt rigid frames from backbone atoms.

    Per residue: v1 = C - CA and v2 = N - CA; e1 = v1 normalized, e2 the
    normalized rejection of v2 from e1, e3 = e1 x e2; the rotation has
    columns [e1, e2, e3] and the translation is CA.
    """
    L = len(bb)
    t = np.empty((L, 3))
    r = np.empty((L, 3, 3))
    aa = np.empty(L, dtype=int)
    for i, res in enumerate(bb.residues):
        res.validate()
        v1 = res.c - res.ca
        v2 = res.n - res.ca
        n1 = np.linalg.norm(v1)
        n2 = np.linalg.norm(v2)
        sin_angle = np.linalg.norm(np.cross(v1, v2)) / (n1 * n2)
        if sin_angle < COLLINEAR_TOL:
            raise CollinearAtoms(f"residue {i}: N, CA, C nearly collinear")
        e1 = v1 / n1
        u2 = v2 - (e1 @ v2) * e1
        e2 = u2 / np.linalg.norm(u2)
        e3 = np.cross(e1, e2)
        t[i] = res.ca
        r[i] = np.column_stack([e1, e2, e3])
        aa[i] = res.aa
    return ProteinFrames(t, r, aa)


def backbone_from_frames(frames: ProteinFrames) -> ProteinBackbone:
    """Idealized backbone atoms from rigid frames (inverse of frame building)."""
    local_c = np.array([CA_C_LENGTH, 0.0, 0.0])
    local_n = N_CA_LENGTH * np.array([np.cos(N_CA_C_ANGLE), np.sin(N_CA_C_ANGLE), 0.0])
    residues = []
    for i in range(len(frames)):
        t, r = frames.t[i], frames.r[i]
        residues.append(Residue(t + r @ local_n, t.copy(), t + r @ local_c, int(frames.aa[i])))
    return ProteinBackbone(residues)


def distogram_bin(d: float) -> int:
    """Index in [0, 21] of the distogram bin containing distance ``d``.

    Bins 0..20 partition [1e-5, 20.0) into equal widths; bin 21 extends to
    infinity; distances below the minimum fall into bin 0.
    """
    if d < 0.0:
        raise ValueError("distance must be nonnegative")
    idx = int(np.searchsorted(_DISTOGRAM_EDGES, d, side="right")) - 1
    return min(max(idx, 0), DISTOGRAM_BINS - 1)
