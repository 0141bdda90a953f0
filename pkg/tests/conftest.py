import numpy as np
import pytest

from rigidframes import ProteinFrames, backbone_from_frames, exp_map

AA_NAMES = [
    "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE",
    "LEU", "LYS", "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
]


def pdb_atom_line(serial, name, resname, chain, resseq, xyz, icode=" ", altloc=" "):
    """One PDB v3.3 fixed-width ATOM record."""
    return (
        f"ATOM  {serial:>5d} {name:<4s}{altloc}{resname:<3s} {chain}"
        f"{resseq:>4d}{icode}   {xyz[0]:8.3f}{xyz[1]:8.3f}{xyz[2]:8.3f}"
        f"  1.00  0.00           {name.strip()[0]}"
    )


def pdb_from_backbone(bb, chain="A", start_serial=1, start_resseq=1):
    """PDB text for a backbone; residue names follow the aa codes."""
    lines = []
    serial = start_serial
    for i, res in enumerate(bb.residues):
        resname = AA_NAMES[res.aa - 1] if 1 <= res.aa <= 20 else "UNK"
        for name, xyz in ((" N", res.n), (" CA", res.ca), (" C", res.c)):
            lines.append(pdb_atom_line(serial, name, resname, chain, start_resseq + i, xyz))
            serial += 1
    lines.append("TER")
    lines.append("END")
    return "\n".join(lines) + "\n"


def random_rotation(rng, scale=1.0):
    return exp_map(rng.standard_normal(3) * scale)


def random_frames(L, rng, spread=(3.0, 1.7, 0.9)):
    """Random frames with anisotropic positions (well-separated inertia)."""
    t = rng.standard_normal((L, 3)) * np.asarray(spread)
    r = np.array([random_rotation(rng) for _ in range(L)])
    aa = rng.integers(1, 22, L)
    return ProteinFrames(t, r, aa)


def helix_frames(L=12, seed=7):
    """Deterministic helix-like structure with idealizable geometry."""
    rng = np.random.default_rng(seed)
    t = np.array([[2.3 * np.cos(0.6 * i), 2.3 * np.sin(0.6 * i), 1.5 * i] for i in range(L)])
    r = np.array([random_rotation(rng, 0.8) for _ in range(L)])
    aa = rng.integers(1, 21, L)
    return ProteinFrames(t, r, aa)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def helix_pdb_text():
    return pdb_from_backbone(backbone_from_frames(helix_frames()))


@pytest.fixture
def fixture_corpus():
    """Synthetic PDB corpus: several sizes and geometries, deterministic."""
    texts = []
    for k, L in enumerate((8, 12, 20, 33, 50)):
        rng = np.random.default_rng(100 + k)
        frames = random_frames(L, rng)
        texts.append(pdb_from_backbone(backbone_from_frames(frames)))
    return texts
