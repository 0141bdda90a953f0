import numpy as np
import pytest

from rigidframes import (
    CollinearAtoms,
    MalformedRecord,
    NoResidues,
    ProteinFrames,
    Residue,
    backbone_from_frames,
    distogram_bin,
    frames_from_backbone,
    parse_backbone,
    parse_models,
)
from rigidframes.backbone import (
    CA_C_LENGTH,
    DISTOGRAM_BINS,
    DISTOGRAM_MAX,
    DISTOGRAM_MIN,
    ProteinBackbone,
    aa_code,
    list_chains,
)

from conftest import helix_frames, pdb_atom_line, pdb_from_backbone, random_frames

TWO_RESIDUE_PDB = "\n".join([
    pdb_atom_line(1, " N", "ALA", "A", 1, (0.0, 1.458, 0.0)),
    pdb_atom_line(2, " CA", "ALA", "A", 1, (0.0, 0.0, 0.0)),
    pdb_atom_line(3, " C", "ALA", "A", 1, (1.525, 0.0, 0.0)),
    pdb_atom_line(4, " N", "GLY", "A", 2, (3.0, 1.458, 0.0)),
    pdb_atom_line(5, " CA", "GLY", "A", 2, (3.0, 0.0, 0.0)),
    pdb_atom_line(6, " C", "GLY", "A", 2, (4.525, 0.0, 0.0)),
    "END",
]) + "\n"


def test_parse_two_residues_exact():
    bb = parse_backbone(TWO_RESIDUE_PDB)
    assert len(bb) == 2
    assert np.array_equal(bb.residues[0].ca, [0.0, 0.0, 0.0])
    assert np.array_equal(bb.residues[0].n, [0.0, 1.458, 0.0])
    assert np.array_equal(bb.residues[1].c, [4.525, 0.0, 0.0])
    assert bb.residues[0].aa == 1  # ALA
    assert bb.residues[1].aa == 8  # GLY


def test_parse_skips_residue_missing_c():
    lines = TWO_RESIDUE_PDB.splitlines()
    extra = [
        pdb_atom_line(7, " N", "SER", "A", 3, (6.0, 1.458, 0.0)),
        pdb_atom_line(8, " CA", "SER", "A", 3, (6.0, 0.0, 0.0)),
        # C missing
    ]
    bb = parse_backbone("\n".join(lines[:-1] + extra + ["END"]))
    assert len(bb) == 2
    assert bb.skipped == 1


def test_parse_mse_maps_to_unknown():
    text = TWO_RESIDUE_PDB.replace("ALA", "MSE")
    bb = parse_backbone(text)
    assert bb.residues[0].aa == 21
    assert aa_code("MSE") == 21
    assert aa_code("val") == 20


def test_parse_requires_two_residues():
    single = "\n".join(TWO_RESIDUE_PDB.splitlines()[:3]) + "\n"
    with pytest.raises(NoResidues):
        parse_backbone(single)
    with pytest.raises(NoResidues):
        parse_backbone("")


def test_parse_malformed_coordinates():
    bad = TWO_RESIDUE_PDB.replace("   0.000   1.458", "   x.000   1.458")
    with pytest.raises(MalformedRecord):
        parse_backbone(bad)


def test_parse_first_chain_and_selection():
    chain_b = pdb_from_backbone(backbone_from_frames(helix_frames(5, seed=3)), chain="B")
    text = TWO_RESIDUE_PDB.replace("END\n", "") + chain_b
    assert list_chains(text) == ["A", "B"]
    assert len(parse_backbone(text)) == 2
    assert len(parse_backbone(text, chain="B")) == 5


def test_parse_altloc_prefers_a():
    lines = TWO_RESIDUE_PDB.splitlines()
    dup = pdb_atom_line(9, " CA", "ALA", "A", 1, (9.0, 9.0, 9.0), altloc="B")
    text = "\n".join([dup] + lines)
    bb = parse_backbone(text)
    assert np.array_equal(bb.residues[0].ca, [0.0, 0.0, 0.0])


def test_parse_models_multi():
    m1 = pdb_from_backbone(backbone_from_frames(helix_frames(4, seed=1)))
    m2 = pdb_from_backbone(backbone_from_frames(helix_frames(4, seed=2)))
    text = "MODEL        1\n" + m1 + "ENDMDL\nMODEL        2\n" + m2 + "ENDMDL\nEND\n"
    models = parse_models(text)
    assert len(models) == 2
    assert len(models[0]) == 4
    assert len(parse_models(m1)) == 1


def test_frames_axis_aligned_construction():
    res = Residue(n=[0.0, 1.0, 0.0], ca=[0.0, 0.0, 0.0], c=[1.0, 0.0, 0.0], aa=1)
    frames = frames_from_backbone(ProteinBackbone([res, res]))
    assert np.allclose(frames.t[0], [0.0, 0.0, 0.0])
    assert np.allclose(frames.r[0], np.eye(3), atol=1e-15)


def test_frames_first_column_along_c_minus_ca(rng):
    for _ in range(20):
        ca = rng.standard_normal(3)
        c = ca + rng.standard_normal(3)
        n = ca + rng.standard_normal(3)
        res = Residue(n=n, ca=ca, c=c, aa=5)
        if np.linalg.norm(c - ca) < 0.6 or np.linalg.norm(n - ca) < 0.6:
            continue
        sin = np.linalg.norm(np.cross(c - ca, n - ca))
        sin /= np.linalg.norm(c - ca) * np.linalg.norm(n - ca)
        if sin < 1e-3:
            continue
        frames = frames_from_backbone(ProteinBackbone([res, res]))
        e1 = (c - ca) / np.linalg.norm(c - ca)
        assert np.allclose(frames.r[0][:, 0], e1, atol=1e-12)


def test_frames_match_qr_oracle(rng):
    # oracle: QR factorization of [v1, v2] with positive-diagonal sign fix
    for _ in range(50):
        ca = rng.standard_normal(3) * 2
        c = ca + rng.standard_normal(3)
        n = ca + rng.standard_normal(3)
        v1, v2 = c - ca, n - ca
        if min(np.linalg.norm(v1), np.linalg.norm(v2)) < 0.6:
            continue
        sin = np.linalg.norm(np.cross(v1, v2)) / (np.linalg.norm(v1) * np.linalg.norm(v2))
        if sin < 1e-3:
            continue
        q, r = np.linalg.qr(np.column_stack([v1, v2]))
        for k in range(2):
            if r[k, k] < 0:
                q[:, k] = -q[:, k]
        expected = np.column_stack([q[:, 0], q[:, 1], np.cross(q[:, 0], q[:, 1])])
        res = Residue(n=n, ca=ca, c=c, aa=1)
        frames = frames_from_backbone(ProteinBackbone([res, res]))
        assert np.abs(frames.r[0] - expected).max() < 1e-9


def test_frames_collinear_raises():
    res = Residue(n=[2.0, 0.0, 0.0], ca=[0.0, 0.0, 0.0], c=[1.0, 0.0, 0.0], aa=1)
    with pytest.raises(CollinearAtoms):
        frames_from_backbone(ProteinBackbone([res, res]))


def test_frames_orthonormal_on_corpus(fixture_corpus):
    for text in fixture_corpus:
        frames = frames_from_backbone(parse_backbone(text))
        for r in frames.r:
            assert np.abs(r.T @ r - np.eye(3)).max() < 1e-9
            assert abs(np.linalg.det(r) - 1.0) < 1e-9


def test_frames_rigid_equivariance(rng):
    from rigidframes import exp_map

    frames = helix_frames(10, seed=4)
    bb = backbone_from_frames(frames)
    base = frames_from_backbone(bb)
    rot = exp_map(rng.standard_normal(3))
    shift = rng.standard_normal(3) * 5
    moved = ProteinBackbone([
        Residue(rot @ res.n + shift, rot @ res.ca + shift, rot @ res.c + shift, res.aa)
        for res in bb.residues
    ])
    got = frames_from_backbone(moved)
    assert np.abs(got.t - (base.t @ rot.T + shift)).max() < 1e-9
    assert np.abs(got.r - np.einsum("ab,ibc->iac", rot, base.r)).max() < 1e-9


def test_reconstruction_identity_frame():
    frames = ProteinFrames(np.zeros((1, 3)), np.eye(3)[None], np.array([1]))
    bb = backbone_from_frames(frames)
    assert np.allclose(bb.residues[0].ca, [0.0, 0.0, 0.0])
    assert np.allclose(bb.residues[0].c, [CA_C_LENGTH, 0.0, 0.0])


def test_reconstruction_roundtrip(rng):
    frames = random_frames(15, rng)
    back = frames_from_backbone(backbone_from_frames(frames))
    assert np.abs(back.t - frames.t).max() < 1e-9
    assert np.abs(back.r - frames.r).max() < 1e-9
    assert np.array_equal(back.aa, frames.aa)


def test_reconstruction_translation_equivariance(rng):
    frames = random_frames(6, rng)
    shifted = ProteinFrames(frames.t + [5.0, 0.0, 0.0], frames.r, frames.aa)
    bb0 = backbone_from_frames(frames)
    bb1 = backbone_from_frames(shifted)
    for r0, r1 in zip(bb0.residues, bb1.residues):
        assert np.allclose(r1.n - r0.n, [5.0, 0.0, 0.0], atol=1e-12)
        assert np.allclose(r1.c - r0.c, [5.0, 0.0, 0.0], atol=1e-12)


def test_distogram_last_bin_extends_to_infinity():
    assert distogram_bin(25.0) == 21
    assert distogram_bin(DISTOGRAM_MAX) == 21
    assert distogram_bin(1e9) == 21


def test_distogram_below_minimum():
    assert distogram_bin(0.0) == 0
    assert distogram_bin(DISTOGRAM_MIN / 2) == 0


def test_distogram_matches_edge_scan_oracle():
    # oracle: explicit scan over the linearly spaced edges
    edges = np.linspace(DISTOGRAM_MIN, DISTOGRAM_MAX, DISTOGRAM_BINS)
    for d in (10.0, 0.5, 19.99, DISTOGRAM_MIN, 3.3333):
        scan = sum(1 for e in edges if e <= d) - 1
        scan = min(max(scan, 0), DISTOGRAM_BINS - 1)
        assert distogram_bin(d) == scan
    assert distogram_bin(10.0) == 10  # frozen from the scan above


def test_distogram_monotone_and_partitioning():
    ds = np.linspace(0.0, 25.0, 5000)
    bins = [distogram_bin(d) for d in ds]
    assert all(b1 <= b2 for b1, b2 in zip(bins, bins[1:]))
    # bins 0..20 tile [min, max) without gaps
    edges = np.linspace(DISTOGRAM_MIN, DISTOGRAM_MAX, DISTOGRAM_BINS)
    for k in range(DISTOGRAM_BINS - 1):
        assert distogram_bin(edges[k]) == k
        assert distogram_bin(np.nextafter(edges[k + 1], 0.0)) == k
    with pytest.raises(ValueError):
        distogram_bin(-1.0)


def test_residue_validation():
    with pytest.raises(ValueError):
        Residue(n=[0.1, 0, 0], ca=[0, 0, 0], c=[1, 0, 0], aa=1).validate()
    with pytest.raises(ValueError):
        Residue(n=[0, 1, 0], ca=[0, 0, 0], c=[1, 0, 0], aa=25).validate()
