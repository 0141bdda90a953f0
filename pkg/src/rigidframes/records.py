"""Bit-exact JSONL serialization of frames, pairs, and targets.

One JSON object per line, keys in a fixed order, floats rendered with 17
significant digits so a written record reads back bit-identical. Frames
records carry per-residue translations and unit quaternions plus a meta
block describing provenance (raw, canonical, perturb, md, integrated) and,
where applicable, noise parameters and the canonical pose.
"""

from __future__ import annotations

import json

import numpy as np

from .backbone import ProteinFrames
from .canonicalize import CanonicalPose
from .errors import MalformedRecord
from .so3 import matrix_from_quat, quat_from_matrix
from .views import Provenance, ViewPair

_META_KEYS = ("provenance", "pair", "sigma", "epsilon", "seed",
              "source", "s", "delta", "centroid", "axes", "moments")


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def dumps(obj) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if obj is None:
        return "null"
    return json.dumps(obj)


def frames_quats(frames: ProteinFrames) -> np.ndarray:
    """Per-residue unit quaternions (w >= 0) of the frame rotations."""
    return np.array([quat_from_matrix(r) for r in frames.r])


def ordered_meta(meta: dict) -> dict:
    out = {k: meta[k] for k in _META_KEYS if k in meta and meta[k] is not None}
    out.update({k: v for k, v in meta.items() if k not in _META_KEYS})
    return out


def pose_meta(pose: CanonicalPose) -> dict:
    return {
        "centroid": pose.centroid.tolist(),
        "axes": pose.axes.tolist(),
        "moments": pose.moments.tolist(),
    }


def frames_record(record_id: str, frames: ProteinFrames, meta: dict) -> dict:
    """Build a frames record dict ready for :func:`dumps`."""
    return {
        "id": record_id,
        "L": len(frames),
        "aa": frames.aa.tolist(),
        "t": frames.t.tolist(),
        "q": frames_quats(frames).tolist(),
        "meta": ordered_meta(meta),
    }


def record_frames(rec: dict) -> ProteinFrames:
    """Reconstruct :class:`ProteinFrames` from a frames record."""
    try:
        L = int(rec["L"])
        aa = np.asarray(rec["aa"], dtype=int)
        t = np.asarray(rec["t"], dtype=float)
        q = np.asarray(rec["q"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedRecord(f"bad frames record: {exc}") from exc
    if aa.shape != (L,) or t.shape != (L, 3) or q.shape != (L, 4):
        raise MalformedRecord(f"frames record arrays inconsistent with L={L}")
    r = np.array([matrix_from_quat(qi) for qi in q])
    return ProteinFrames(t, r, aa)


def provenance_meta(prov: Provenance) -> dict:
    return {
        "provenance": prov.kind,
        "sigma": prov.sigma,
        "epsilon": prov.epsilon,
        "seed": prov.seed,
        "source": prov.source,
        "s": prov.s,
        "delta": prov.delta,
    }


def pair_records(pair_id: str, pair: ViewPair) -> list[dict]:
    """Two consecutive frames records (roles g0, g1) for a view pair."""
    base = provenance_meta(pair.provenance)
    recs = []
    for role, frames, pose in (("g0", pair.g0, pair.pose0), ("g1", pair.g1, pair.pose1)):
        meta = dict(base)
        meta["pair"] = role
        if pose is not None:
            meta.update(pose_meta(pose))
        recs.append(frames_record(pair_id, frames, meta))
    return recs


def records_pairs(records: list[dict]) -> list[tuple[str, ViewPair]]:
    """Group consecutive g0/g1 records back into view pairs."""
    pairs = []
    i = 0
    while i < len(records):
        r0 = records[i]
        if i + 1 >= len(records):
            raise MalformedRecord(f"record {r0.get('id')!r}: dangling g0 without g1")
        r1 = records[i + 1]
        m0, m1 = r0.get("meta", {}), r1.get("meta", {})
        if m0.get("pair") != "g0" or m1.get("pair") != "g1" or r0.get("id") != r1.get("id"):
            raise MalformedRecord(f"records {i}, {i + 1} do not form a g0/g1 pair")
        prov = Provenance(
            kind=m0.get("provenance", "perturb"),
            sigma=m0.get("sigma"), epsilon=m0.get("epsilon"), seed=m0.get("seed"),
            source=m0.get("source"), s=m0.get("s"), delta=m0.get("delta"),
        )
        pairs.append((r0["id"], ViewPair(record_frames(r0), record_frames(r1), prov)))
        i += 2
    return pairs


def target_record(record_id: str, tau: float, u_trans, u_rot) -> dict:
    return {
        "id": record_id,
        "L": int(np.asarray(u_trans).shape[0]),
        "tau": float(tau),
        "u_t": np.asarray(u_trans).tolist(),
        "u_q": np.asarray(u_rot).tolist(),
    }


def write_jsonl(records: list[dict]) -> str:
    return "".join(dumps(rec) + "\n" for rec in records)


def read_jsonl(text: str) -> list[dict]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"line {lineno}: invalid JSON: {exc}") from exc
    return records


def csv_table(header: list[str], rows: list[list]) -> str:
    """CSV with 17-significant-digit floats (no quoting; fields are simple)."""
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return _fmt_float(v)
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
