"""Command-line pipeline: frames -> canonicalize -> views -> flow matching.

Subcommands operate on the JSONL frames format (see :mod:`.records`) and
are deterministic given --seed: record-level work is mapped over a thread
pool with ordered output, and all randomness flows through per-residue
substreams, so outputs are byte-identical across runs and thread counts.

Exit codes: 0 success, 2 for usage or input-parse failures, 3 for library
errors (the error class name is printed on stderr).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import backbone as bb
from . import flowmatch as fm
from . import records as rec
from .canonicalize import canonicalize
from .errors import MalformedRecord, NoResidues, RigidFramesError
from .igso3 import default_table, sample_angle
from .views import DEFAULT_DELTA_NS, PerturbConfig, TrajectorySeries, extract_md_pairs, make_phase1_pair

THREADS_ENV = "RIGID_FRAMES_THREADS"


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _write_output(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _threads(args) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        return max(1, int(env))
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def _pmap(fn, items, threads: int) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _load_predictor(name: str, pair):
    if name == "zero":
        return fm.ZeroPredictor()
    if name == "oracle":
        return fm.SlerpOracle(pair)
    if name.startswith("table:"):
        data = rec.read_jsonl(Path(name[len("table:"):]).read_text())[0]
        return fm.TabularPredictor(
            taus=tuple(data["taus"]),
            u_trans=np.asarray(data["u_trans"], dtype=float),
            u_rot=np.asarray(data["u_rot"], dtype=float),
        )
    raise ValueError(f"unknown predictor {name!r} (expected zero | oracle | table:PATH)")


def _parse_taus(text: str) -> list[float]:
    taus = [float(x) for x in text.split(",") if x.strip()]
    if not taus or any(not 0.0 <= t <= 1.0 for t in taus):
        raise ValueError("taus must be a comma-separated list within [0, 1]")
    return taus


def cmd_frames(args) -> int:
    try:
        text = _read_input(args.input)
        stem = "stdin" if args.input == "-" else Path(args.input).stem
        chains = bb.list_chains(text)
        if not chains:
            print("error: no residues in input", file=sys.stderr)
            return 2
        out = []
        for chain in chains:
            try:
                frames = bb.frames_from_backbone(bb.parse_backbone(text, chain))
            except NoResidues:
                print(f"warning: chain {chain!r} has no complete residues, skipped",
                      file=sys.stderr)
                continue
            record_id = stem if len(chains) == 1 else f"{stem}:{chain}"
            out.append(rec.frames_record(record_id, frames, {"provenance": "raw"}))
        if not out:
            print("error: no residues in any chain", file=sys.stderr)
            return 2
    except (NoResidues, MalformedRecord) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _write_output(args.output, rec.write_jsonl(out))
    return 0


def cmd_canonicalize(args) -> int:
    records = rec.read_jsonl(_read_input(args.input))

    def work(r):
        frames, pose = canonicalize(rec.record_frames(r))
        meta = {"provenance": "canonical", **rec.pose_meta(pose)}
        return rec.frames_record(r["id"], frames, meta)

    out = _pmap(work, records, _threads(args))
    _write_output(args.output, rec.write_jsonl(out))
    return 0


def cmd_perturb(args) -> int:
    records = rec.read_jsonl(_read_input(args.input))
    config = PerturbConfig(sigma=args.sigma, epsilon=args.epsilon, seed=args.seed)

    def work(r):
        pair = make_phase1_pair(rec.record_frames(r), config)
        return rec.pair_records(r["id"], pair)

    out = [line for group in _pmap(work, records, _threads(args)) for line in group]
    _write_output(args.output, rec.write_jsonl(out))
    return 0


def cmd_mdpairs(args) -> int:
    path = Path(args.input)
    if path.is_dir():
        files = sorted(path.glob("*.pdb"))
        if not files:
            print(f"error: no .pdb files in {path}", file=sys.stderr)
            return 2
        snapshots = [bb.parse_backbone(f.read_text(), args.chain) for f in files]
        source = path.name
    else:
        snapshots = bb.parse_models(_read_input(args.input), args.chain)
        source = "stdin" if args.input == "-" else path.stem
    times = [i * args.frame_spacing_ns for i in range(len(snapshots))]
    traj = TrajectorySeries(snapshots, times, source=source)
    pairs = extract_md_pairs(traj, delta=args.delta_ns, stride=args.stride_ns)
    out = []
    for k, pair in enumerate(pairs):
        out.extend(rec.pair_records(f"{source}:{k}", pair))
    _write_output(args.output, rec.write_jsonl(out))
    return 0


def cmd_fmtarget(args) -> int:
    pairs = rec.records_pairs(rec.read_jsonl(_read_input(args.input)))
    taus = _parse_taus(args.taus) if args.taus else list(fm.DEFAULT_TAUS)

    def work(item):
        pair_id, pair = item
        out_records = []
        for tau in taus:
            tgt = fm.target_velocity(pair, tau)
            out_records.append(rec.target_record(pair_id, tau, tgt.u_trans, tgt.u_rot))
        return out_records

    out = [line for group in _pmap(work, pairs, _threads(args)) for line in group]
    _write_output(args.output, rec.write_jsonl(out))
    return 0


def cmd_fmloss(args) -> int:
    pairs = rec.records_pairs(rec.read_jsonl(_read_input(args.input)))
    taus = _parse_taus(args.taus) if args.taus else list(fm.DEFAULT_TAUS)

    def work(item):
        pair_id, pair = item
        predictor = _load_predictor(args.predictor, pair)
        fwd = fm.directional_loss(predictor, pair, taus)
        bwd = fm.directional_loss(predictor, pair.swapped(), taus, fm.Direction.BACKWARD)
        rows = []
        for report in (fwd, bwd):
            rows.append([pair_id, report.direction.value, report.l_r3, report.l_so3,
                         report.total])
        rows.append([pair_id, fm.Direction.BIDIRECTIONAL.value, fwd.l_r3 + bwd.l_r3,
                     fwd.l_so3 + bwd.l_so3, fwd.total + bwd.total])
        return rows

    rows = [row for group in _pmap(work, pairs, _threads(args)) for row in group]
    _write_output(args.output, rec.csv_table(["id", "direction", "l_r3", "l_so3", "total"], rows))
    return 0


def cmd_integrate(args) -> int:
    pairs = rec.records_pairs(rec.read_jsonl(_read_input(args.input)))

    def work(item):
        pair_id, pair = item
        predictor = _load_predictor(args.predictor, pair)
        endpoint = fm.integrate_flow(predictor, pair.g0, args.steps)
        meta = {"provenance": "integrated", "steps": args.steps, "predictor": args.predictor}
        return rec.frames_record(pair_id, endpoint, meta)

    out = _pmap(work, pairs, _threads(args))
    _write_output(args.output, rec.write_jsonl(out))
    return 0


def cmd_sample_igso3(args) -> int:
    table = default_table(args.epsilon)
    rng = np.random.default_rng(args.seed)
    thetas = sample_angle(table, rng.random(args.n))
    rows = [[float(t)] for t in np.atleast_1d(thetas)]
    _write_output(args.output, rec.csv_table(["theta"], rows))
    return 0


# Records with these provenance values are canonical, so the centroid and
# inertia-diagonality invariants apply; perturb applies to the g0 role only.
_CANONICAL_PROVENANCE = ("canonical", "md")


def _verify_record(r) -> list[tuple[str, str, str, str]]:
    rid = str(r.get("id", "?"))
    rows = []
    try:
        frames = rec.record_frames(r)
    except MalformedRecord as exc:
        return [(rid, "schema", "FAIL", str(exc))]
    rows.append((rid, "schema", "PASS", ""))

    q = np.asarray(r["q"], dtype=float)
    norm_err = np.abs(np.linalg.norm(q, axis=1) - 1.0)
    worst = int(np.argmax(norm_err))
    if norm_err[worst] > 1e-9:
        rows.append((rid, "quat-norm", "FAIL",
                     f"residue {worst} norm deviation {norm_err[worst]:.3e}"))
    else:
        rows.append((rid, "quat-norm", "PASS", ""))

    meta = r.get("meta", {})
    prov = meta.get("provenance", "raw")
    canonical = prov in _CANONICAL_PROVENANCE or (prov == "perturb" and meta.get("pair") == "g0")
    if not canonical:
        rows.append((rid, "centroid", "SKIP", f"provenance {prov}"))
        rows.append((rid, "inertia-diagonal", "SKIP", f"provenance {prov}"))
        return rows

    centroid = np.linalg.norm(frames.t.mean(axis=0))
    rows.append((rid, "centroid", "PASS" if centroid < 1e-6 else "FAIL",
                 f"|centroid| = {centroid:.3e}"))

    centered = frames.t - frames.t.mean(axis=0)
    inertia = float((centered * centered).sum()) * np.eye(3) - centered.T @ centered
    off = np.abs(inertia - np.diag(np.diag(inertia))).max()
    trace = np.trace(inertia)
    diag = np.diag(inertia)
    diag_ok = off < 1e-6 * trace and np.all(np.diff(diag) > -1e-6 * trace)
    rows.append((rid, "inertia-diagonal", "PASS" if diag_ok else "FAIL",
                 f"max off-diagonal {off:.3e} vs trace {trace:.3e}"))
    return rows


def cmd_verify(args) -> int:
    try:
        records = rec.read_jsonl(_read_input(args.input))
    except MalformedRecord as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    all_rows = []
    for r in records:
        all_rows.extend(_verify_record(r))
    width = max((len(r[0]) for r in all_rows), default=2) + 2
    for rid, check, status, note in all_rows:
        print(f"{rid:<{width}}{check:<20}{status:<6}{note}")
    failures = sum(1 for row in all_rows if row[2] == "FAIL")
    print(f"{len(all_rows)} checks, {failures} failures")
    return 0 if failures == 0 else 1


def _add_io(p):
    p.add_argument("input", help="input path, or - for stdin")
    p.add_argument("output", help="output path, or - for stdout")


def _add_threads(p):
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (default: all cores; env {THREADS_ENV} overrides)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rigidframes", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("frames", help="PDB backbone to rigid-frame records")
    _add_io(p)
    p.set_defaults(fn=cmd_frames)

    p = sub.add_parser("canonicalize", help="align records to their inertial frame")
    _add_io(p)
    _add_threads(p)
    p.set_defaults(fn=cmd_canonicalize)

    p = sub.add_parser("perturb", help="Phase-I perturbed view pairs")
    _add_io(p)
    _add_threads(p)
    p.add_argument("--sigma", type=float, default=0.03, help="translation noise scale (A)")
    p.add_argument("--epsilon", type=float, default=0.5, help="rotation concentration")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_perturb)

    p = sub.add_parser("mdpairs", help="Phase-II pairs from a trajectory")
    _add_io(p)
    p.add_argument("--delta-ns", type=float, default=DEFAULT_DELTA_NS,
                   help="pairing interval in ns")
    p.add_argument("--stride-ns", type=float, default=None,
                   help="grid stride in ns (default: delta, disjoint windows)")
    p.add_argument("--frame-spacing-ns", type=float, default=1.0,
                   help="time between consecutive snapshots")
    p.add_argument("--chain", default=None, help="chain id (default: first)")
    p.set_defaults(fn=cmd_mdpairs)

    p = sub.add_parser("fmtarget", help="dump flow-matching target velocities")
    _add_io(p)
    _add_threads(p)
    p.add_argument("--taus", default=None, help="comma-separated taus (default: grid)")
    p.set_defaults(fn=cmd_fmtarget)

    p = sub.add_parser("fmloss", help="evaluate a predictor's flow-matching loss")
    _add_io(p)
    _add_threads(p)
    p.add_argument("--predictor", default="zero", help="zero | oracle | table:PATH")
    p.add_argument("--taus", default=None)
    p.set_defaults(fn=cmd_fmloss)

    p = sub.add_parser("integrate", help="Euler rollout of a predictor from g0")
    _add_io(p)
    _add_threads(p)
    p.add_argument("--predictor", default="oracle")
    p.add_argument("--steps", type=int, default=1000)
    p.set_defaults(fn=cmd_integrate)

    p = sub.add_parser("sample-igso3", help="sample rotation angles to CSV")
    p.add_argument("output", help="output path, or - for stdout")
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_sample_igso3)

    p = sub.add_parser("verify", help="check record invariants")
    p.add_argument("input", help="input path, or - for stdin")
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RigidFramesError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
