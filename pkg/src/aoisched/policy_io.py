"""Artifact files: policy binary/CSV, value and grid exports, metadata headers.

Binary policy format: magic ``AOIP``, one version byte, the state count as
an 8-byte little-endian integer, then one action-code byte per state in
state-index order.

Every CSV artifact starts with a ``#`` comment block carrying the resolved
config, the command line, the seed and the artifact version; solver outputs
also embed a git-style blob SHA-1 of their data section.  Headers contain
nothing volatile, so rerunning a command reproduces files byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import io

import numpy as np

from . import __version__
from .config import SystemParams
from .link import NOMA, OMA, WET, WET_OMA
from .mdp import State, TransitionKernel

__all__ = [
    "POLICY_MAGIC",
    "POLICY_VERSION",
    "GRID_SCHEME_CODES",
    "save_policy_bin",
    "load_policy_bin",
    "metadata_lines",
    "write_csv_artifact",
    "policy_rows",
    "value_rows",
    "grid_rows",
    "kernel_rows",
]

POLICY_MAGIC = b"AOIP"
POLICY_VERSION = 1

# figure-legend scheme codes used in policy grid exports
GRID_SCHEME_CODES = {WET_OMA: 1, OMA: 2, WET: 3, NOMA: 4}


def save_policy_bin(path, policy) -> None:
    policy = np.asarray(policy)
    if policy.min() < 0 or policy.max() > 255:
        raise ValueError("action codes must fit in one byte")
    with open(path, "wb") as fh:
        fh.write(POLICY_MAGIC)
        fh.write(bytes([POLICY_VERSION]))
        fh.write(len(policy).to_bytes(8, "little"))
        fh.write(policy.astype(np.uint8).tobytes())


def load_policy_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != POLICY_MAGIC:
        raise ValueError(f"{path}: not a policy file (bad magic)")
    if blob[4] != POLICY_VERSION:
        raise ValueError(f"{path}: unsupported policy format version {blob[4]}")
    n = int.from_bytes(blob[5:13], "little")
    body = blob[13:]
    if len(body) != n:
        raise ValueError(f"{path}: truncated policy file ({len(body)} of {n} codes)")
    return np.frombuffer(body, dtype=np.uint8).copy()


def _git_blob_sha1(data: bytes) -> str:
    h = hashlib.sha1()
    h.update(b"blob %d\0" % len(data))
    h.update(data)
    return h.hexdigest()


def metadata_lines(params: SystemParams, command: str, seed, extra: dict | None = None) -> list[str]:
    lines = [
        f"# aoisched-version: {__version__}",
        f"# command: {command}",
        f"# seed: {seed}",
    ]
    config = " ".join(f"{k}={v}" for k, v in params.as_config_dict().items())
    lines.append(f"# config: {config}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def write_csv_artifact(path, meta: list[str], write_body, content_hash: bool = False) -> None:
    """Write metadata comment block then the CSV body.

    ``write_body`` receives a text file handle.  With ``content_hash`` the
    body is rendered first and a git-style SHA-1 of it joins the metadata.
    """
    if content_hash:
        buf = io.StringIO()
        write_body(buf)
        body = buf.getvalue()
        meta = meta + [f"# content-sha1: {_git_blob_sha1(body.encode())}"]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(meta) + "\n")
            fh.write(body)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(meta) + "\n")
            write_body(fh)


def policy_rows(policy, kernel: TransitionKernel, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(
        ["state_index", "delta1", "delta2", "e1", "e2", "action_code", "scheme", "action"]
    )
    d1, d2, e1, e2 = kernel.space.grids()
    tags = [kernel.actions.scheme(a).tag for a in range(kernel.n_actions)]
    details = [kernel.actions.describe(a) for a in range(kernel.n_actions)]
    for i, a in enumerate(np.asarray(policy)):
        writer.writerow([i, d1[i], d2[i], e1[i], e2[i], int(a), tags[a], details[a]])


def value_rows(value, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["state_index", "value"])
    for i, v in enumerate(np.asarray(value)):
        writer.writerow([i, repr(float(v))])


def grid_rows(policy, kernel: TransitionKernel, e1: int, e2: int, fh) -> None:
    """Scheme-code grid over (delta1, delta2) at a fixed battery slice."""
    m = kernel.params.battery_levels
    if not (0 <= e1 <= m and 0 <= e2 <= m):
        raise ValueError(f"battery slice ({e1}, {e2}) outside [0, {m}]")
    policy = np.asarray(policy)
    writer = csv.writer(fh)
    writer.writerow(["delta1", "delta2", "scheme_code", "action"])
    for d1 in range(1, kernel.params.delta_max + 1):
        for d2 in range(1, kernel.params.delta_max + 1):
            i = kernel.space.index(State(d1, d2, e1, e2))
            a = int(policy[i])
            code = GRID_SCHEME_CODES[kernel.actions.scheme(a).tag]
            writer.writerow([d1, d2, code, kernel.actions.describe(a)])


def kernel_rows(kernel: TransitionKernel, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["state_index", "action_code", "next_state_index", "probability"])
    for row in kernel.iter_rows():
        writer.writerow([row[0], row[1], row[2], repr(float(row[3]))])
