"""Field serialization: a documented binary layout and a JSON twin.

Layout (both formats): header with r0, horizon T, grid sizes, rotsym flag
and label; then H, then the leaf metric, then the second fundamental form.
Node order is t-major, then theta, then phi; tensors store the three
independent components (theta-theta, theta-phi, phi-phi) per node.  Binary
payloads are little-endian float64.  Loaders reject length mismatches.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .fields import AnnulusField
from .grids import SphereGrid, TimeGrid

MAGIC = b"ANNF1\n"


def _header(field: AnnulusField) -> dict:
    return {
        "r0": field.r0,
        "T": field.times.T,
        "n_t": field.times.n_t,
        "n_theta": field.sphere.n_theta,
        "n_phi": field.sphere.n_phi,
        "rotsym": bool(field.rotsym),
        "label": field.label,
    }


def _payload(field: AnnulusField):
    n_t = field.times.n_t
    H = np.asarray(field.H_full(), dtype="<f8")
    g = np.stack([field.g_leaf(i) for i in range(n_t)])
    A = np.stack([field.A_leaf(i) for i in range(n_t)])
    comps = lambda T: np.stack([T[..., 0, 0], T[..., 0, 1], T[..., 1, 1]], axis=-1)
    return H, comps(g).astype("<f8"), comps(A).astype("<f8")


def save_field(field: AnnulusField, path, fmt: str = "binary"):
    path = Path(path)
    H, g3, A3 = _payload(field)
    header = _header(field)
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(H.tobytes())
            fh.write(g3.tobytes())
            fh.write(A3.tobytes())
    elif fmt == "json":
        doc = {"header": header, "H": H.ravel().tolist(),
               "g": g3.ravel().tolist(), "A": A3.ravel().tolist()}
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_field(path) -> AnnulusField:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
        if head == MAGIC:
            header = json.loads(fh.readline().decode())
            raw = fh.read()
            n = header["n_t"] * header["n_theta"] * header["n_phi"]
            expect = (n + 3 * n + 3 * n) * 8
            if len(raw) != expect:
                raise ValueError(
                    f"payload length {len(raw)} does not match header ({expect})")
            data = np.frombuffer(raw, dtype="<f8")
            H = data[:n]
            g3 = data[n:4 * n]
            A3 = data[4 * n:]
        else:
            fh.seek(0)
            doc = json.load(fh)
            header = doc["header"]
            n = header["n_t"] * header["n_theta"] * header["n_phi"]
            H = np.asarray(doc["H"], dtype=float)
            g3 = np.asarray(doc["g"], dtype=float)
            A3 = np.asarray(doc["A"], dtype=float)
            if len(H) != n or len(g3) != 3 * n or len(A3) != 3 * n:
                raise ValueError("array lengths do not match the header")
    sphere = SphereGrid(header["n_theta"], header["n_phi"])
    times = TimeGrid(header["T"], header["n_t"])
    shape = (header["n_t"], header["n_theta"], header["n_phi"])
    H = H.reshape(shape)

    def expand(flat):
        c = flat.reshape(shape + (3,))
        out = np.empty(shape + (2, 2))
        out[..., 0, 0] = c[..., 0]
        out[..., 0, 1] = out[..., 1, 0] = c[..., 1]
        out[..., 1, 1] = c[..., 2]
        return out

    if header["rotsym"]:
        return AnnulusField(sphere=sphere, times=times, r0=header["r0"],
                            rotsym=True, label=header.get("label", ""),
                            h_t=H[:, 0, 0].copy())
    return AnnulusField(sphere=sphere, times=times, r0=header["r0"],
                        rotsym=False, label=header.get("label", ""),
                        H_arr=H, g_arr=expand(g3), A_arr=expand(A3))
