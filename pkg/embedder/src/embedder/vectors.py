"""Writers for the vector file formats the classifier pipeline reads.

Binary layout: magic "SEDV", u32 version, u32 rows, u32 dim (little endian),
then rows*dim float32 values row-major, then one label byte per row. The CSV
variant has an id,label,d0..dN header and prints floats with %.9g, which
round-trips float32 exactly.
"""

import struct

from .encode import VectorSet

MAGIC = b"SEDV"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")  # magic, version, rows, dim


def write_vectors(vs: VectorSet, path, format: str = "binary") -> None:
    if format == "binary":
        _write_binary(vs, path)
    elif format == "csv":
        _write_csv(vs, path)
    else:
        raise ValueError(f"unknown format {format!r}")


def _write_binary(vs: VectorSet, path) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(vs), vs.dim))
        f.write(vs.vectors.astype("<f4", copy=False).tobytes())
        f.write(vs.labels.tobytes())


def _write_csv(vs: VectorSet, path) -> None:
    with open(path, "w", newline="") as f:
        f.write("id,label," + ",".join(f"d{i}" for i in range(vs.dim)) + "\n")
        for i in range(len(vs)):
            row = ",".join("%.9g" % v for v in vs.vectors[i])
            f.write(f"{i},{vs.labels[i]},{row}\n")
